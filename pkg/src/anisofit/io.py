"""Run configuration and the fit / eval / polar / synth / rank pipelines.

Configuration files are INI documents::

    [run]
    models = GOH, HGO
    data = circumferential.csv, axial.csv
    seed = 0
    phi_deg = 26

    [ga]
    population = 40

    [GOH]
    kappa = 0, 0.3      ; two numbers: search bounds
    k2 = 161.392        ; one number: value (held fixed in a fit)

Reports are written as sorted-key JSON without timing information so that
reruns with the same seed are byte-identical; wall-clock time goes to the
companion ``.txt`` file.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .datasets import datasets_fingerprint, load_dataset
from .errors import DomainError
from .models import DEFAULT_AI_ORDER, MODEL_CATALOG, ModelSpec
from .optimize import DEFAULT_WEIGHT_BOUNDS, FitProblem, GAConfig, hybrid_fit
from .quality import chi_squared, rank_models, QualityReport
from .stress import density_curve, directional_stiffness, stress_curve


@dataclass(frozen=True)
class RunConfig:
    models: tuple = ()
    data: tuple = ()
    seed: int = 0
    quad_order: int = DEFAULT_AI_ORDER
    phi_deg: float = 0.0
    fit_phi: bool = False
    fixed_weights: tuple | None = None
    weight_bounds: tuple = DEFAULT_WEIGHT_BOUNDS
    dbb_cutoff: bool = False
    out: str = "results"
    ga: GAConfig = GAConfig()
    values: dict = field(default_factory=dict)  # model -> {param: value}
    bounds: dict = field(default_factory=dict)  # model -> {param: (lo, hi)}

    def validate(self):
        for m in self.models:
            if m not in MODEL_CATALOG:
                raise DomainError(f"unknown model {m!r}; choose from {sorted(MODEL_CATALOG)}")
        for p in self.data:
            if not Path(p).is_file():
                raise FileNotFoundError(f"dataset not found: {p}")
        for model, bds in self.bounds.items():
            for name, (lo, hi) in bds.items():
                if not lo <= hi:
                    raise DomainError(f"[{model}] bounds for {name} are not ordered: {lo} > {hi}")
        return self

    def hash(self, datasets=()) -> str:
        """Digest of everything that affects results (output path excluded, data by content)."""
        d = asdict(self)
        d.pop("out")
        d["data"] = datasets_fingerprint(datasets) if datasets else list(self.data)
        return hashlib.sha256(json.dumps(d, sort_keys=True, default=list).encode()).hexdigest()[:16]


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _bool(text):
    return text.strip().lower() in ("1", "true", "yes", "on")


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # parameter names are case sensitive
    cp.read(path, encoding="utf-8")
    kw = {}
    if cp.has_section("run"):
        run = cp["run"]
        base = path.parent
        if "models" in run:
            kw["models"] = tuple(m.strip() for m in run["models"].replace(",", " ").split())
        if "data" in run:
            kw["data"] = tuple(str((base / p.strip()).resolve()) if not Path(p.strip()).is_absolute() else p.strip()
                               for p in run["data"].split(",") if p.strip())
        for key, conv in (("seed", int), ("quad_order", int), ("phi_deg", float), ("out", str)):
            if key in run:
                kw[key] = conv(run[key])
        for key in ("fit_phi", "dbb_cutoff"):
            if key in run:
                kw[key] = _bool(run[key])
        if "fix_weights" in run:
            kw["fixed_weights"] = _floats(run["fix_weights"])
        if "weight_bounds" in run:
            kw["weight_bounds"] = _floats(run["weight_bounds"])
    if cp.has_section("ga"):
        names = {f.name: f.type for f in fields(GAConfig)}
        ga = {}
        for k, v in cp["ga"].items():
            if k not in names:
                raise DomainError(f"unknown [ga] option {k!r}")
            ga[k] = float(v) if k in ("crossover_rate", "mutation_rate", "mutation_scale", "blend_alpha") else int(v)
        kw["ga"] = GAConfig(**ga)
    values, bounds = {}, {}
    for sec in cp.sections():
        if sec in ("run", "ga"):
            continue
        if sec not in MODEL_CATALOG:
            raise DomainError(f"unknown section [{sec}]")
        for k, v in cp[sec].items():
            nums = _floats(v)
            if len(nums) == 1:
                values.setdefault(sec, {})[k] = nums[0]
            elif len(nums) == 2:
                bounds.setdefault(sec, {})[k] = nums
            else:
                raise DomainError(f"[{sec}] {k}: expected a value or a 'lower, upper' pair")
    kw["values"], kw["bounds"] = values, bounds
    cfg = RunConfig(**kw)
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def build_spec(kind: str, values: dict, phi_deg: float = 0.0, quad_order: int = DEFAULT_AI_ORDER,
               dbb_cutoff: bool = False) -> ModelSpec:
    info = MODEL_CATALOG[kind]
    missing = [n for n in info.param_names if n not in values]
    if missing:
        raise DomainError(f"{kind}: missing parameter values {missing}")
    params = {n: values[n] for n in info.param_names}
    return ModelSpec(kind, params, float(np.deg2rad(values.get("phi_deg", phi_deg))), quad_order, dbb_cutoff)


def _template(kind, cfg: RunConfig):
    """A valid starting spec: configured values where given, otherwise interval midpoints."""
    info = MODEL_CATALOG[kind]
    given = cfg.values.get(kind, {})
    vals = {}
    for p in info.params:
        if p.name in given:
            vals[p.name] = given[p.name]
        else:
            lo, hi = cfg.bounds.get(kind, {}).get(p.name, p.search_bounds)
            vals[p.name] = float(np.sqrt(max(lo, 1e-12) * hi)) if p.log else 0.5 * (lo + hi)
    return build_spec(kind, vals, cfg.phi_deg, cfg.quad_order, cfg.dbb_cutoff)


def _dump(obj, path: Path):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _curves_csv(spec, datasets, path: Path):
    lines = ["dataset,mode,direction,lambda,measured,fitted"]
    for i, ds in enumerate(datasets):
        fitted = stress_curve(spec, ds.mode, ds.lam)[:, ds.axis]
        for l, m, f in zip(ds.lam, ds.nominal(), fitted):
            lines.append(f"{i},{ds.mode.value},{ds.direction},{float(l)!r},{float(m)!r},{float(f)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def fit_model(kind: str, datasets, cfg: RunConfig):
    """Fit one model; returns ``(FitResult, QualityReport, spec)``."""
    template = _template(kind, cfg)
    info = template.info
    free = [n for n in info.param_names if n not in cfg.values.get(kind, {})]
    if cfg.fit_phi and info.uses_phi:
        free.append("phi")
    bounds = {}
    for n, (lo, hi) in cfg.bounds.get(kind, {}).items():
        if n == "phi_deg":
            bounds["phi"] = (np.deg2rad(lo), np.deg2rad(hi))
        else:
            bounds[n] = (lo, hi)
    problem = FitProblem(template, datasets, free=free, bounds=bounds,
                         fixed_weights=cfg.fixed_weights if len(datasets) == 2 else None,
                         weight_bounds=cfg.weight_bounds)
    ga = replace(cfg.ga, seed=cfg.seed, population=max(cfg.ga.population, 2 * problem.dim))
    result = hybrid_fit(problem, ga)
    spec = template.with_params(**{k: v for k, v in result.params.items()}, phi=result.phi)
    quality = chi_squared(spec, datasets)
    return result, quality, spec


def run_fit(cfg: RunConfig):
    """Fit every configured model and write per-model reports plus a ranking.

    A model that fails hard is recorded with its error and left out of the
    ranking; the other models are unaffected.
    """
    cfg.validate()
    if not cfg.models:
        raise DomainError("no models selected")
    datasets = [load_dataset(p) for p in cfg.data]
    if not datasets:
        raise DomainError("no datasets given")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.hash(datasets)
    reports, summary = [], {}
    for kind in cfg.models:
        t0 = time.perf_counter()
        doc = {"model": kind, "config_hash": chash, "seed": cfg.seed,
               "datasets": [{"mode": d.mode.value, "direction": d.direction, "n": len(d),
                             "fingerprint": d.fingerprint()} for d in datasets]}
        try:
            result, quality, spec = fit_model(kind, datasets, cfg)
            doc.update(fit=result.to_dict(), quality=quality.to_dict(), spec=spec.to_dict())
            _curves_csv(spec, datasets, out / f"{kind}_curves.csv")
            reports.append(quality)
            summary[kind] = (result, quality)
        except Exception as exc:  # noqa: BLE001 - one model's failure must not abort the others
            doc["error"] = f"{type(exc).__name__}: {exc}"
            summary[kind] = (None, None)
        runtime = time.perf_counter() - t0
        _dump(doc, out / f"{kind}.json")
        (out / f"{kind}.txt").write_text(_text_report(doc, runtime), encoding="utf-8")
    if reports:
        table = rank_models(reports)
        (out / "ranking.csv").write_text(table.to_csv(), encoding="utf-8")
        (out / "ranking.txt").write_text(table.to_text(), encoding="utf-8")
    return summary


def _text_report(doc, runtime) -> str:
    lines = [f"model         {doc['model']}", f"config hash   {doc['config_hash']}", f"seed          {doc['seed']}"]
    if "error" in doc:
        lines.append(f"error         {doc['error']}")
    else:
        fit, q = doc["fit"], doc["quality"]
        for k, v in fit["params"].items():
            lines.append(f"  {k:<10} {v:>14.6g}")
        lines.append(f"  {'phi [deg]':<10} {fit['phi_deg']:>14.6g}")
        lines.append(f"weights       {', '.join(f'{w:.4f}' for w in fit['weights'])}")
        lines.append(f"errors        {', '.join(f'{e:.6g}' for e in fit['errors'])}")
        lines.append(f"total cost    {fit['total_cost']:.6g} (unweighted {fit['unweighted_total']:.6g})")
        lines.append(f"KKT residual  {fit['kkt_residual']:.3g}  converged={fit['converged']}")
        lines.append(f"chi2 regions  {', '.join(f'{c:.6g}' for c in q['chi2_regions'])}")
    lines.append(f"runtime [s]   {runtime:.2f}")
    return "\n".join(lines) + "\n"


def run_eval(cfg: RunConfig) -> list[QualityReport]:
    """Quality of fit for models with fully specified parameters (no fitting)."""
    cfg.validate()
    datasets = [load_dataset(p) for p in cfg.data]
    reports = []
    for kind in cfg.models:
        spec = build_spec(kind, cfg.values.get(kind, {}), cfg.phi_deg, cfg.quad_order, cfg.dbb_cutoff)
        reports.append(chi_squared(spec, datasets))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in reports:
        _dump(r.to_dict(), out / f"{r.model}_quality.json")
    table = rank_models(reports)
    (out / "ranking.csv").write_text(table.to_csv(), encoding="utf-8")
    return reports


def polar_table(spec: ModelSpec, step_deg: float = 1.0):
    alpha_deg = np.arange(0.0, 360.0 + 0.5 * step_deg, step_deg)
    alpha = np.deg2rad(alpha_deg)
    ds = directional_stiffness(spec, alpha).values
    dens = density_curve(spec, alpha)
    return alpha_deg, ds, None if dens is None else dens.values


def run_polar(cfg: RunConfig) -> list[Path]:
    """Write ``<model>_polar.csv`` with DS and, for dispersion models, the density."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in cfg.models:
        spec = build_spec(kind, cfg.values.get(kind, {}), cfg.phi_deg, cfg.quad_order, cfg.dbb_cutoff)
        a, ds, dens = polar_table(spec)
        header = "alpha_deg,ds" + (",density" if dens is not None else "")
        rows = [header]
        for i in range(len(a)):
            row = f"{float(a[i])!r},{float(ds[i])!r}"
            if dens is not None:
                row += f",{float(dens[i])!r}"
            rows.append(row)
        path = out / f"{kind}_polar.csv"
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        written.append(path)
    return written


def reports_from_json(paths) -> list[QualityReport]:
    reps = []
    for p in paths:
        doc = json.loads(Path(p).read_text(encoding="utf-8"))
        q = doc.get("quality", doc)
        if "chi2_regions" not in q:
            raise DomainError(f"{p}: no quality section")
        reps.append(QualityReport(q["model"], q["formulation"], int(q["nop"]), tuple(q["chi2_per_curve"]),
                                  tuple(q["chi2_regions"]), tuple(q["lambda_max"]), int(q["n_excluded"]),
                                  q["dataset_id"]))
    return reps
