"""Command line entry point: ``anisofit {fit,eval,synth,polar,rank}``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .datasets import save_dataset, synth_dataset
from .errors import DatasetError, DomainError, InfeasibleStateError
from .io import RunConfig, build_spec, load_config, reports_from_json, run_eval, run_fit, run_polar
from .models import MODEL_CATALOG
from .quality import rank_models


def _param(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), float(value)


def _weights(text):
    w = tuple(float(x) for x in text.replace(",", " ").split())
    if len(w) == 1:
        w = (w[0], 1.0 - w[0])
    return w


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--model", action="append", choices=sorted(MODEL_CATALOG), help="model (repeatable)")
    common.add_argument("--data", action="append", help="dataset CSV (repeatable, at most two for a fit)")
    common.add_argument("--seed", type=int)
    common.add_argument("--quad-order", type=int, help="Gauss-Legendre order of the sphere rule (AI models)")
    common.add_argument("--phi-deg", type=float, help="mean fiber angle to e1 in degrees")
    common.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE",
                        help="parameter value for the (single) selected model")
    common.add_argument("--out", help="output directory (file for synth)")

    p = argparse.ArgumentParser(prog="anisofit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", parents=[common], help="identify parameters")
    fit.add_argument("--fix-weights", nargs="?", const="0.5,0.5", type=_weights, metavar="W1[,W2]",
                     help="hold the curve weights fixed (default 0.5,0.5)")
    fit.add_argument("--fit-phi", action="store_true", help="treat the fiber angle as a free parameter")
    sub.add_parser("eval", parents=[common], help="chi-squared of given parameters against data")
    syn = sub.add_parser("synth", parents=[common], help="synthesize a dataset from a model")
    syn.add_argument("--mode", choices=["UT1", "UT2", "ET"], required=True)
    syn.add_argument("--direction", help="stress component to record (default: loading direction)")
    syn.add_argument("--lambda-max", type=float, required=True)
    syn.add_argument("--n", type=int, default=20)
    syn.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma in MPa")
    sub.add_parser("polar", parents=[common], help="directional stiffness and density on a 1 degree grid")
    rank = sub.add_parser("rank", parents=[common], help="rank models from JSON reports")
    rank.add_argument("reports", nargs="+", help="report JSON files written by fit or eval")
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if args.model:
        over["models"] = tuple(args.model)
    if args.data:
        over["data"] = tuple(args.data)
    for key in ("seed", "quad_order", "phi_deg", "out"):
        v = getattr(args, key, None)
        if v is not None:
            over[key] = v
    if getattr(args, "fix_weights", None) is not None:
        over["fixed_weights"] = args.fix_weights
    if getattr(args, "fit_phi", False):
        over["fit_phi"] = True
    cfg = replace(cfg, **over)
    if args.param:
        if len(cfg.models) != 1:
            raise DomainError("--param needs exactly one --model")
        vals = {k: dict(v) for k, v in cfg.values.items()}
        vals.setdefault(cfg.models[0], {}).update(dict(args.param))
        cfg = replace(cfg, values=vals)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        for path in cfg.data:
            if not Path(path).is_file():
                print(f"anisofit: error: dataset not found: {path}", file=sys.stderr)
                return 2
        if args.command == "fit":
            summary = run_fit(cfg)
            for kind, (res, q) in summary.items():
                status = "failed" if res is None else f"chi2={q.chi2_total:.6g} cost={res.total_cost:.6g}"
                print(f"{kind:<8} {status}")
        elif args.command == "eval":
            for r in run_eval(cfg):
                print(f"{r.model:<8} chi2 regions " + " ".join(f"{c:.6g}" for c in r.chi2_regions))
        elif args.command == "synth":
            if len(cfg.models) != 1:
                raise DomainError("synth needs exactly one --model")
            kind = cfg.models[0]
            spec = build_spec(kind, cfg.values.get(kind, {}), cfg.phi_deg, cfg.quad_order, cfg.dbb_cutoff)
            ds = synth_dataset(spec, args.mode, args.lambda_max, args.n, args.noise, cfg.seed, args.direction)
            path = save_dataset(ds, args.out or f"{kind}_{args.mode}.csv")
            print(path)
        elif args.command == "polar":
            for path in run_polar(cfg):
                print(path)
        elif args.command == "rank":
            table = rank_models(reports_from_json(args.reports))
            sys.stdout.write(table.to_text())
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / "ranking.csv").write_text(table.to_csv(), encoding="utf-8")
    except FileNotFoundError as exc:
        print(f"anisofit: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, DatasetError, InfeasibleStateError) as exc:
        print(f"anisofit: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
