"""Normalized chi-squared quality of fit and model ranking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import datasets_fingerprint
from .errors import DomainError
from .models import MODEL_CATALOG, ModelSpec

EPS = 1e-9  # MPa; data points at or below this stress are not used as denominators


def chi_squared_terms(predicted, measured, eps: float = EPS):
    """``sum (P - P_exp)^2 / P_exp`` over points with ``P_exp > eps``.

    Returns ``(chi2, n_excluded)``.

    >>> round(chi_squared_terms([1.1, 2.2], [1.0, 2.0])[0], 12)
    0.03
    """
    pred = np.asarray(predicted, dtype=float)
    meas = np.asarray(measured, dtype=float)
    keep = meas > eps
    r = pred[keep] - meas[keep]
    return float(np.sum(r * r / meas[keep])), int(np.count_nonzero(~keep))


def regional_ranges(lambda_max: float):
    """Nested stretch intervals covering the first, second and third third of the excursion."""
    if not lambda_max > 1.0:
        raise DomainError(f"lambda_max must exceed 1, got {lambda_max!r}")
    return tuple((1.0, 1.0 + k / 3.0 * (lambda_max - 1.0)) for k in (1, 2, 3))


@dataclass(frozen=True)
class QualityReport:
    model: str
    formulation: str
    nop: int
    chi2_per_curve: tuple
    chi2_regions: tuple  # totals over regions 1, 2, 3
    lambda_max: tuple
    n_excluded: int
    dataset_id: str

    @property
    def chi2_total(self) -> float:
        return self.chi2_regions[2]

    @property
    def chi2_region1(self) -> float:
        return self.chi2_regions[0]

    @property
    def chi2_region2(self) -> float:
        return self.chi2_regions[1]

    @property
    def chi2_region3(self) -> float:
        return self.chi2_regions[2]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "formulation": self.formulation,
            "nop": self.nop,
            "chi2_per_curve": [float(x) for x in self.chi2_per_curve],
            "chi2_regions": [float(x) for x in self.chi2_regions],
            "chi2_total": float(self.chi2_total),
            "lambda_max": [float(x) for x in self.lambda_max],
            "n_excluded": self.n_excluded,
            "dataset_id": self.dataset_id,
        }


def report_from_predictions(model: str, predictions, datasets, eps: float = EPS,
                            formulation: str | None = None, nop: int | None = None) -> QualityReport:
    datasets = list(datasets)
    if not datasets or any(len(d) == 0 for d in datasets):
        raise DomainError("chi-squared needs at least one nonempty dataset")
    per_curve, regions, lmax, excluded = [], np.zeros(3), [], 0
    for pred, ds in zip(predictions, datasets):
        pred = np.asarray(pred, dtype=float)
        meas = ds.nominal()
        lmax.append(ds.lambda_max)
        ranges = regional_ranges(ds.lambda_max) if ds.lambda_max > 1.0 else ((1.0, 1.0),) * 3
        for k, (_, hi) in enumerate(ranges):
            # a small tolerance keeps grid points that sit on a region edge
            sel = ds.lam <= hi + 1e-12 * hi
            regions[k] += chi_squared_terms(pred[sel], meas[sel], eps)[0]
        c, n_ex = chi_squared_terms(pred, meas, eps)
        per_curve.append(c)
        excluded += n_ex
    info = MODEL_CATALOG.get(model)
    return QualityReport(
        model=model,
        formulation=formulation or (info.formulation if info else ""),
        nop=nop if nop is not None else (info.nop if info else 0),
        chi2_per_curve=tuple(per_curve),
        chi2_regions=tuple(float(x) for x in regions),
        lambda_max=tuple(lmax),
        n_excluded=excluded,
        dataset_id=datasets_fingerprint(datasets),
    )


def chi_squared(spec: ModelSpec, datasets, eps: float = EPS) -> QualityReport:
    """Quality of fit of a parameterized model against one or more curves."""
    from .stress import stress_curve

    datasets = list(datasets)
    if not datasets:
        raise DomainError("chi-squared needs at least one dataset")
    preds = [stress_curve(spec, ds.mode, ds.lam)[:, ds.axis] for ds in datasets]
    return report_from_predictions(spec.kind, preds, datasets, eps)


@dataclass(frozen=True)
class RankRow:
    rank: int
    model: str
    formulation: str
    chi2: float
    nop: int


@dataclass(frozen=True)
class RankTable:
    rows: tuple
    dataset_id: str

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def order(self) -> tuple:
        return tuple(r.model for r in self.rows)

    def to_csv(self) -> str:
        lines = ["rank,model,type,chi2,nop"]
        lines += [f"{r.rank},{r.model},{r.formulation},{r.chi2!r},{r.nop}" for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [f"{'rank':>4}  {'model':<8} {'type':<6} {'chi2':>14} {'nop':>4}"]
        lines += [f"{r.rank:>4}  {r.model:<8} {r.formulation:<6} {r.chi2:>14.6g} {r.nop:>4}" for r in self.rows]
        return "\n".join(lines) + "\n"


def rank_models(reports) -> RankTable:
    """Sort reports by region-3 chi-squared; ties go to fewer parameters, then name."""
    reports = list(reports)
    if not reports:
        raise DomainError("nothing to rank")
    ids = {r.dataset_id for r in reports}
    if len(ids) > 1:
        raise DomainError(f"reports were computed on different datasets: {sorted(ids)}")
    ordered = sorted(reports, key=lambda r: (r.chi2_total, r.nop, r.model))
    rows = tuple(RankRow(i + 1, r.model, r.formulation, float(r.chi2_total), r.nop) for i, r in enumerate(ordered))
    return RankTable(rows, ids.pop())
