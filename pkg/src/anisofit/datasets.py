"""Stress-stretch curves: CSV ingestion, validation and synthesis."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, DomainError, InfeasibleStateError
from .kinematics import DeformationState, Mode

HEADER = ("lambda", "stress", "kind", "unit", "direction", "mode")
KINDS = ("nominal", "cauchy")
UNITS = {"MPa": 1.0, "kPa": 1e-3}
DIRECTION_AXIS = {
    "circumferential": 0,
    "transverse": 0,
    "e1": 0,
    "axial": 1,
    "longitudinal": 1,
    "e2": 1,
}


@dataclass(frozen=True, eq=False)
class Dataset:
    """One measured curve: stress component ``direction`` under loading ``mode``.

    Stresses are stored in MPa in the kind they were recorded in; use
    :meth:`nominal` for first Piola-Kirchhoff values.
    """

    lam: np.ndarray
    stress: np.ndarray
    mode: Mode
    direction: str
    kind: str = "nominal"
    tissue: str = ""

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        stress = np.array(self.stress, dtype=float)
        if lam.ndim != 1 or lam.shape != stress.shape:
            raise DatasetError("lambda and stress must be 1-D arrays of equal length")
        if len(lam) == 0:
            raise DatasetError("dataset has no points")
        if self.direction not in DIRECTION_AXIS:
            raise DatasetError(f"unknown direction {self.direction!r}")
        if self.kind not in KINDS:
            raise DatasetError(f"unknown stress kind {self.kind!r}")
        if not np.all(np.isfinite(stress)) or not np.all(np.isfinite(lam)):
            raise DatasetError("non-finite values in dataset")
        if np.any(lam < 1.0):
            raise DatasetError(f"stretches must be >= 1, got min {lam.min()!r}")
        if np.any(np.diff(lam) <= 0):
            raise DatasetError("stretches must be strictly increasing")
        lam.setflags(write=False)
        stress.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "stress", stress)
        object.__setattr__(self, "mode", Mode(self.mode))

    def __len__(self):
        return len(self.lam)

    @property
    def axis(self) -> int:
        return DIRECTION_AXIS[self.direction]

    @property
    def lambda_max(self) -> float:
        return float(self.lam[-1])

    def axis_stretch(self) -> np.ndarray:
        return np.array([DeformationState(self.mode, l).stretches[self.axis] for l in self.lam])

    def nominal(self) -> np.ndarray:
        if self.kind == "nominal":
            return np.array(self.stress)
        return self.stress / self.axis_stretch()

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.mode.value}|{self.direction}|{self.kind}|".encode())
        h.update(self.lam.tobytes())
        h.update(self.stress.tobytes())
        return h.hexdigest()[:16]


def datasets_fingerprint(datasets) -> str:
    return hashlib.sha256("|".join(d.fingerprint() for d in datasets).encode()).hexdigest()[:16]


def load_dataset(path, tissue: str | None = None) -> Dataset:
    """Read a curve from CSV; kPa values are converted to MPa."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    lam, stress = [], []
    meta = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise DatasetError(f"expected header {','.join(HEADER)}", line=1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(HEADER):
                raise DatasetError(f"expected {len(HEADER)} fields, got {len(row)}", line=line)
            l_s, s_s, kind, unit, direction, mode = (c.strip() for c in row)
            try:
                l_v, s_v = float(l_s), float(s_s)
            except ValueError:
                raise DatasetError(f"non-numeric lambda/stress {l_s!r}, {s_s!r}", line=line) from None
            if kind not in KINDS:
                raise DatasetError(f"kind must be one of {KINDS}, got {kind!r}", line=line)
            if unit not in UNITS:
                raise DatasetError(f"unit must be one of {tuple(UNITS)}, got {unit!r}", line=line)
            if direction not in DIRECTION_AXIS:
                raise DatasetError(f"unknown direction {direction!r}", line=line)
            if mode not in Mode.__members__:
                raise DatasetError(f"mode must be UT1, UT2 or ET, got {mode!r}", line=line)
            if not (np.isfinite(l_v) and np.isfinite(s_v)):
                raise DatasetError("non-finite value", line=line)
            if meta is None:
                meta = (kind, unit, direction, mode)
            elif meta != (kind, unit, direction, mode):
                raise DatasetError("kind/unit/direction/mode must be constant within a file", line=line)
            if lam and l_v <= lam[-1]:
                what = "duplicated" if l_v == lam[-1] else "non-increasing"
                raise DatasetError(f"{what} stretch {l_v!r}", line=line)
            lam.append(l_v)
            stress.append(s_v * UNITS[unit])
    if meta is None:
        raise DatasetError(f"{path}: no data rows")
    kind, _, direction, mode = meta
    return Dataset(np.array(lam), np.array(stress), Mode(mode), direction, kind, tissue or path.stem)


def load_datasets(paths) -> list[Dataset]:
    return [load_dataset(p) for p in paths]


def save_dataset(ds: Dataset, path) -> Path:
    """Write a curve in MPa; ``repr`` floats make the round trip bit-exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for l, s in zip(ds.lam, ds.stress):
            w.writerow([repr(float(l)), repr(float(s)), ds.kind, "MPa", ds.direction, ds.mode.value])
    return path


def synth_dataset(spec, mode, lambda_max: float, n_points: int, noise_sigma: float = 0.0,
                  seed: int = 0, direction: str | None = None, tissue: str = "synthetic") -> Dataset:
    """Nominal-stress curve sampled from a model on ``linspace(1, lambda_max, n_points)``."""
    from .stress import nominal_stress

    mode = Mode(mode)
    if not lambda_max > 1.0:
        raise DomainError(f"lambda_max must exceed 1, got {lambda_max!r}")
    if n_points < 2:
        raise DomainError("need at least two points")
    if direction is None:
        direction = "axial" if mode is Mode.UT2 else "circumferential"
    axis = DIRECTION_AXIS[direction]
    lam = np.linspace(1.0, lambda_max, n_points)
    stress = np.empty(n_points)
    for i, l in enumerate(lam):
        try:
            stress[i] = nominal_stress(spec, DeformationState(mode, l)).P[axis]
        except InfeasibleStateError as exc:
            raise InfeasibleStateError(f"model infeasible at lambda = {l!r}: {exc}", exc.bound, l) from exc
        if not np.isfinite(stress[i]):
            raise InfeasibleStateError(f"model infeasible at lambda = {l!r}", None, l)
    if noise_sigma > 0:
        stress = stress + np.random.default_rng(seed).normal(0.0, noise_sigma, n_points)
    return Dataset(lam, stress, mode, direction, "nominal", tissue)
