"""Principal-axis kinematics for incompressible homogeneous tests.

Only diagonal deformation gradients are produced: the loading axes are taken
to coincide with the symmetry axes of the two fiber families, so no shear
appears and the stress tensors stay diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import cos, sin, sqrt

import numpy as np


class Mode(str, Enum):
    UT1 = "UT1"  # uniaxial tension along e1
    UT2 = "UT2"  # uniaxial tension along e2
    ET = "ET"  # equibiaxial tension in the e1-e2 plane

    @property
    def loaded_axes(self) -> tuple[int, ...]:
        return {"UT1": (0,), "UT2": (1,), "ET": (0, 1)}[self.value]

    @property
    def unique_axis(self) -> int:
        """Axis whose stretch differs from the other two (axis of symmetry of C)."""
        return {"UT1": 0, "UT2": 1, "ET": 2}[self.value]


@dataclass(frozen=True)
class DeformationState:
    mode: Mode
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.lam > 0:
            raise ValueError(f"stretch must be positive, got {self.lam!r}")

    @property
    def stretches(self) -> np.ndarray:
        lam = float(self.lam)
        if self.mode is Mode.ET:
            return np.array([lam, lam, lam**-2])
        t = 1.0 / sqrt(lam)
        if self.mode is Mode.UT1:
            return np.array([lam, t, t])
        return np.array([t, lam, t])


@dataclass(frozen=True)
class FiberGeometry:
    """Two fiber families symmetric about e1 at angles +phi and -phi (radians)."""

    phi: float = 0.0

    @classmethod
    def from_degrees(cls, phi_deg: float) -> "FiberGeometry":
        return cls(np.deg2rad(phi_deg))

    @property
    def M1(self) -> np.ndarray:
        return np.array([cos(self.phi), sin(self.phi), 0.0])

    @property
    def M2(self) -> np.ndarray:
        return np.array([cos(self.phi), -sin(self.phi), 0.0])

    @property
    def Mn(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0])

    @property
    def directions(self) -> tuple[np.ndarray, np.ndarray]:
        return self.M1, self.M2

    @property
    def A1(self) -> np.ndarray:
        return np.outer(self.M1, self.M1)

    @property
    def A2(self) -> np.ndarray:
        return np.outer(self.M2, self.M2)


@dataclass(frozen=True)
class InvariantSet:
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float
    I6: float
    I7: float

    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3, self.I4, self.I5, self.I6, self.I7])


def deformation_gradient(state: DeformationState) -> np.ndarray:
    """Diagonal deformation gradient of an incompressible UT/ET state.

    >>> deformation_gradient(DeformationState("UT1", 4.0)).diagonal()
    array([4. , 0.5, 0.5])
    """
    return np.diag(state.stretches)


def right_cauchy_green(F: np.ndarray) -> np.ndarray:
    return F.T @ F


def invariants_from_C(C: np.ndarray, fibers: FiberGeometry) -> InvariantSet:
    """The seven invariants of C and the two structure tensors, by tensor algebra."""
    C = np.asarray(C, dtype=float)
    I1 = np.trace(C)
    I2 = 0.5 * (I1**2 - np.trace(C @ C))
    I3 = np.linalg.det(C)
    M1, M2 = fibers.directions
    C2 = C @ C
    return InvariantSet(
        I1=float(I1),
        I2=float(I2),
        I3=float(I3),
        I4=float(M1 @ C @ M1),
        I5=float(M1 @ C2 @ M1),
        I6=float(M2 @ C @ M2),
        I7=float(M2 @ C2 @ M2),
    )


def invariants(state: DeformationState, fibers: FiberGeometry) -> InvariantSet:
    """Closed-form invariants for a principal-axis state.

    For UT1, ``I1 = lam**2 + 2/lam`` and ``I4 = lam**2 cos^2(phi) + sin^2(phi)/lam``;
    for ET, ``I1 = 2 lam**2 + lam**-4`` and ``I4 = lam**2`` regardless of phi.
    """
    l1, l2, l3 = (float(x) for x in state.stretches)
    c = np.array([l1 * l1, l2 * l2, l3 * l3])
    cos2, sin2 = cos(fibers.phi) ** 2, sin(fibers.phi) ** 2
    I4 = c[0] * cos2 + c[1] * sin2
    I5 = c[0] ** 2 * cos2 + c[1] ** 2 * sin2
    return InvariantSet(
        I1=float(c.sum()),
        I2=float(c[0] * c[1] + c[1] * c[2] + c[2] * c[0]),
        I3=float(c.prod()),
        I4=float(I4),
        I5=float(I5),
        I6=float(I4),
        I7=float(I5),
    )
