"""
Fiber dispersion and directional stiffness
==========================================

How the von Mises concentration ``b`` maps to the dispersion parameter kappa,
and how dispersion spreads the reference-state stiffness over directions.
"""
import numpy as np

from anisofit import ModelSpec, density_curve, directional_stiffness
from anisofit.dispersion import b_from_kappa, kappa_from_b

for b in (0.0, 0.5, 3.67, 20.0, 200.0):
    print(f"b = {b:7.2f}  kappa = {kappa_from_b(b):.6f}")

# kappa = 0.2256 is a fairly dispersed distribution
print("b for kappa = 0.2256:", b_from_kappa(0.2256))

alpha = np.deg2rad(np.arange(-90, 91, 15.0))
phi = np.deg2rad(26.0)
specs = {
    "HGO (aligned)": ModelSpec("HGO", dict(mu=2.6712, k1=0.1742, k2=55.9001), phi=phi),
    "GOH": ModelSpec("GOH", dict(mu=1.7416, k1=4.4460, k2=161.392, kappa=0.2256), phi=phi),
    "AMDM": ModelSpec("AMDM", dict(mu=0.9337, k1=0.9118, k2=46.8474, b=3.67), phi=phi),
}
print("alpha  " + "  ".join(f"{k:>14}" for k in specs))
curves = {k: directional_stiffness(s, alpha).values for k, s in specs.items()}
for i, a in enumerate(np.rad2deg(alpha)):
    print(f"{a:5.0f}  " + "  ".join(f"{curves[k][i]:14.5f}" for k in specs))

rho = density_curve(specs["GOH"], alpha)
print("GOH in-plane density:", np.round(rho.values, 4))
