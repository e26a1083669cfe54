"""
Equibiaxial response of the model catalog
=========================================

Every model is evaluated with parameters identified for aneurysmatic aortic
tissue, fibers at +-26 degrees from the circumferential axis.
"""
import numpy as np

from anisofit import ModelSpec, stress_curve

phi = np.deg2rad(26.0)
params = {
    "NY": dict(k0=0.1148, k1=31.1439, k2=1523.0),
    "HGO": dict(mu=2.6712, k1=0.1742, k2=55.9001),
    "HSGR": dict(mu=0.9347, k1=0.2704, k2=47.0232, p=0.9126),
    "OS": dict(mu=2.5537, k1=3.38107, Jf=0.1149, Jm=0.2369),
    "GOH": dict(mu=1.7416, k1=4.4460, k2=161.392, kappa=0.2256),
    "AMDM": dict(mu=0.9337, k1=0.9118, k2=46.8474, b=3.67),
    "ASMD": dict(mu=0.6517, k1=3.5475, k2=46.4817, kappa1=2.3798e-7, kappa2=0.9, kappa3=0.0),
    "HNORS": dict(mu=1.8517, k1=0.6981, k2=59.9093, kappa_ip=0.7657, kappa_op=0.47),
}

lams = np.linspace(1.0, 1.15, 7)
print("lambda  " + "  ".join(f"{l:8.3f}" for l in lams))

# nominal stress in the circumferential direction (MPa)
for kind, p in params.items():
    P = stress_curve(ModelSpec(kind, p, phi=phi), "ET", lams)
    print(f"{kind:<7} " + "  ".join(f"{x:8.4f}" for x in P[:, 0]))

# the axial direction is softer because the fibers lean towards e1
P = stress_curve(ModelSpec("GOH", params["GOH"], phi=phi), "ET", lams)
print("GOH axial/circumferential at the last stretch:", P[-1, 1] / P[-1, 0])
