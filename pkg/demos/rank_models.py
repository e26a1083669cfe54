"""
Ranking models by quality of fit
================================

A noisy "measurement" is produced with the HNORS model and every other model
is scored against it with the normalized chi-squared, using fixed parameters.
"""
import numpy as np

from anisofit import ModelSpec
from anisofit.datasets import synth_dataset
from anisofit.quality import chi_squared, rank_models

phi = np.deg2rad(26.0)
hnors = ModelSpec("HNORS", dict(mu=1.8517, k1=0.6981, k2=59.9093, kappa_ip=0.7657, kappa_op=0.47), phi=phi)
data = [synth_dataset(hnors, "ET", 1.15, 16, noise_sigma=0.002, seed=s, direction=d)
        for s, d in ((1, "circumferential"), (2, "axial"))]

candidates = [
    hnors,
    ModelSpec("HGO", dict(mu=2.6712, k1=0.1742, k2=55.9001), phi=phi),
    ModelSpec("GOH", dict(mu=1.7416, k1=4.4460, k2=161.392, kappa=0.2256), phi=phi),
    ModelSpec("HSGR", dict(mu=0.9347, k1=0.2704, k2=47.0232, p=0.9126), phi=phi),
]
reports = [chi_squared(s, data) for s in candidates]
print(rank_models(reports).to_text())

# the regional values grow as more of the curve is included
for r in reports:
    print(r.model, ["%.4g" % c for c in r.chi2_regions])
