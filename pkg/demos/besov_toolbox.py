"""
Dyadic norms and the inequality zoo
===================================

Evaluate Besov and Sobolev norms on random fields and check the seven
standing inequalities (interpolation, embeddings, algebra, duality,
fractional Leibniz, negative-regularity product) as observed
LHS-over-RHS ratios.  Well below one means slack; near one means the
inequality is doing real work at these parameters.
"""

import numpy as np

from wrlb import BesovParams, MeasureSpec, besov_norm, holder, ratio_survey, sample_u_batch, sobolev_norm
from wrlb.spectral import SpectralField

# norms of a single rough field at a few regularities
u = SpectralField(sample_u_batch(MeasureSpec(s=2.0, kind="mu", m=8), 3, np.arange(1)).coeffs[0])
print("norms of one mu-sampled field (m = 8):")
for s in (0.5, 1.0, 1.5):
    b = besov_norm(u, BesovParams(s, 2, 2))
    h = sobolev_norm(u, s)
    print(f"  s = {s}:  B^s_22 = {b:8.4f}   H^s = {h:8.4f}   ratio {h / b:.4f}")
print(f"  Holder C^0.4 norm: {besov_norm(u, holder(0.4)):.4f}")

# survey the inequalities over a modest randomized batch
print("\nworst LHS/RHS ratio over 200 random fields:")
for name, ratio in sorted(ratio_survey(200, 3).items()):
    print(f"  {name:7s} {ratio:.4f}")
