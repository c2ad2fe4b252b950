"""
Completing a sparse sequence and thinning a dense one.

Half of the reference points are removed and the gaps refilled; then a
sequence of twice the density (the reference plus its mirror image) is
thinned back.  Both results are checked with the classifier and the
density counter.

Run: python3 demos/04_constructions.py
"""

import math

import numpy as np

from fockcis.geometry import (classify, complete_to_cis, extract_cis, phi_density,
                              reference_points, separation_constant)
from fockcis.reference import build_reference
from fockcis.weight import RadialWeight, SpaceParams

w, sp = RadialWeight.alpha_model(2.0), SpaceParams(2.0)
sigma = reference_points(build_reference(w, sp, 399))

half = sigma.subset(np.arange(0, 400, 2))
done = complete_to_cis(half, w, sp, horizon=400)
dense = sigma.union(sigma.rotated(math.pi))
kept = extract_cis(dense, w, sp)

for name, g in (("half", half), ("completed", done), ("doubled", dense), ("extracted", kept)):
    d = phi_density(g, w, sp, 100.0)
    print(f"{name:10s} points={len(g):4d} density=[{d.lower:.3f}, {d.upper:.3f}] "
          f"separation={separation_constant(g):.4f} verdict={classify(g, w, sp).verdict}")
