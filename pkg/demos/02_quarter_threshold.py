"""
Shifting the reference radii by a constant.

Moving every point of the reference sequence outward by delta (in log
modulus) gives block averages Delta_N = 2|delta| for alpha = 2, p = 2, so
the classifier should switch at |delta| = 1/4.  The Gram sections of the
normalised kernels give an independent view: points on a single ray make
those sections badly conditioned, while spreading the arguments by the
golden angle keeps them tame, and only inward (overcomplete) shifts make
them blow up.

Run: python3 demos/02_quarter_threshold.py
"""

import math

import numpy as np

from fockcis.frame import gram_trend, kernel_table_for
from fockcis.geometry import classify, perturbed_reference
from fockcis.reference import build_reference
from fockcis.weight import RadialWeight, SpaceParams

w, sp = RadialWeight.alpha_model(2.0), SpaceParams(2.0)
ref = build_reference(w, sp, 199)

print(" delta   verdict        reason                 Delta_N(best)")
for delta in (-0.35, -0.3, -0.2, 0.0, 0.1, 0.2, 0.25, 0.3, 0.5):
    rep = classify(perturbed_reference(ref, delta), w, sp)
    best = rep.best_N or min(rep.delta_N_table, key=rep.delta_N_table.get)
    print(f"{delta:6.2f}   {rep.verdict:13s}  {str(rep.reason):22s} {rep.delta_N_table[best]:.3f}")

golden = math.pi * (3 - math.sqrt(5)) * np.arange(80)
kt = kernel_table_for(w, 41.0)
print("\nGram condition numbers at sizes 10, 20, 40, 60")
for delta in (0.0, 0.1, 0.5, -0.5):
    for label, theta in (("ray", 0.0), ("golden", golden)):
        g = perturbed_reference(build_reference(w, sp, 79), delta, theta)
        rr = gram_trend(kt, g, w)
        conds = " ".join(f"{c:10.3g}" for c in rr.conditions)
        print(f"delta={delta:5.2f} {label:7s} {conds}   {rr.condition_trend}")
