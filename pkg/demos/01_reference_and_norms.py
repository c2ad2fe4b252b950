"""
Reference radii and norms for phi(r) = (log+ r)^alpha.

The reference radii y_n solve psi'(y_n) = p n + 2.  For alpha = 2 and p = 2
they are (n + 1)/2, and the squared monomial norms have a closed form
through erfc.  This script prints both, then compares the two estimates of
the evaluation norm at a few radii.

Run: python3 demos/01_reference_and_norms.py
"""

import math

import numpy as np

from fockcis.reference import build_reference, log_evaluation_norm, log_monomial_norm
from fockcis.weight import RadialWeight, SpaceParams

w, sp = RadialWeight.alpha_model(2.0), SpaceParams(2.0)
ref = build_reference(w, sp, 8)
print("reference radii y_n:", np.round(ref.y, 12).tolist())

print("\n n   log||z^n||   asymptotic   difference")
for n in (0, 4, 10, 25, 50):
    q = log_monomial_norm(w, sp, n).log_mag
    a = log_monomial_norm(w, sp, n, "asymptotic").log_mag
    print(f"{n:3d} {q:12.6f} {a:12.6f} {q - a:12.6f}")
print("the difference settles near 0.5 log(2 pi sqrt(2 pi)) =",
      round(0.5 * math.log(2 * math.pi * math.sqrt(2 * math.pi)), 6))

print("\n  t     theorem     series   monomial lower bound")
for t in (0.5, 1.0, 2.0, 5.0, 10.0):
    vals = [log_evaluation_norm(w, sp, t, m).log_mag for m in ("theorem", "series", "monomial_lower")]
    print(f"{t:5.1f} " + " ".join(f"{v:10.4f}" for v in vals))

w15 = RadialWeight.alpha_model(1.5)
print("\nalpha = 1.5, p = 2: y_n = ((2n+2)/3)^2 ->",
      np.round(build_reference(w15, sp, 4).y, 6).tolist())
