"""
Interpolating on the reference sequence.

The interpolant f_v(z) = sum_n v_n ||L_n|| G(z) / (G'(sigma_n)(z - sigma_n))
takes the value v_k ||L_k|| at sigma_k.  This script checks that at the
first nodes, computes the area norm of f_v by quadrature for a few random
v, and evaluates the two-sided growth envelope of the canonical product.

Run: python3 demos/03_interpolation.py   (about ten seconds)
"""

import math

import numpy as np

from fockcis.geometry import LogPoint, reference_points
from fockcis.product import (CanonicalProduct, CoefficientVector, envelope_ratio,
                             interpolant_norm, interpolate)
from fockcis.reference import build_reference, log_evaluation_norm
from fockcis.weight import RadialWeight, SpaceParams

w, sp = RadialWeight.alpha_model(2.0), SpaceParams(2.0)
cp = CanonicalProduct(reference_points(build_reference(w, sp, 120)))

v = CoefficientVector.dense([1.0, -0.5j, 0.25, 2.0])
print("node   f_v(sigma_k)/||L_k||")
for k in range(6):
    z = cp.sequence[k]
    val = interpolate(cp, w, sp, v, z)
    shown = 0 if val.is_zero else val.to_complex() / math.exp(log_evaluation_norm(w, sp, z.t).log_mag)
    print(f"{k:4d}   {complex(shown):.6g}")

rng = np.random.default_rng(0)
print("\n||f_v|| / ||v|| for random v on the first ten nodes")
for _ in range(3):
    v = CoefficientVector.dense(rng.standard_normal(10) + 1j * rng.standard_normal(10))
    print(f"  {math.exp(interpolant_norm(cp, w, sp, v).log_mag) / v.norm():.1f}")

print("\nlog of |G|^2 e^{-2 phi} against its envelope, by argument (t = 10)")
for th in (0.05, 0.5, 1.5, 3.0):
    c = envelope_ratio(cp, w, sp, LogPoint(10.0, th))
    print(f"  theta={th:4.2f}  centred log-ratio {c.log_ratio:7.3f}  inside C=1e3: {c.ok}")
