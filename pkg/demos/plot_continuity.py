"""
Energy sweep of the extrapolant
===============================

For V = 0 the exponent is known in closed form; for a cosine
potential the modulus table shows how far the sweep is from
Lipschitz.
"""

import math

import numpy as np

from qpcocycle import Frequency, GevreyFunction, QuadratureSpec
from qpcocycle.scheme import continuity_probe, select_parameters

b = select_parameters("7/5", "3/10", "1/200", sigma_start="21/20", zeta="6/5", C2=4)
alpha = Frequency.golden()
spec = QuadratureSpec(2048)

E = [round(x, 12) for x in np.linspace(2.5, 3.5, 11)]
r = continuity_probe(GevreyFunction.constant(0.0, 1.4, 0.1), alpha, E, b, 34, spec)
for e, x in zip(r.E, r.extrapolant):
    exact = math.acosh(e / 2)
    print(f"E = {e:.2f}  extrapolant = {x:.12f}  acosh(E/2) = {exact:.12f}")

E = [round(x, 12) for x in np.linspace(-0.5, 0.5, 41)]
r = continuity_probe(GevreyFunction.cosine(6.0, 1, 1.4, 0.1), alpha, E, b, 34, spec)
print("N0 =", r.N0, " C(N0) =", round(r.C_N0, 2))
for h, m in zip(r.hs, r.modulus):
    print(f"h = {h:5.2f}  modulus = {m:.3e}  modulus/h = {m / h:.3f}")
