"""
Finite-scale exponents of the almost Mathieu cocycle
====================================================

L_N for lambda = 3 at the golden mean, compared against the
Herman lower bound ln(lambda).
"""

import math

from qpcocycle import Frequency, MatrixFunction, QuadratureSpec, le_sequence

alpha = Frequency.golden()
spec = QuadratureSpec(4096)

# E = 0 sits inside the spectrum; L_N decreases towards ln 3
A = MatrixFunction.almost_mathieu(0.0, 3.0)
for r in le_sequence(A, alpha, [1, 10, 100, 1000, 4000], spec):
    print(f"N = {r.N:5d}   L_N = {r.value:.10f}")
print(f"ln 3        = {math.log(3):.10f}")

# the extrapolant 2 L_2N - L_N cancels most of the 1/N drift
L = {r.N: r.value for r in le_sequence(A, alpha, [200, 400], spec)}
print("2 L_400 - L_200 =", 2 * L[400] - L[200])
