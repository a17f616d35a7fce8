"""
Avalanche principle and the two-scale defect
============================================
"""

from qpcocycle import Frequency, Mat2, MatrixFunction, QuadratureSpec
from qpcocycle.freqlib import cf_convergents
from qpcocycle.scheme import aligned_hyperbolic_sequence, avalanche_check, select_parameters, two_scale_defect

# chains of strongly hyperbolic, aligned matrices are additive up to n / mu
for mu in (1e2, 1e3, 1e4):
    r = avalanche_check(aligned_hyperbolic_sequence(0, 50, mu), mu)
    print(f"mu = {mu:7.0f}  lhs = {r.lhs:.3e}   n/mu = {50 / mu:.3e}")

print("diagonal chain:", avalanche_check([Mat2.diag(1024.0, 1 / 1024)] * 50, 1024.0).lhs)

alpha = Frequency.golden()
q = next(c for c in cf_convergents(alpha, 20) if c.q == 89)
b = select_parameters("7/5", "3/10", "1/200", sigma_start="21/20", zeta="6/5", C2=4)
A = MatrixFunction.almost_mathieu(0.0, 3.0, 1.4, 0.1)
for m in (4, 8, 16, 32):
    e = two_scale_defect(A, alpha, 112, m, q, b, QuadratureSpec(4096))
    print(f"m = {m:2d}  defect = {e.defect:.3e}  bound = {e.bound:.3f}")
