"""
Frequencies, parameter bundles and scale schedules
==================================================
"""

from qpcocycle import Frequency, construct_omega_eta
from qpcocycle.freqlib import cf_convergents, classify_frequency
from qpcocycle.scheme import select_parameters, select_qtildes, smallest_certified_start

golden = Frequency.golden()
convs = cf_convergents(golden, 30)
rep = classify_frequency(convs, 0.5, 2.0)
for name, c in rep.entries.items():
    print(f"{name:8s} witness {c.witness:.4g}")

# a bundle with sigma near 1, so windows open at q ~ 30
b = select_parameters("7/5", "3/10", "1/200", sigma_start="21/20", zeta="6/5", C2=4)
print("sigma1 =", b.sigma1, " gamma =", b.gamma, " c' =", b.c_prime)

print("q~ chain:", [c.q for c in select_qtildes(golden, 8, 3, b.zeta)])

# the first start whose depth-4 schedule certifies every inequality
for f in (golden, construct_omega_eta(0.5, 1.0, 80)):
    sch = smallest_certified_start(f, b, 4)
    print(f.label, sch.qtildes[0], "->", [e.m for e in sch.entries[1:]])
