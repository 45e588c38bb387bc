"""Binomial codes and the three phase-measurement schemes.

A binomial code with parameters (N, K) stores a qubit in Fock states spaced
N apart, with square-rooted binomial amplitudes.  Reading the qubit out in
the X basis means measuring the oscillator phase and asking which logical
codeword the outcome looks like.  This script prints the Fock-space anatomy
of a few codes and then compares the canonical, adaptive-homodyne and
heterodyne measurements by their misassignment rate q.
"""

import numpy as np

from binplanar import Code, build_povm, measurement_error_rate
from binplanar.codes import codeword

rng = np.random.default_rng(11)

print("=" * 64)
print("codeword support")
print("=" * 64)
for n, k in [(1, 1), (2, 2), (2, 6), (3, 4)]:
    code = Code(n, k)
    for mu in (0, 1):
        amp = codeword(code, mu)
        support = np.flatnonzero(np.abs(amp) > 1e-12)
        terms = ", ".join(f"{amp[m].real:+.3f}|{m}>" for m in support)
        print(f"({n},{k}) mu={mu}  nbar={code.nbar:4.1f}  {terms}")
    print()

print("=" * 64)
print("X-basis misassignment rate q (binning QSI, 20000 shots)")
print("=" * 64)
kinds = ("canonical", "ahd", "heterodyne")
print(f"{'code':>7} {'nbar':>5} " + " ".join(f"{k:>16}" for k in kinds))
for n, k in [(2, 2), (2, 4), (2, 6), (3, 4)]:
    code = Code(n, k)
    row = []
    for kind in kinds:
        povm = build_povm(kind, code.n_max)
        q, se = measurement_error_rate(code, povm, "binning",
                                       shots=20000, rng=rng)
        row.append(f"{q:.4f} ({se:.4f})")
    print(f"  ({n},{k}) {code.nbar:5.1f} " + " ".join(f"{r:>16}" for r in row))

print()
print("Heterodyne stays roughly an order of magnitude worse at fixed nbar;")
print("the adaptive-homodyne scheme tracks the canonical bound closely.")
