"""A planar-code timeslice, shot by shot.

Each shot prepares the cluster-state timeslice, measures every qubit in
phase, hardens the outcomes to X-basis bits, extracts plaquette syndromes
and hands them to minimum-weight matching.  The demo prints a few raw
shots, then compares the unit-weight decoder against the soft variant that
reweights the matching graph with the per-qubit likelihood records.
"""

import numpy as np

from binplanar import (Code, NoiseParams, ShotContext, build_lattice,
                       build_povm, decode, run_shot)
from binplanar.harness import calibrate_pe

L, gamma = 3, 0.08
code = Code(3, 4)
lat = build_lattice(L)
noise = NoiseParams(gamma, code.N)
povm = build_povm("ahd", code.n_max)
ctx = ShotContext(lat, code, noise, povm, "local-ml")
rng = np.random.default_rng(42)

print(f"L={L}: {lat.n_qubits} qubits ({lat.n_primal} primal), "
      f"{lat.n_plaq} plaquettes, code (3,4), gamma={gamma}")
print()
for s in range(4):
    out = run_shot(lat, code, noise, povm, "local-ml", rng, ctx=ctx)
    nflip = int(out.flips.sum())
    syn = [int(i) for i in np.flatnonzero(out.syndrome)]
    print(f"shot {s}: {nflip} hidden flips, "
          f"violated plaquettes {syn if syn else 'none'}")

p_e = calibrate_pe(code, gamma, "ahd", "local-ml", 1500, 3, L)
print(f"\ncalibrated per-qubit flip rate p_e = {p_e:.4f}")

shots = 400
fails = {"unit": 0, "soft": 0}
for s in range(shots):
    out = run_shot(lat, code, noise, povm, "local-ml", rng, ctx=ctx)
    for mode in fails:
        fails[mode] += decode(out, lat, mode=mode, p_e=p_e)
print(f"\nlogical error over {shots} shots at gamma={gamma}:")
for mode, n in fails.items():
    print(f"  {mode:>4}-weight matching: {n / shots:.3f}")
print()
print("Soft weights pay off most near threshold, where the matching is")
print("genuinely ambiguous and the likelihood records break the ties.")
