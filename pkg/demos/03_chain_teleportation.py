"""One-dimensional teleportation benchmark.

Repeated X-basis measurements teleport a logical qubit down a short chain
of code blocks, with loss acting during the entangling gates.  The
entanglement fidelity after the chain is the 1D figure of merit: it folds
together raw measurement error, loss-induced dephasing and the recovery
frame.  Small shot counts keep this demo quick — expect a minute or two.
"""

import numpy as np

from binplanar import ChainConfig, Code, NoiseParams, run_chain

code = Code(2, 2)
print(f"chain of M=3 blocks, code (2,2), nbar={code.nbar}, 2000 shots")
print()
print(f"{'gamma':>6} {'canonical':>18} {'ahd':>18} {'heterodyne':>18}")
for gamma in (0.0, 0.05, 0.1):
    row = []
    for povm in ("canonical", "ahd", "heterodyne"):
        cfg = ChainConfig(code, NoiseParams(gamma, code.N), povm=povm,
                          qsi="binning", shots=2000, M=3)
        f, se = run_chain(cfg, np.random.default_rng(5))
        row.append(f"{f:.4f} +/- {se:.4f}")
    print(f"{gamma:6.2f} " + " ".join(f"{r:>18}" for r in row))

print()
print("Fidelity degrades with loss for every measurement; heterodyne starts")
print("lower because its intrinsic phase resolution is worse.  Swap in")
print("qsi='local-ml' to see the likelihood-based inference close part of")
print("the gap at nonzero gamma.")
