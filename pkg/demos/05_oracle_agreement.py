"""Structure test against the autoregressive-coefficient test on random systems."""
import numpy as np

from ssgranger import algorithm1, algorithm2, barnett_seth, markov_from_ss, plain_kalman
from ssgranger.model import Partition
from ssgranger.systems import random_block_triangular, random_dense

rng = np.random.default_rng(0)
rows = []
for k in range(40):
    n = int(rng.integers(2, 6))
    p1, p2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    if k % 2:
        n1 = int(rng.integers(1, n))
        m, kind = random_block_triangular(rng, n1, n - n1, p1, p2), "structured"
    else:
        m, kind = random_dense(rng, n, p1 + p2), "dense"
    t = list(range(p1, p1 + p2))
    rows.append((kind,
                 algorithm1(m, t).verdict,
                 algorithm2(markov_from_ss(m, 10), t).verdict,
                 barnett_seth(plain_kalman(m), Partition((p1, p2))).verdict))

for kind in ("structured", "dense"):
    sel = [r for r in rows if r[0] == kind]
    same = sum(r[1] == r[2] == r[3] for r in sel)
    print(f"{kind}: {len(sel)} systems, verdict true in {sum(r[1] for r in sel)}, all three agree in {same}")
