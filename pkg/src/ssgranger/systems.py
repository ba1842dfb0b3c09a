"""Reference systems and random system generators.

``example1`` has a three-dimensional output whose last component is not
Granger caused by the first two; ``example2`` additionally decouples the
first two components, giving a coordinated structure with the last
component as coordinator. Both use ``D = I``.

The random generators return innovation-form models (``Q`` positive
definite, ``A - B C`` stable) so that ``B`` is the Kalman gain and the
designed zero pattern is the one a Kalman representation has.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .model import StateSpaceModel, spectral_radius
from .solvers import ctrb_rank, obsv_rank

__all__ = [
    "EXAMPLE_Q",
    "example1",
    "example2",
    "random_dense",
    "random_block_triangular",
    "random_coordinated",
    "random_stable_model",
]

EXAMPLE_Q = np.array([[1.0, 0.15, 0.2], [0.15, 1.0, 0.27], [0.2, 0.27, 1.0]])


def example1() -> StateSpaceModel:
    A = [[0.45, 0.11, 0.07, 0.09, 0.43],
         [0.6, 0.02, 0.64, 0.08, 0.27],
         [0.27, 0.14, 0.52, 0.47, 0.44],
         [0, 0, 0, 0.27, 0.45],
         [0, 0, 0, 0.44, 0.2]]
    B = [[0.55, 0.7, 0.42],
         [0.74, 0.03, 0.69],
         [0.39, 0.27, 0.31],
         [0, 0, 0.91],
         [0, 0, 0.33]]
    C = [[0.43, 0.79, 0.44, 0.75, 0.65],
         [0.38, 0.18, 0.64, 0.27, 0.16],
         [0, 0, 0, 0.67, 0.11]]
    return StateSpaceModel(A, B, C, np.eye(3), EXAMPLE_Q)


def example2() -> StateSpaceModel:
    A = [[0.45, 0, 0, 0.09, 0.43],
         [0, 0.02, 0.64, 0.08, 0.27],
         [0, 0.14, 0.52, 0.47, 0.44],
         [0, 0, 0, 0.27, 0.45],
         [0, 0, 0, 0.44, 0.2]]
    B = [[0.55, 0, 0.42],
         [0, 0.03, 0.69],
         [0, 0.27, 0.31],
         [0, 0, 0.91],
         [0, 0, 0.33]]
    C = [[0.43, 0, 0, 0.75, 0.65],
         [0, 0.18, 0.64, 0.27, 0.16],
         [0, 0, 0, 0.67, 0.11]]
    return StateSpaceModel(A, B, C, np.eye(3), EXAMPLE_Q)


def _random_pd(rng, p):
    G = rng.standard_normal((p, p))
    Q = G @ G.T / p + 0.5 * np.eye(p)
    d = np.sqrt(np.diag(Q))
    return Q / np.outer(d, d)


def _draw(rng, mask_a, mask_b, mask_c, rho_max=0.85, max_tries=1000):
    n, p = mask_b.shape
    for _ in range(max_tries):
        A = rng.uniform(-1, 1, (n, n)) * mask_a
        rho = spectral_radius(A)
        if rho < 1e-3:
            continue
        A *= rng.uniform(0.3, rho_max) / rho
        B = rng.uniform(-1, 1, (n, p)) * mask_b
        C = rng.uniform(-1, 1, (p, n)) * mask_c
        if spectral_radius(A - B @ C) >= 0.9:
            continue
        if ctrb_rank(A, B, 1e-6) < n or obsv_rank(C, A, 1e-6) < n:
            continue
        return StateSpaceModel(A, B, C, np.eye(p), _random_pd(rng, p))
    raise RuntimeError("could not draw a stable minimal system")


def _blocks(sizes):
    off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    return [slice(off[i], off[i + 1]) for i in range(len(sizes))]


def random_dense(rng, n: int, p: int) -> StateSpaceModel:
    """Stable minimal innovation model with all entries free."""
    return _draw(rng, np.ones((n, n)), np.ones((n, p)), np.ones((p, n)))


def random_block_triangular(rng, n1: int, n2: int, p1: int, p2: int) -> StateSpaceModel:
    """Innovation model where ``y[p1:]`` is not Granger caused by ``y[:p1]``.

    The lower-left blocks of ``A`` (``n2 x n1``), ``B`` (``n2 x p1``) and
    ``C`` (``p2 x n1``) are zero.
    """
    n, p = n1 + n2, p1 + p2
    ma, mb, mc = np.ones((n, n)), np.ones((n, p)), np.ones((p, n))
    ma[n1:, :n1] = 0
    mb[n1:, :p1] = 0
    mc[p1:, :n1] = 0
    return _draw(rng, ma, mb, mc)


def random_coordinated(rng, state_sizes: Sequence[int], output_sizes: Sequence[int]) -> StateSpaceModel:
    """Innovation model in coordinated form; the last block is the coordinator."""
    sx, sy = _blocks(state_sizes), _blocks(output_sizes)
    n, p = int(np.sum(state_sizes)), int(np.sum(output_sizes))
    nb = len(sx)
    ma, mb, mc = np.zeros((n, n)), np.zeros((n, p)), np.zeros((p, n))
    for i in range(nb):
        for j in (i, nb - 1):
            ma[sx[i], sx[j]] = 1
            mb[sx[i], sy[j]] = 1
            mc[sy[i], sx[j]] = 1
    return _draw(rng, ma, mb, mc)


def random_stable_model(rng, n: int, p: int, q: Optional[int] = None, rho_max: float = 0.9) -> StateSpaceModel:
    """General stable model with random ``D`` and ``q`` noise inputs."""
    q = p if q is None else q
    A = rng.standard_normal((n, n))
    if n:
        A *= rng.uniform(0.1, rho_max) / max(spectral_radius(A), 1e-12)
    B = rng.standard_normal((n, q))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, q))
    return StateSpaceModel(A, B, C, D, _random_pd(rng, q))
