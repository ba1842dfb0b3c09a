"""Matrix equations and decompositions used by the structure algorithms.

All routines accept empty (``n == 0``) state dimensions and return empty
arrays of the right shape in that case.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NotStable, SingularInnovation
from .model import TOL_STAB, spectral_radius

__all__ = [
    "StaircaseResult",
    "DareSolution",
    "solve_lyapunov",
    "solve_dare_minimal",
    "dare_residual",
    "kalman_gain",
    "observability_staircase",
    "rank_tol",
    "ctrb_matrix",
    "obsv_matrix",
    "ctrb_rank",
    "obsv_rank",
    "TOL_RANK_REL",
    "TOL_DARE",
    "TOL_LYAP",
    "TOL_PD",
]

TOL_RANK_REL = 1e-9
TOL_DARE = 1e-11
TOL_LYAP = 1e-12
TOL_PD = 1e-10


def _maxabs(M) -> float:
    return float(np.max(np.abs(M), initial=0.0))


def solve_lyapunov(A, W, tol_stab=TOL_STAB, max_doublings=64):
    """Solve ``P = A P A^T + W`` by squared Smith doubling.

    Each sweep doubles the number of summed terms of
    ``P = sum_k A^k W (A^T)^k``, so convergence is quadratic in the
    spectral radius of ``A``.

    Raises
    ------
    NotStable
        If the spectral radius of ``A`` is at least ``1 - tol_stab``.
    NoConvergence
        If the increment has not dropped below ``1e-14`` after
        ``max_doublings`` sweeps.
    """
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    rho = spectral_radius(A)
    if rho >= 1.0 - tol_stab:
        raise NotStable(f"spectral radius {rho:.6g} is not below 1")
    P = 0.5 * (W + W.T)
    Ak = A.copy()
    for _ in range(max_doublings):
        inc = Ak @ P @ Ak.T
        P = P + inc
        Ak = Ak @ Ak
        if _maxabs(inc) <= 1e-14 * max(1.0, _maxabs(P)):
            return 0.5 * (P + P.T)
    raise NoConvergence(f"Smith doubling did not converge in {max_doublings} sweeps")


@dataclass(frozen=True)
class DareSolution:
    """Minimal solution ``X`` of the covariance Riccati equation.

    ``innov_cov`` is ``lam0 - C X C^T``; ``iterations`` the number of
    fixed-point sweeps taken and ``history`` the iterates when requested.
    """

    X: np.ndarray
    residual: float
    innov_cov: np.ndarray
    iterations: int = 0
    history: tuple = field(default=(), repr=False)


def _dare_map(A, C, G, lam0, X, tol_pd):
    R = lam0 - C @ X @ C.T
    R = 0.5 * (R + R.T)
    if R.size:
        lmin = np.min(np.linalg.eigvalsh(R))
        if lmin <= tol_pd * max(1.0, _maxabs(lam0)):
            raise SingularInnovation(
                f"innovation covariance not positive definite (min eigenvalue {lmin:.3g})"
            )
    F = G - A @ X @ C.T
    Xn = A @ X @ A.T + F @ np.linalg.solve(R, F.T)
    return 0.5 * (Xn + Xn.T), R


def dare_residual(A, C, Cbar, lam0, X) -> float:
    """Max-abs defect of ``X`` in the covariance Riccati equation."""
    A, C, Cbar, lam0, X = (np.asarray(M, dtype=float) for M in (A, C, Cbar, lam0, X))
    if A.shape[0] == 0:
        return 0.0
    G = Cbar.T
    R = lam0 - C @ X @ C.T
    F = G - A @ X @ C.T
    return _maxabs(A @ X @ A.T + F @ np.linalg.solve(R, F.T) - X)


def solve_dare_minimal(A, C, Cbar, lam0, tol_dare=TOL_DARE, tol_pd=TOL_PD,
                       max_iter=100_000, keep_history=False) -> DareSolution:
    """Minimal positive semidefinite solution of

    ``X = A X A^T + (Cbar^T - A X C^T)(lam0 - C X C^T)^{-1}(Cbar^T - A X C^T)^T``.

    The fixed-point iteration from ``X = 0`` is the Riccati recursion of
    the finite-past predictor and increases monotonically to the minimal
    solution, i.e. the covariance of the steady-state Kalman predictor.
    It stops once the max-abs equation defect is below ``tol_dare`` (or
    at rounding level when ``X`` is large).

    Parameters
    ----------
    A : (n, n) array_like
    C, Cbar : (p, n) array_like
        Output matrix and cross-covariance factor, ``lam_k = C A^{k-1} Cbar^T``.
    lam0 : (p, p) array_like
        Output covariance.
    keep_history : bool
        Store every iterate in ``DareSolution.history``.

    Raises
    ------
    SingularInnovation
        If ``lam0 - C X C^T`` is not positive definite at some iterate.
    NoConvergence
        If ``max_iter`` sweeps do not reach the tolerance.
    """
    A, C, Cbar, lam0 = (np.asarray(M, dtype=float) for M in (A, C, Cbar, lam0))
    n = A.shape[0]
    lam0 = 0.5 * (lam0 + lam0.T)
    X = np.zeros((n, n))
    history = [X] if keep_history else []
    if n == 0:
        _dare_map(A, C, Cbar.T, lam0, X, tol_pd)
        return DareSolution(X, 0.0, lam0.copy(), 0, tuple(history))
    G = Cbar.T
    for it in range(1, max_iter + 1):
        Xn, _ = _dare_map(A, C, G, lam0, X, tol_pd)
        if keep_history:
            history.append(Xn)
        X = Xn
        res = dare_residual(A, C, Cbar, lam0, X)
        # absolute target, relaxed only to rounding level for large X
        if res <= max(tol_dare, 64 * np.finfo(float).eps * _maxabs(X)):
            R = lam0 - C @ X @ C.T
            return DareSolution(X, res, 0.5 * (R + R.T), it, tuple(history))
    raise NoConvergence(f"Riccati iteration did not converge in {max_iter} sweeps")


def kalman_gain(A, C, Cbar, lam0, **kwargs):
    """Steady-state gain ``K = (Cbar^T - A X C^T)(lam0 - C X C^T)^{-1}``.

    Returns ``(K, sol)`` with ``sol`` the :class:`DareSolution` used.
    """
    sol = solve_dare_minimal(A, C, Cbar, lam0, **kwargs)
    A, C, Cbar = (np.asarray(M, dtype=float) for M in (A, C, Cbar))
    F = Cbar.T - A @ sol.X @ C.T
    K = np.linalg.solve(sol.innov_cov.T, F.T).T
    return K, sol


def rank_tol(M, tol_rank_rel=TOL_RANK_REL) -> int:
    """Number of singular values above ``tol_rank_rel * sigma_max``."""
    if tol_rank_rel <= 0:
        raise ValueError("tol_rank_rel must be positive")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol_rank_rel * s[0]))


def obsv_matrix(C, A, n_blocks=None):
    """Stack ``[C; C A; ...; C A^{k-1}]`` with ``k = n`` by default."""
    C, A = np.asarray(C, dtype=float), np.asarray(A, dtype=float)
    n = A.shape[0]
    k = n if n_blocks is None else n_blocks
    rows, M = [], C
    for _ in range(k):
        rows.append(M)
        M = M @ A
    return np.vstack(rows) if rows else np.zeros((0, n))


def ctrb_matrix(A, B, n_blocks=None):
    """``[B, A B, ..., A^{k-1} B]`` with ``k = n`` by default."""
    return obsv_matrix(np.asarray(B, dtype=float).T, np.asarray(A, dtype=float).T, n_blocks).T


def ctrb_rank(A, B, tol_rank_rel=TOL_RANK_REL) -> int:
    return rank_tol(ctrb_matrix(A, B), tol_rank_rel)


def obsv_rank(C, A, tol_rank_rel=TOL_RANK_REL) -> int:
    return rank_tol(obsv_matrix(C, A), tol_rank_rel)


@dataclass(frozen=True)
class StaircaseResult:
    """Orthogonal change of basis splitting off the unobservable subspace.

    In the new coordinates ``z = T x`` the first ``n_unobs`` states are
    unobservable from ``C_sub``: ``A_t = T A T^T`` is block upper
    triangular and ``C_t = C_sub T^T = [0, C22]``. ``residual`` is the
    largest entry of those two zero blocks; ``singular_values`` is the
    profile of the observability matrix the split was decided from.
    """

    T: np.ndarray
    n_unobs: int
    A_t: np.ndarray
    C_t: np.ndarray
    residual: float
    singular_values: np.ndarray

    @property
    def n_obs(self) -> int:
        return self.T.shape[0] - self.n_unobs


def observability_staircase(C_sub, A, tol_rank_rel=TOL_RANK_REL, n_obs=None) -> StaircaseResult:
    """Kalman observable form of the pair ``(C_sub, A)``.

    The observability matrix is factored by SVD; its numerical null space
    (right singular vectors beyond the rank) spans the unobservable
    subspace and is placed first. ``n_obs`` overrides the rank decision.
    """
    C_sub, A = np.asarray(C_sub, dtype=float), np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        e = np.zeros((0, 0))
        return StaircaseResult(e, 0, e, np.zeros((C_sub.shape[0], 0)), 0.0, np.zeros(0))
    O = obsv_matrix(C_sub, A)
    _, s, Vt = np.linalg.svd(O)
    if n_obs is None:
        r = 0 if s[0] == 0.0 else int(np.sum(s > tol_rank_rel * s[0]))
    else:
        r = int(n_obs)
        if not 0 <= r <= n:
            raise ValueError(f"n_obs must lie in [0, {n}]")
    n1 = n - r
    T = np.vstack([Vt[r:], Vt[:r]])
    A_t = T @ A @ T.T
    C_t = C_sub @ T.T
    res = max(_maxabs(A_t[n1:, :n1]), _maxabs(C_t[:, :n1]))
    return StaircaseResult(T, n1, A_t, C_t, res, s)
