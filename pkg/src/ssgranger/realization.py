"""Covariance sequences of state-space models and Hankel-SVD realization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientLags, UnstableRealization
from .model import CovarianceSequence, KalmanModel, StateSpaceModel, spectral_radius
from .solvers import TOL_RANK_REL, ctrb_matrix, obsv_matrix, solve_lyapunov

__all__ = [
    "CovFactorization",
    "markov_from_ss",
    "markov_from_kalman",
    "markov_from_fact",
    "ho_kalman",
    "hankel",
    "factorization_from_ss",
    "fit_cbar",
    "minimal_triple",
    "minimize",
    "default_M",
]


@dataclass(frozen=True)
class CovFactorization:
    """Factorization ``lam_k = C A^{k-1} Cbar^T`` (``k >= 1``) plus ``lam0``.

    ``singular_values`` is the Hankel profile when the factorization came
    from :func:`ho_kalman`; ``gap_warning`` flags a weak rank decision
    (``sigma_n / sigma_{n+1} < 10``).
    """

    A: np.ndarray
    C: np.ndarray
    Cbar: np.ndarray
    lam0: np.ndarray
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gap_warning: bool = False

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(), "C": self.C.tolist(), "Cbar": self.Cbar.tolist(),
            "lam0": self.lam0.tolist(), "order": self.n,
            "singular_values": np.asarray(self.singular_values).tolist(),
            "gap_warning": bool(self.gap_warning),
        }

    def transform(self, T) -> "CovFactorization":
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T)
        return CovFactorization(T @ self.A @ Ti, self.C @ Ti, self.Cbar @ T.T, self.lam0,
                                self.singular_values, self.gap_warning)


def factorization_from_ss(m: StateSpaceModel) -> CovFactorization:
    """``Cbar = C P A^T + D Q B^T`` and ``lam0 = C P C^T + D Q D^T``.

    ``P`` is the stationary state covariance.
    """
    P = solve_lyapunov(m.A, m.B @ m.Q @ m.B.T)
    Cbar = m.C @ P @ m.A.T + m.D @ m.Q @ m.B.T
    lam0 = m.C @ P @ m.C.T + m.D @ m.Q @ m.D.T
    return CovFactorization(m.A, m.C, Cbar, 0.5 * (lam0 + lam0.T))


def markov_from_fact(f: CovFactorization, N: int) -> CovarianceSequence:
    lams, M = [], f.C
    for _ in range(N):
        lams.append(M @ f.Cbar.T)
        M = M @ f.A
    return CovarianceSequence(f.lam0, tuple(lams))


def markov_from_ss(m: StateSpaceModel, N: int) -> CovarianceSequence:
    """Output covariances ``lam_0..lam_N`` of a stationary model."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return markov_from_fact(factorization_from_ss(m), N)


def markov_from_kalman(k: KalmanModel, N: int) -> CovarianceSequence:
    return markov_from_ss(k.as_state_space(), N)


def hankel(seq: CovarianceSequence, M: int, shift: int = 0) -> np.ndarray:
    """Block Hankel matrix with ``(i, j)`` block ``lam_{i+j+1+shift}``."""
    return np.block([[seq.lams[i + j + shift] for j in range(M)] for i in range(M)])


def default_M(p: int, n_hint=None) -> int:
    if n_hint is None:
        return 5
    return -(-int(n_hint) // p) + 2


def ho_kalman(seq: CovarianceSequence, M: int = 5, tol_rank_rel: float = TOL_RANK_REL,
              order=None) -> CovFactorization:
    """Realize ``(A, C, Cbar)`` from ``lam_1..lam_2M`` by Hankel SVD.

    The order is the number of singular values of ``H0`` above
    ``tol_rank_rel * sigma_max`` unless ``order`` fixes it.

    Raises
    ------
    InsufficientLags
        If fewer than ``2 M`` lags are available.
    UnstableRealization
        If the recovered ``A`` is not stable.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if seq.n_lags < 2 * M:
        raise InsufficientLags(f"need {2 * M} lags for M = {M}, got {seq.n_lags}")
    p = seq.p
    H0 = hankel(seq, M)
    H1 = hankel(seq, M, shift=1)
    U, s, Vt = np.linalg.svd(H0)
    if order is None:
        n = 0 if s[0] == 0.0 else int(np.sum(s > tol_rank_rel * s[0]))
    else:
        n = int(order)
        if not 0 <= n <= s.size:
            raise ValueError(f"order must lie in [0, {s.size}]")
    gap = bool(0 < n < s.size and s[n] > 0 and s[n - 1] / s[n] < 10.0)
    Un, sn, Vn = U[:, :n], s[:n], Vt[:n].T
    rt = np.sqrt(sn)
    A = (Un / rt).T @ H1 @ (Vn / rt)
    C = (Un * rt)[:p]
    Cbar = (Vn * rt)[:p]
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableRealization(f"realized A has spectral radius {rho:.6g}")
    return CovFactorization(A, C, Cbar, seq.lam0, s, gap)


def fit_cbar(A, C, seq: CovarianceSequence, n_lags=None) -> np.ndarray:
    """Least-squares ``Cbar`` with ``lam_k ~ C A^{k-1} Cbar^T`` for a fixed ``(A, C)``."""
    A, C = np.asarray(A, dtype=float), np.asarray(C, dtype=float)
    n = A.shape[0]
    N = seq.n_lags if n_lags is None else n_lags
    if n == 0:
        return np.zeros((C.shape[0], 0))
    O = obsv_matrix(C, A, N)
    L = np.vstack(seq.lams[:N])
    return np.linalg.lstsq(O, L, rcond=None)[0].T


def _range_basis(M, tol_rank_rel):
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0]
    return U[:, : int(np.sum(s > tol_rank_rel * s[0]))]


def minimal_triple(A, B, C, tol_rank_rel=TOL_RANK_REL):
    """Orthonormal basis ``V`` of a minimal part of ``(A, B, C)``.

    Reachable subspace first, then the observable part of what remains;
    the reduced triple is ``(V^T A V, V^T B, C V)``.
    """
    A, B, C = (np.asarray(M, dtype=float) for M in (A, B, C))
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    Vr = _range_basis(ctrb_matrix(A, B), tol_rank_rel)
    Ar, Cr = Vr.T @ A @ Vr, C @ Vr
    if Vr.shape[1] == 0:
        return Vr
    Vo = _range_basis(obsv_matrix(Cr, Ar).T, tol_rank_rel)
    return Vr @ Vo


def minimize(m: StateSpaceModel, tol_rank_rel: float = TOL_RANK_REL) -> StateSpaceModel:
    """Drop unreachable and unobservable states; outputs are unchanged."""
    V = minimal_triple(m.A, m.B, m.C, tol_rank_rel)
    return StateSpaceModel(V.T @ m.A @ V, V.T @ m.B, m.C @ V, m.D, m.Q)
