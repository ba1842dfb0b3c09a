"""Block-triangular Kalman representations and Granger non-causality.

The verdict for "``y1`` does not Granger cause ``y2``" is read off a
Kalman representation brought to the form

    [x1+]   [A11 A12] [x1]   [K11 K12] [e1]      [y1]   [C11 C12] [x1]   [e1]
    [x2+] = [ 0  A22] [x2] + [ 0  K22] [e2],     [y2] = [ 0  C22] [x2] + [e2]

where ``x2`` is the part of the state observable from ``y2``. Outputs are
always reordered to ``[complement | target]`` internally.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import NotMinimal
from .model import (
    TOL_STAB,
    CovarianceSequence,
    KalmanModel,
    Partition,
    StateSpaceModel,
    StructureReport,
    spectral_radius,
    validate,
)
from .realization import (
    CovFactorization,
    factorization_from_ss,
    ho_kalman,
    minimal_triple,
    minimize,
)
from .solvers import TOL_RANK_REL, ctrb_rank, kalman_gain, obsv_matrix, obsv_rank, \
    observability_staircase, rank_tol

__all__ = [
    "BlockTriangularResult",
    "algorithm1",
    "algorithm2",
    "block_triangular_from_factorization",
    "barnett_seth",
    "min_phase",
    "check_noncausality",
    "plain_kalman",
    "TOL_ZERO",
    "TOL_ZERO_EMPIRICAL",
]

TOL_ZERO = 1e-8
TOL_ZERO_EMPIRICAL = 5e-2


@dataclass
class BlockTriangularResult:
    """Kalman model in ``[x1 | x2]`` coordinates with its verdict.

    ``output_order`` lists the original output indices in the order used by
    ``model`` (complement first, target last); ``p1`` is the size of the
    complement block.
    """

    model: KalmanModel
    n1: int
    p1: int
    verdict: bool
    report: StructureReport
    output_order: list

    @property
    def n2(self) -> int:
        return self.model.n - self.n1

    @property
    def observable_case(self) -> bool:
        return self.n1 == 0

    @property
    def partition(self) -> Partition:
        return Partition((self.p1, self.model.p - self.p1))

    def target_subsystem(self) -> KalmanModel:
        """``(A22, K22, C22)`` with the target's innovation covariance."""
        n, p = self.model.n, self.model.p
        return self.model.subsystem(range(self.n1, n), range(self.p1, p))


def _order(p: int, target: Sequence[int]):
    target = [int(t) for t in target]
    if not target:
        raise ValueError("target index set is empty")
    if len(set(target)) != len(target) or not all(0 <= t < p for t in target):
        raise ValueError(f"invalid target indices {target} for {p} outputs")
    comp = [k for k in range(p) if k not in set(target)]
    return comp + target, len(comp)


def block_triangular_from_factorization(
    fact: CovFactorization,
    target: Sequence[int],
    tol_zero: float = TOL_ZERO,
    tol_rank_rel: float = TOL_RANK_REL,
    n_obs: Optional[int] = None,
) -> BlockTriangularResult:
    """Staircase, Riccati equation, gain and verdict for a covariance factorization.

    ``target`` holds 0-based output indices of ``y2``. ``tol_rank_rel``
    governs the observability rank decision of the staircase and ``n_obs``
    overrides it (the dimension of ``x2``).
    """
    p = fact.C.shape[0]
    order, p1 = _order(p, target)
    C, Cbar = fact.C[order], fact.Cbar[order]
    lam0 = fact.lam0[np.ix_(order, order)]

    st = observability_staircase(C[p1:], fact.A, tol_rank_rel, n_obs=n_obs)
    n1 = st.n_unobs
    A_k = st.A_t
    C_k = C @ st.T.T
    Cbar_k = Cbar @ st.T.T
    K, sol = kalman_gain(A_k, C_k, Cbar_k, lam0)
    km = KalmanModel(A_k, K, C_k, sol.innov_cov)

    rep = StructureReport()
    rep.tolerances = {"tol_zero": tol_zero, "tol_rank_rel": tol_rank_rel}
    ok_a = rep.check_zero("A21", A_k[n1:, :n1], A_k, tol_zero)
    ok_k = rep.check_zero("K21", K[n1:, :p1], K, tol_zero)
    ok_c = rep.check_zero("C21", C_k[p1:, :n1], C_k, tol_zero)
    rep.verdicts["block_triangular"] = ok_a and ok_k and ok_c

    n = km.n
    sub = km.subsystem(range(n1, n), range(p1, p))
    rep.flags.update(
        observable_case=n1 == 0,
        n1=n1,
        n2=n - n1,
        output_order=order,
        observability_singular_values=st.singular_values,
        dare_iterations=sol.iterations,
        dare_residual=sol.residual,
        target_min_phase=min_phase(sub),
        minimal=bool(ctrb_rank(A_k, K, tol_rank_rel) == n and obsv_rank(C_k, A_k, tol_rank_rel) == n),
    )
    if n1 == 0:
        rep.notes.append("target block observes the whole state (x1 is empty)")
    if fact.gap_warning:
        rep.notes.append("weak Hankel rank gap: sigma_n / sigma_(n+1) < 10")
    rep.derived_model = km
    return BlockTriangularResult(km, n1, p1, rep.verdicts["block_triangular"], rep, order)


def algorithm1(
    m: StateSpaceModel,
    target: Sequence[int],
    tol_zero: float = TOL_ZERO,
    tol_rank_rel: float = TOL_RANK_REL,
    reduce: bool = False,
) -> BlockTriangularResult:
    """Block-triangular Kalman representation from system matrices.

    Parameters
    ----------
    m : StateSpaceModel
        Minimal, stable representation of ``y``.
    target : sequence of int
        0-based output indices of the target block ``y2``.
    reduce : bool
        Minimize a non-minimal input instead of raising :class:`NotMinimal`.
    """
    problems = validate(m)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    n = m.n
    if ctrb_rank(m.A, m.B, tol_rank_rel) < n or obsv_rank(m.C, m.A, tol_rank_rel) < n:
        if not reduce:
            raise NotMinimal("input model is not minimal (use reduce=True to minimize)")
        m = minimize(m, tol_rank_rel)
    fact = factorization_from_ss(m)
    # (A, B) reachable does not make (A, Cbar^T) reachable; trim the factorization.
    V = minimal_triple(fact.A, fact.Cbar.T, fact.C, tol_rank_rel)
    trimmed = V.shape[1] < fact.n
    if trimmed:
        fact = CovFactorization(V.T @ fact.A @ V, fact.C @ V, fact.Cbar @ V, fact.lam0)
    res = block_triangular_from_factorization(fact, target, tol_zero, tol_rank_rel)
    if trimmed:
        res.report.notes.append("covariance factorization was not minimal and was reduced")
    return res


def algorithm2(
    seq: CovarianceSequence,
    target: Sequence[int],
    M: int = 5,
    tol_rank_rel: float = TOL_RANK_REL,
    tol_zero: float = TOL_ZERO,
    order: Optional[int] = None,
    tol_obs_rel: Optional[float] = None,
    n_obs: Optional[int] = None,
) -> BlockTriangularResult:
    """Block-triangular Kalman representation from output covariances.

    ``order`` fixes the realization order instead of the Hankel rank
    decision; ``tol_obs_rel`` / ``n_obs`` do the same for the staircase
    (defaulting to ``tol_rank_rel``).
    """
    fact = ho_kalman(seq, M, tol_rank_rel, order=order)
    tol_obs = tol_rank_rel if tol_obs_rel is None else tol_obs_rel
    res = block_triangular_from_factorization(fact, target, tol_zero, tol_obs, n_obs=n_obs)
    res.report.tolerances["tol_obs_rel"] = tol_obs
    res.report.flags["hankel_singular_values"] = fact.singular_values
    res.report.flags["M"] = M
    return res


def min_phase(sub: KalmanModel, tol_stab: float = TOL_STAB) -> bool:
    """Whether the inverse system ``A - K C`` is stable."""
    return spectral_radius(sub.A - sub.K @ sub.C) < 1.0 + tol_stab


def barnett_seth(
    k_model: KalmanModel,
    partition: Partition,
    horizon: Optional[int] = None,
    tol_zero: float = TOL_ZERO,
) -> StructureReport:
    """Test ``(C (A - K C)^k K)_{target, rest} = 0`` for ``k = 0..horizon``.

    These are the lagged coefficients of the autoregressive form of ``y``.
    The default horizon ``2 n`` suffices by Cayley-Hamilton.
    """
    partition.check(k_model.p)
    rows, cols = partition.target(), partition.complement()
    n = k_model.n
    horizon = 2 * n if horizon is None else int(horizon)
    F = k_model.A - k_model.K @ k_model.C
    blocks, scale = [], 0.0
    M = k_model.K
    for _ in range(horizon + 1):
        G = k_model.C @ M
        blocks.append(G[np.ix_(rows, cols)])
        scale = max(scale, float(np.max(np.abs(G), initial=0.0)))
        M = F @ M
    rep = StructureReport()
    rep.tolerances = {"tol_zero": tol_zero, "horizon": horizon}
    ok = True
    for k, blk in enumerate(blocks):
        ok &= rep.check_zero(f"k={k}", blk, [scale], tol_zero)
    rep.verdicts["ar_lower_left_zero"] = bool(ok)
    return rep


def plain_kalman(m: StateSpaceModel) -> KalmanModel:
    """Kalman representation of ``m`` in its own state basis."""
    f = factorization_from_ss(m)
    K, sol = kalman_gain(f.A, f.C, f.Cbar, f.lam0)
    return KalmanModel(f.A, K, f.C, sol.innov_cov)


def check_noncausality(
    source_input: Union[StateSpaceModel, CovarianceSequence],
    source: Sequence[int],
    target: Sequence[int],
    tol_zero: float = TOL_ZERO,
    tol_rank_rel: float = TOL_RANK_REL,
    M: int = 5,
    **empirical,
) -> StructureReport:
    """Does ``y[source]`` fail to Granger cause ``y[target]``?

    The process is restricted to ``[source | target]`` (0-based output
    indices); several source blocks merged into one ``source`` give the
    joint test. Models go through :func:`algorithm1` after minimization,
    covariance sequences through :func:`algorithm2` (extra keyword
    arguments are forwarded to it).
    """
    source, target = [int(s) for s in source], [int(t) for t in target]
    if set(source) & set(target):
        raise ValueError("source and target index sets overlap")
    sel = source + target
    local_target = list(range(len(source), len(sel)))
    if isinstance(source_input, StateSpaceModel):
        sub = minimize(source_input.select_outputs(sel), tol_rank_rel)
        res = algorithm1(sub, local_target, tol_zero, tol_rank_rel)
    elif isinstance(source_input, CovarianceSequence):
        res = algorithm2(source_input.select(sel), local_target, M, tol_rank_rel, tol_zero,
                         **empirical)
    else:
        raise TypeError("input must be a StateSpaceModel or a CovarianceSequence")
    rep = res.report
    rep.flags["source"] = source
    rep.flags["target"] = target
    rep.flags["output_order"] = [sel[k] for k in res.output_order]
    return rep


def hankel_order(seq: CovarianceSequence, M: int, tol_rank_rel: float = TOL_RANK_REL) -> int:
    """Numerical rank of the ``M``-block Hankel matrix of ``seq``."""
    from .realization import hankel

    return rank_tol(hankel(seq, M), tol_rank_rel)


def observability_index(C, A, tol_rank_rel: float = TOL_RANK_REL) -> int:
    return rank_tol(obsv_matrix(C, A), tol_rank_rel)
