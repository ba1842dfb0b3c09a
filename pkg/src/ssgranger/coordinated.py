"""Coordinated-form innovation representations.

A coordinated model has agents ``1..n-1`` that do not interact with each
other and a coordinator (the last block) that evolves on its own and
drives every agent:

    A = [[A11,  0,  A1n],      same zero pattern for K and C.
         [ 0,  A22, A2n],
         [ 0,   0,  Ann]]

It is assembled from one block-triangular representation per
``(agent, coordinator)`` pair after the coordinator states of all pairs
have been expressed in one common basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import AlignmentFailure, StructureViolation
from .granger import (
    TOL_ZERO,
    BlockTriangularResult,
    algorithm1,
    algorithm2,
    check_noncausality,
)
from .model import (
    CovarianceSequence,
    KalmanModel,
    Partition,
    StateSpaceModel,
    StructureReport,
)
from .realization import fit_cbar, markov_from_ss, minimize
from .solvers import (
    TOL_PD,
    TOL_RANK_REL,
    ctrb_rank,
    kalman_gain,
    obsv_matrix,
    obsv_rank,
    solve_dare_minimal,
    solve_lyapunov,
)

__all__ = [
    "CoordinatedModel",
    "minimize",
    "algorithm3",
    "algorithm4",
    "check_conditional_structure",
    "is_coordinated",
    "minimality",
    "verify_theorem3_properties",
    "TOL_SIM",
]

TOL_SIM = 1e-8


def _maxabs(M) -> float:
    return float(np.max(np.abs(M), initial=0.0))


@dataclass
class CoordinatedModel:
    """Kalman model in coordinated form.

    Outputs of ``model`` are ordered agent by agent with the coordinator
    last; ``output_order`` maps them back to the original output indices.
    """

    model: KalmanModel
    state_blocks: tuple
    output_blocks: tuple
    report: StructureReport = field(default_factory=StructureReport)
    output_order: list = field(default_factory=list)

    def state_indices(self, i: int) -> list:
        off = int(np.sum(self.state_blocks[:i]))
        return list(range(off, off + self.state_blocks[i]))

    def output_indices(self, i: int) -> list:
        off = int(np.sum(self.output_blocks[:i]))
        return list(range(off, off + self.output_blocks[i]))

    def coordinator(self) -> KalmanModel:
        k = len(self.state_blocks) - 1
        return self.model.subsystem(self.state_indices(k), self.output_indices(k))

    def to_dict(self) -> dict:
        m = self.model
        return {
            "A": m.A.tolist(), "K": m.K.tolist(), "C": m.C.tolist(), "Qe": m.Qe.tolist(),
            "state_blocks": [int(s) for s in self.state_blocks],
            "output_blocks": [int(r) for r in self.output_blocks],
            "output_order": [int(k) + 1 for k in self.output_order],
            "report": self.report.to_dict(),
        }


def _cut_blocks(cut: Partition, p: int):
    cut.check(p)
    if cut.n_blocks < 2:
        raise ValueError("a cut needs at least one agent and a coordinator")
    c = cut.target_index
    agents = [cut.indices(i) for i in range(cut.n_blocks) if i != c]
    return agents, cut.indices(c)


def _pair_blocks(res: BlockTriangularResult):
    km, n1, r = res.model, res.n1, res.p1
    return {
        "A11": km.A[:n1, :n1], "A12": km.A[:n1, n1:], "A22": km.A[n1:, n1:],
        "K11": km.K[:n1, :r], "K12": km.K[:n1, r:], "K22": km.K[n1:, r:],
        "C11": km.C[:r, :n1], "C12": km.C[:r, n1:], "C22": km.C[r:, n1:],
        "Q22": km.Qe[r:, r:],
    }


def _align(ref: dict, blk: dict, tol_sim: float):
    """Similarity ``T`` with ``x_ref = T^{-1} x_blk`` on the coordinator state.

    Solved from the coordinator observability matrices
    ``O_blk T = O_ref``; returns ``(T, residual)``.
    """
    n2 = ref["A22"].shape[0]
    if blk["A22"].shape[0] != n2:
        raise AlignmentFailure(
            f"coordinator orders differ ({blk['A22'].shape[0]} vs {n2})"
        )
    if n2 == 0:
        return np.zeros((0, 0)), 0.0
    O_ref = obsv_matrix(ref["C22"], ref["A22"])
    O_blk = obsv_matrix(blk["C22"], blk["A22"])
    T = np.linalg.lstsq(O_blk, O_ref, rcond=None)[0]
    try:
        Ti = np.linalg.inv(T)
    except np.linalg.LinAlgError as exc:
        raise AlignmentFailure("coordinator similarity is singular") from exc
    pieces = [
        (Ti @ blk["A22"] @ T, ref["A22"]),
        (Ti @ blk["K22"], ref["K22"]),
        (blk["C22"] @ T, ref["C22"]),
        (blk["Q22"], ref["Q22"]),
    ]
    res = max(_maxabs(a - b) / max(1.0, _maxabs(b)) for a, b in pieces)
    if res > tol_sim:
        raise AlignmentFailure(f"coordinator subsystems disagree (residual {res:.3g} > {tol_sim:g})")
    return T, res


def _merge(pairs, agent_sizes, coord_size, seq: CovarianceSequence, tol_sim, tol_zero,
           tol_rank_rel) -> CoordinatedModel:
    blocks = [_pair_blocks(r) for r in pairs]
    ref = blocks[0]
    Ts, align_res = [], []
    for b in blocks:
        T, res = _align(ref, b, tol_sim)
        Ts.append(T)
        align_res.append(res)

    n_ag = [b["A11"].shape[0] for b in blocks]
    n2 = ref["A22"].shape[0]
    n = sum(n_ag) + n2
    p = sum(agent_sizes) + coord_size
    A, K, C = np.zeros((n, n)), np.zeros((n, p)), np.zeros((p, n))
    xs, ys = 0, 0
    xc, yc = slice(n - n2, n), slice(p - coord_size, p)
    for b, T, ni, ri in zip(blocks, Ts, n_ag, agent_sizes):
        xi, yi = slice(xs, xs + ni), slice(ys, ys + ri)
        A[xi, xi] = b["A11"]
        A[xi, xc] = b["A12"] @ T
        K[xi, yi] = b["K11"]
        K[xi, yc] = b["K12"]
        C[yi, xi] = b["C11"]
        C[yi, xc] = b["C12"] @ T
        xs += ni
        ys += ri
    A[xc, xc] = ref["A22"]
    K[xc, yc] = ref["K22"]
    C[yc, xc] = ref["C22"]

    # Joint innovation covariance from the merged model's own Riccati equation.
    Cbar = fit_cbar(A, C, seq)
    K_dare, sol = kalman_gain(A, C, Cbar, seq.lam0)
    km = KalmanModel(A, K, C, sol.innov_cov)

    state_blocks = tuple(n_ag) + (n2,)
    output_blocks = tuple(agent_sizes) + (coord_size,)
    rep = is_coordinated(km, state_blocks, output_blocks, tol_zero)
    rep.verdicts["minimal"] = minimality(km, tol_rank_rel)
    rep.flags["minimality_criterion"] = "controllability proxy"
    rep.flags["alignment_residuals"] = align_res
    rep.residuals["innovation_gain"] = _maxabs(K_dare - K)
    rep.scales["innovation_gain"] = max(1.0, _maxabs(K))
    rep.tolerances.update(tol_sim=tol_sim, tol_rank_rel=tol_rank_rel)
    rep.flags["dare_iterations"] = sol.iterations
    rep.derived_model = km
    return CoordinatedModel(km, state_blocks, output_blocks, rep)


def _conditions(source_input, agents, coord, tol_zero, tol_rank_rel, M, **kw):
    """Verdicts ``y_i -/-> y_n`` and ``y_i -/-> [y_j, y_n]`` for all agents."""
    out = []
    for i, bi in enumerate(agents):
        rep = check_noncausality(source_input, bi, coord, tol_zero, tol_rank_rel, M, **kw)
        out.append(((i, None), rep))
        for j, bj in enumerate(agents):
            if j != i:
                rep = check_noncausality(source_input, bi, bj + coord, tol_zero, tol_rank_rel,
                                         M, **kw)
                out.append(((i, j), rep))
    return out


def _label(pair) -> str:
    i, j = pair
    if j is None:
        return f"agent{i + 1} -/-> coordinator"
    return f"agent{i + 1} -/-> [agent{j + 1}, coordinator]"


def _raise_on(conds):
    for pair, rep in conds:
        if not rep.verdict:
            raise StructureViolation(f"condition fails: {_label(pair)}", pair=pair,
                                     residuals=rep.residuals)


def _finish(cm: CoordinatedModel, order: list, conds) -> CoordinatedModel:
    cm.output_order = order
    for pair, rep in conds:
        cm.report.verdicts[_label(pair)] = rep.verdict
    return cm


def algorithm3(
    m: StateSpaceModel,
    cut: Partition,
    tol_zero: float = TOL_ZERO,
    tol_rank_rel: float = TOL_RANK_REL,
    tol_sim: float = TOL_SIM,
) -> CoordinatedModel:
    """Coordinated representation from system matrices.

    Parameters
    ----------
    m : StateSpaceModel
        Stable representation of the joint output.
    cut : Partition
        Output blocks; the target block of the partition is the coordinator.

    Raises
    ------
    StructureViolation
        If an agent Granger causes the coordinator or another agent given
        the coordinator; ``pair`` holds the 0-based ``(i, j)`` agent
        indices (``j`` is ``None`` for the coordinator condition).
    AlignmentFailure
        If the coordinator subsystems of the agents cannot be matched.
    """
    agents, coord = _cut_blocks(cut, m.p)
    conds = _conditions(m, agents, coord, tol_zero, tol_rank_rel, 5)
    _raise_on(conds)
    pairs = []
    for bi in agents:
        sub = minimize(m.select_outputs(bi + coord), tol_rank_rel)
        tgt = list(range(len(bi), len(bi) + len(coord)))
        pairs.append(algorithm1(sub, tgt, tol_zero, tol_rank_rel))
    order = [k for b in agents for k in b] + coord
    n_lags = max(2 * m.n + 2, 10)
    seq = markov_from_ss(m.select_outputs(order), n_lags)
    cm = _merge(pairs, [len(b) for b in agents], len(coord), seq, tol_sim, tol_zero, tol_rank_rel)
    return _finish(cm, order, conds)


def algorithm4(
    seq: CovarianceSequence,
    cut: Partition,
    M: int = 5,
    tol_rank_rel: float = TOL_RANK_REL,
    tol_zero: float = TOL_ZERO,
    tol_sim: float = TOL_SIM,
    **empirical,
) -> CoordinatedModel:
    """Coordinated representation from output covariances.

    Each ``(agent, coordinator)`` sub-sequence is realized by
    :func:`~ssgranger.granger.algorithm2`; extra keyword arguments
    (``order``, ``tol_obs_rel``, ``n_obs``) are passed through.
    """
    agents, coord = _cut_blocks(cut, seq.p)
    conds = _conditions(seq, agents, coord, tol_zero, tol_rank_rel, M, **empirical)
    _raise_on(conds)
    pairs = []
    for bi in agents:
        tgt = list(range(len(bi), len(bi) + len(coord)))
        pairs.append(algorithm2(seq.select(bi + coord), tgt, M, tol_rank_rel, tol_zero,
                                **empirical))
    order = [k for b in agents for k in b] + coord
    cm = _merge(pairs, [len(b) for b in agents], len(coord), seq.select(order), tol_sim,
                tol_zero, tol_rank_rel)
    return _finish(cm, order, conds)


def check_conditional_structure(
    source_input: Union[StateSpaceModel, CovarianceSequence],
    cut: Partition,
    tol_zero: float = TOL_ZERO,
    tol_rank_rel: float = TOL_RANK_REL,
    M: int = 5,
    **empirical,
) -> StructureReport:
    """Non-causality conditions a coordinated representation needs.

    Conditional non-causality of the agents given the coordinator is
    checked through plain tests on merged blocks: ``y_i -/-> y_n`` and
    ``y_i -/-> [y_j, y_n]`` for every ``j != i``.
    """
    p = source_input.p
    agents, coord = _cut_blocks(cut, p)
    rep = StructureReport()
    rep.tolerances = {"tol_zero": tol_zero, "tol_rank_rel": tol_rank_rel}
    for pair, sub in _conditions(source_input, agents, coord, tol_zero, tol_rank_rel, M,
                                 **empirical):
        name = _label(pair)
        rep.verdicts[name] = sub.verdict
        for k, v in sub.residuals.items():
            rep.residuals[f"{name}: {k}"] = v
            rep.scales[f"{name}: {k}"] = sub.scales.get(k, 1.0)
    return rep


def is_coordinated(
    k_model: KalmanModel,
    state_blocks: Sequence[int],
    output_blocks: Sequence[int],
    tol_zero: float = TOL_ZERO,
) -> StructureReport:
    """Check the coordinated zero pattern of ``A``, ``K`` and ``C``.

    Block ``(i, j)`` must vanish when ``i != j`` and ``j`` is not the
    coordinator. Residuals are named like ``"A[1,2]"`` with 1-based block
    indices and are compared against ``tol_zero`` times the max-abs entry
    of the whole matrix.
    """
    sb, ob = [int(s) for s in state_blocks], [int(r) for r in output_blocks]
    if len(sb) != len(ob) or len(sb) < 1:
        raise ValueError("state and output block lists must have the same length")
    if sum(sb) != k_model.n or sum(ob) != k_model.p:
        raise ValueError("block sizes do not match the model dimensions")
    cuts = lambda sizes: np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    xs, ys = cuts(sb), cuts(ob)
    nb = len(sb)
    rep = StructureReport()
    rep.tolerances = {"tol_zero": tol_zero}
    ok = True
    for name, M, rows, cols in (
        ("A", k_model.A, xs, xs),
        ("K", k_model.K, xs, ys),
        ("C", k_model.C, ys, xs),
    ):
        for i in range(nb):
            for j in range(nb - 1):
                if i == j:
                    continue
                blk = M[rows[i]:rows[i + 1], cols[j]:cols[j + 1]]
                ok &= rep.check_zero(f"{name}[{i + 1},{j + 1}]", blk, M, tol_zero)
    rep.verdicts["coordinated"] = bool(ok)
    return rep


def minimality(k_model: KalmanModel, tol_rank_rel: float = TOL_RANK_REL) -> bool:
    """Reachability of ``(A, K)``; observability holds by construction."""
    return ctrb_rank(k_model.A, k_model.K, tol_rank_rel) == k_model.n


def verify_theorem3_properties(
    cm: CoordinatedModel,
    seq: CovarianceSequence,
    tol: float = 1e-8,
    tol_rank_rel: float = TOL_RANK_REL,
    tol_pd: float = TOL_PD,
) -> StructureReport:
    """Check the coordinator and innovation properties of a coordinated model.

    ``seq`` is the covariance sequence of the original output (in its
    original order). Checks:

    * ``coordinator_covariance``: the stationary covariance of the
      coordinator state driven by its innovation equals the minimal
      Riccati solution of the coordinator output alone;
    * ``coordinator_minimal``: the coordinator subsystem is reachable from
      its innovation and observable;
    * ``innovation_pd``: the joint innovation covariance is positive
      definite.
    """
    seq = seq.select(cm.output_order) if cm.output_order else seq
    sub = cm.coordinator()
    nc = sub.n
    yc = cm.output_indices(len(cm.output_blocks) - 1)
    seq_c = seq.select(yc)
    rep = StructureReport()
    rep.tolerances = {"tol": tol, "tol_rank_rel": tol_rank_rel, "tol_pd": tol_pd}

    Xn = solve_lyapunov(sub.A, sub.K @ sub.Qe @ sub.K.T)
    Cbar_c = fit_cbar(sub.A, sub.C, seq_c)
    try:
        X_min = solve_dare_minimal(sub.A, sub.C, Cbar_c, seq_c.lam0).X
        rep.verdicts["coordinator_covariance"] = rep.check_zero(
            "coordinator_covariance", Xn - X_min, [max(1.0, _maxabs(X_min))], tol)
    except Exception as exc:  # report only
        rep.verdicts["coordinator_covariance"] = False
        rep.notes.append(f"coordinator Riccati equation failed: {exc}")

    rep.verdicts["coordinator_minimal"] = bool(
        ctrb_rank(sub.A, sub.K, tol_rank_rel) == nc and obsv_rank(sub.C, sub.A, tol_rank_rel) == nc
    )
    Qe = cm.model.Qe
    lmin = float(np.min(np.linalg.eigvalsh(Qe))) if Qe.size else np.inf
    rep.flags["innovation_min_eig"] = lmin
    rep.verdicts["innovation_pd"] = bool(lmin > tol_pd * max(1.0, _maxabs(Qe)))
    return rep
