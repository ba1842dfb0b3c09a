"""Core data types, validation and the JSON interchange documents.

Everything here is immutable after construction: arrays are copied into
read-only float64 buffers so values can be shared freely between threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "StateSpaceModel",
    "KalmanModel",
    "Partition",
    "CovarianceSequence",
    "StructureReport",
    "validate",
    "spectral_radius",
    "model_to_dict",
    "model_from_dict",
    "covariance_to_dict",
    "covariance_from_dict",
    "load_json",
    "dump_json",
    "TOL_PSD",
    "TOL_STAB",
    "TOL_SYM",
]

TOL_PSD = 1e-10
TOL_STAB = 1e-10
TOL_SYM = 1e-10


def _frozen(a, shape=None, name="matrix"):
    arr = np.array(a, dtype=float, copy=True)
    if shape is not None:
        if arr.size == 0:
            arr = arr.reshape(shape)
        if arr.ndim != 2 or arr.shape != tuple(shape):
            raise ValueError(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def spectral_radius(A) -> float:
    """Largest eigenvalue modulus; 0 for an empty matrix."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _sym_err(M) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.T)))


def _min_eig(M) -> float:
    if M.size == 0:
        return np.inf
    return float(np.min(np.linalg.eigvalsh(0.5 * (M + M.T))))


@dataclass(frozen=True)
class StateSpaceModel:
    """Linear stochastic representation ``x+ = A x + B e``, ``y = C x + D e``.

    ``e`` is zero-mean white noise with covariance ``Q``. The state may be
    empty (``n == 0``), in which case ``y = D e`` is white.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        Q = _frozen(self.Q, name="Q")
        q = Q.shape[0]
        D = _frozen(self.D, name="D")
        p = D.shape[0]
        A = np.asarray(self.A, dtype=float)
        n = A.shape[0] if A.ndim == 2 else 0
        object.__setattr__(self, "Q", _frozen(Q, (q, q), "Q"))
        object.__setattr__(self, "D", _frozen(D, (p, q), "D"))
        object.__setattr__(self, "A", _frozen(A, (n, n), "A"))
        object.__setattr__(self, "B", _frozen(self.B, (n, q), "B"))
        object.__setattr__(self, "C", _frozen(self.C, (p, n), "C"))
        if p < 1 or q < 1:
            raise ValueError("a model needs at least one output and one noise input")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return self.Q.shape[0]

    def select_outputs(self, idx: Sequence[int]) -> "StateSpaceModel":
        """Model of the sub-process ``y[idx]`` (same state and noise)."""
        idx = list(idx)
        return StateSpaceModel(self.A, self.B, self.C[idx], self.D[idx], self.Q)

    def transform(self, T) -> "StateSpaceModel":
        """Similarity transform ``x -> T x``."""
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T)
        return StateSpaceModel(T @ self.A @ Ti, T @ self.B, self.C @ Ti, self.D, self.Q)


@dataclass(frozen=True)
class KalmanModel:
    """Innovation form ``x+ = A x + K e``, ``y = C x + e`` with ``cov(e) = Qe``."""

    A: np.ndarray
    K: np.ndarray
    C: np.ndarray
    Qe: np.ndarray

    def __post_init__(self):
        Qe = _frozen(self.Qe, name="Qe")
        p = Qe.shape[0]
        A = np.asarray(self.A, dtype=float)
        n = A.shape[0] if A.ndim == 2 else 0
        object.__setattr__(self, "Qe", _frozen(Qe, (p, p), "Qe"))
        object.__setattr__(self, "A", _frozen(A, (n, n), "A"))
        object.__setattr__(self, "K", _frozen(self.K, (n, p), "K"))
        object.__setattr__(self, "C", _frozen(self.C, (p, n), "C"))
        scale = max(1.0, float(np.max(np.abs(Qe), initial=0.0)))
        if _sym_err(Qe) > TOL_SYM * scale or (p and _min_eig(Qe) <= 0.0):
            raise ValueError("innovation covariance must be symmetric positive definite")
        if spectral_radius(self.A) >= 1.0:
            raise ValueError("Kalman model transition matrix is not stable")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def as_state_space(self) -> StateSpaceModel:
        return StateSpaceModel(self.A, self.K, self.C, np.eye(self.p), self.Qe)

    def transform(self, T) -> "KalmanModel":
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T)
        return KalmanModel(T @ self.A @ Ti, T @ self.K, self.C @ Ti, self.Qe)

    def subsystem(self, states: Sequence[int], outputs: Sequence[int]) -> "KalmanModel":
        """Restriction to a state and output index set.

        Only meaningful when the remaining states do not feed the selected
        ones, e.g. the trailing block of a block-triangular model.
        """
        s, o = list(states), list(outputs)
        return KalmanModel(
            self.A[np.ix_(s, s)], self.K[np.ix_(s, o)], self.C[np.ix_(o, s)],
            self.Qe[np.ix_(o, o)],
        )


@dataclass(frozen=True)
class Partition:
    """Split of the output vector into consecutive blocks.

    ``target_index`` designates the target (coordinator) block and defaults
    to the last one.
    """

    block_sizes: tuple
    target_index: int = -1

    def __post_init__(self):
        sizes = tuple(int(r) for r in self.block_sizes)
        if len(sizes) < 2:
            raise ValueError("a partition needs at least two blocks")
        if any(r <= 0 for r in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        t = self.target_index
        if not -len(sizes) <= t < len(sizes):
            raise ValueError(f"target index {t} out of range for {len(sizes)} blocks")
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "target_index", t % len(sizes))

    @property
    def p(self) -> int:
        return sum(self.block_sizes)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    def offsets(self) -> list:
        return [0, *np.cumsum(self.block_sizes).tolist()]

    def indices(self, i: int) -> list:
        off = self.offsets()
        return list(range(off[i], off[i + 1]))

    def target(self) -> list:
        return self.indices(self.target_index)

    def complement(self) -> list:
        t = set(self.target())
        return [k for k in range(self.p) if k not in t]

    def check(self, p: int) -> None:
        if self.p != p:
            raise ValueError(f"partition covers {self.p} outputs, process has {p}")


@dataclass(frozen=True)
class CovarianceSequence:
    """Output covariances ``lam0 = E[y y^T]`` and ``lams[k-1] = E[y(t+k) y(t)^T]``."""

    lam0: np.ndarray
    lams: tuple

    def __post_init__(self):
        lam0 = _frozen(self.lam0, name="lam0")
        p = lam0.shape[0]
        lam0 = _frozen(lam0, (p, p), "lam0")
        if _sym_err(lam0) > TOL_SYM * max(1.0, float(np.max(np.abs(lam0)))):
            raise ValueError("lam0 is not symmetric")
        lams = tuple(_frozen(L, (p, p), f"lams[{k}]") for k, L in enumerate(self.lams))
        object.__setattr__(self, "lam0", lam0)
        object.__setattr__(self, "lams", lams)

    @property
    def p(self) -> int:
        return self.lam0.shape[0]

    @property
    def n_lags(self) -> int:
        return len(self.lams)

    def lag(self, k: int) -> np.ndarray:
        return self.lam0 if k == 0 else self.lams[k - 1]

    def select(self, idx: Sequence[int]) -> "CovarianceSequence":
        """Covariances of the sub-process ``y[idx]``."""
        ix = np.ix_(list(idx), list(idx))
        return CovarianceSequence(self.lam0[ix], tuple(L[ix] for L in self.lams))

    def truncate(self, n_lags: int) -> "CovarianceSequence":
        return CovarianceSequence(self.lam0, self.lams[:n_lags])

    def max_abs_diff(self, other: "CovarianceSequence", n_lags: Optional[int] = None) -> float:
        """Largest entrywise difference over ``lam0`` and the common lags."""
        n = min(self.n_lags, other.n_lags) if n_lags is None else n_lags
        diffs = [np.max(np.abs(self.lam0 - other.lam0), initial=0.0)]
        diffs += [np.max(np.abs(self.lams[k] - other.lams[k]), initial=0.0) for k in range(n)]
        return float(max(diffs))


@dataclass
class StructureReport:
    """Verdicts of structural tests together with the evidence behind them.

    ``residuals`` maps a block identifier (e.g. ``"K21"``) to the max-abs
    value of a block that should vanish; ``scales`` holds the reference
    magnitude each residual was compared against.
    """

    verdicts: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    derived_model: Any = None

    @property
    def verdict(self) -> bool:
        """Conjunction of all verdicts."""
        return all(self.verdicts.values())

    def check_zero(self, name: str, block, reference, tol: float) -> bool:
        """Record ``block`` as a must-vanish residual and return whether it does."""
        block = np.asarray(block, dtype=float)
        res = float(np.max(np.abs(block), initial=0.0))
        scale = float(np.max(np.abs(np.asarray(reference, dtype=float)), initial=0.0))
        scale = scale if scale > 0 else 1.0
        self.residuals[name] = res
        self.scales[name] = scale
        return res <= tol * scale

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "scales": {k: float(v) for k, v in self.scales.items()},
            "tolerances": dict(self.tolerances),
            "flags": _jsonable(self.flags),
            "notes": list(self.notes),
        }
        if self.derived_model is not None:
            out["derived_model"] = _jsonable(self.derived_model)
        return out


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, KalmanModel):
        return {"A": obj.A.tolist(), "K": obj.K.tolist(), "C": obj.C.tolist(),
                "Qe": obj.Qe.tolist()}
    if isinstance(obj, StateSpaceModel):
        return model_to_dict(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def validate(model: StateSpaceModel, tol_psd: float = TOL_PSD, tol_stab: float = TOL_STAB) -> list:
    """List the violated standing assumptions of ``model``.

    Returns an empty list when ``Q`` is symmetric positive semidefinite and
    ``A`` is stable. Shapes are already enforced at construction.
    """
    violations = []
    Q = model.Q
    qscale = max(1.0, float(np.max(np.abs(Q))))
    if _sym_err(Q) > TOL_SYM * qscale:
        violations.append(f"Q not symmetric (max asymmetry {_sym_err(Q):.3g})")
    lmin = _min_eig(Q)
    if lmin < -tol_psd * qscale:
        violations.append(f"Q not positive semidefinite (min eigenvalue {lmin:.3g})")
    rho = spectral_radius(model.A)
    if rho >= 1.0 - tol_stab:
        violations.append(f"spectral radius >= 1 (rho(A) = {rho:.6g})")
    return violations


# -- JSON documents ---------------------------------------------------------

def model_to_dict(model: StateSpaceModel, partition: Optional[Partition] = None) -> dict:
    doc = {k: getattr(model, k).tolist() for k in "ABCDQ"}
    if partition is not None:
        doc["partition"] = list(partition.block_sizes)
        doc["target"] = partition.target_index + 1
    return doc


def model_from_dict(doc: dict):
    """Parse a model document; returns ``(model, partition_or_None)``."""
    missing = [k for k in "ABCDQ" if k not in doc]
    if missing:
        raise ValueError(f"model document lacks keys {missing}")
    Q = np.array(doc["Q"], dtype=float)
    D = np.array(doc["D"], dtype=float)
    if Q.ndim != 2 or D.ndim != 2:
        raise ValueError("Q and D must be matrices")
    q, p = Q.shape[0], D.shape[0]
    A = np.array(doc["A"], dtype=float)
    n = A.shape[0] if A.size else 0
    model = StateSpaceModel(
        A.reshape(n, n), np.array(doc["B"], dtype=float).reshape(n, q),
        np.array(doc["C"], dtype=float).reshape(p, n), D, Q,
    )
    partition = None
    if "partition" in doc:
        target = int(doc.get("target", len(doc["partition"])))
        partition = Partition(tuple(doc["partition"]), target - 1)
    return model, partition


def covariance_to_dict(seq: CovarianceSequence) -> dict:
    return {"lam0": seq.lam0.tolist(), "lams": [L.tolist() for L in seq.lams]}


def covariance_from_dict(doc: dict) -> CovarianceSequence:
    if "lam0" not in doc or "lams" not in doc:
        raise ValueError("covariance document needs keys 'lam0' and 'lams'")
    return CovarianceSequence(np.array(doc["lam0"], dtype=float), tuple(doc["lams"]))


def load_json(path):
    """Read a model or covariance document.

    Returns ``("model", (model, partition))`` or ``("cov", seq)``.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("top-level JSON value must be an object")
    if "lam0" in doc:
        return "cov", covariance_from_dict(doc)
    return "model", model_from_dict(doc)


def dump_json(obj, path=None, pretty=False) -> str:
    text = json.dumps(_jsonable(obj), indent=2 if pretty else None)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
