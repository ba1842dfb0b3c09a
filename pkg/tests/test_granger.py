import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssgranger.errors import NotMinimal
from ssgranger.granger import (
    algorithm1,
    algorithm2,
    barnett_seth,
    check_noncausality,
    min_phase,
    plain_kalman,
)
from ssgranger.model import CovarianceSequence, KalmanModel, Partition, StateSpaceModel
from ssgranger.realization import markov_from_kalman, markov_from_ss
from ssgranger.systems import random_block_triangular, random_dense


def block_diagonal(rng):
    a = random_dense(rng, 2, 1)
    b = random_dense(rng, 2, 1)
    Z = np.zeros((2, 2))
    A = np.block([[a.A, Z], [Z, b.A]])
    B = np.block([[a.B, np.zeros((2, 1))], [np.zeros((2, 1)), b.B]])
    C = np.block([[a.C, np.zeros((1, 2))], [np.zeros((1, 2)), b.C]])
    return StateSpaceModel(A, B, C, np.eye(2), np.diag([1.0, 2.0]))


def test_algorithm1_example1(ex1):
    t0 = time.perf_counter()
    res = algorithm1(ex1, [2])
    assert time.perf_counter() - t0 < 1.0
    assert res.verdict and res.n1 == 3 and res.n2 == 2
    km = res.model
    assert np.max(np.abs(km.A[3:, :3])) <= 1e-8
    assert np.max(np.abs(km.K[3:, :2])) <= 1e-8
    assert np.max(np.abs(km.C[2:, :3])) <= 1e-8
    assert np.max(np.abs(km.Qe - ex1.Q)) <= 1e-6
    assert markov_from_kalman(km, 10).max_abs_diff(markov_from_ss(ex1, 10)) <= 1e-8
    assert res.report.flags["target_min_phase"] and res.report.flags["minimal"]


def test_algorithm1_output_order_is_recorded(ex1):
    res = algorithm1(ex1, [0])
    assert res.output_order == [1, 2, 0]
    seq = markov_from_ss(ex1.select_outputs(res.output_order), 10)
    assert markov_from_kalman(res.model, 10).max_abs_diff(seq) <= 1e-8


def test_algorithm1_block_diagonal_both_directions(rng):
    m = block_diagonal(rng)
    assert algorithm1(m, [1]).verdict
    assert algorithm1(m, [0]).verdict


def test_algorithm1_dense_is_false(rng):
    m = random_dense(rng, 4, 3)
    res = algorithm1(m, [2])
    assert not res.verdict
    assert not barnett_seth(plain_kalman(m), Partition((2, 1))).verdict


def test_algorithm1_rejects_non_minimal(ex1):
    A = np.zeros((6, 6))
    A[:5, :5], A[5, 5] = ex1.A, 0.3
    B = np.vstack([ex1.B, np.zeros((1, 3))])
    C = np.hstack([ex1.C, np.zeros((3, 1))])
    pad = StateSpaceModel(A, B, C, ex1.D, ex1.Q)
    with pytest.raises(NotMinimal):
        algorithm1(pad, [2])
    assert algorithm1(pad, [2], reduce=True).verdict


def test_algorithm1_invalid_model():
    m = StateSpaceModel([[1.2]], [[1.0]], [[1.0]], [[1.0]], [[1.0]])
    with pytest.raises(ValueError):
        algorithm1(m, [0])


def test_basis_invariance(ex1, rng):
    T = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    a, b = algorithm1(ex1, [2]), algorithm1(ex1.transform(T), [2])
    assert a.verdict == b.verdict and a.n1 == b.n1
    assert markov_from_kalman(a.model, 10).max_abs_diff(markov_from_kalman(b.model, 10)) <= 1e-8


def test_algorithm2_exact_example1(ex1):
    seq = markov_from_ss(ex1, 10)
    res = algorithm2(seq, [2], M=5)
    assert res.verdict and res.n1 == 3
    assert markov_from_kalman(res.model, 10).max_abs_diff(seq) <= 1e-8
    assert np.max(np.abs(res.model.Qe - ex1.Q)) <= 1e-6


def test_algorithm2_white_noise():
    seq = CovarianceSequence(np.eye(2), tuple(np.zeros((2, 2)) for _ in range(10)))
    res = algorithm2(seq, [1])
    assert res.verdict and res.model.n == 0


def test_barnett_seth_on_block_triangular_model():
    A = np.array([[0.5, 0.2], [0.0, 0.3]])
    K = np.array([[1.0, 0.4], [0.0, 0.6]])
    C = np.array([[1.0, 0.5], [0.0, 1.0]])
    km = KalmanModel(A, K, C, np.eye(2))
    assert barnett_seth(km, Partition((1, 1))).verdict
    assert not barnett_seth(km, Partition((1, 1), target_index=0)).verdict


def test_barnett_seth_example1_any_basis(ex1, rng):
    T = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    km = plain_kalman(ex1.transform(T))
    rep = barnett_seth(km, Partition((2, 1)))
    assert rep.verdict and rep.tolerances["horizon"] == 10
    assert len(rep.residuals) == 11


def test_barnett_seth_dense_gain(rng):
    m = random_dense(rng, 3, 2)
    assert not barnett_seth(plain_kalman(m), Partition((1, 1))).verdict


def test_min_phase_examples(ex1):
    assert min_phase(KalmanModel([[0.5]], [[1.0]], [[1.0]], [[1.0]]))
    assert not min_phase(KalmanModel([[0.5]], [[4.0]], [[1.0]], [[1.0]]))
    assert min_phase(algorithm1(ex1, [2]).target_subsystem())


def test_check_noncausality_examples(ex1, ex2):
    assert check_noncausality(ex1, [0, 1], [2]).verdict
    # agents of the coordinated example do not cause each other given the
    # coordinator; marginally they are linked through it
    assert check_noncausality(ex2, [0], [1, 2]).verdict
    assert check_noncausality(ex2, [1], [0, 2]).verdict
    assert not check_noncausality(ex2, [0], [1]).verdict
    assert not check_noncausality(ex1, [2], [0, 1]).verdict
    assert not check_noncausality(ex1, [0], [1]).verdict


def test_check_noncausality_covariance_input(ex1):
    seq = markov_from_ss(ex1, 10)
    rep = check_noncausality(seq, [0, 1], [2])
    assert rep.verdict and rep.flags["output_order"] == [0, 1, 2]
    assert not check_noncausality(seq, [2], [0]).verdict


def test_check_noncausality_rejects_overlap(ex1):
    with pytest.raises(ValueError):
        check_noncausality(ex1, [0, 1], [1])


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    p1, p2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    if seed % 2:
        n1 = int(rng.integers(1, n))
        return random_block_triangular(rng, n1, n - n1, p1, p2), p1, p2, True
    return random_dense(rng, n, p1 + p2), p1, p2, False


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_verdict_equivalence_property(seed):
    m, p1, p2, structured = random_case(seed)
    target = list(range(p1, p1 + p2))
    v1 = algorithm1(m, target).verdict
    v2 = algorithm2(markov_from_ss(m, 10), target, M=5).verdict
    v3 = barnett_seth(plain_kalman(m), Partition((p1, p2))).verdict
    assert v1 == v2 == v3 == structured


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_true_verdict_implies_min_phase(seed):
    m, p1, p2, _ = random_case(seed)
    res = algorithm1(m, list(range(p1, p1 + p2)))
    if res.verdict:
        assert min_phase(res.target_subsystem())
        assert np.min(np.linalg.eigvalsh(res.model.Qe)) > 0
