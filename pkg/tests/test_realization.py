import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssgranger.errors import InsufficientLags, UnstableRealization
from ssgranger.model import CovarianceSequence, StateSpaceModel
from ssgranger.realization import (
    CovFactorization,
    default_M,
    fit_cbar,
    hankel,
    ho_kalman,
    markov_from_fact,
    markov_from_ss,
    minimize,
)
from ssgranger.solvers import ctrb_rank, obsv_rank, rank_tol
from ssgranger.systems import random_dense, random_stable_model

from frozen import EX1_HANKEL_SV, EX1_LAM0, EX1_LAM1, EX2_HANKEL_SV, EX2_LAM1


def test_markov_white_noise():
    m = StateSpaceModel(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.eye(2))
    seq = markov_from_ss(m, 4)
    assert np.array_equal(seq.lam0, np.eye(2))
    assert all(np.array_equal(L, np.zeros((2, 2))) for L in seq.lams)


def test_markov_scalar_closed_form():
    m = StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]], [[1.0]])
    seq = markov_from_ss(m, 2)
    assert seq.lam0[0, 0] == pytest.approx(4 / 3, abs=1e-14)
    assert seq.lag(1)[0, 0] == pytest.approx(2 / 3, abs=1e-14)
    assert seq.lag(2)[0, 0] == pytest.approx(1 / 3, abs=1e-14)


def test_markov_requires_positive_N(ex1):
    with pytest.raises(ValueError):
        markov_from_ss(ex1, 0)


def test_markov_examples_frozen(ex1, ex2):
    s1, s2 = markov_from_ss(ex1, 10), markov_from_ss(ex2, 10)
    assert np.max(np.abs(s1.lam0 - EX1_LAM0)) <= 1e-10
    assert np.max(np.abs(s1.lag(1) - EX1_LAM1)) <= 1e-10
    assert np.max(np.abs(s2.lag(1) - EX2_LAM1)) <= 1e-10


def test_hankel_singular_values_frozen(ex1, ex2):
    for m, ref in ((ex1, EX1_HANKEL_SV), (ex2, EX2_HANKEL_SV)):
        s = np.linalg.svd(hankel(markov_from_ss(m, 10), 5), compute_uv=False)
        assert np.allclose(s[:5], ref, rtol=1e-9)
        assert s[5] <= 1e-12 * s[0]


def test_ho_kalman_scalar_geometric():
    seq = CovarianceSequence([[2.0]], tuple(np.array([[0.5 ** (k - 1)]]) for k in range(1, 5)))
    f = ho_kalman(seq, 2)
    assert f.n == 1
    assert f.A[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert (f.C @ f.Cbar.T)[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert markov_from_fact(f, 4).max_abs_diff(seq) <= 1e-12


def test_ho_kalman_white_noise():
    seq = CovarianceSequence(np.eye(2), tuple(np.zeros((2, 2)) for _ in range(10)))
    f = ho_kalman(seq, 5)
    assert f.n == 0 and f.A.shape == (0, 0)
    assert markov_from_fact(f, 10).max_abs_diff(seq) == 0.0


def test_ho_kalman_example1(ex1):
    seq = markov_from_ss(ex1, 10)
    f = ho_kalman(seq, 5)
    assert f.n == 5 and not f.gap_warning
    assert rank_tol(hankel(seq, 5), 1e-6) == 5
    assert markov_from_fact(f, 10).max_abs_diff(seq) <= 1e-8


def test_ho_kalman_errors(ex1):
    with pytest.raises(InsufficientLags):
        ho_kalman(markov_from_ss(ex1, 9), 5)
    seq = CovarianceSequence([[1.0]], tuple(np.array([[2.0 ** k]]) for k in range(4)))
    with pytest.raises(UnstableRealization):
        ho_kalman(seq, 2)


def test_ho_kalman_order_too_small_degrades_fit(ex1):
    seq = markov_from_ss(ex1, 10)
    f = ho_kalman(seq, 5, order=2)
    assert markov_from_fact(f, 10).max_abs_diff(seq) > 1e-3


def test_default_M():
    assert default_M(3) == 5
    assert default_M(3, 5) == 4


def test_fit_cbar_recovers_factor(ex1):
    seq = markov_from_ss(ex1, 10)
    f = ho_kalman(seq, 5)
    assert np.allclose(fit_cbar(f.A, f.C, seq), f.Cbar, atol=1e-9)


def test_factorization_transform_keeps_markov(ex1, rng):
    f = ho_kalman(markov_from_ss(ex1, 10), 5)
    T = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    assert markov_from_fact(f.transform(T), 10).max_abs_diff(markov_from_fact(f, 10)) <= 1e-9


def test_markov_from_empty_factorization():
    f = CovFactorization(np.zeros((0, 0)), np.zeros((2, 0)), np.zeros((2, 0)), np.eye(2))
    assert all(np.array_equal(L, np.zeros((2, 2))) for L in markov_from_fact(f, 3).lams)


@pytest.mark.parametrize("seed", range(20))
def test_round_trip_random_systems(seed):
    rng = np.random.default_rng(1000 + seed)
    n, p = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    m = random_dense(rng, n, p)
    M = -(-n // p) + 1
    seq = markov_from_ss(m, 2 * M)
    f = ho_kalman(seq, M)
    assert f.n == n
    assert markov_from_fact(f, 2 * M).max_abs_diff(seq) <= 1e-8 * max(1.0, np.max(np.abs(seq.lam0)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), p=st.integers(1, 3))
def test_markov_basis_invariance(seed, n, p):
    rng = np.random.default_rng(seed)
    m = random_stable_model(rng, n, p)
    T = rng.standard_normal((n, n)) + 2.5 * np.eye(n)
    if np.linalg.cond(T) > 1e4:
        return
    a, b = markov_from_ss(m, 6), markov_from_ss(m.transform(T), 6)
    assert a.max_abs_diff(b) <= 1e-10 * max(1.0, np.max(np.abs(a.lam0)))


def test_minimize_already_minimal(ex1):
    r = minimize(ex1)
    assert r.n == 5
    assert markov_from_ss(r, 10).max_abs_diff(markov_from_ss(ex1, 10)) <= 1e-10


def test_minimize_drops_padded_unreachable_mode(ex1):
    A = np.zeros((6, 6))
    A[:5, :5], A[5, 5] = ex1.A, 0.7
    C = np.hstack([ex1.C, np.ones((3, 1))])
    B = np.vstack([ex1.B, np.zeros((1, 3))])
    pad = StateSpaceModel(A, B, C, ex1.D, ex1.Q)
    r = minimize(pad)
    assert r.n == 5
    assert markov_from_ss(r, 10).max_abs_diff(markov_from_ss(pad, 10)) <= 1e-10


def test_minimize_example2_submodel(ex2):
    sub = ex2.select_outputs([0, 2])
    r = minimize(sub)
    seq = markov_from_ss(sub, 12)
    assert r.n == rank_tol(hankel(seq, 6), 1e-9) == 3
    assert ctrb_rank(r.A, r.B) == obsv_rank(r.C, r.A) == 3
    assert markov_from_ss(r, 12).max_abs_diff(seq) <= 1e-10
