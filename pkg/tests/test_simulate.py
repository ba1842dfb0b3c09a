import numpy as np
import pytest

from ssgranger.model import StateSpaceModel
from ssgranger.realization import markov_from_ss
from ssgranger.simulate import (
    SimulationConfig,
    consistency_report,
    empirical_covariances,
    psd_sqrt,
    read_csv,
    simulate_path,
    simulate_replications,
    write_csv,
)
from ssgranger.solvers import solve_lyapunov


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(0)
    with pytest.raises(ValueError):
        SimulationConfig(10, burn_in=-1)


def test_white_noise_covariance_bound():
    N = 100_000
    m = StateSpaceModel(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.eye(2))
    y = simulate_path(m, SimulationConfig(N, seed=7))
    assert y.shape == (N, 2)
    seq = empirical_covariances(y, 3)
    assert np.max(np.abs(seq.lam0 - np.eye(2))) <= 3 / np.sqrt(N)
    assert max(np.max(np.abs(L)) for L in seq.lams) <= 3 / np.sqrt(N)


def test_zero_noise_gives_zero_path(ex1):
    m = StateSpaceModel(ex1.A, ex1.B, ex1.C, ex1.D, np.zeros((3, 3)))
    assert not np.any(simulate_path(m, SimulationConfig(50, seed=1)))


def test_singular_q_sqrt():
    Q = np.array([[1.0, 1.0], [1.0, 1.0]])
    S = psd_sqrt(Q)
    assert np.allclose(S @ S.T, Q, atol=1e-12)


def test_reproducible(ex1):
    cfg = SimulationConfig(500, burn_in=10, seed=123)
    assert np.array_equal(simulate_path(ex1, cfg), simulate_path(ex1, cfg))
    assert not np.array_equal(simulate_path(ex1, cfg),
                              simulate_path(ex1, SimulationConfig(500, 10, 124)))


def test_replication_seed_streams(ex1):
    reps = simulate_replications(ex1, SimulationConfig(100, seed=5, n_replications=3))
    for r, y in enumerate(reps):
        assert np.array_equal(y, simulate_path(ex1, SimulationConfig(100, seed=5 + r)))


def test_empirical_covariances_zero_and_bounds():
    seq = empirical_covariances(np.zeros((20, 2)), 4)
    assert seq.n_lags == 4 and not np.any(seq.lam0)
    with pytest.raises(ValueError):
        empirical_covariances(np.zeros((5, 1)), 5)


def test_empirical_covariances_biased_normalization():
    y = np.arange(1.0, 5.0)[:, None]
    seq = empirical_covariances(y, 1)
    assert seq.lam0[0, 0] == pytest.approx(30 / 4)
    assert seq.lag(1)[0, 0] == pytest.approx((2 + 6 + 12) / 4)


def test_example1_estimates_are_unbiased(ex1):
    R, N = 24, 20_000
    exact = markov_from_ss(ex1, 3)
    errs = np.array([
        [empirical_covariances(y, 3).lag(k) - exact.lag(k) for k in range(4)]
        for y in simulate_replications(ex1, SimulationConfig(N, burn_in=0, seed=300, n_replications=R))
    ])
    mean, se = errs.mean(axis=0), errs.std(axis=0, ddof=1) / np.sqrt(R)
    # biased normalization shifts lag k by k/N relative; negligible here
    assert np.all(np.abs(mean) <= 5 * se + 4 * np.abs(np.stack([exact.lag(k) for k in range(4)])) / N)


def test_consistency_report_flags_without_failing(ex1):
    N = 100_000
    emp = empirical_covariances(simulate_path(ex1, SimulationConfig(N, seed=11)), 5)
    rep = consistency_report(emp, markov_from_ss(ex1, 5), N)
    assert rep.verdicts == {} and rep.verdict
    assert set(rep.residuals) == {f"lag{k}" for k in range(6)}
    assert rep.tolerances["bound"] == pytest.approx(5 * 43.87909878147096 / np.sqrt(N))
    tight = consistency_report(emp, markov_from_ss(ex1, 5), N, factor=1e-6)
    assert tight.flags["lags_over_bound"] == list(range(6)) and tight.notes


def test_stationary_initialization(ex2):
    # x0 is drawn from N(0, P): the first output already has the stationary spread
    P = solve_lyapunov(ex2.A, ex2.B @ ex2.Q @ ex2.B.T)
    y0 = np.array([simulate_path(ex2, SimulationConfig(1, seed=s))[0] for s in range(4000)])
    lam0 = ex2.C @ P @ ex2.C.T + ex2.Q
    assert np.max(np.abs(np.cov(y0.T) - lam0)) <= 0.2 * np.max(np.abs(lam0))
    sd = np.sqrt(np.diag(lam0))
    assert np.all(np.abs(y0.mean(axis=0)) <= 4 * sd / np.sqrt(4000))


def test_csv_round_trip(tmp_path, ex1):
    y = simulate_path(ex1, SimulationConfig(30, seed=2))
    path = tmp_path / "y.csv"
    write_csv(y, path)
    assert path.read_text().splitlines()[0] == "y1,y2,y3"
    assert np.array_equal(read_csv(path), y)
