import numpy as np
import pytest

from lazyier.changepoint import (
    ChangepointSpec,
    build_perturbed_mean,
    cusum_statistic,
    estimate_changepoint,
    population_cusum,
)
from lazyier.graph_model import GraphonSpec, MeanMatrix, sample_graphon_mean
from lazyier.lazy_process import LazyProcessParams, simulate_piecewise

from oracles import seq_from_dense


def toy_layers(rng, T=4, n=3):
    out = []
    for _ in range(T):
        U = np.triu(rng.random((n, n)) < 0.5).astype(int)
        out.append(U + np.triu(U, 1).T)
    return np.array(out)


def dense_cusum(D, t, xi):
    T = D.shape[0]
    diff = D[:t].mean(axis=0) - D[t:].mean(axis=0)
    return ((t / T) * (1 - t / T)) ** xi * np.abs(np.linalg.eigvalsh(diff)).max()


def test_identical_layers_zero(rng):
    D = np.repeat(toy_layers(rng, 1, 5), 6, axis=0)
    seq = seq_from_dense(D)
    assert all(cusum_statistic(seq, t, 0.5) == pytest.approx(0.0, abs=1e-12) for t in range(1, 6))


@pytest.mark.parametrize("xi", [0.0, 0.5, 1.0])
def test_matches_dense_oracle(rng, xi):
    D = toy_layers(rng)
    seq = seq_from_dense(D)
    for t in range(1, 4):
        assert cusum_statistic(seq, t, xi) == pytest.approx(dense_cusum(D, t, xi), rel=1e-10, abs=1e-12)


def test_xi_zero_is_raw_norm(rng):
    D = toy_layers(rng, 6, 4)
    diff = D[:2].mean(axis=0) - D[2:].mean(axis=0)
    assert cusum_statistic(seq_from_dense(D), 2, 0.0) == pytest.approx(np.abs(np.linalg.eigvalsh(diff)).max())


def test_empty_then_complete():
    n, T, tau = 6, 10, 4
    D = np.zeros((T, n, n), dtype=int)
    D[tau:] = 1
    prof = estimate_changepoint(seq_from_dense(D), 1, 0.5)
    assert prof.argmax == tau and prof.tie_count == 1
    assert np.all(np.diff(prof.values[: tau]) > 0)


def test_exhaustive_argmax(rng):
    D = toy_layers(rng, 9, 4)
    prof = estimate_changepoint(seq_from_dense(D), 2, 0.5)
    vals = [dense_cusum(D, t, 0.5) for t in range(2, 8)]
    np.testing.assert_allclose(prof.values, vals, atol=1e-12)
    assert prof.argmax == 2 + int(np.argmax(np.round(vals, 12)))


def test_ties_take_smallest_t():
    n, T = 3, 6
    D = np.zeros((T, n, n), dtype=int)
    prof = estimate_changepoint(seq_from_dense(D), 1, 0.5)
    assert prof.argmax == 1 and prof.tie_count == T - 1


def test_no_change_contract():
    P = MeanMatrix(np.full((30, 30), 0.1))
    seq = simulate_piecewise(LazyProcessParams(P, 0.0, 12), P, 6, seed=3)
    prof = estimate_changepoint(seq, 3, 0.5)
    assert 3 <= prof.argmax <= 9
    np.testing.assert_array_equal(prof.t, np.arange(3, 10))


def test_lambda_validation():
    seq = seq_from_dense(np.zeros((4, 2, 2), dtype=int))
    with pytest.raises(ValueError):
        estimate_changepoint(seq, 3, 0.5)
    with pytest.raises(ValueError):
        cusum_statistic(seq, 4, 0.5)


def _spec(rng, n=8, tau=5, xi=0.5):
    P = rng.random((n, n)) * 0.3
    P = np.triu(P) + np.triu(P, 1).T
    Q = np.minimum(P + 0.2, 1.0)
    return ChangepointSpec(MeanMatrix(P), MeanMatrix(Q), tau, xi=xi)


@pytest.mark.parametrize("xi", [0.0, 0.3, 0.5, 1.0])
def test_population_cusum_direct_formula(rng, xi):
    spec, T = _spec(rng, xi=xi), 12
    for t in range(1, T):
        # noise-free layer means: P up to tau, Q after
        means = np.array([spec.P.entries if s < spec.tau else spec.Q.entries for s in range(T)])
        assert population_cusum(spec, T, t) == pytest.approx(dense_cusum(means, t, xi), rel=1e-10)


def test_population_cusum_peak_at_tau(rng):
    spec, T = _spec(rng), 12
    vals = [population_cusum(spec, T, t) for t in range(1, T)]
    assert int(np.argmax(vals)) + 1 == spec.tau
    norm = np.abs(np.linalg.eigvalsh(spec.P.entries - spec.Q.entries)).max()
    tau = spec.tau
    assert vals[tau - 1] == pytest.approx(np.sqrt(tau * (T - tau)) / T * norm)


def test_population_cusum_no_change():
    P = MeanMatrix(np.full((4, 4), 0.2))
    spec = ChangepointSpec(P, P, 3)
    assert all(population_cusum(spec, 8, t) == 0.0 for t in range(1, 8))


def test_perturbed_mean_zero_shift():
    P = sample_graphon_mean(GraphonSpec(50, 72.0), 1)
    assert build_perturbed_mean(P, 30, 0.0, seed=2) == P


def test_perturbed_mean_frobenius():
    P = sample_graphon_mean(GraphonSpec(500, 72.0), 1)
    Q = build_perturbed_mean(P, 100, 0.05, seed=2)
    diff = Q.entries - P.entries
    assert (diff**2).sum() == pytest.approx(0.5)
    assert np.count_nonzero(diff) == 200
    assert np.all(np.diagonal(diff) == 0)


def test_perturbed_mean_saturates():
    P = sample_graphon_mean(GraphonSpec(10, 2.0), 0)
    Q = build_perturbed_mean(P, 45, 1.0, seed=0).entries
    off = ~np.eye(10, dtype=bool)
    assert np.all(Q[off] == 1.0)
    np.testing.assert_array_equal(np.diagonal(Q), np.diagonal(P.entries))


def test_strong_signal_detected():
    n, T, tau = 500, 30, 15
    P = MeanMatrix(np.full((n, n), 0.01))
    hits = 0
    for s in range(10):
        Q = build_perturbed_mean(P, 200, 0.5, seed=s)
        seq = simulate_piecewise(LazyProcessParams(P, 0.0, T), Q, tau, seed=1000 + s)
        hits += estimate_changepoint(seq, 1, 0.5).argmax == tau
    assert hits >= 9


def test_spec_validation():
    P = MeanMatrix(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ChangepointSpec(P, P, 2, xi=1.5)
    spec = ChangepointSpec(P, P, 2, Lambda=3)
    assert spec.kappa(10) == 2
    with pytest.raises(ValueError):
        spec.validate(10)
