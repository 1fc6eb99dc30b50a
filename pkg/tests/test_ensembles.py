"""Ensemble oracles: partition sums, calibration, limit shapes, exact moments."""

import math

import numpy as np
import pytest

from younglab.ensembles import (
    ALPHA,
    BETA,
    EnsembleError,
    GrandcanonicalParams,
    Stat,
    YoungDiagram,
    calibrate_epsilon,
    diagram_from_differences,
    finite_size_covariance,
    finite_size_mean_height,
    mean_size,
    partition_sum,
    sample_height_differences,
    static_covariance,
    vershik_curve,
)


def partition_counts(n_max, distinct=False):
    """p(n) via the bounded-part DP; distinct=True counts strict partitions."""
    counts = np.zeros(n_max + 1, dtype=np.int64)
    counts[0] = 1
    for part in range(1, n_max + 1):
        if distinct:
            for n in range(n_max, part - 1, -1):
                counts[n] += counts[n - part]
        else:
            for n in range(part, n_max + 1):
                counts[n] += counts[n - part]
    return counts


def enumerate_partitions(n_max, distinct=False):
    """All partitions with area <= n_max as tuples (largest part first)."""
    out = []

    def rec(remaining, max_part, prefix):
        out.append(tuple(prefix))
        lo = 1
        for part in range(min(remaining, max_part), lo - 1, -1):
            nxt = part - 1 if distinct else part
            rec(remaining - part, nxt, prefix + [part])

    rec(n_max, n_max, [])
    return out


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_partition_sum_matches_counting_series(kind):
    eps = 0.5
    counts = partition_counts(80, distinct=kind is Stat.RU)
    series = float(np.sum(counts * eps ** np.arange(81)))
    # tail: p(n) <= e^(pi sqrt(2n/3)), so the n > 80 remainder is < 1e-12
    assert partition_sum(eps, kind) == pytest.approx(series, rel=1e-10)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_mean_size_matches_counting_series(kind):
    eps = 0.5
    counts = partition_counts(120, distinct=kind is Stat.RU)
    n = np.arange(121)
    weights = counts * eps**n
    assert mean_size(eps, kind) == pytest.approx(float(np.sum(n * weights) / np.sum(weights)), rel=1e-8)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_mean_height_matches_exact_enumeration(kind):
    # Gibbs average of psi_p(x) over all diagrams, truncated at area 24;
    # at eps = 0.3 the truncation error is below p(25) 0.3^25 ~ 1e-10
    eps = 0.3
    parts = enumerate_partitions(24, distinct=kind is Stat.RU)
    z = 0.0
    mean_psi = np.zeros(3)
    xs = np.array([0.5, 1.5, 2.5])
    for p in parts:
        w = eps ** sum(p)
        z += w
        cols = np.asarray(p, dtype=np.float64)
        for j, x in enumerate(xs):
            mean_psi[j] += w * np.sum(cols > x)
    mean_psi /= z
    got = finite_size_mean_height(kind, eps, 1.0, xs)  # N = 1 makes u = x
    assert np.allclose(got, mean_psi, atol=1e-8)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_covariance_matches_exact_enumeration(kind):
    eps = 0.3
    parts = enumerate_partitions(24, distinct=kind is Stat.RU)
    xs = np.array([0.5, 1.5])
    z = 0.0
    m1 = np.zeros(2)
    m2 = np.zeros((2, 2))
    for p in parts:
        w = eps ** sum(p)
        cols = np.asarray(p, dtype=np.float64)
        psi = np.array([np.sum(cols > x) for x in xs], dtype=np.float64)
        z += w
        m1 += w * psi
        m2 += w * np.outer(psi, psi)
    m1 /= z
    cov = m2 / z - np.outer(m1, m1)
    got = finite_size_covariance(kind, eps, 1.0, xs[:, None], xs[None, :])
    assert np.allclose(got, cov, atol=1e-8)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_calibration_hits_target_area(kind):
    n_scale = 40
    eps = calibrate_epsilon(kind, n_scale)
    assert abs(mean_size(eps, kind) - n_scale**2) <= 1e-6 * n_scale**2


def test_calibration_first_order_rates():
    for kind, rate in ((Stat.U, ALPHA), (Stat.RU, BETA)):
        eps = calibrate_epsilon(kind, 100)
        assert eps == pytest.approx(1.0 - rate / 100, abs=2e-3)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_sampled_area_matches_calibration(kind):
    params = GrandcanonicalParams.for_scale(kind, 25)
    rng = np.random.default_rng(101)
    diffs = sample_height_differences(params, kind, rng, size=4000)
    areas = diffs @ np.arange(1, params.x_max + 1, dtype=np.float64)
    se = float(np.std(areas, ddof=1)) / math.sqrt(areas.size)
    assert abs(float(np.mean(areas)) - 25**2) <= 4.0 * se


def test_sampled_site_laws():
    params = GrandcanonicalParams.for_scale(Stat.U, 20)
    rng = np.random.default_rng(7)
    diffs = sample_height_differences(params, Stat.U, rng, size=6000)
    a = params.epsilon ** np.arange(1, params.x_max + 1, dtype=np.float64)
    target = a / (1.0 - a)
    var = a / (1.0 - a) ** 2
    se = np.sqrt(var / diffs.shape[0])
    assert np.all(np.abs(diffs.mean(axis=0) - target) <= 5.0 * se + 1e-12)

    params = GrandcanonicalParams.for_scale(Stat.RU, 20)
    diffs = sample_height_differences(params, Stat.RU, rng, size=6000)
    assert set(np.unique(diffs)) <= {0, 1}
    a = params.epsilon ** np.arange(1, params.x_max + 1, dtype=np.float64)
    target = a / (1.0 + a)
    se = np.sqrt(target * (1.0 - target) / diffs.shape[0])
    assert np.all(np.abs(diffs.mean(axis=0) - target) <= 5.0 * se + 1e-12)


def test_diagram_from_differences_round_trip():
    d = diagram_from_differences(np.array([2, 0, 1, 0, 0], dtype=np.int64))
    # two columns of height 1 and one of height 3
    assert d.columns.tolist() == [3, 1, 1]
    assert d.area == 5
    d.validate(Stat.U)


def test_vershik_curve_identities():
    u_star = math.log(2.0) / ALPHA
    psi, rho = vershik_curve(Stat.U, u_star)
    assert psi == pytest.approx(u_star, abs=1e-12)  # fixed point of the U curve
    psi0, rho0 = vershik_curve(Stat.RU, 0.0)
    assert rho0 == pytest.approx(0.5, abs=1e-12)
    assert psi0 == pytest.approx(math.log(2.0) / BETA, abs=1e-12)
    # slope identity psi' = -rho by central differences
    for kind in (Stat.U, Stat.RU):
        u = np.linspace(0.4, 3.0, 27)
        h = 1e-5
        slope = (vershik_curve(kind, u + h)[0] - vershik_curve(kind, u - h)[0]) / (2 * h)
        assert np.allclose(slope, -vershik_curve(kind, u)[1], atol=1e-8)
    with pytest.raises(EnsembleError):
        vershik_curve(Stat.U, 0.0)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_static_covariance_structure(kind):
    rate = kind.decay_rate
    u, v = 0.7, 1.9
    c = static_covariance(kind, u, v)
    assert c == pytest.approx(vershik_curve(kind, max(u, v))[1] / rate, rel=1e-12)
    # symmetric, and only the larger argument matters
    assert static_covariance(kind, v, u) == pytest.approx(c, rel=1e-12)
    assert static_covariance(kind, 0.3, v) == pytest.approx(c, rel=1e-12)


@pytest.mark.parametrize("kind", [Stat.U, Stat.RU])
def test_finite_size_covariance_converges_to_limit(kind):
    n_scale = 400
    eps = calibrate_epsilon(kind, n_scale)
    probes = np.array([0.5, 1.0, 2.0])
    fin = finite_size_covariance(kind, eps, n_scale, probes[:, None], probes[None, :])
    lim = static_covariance(kind, probes[:, None], probes[None, :])
    assert np.all(np.abs(fin - lim) <= 0.02 * np.abs(lim))


def test_diagram_validation():
    with pytest.raises(EnsembleError):
        YoungDiagram.from_columns([1, 2])
    d = YoungDiagram.from_columns([3, 3, 1])
    d.validate(Stat.U)
    with pytest.raises(EnsembleError):
        d.validate(Stat.RU)
