"""Stochastic field solvers: noise geometry, invariant covariances, couplings."""

import math

import numpy as np
import pytest

from younglab.ensembles import ALPHA, BETA, EnsembleError, Stat, static_covariance, vershik_curve
from younglab.pde import omega_infinity, rho_infinity_line, rho_u_infinity
from younglab.spde import (
    NoiseField,
    boundary_drift,
    boundary_sigma,
    equilibrium_zeta,
    equilibrium_zeta_inverse,
    integrate_spde,
    line_system,
    natural_boundary_check,
    neumann_heat_kernel,
    phi_bar_system,
    recover_psi_r,
    ru_system,
    scheme_covariance,
    solve_spde_phi_bar,
    solve_spde_ru,
    stationary_covariance,
    transform_line_to_u,
    u_system,
)
from younglab.transforms import Domain, Profile, cumulative_hole_integral


def rho_r_eq(u):
    return vershik_curve(Stat.RU, np.maximum(np.asarray(u, dtype=np.float64), 1e-12))[1]


def test_heat_kernel_identities():
    u = np.linspace(0.0, 5.0, 41)
    t = 0.3
    # symmetry and the image-charge form
    assert np.allclose(neumann_heat_kernel(t, u[:, None], u[None, :]),
                       neumann_heat_kernel(t, u[None, :], u[:, None]).T)
    pref = 1.0 / math.sqrt(4 * math.pi * t)
    want = pref * (np.exp(-((1.0 - 2.0) ** 2) / (4 * t)) + np.exp(-((1.0 + 2.0) ** 2) / (4 * t)))
    assert neumann_heat_kernel(t, 1.0, 2.0) == pytest.approx(want, rel=1e-14)
    # reflecting boundary conserves mass
    v = np.linspace(0.0, 40.0, 40001)
    mass = np.trapezoid(neumann_heat_kernel(t, 1.0, v), v)
    assert mass == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(EnsembleError):
        neumann_heat_kernel(0.0, 1.0, 1.0)
    with pytest.raises(EnsembleError):
        neumann_heat_kernel(0.5, -1.0, 1.0)


def test_zero_noise_reduces_to_drift_semigroup():
    # the centered field equation with the noise switched off is a heat flow
    # with killing at rate beta^2/4; a Dirichlet eigenfunction decays at the
    # exact combined rate
    v_max, du = 8.0, 0.1
    system = phi_bar_system(omega_infinity, rho_r_eq, v_max=v_max, du=du)
    v = system.u
    phi0 = np.cos(math.pi * v / (2 * v_max))
    t_end = 1.0
    res = integrate_spde(system, t_end, dt=5e-4, psi0=phi0, noise_scale=0.0)
    lam = (math.pi / (2 * v_max)) ** 2 + BETA**2 / 4.0
    want = math.exp(-lam * t_end) * phi0
    inner = slice(1, -1)
    assert np.allclose(res.final_values[0][inner], want[inner], atol=1e-3)


def test_solution_is_affine_in_the_noise():
    du = 0.1
    system = ru_system(rho_r_eq, du=du)
    n_steps = 200
    rng = np.random.default_rng(3)
    xi = NoiseField(rng.standard_normal((n_steps, 1, system.n)))
    base = integrate_spde(system, 0.1, 5e-4, noise=xi, noise_scale=0.0).final_values
    one = integrate_spde(system, 0.1, 5e-4, noise=xi, noise_scale=1.0).final_values
    two = integrate_spde(system, 0.1, 5e-4, noise=xi, noise_scale=2.0).final_values
    assert np.allclose(two - base, 2.0 * (one - base), rtol=1e-10, atol=1e-12)


def test_same_seed_same_paths():
    a = solve_spde_ru(rho_r_eq, 0.05, n_paths=3, rng=np.random.default_rng(7))
    b = solve_spde_ru(rho_r_eq, 0.05, n_paths=3, rng=np.random.default_rng(7))
    assert np.array_equal(a.paths, b.paths)


def test_mirrored_noise_gives_even_paths():
    # the symmetrized equation copies one normal per half-line cell to +-u,
    # so with even initial data every path stays exactly even
    res = solve_spde_phi_bar(
        omega_infinity, rho_r_eq, 0.2, n_paths=4, rng=np.random.default_rng(5)
    )
    vals = res.final_values
    assert np.allclose(vals, vals[:, ::-1], atol=1e-10)
    assert float(np.max(np.abs(vals))) > 1e-3  # noise actually acted


def test_noise_shape_validation():
    system = ru_system(rho_r_eq, du=0.1)
    bad = NoiseField(np.zeros((10, 1, system.n - 1)))
    with pytest.raises(EnsembleError):
        integrate_spde(system, 0.05, 5e-3, noise=bad)


def test_lyapunov_matches_continuum_covariance_ru():
    # invariant diagonal of the discretized RU equation against
    # rho_R(u)/beta, including the boundary point u = 0; the window stays
    # clear of the Dirichlet truncation, whose deficit decays like
    # e^(-beta (u_max - u))
    system = ru_system(rho_r_eq, u_max=12.0, du=0.05)
    x = stationary_covariance(system)
    u = system.u
    keep = u <= 5.0
    want = static_covariance(Stat.RU, u[keep], u[keep])
    rel = np.abs(np.diag(x)[keep] - want) / want
    assert float(np.max(rel)) <= 0.01
    # off-diagonal structure: covariance depends on the larger coordinate
    i, j = np.searchsorted(u, 0.5), np.searchsorted(u, 2.0)
    assert x[i, j] == pytest.approx(static_covariance(Stat.RU, 0.5, 2.0), rel=0.02)


def test_lyapunov_matches_continuum_covariance_u():
    system = u_system(rho_u_infinity, u_max=12.0, du=0.025)
    x = stationary_covariance(system)
    u = system.u
    keep = (u >= 0.5) & (u <= 5.0)
    want = static_covariance(Stat.U, u[keep], u[keep])
    rel = np.abs(np.diag(x)[keep] - want) / want
    assert float(np.max(rel)) <= 0.01


def test_symmetrized_route_reproduces_ru_covariance():
    # map the invariant covariance of the symmetrized equation back to the
    # half line: decay^2 Cov / (beta omega)^2 must equal rho_R(u)/beta
    system = phi_bar_system(omega_infinity, rho_r_eq, v_max=12.0, du=0.05)
    x = stationary_covariance(system)
    n = system.n
    center = (n - 1) // 2
    u = system.grid_step * np.arange(n - center)
    factor = np.exp(-BETA * u / 2.0) / (BETA * omega_infinity(u))
    got = np.diag(x)[center:] * factor**2
    want = static_covariance(Stat.RU, u, u)
    keep = u <= 5.0
    rel = np.abs(got[keep] - want[keep]) / want[keep]
    assert float(np.max(rel)) <= 0.01


def test_scheme_covariance_converges_to_lyapunov():
    # compare away from the truncation row, where the variance is tiny and
    # relative gaps are dominated by the Dirichlet closure
    system = ru_system(rho_r_eq, du=0.1)
    cont = np.diag(stationary_covariance(system))
    window = system.u <= 5.0
    gaps = []
    for dt in (8e-3, 4e-3, 2e-3):
        sch = np.diag(scheme_covariance(system, dt))
        gaps.append(float(np.max(np.abs(sch[window] - cont[window]) / cont[window])))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01
    # the step bias shrinks roughly linearly in dt
    assert gaps[0] / gaps[2] > 2.0


def test_common_noise_couples_the_two_descriptions():
    # one half-line noise drives both the direct RU equation and the
    # symmetrized one; mapping back must reproduce the direct path
    du, dt, t_end = 0.1, 5e-4, 0.6
    ru = ru_system(rho_r_eq, du=du)
    n_steps = int(round(t_end / dt))
    rng = np.random.default_rng(11)
    xi = NoiseField(rng.standard_normal((n_steps, 2, ru.n)))
    direct = integrate_spde(ru, t_end, dt, n_paths=2, noise=xi)
    bar = solve_spde_phi_bar(
        omega_infinity, rho_r_eq, t_end, dt=dt, n_paths=2, du=du, noise=xi
    )
    mapped = recover_psi_r(bar, omega_infinity)
    keep = direct.u <= 5.0
    gap = direct.final_values[:, keep] - mapped.final_values[:, keep]
    scale = float(np.std(direct.final_values[:, keep]))
    assert float(np.max(np.abs(gap))) <= 0.05 * scale


def test_transform_line_to_u_equilibrium():
    v = np.arange(-10.0, 10.0, 0.01)
    rho = Profile(-10.0, 0.01, rho_infinity_line(v), Domain.WHOLE_LINE)
    psi_bar = Profile(-10.0, 0.01, np.exp(-0.1 * v**2), Domain.WHOLE_LINE)
    out = transform_line_to_u(psi_bar, rho, u_grid=np.arange(0.2, 6.0, 0.05))
    v_of_u = equilibrium_zeta_inverse(out.u)
    want = np.exp(-0.1 * v_of_u**2) / (1.0 - np.exp(-ALPHA * out.u))
    assert float(np.max(np.abs(out.values - want))) <= 1e-4


def test_equilibrium_zeta_closed_forms():
    u = np.arange(0.1, 6.0, 0.1)
    assert np.allclose(equilibrium_zeta(equilibrium_zeta_inverse(u)), u, atol=1e-12)
    v = np.arange(-12.0, 12.0, 0.01)
    rho = Profile(-12.0, 0.01, rho_infinity_line(v), Domain.WHOLE_LINE)
    assert np.allclose(cumulative_hole_integral(rho), equilibrium_zeta(v), atol=1e-5)


def test_natural_boundary_diverges_at_equilibrium():
    report = natural_boundary_check(rho_u_infinity)
    assert report.diverges
    # every decade towards 0 multiplies the scale magnitude enormously
    assert np.all(report.decade_ratios >= 100.0)


def test_accessible_boundary_control():
    # with a bounded density the scale function converges, so the same probe
    # must NOT flag divergence
    report = natural_boundary_check(lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)))
    assert not report.diverges
    assert report.decade_ratios[-1] < 1.5


def test_boundary_coefficients_degenerate_linearly():
    x = np.array([1e-4, 1e-3, 1e-2])
    sig = boundary_sigma(rho_u_infinity, x)
    # rho ~ 1/(alpha x) near 0 so sigma ~ alpha x
    assert np.allclose(sig, ALPHA * x, rtol=0.02)
    assert np.all(np.diff(sig) > 0)
    assert np.all(boundary_drift(rho_u_infinity, x) > 0)


def test_paths_container_accessors():
    res = solve_spde_ru(rho_r_eq, 0.05, n_paths=2, store_times=[0.0, 0.05], rng=np.random.default_rng(1))
    assert res.paths.shape[:2] == (2, 2)
    assert res.times == pytest.approx([0.0, 0.05])
    prof = res.profile(1)
    assert prof.values == pytest.approx(res.paths[1, -1])
    assert np.allclose(res.u, prof.u)
