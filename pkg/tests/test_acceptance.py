"""End-to-end acceptance checks for the laboratory.

Each test covers one numbered claim about the package, at full scale and with
the advertised tolerance.  Test names carry the criterion number, so a
``pytest -v`` run gives one pass/fail line per criterion; each test also
prints a one-line quantitative summary (visible with ``-s`` or on failure).
"""

import math

import numpy as np

from younglab.dynamics import derive_seed, simulate
from younglab.ensembles import (
    ALPHA,
    BETA,
    GrandcanonicalParams,
    Stat,
    calibrate_epsilon,
    sample_grandcanonical,
    vershik_curve,
)
from younglab.fluctlab import (
    gaussian_bump,
    green_kernel_solve,
    ks_critical,
    ks_statistic,
    poincare_constant,
    run_dynamic_experiment,
    run_static_experiment,
    spde_invariant_experiment,
)
from younglab.pde import rho_u_infinity, solve_psi_ru, stationarity_drift
from younglab.spde import _mirror, natural_boundary_check
from younglab.transforms import Profile, rotated_height, rotated_height_counting

SQRT2 = math.sqrt(2.0)


def test_criterion_01_calibration_asymptotics():
    # |eps(N) - (1 - rate/N)| * N^2 / log N stays order one and drifts by
    # less than a factor 2 across N = 50..200 (the correction is ~ log N / N^2).
    lines = []
    for kind, rate in ((Stat.U, ALPHA), (Stat.RU, BETA)):
        vals = np.array(
            [
                abs(calibrate_epsilon(kind, n) - (1.0 - rate / n)) * n * n / math.log(n)
                for n in (50, 100, 200)
            ]
        )
        assert np.all(vals > 0.02) and np.all(vals < 2.0), f"{kind}: {vals}"
        assert vals.max() / vals.min() <= 2.0, f"{kind}: spread {vals}"
        lines.append(f"{kind.value}={np.round(vals, 3)}")
    print(f"criterion 01 calibration: PASS  {'; '.join(lines)}")


def test_criterion_02_rotation_identity():
    # 10^3 random diagrams: the rotated boundary passes exactly through the
    # particle sites, the counting form agrees within sqrt(2) everywhere, and
    # scaled curves sampled at N = 25 agree within sqrt(2)/N.
    rng = np.random.default_rng(2)
    worst_site = 0.0
    worst_gap = 0.0
    worst_scaled = 0.0
    for kind in (Stat.U, Stat.RU):
        small = GrandcanonicalParams.for_scale(kind, 6.0)
        big = GrandcanonicalParams.for_scale(kind, 25.0)
        for _ in range(450):
            state = sample_grandcanonical(small, kind, rng)
            cols = state.columns
            if cols.size:
                idx = np.arange(1, cols.size + 1)
                sites = (cols - idx) / SQRT2
                vals = rotated_height(state, sites)
                worst_site = max(worst_site, float(np.max(np.abs(vals - (cols + idx) / SQRT2))))
            span_lo = -(cols.size + 3) / SQRT2
            span_hi = ((cols[0] if cols.size else 0) + 3) / SQRT2
            v = np.linspace(span_lo, span_hi, 64)
            gap = np.abs(rotated_height(state, v) - rotated_height_counting(state, v))
            worst_gap = max(worst_gap, float(np.max(gap)))
        for _ in range(50):
            state = sample_grandcanonical(big, kind, rng)
            v = np.linspace(-2.5, 2.5, 64)
            gap = np.abs(
                rotated_height(state, 25.0 * v) - rotated_height_counting(state, 25.0 * v)
            ) / 25.0
            worst_scaled = max(worst_scaled, float(np.max(gap)))
    assert worst_site <= 1e-9, f"site identity violated by {worst_site}"
    assert worst_gap <= SQRT2 + 1e-9, f"unscaled gap {worst_gap} > sqrt(2)"
    assert worst_scaled <= SQRT2 / 25.0 + 1e-12, f"scaled gap {worst_scaled}"
    print(
        f"criterion 02 rotation: PASS  site={worst_site:.1e} "
        f"global={worst_gap:.4f}<=sqrt2 scaled={worst_scaled:.4f}<=sqrt2/25"
    )


def test_criterion_03_stationarity_residuals():
    # All five closed-form stationary profiles drift by < 1e-4 over t in [0,1]
    # under their own schemes, and the drift at least halves when du halves.
    cases = {"rho_line": 0.02, "omega": 0.02, "psi_u": 0.01, "psi_ru": 0.01, "rho_u": 0.01}
    parts = []
    for name, du in cases.items():
        fine = stationarity_drift(name, du)
        coarse = stationarity_drift(name, 2.0 * du)
        assert fine < 1e-4, f"{name}: drift {fine:.2e} at du={du}"
        assert fine <= coarse / 2.0, f"{name}: no refinement gain ({coarse:.2e} -> {fine:.2e})"
        parts.append(f"{name}={fine:.1e}(x{coarse / fine:.1f})")
    print(f"criterion 03 stationarity: PASS  {' '.join(parts)}")


def test_criterion_04_hopf_cole_route_equivalence():
    # Direct nonlinear integration and the exponential-transform route agree
    # within 1e-3 sup norm at t = 0.5 from perturbed initial data.
    du = 0.01
    grid = du * np.arange(int(round(10.0 / du)) + 1)
    psi_eq, _ = vershik_curve(Stat.RU, grid)
    psi0 = Profile(0.0, du, psi_eq + 0.05 * grid**2 * np.exp(-grid))
    direct = solve_psi_ru(psi0, 0.5, route="direct")
    via = solve_psi_ru(psi0, 0.5, route="via_omega")
    gap = float(np.max(np.abs(direct.frames[-1] - via.frames[-1])))
    moved = float(np.max(np.abs(direct.frames[-1] - psi0.values)))
    assert moved > 1e-3, "perturbation did not evolve; check is vacuous"
    assert gap <= 1e-3, f"route disagreement {gap:.2e} > 1e-3"
    print(f"criterion 04 route equivalence: PASS  sup gap={gap:.2e} (moved {moved:.2e})")


def test_criterion_05_static_fluctuation_clt():
    # N = 100, M = 2e4 grandcanonical samples: probe covariance of the
    # fluctuation field within 4*SE + 1.5/sqrt(N) of rho(u v v)/rate, with
    # the exact finite-N covariance reported alongside.
    parts = []
    for kind, seed in ((Stat.RU, 11), (Stat.U, 12)):
        rep = run_static_experiment(kind, 100.0, 20000, seed=seed)
        assert rep.oracle is not None, "finite-N oracle missing"
        assert rep.passed, f"{kind}: max_z={rep.max_z_score:.2f}, tol={rep.tolerance_policy}"
        assert rep.mean_passed, f"{kind}: mean check failed"
        parts.append(f"{kind.value}: max_z={rep.max_z_score:.2f}")
    print(f"criterion 05 static CLT: PASS  {'; '.join(parts)} (M=20000, N=100)")


def _observable_rows(states):
    area = np.array([s.area for s in states], dtype=np.float64)
    top = np.array([s.column(1) for s in states], dtype=np.float64)
    xi1 = np.array([np.sum(s.columns == 1) for s in states], dtype=np.float64)
    return {"area": area, "p1": top, "xi1": xi1}


def test_criterion_06_microscopic_invariance_ks():
    # N = 50: evolve M = 2000 equilibrium starts to t = 0.05 and compare
    # area, largest part and first height difference against fresh samples;
    # all two-sample KS statistics below the 1% critical value.
    n_scale, m, t_end = 50.0, 2000, 0.05
    crit = ks_critical(m, m, alpha=0.01)
    parts = []
    for kind, base in ((Stat.RU, 100), (Stat.U, 200)):
        params = GrandcanonicalParams.for_scale(kind, n_scale)
        fresh_rng = np.random.default_rng(base)
        init_rng = np.random.default_rng(base + 1)
        fresh = [sample_grandcanonical(params, kind, fresh_rng) for _ in range(m)]
        evolved = []
        for i in range(m):
            state = sample_grandcanonical(params, kind, init_rng)
            rec = simulate(
                state, kind, params.epsilon, n_scale, t_end, seed=derive_seed(base + 2, i)
            )
            evolved.append(rec.snapshots[-1])
        rows_a = _observable_rows(fresh)
        rows_b = _observable_rows(evolved)
        for name in rows_a:
            ks = ks_statistic(rows_a[name], rows_b[name])
            assert ks < crit, f"{kind} {name}: KS {ks:.4f} >= critical {crit:.4f}"
            parts.append(f"{kind.value}.{name}={ks:.3f}")
    print(f"criterion 06 invariance KS: PASS  crit={crit:.4f}  {' '.join(parts)}")


def test_criterion_07_green_kernel_match():
    # Columnwise inversion of the discretized operator reproduces the
    # stationary covariance: 2% max relative error on [0,6] (half line),
    # 3% on [0.05,6] (singular-edge case), du = 0.01.
    ru = green_kernel_solve(Stat.RU, window=6.0, du=0.01)
    u = green_kernel_solve(Stat.U, window=6.0, du=0.01)
    assert ru.max_rel_error <= 0.02, f"RU kernel error {ru.max_rel_error:.4f} > 2%"
    assert u.max_rel_error <= 0.03, f"U kernel error {u.max_rel_error:.4f} > 3%"
    print(
        f"criterion 07 green kernel: PASS  ru={ru.max_rel_error:.4f}<=0.02 "
        f"u={u.max_rel_error:.4f}<=0.03"
    )


def test_criterion_08_poincare_constants():
    # Smallest eigenvalue of the discretized quadratic-form operator is
    # strictly positive and moves by < 10% when the grid is halved.
    parts = []
    for kind in (Stat.RU, Stat.U):
        c = poincare_constant(kind, du=0.01)
        c_half = poincare_constant(kind, du=0.005)
        assert c > 0.0, f"{kind}: nonpositive constant {c}"
        assert abs(c_half - c) <= 0.1 * c, f"{kind}: unstable {c} vs {c_half}"
        parts.append(f"{kind.value}={c:.4f}({abs(c_half - c) / c:.1%})")
    print(f"criterion 08 poincare: PASS  {' '.join(parts)}")


def test_criterion_09_spde_invariant_measure():
    # M = 2000 equilibrium-coefficient paths over the long horizon: stationary
    # variance within 4*SE + 3% of C(u,u) and within 4*SE of the exact
    # discrete-scheme covariance, on both the half line and the truncated
    # singular-edge domain.
    parts = []
    for kind, seed in ((Stat.RU, 21), (Stat.U, 22)):
        rep = spde_invariant_experiment(kind, n_paths=2000, seed=seed)
        assert rep.oracle is not None, "scheme oracle missing"
        assert rep.passed, f"{kind}: max_z={rep.max_z_score:.2f} ({rep.tolerance_policy})"
        parts.append(f"{kind.value}: max_z={rep.max_z_score:.2f} t_long={rep.extra['t_long']:.1f}")
    print(f"criterion 09 spde invariant: PASS  {'; '.join(parts)} (M=2000)")


def test_criterion_10_dynamic_fluctuation_consistency():
    # N = 100, M = 2000 equilibrium trajectories to t = 0.2: the height
    # fluctuation field matches the discretized-SPDE stationary covariance
    # within 4*SE + 2/sqrt(N).
    rep = run_dynamic_experiment(Stat.RU, 100.0, 2000, 0.2, seed=31)
    assert rep.oracle is not None
    assert rep.passed, f"max_z={rep.max_z_score:.2f} ({rep.tolerance_policy})"
    print(
        f"criterion 10 dynamic consistency: PASS  max_z={rep.max_z_score:.2f} "
        f"jumps={rep.extra['total_jumps']:.2e} (RU, N=100, M=2000, t=0.2)"
    )


def test_criterion_11_even_reflected_noise_covariance():
    # 1e4 even-reflected noise increments: pairings <phi, dW> have covariance
    # int phi psi + int phi(u) psi(-u), within 5*SE for three function pairs.
    du = 0.02
    v = np.linspace(-8.0, 8.0, 801)
    m = 10_000
    rng = np.random.default_rng(41)
    z = _mirror(rng.standard_normal((m, 401)))
    assert np.array_equal(z, z[:, ::-1]), "reflected noise is not even"

    def q_pair(f, g):
        return float(np.trapezoid(f * g, v) + np.trapezoid(f * g[::-1], v))

    pairs = [
        (gaussian_bump(v, 0.0, 1.0), gaussian_bump(v, 0.0, 1.0)),
        (gaussian_bump(v, 1.0, 0.5), gaussian_bump(v, -1.0, 0.5)),
        (gaussian_bump(v, 2.0, 0.4), gaussian_bump(v, 2.5, 0.6)),
    ]
    parts = []
    for k, (phi, psi) in enumerate(pairs):
        x = (z @ phi) * math.sqrt(du)
        y = (z @ psi) * math.sqrt(du)
        emp = float(np.mean(x * y))
        target = q_pair(phi, psi)
        se = math.sqrt((q_pair(phi, phi) * q_pair(psi, psi) + target**2) / m)
        assert abs(emp - target) <= 5.0 * se, (
            f"pair {k}: {emp:.4f} vs {target:.4f} (5SE={5 * se:.4f})"
        )
        parts.append(f"z{k}={abs(emp - target) / se:.2f}")
    print(f"criterion 11 noise pairing: PASS  {' '.join(parts)} (M=10000, 5SE)")


def test_criterion_12_natural_boundary_scale_function():
    # The scale function of the edge tracer diffusion grows by >= 2x per
    # decade down to u = 1e-6, certifying that 0 is inaccessible.
    rep = natural_boundary_check(rho_u_infinity)
    assert rep.diverges
    assert np.all(rep.decade_ratios >= 2.0), f"ratios {rep.decade_ratios}"
    print(
        f"criterion 12 natural boundary: PASS  decade ratios "
        f"{np.round(rep.decade_ratios, 1)} (>=2 required)"
    )
