"""Deterministic hydrodynamic solvers for the diagram limit shapes.

Equations handled here (always with rates calibrated so that the Vershik
curves are stationary):

* U height:    d_t psi = (m(psi'))' + alpha m(psi'),  m(s) = s / (1 - s);
* RU height:   d_t psi = psi'' + beta psi' (1 + psi'), slope -1/2 at u = 0;
* line density (viscous Burgers):  d_t rho = rho'' + alpha (rho (1 - rho))';
* U density:   d_t rho = (m(rho))'' + alpha (m(rho))',  m(r) = r / (1 + r);
* Hopf-Cole profile:  d_t omega = omega'' + beta omega' with the Robin
  condition 2 omega'(t, 0) + beta omega(t, 0) = 0 and omega -> 1 at infinity.

Nonlinear equations use explicit conservative (flux-form) updates with a
diffusive step limit dt <= 0.4 du^2; linear equations use a theta-scheme
(Crank-Nicolson by default) with second-order ghost-point boundaries.
Stationary closed forms are provided as fixtures:

    rho_U(u)    = 1 / (e^(alpha u) - 1)
    rho(v; C)   = C / (e^(alpha v) + C)        (whole line, any C > 0)
    omega(u)    = 1 + e^(-beta u)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_banded

from .ensembles import ALPHA, BETA, EnsembleError, Stat, vershik_curve
from .transforms import Domain, Profile

CFL = 0.4


class BcKind(Enum):
    DIRICHLET = "dirichlet"
    SLOPE = "slope"  # prescribed first derivative
    ROBIN = "robin"  # a1 f' + a0 f = g


@dataclass(frozen=True)
class BoundarySpec:
    kind: BcKind
    value: float = 0.0  # Dirichlet value or prescribed slope or Robin rhs g
    a0: float = 0.0
    a1: float = 1.0


@dataclass(frozen=True)
class PdeGrid:
    """Uniform space grid plus step-size policy for the integrators."""

    u_min: float
    u_max: float
    du: float
    dt: float | None = None

    @property
    def u(self) -> np.ndarray:
        n = int(round((self.u_max - self.u_min) / self.du)) + 1
        return self.u_min + self.du * np.arange(n)


@dataclass
class TimeProfiles:
    """Stack of profiles indexed by time."""

    grid_start: float
    grid_step: float
    domain: Domain
    times: np.ndarray
    frames: np.ndarray  # (n_times, n_points)

    @property
    def u(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.frames.shape[1])

    def profile(self, k: int) -> Profile:
        return Profile(self.grid_start, self.grid_step, self.frames[k], self.domain)

    @property
    def final(self) -> Profile:
        return self.profile(len(self.times) - 1)

    def values_at(self, t: float) -> np.ndarray:
        """Frame at time t, linearly interpolated between stored frames."""
        times = self.times
        if t <= times[0]:
            return self.frames[0]
        if t >= times[-1]:
            return self.frames[-1]
        k = int(np.searchsorted(times, t))
        w = (t - times[k - 1]) / (times[k] - times[k - 1])
        return (1.0 - w) * self.frames[k - 1] + w * self.frames[k]


def _plan_steps(t_end: float, dt: float) -> tuple[int, float]:
    if t_end <= 1e-300:
        return 0, 1.0
    n_steps = max(int(math.ceil(t_end / dt - 1e-12)), 1)
    return n_steps, t_end / n_steps


def _store_schedule(store_times, t_end: float, dt: float, n_steps: int) -> dict[int, float]:
    if store_times is None:
        store_times = [0.0, t_end]
    at_step: dict[int, float] = {}
    for t in sorted(set(float(t) for t in store_times)):
        if t < -1e-12 or t > t_end + 1e-12:
            raise EnsembleError("store times must lie in [0, t_end]")
        at_step[min(int(round(t / dt)), n_steps)] = t
    return at_step


class _Recorder:
    def __init__(self, schedule: dict[int, float]):
        self.schedule = schedule
        self.times: list[float] = []
        self.frames: list[np.ndarray] = []

    def maybe(self, step: int, f: np.ndarray) -> None:
        if step in self.schedule:
            self.times.append(self.schedule[step])
            self.frames.append(f.copy())


def build_linear_operator(
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    h: float,
    left: BoundarySpec,
    right: BoundarySpec,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Second-order discretization of L f = a f'' + b f' + c f plus boundaries.

    Returns (lower, diag, upper, const, dirichlet_mask): tridiagonal bands of
    the operator rows, an affine constant from inhomogeneous boundary data,
    and a mask of rows frozen by Dirichlet conditions.
    """
    n = a.size
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    const = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    h2 = h * h

    lower[1:-1] = a[1:-1] / h2 - b[1:-1] / (2 * h)
    diag[1:-1] = -2 * a[1:-1] / h2 + c[1:-1]
    upper[1:-1] = a[1:-1] / h2 + b[1:-1] / (2 * h)

    def bc_row(j: int, spec: BoundarySpec, inward: int):
        # inward = +1 at the left edge, -1 at the right edge
        if spec.kind is BcKind.DIRICHLET:
            mask[j] = True
            return
        if spec.kind is BcKind.SLOPE:
            slope_coeff_f = 0.0
            slope_const = spec.value
        else:
            if abs(spec.a1) < 1e-300:
                raise EnsembleError("Robin condition needs a nonzero derivative weight")
            slope_coeff_f = -spec.a0 / spec.a1
            slope_const = spec.value / spec.a1
        # ghost = f_inner - 2 h inward * f'(edge); f'(edge) = slope_coeff_f * f_j + slope_const
        diag[j] = -2 * a[j] / h2 + c[j] + (b[j] - 2 * a[j] * inward / h) * slope_coeff_f
        inner = 2 * a[j] / h2
        if inward == 1:
            upper[j] = inner
        else:
            lower[j] = inner
        const[j] = (b[j] - 2 * a[j] * inward / h) * slope_const

    bc_row(0, left, +1)
    bc_row(n - 1, right, -1)
    return lower, diag, upper, const, mask


def operator_dense(lower, diag, upper, mask) -> np.ndarray:
    """Dense matrix of the operator with Dirichlet rows zeroed."""
    n = diag.size
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = diag
    mat[idx[:-1], idx[:-1] + 1] = upper[:-1]
    mat[idx[1:], idx[1:] - 1] = lower[1:]
    mat[mask, :] = 0.0
    return mat


def solve_linear(
    f0: Profile,
    a,
    b,
    c,
    t_end: float,
    left: BoundarySpec,
    right: BoundarySpec,
    dt: float | None = None,
    theta: float = 0.5,
    store_times=None,
) -> TimeProfiles:
    """Theta-scheme for d_t f = a f'' + b f' + c f with ghost-point boundaries."""
    u = f0.u
    h = f0.grid_step
    n = u.size
    a = np.broadcast_to(np.asarray(a, float), (n,)).copy()
    b = np.broadcast_to(np.asarray(b, float), (n,)).copy()
    c = np.broadcast_to(np.asarray(c, float), (n,)).copy()
    if dt is None:
        dt = h if theta >= 0.5 else CFL * h * h / max(a.max(), 1e-300)
    n_steps, dt = _plan_steps(t_end, dt)
    lower, diag, upper, const, mask = build_linear_operator(a, b, c, h, left, right)

    # implicit matrix (I - theta dt L) in banded form, Dirichlet rows = identity
    ab = np.zeros((3, n))
    ab[0, 1:] = -theta * dt * upper[:-1]
    ab[1, :] = 1.0 - theta * dt * diag
    ab[2, :-1] = -theta * dt * lower[1:]
    ab[1, mask] = 1.0
    ab[0, 1:][mask[:-1]] = 0.0
    ab[2, :-1][mask[1:]] = 0.0

    f = f0.values.copy()
    rec = _Recorder(_store_schedule(store_times, t_end, dt, n_steps))
    rec.maybe(0, f)
    explicit = 1.0 - theta
    for step in range(1, n_steps + 1):
        lf = diag * f + const
        lf[1:] += lower[1:] * f[:-1]
        lf[:-1] += upper[:-1] * f[1:]
        rhs = f + explicit * dt * lf + theta * dt * const
        rhs[mask] = f[mask]
        f = solve_banded((1, 1), ab, rhs)
        rec.maybe(step, f)
    return TimeProfiles(f0.grid_start, h, f0.domain, np.asarray(rec.times), np.asarray(rec.frames))


def _explicit_run(f0: Profile, rhs_fn, t_end: float, dt: float | None, store_times, dt_cap: float) -> TimeProfiles:
    if dt is None:
        dt = dt_cap
    if dt > dt_cap * (1 + 1e-9):
        raise EnsembleError(f"explicit step {dt} exceeds the stability cap {dt_cap}")
    n_steps, dt = _plan_steps(t_end, dt)
    f = f0.values.copy()
    rec = _Recorder(_store_schedule(store_times, t_end, dt, n_steps))
    rec.maybe(0, f)
    for step in range(1, n_steps + 1):
        f = f + dt * rhs_fn(f)
        rec.maybe(step, f)
    return TimeProfiles(f0.grid_start, f0.grid_step, f0.domain, np.asarray(rec.times), np.asarray(rec.frames))


def solve_burgers(
    rho0: Profile, t_end: float, alpha: float = ALPHA, dt: float | None = None, store_times=None
) -> TimeProfiles:
    """Viscous Burgers flow d_t rho = rho'' + alpha (rho(1-rho))' on a segment.

    Explicit flux-form update, endpoints pinned at their initial values
    (far-field data).  The scheme is monotone for du <= 2/alpha, so the
    solution stays inside [0, 1] and preserves orderings.
    """
    if np.any(rho0.values < -1e-12) or np.any(rho0.values > 1 + 1e-12):
        raise EnsembleError("Burgers data must lie in [0, 1]")
    h = rho0.grid_step

    def rhs(f: np.ndarray) -> np.ndarray:
        flux = f * (1.0 - f)
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h) + alpha * (flux[2:] - flux[:-2]) / (2 * h)
        return out

    return _explicit_run(rho0, rhs, t_end, dt, store_times, CFL * h * h)


def solve_psi_u(
    psi0: Profile, t_end: float, alpha: float = ALPHA, dt: float | None = None, store_times=None
) -> TimeProfiles:
    """U height flow d_t psi = (m(psi'))' + alpha m(psi'), m(s) = s/(1-s).

    Face slopes feed the flux; the zeroth-order term uses the face average.
    Endpoints are pinned (envelope boundary data).  Since psi' <= 0 the
    effective diffusivity 1/(1-psi')^2 is at most 1.
    """
    if np.any(np.diff(psi0.values) > 1e-9):
        raise EnsembleError("U height data must be non-increasing")
    h = psi0.grid_step

    def rhs(f: np.ndarray) -> np.ndarray:
        s = np.diff(f) / h
        m = s / (1.0 - s)
        out = np.zeros_like(f)
        out[1:-1] = (m[1:] - m[:-1]) / h + alpha * 0.5 * (m[1:] + m[:-1])
        return out

    return _explicit_run(psi0, rhs, t_end, dt, store_times, CFL * h * h)


def solve_rho_u(
    rho0: Profile, t_end: float, alpha: float = ALPHA, dt: float | None = None, store_times=None
) -> TimeProfiles:
    """U density flow d_t rho = (m(rho))'' + alpha (m(rho))', m(r) = r/(1+r).

    Explicit update through the substituted variable m in (0, 1); endpoints
    pinned.  dm/drho = 1/(1+rho)^2 <= 1 bounds the diffusivity by 1.
    """
    if np.any(rho0.values < 0):
        raise EnsembleError("U densities must be nonnegative")
    h = rho0.grid_step

    def rhs(f: np.ndarray) -> np.ndarray:
        m = f / (1.0 + f)
        out = np.zeros_like(f)
        out[1:-1] = (m[2:] - 2 * m[1:-1] + m[:-2]) / (h * h) + alpha * (m[2:] - m[:-2]) / (2 * h)
        return out

    return _explicit_run(rho0, rhs, t_end, dt, store_times, CFL * h * h)


def solve_omega(
    omega0: Profile,
    t_end: float,
    beta: float = BETA,
    dt: float | None = None,
    theta: float = 0.5,
    store_times=None,
) -> TimeProfiles:
    """Hopf-Cole flow d_t omega = omega'' + beta omega' on [0, U].

    Robin condition 2 omega'(0) + beta omega(0) = 0 via a second-order ghost
    point; Dirichlet at the far end (value kept from the initial data).
    """
    if np.any(omega0.values <= 0):
        raise EnsembleError("omega must be positive")
    return solve_linear(
        omega0,
        1.0,
        beta,
        0.0,
        t_end,
        left=BoundarySpec(BcKind.ROBIN, value=0.0, a0=beta, a1=2.0),
        right=BoundarySpec(BcKind.DIRICHLET, value=float(omega0.values[-1])),
        dt=dt,
        theta=theta,
        store_times=store_times,
    )


def solve_psi_ru(
    psi0: Profile,
    t_end: float,
    beta: float = BETA,
    dt: float | None = None,
    store_times=None,
    route: str = "direct",
) -> TimeProfiles:
    """RU height flow d_t psi = psi'' + beta psi'(1 + psi') on [0, U].

    ``route='direct'`` integrates explicitly with the boundary slope
    psi'(0) = -1/2 enforced through a ghost point.  ``route='via_omega'``
    transports omega = exp(beta psi) with the linear Robin solver and maps
    back; the two routes agree up to discretization error.
    """
    slopes = np.diff(psi0.values) / psi0.grid_step
    if np.any(slopes > 1e-9) or np.any(slopes < -1.0 - 1e-9):
        raise EnsembleError("RU height data must have slopes in [-1, 0]")
    if route == "via_omega":
        omega0 = Profile(psi0.grid_start, psi0.grid_step, np.exp(beta * psi0.values), psi0.domain)
        flow = solve_omega(omega0, t_end, beta=beta, dt=dt, store_times=store_times)
        return TimeProfiles(
            flow.grid_start, flow.grid_step, psi0.domain, flow.times, np.log(flow.frames) / beta
        )
    if route != "direct":
        raise EnsembleError(f"unknown route {route!r}")

    h = psi0.grid_step

    def rhs(f: np.ndarray) -> np.ndarray:
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
        slope = (f[2:] - f[:-2]) / (2 * h)
        out[1:-1] += beta * slope * (1.0 + slope)
        # ghost with f'(0) = -1/2: f_{-1} = f_1 + h
        out[0] = (2 * f[1] - 2 * f[0] + h) / (h * h) + beta * (-0.5) * (1.0 - 0.5)
        return out

    return _explicit_run(psi0, rhs, t_end, dt, store_times, CFL * h * h)


# ----------------------------------------------------------------------------
# Stationary fixtures
# ----------------------------------------------------------------------------


def rho_u_infinity(u, alpha: float = ALPHA) -> np.ndarray:
    """Stationary U density 1/(e^(alpha u) - 1)."""
    u = np.asarray(u, dtype=np.float64)
    return 1.0 / np.expm1(alpha * u)


def rho_infinity_line(v, c: float = 1.0, alpha: float = ALPHA) -> np.ndarray:
    """Stationary whole-line density C/(e^(alpha v) + C); C shifts the front."""
    if c <= 0:
        raise EnsembleError("the front constant must be positive")
    v = np.asarray(v, dtype=np.float64)
    return c / (np.exp(alpha * v) + c)


def omega_infinity(u, beta: float = BETA) -> np.ndarray:
    """Stationary Hopf-Cole profile 1 + e^(-beta u)."""
    u = np.asarray(u, dtype=np.float64)
    return 1.0 + np.exp(-beta * u)


_STATIONARY = {
    "rho_u": lambda u: rho_u_infinity(u),
    "rho_line": lambda u: rho_infinity_line(u),
    "omega": lambda u: omega_infinity(u),
    "psi_u": lambda u: vershik_curve(Stat.U, u)[0],
    "psi_ru": lambda u: vershik_curve(Stat.RU, u)[0],
}

_STATIONARY_DOMAINS = {
    "rho_u": Domain.HALF_LINE_OPEN,
    "rho_line": Domain.WHOLE_LINE,
    "omega": Domain.HALF_LINE_CLOSED,
    "psi_u": Domain.HALF_LINE_OPEN,
    "psi_ru": Domain.HALF_LINE_CLOSED,
}


def stationary_profile(name: str, grid) -> Profile:
    """Closed-form stationary solution sampled on ``grid``."""
    if name not in _STATIONARY:
        raise EnsembleError(f"unknown stationary profile {name!r}; options: {sorted(_STATIONARY)}")
    grid = np.asarray(grid, dtype=np.float64)
    return Profile.from_grid(grid, _STATIONARY[name](grid), _STATIONARY_DOMAINS[name])


# default truncated domains for the stationarity checks; singular ends are
# cut where the closed forms blow up (u = 0 for the U-type profiles)
_RESIDUAL_DOMAINS = {
    "rho_line": (-10.0, 10.0),
    "omega": (0.0, 10.0),
    "psi_u": (0.1, 9.0),
    "psi_ru": (0.0, 10.0),
    "rho_u": (0.1, 8.0),
}

_RESIDUAL_SOLVERS = {
    "rho_line": solve_burgers,
    "omega": solve_omega,
    "psi_u": solve_psi_u,
    "psi_ru": solve_psi_ru,
    "rho_u": solve_rho_u,
}


def residual_grid(name: str, du: float) -> np.ndarray:
    lo, hi = _RESIDUAL_DOMAINS[name]
    n = int(round((hi - lo) / du)) + 1
    return lo + du * np.arange(n)


def stationarity_drift(name: str, du: float, t_end: float = 1.0, dt: float | None = None) -> float:
    """Sup-norm drift of a closed-form stationary profile under its own PDE.

    Runs the matching solver from the exact stationary initial data over
    [0, t_end] and returns max_t sup_u |f(t) - f(0)|; this is the integrated
    scheme residual and shrinks as O(du^2) for all five cases.
    """
    if name not in _RESIDUAL_SOLVERS:
        raise EnsembleError(f"unknown stationarity case {name!r}; options: {sorted(_RESIDUAL_SOLVERS)}")
    p0 = stationary_profile(name, residual_grid(name, du))
    stops = [0.0, 0.25 * t_end, 0.5 * t_end, t_end] if t_end > 0 else None
    flow = _RESIDUAL_SOLVERS[name](p0, t_end, dt=dt, store_times=stops)
    return float(np.max(np.abs(flow.frames - p0.values)))
