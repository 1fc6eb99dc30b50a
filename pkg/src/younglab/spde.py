"""Stochastic PDE solvers for the Gaussian fluctuation fields.

All equations are driven by space-time white noise (one standard normal per
space-time cell, density 1/sqrt(dt du)) and integrated with a semi-implicit
Euler-Maruyama scheme: diffusion and reaction terms implicit, first-order
drift and noise explicit.  The linear systems solved are:

* RU half line, Neumann slope 0 at the origin:
    d_t Psi = Psi'' + beta (1 - 2 rho_R) Psi' + sqrt(2 rho_R (1 - rho_R)) W.
* U half line (natural boundary, zero-flux closure at the truncation point):
    d_t Psi = (a Psi')' + alpha a Psi' + sqrt(2 rho_U / (1 + rho_U)) W,
    a = 1 / (1 + rho_U)^2.
* whole line:
    d_t Psi = Psi'' + alpha (1 - 2 rho) Psi' + sqrt(2 rho (1 - rho)) W,
  whose sqrt(2)-rotated view is Psi_rot(t, v) = sqrt(2) Psi(t, sqrt(2) v).
* symmetrized Hopf-Cole field on the line:
    d_t Phi = Phi'' - (beta^2/4) Phi + e^(beta |u|/2) beta omega(t, |u|)
              sqrt(2 rho_R (1-rho_R))(|u|) W_mirror,
  where W_mirror uses one half-line noise copied to u and -u (covariance
  operator Q psi(u) = psi(u) + psi(-u)); Psi_R is recovered through
  Phi(t, u) = e^(-beta u / 2) Phi_bar(t, u) and Psi_R = Phi / (beta omega).

For each discretized system the stationary covariance solves the Lyapunov
equation A X + X A^T + Sigma = 0, which is used as an oracle in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded, solve_continuous_lyapunov, solve_discrete_lyapunov

from .ensembles import ALPHA, BETA, EnsembleError
from .pde import TimeProfiles, _plan_steps, _store_schedule
from .transforms import Domain, Profile, cumulative_hole_integral


def neumann_heat_kernel(t: float, u, v) -> np.ndarray:
    """Half-line heat kernel with reflecting boundary at 0.

    p(t, u, v) = (4 pi t)^(-1/2) [exp(-(u-v)^2/4t) + exp(-(u+v)^2/4t)].
    """
    if t <= 0:
        raise EnsembleError("the kernel requires t > 0")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any(u < 0) or np.any(v < 0):
        raise EnsembleError("the kernel lives on the half line")
    pref = 1.0 / math.sqrt(4.0 * math.pi * t)
    return pref * (np.exp(-((u - v) ** 2) / (4 * t)) + np.exp(-((u + v) ** 2) / (4 * t)))


@dataclass(frozen=True)
class NoiseField:
    """Explicit space-time noise: standard normals per (step, path, cell).

    The solver scales entries by 1/sqrt(dt du), so a NoiseField is
    discretization-agnostic white noise.  Supplying the same field to two
    solvers realizes common-random-number comparisons.
    """

    values: np.ndarray  # (n_steps, n_paths, n_cells)

    def slab(self, step: int) -> np.ndarray:
        return self.values[step]


@dataclass
class SpdeSystem:
    """Discretized linear SPDE: implicit bands, explicit drift, noise amplitude."""

    grid_start: float
    grid_step: float
    domain: Domain
    diff_lower: np.ndarray
    diff_diag: np.ndarray
    diff_upper: np.ndarray
    drift: np.ndarray | Callable[[float], np.ndarray]
    sigma: np.ndarray | Callable[[float], np.ndarray]
    mask: np.ndarray  # Dirichlet-pinned rows
    mirror_noise: bool = False
    noise_weight: np.ndarray | None = None  # per-cell amplitude multiplier

    @property
    def n(self) -> int:
        return self.diff_diag.size

    @property
    def cell_weight(self) -> np.ndarray:
        return np.ones(self.n) if self.noise_weight is None else self.noise_weight

    @property
    def u(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.n)

    def drift_at(self, t: float) -> np.ndarray:
        return self.drift(t) if callable(self.drift) else self.drift

    def sigma_at(self, t: float) -> np.ndarray:
        return self.sigma(t) if callable(self.sigma) else self.sigma

    def dense_drift_matrix(self, t: float = 0.0) -> np.ndarray:
        """Dense generator A = diffusion + first-order drift (Dirichlet rows zero)."""
        n = self.n
        mat = np.zeros((n, n))
        idx = np.arange(n)
        mat[idx, idx] = self.diff_diag
        mat[idx[:-1], idx[:-1] + 1] = self.diff_upper[:-1]
        mat[idx[1:], idx[1:] - 1] = self.diff_lower[1:]
        b = self.drift_at(t)
        h2 = 2.0 * self.grid_step
        mat[idx[1:-1], idx[1:-1] + 1] += b[1:-1] / h2
        mat[idx[1:-1], idx[1:-1] - 1] -= b[1:-1] / h2
        mat[self.mask, :] = 0.0
        return mat


@dataclass
class SpdePaths:
    """Monte Carlo SPDE output: paths indexed (path, stored time, grid point)."""

    grid_start: float
    grid_step: float
    domain: Domain
    times: np.ndarray
    paths: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.paths.shape[2])

    @property
    def final_values(self) -> np.ndarray:
        return self.paths[:, -1, :]

    def profile(self, path: int, time_index: int = -1) -> Profile:
        return Profile(self.grid_start, self.grid_step, self.paths[path, time_index], self.domain)


def _mirror(z_half: np.ndarray) -> np.ndarray:
    """Even reflection of half-line cells [0..K] onto a symmetric grid."""
    return np.concatenate([z_half[:, :0:-1], z_half], axis=1)


def integrate_spde(
    system: SpdeSystem,
    t_end: float,
    dt: float,
    n_paths: int = 1,
    psi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    noise: NoiseField | None = None,
    store_times=None,
    noise_scale: float = 1.0,
) -> SpdePaths:
    """Semi-implicit Euler-Maruyama integration of a discretized SPDE.

    ``noise`` overrides the internal generator; its cell count must be the
    full grid, or the half grid when the system mirrors noise evenly.
    """
    n = system.n
    h = system.grid_step
    n_steps, dt = _plan_steps(t_end, dt)
    schedule = _store_schedule(store_times, t_end, dt if n_steps else 1.0, n_steps)

    f = np.zeros((n_paths, n)) if psi0 is None else np.array(psi0, dtype=np.float64, copy=True)
    if f.ndim == 1:
        f = np.broadcast_to(f, (n_paths, n)).copy()
    f[:, system.mask] = 0.0

    n_half = (n + 1) // 2
    n_cells = n_half if system.mirror_noise else n
    if noise is not None:
        shape = noise.values.shape
        if shape[0] < n_steps or shape[1] != n_paths or shape[2] != n_cells:
            raise EnsembleError(
                f"noise shape {shape} incompatible with {n_steps} steps, "
                f"{n_paths} paths, {n_cells} cells"
            )
    elif rng is None:
        rng = np.random.default_rng(0)

    ab = np.zeros((3, n))
    ab[0, 1:] = -dt * system.diff_upper[:-1]
    ab[1, :] = 1.0 - dt * system.diff_diag
    ab[2, :-1] = -dt * system.diff_lower[1:]
    ab[1, system.mask] = 1.0
    ab[0, 1:][system.mask[:-1]] = 0.0
    ab[2, :-1][system.mask[1:]] = 0.0

    amp_scale = noise_scale * math.sqrt(dt / h) * system.cell_weight
    static = not callable(system.drift) and not callable(system.sigma)
    bvec = system.drift_at(0.0)
    sig = system.sigma_at(0.0)

    times: list[float] = []
    frames: list[np.ndarray] = []
    if 0 in schedule:
        times.append(schedule[0])
        frames.append(f.copy())
    t = 0.0
    for step in range(1, n_steps + 1):
        if not static:
            bvec = system.drift_at(t)
            sig = system.sigma_at(t)
        xi = noise.slab(step - 1) if noise is not None else rng.standard_normal((n_paths, n_cells))
        z = _mirror(xi) if system.mirror_noise else xi
        g = f.copy()
        g[:, 1:-1] += dt * bvec[1:-1] * (f[:, 2:] - f[:, :-2]) / (2.0 * h)
        g += (amp_scale * sig) * z
        g[:, system.mask] = 0.0
        f = solve_banded((1, 1), ab, g.T, overwrite_b=True).T
        f[:, system.mask] = 0.0
        t += dt
        if step in schedule:
            times.append(schedule[step])
            frames.append(f.copy())
    paths = np.transpose(np.asarray(frames), (1, 0, 2)) if frames else np.zeros((n_paths, 0, n))
    return SpdePaths(system.grid_start, h, system.domain, np.asarray(times), paths)


def _laplacian_bands(n: int, h: float, left_neumann: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lower = np.full(n, 1.0 / h**2)
    diag = np.full(n, -2.0 / h**2)
    upper = np.full(n, 1.0 / h**2)
    if left_neumann:
        upper[0] = 2.0 / h**2  # ghost f_{-1} = f_1 (slope 0)
    return lower, diag, upper


def _as_values(rho, u: np.ndarray, what: str) -> np.ndarray | Callable[[float], np.ndarray]:
    """Static vector from a callable/Profile/array, or a time interpolant from TimeProfiles."""
    if isinstance(rho, TimeProfiles):
        if abs(rho.grid_start - u[0]) > 1e-9 or abs(rho.grid_step - (u[1] - u[0])) > 1e-9:
            raise EnsembleError(f"{what} grid must match the SPDE grid")
        return lambda t: rho.values_at(t)
    if isinstance(rho, Profile):
        return rho.interp(u)
    if callable(rho):
        return np.asarray(rho(u), dtype=np.float64)
    vals = np.asarray(rho, dtype=np.float64)
    if vals.shape != u.shape:
        raise EnsembleError(f"{what} values must match the grid size")
    return vals


def _compose(values, fn) -> np.ndarray | Callable[[float], np.ndarray]:
    if callable(values):
        return lambda t: fn(values(t))
    return fn(values)


def ru_system(rho_r, beta: float = BETA, u_min: float = 0.0, u_max: float = 8.0, du: float = 0.1) -> SpdeSystem:
    """Half-line RU fluctuation SPDE: Neumann at u_min, Dirichlet 0 at u_max."""
    n = int(round((u_max - u_min) / du)) + 1
    u = u_min + du * np.arange(n)
    lower, diag, upper = _laplacian_bands(n, du, left_neumann=True)
    mask = np.zeros(n, dtype=bool)
    mask[-1] = True
    rho = _as_values(rho_r, u, "rho_R")
    weight = np.ones(n)
    weight[0] = math.sqrt(2.0)  # boundary cell [0, du/2] is half width
    return SpdeSystem(
        grid_start=u_min,
        grid_step=du,
        domain=Domain.HALF_LINE_CLOSED,
        diff_lower=lower,
        diff_diag=diag,
        diff_upper=upper,
        drift=_compose(rho, lambda r: beta * (1.0 - 2.0 * r)),
        sigma=_compose(rho, lambda r: np.sqrt(np.clip(2.0 * r * (1.0 - r), 0.0, None))),
        mask=mask,
        noise_weight=weight,
    )


def u_system(rho_u, alpha: float = ALPHA, u_min: float = 0.05, u_max: float = 8.0, du: float = 0.05) -> SpdeSystem:
    """Truncated U fluctuation SPDE in flux form with a zero-flux left closure.

    The diffusion coefficient a = 1/(1+rho_U)^2 degenerates at the origin,
    which is the discrete footprint of the natural (inaccessible) boundary;
    no boundary data is imposed there beyond closing the flux.
    """
    if u_min <= 0:
        raise EnsembleError("the U system needs a positive truncation point")
    n = int(round((u_max - u_min) / du)) + 1
    u = u_min + du * np.arange(n)
    rho = _as_values(rho_u, u, "rho_U")
    if callable(rho):
        raise EnsembleError("time-dependent coefficients are not supported in flux form")
    a = 1.0 / (1.0 + rho) ** 2
    a_face = 0.5 * (a[1:] + a[:-1])  # faces j+1/2
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = a_face / du**2
    upper[:-1] = a_face / du**2
    diag[1:-1] = -(a_face[1:] + a_face[:-1]) / du**2
    diag[0] = -a_face[0] / du**2  # zero flux through the left face
    diag[-1] = -(a_face[-1]) / du**2
    mask = np.zeros(n, dtype=bool)
    mask[-1] = True
    return SpdeSystem(
        grid_start=u_min,
        grid_step=du,
        domain=Domain.HALF_LINE_OPEN,
        diff_lower=lower,
        diff_diag=diag,
        diff_upper=upper,
        drift=alpha * a,
        sigma=np.sqrt(2.0 * rho / (1.0 + rho)),
        mask=mask,
    )


def line_system(rho, alpha: float = ALPHA, v_min: float = -8.0, v_max: float = 8.0, du: float = 0.1) -> SpdeSystem:
    """Whole-line fluctuation SPDE with Dirichlet 0 at both truncation ends."""
    n = int(round((v_max - v_min) / du)) + 1
    v = v_min + du * np.arange(n)
    lower, diag, upper = _laplacian_bands(n, du, left_neumann=False)
    mask = np.zeros(n, dtype=bool)
    mask[0] = mask[-1] = True
    vals = _as_values(rho, v, "rho")
    return SpdeSystem(
        grid_start=v_min,
        grid_step=du,
        domain=Domain.WHOLE_LINE,
        diff_lower=lower,
        diff_diag=diag,
        diff_upper=upper,
        drift=_compose(vals, lambda r: alpha * (1.0 - 2.0 * r)),
        sigma=_compose(vals, lambda r: np.sqrt(np.clip(2.0 * r * (1.0 - r), 0.0, None))),
        mask=mask,
    )


def phi_bar_system(
    omega, rho_r, beta: float = BETA, v_max: float = 8.0, du: float = 0.1
) -> SpdeSystem:
    """Symmetrized Hopf-Cole SPDE on [-v_max, v_max] with mirrored noise.

    ``omega`` and ``rho_r`` are half-line data evaluated at |u|; the noise
    uses one standard normal per half-line cell, copied evenly to +-u, so its
    spatial covariance operator is Q psi(u) = psi(u) + psi(-u).
    """
    k = int(round(v_max / du))
    n = 2 * k + 1
    v = -v_max + du * np.arange(n)
    au = np.abs(v)
    lower, diag, upper = _laplacian_bands(n, du, left_neumann=False)
    diag = diag - beta**2 / 4.0
    mask = np.zeros(n, dtype=bool)
    mask[0] = mask[-1] = True

    def sig_from(om_vals: np.ndarray, rho_vals: np.ndarray) -> np.ndarray:
        return (
            np.exp(beta * au / 2.0)
            * beta
            * om_vals
            * np.sqrt(np.clip(2.0 * rho_vals * (1.0 - rho_vals), 0.0, None))
        )

    if isinstance(omega, TimeProfiles) or isinstance(rho_r, TimeProfiles):
        om_f = (lambda t: np.interp(au, omega.u, omega.values_at(t))) if isinstance(
            omega, TimeProfiles
        ) else (lambda t: _half_values(omega, au))
        rho_f = (lambda t: np.interp(au, rho_r.u, rho_r.values_at(t))) if isinstance(
            rho_r, TimeProfiles
        ) else (lambda t: _half_values(rho_r, au))
        sigma = lambda t: sig_from(om_f(t), rho_f(t))
    else:
        sigma = sig_from(_half_values(omega, au), _half_values(rho_r, au))

    weight = np.ones(n)
    weight[k] = math.sqrt(2.0)  # delta(u-v) and delta(u+v) lines both cross the center cell
    return SpdeSystem(
        grid_start=-v_max,
        grid_step=du,
        domain=Domain.WHOLE_LINE,
        diff_lower=lower,
        diff_diag=diag,
        diff_upper=upper,
        drift=np.zeros(n),
        sigma=sigma,
        mask=mask,
        mirror_noise=True,
        noise_weight=weight,
    )


def _half_values(data, au: np.ndarray) -> np.ndarray:
    if isinstance(data, Profile):
        return data.interp(au)
    if callable(data):
        return np.asarray(data(au), dtype=np.float64)
    raise EnsembleError("half-line coefficients must be Profiles or callables")


def solve_spde_ru(
    rho_r,
    t_end: float,
    dt: float | None = None,
    n_paths: int = 1,
    beta: float = BETA,
    u_max: float = 8.0,
    du: float = 0.1,
    psi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    noise: NoiseField | None = None,
    store_times=None,
    noise_scale: float = 1.0,
) -> SpdePaths:
    """Integrate the RU fluctuation SPDE; see ``ru_system`` for the layout."""
    system = ru_system(rho_r, beta=beta, u_max=u_max, du=du)
    if dt is None:
        dt = 0.05 * du * du
    return integrate_spde(system, t_end, dt, n_paths, psi0, rng, noise, store_times, noise_scale)


def solve_spde_u(
    rho_u,
    t_end: float,
    dt: float | None = None,
    n_paths: int = 1,
    alpha: float = ALPHA,
    u_min: float = 0.05,
    u_max: float = 8.0,
    du: float = 0.05,
    psi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    noise: NoiseField | None = None,
    store_times=None,
    noise_scale: float = 1.0,
) -> SpdePaths:
    """Integrate the truncated U fluctuation SPDE (flux form, natural boundary)."""
    system = u_system(rho_u, alpha=alpha, u_min=u_min, u_max=u_max, du=du)
    if dt is None:
        dt = 0.05 * du * du
    return integrate_spde(system, t_end, dt, n_paths, psi0, rng, noise, store_times, noise_scale)


def solve_spde_line(
    rho,
    t_end: float,
    dt: float | None = None,
    n_paths: int = 1,
    alpha: float = ALPHA,
    v_max: float = 8.0,
    du: float = 0.1,
    psi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    noise: NoiseField | None = None,
    store_times=None,
    noise_scale: float = 1.0,
) -> SpdePaths:
    """Integrate the whole-line fluctuation SPDE."""
    system = line_system(rho, alpha=alpha, v_min=-v_max, v_max=v_max, du=du)
    if dt is None:
        dt = 0.05 * du * du
    return integrate_spde(system, t_end, dt, n_paths, psi0, rng, noise, store_times, noise_scale)


def solve_spde_phi_bar(
    omega,
    rho_r,
    t_end: float,
    dt: float | None = None,
    n_paths: int = 1,
    beta: float = BETA,
    v_max: float = 8.0,
    du: float = 0.1,
    phi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    noise: NoiseField | None = None,
    store_times=None,
    noise_scale: float = 1.0,
) -> SpdePaths:
    """Integrate the symmetrized Hopf-Cole SPDE with evenly mirrored noise."""
    system = phi_bar_system(omega, rho_r, beta=beta, v_max=v_max, du=du)
    if dt is None:
        dt = 0.05 * du * du
    return integrate_spde(system, t_end, dt, n_paths, phi0, rng, noise, store_times, noise_scale)


def rotate_line_field(field: Profile) -> Profile:
    """sqrt(2)-rotation of a whole-line field: v -> sqrt(2) value(sqrt(2) v)."""
    s = math.sqrt(2.0)
    return Profile(field.grid_start / s, field.grid_step / s, s * field.values, field.domain)


def recover_psi_r(phi_bar: SpdePaths, omega, beta: float = BETA) -> SpdePaths:
    """Map Phi_bar paths back to Psi_R on the half line u >= 0.

    Phi = e^(-beta u/2) Phi_bar and Psi_R = Phi / (beta omega(t, u)).
    """
    n = phi_bar.paths.shape[2]
    center = (n - 1) // 2
    u = phi_bar.grid_step * np.arange(n - center)
    decay = np.exp(-beta * u / 2.0)
    out = np.empty((phi_bar.paths.shape[0], phi_bar.times.size, u.size))
    for k, t in enumerate(phi_bar.times):
        om = np.interp(u, omega.u, omega.values_at(t)) if isinstance(omega, TimeProfiles) else _half_values(omega, u)
        out[:, k, :] = phi_bar.paths[:, k, center:] * decay / (beta * om)
    return SpdePaths(0.0, phi_bar.grid_step, Domain.HALF_LINE_CLOSED, phi_bar.times, out)


def transform_line_to_u(psi_bar: Profile, rho_line: Profile, u_grid: np.ndarray | None = None) -> Profile:
    """Map a whole-line fluctuation profile to U coordinates.

    With zeta(v) = integral_{-inf}^v (1 - rho) and v(u) its inverse,
    Psi_U(u) = Psi_bar(v(u)) / (1 - rho(v(u))).
    """
    zeta = cumulative_hole_integral(rho_line)
    v = rho_line.u
    if u_grid is None:
        u_grid = np.linspace(max(zeta[0], 1e-6), zeta[-1], v.size)
    u_grid = np.asarray(u_grid, dtype=np.float64)
    if np.any(u_grid < zeta[0] - 1e-9) or np.any(u_grid > zeta[-1] + 1e-9):
        raise EnsembleError("u grid must lie inside the image of zeta")
    v_at = np.interp(u_grid, zeta, v)
    den = 1.0 - rho_line.interp(v_at)
    if np.any(den <= 1e-12):
        raise EnsembleError("the density reaches 1 inside the requested window")
    vals = psi_bar.interp(v_at) / den
    return Profile.from_grid(u_grid, vals, Domain.HALF_LINE_OPEN)


def equilibrium_zeta_inverse(u, alpha: float = ALPHA) -> np.ndarray:
    """Closed-form inverse of zeta for the equilibrium line density:
    v(u) = (1/alpha) log(e^(alpha u) - 1)."""
    u = np.asarray(u, dtype=np.float64)
    return np.log(np.expm1(alpha * u)) / alpha


def equilibrium_zeta(v, alpha: float = ALPHA) -> np.ndarray:
    """Closed-form zeta(v) = (1/alpha) log(1 + e^(alpha v)) at equilibrium."""
    v = np.asarray(v, dtype=np.float64)
    return np.logaddexp(0.0, alpha * v) / alpha


def stationary_covariance(system: SpdeSystem, t: float = 0.0) -> np.ndarray:
    """Lyapunov oracle: solve A X + X A^T + Sigma = 0 for the discrete system.

    Sigma = diag((weight * sigma)^2 / du) on free rows, plus the reflected
    cross terms when the noise is mirrored.  Dirichlet rows are removed
    before solving and re-inserted as zeros.
    """
    a = system.dense_drift_matrix(t)
    ws = system.cell_weight * system.sigma_at(t)
    q = np.zeros_like(a)
    np.fill_diagonal(q, ws**2 / system.grid_step)
    if system.mirror_noise:
        n = system.n
        center = (n - 1) // 2
        idx = np.arange(n)
        mirrored = 2 * center - idx
        off = idx != mirrored
        q[idx[off], mirrored[off]] += ws[off] * ws[mirrored[off]] / system.grid_step
    q[system.mask, :] = 0.0
    q[:, system.mask] = 0.0
    free = ~system.mask
    a_sub = a[np.ix_(free, free)]
    q_sub = q[np.ix_(free, free)]
    x_sub = solve_continuous_lyapunov(a_sub, -q_sub)
    x = np.zeros_like(a)
    x[np.ix_(free, free)] = x_sub
    return x


def _noise_covariance(system: SpdeSystem, t: float = 0.0) -> np.ndarray:
    """Per-unit-time covariance of the discrete noise vector (Sigma above)."""
    ws = system.cell_weight * system.sigma_at(t)
    q = np.zeros((system.n, system.n))
    np.fill_diagonal(q, ws**2 / system.grid_step)
    if system.mirror_noise:
        center = (system.n - 1) // 2
        idx = np.arange(system.n)
        mirrored = 2 * center - idx
        off = idx != mirrored
        q[idx[off], mirrored[off]] += ws[off] * ws[mirrored[off]] / system.grid_step
    q[system.mask, :] = 0.0
    q[:, system.mask] = 0.0
    return q


def scheme_covariance(system: SpdeSystem, dt: float, t: float = 0.0) -> np.ndarray:
    """Exact stationary covariance of the semi-implicit update at step ``dt``.

    The one-step map is f -> S (f + dt B f + noise) with S = (I - dt D)^{-1},
    D the implicit bands and B the explicit drift, so the invariant covariance
    solves the discrete-time Lyapunov equation V = M V M^T + S N S^T with
    M = S (I + dt B) and N = dt Sigma.  Comparing Monte Carlo variances to
    this target removes the time-step bias from the comparison.
    """
    n = system.n
    idx = np.arange(n)
    d = np.zeros((n, n))
    d[idx, idx] = system.diff_diag
    d[idx[:-1], idx[:-1] + 1] = system.diff_upper[:-1]
    d[idx[1:], idx[1:] - 1] = system.diff_lower[1:]
    d[system.mask, :] = 0.0
    b = np.zeros((n, n))
    bvec = system.drift_at(t)
    h2 = 2.0 * system.grid_step
    b[idx[1:-1], idx[1:-1] + 1] = bvec[1:-1] / h2
    b[idx[1:-1], idx[1:-1] - 1] = -bvec[1:-1] / h2
    b[system.mask, :] = 0.0
    s = np.linalg.inv(np.eye(n) - dt * d)
    m = s @ (np.eye(n) + dt * b)
    nmat = s @ (dt * _noise_covariance(system, t)) @ s.T
    free = ~system.mask
    m_sub = m[np.ix_(free, free)]
    n_sub = nmat[np.ix_(free, free)]
    v_sub = solve_discrete_lyapunov(m_sub, n_sub, method="bilinear")
    v = np.zeros((n, n))
    v[np.ix_(free, free)] = v_sub
    return v


@dataclass(frozen=True)
class NaturalBoundaryReport:
    """Scale-function probe of the boundary behaviour near u = 0."""

    u_points: np.ndarray
    scale_magnitude: np.ndarray
    decade_ratios: np.ndarray
    diverges: bool


def boundary_sigma(rho_u: Callable, x) -> np.ndarray:
    """Diffusion coefficient sigma(x) = 1/(1 + rho_U(x)) of the tracer motion."""
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / (1.0 + np.asarray(rho_u(x), dtype=np.float64))


def boundary_drift(rho_u: Callable, x, alpha: float = ALPHA) -> np.ndarray:
    """Drift b(x) = alpha/(1+rho)^2 - 2 rho'/(1+rho)^3 (rho' by central difference)."""
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(rho_u(x), dtype=np.float64)
    hh = 1e-6 * np.maximum(x, 1e-6)
    dr = (np.asarray(rho_u(x + hh)) - np.asarray(rho_u(x - hh))) / (2 * hh)
    return alpha / (1.0 + r) ** 2 - 2.0 * dr / (1.0 + r) ** 3


def natural_boundary_check(
    rho_u: Callable,
    alpha: float = ALPHA,
    u_points=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
    x0: float = 1.0,
    quad_points: int = 4001,
) -> NaturalBoundaryReport:
    """Test the scale function of dX = b dt + sigma dB for divergence at 0+.

    The scale density is s'(y) = exp(-2 alpha (y - x0)) ((1+rho(y))/(1+rho(x0)))^4
    (the drift integral is explicit).  The scale function S(u) = -int_u^{x0} s'
    diverges to -infinity iff 0 is inaccessible; the report records |S| at the
    probe points and flags divergence when every decade grows by >= 2x.
    """
    pts = np.asarray(sorted(u_points, reverse=True), dtype=np.float64)
    if np.any(pts >= x0) or np.any(pts <= 0):
        raise EnsembleError("probe points must lie in (0, x0)")
    denom = 1.0 + float(np.asarray(rho_u(np.asarray([x0]))).ravel()[0])
    mags = np.empty(pts.size)
    for i, u in enumerate(pts):
        s = np.linspace(math.log(u), math.log(x0), quad_points)
        y = np.exp(s)
        r = np.asarray(rho_u(y), dtype=np.float64)
        sp = np.exp(-2.0 * alpha * (y - x0)) * ((1.0 + r) / denom) ** 4
        mags[i] = float(np.trapezoid(sp * y, s))
    ratios = mags[1:] / mags[:-1]
    return NaturalBoundaryReport(pts, mags, ratios, bool(np.all(ratios >= 2.0)))
