"""Height profiles and the coordinate changes between diagram pictures.

The central objects are:

* ``height_function``: the column-counting height
  ``psi_p(u) = #{i : p_i > u}`` and its 1/N scaling;
* ``rotated_height``: the 45-degree rotated boundary curve, exactly equal to
  ``(p_i + i)/sqrt(2)`` at the rotated particle sites ``(p_i - i)/sqrt(2)``
  and within sqrt(2) of the simple particle-counting formula everywhere;
* ``hopf_cole_field``: the exponential (Hopf-Cole) transform of the RU
  exclusion configuration, interpolated so that its logarithm recovers the
  scaled height exactly on the lattice;
* ``phi_u`` / ``phi_u_inverse``: the slope substitution mapping a U height
  profile ``psi`` to a whole-line density ``rho`` via
  ``rho(v) = -psi'(G^{-1}(v)) / (1 - psi'(G^{-1}(v)))``, ``G(u) = u - psi(u)``,
  and its inverse built from the cumulative integrals of ``rho``.

Profiles live on uniform grids and serialize to CSV with a JSON sidecar.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .dynamics import OccupancyKind, OccupancyWindow
from .ensembles import ALPHA, EnsembleError, YoungDiagram

SQRT2 = math.sqrt(2.0)


class Domain(Enum):
    HALF_LINE_OPEN = "half_line_open"  # (0, inf), U-type curves
    HALF_LINE_CLOSED = "half_line_closed"  # [0, inf), RU-type curves
    WHOLE_LINE = "whole_line"


@dataclass(frozen=True)
class Profile:
    """Function values on the uniform grid start + step * arange(n)."""

    grid_start: float
    grid_step: float
    values: np.ndarray
    domain: Domain = Domain.WHOLE_LINE

    def __post_init__(self):
        if self.grid_step <= 0:
            raise EnsembleError("grid step must be positive")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @property
    def u(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.values.size)

    @staticmethod
    def from_grid(u: np.ndarray, values: np.ndarray, domain: Domain = Domain.WHOLE_LINE) -> "Profile":
        u = np.asarray(u, dtype=np.float64)
        if u.size < 2:
            raise EnsembleError("profiles need at least two grid points")
        steps = np.diff(u)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise EnsembleError("profile grids must be uniform")
        return Profile(float(u[0]), float(steps[0]), np.asarray(values, float), domain)

    def interp(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=np.float64), self.u, self.values)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w") as fh:
            fh.write("u,value\n")
            for ui, vi in zip(self.u, self.values):
                fh.write(f"{ui:.17g},{vi:.17g}\n")
        sidecar = {
            "grid_start": self.grid_start,
            "grid_step": self.grid_step,
            "n_points": int(self.values.size),
            "domain": self.domain.value,
        }
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=1))

    @staticmethod
    def from_csv(path) -> "Profile":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        meta = json.loads(Path(str(path) + ".json").read_text())
        prof = Profile(
            float(meta["grid_start"]),
            float(meta["grid_step"]),
            data[:, 1],
            Domain(meta["domain"]),
        )
        if prof.values.size != int(meta["n_points"]) or not np.allclose(prof.u, data[:, 0]):
            raise EnsembleError(f"sidecar metadata inconsistent with {path}")
        return prof


@dataclass(frozen=True)
class LatticeField:
    """Real values on consecutive integer sites starting at ``origin``."""

    origin: int
    values: np.ndarray

    def site(self, x: int) -> float:
        j = x - self.origin
        if not (0 <= j < self.values.size):
            raise EnsembleError(f"site {x} outside the stored range")
        return float(self.values[j])

    @property
    def sites(self) -> np.ndarray:
        return self.origin + np.arange(self.values.size)


def height_function(state: YoungDiagram, u) -> np.ndarray:
    """psi_p(u) = #{i : p_i > u} (right-continuous step function)."""
    u = np.asarray(u, dtype=np.float64)
    ascending = state.columns[::-1].astype(np.float64)
    counts = state.columns.size - np.searchsorted(ascending, u, side="right")
    return counts if u.ndim else int(counts)


def scaled_height(state: YoungDiagram, n_scale: float, grid: np.ndarray, domain: Domain | None = None) -> Profile:
    """(1/N) psi_p(N u) sampled on ``grid``."""
    grid = np.asarray(grid, dtype=np.float64)
    values = height_function(state, n_scale * grid) / float(n_scale)
    return Profile.from_grid(grid, values, domain or Domain.HALF_LINE_CLOSED)


def zeta_counts(window: OccupancyWindow, x) -> tuple[np.ndarray, np.ndarray]:
    """Vacancies up to x and particles beyond x in a rotated particle window.

    zeta_minus(x) = #{vacant sites z <= x}, zeta_plus(x) = #{occupied z >= x+1}.
    Both are exact when the window shows the far fields (all-occupied on the
    left edge, all-empty on the right edge), which ``rotate_to_wasep``
    guarantees.
    """
    if window.kind is not OccupancyKind.WASEP:
        raise EnsembleError("zeta counts are defined for rotated (wasep) windows")
    v = window.values
    holes_prefix = np.concatenate([[0], np.cumsum(1 - v)])
    parts_suffix = np.concatenate([np.cumsum(v[::-1])[::-1], [0]])
    x = np.asarray(x)
    scalar = x.ndim == 0
    xi = np.atleast_1d(x).astype(np.int64)
    j = np.clip(xi - window.origin + 1, 0, v.size)
    zminus = holes_prefix[j]
    k = np.clip(xi + 1 - window.origin, 0, v.size)
    zplus = parts_suffix[k]
    if scalar:
        return int(zminus[0]), int(zplus[0])
    return zminus, zplus


def rotated_height(state: YoungDiagram, v) -> np.ndarray:
    """Exact 45-degree rotated boundary curve of the diagram.

    The curve is piecewise linear with slopes +-1, equals ``v`` for large v,
    and equals ``(x + 2 * #{i : p_i - i >= x}) / sqrt(2)`` at every rotated
    lattice point ``v = x / sqrt(2)``; in between it interpolates linearly.
    """
    from .dynamics import rotated_particle_count

    v = np.asarray(v, dtype=np.float64)
    scalar = v.ndim == 0
    y = np.atleast_1d(v) * SQRT2
    x0 = np.floor(y)
    f0 = x0 + 2.0 * rotated_particle_count(state, x0)
    f1 = (x0 + 1.0) + 2.0 * rotated_particle_count(state, x0 + 1.0)
    vals = (f0 * (x0 + 1.0 - y) + f1 * (y - x0)) / SQRT2
    return float(vals[0]) if scalar else vals


def rotated_height_counting(state: YoungDiagram, v) -> np.ndarray:
    """Particle-counting approximation sqrt(2) * #{sites >= sqrt(2) v} + v.

    Agrees with ``rotated_height`` exactly at ``v = (p_i - i)/sqrt(2)`` and
    differs from it by at most sqrt(2) everywhere.
    """
    from .dynamics import rotated_particle_count

    v = np.asarray(v, dtype=np.float64)
    scalar = v.ndim == 0
    vv = np.atleast_1d(v)
    counts = rotated_particle_count(state, SQRT2 * vv)
    vals = SQRT2 * counts + vv
    return float(vals[0]) if scalar else vals


def hopf_cole_field(eta, epsilon: float, n_scale: float, grid: np.ndarray) -> Profile:
    """Interpolated exponential transform of an RU exclusion configuration.

    With tail sums ``T(x) = sum_{y >= x} eta(y)`` the lattice field is
    ``zeta(x) = exp(-log eps * T(x))`` and the interpolation

        zeta~(u) = exp(-log eps * (T([Nu]+1) + 1{u >= 1/N} ([Nu]+1-Nu) eta([Nu])))

    satisfies ``zeta~(x/N) = zeta(x)``, so
    ``log zeta~(u) = -log eps * (psi_q([Nu]) + r(u))`` with the same
    interpolation remainder ``r``; heights are recovered exactly on the
    lattice after subtracting it.
    """
    if not (0.0 < epsilon < 1.0):
        raise EnsembleError(f"fugacity must lie in (0, 1), got {epsilon}")
    if isinstance(eta, OccupancyWindow):
        if eta.kind is not OccupancyKind.EXCLUSION or eta.origin != 1:
            raise EnsembleError("hopf_cole_field expects exclusion occupancies on sites >= 1")
        eta = eta.values
    eta = np.asarray(eta, dtype=np.int64)
    if np.any((eta != 0) & (eta != 1)):
        raise EnsembleError("exclusion occupancies must be 0/1")
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(grid < 0):
        raise EnsembleError("the transform is defined for u >= 0")
    suffix = np.concatenate([np.cumsum(eta[::-1])[::-1], [0]]).astype(np.float64)
    # suffix[k] = T(k+1) = sum_{y >= k+1} eta(y)
    j = np.floor(n_scale * grid).astype(np.int64)
    base = suffix[np.clip(j, 0, eta.size)]
    guard = np.where(
        (grid >= 1.0 / n_scale) & (j >= 1) & (j <= eta.size),
        (j + 1 - n_scale * grid) * np.where(j <= eta.size, eta[np.clip(j, 1, eta.size) - 1], 0),
        0.0,
    )
    log_eps = math.log(epsilon)
    values = np.exp(-log_eps * (base + guard))
    return Profile.from_grid(grid, values, Domain.HALF_LINE_CLOSED)


def hopf_cole_lattice(eta, epsilon: float) -> LatticeField:
    """Lattice transform zeta(x) = exp(-log eps T(x)) for x >= 1, plus the
    reflected boundary value zeta(0) = eps^{-1} zeta(2) stored at site 0."""
    if isinstance(eta, OccupancyWindow):
        eta = eta.values
    eta = np.asarray(eta, dtype=np.float64)
    suffix = np.concatenate([np.cumsum(eta[::-1])[::-1], [0.0]])
    log_eps = math.log(epsilon)
    zeta = np.exp(-log_eps * suffix)  # sites 1 .. L+1
    z0 = zeta[1] / epsilon if zeta.size > 1 else 1.0 / epsilon
    return LatticeField(origin=0, values=np.concatenate([[z0], zeta]))


def symmetrize_hopf_cole(zeta: LatticeField | np.ndarray, epsilon: float) -> LatticeField:
    """Half-line to whole-line symmetrization of the lattice transform.

    zeta_bar(x) = eps^{-x/2} zeta(x) for x >= 1, extended by the even
    reflection zeta_bar(x) = zeta_bar(2 - x) for x <= 0.  The reflection is
    consistent with the boundary rule zeta(0) = eps^{-1} zeta(2).
    """
    if isinstance(zeta, LatticeField):
        if zeta.origin > 1:
            raise EnsembleError("lattice field must start at site <= 1")
        vals = zeta.values[1 - zeta.origin :]
    else:
        vals = np.asarray(zeta, dtype=np.float64)
    if vals.size < 2:
        raise EnsembleError("need zeta on at least sites 1 and 2")
    x = np.arange(1, vals.size + 1, dtype=np.float64)
    bar = vals * epsilon ** (-x / 2.0)
    left = bar[1:][::-1]  # values at x = 0, -1, ..., 2 - L
    return LatticeField(origin=2 - vals.size, values=np.concatenate([left, bar]))


def phi_u(psi: Profile, v_grid: np.ndarray | None = None) -> Profile:
    """Slope substitution from a U height profile to a whole-line density.

    rho(v) = -psi'(u) / (1 - psi'(u)) evaluated at u = G^{-1}(v) with
    G(u) = u - psi(u); G is strictly increasing because psi decreases.
    """
    u = psi.u
    values = psi.values
    slope = np.gradient(values, u)[1:-1]  # edge stencils are dropped below
    if np.any(slope > 1e-9):
        raise EnsembleError("phi_u expects a non-increasing height profile")
    g = (u - values)[1:-1]
    if np.any(np.diff(g) <= 0):
        raise EnsembleError("G(u) = u - psi(u) must be strictly increasing")
    if v_grid is None:
        v_grid = np.linspace(g[0], g[-1], u.size)
    v_grid = np.asarray(v_grid, dtype=np.float64)
    slope_at = np.interp(v_grid, g, slope)
    rho = -slope_at / (1.0 - slope_at)
    return Profile.from_grid(v_grid, rho, Domain.WHOLE_LINE)


def _tail_rate(values: np.ndarray, step: float) -> float:
    """Exponential growth rate of a left tail, fitted over a wide baseline.

    A two-point fit on adjacent nodes amplifies pointwise noise by 1/step;
    spanning about half a unit keeps the fit exact for pure exponentials
    while averaging out discretization error in the data.
    """
    k = min(values.size - 1, max(1, int(round(0.5 / step))))
    lo = max(values[0], 1e-300)
    hi = max(values[k], 1e-300)
    return math.log(hi / lo) / (k * step)


def cumulative_hole_integral(rho: Profile) -> np.ndarray:
    """zeta(v) = integral_{-inf}^{v} (1 - rho), with an exponential-fit tail.

    The stored grid carries the trapezoid part; the mass to the left of the
    grid is estimated by fitting ``1 - rho ~ c e^{lam v}`` near the left edge
    (exact for equilibrium-type tails, conservative otherwise).
    """
    v = rho.u
    holes = 1.0 - rho.values
    if np.any(holes < -1e-9) or np.any(rho.values < -1e-9):
        raise EnsembleError("densities must lie in [0, 1]")
    body = np.concatenate([[0.0], cumulative_trapezoid(holes, v)])
    lam = _tail_rate(holes, rho.grid_step)
    tail = holes[0] / lam if lam > 1e-12 else 0.0
    return body + tail


def phi_u_inverse(rho: Profile, u_grid: np.ndarray | None = None) -> Profile:
    """Rebuild the U height profile from a whole-line density.

    u = zeta(v) = integral_{-inf}^v (1 - rho) and
    psi(u) = integral_{v(u)}^{inf} rho, inverting zeta by monotone
    interpolation.  Right tails use the same exponential fit as the left.
    """
    v = rho.u
    vals = rho.values
    zeta = cumulative_hole_integral(rho)
    body = np.concatenate([[0.0], cumulative_trapezoid(vals, v)])
    lam = _tail_rate(vals[::-1], rho.grid_step)
    right_tail = vals[-1] / lam if lam > 1e-12 else 0.0
    zeta_plus = (body[-1] - body) + right_tail
    if u_grid is None:
        u_grid = np.linspace(max(zeta[0], 1e-9), zeta[-1], v.size)
    u_grid = np.asarray(u_grid, dtype=np.float64)
    v_at_u = np.interp(u_grid, zeta, v)
    psi = np.interp(v_at_u, v, zeta_plus)
    return Profile.from_grid(u_grid, psi, Domain.HALF_LINE_OPEN)


class NormSpace(Enum):
    LINE = "line"  # weight e^{-2 r |u|} on R
    HALF_LINE = "half_line"  # weight e^{-2 r u} on R_+
    TILTED_HALF_LINE = "tilted"  # weight u^{1 + 2r/rate} near 0, e^{-2 r u} at infinity


@dataclass(frozen=True)
class WeightedNorm:
    """Weighted L2 norm specification.

    ``TILTED_HALF_LINE`` uses the positive weight that behaves like
    ``u**(1 + 2 r / rate)`` on (0, 1] and ``exp(-2 r u)`` on [2, inf),
    joined by a C1 blend of the logarithms; it requires r > 0.
    """

    space: NormSpace
    r: float
    rate: float = ALPHA

    def weight(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if self.space is NormSpace.LINE:
            return np.exp(-2.0 * self.r * np.abs(u))
        if self.space is NormSpace.HALF_LINE:
            if np.any(u < 0):
                raise EnsembleError("half-line norms need u >= 0")
            return np.exp(-2.0 * self.r * u)
        if self.r <= 0:
            raise EnsembleError("the tilted weight requires r > 0")
        if np.any(u <= 0):
            raise EnsembleError("the tilted weight lives on u > 0")
        power = 1.0 + 2.0 * self.r / self.rate
        log_low = power * np.log(u)
        log_high = -2.0 * self.r * u
        t = np.clip(u - 1.0, 0.0, 1.0)
        s = 3.0 * t**2 - 2.0 * t**3
        return np.exp((1.0 - s) * log_low + s * log_high)


def weighted_norm(f: Profile, w: WeightedNorm) -> float:
    """Trapezoid approximation of the weighted L2 norm (not squared)."""
    integrand = f.values**2 * w.weight(f.u)
    return float(math.sqrt(np.trapezoid(integrand, f.u)))
