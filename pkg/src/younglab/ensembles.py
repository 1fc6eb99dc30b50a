"""Grandcanonical ensembles of two-dimensional Young diagrams.

A diagram is encoded by its column heights ``p_1 >= p_2 >= ... >= 0`` with
area ``n(p) = sum_i p_i``.  Two statistics are supported:

* ``Stat.U``    -- unrestricted diagrams (columns may repeat),
* ``Stat.RU``   -- row-restricted diagrams (positive columns strictly
  decrease, equivalently all row lengths are distinct).

The grandcanonical measure with fugacity ``0 < eps < 1`` puts mass
proportional to ``eps**n(p)`` on a diagram ``p``.  Height increments over
the integer sites ``x = 1, 2, ...`` are then independent:

* U case: ``xi(x) = #{i : p_i = x}`` is geometric with
  ``P(xi = k) = a**k * (1 - a)``, ``a = eps**x``;
* RU case: ``eta(x) = 1{some p_i = x}`` is Bernoulli with
  ``P(eta = 1) = a / (1 + a)``.

Normalizations are the Euler products ``Z_U = prod_k (1 - eps**k)**-1`` and
``Z_R = prod_k (1 + eps**k)``.  Choosing ``eps`` so that the expected area
equals ``N**2`` gives ``eps = 1 - alpha/N + O(log N / N**2)`` in the U case
and ``eps = 1 - beta/N + O(log N / N**2)`` in the RU case, where

    alpha = pi / sqrt(6),        beta = pi / sqrt(12).

Under this calibration the scaled height profile concentrates on the
limit shapes

    psi_U(u) = -(1/alpha) * log(1 - exp(-alpha u)),
    psi_R(u) =  (1/beta)  * log(1 + exp(-beta u)),

with densities ``rho_U(u) = 1/(e**(alpha u) - 1)`` and
``rho_R(u) = 1/(e**(beta u) + 1)``, and the centered, sqrt(N)-scaled height
fluctuations are asymptotically Gaussian with covariance
``C(u, v) = rho(u ∨ v) / alpha`` (U) or ``.. / beta`` (RU).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

ALPHA = math.pi / math.sqrt(6.0)
BETA = math.pi / math.sqrt(12.0)


class Stat(Enum):
    """Statistics of the column ensemble."""

    U = "u"
    RU = "ru"

    @property
    def decay_rate(self) -> float:
        """Limit-shape decay rate: alpha for U, beta for RU."""
        return ALPHA if self is Stat.U else BETA


class EnsembleError(ValueError):
    """Raised for invalid ensemble parameters or invalid diagrams."""


@dataclass(frozen=True)
class YoungDiagram:
    """A Young diagram stored as its positive column heights, non-increasing."""

    columns: np.ndarray

    @staticmethod
    def from_columns(columns) -> "YoungDiagram":
        cols = np.asarray(columns, dtype=np.int64)
        if cols.ndim != 1:
            raise EnsembleError("columns must be a one-dimensional sequence")
        cols = cols[cols > 0]
        if np.any(np.diff(cols) > 0):
            raise EnsembleError("columns must be non-increasing")
        return YoungDiagram(cols)

    @staticmethod
    def empty() -> "YoungDiagram":
        return YoungDiagram(np.zeros(0, dtype=np.int64))

    @property
    def area(self) -> int:
        return int(self.columns.sum())

    @property
    def n_columns(self) -> int:
        return int(self.columns.size)

    def column(self, i: int) -> int:
        """Height p_i with the convention p_i = 0 beyond the last column (i >= 1)."""
        if i < 1:
            raise EnsembleError("column indices start at 1")
        return int(self.columns[i - 1]) if i <= self.columns.size else 0

    def validate(self, kind: Stat) -> None:
        cols = self.columns
        if cols.size == 0:
            return
        if np.any(cols <= 0):
            raise EnsembleError("stored columns must be positive")
        diffs = np.diff(cols)
        if kind is Stat.U:
            if np.any(diffs > 0):
                raise EnsembleError("U diagram columns must be non-increasing")
        else:
            if np.any(diffs >= 0):
                raise EnsembleError("RU diagram columns must strictly decrease")


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < 1.0):
        raise EnsembleError(f"fugacity must lie in (0, 1), got {epsilon}")


def partition_sum(epsilon: float, kind: Stat) -> float:
    """Normalization constant Z(eps): Euler product, truncated adaptively.

    The product is accumulated in log space in blocks until the analytic
    tail bound drops below 1e-14 in absolute log terms.
    """
    _check_epsilon(epsilon)
    log_z = 0.0
    k0 = 1
    block = 256
    while True:
        k = np.arange(k0, k0 + block, dtype=np.float64)
        ek = epsilon**k
        if kind is Stat.U:
            log_z += float(-np.log1p(-ek).sum())
        else:
            log_z += float(np.log1p(ek).sum())
        k0 += block
        # tail of sum_k |log(1 -+ eps^k)| is below eps^k0/(1-eps)^2
        tail = epsilon**k0 / (1.0 - epsilon) ** 2
        if tail < 1e-14:
            return math.exp(log_z)


def _mean_size_terms(epsilon: float, kind: Stat, x: np.ndarray) -> np.ndarray:
    a = epsilon**x
    if kind is Stat.U:
        return x * a / (1.0 - a)
    return x * a / (1.0 + a)


def _mean_size_tail_bound(epsilon: float, kind: Stat, x_last: float) -> float:
    """Upper bound for sum_{x > x_last} x eps^x / (1 -+ eps^x)."""
    e = epsilon
    geo = e ** (x_last + 1) * ((x_last + 1) - x_last * e) / (1.0 - e) ** 2
    if kind is Stat.U:
        return geo / (1.0 - e ** (x_last + 1))
    return geo


def mean_size(epsilon: float, kind: Stat) -> float:
    """Expected area E[n(p)] = sum_x x * eps^x / (1 -+ eps^x).

    The series is summed in blocks until the closed-form geometric tail
    bound is below 1e-10 relative to the accumulated value.
    """
    _check_epsilon(epsilon)
    total = 0.0
    x0 = 1
    block = 1024
    while True:
        x = np.arange(x0, x0 + block, dtype=np.float64)
        total += float(_mean_size_terms(epsilon, kind, x).sum())
        x0 += block
        if _mean_size_tail_bound(epsilon, kind, x0 - 1) < 1e-10 * max(total, 1.0):
            return total


def calibrate_epsilon(kind: Stat, n_scale: float, tol: float | None = None) -> float:
    """Fugacity eps(N) with E[n(p)] = N**2, found by bisection.

    ``mean_size`` is strictly increasing in eps, so bisection on
    [guess/expand brackets] converges; iteration stops when the mean size
    at the midpoint is within ``tol`` of N**2 (default 1e-6 * N**2).
    """
    if n_scale < 2:
        raise EnsembleError("calibration requires N >= 2")
    if tol is None:
        tol = 1e-6 * n_scale**2
    target = float(n_scale) ** 2
    rate = kind.decay_rate
    guess = 1.0 - rate / n_scale

    lo = min(max(guess, 1e-6), 1.0 - 1e-12)
    while mean_size(lo, kind) > target:
        lo = 1.0 - 2.0 * (1.0 - lo)
        if lo <= 0.0:
            lo = 1e-12
            break
    hi = max(guess, 0.5)
    while mean_size(hi, kind) < target:
        hi = 1.0 - 0.5 * (1.0 - hi)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        value = mean_size(mid, kind)
        if abs(value - target) <= tol:
            return mid
        if value < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_x_max(epsilon: float, kind: Stat, n_scale: float) -> int:
    """Smallest site cutoff whose truncated tail mass is below 1e-9 * N**2.

    The cutoff starts at ceil(12 N / alpha_hat) with
    ``alpha_hat = -N log eps`` and grows until the closed-form tail bound
    of the mean-size series is small enough.
    """
    _check_epsilon(epsilon)
    alpha_hat = -n_scale * math.log(epsilon)
    x = int(math.ceil(12.0 * n_scale / alpha_hat))
    step = max(int(math.ceil(n_scale / alpha_hat)), 1)
    budget = 1e-9 * n_scale**2
    while _mean_size_tail_bound(epsilon, kind, x) > budget:
        x += step
    return x


@dataclass(frozen=True)
class GrandcanonicalParams:
    """Sampling parameters: fugacity, scale N and site cutoff."""

    epsilon: float
    n_scale: float
    x_max: int

    @staticmethod
    def for_scale(kind: Stat, n_scale: float, tol: float | None = None) -> "GrandcanonicalParams":
        eps = calibrate_epsilon(kind, n_scale, tol)
        return GrandcanonicalParams(eps, float(n_scale), default_x_max(eps, kind, n_scale))


def sample_height_differences(
    params: GrandcanonicalParams,
    kind: Stat,
    rng: np.random.Generator,
    size: int = 1,
) -> np.ndarray:
    """Draw ``size`` independent increment rows, shape (size, x_max).

    Row m holds xi(1..x_max) (U, geometric via inverse CDF) or
    eta(1..x_max) (RU, Bernoulli).  Column x uses a = eps**x.
    """
    x = np.arange(1, params.x_max + 1, dtype=np.float64)
    log_a = x * math.log(params.epsilon)
    u = rng.random((size, params.x_max))
    if kind is Stat.U:
        # inverse CDF of P(xi >= k) = a^k: xi = floor(log(1-u)/log(a))
        return np.floor(np.log1p(-u) / log_a).astype(np.int64)
    a = np.exp(log_a)
    return (u < a / (1.0 + a)).astype(np.int64)


def diagram_from_differences(diffs: np.ndarray) -> YoungDiagram:
    """Rebuild the column list from increment counts over sites 1..x_max."""
    diffs = np.asarray(diffs, dtype=np.int64)
    heights = np.arange(diffs.size, 0, -1, dtype=np.int64)
    return YoungDiagram(np.repeat(heights, diffs[::-1]))


def sample_grandcanonical(
    params: GrandcanonicalParams, kind: Stat, rng: np.random.Generator
) -> YoungDiagram:
    """Draw one diagram from the grandcanonical measure at ``params.epsilon``."""
    diffs = sample_height_differences(params, kind, rng, size=1)[0]
    return diagram_from_differences(diffs)


def vershik_curve(kind: Stat, u) -> tuple[np.ndarray, np.ndarray]:
    """Limit shape psi and its density rho = -psi' at macroscopic height u.

    U:  psi(u) = -(1/alpha) log(1 - e^(-alpha u)) on u > 0,
        rho(u) = 1 / (e^(alpha u) - 1);
    RU: psi(u) =  (1/beta)  log(1 + e^(-beta u)) on u >= 0,
        rho(u) = 1 / (e^(beta u) + 1).
    """
    u = np.asarray(u, dtype=np.float64)
    if kind is Stat.U:
        if np.any(u <= 0.0):
            raise EnsembleError("the U limit shape requires u > 0")
        e = np.exp(-ALPHA * u)
        psi = -np.log1p(-e) / ALPHA
        rho = e / (1.0 - e)
    else:
        if np.any(u < 0.0):
            raise EnsembleError("the RU limit shape requires u >= 0")
        e = np.exp(-BETA * u)
        psi = np.log1p(e) / BETA
        rho = e / (1.0 + e)
    return psi, rho


def static_covariance(kind: Stat, u, v) -> np.ndarray:
    """Limit covariance of the static height fluctuation field.

    C(u, v) = rho(u ∨ v) / alpha (U; u, v > 0) or rho(u ∨ v) / beta
    (RU; u, v >= 0).  Depends on (u, v) only through u ∨ v.
    """
    w = np.maximum(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
    _, rho = vershik_curve(kind, w)
    return rho / kind.decay_rate


def _site_variances(epsilon: float, kind: Stat, x: np.ndarray) -> np.ndarray:
    a = epsilon**x
    if kind is Stat.U:
        return a / (1.0 - a) ** 2
    return a / (1.0 + a) ** 2


def finite_size_covariance(kind: Stat, epsilon: float, n_scale: float, u, v) -> np.ndarray:
    """Exact covariance of the scaled fluctuation field at one fixed N.

    Cov(Psi^N(u), Psi^N(v)) = (1/N) * sum_{x > N (u ∨ v)} Var(increment at x),
    with geometric (U) or Bernoulli (RU) site variances.  Used as the
    finite-size oracle when judging Gaussian-limit comparisons.
    """
    _check_epsilon(epsilon)
    w = np.maximum(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.empty(w.shape, dtype=np.float64)
    x_hi = default_x_max(epsilon, kind, n_scale)
    x = np.arange(1, x_hi + 1, dtype=np.float64)
    var = _site_variances(epsilon, kind, x)
    suffix = np.concatenate([np.cumsum(var[::-1])[::-1], [0.0]])
    for idx, wi in enumerate(w.ravel()):
        first = int(math.floor(n_scale * wi)) + 1  # smallest site x with x > N w
        first = max(first, 1)
        out.ravel()[idx] = suffix[first - 1] / n_scale if first <= x_hi else 0.0
    return float(out[0]) if scalar else out


def finite_size_mean_height(kind: Stat, epsilon: float, n_scale: float, u) -> np.ndarray:
    """Exact mean of the scaled height (1/N) * sum_{x > N u} E[increment at x]."""
    _check_epsilon(epsilon)
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    x_hi = default_x_max(epsilon, kind, n_scale)
    x = np.arange(1, x_hi + 1, dtype=np.float64)
    a = epsilon**x
    mean = a / (1.0 - a) if kind is Stat.U else a / (1.0 + a)
    suffix = np.concatenate([np.cumsum(mean[::-1])[::-1], [0.0]])
    out = np.empty(u.shape, dtype=np.float64)
    for idx, ui in enumerate(u.ravel()):
        first = max(int(math.floor(n_scale * ui)) + 1, 1)
        out.ravel()[idx] = suffix[first - 1] / n_scale if first <= x_hi else 0.0
    return float(out[0]) if scalar else out
