"""Continuous-time Markov growth dynamics on Young diagrams.

Columns grow by one cell at rate ``eps`` and shrink at rate 1 whenever the
move keeps the diagram in its class.  With ``p_0 = q_0 = infinity``:

* U case (non-increasing columns ``p``): column ``i`` may grow iff
  ``p_{i-1} > p_i`` and may shrink iff ``p_i > p_{i+1}``;
* RU case (strictly decreasing positive columns ``q``): column ``i`` may
  grow iff ``q_{i-1} > q_i + 1`` and may shrink iff ``q_i > q_{i+1} + 1``
  or ``q_i = 1``.

The grandcanonical measure at fugacity ``eps`` is reversible for both
chains.  Trajectories are generated with an exact event-driven scheme
(exponential waiting times, no time discretization); the microscopic clock
runs ``N**2`` times faster than the macroscopic time stored in records, so
``t`` here always means macroscopic time.

The RU chain is an exclusion process in disguise: ``eta(x) = 1{some q_i = x}``
performs weakly asymmetric hops with a reservoir at the origin.  The U chain,
viewed along the 45-degree rotated boundary, is the same exclusion dynamics
on the whole line started from step-like far fields (all sites occupied far
left, empty far right); ``rotate_to_wasep`` extracts that particle picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ensembles import EnsembleError, Stat, YoungDiagram

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


class Direction(Enum):
    GROW = 1
    SHRINK = -1


@dataclass(frozen=True)
class TransitionEvent:
    """One admissible move: column index (1-based), direction and its rate."""

    column: int
    direction: Direction
    rate: float


class OccupancyKind(Enum):
    ZERO_RANGE = "zero_range"  # U increments xi(x) over x >= 1
    EXCLUSION = "exclusion"  # RU increments eta(x) over x >= 1
    WASEP = "wasep"  # rotated two-sided particle picture on Z


@dataclass(frozen=True)
class OccupancyWindow:
    """Occupation numbers on consecutive integer sites starting at ``origin``."""

    origin: int
    values: np.ndarray
    kind: OccupancyKind

    def site(self, x: int) -> int:
        j = x - self.origin
        if 0 <= j < self.values.size:
            return int(self.values[j])
        if self.kind is OccupancyKind.WASEP:
            # valid windows show the far fields: occupied left, empty right
            return 1 if x < self.origin else 0
        return 0

    @property
    def sites(self) -> np.ndarray:
        return self.origin + np.arange(self.values.size)


@dataclass
class TrajectoryRecord:
    """Event-driven simulation output at the requested observer times."""

    kind: Stat
    epsilon: float
    n_scale: float
    seed: int
    times: np.ndarray
    snapshots: list[YoungDiagram] = field(default_factory=list)
    jump_count: int = 0


def enumerate_transitions(state: YoungDiagram, kind: Stat, epsilon: float) -> list[TransitionEvent]:
    """All moves with positive rate from ``state`` (finite by construction)."""
    if not (0.0 < epsilon < 1.0):
        raise EnsembleError(f"fugacity must lie in (0, 1), got {epsilon}")
    ru = kind is Stat.RU
    n = state.n_columns
    events: list[TransitionEvent] = []
    for i in range(1, n + 2):
        here = state.column(i)
        left = state.column(i - 1) if i >= 2 else None  # None encodes infinity
        right = state.column(i + 1)
        gap = 1 if ru else 0
        if left is None or left > here + gap:
            events.append(TransitionEvent(i, Direction.GROW, epsilon))
        if here > right + gap or (ru and here == 1):
            events.append(TransitionEvent(i, Direction.SHRINK, 1.0))
    return events


def total_rate(state: YoungDiagram, kind: Stat, epsilon: float) -> float:
    return sum(e.rate for e in enumerate_transitions(state, kind, epsilon))


def apply_transition(state: YoungDiagram, event: TransitionEvent) -> YoungDiagram:
    """Return the diagram after one move (no rate re-check)."""
    cols = state.columns
    i = event.column
    if event.direction is Direction.GROW:
        if i == cols.size + 1:
            return YoungDiagram(np.append(cols, np.int64(1)))
        new = cols.copy()
        new[i - 1] += 1
        return YoungDiagram(new)
    new = cols.copy()
    new[i - 1] -= 1
    return YoungDiagram(new[new > 0])


# ---------------------------------------------------------------------------
# Event-driven kernel.  State layout shared by the python and numba paths:
#   cols[0] unused, cols[i] = p_i for 1 <= i <= cap-2, zero beyond n_pos.
#   Two index sets (items array + position map) hold the columns currently
#   allowed to grow (rate eps each) and to shrink (rate 1 each).  A move at
#   column j only changes the admissibility of columns j-1, j, j+1.
# ---------------------------------------------------------------------------

_STATUS_OK = 0
_STATUS_CAPACITY = 1
_STATUS_INVALID = 2


@njit(cache=True)
def _kmc_run(cols, n_pos, ru, eps, clock_rate, obs_times, snaps, seed, check_state, max_jumps):
    np.random.seed(seed)
    cap = cols.shape[0]
    g_items = np.empty(cap, np.int64)
    g_pos = np.full(cap, -1, np.int64)
    s_items = np.empty(cap, np.int64)
    s_pos = np.full(cap, -1, np.int64)
    g_count = 0
    s_count = 0
    gap = 1 if ru else 0

    for i in range(1, min(n_pos + 2, cap - 1)):
        left = cols[i - 1] if i >= 2 else np.int64(2**62)
        if left > cols[i] + gap:
            g_pos[i] = g_count
            g_items[g_count] = i
            g_count += 1
        if cols[i] > cols[i + 1] + gap or (ru and cols[i] == 1):
            s_pos[i] = s_count
            s_items[s_count] = i
            s_count += 1

    t = 0.0
    jumps = 0
    n_obs = obs_times.shape[0]
    obs_idx = 0

    while True:
        total = eps * g_count + s_count
        if total <= 0.0:
            wait = np.inf
        else:
            wait = -math.log(np.random.random()) / (clock_rate * total)
        while obs_idx < n_obs and t + wait >= obs_times[obs_idx]:
            snaps[obs_idx, :] = cols
            snaps[obs_idx, 0] = n_pos
            obs_idx += 1
        if obs_idx >= n_obs:
            return _STATUS_OK, jumps, n_pos
        if not np.isfinite(wait):
            return _STATUS_INVALID, jumps, n_pos
        t += wait

        u = np.random.random() * total
        if u < eps * g_count:
            j = g_items[np.int64(np.random.random() * g_count) % g_count]
            cols[j] += 1
            if j > n_pos:
                n_pos = j
                if n_pos + 2 >= cap:
                    return _STATUS_CAPACITY, jumps, n_pos
        else:
            j = s_items[np.int64(np.random.random() * s_count) % s_count]
            cols[j] -= 1
            if cols[j] == 0 and j == n_pos:
                n_pos -= 1
        jumps += 1
        if jumps >= max_jumps:
            return _STATUS_INVALID, jumps, n_pos

        lo = j - 1 if j >= 2 else 1
        hi = min(j + 1, cap - 2)
        for i in range(lo, hi + 1):
            left = cols[i - 1] if i >= 2 else np.int64(2**62)
            want_g = left > cols[i] + gap
            want_s = cols[i] > cols[i + 1] + gap or (ru and cols[i] == 1)
            if want_g and g_pos[i] < 0:
                g_pos[i] = g_count
                g_items[g_count] = i
                g_count += 1
            elif not want_g and g_pos[i] >= 0:
                k = g_pos[i]
                last = g_items[g_count - 1]
                g_items[k] = last
                g_pos[last] = k
                g_pos[i] = -1
                g_count -= 1
            if want_s and s_pos[i] < 0:
                s_pos[i] = s_count
                s_items[s_count] = i
                s_count += 1
            elif not want_s and s_pos[i] >= 0:
                k = s_pos[i]
                last = s_items[s_count - 1]
                s_items[k] = last
                s_pos[last] = k
                s_pos[i] = -1
                s_count -= 1

        if check_state:
            prev = np.int64(2**62)
            for i in range(1, n_pos + 1):
                if cols[i] <= 0 or cols[i] + gap > prev:
                    return _STATUS_INVALID, jumps, n_pos
                prev = cols[i]
            for i in range(n_pos + 1, cap):
                if cols[i] != 0:
                    return _STATUS_INVALID, jumps, n_pos


def derive_seed(master_seed: int, index: int) -> int:
    """Per-trajectory 32-bit seed: SeedSequence(master).spawn-style splitting."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def simulate(
    state0: YoungDiagram,
    kind: Stat,
    epsilon: float,
    n_scale: float,
    t_end: float,
    observer_times=None,
    seed: int = 0,
    check_state: bool = False,
    max_jumps: int = 2**62,
) -> TrajectoryRecord:
    """Run the event-driven chain from ``state0`` up to macroscopic ``t_end``.

    ``observer_times`` defaults to ``[t_end]``; snapshots are the states held
    at those times.  The jump clock runs at ``N**2`` times the sum of move
    rates.  Identical seeds give identical trajectories.
    """
    if not (0.0 < epsilon < 1.0):
        raise EnsembleError(f"fugacity must lie in (0, 1), got {epsilon}")
    if t_end < 0.0:
        raise EnsembleError(f"t_end must be nonnegative, got {t_end}")
    if observer_times is None:
        observer_times = [t_end]
    obs = np.asarray(sorted(observer_times), dtype=np.float64)
    if obs.size and obs[-1] > t_end:
        raise EnsembleError("observer times must not exceed t_end")
    state0.validate(kind)

    cap = max(4 * (state0.n_columns + 8), 1024)
    clock = float(n_scale) ** 2
    while True:
        cols = np.zeros(cap, dtype=np.int64)
        cols[1 : state0.n_columns + 1] = state0.columns
        snaps = np.zeros((obs.size, cap), dtype=np.int64)
        status, jumps, _ = _kmc_run(
            cols,
            state0.n_columns,
            kind is Stat.RU,
            float(epsilon),
            clock,
            obs,
            snaps,
            np.uint32(seed),
            check_state,
            max_jumps,
        )
        if status == _STATUS_CAPACITY:
            cap *= 2
            continue
        if status == _STATUS_INVALID:
            raise RuntimeError("chain state became invalid or jump budget exhausted")
        record = TrajectoryRecord(
            kind=kind,
            epsilon=float(epsilon),
            n_scale=float(n_scale),
            seed=int(seed),
            times=obs,
            jump_count=int(jumps),
        )
        for row in snaps:
            n_pos = int(row[0])
            record.snapshots.append(YoungDiagram(row[1 : n_pos + 1].copy()))
        return record


def to_occupancy(state: YoungDiagram, kind: Stat, x_max: int | None = None) -> OccupancyWindow:
    """Height increments over sites 1..x_max (zero-range for U, exclusion for RU)."""
    top = int(state.columns[0]) if state.n_columns else 0
    if x_max is None:
        x_max = max(top, 1)
    if x_max < top:
        raise EnsembleError("x_max must cover the tallest column")
    values = np.zeros(x_max, dtype=np.int64)
    np.add.at(values, state.columns - 1, 1)
    flavor = OccupancyKind.ZERO_RANGE if kind is Stat.U else OccupancyKind.EXCLUSION
    if kind is Stat.RU and np.any(values > 1):
        raise EnsembleError("RU occupancies must be 0/1")
    return OccupancyWindow(origin=1, values=values, kind=flavor)


def rotate_to_wasep(state: YoungDiagram, window_radius: int) -> OccupancyWindow:
    """Particle picture along the rotated boundary: sites ``p_i - i``, i >= 1.

    Columns beyond the last positive one contribute ``-i``, so the far field
    is fully occupied to the left and empty to the right.  The window
    ``[-W, W]`` must contain every site where the pattern differs from the
    far field; otherwise the picture would be silently truncated.
    """
    cols = state.columns
    n = cols.size
    top = int(cols[0]) if n else 0
    w = int(window_radius)
    if w < max(top, n) + 1:
        raise EnsembleError(
            f"window radius {w} too small: needs at least {max(top, n) + 1} "
            "to contain all deviations from the far field"
        )
    values = np.zeros(2 * w + 1, dtype=np.int64)
    sites = cols - np.arange(1, n + 1, dtype=np.int64)
    values[sites + w] = 1
    # columns i > n sit at -i; mark those inside the window
    values[: w - n] = 1
    return OccupancyWindow(origin=-w, values=values, kind=OccupancyKind.WASEP)


def rotated_particle_count(state: YoungDiagram, x) -> np.ndarray:
    """Number of rotated-picture particles at sites >= x (x real or array).

    Counts ``#{i >= 1 : p_i - i >= x}`` without materializing a window.
    """
    cols = state.columns
    n = cols.size
    qbar = cols - np.arange(1, n + 1, dtype=np.int64)
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    up = np.ceil(xv)
    inside = np.searchsorted(-qbar, -up, side="right") if n else np.zeros(xv.shape, np.int64)
    tail = np.maximum(0, np.floor(-up).astype(np.int64) - n)
    out = inside + tail
    return int(out[0]) if scalar else out
