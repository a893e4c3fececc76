"""Shadowed ballistic deposition on a periodic solid-on-solid lattice.

Particles leave a distant source at an angle drawn uniformly in
``[-theta_max, theta_max]`` from the surface normal and fly in straight lines
until they meet the interface. A particle that lands on a column top sticks
there. One that strikes the vertical side of a taller column either slides
down into the groove it came from (``SideRule.FALL_DOWN``) or is discarded
(``SideRule.REMOVE``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .analysis import (
    DEFAULT_BINS,
    RunRecord,
    checkpoints,
    height_histogram,
    log_sample_times,
    roughness,
)
from .core import DiscreteParams, HeightField, RandomSource, SideRule, flat_field

# particles drawn from the random source per refill
DRAW_BLOCK = 1 << 16

_TOP, _SIDE = 0, 1
_VERTICAL, _FROM_LEFT, _FROM_RIGHT = 0, 1, 2


class ImpactKind(enum.IntEnum):
    TOP = _TOP
    SIDE = _SIDE


class Direction(enum.IntEnum):
    VERTICAL = _VERTICAL
    FROM_LEFT = _FROM_LEFT
    FROM_RIGHT = _FROM_RIGHT


@dataclass(frozen=True)
class ImpactEvent:
    site: int
    kind: ImpactKind
    incoming_direction: Direction = Direction.VERTICAL


@numba.njit(cache=True)
def _trace(h, hmax, x0, theta):
    L = h.size
    j = int(math.floor(x0))
    if j >= L:
        j = L - 1
    if theta == 0.0:
        return j, _TOP, _VERTICAL
    right = theta > 0.0
    drop = 1.0 / math.tan(abs(theta))
    y0 = hmax + 2.0
    first = (j + 1.0 - x0) if right else (x0 - j)
    n = 0
    while True:
        # height on reaching the far boundary of column j; computed from the
        # start point so the error does not accumulate over long flights
        yb = y0 - (first + n) * drop
        if yb <= h[j]:
            return j, _TOP, _VERTICAL
        jn = (j + 1) % L if right else (j - 1) % L
        if yb < h[jn]:
            return jn, _SIDE, (_FROM_LEFT if right else _FROM_RIGHT)
        if yb == h[jn]:
            return jn, _TOP, _VERTICAL
        j = jn
        n += 1


@numba.njit(cache=True)
def _apply(h, site, kind, direction, fall_down):
    L = h.size
    if kind == _TOP:
        h[site] += 1
        return True
    if not fall_down:
        return False
    if direction == _FROM_LEFT:
        h[(site - 1) % L] += 1
    else:
        h[(site + 1) % L] += 1
    return True


@numba.njit(cache=True)
def _deposit(h, xs, thetas, start, count, fall_down, hmax):
    stuck = 0
    for p in range(start, start + count):
        site, kind, direction = _trace(h, hmax, xs[p], thetas[p])
        if _apply(h, site, kind, direction, fall_down):
            stuck += 1
            if kind == _TOP:
                dest = site
            elif direction == _FROM_LEFT:
                dest = (site - 1) % h.size
            else:
                dest = (site + 1) % h.size
            if h[dest] > hmax:
                hmax = h[dest]
    return stuck, hmax


def trace_particle(field: HeightField, x0: float, theta: float) -> ImpactEvent:
    """Follow one particle launched just above the highest column."""
    if not abs(theta) < math.pi / 2:
        raise ValueError("|theta| must be below pi/2")
    h = field.heights
    site, kind, direction = _trace(h, int(h.max()), float(x0) % field.L, float(theta))
    return ImpactEvent(int(site), ImpactKind(kind), Direction(direction))


def apply_impact(field: HeightField, event: ImpactEvent, side_rule: SideRule) -> bool:
    """Deposit the particle described by ``event`` in place; returns whether it stuck."""
    return bool(
        _apply(
            field.heights,
            event.site,
            int(event.kind),
            int(event.incoming_direction),
            SideRule(side_rule) is SideRule.FALL_DOWN,
        )
    )


class _ParticleStream:
    """Launch positions and angles, drawn in fixed blocks so the stream does
    not depend on where the run pauses to take samples."""

    def __init__(self, rng: RandomSource, L: int, theta_max: float):
        self.rng, self.L, self.theta_max = rng, L, theta_max
        self.pos = DRAW_BLOCK

    def refill(self):
        self.xs = self.rng.uniform(0.0, self.L, DRAW_BLOCK)
        self.thetas = self.rng.uniform(-self.theta_max, self.theta_max, DRAW_BLOCK)
        self.pos = 0


def run_discrete(params: DiscreteParams, n_bins: int = DEFAULT_BINS) -> RunRecord:
    """Deposit ``t_end * L`` particles; one unit of time is ``L`` launches."""
    params.validate()
    L = params.L
    field = flat_field(L, 0)
    h = field.heights
    rng = RandomSource(params.seed)
    stream = _ParticleStream(rng, L, params.theta_max)
    fall_down = params.side_rule is SideRule.FALL_DOWN

    n_total = int(round(params.t_end * L))
    sample_at = checkpoints(log_sample_times(1.0 / L, params.t_end, params.samples_per_decade), 1.0 / L, n_total)
    sample_at = sample_at[sample_at > 0]
    snap_at = checkpoints(params.snapshot_times, 1.0 / L, n_total)
    stops = np.union1d(sample_at, snap_at)

    samples, snapshots = [], []
    launched = 0
    stuck_total = 0
    hmax = 0
    for stop in stops:
        while launched < stop:
            if stream.pos == DRAW_BLOCK:
                stream.refill()
            count = min(stop - launched, DRAW_BLOCK - stream.pos)
            stuck, hmax = _deposit(h, stream.xs, stream.thetas, stream.pos, count, fall_down, hmax)
            stream.pos += count
            launched += count
            stuck_total += stuck
        t = launched / L
        if stop in sample_at:
            samples.append((t, roughness(field), h.sum() / L))
        if stop in snap_at:
            snapshots.append((t, field.copy()))

    return RunRecord(
        samples=np.array(samples, dtype=np.float64).reshape(-1, 3),
        snapshots=snapshots,
        params_echo=params.to_dict(),
        seed=params.seed,
        final=field,
        histogram=height_histogram(field, n_bins),
        extras={"launched": int(launched), "stuck": int(stuck_total)},
    )
