"""Interface diagnostics: roughness, height distribution, exponent fits, modes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import HeightField

DEFAULT_BINS = 50


class FitError(ValueError):
    pass


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    frequencies: np.ndarray
    degenerate: bool = False

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def mode(self) -> float:
        """Center of the most populated bin (first one on ties)."""
        return float(self.bin_centers[int(np.argmax(self.counts))])

    def mode_position(self) -> float:
        """Mode as a fraction of the height range, 0 at the minimum, 1 at the maximum."""
        lo, hi = self.bin_edges[0], self.bin_edges[-1]
        if hi == lo:
            return 1.0
        return (self.mode - lo) / (hi - lo)


@dataclass
class RunRecord:
    """Time series and snapshots produced by a simulation run.

    ``samples`` has columns (t, W, mean_h) with strictly increasing t.
    """

    samples: np.ndarray
    snapshots: List[Tuple[float, HeightField]]
    params_echo: dict
    seed: int
    final: Optional[HeightField] = None
    histogram: Optional[Histogram] = None
    extras: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def W(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def mean_h(self) -> np.ndarray:
        return self.samples[:, 2]

    def snapshot_at(self, t: float) -> HeightField:
        for ts, f in self.snapshots:
            if math.isclose(ts, t, rel_tol=1e-12, abs_tol=1e-12):
                return f
        raise KeyError(f"no snapshot at t={t}")


def roughness(field: HeightField) -> float:
    h = field.heights.astype(np.float64)
    return float(np.sqrt(np.mean((h - h.mean()) ** 2)))


def height_histogram(field: HeightField, n_bins: int = DEFAULT_BINS) -> Histogram:
    """Uniform-bin height distribution over [min h, max h].

    A constant field gets a single zero-width bin holding every site and is
    flagged ``degenerate``.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    h = field.heights.astype(np.float64)
    lo, hi = float(h.min()), float(h.max())
    if lo == hi:
        counts = np.array([h.size], dtype=np.int64)
        return Histogram(np.array([lo, hi]), counts, np.array([1.0]), degenerate=True)
    counts, edges = np.histogram(h, bins=n_bins, range=(lo, hi))
    return Histogram(edges, counts.astype(np.int64), counts / counts.sum())


def fit_exponent(samples, t_lo: float, t_hi: float) -> Tuple[float, float]:
    """Least-squares slope of log W against log t on ``t_lo <= t <= t_hi``.

    ``samples`` is any array-like whose first two columns are (t, W).
    Returns ``(beta, stderr)``.
    """
    s = np.asarray(samples, dtype=np.float64)
    t, w = s[:, 0], s[:, 1]
    sel = (t >= t_lo) & (t <= t_hi)
    if sel.sum() < 5:
        raise FitError(f"need at least 5 samples in [{t_lo}, {t_hi}], got {int(sel.sum())}")
    t, w = t[sel], w[sel]
    if (w <= 0).any() or (t <= 0).any():
        raise FitError("non-positive t or W inside the fit window")
    x, y = np.log(t), np.log(w)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    beta = np.sum((x - xm) * (y - ym)) / sxx
    resid = y - ym - beta * (x - xm)
    n = x.size
    stderr = math.sqrt(max(np.sum(resid**2), 0.0) / (n - 2) / sxx)
    return float(beta), stderr


def mode_wavenumber(k_index: int, L: int, dx: float = 1.0) -> float:
    return 2.0 * math.pi * k_index / (L * dx)


def fourier_mode(field: HeightField, k_index: int) -> float:
    """Amplitude of the fluctuation's Fourier coefficient at index ``k_index``."""
    L = field.L
    if not (0 <= k_index <= L // 2):
        raise ValueError(f"k_index must lie in [0, {L // 2}]")
    h = field.heights.astype(np.float64)
    coeff = np.fft.rfft(h - h.mean())[k_index] / L
    return float(abs(coeff))


def peak_statistics(field: HeightField, rel_threshold: float = 0.5) -> Tuple[int, float]:
    """Count cyclic runs of sites above a relative height threshold.

    Returns ``(n_peaks, h_max / mean_h)``; a constant field gives ``(0, 1.0)``.
    """
    if not (0 < rel_threshold < 1):
        raise ValueError("rel_threshold must lie in (0, 1)")
    h = field.heights.astype(np.float64)
    lo, hi = h.min(), h.max()
    if lo == hi:
        return 0, 1.0
    above = h >= lo + rel_threshold * (hi - lo)
    n_peaks = int(np.count_nonzero(above & ~np.roll(above, 1)))
    mean = h.mean()
    if mean <= 0:
        raise ValueError("max_over_mean needs a positive mean height")
    return n_peaks, float(hi / mean)


def log_sample_times(t_first: float, t_end: float, per_decade: int = 20) -> np.ndarray:
    """Times ``10**(k/per_decade)`` inside [t_first, t_end], plus both ends."""
    k0 = math.ceil(per_decade * math.log10(t_first) - 1e-9)
    k1 = math.floor(per_decade * math.log10(t_end) + 1e-9)
    grid = 10.0 ** (np.arange(k0, k1 + 1) / per_decade)
    return np.unique(np.concatenate(([t_first], grid, [t_end])))


def checkpoints(times: Sequence[float], unit: float, last: int) -> np.ndarray:
    """Map times to integer counts of ``unit`` (steps or particles), deduplicated."""
    n = np.rint(np.asarray(times, dtype=np.float64) / unit).astype(np.int64)
    return np.unique(np.clip(n, 0, last))
