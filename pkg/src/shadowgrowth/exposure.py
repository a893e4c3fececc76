"""Exposure angle of a periodic interface.

Every site looks at an infinitely distant plane source. The open sky seen
from site ``i`` is the half plane ``[0, pi]`` minus the elevation angles of
the highest obstacles to its left and right within ``window`` sites.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .core import HeightField, ParameterError

# height lift of the ray-casting origin above the interface point
ORACLE_LIFT = 1e-9


class DegenerateExposureError(ArithmeticError):
    """The mean exposure is zero, so the profile cannot be normalized."""


@dataclass
class ExposureProfile:
    omega: np.ndarray
    omega_bar: float
    normalized: np.ndarray

    @classmethod
    def from_omega(cls, omega: np.ndarray) -> "ExposureProfile":
        omega_bar = float(np.mean(omega))
        if not omega_bar > 0:
            raise DegenerateExposureError("mean exposure angle is zero; field is pathological")
        return cls(omega, omega_bar, omega / omega_bar)


def _check_window(L: int, window: int):
    if not (1 <= window <= L // 2):
        raise ParameterError("window", f"window must lie in [1, {L // 2}], got {window}")


def exposure_angle(field: HeightField, i: int, window: Optional[int] = None) -> float:
    """Exposure angle of a single site, by direct scan over the window."""
    h = field.heights.astype(np.float64)
    L = h.size
    window = L // 2 if window is None else window
    _check_window(L, window)
    i %= L
    j = np.arange(1, window + 1)
    run = j * field.dx
    beta_r = max(0.0, float(np.max(np.arctan((h[(i + j) % L] - h[i]) / run))))
    beta_l = max(0.0, float(np.max(np.arctan((h[(i - j) % L] - h[i]) / run))))
    return min(max(np.pi - beta_l - beta_r, 0.0), np.pi)


def _blocking_naive(h: np.ndarray, window: int, dx: float, step: int) -> np.ndarray:
    beta = np.zeros(h.size)
    for j in range(1, window + 1):
        np.maximum(beta, np.arctan((np.roll(h, -step * j) - h) / (j * dx)), out=beta)
    return beta


def exposure_profile(field: HeightField, window: Optional[int] = None) -> ExposureProfile:
    """Reference O(L * window) exposure profile."""
    h = field.heights.astype(np.float64)
    window = h.size // 2 if window is None else window
    _check_window(h.size, window)
    beta_r = _blocking_naive(h, window, field.dx, 1)
    beta_l = _blocking_naive(h, window, field.dx, -1)
    omega = np.clip(np.pi - beta_l - beta_r, 0.0, np.pi)
    return ExposureProfile.from_omega(omega)


@numba.njit(cache=True)
def _slope(ext, a, b):
    return (ext[b] - ext[a]) / (b - a)


@numba.njit(cache=True)
def _right_horizon(h, W):
    """Index of the steepest obstacle in (i, i+W] for every site i.

    The periodic field is unrolled to length L+W and cut into blocks of W
    sites, so each window is a suffix of one block plus a prefix of the next.
    Suffix hulls are grown right-to-left (tangent found by the same walk the
    next push performs); prefix hulls are grown left-to-right and queried by
    binary search on the unimodal slope sequence.
    """
    L = h.size
    n = L + W
    ext = np.empty(n)
    for m in range(n):
        ext[m] = h[m % L]
    best = np.full(L, -1, np.int64)
    stack = np.empty(W + 1, np.int64)

    # suffix parts
    for bs in range(0, n, W):
        be = min(bs + W, n) - 1
        top = -1
        for s in range(be, bs - 1, -1):
            while top >= 1:
                a = stack[top]
                b = stack[top - 1]
                # drop a when s sees b at least as steeply
                if (ext[b] - ext[s]) * (a - s) >= (ext[a] - ext[s]) * (b - s):
                    top -= 1
                else:
                    break
            top += 1
            stack[top] = s
            i = s - 1
            if i < 0 or i >= L:
                continue
            k = top
            while k >= 1 and _slope(ext, i, stack[k - 1]) >= _slope(ext, i, stack[k]):
                k -= 1
            best[i] = stack[k]

    # prefix parts
    for c in range(W, n, W):
        top = -1
        for e in range(c, min(c + W - 1, n)):
            while top >= 1:
                a = stack[top]
                b = stack[top - 1]
                # drop a when it lies on or below the chord b -> e
                if (ext[a] - ext[b]) * (e - b) <= (ext[e] - ext[b]) * (a - b):
                    top -= 1
                else:
                    break
            top += 1
            stack[top] = e
            i = e - W
            if i < 0 or i >= L:
                continue
            lo = 0
            hi = top
            while lo < hi:
                mid = (lo + hi) // 2
                if _slope(ext, i, stack[mid + 1]) > _slope(ext, i, stack[mid]):
                    lo = mid + 1
                else:
                    hi = mid
            cand = stack[lo]
            if _slope(ext, i, cand) > _slope(ext, i, best[i]):
                best[i] = cand
    return best


@numba.njit(cache=True)
def _blocking_fast(h, W, dx):
    L = h.size
    best = _right_horizon(h, W)
    beta = np.zeros(L)
    for i in range(L):
        k = best[i]
        b = np.arctan((h[k % L] - h[i]) / ((k - i) * dx))
        beta[i] = b if b > 0.0 else 0.0
    return beta


def blocking_angles(h: np.ndarray, window: int, dx: float = 1.0):
    """Left and right blocking elevations computed by the hull sweep."""
    h = np.ascontiguousarray(h, dtype=np.float64)
    beta_r = _blocking_fast(h, window, dx)
    beta_l = _blocking_fast(h[::-1].copy(), window, dx)[::-1]
    return beta_l, beta_r


def exposure_profile_fast(field: HeightField) -> ExposureProfile:
    """Exposure profile with window L/2 in near-linear time."""
    beta_l, beta_r = blocking_angles(field.heights, field.L // 2, field.dx)
    omega = np.clip(np.pi - beta_l - beta_r, 0.0, np.pi)
    return ExposureProfile.from_omega(omega)


def compute_profile(field: HeightField, window: Optional[int] = None) -> ExposureProfile:
    """Dispatch to the fast sweep for the default window, the scan otherwise."""
    if window is None or window == field.L // 2:
        return exposure_profile_fast(field)
    return exposure_profile(field, window)


def _polyline(field: HeightField, i: int):
    """Interface vertices within L/2 of site i, relative to the ray origin."""
    L = field.L
    half = L // 2
    j = np.arange(-half, half + 1)
    x = j * field.dx
    y = field.heights[(i + j) % L].astype(np.float64) - (field[i] + ORACLE_LIFT)
    return x, y


def exposure_oracle(field: HeightField, i: int, n_rays: int = 100_000) -> float:
    """Exposure angle by casting ``n_rays`` rays over [0, pi].

    Obstacles are the straight segments joining neighbouring column tops
    (periodic images within L/2). A segment that does not contain the origin
    intercepts exactly the rays whose direction lies between the directions
    of its two endpoints, so each segment marks a contiguous block of rays.
    """
    if n_rays < 1000:
        raise ValueError("n_rays must be at least 1000")
    i %= field.L
    x, y = _polyline(field, i)
    half = field.L // 2
    diff = np.zeros(n_rays + 1, dtype=np.int64)
    scale = n_rays / np.pi
    for side in (1, -1):
        # mirror the left half so every segment sits at x >= 0
        idx = np.arange(half, 2 * half + 1) if side == 1 else np.arange(half, -1, -1)
        xs = side * x[idx]
        ys = y[idx]
        ang = np.arctan2(ys, xs)
        a0 = np.minimum(ang[:-1], ang[1:])
        a1 = np.maximum(ang[:-1], ang[1:])
        if side == -1:
            a0, a1 = np.pi - a1, np.pi - a0
        lo = np.ceil(a0 * scale - 0.5).astype(np.int64)
        hi = np.floor(a1 * scale - 0.5).astype(np.int64)
        lo = np.clip(lo, 0, n_rays)
        hi = np.clip(hi, -1, n_rays - 1)
        ok = lo <= hi
        np.add.at(diff, lo[ok], 1)
        np.add.at(diff, hi[ok] + 1, -1)
    blocked = np.cumsum(diff[:-1]) > 0
    return float(np.pi * (n_rays - blocked.sum()) / n_rays)


def exposure_oracle_bruteforce(field: HeightField, i: int, n_rays: int = 1000) -> float:
    """Per-ray parametric segment intersection; slow, for small checks only."""
    i %= field.L
    x, y = _polyline(field, i)
    ax, ay, bx, by = x[:-1], y[:-1], x[1:], y[1:]
    ex, ey = bx - ax, by - ay
    free = 0
    for k in range(n_rays):
        phi = (k + 0.5) * np.pi / n_rays
        dx_, dy_ = np.cos(phi), np.sin(phi)
        # solve origin + s*d = a + u*e
        den = dx_ * ey - dy_ * ex
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (ax * ey - ay * ex) / den
            u = (ax * dy_ - ay * dx_) / den
        hit = (den != 0) & (s >= 0) & (u >= 0) & (u <= 1)
        if not hit.any():
            free += 1
    return float(np.pi * free / n_rays)
