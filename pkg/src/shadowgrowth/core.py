"""Shared domain types, parameter validation and the seeded random source."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence, Union

import numpy as np

MIN_SITES = 4


class ParameterError(ValueError):
    """Raised when a parameter set violates one of its invariants."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field_name = field_name


class SideRule(str, enum.Enum):
    FALL_DOWN = "fall_down"
    REMOVE = "remove"


class ContinuumModel(str, enum.Enum):
    PURE_SHADOW = "pure_shadow"
    NONLINEAR_ANISO = "nonlinear"


@dataclass
class HeightField:
    """Periodic 1-D interface.

    Integer arrays hold lattice heights of the Monte-Carlo model, float arrays
    hold continuum heights. Integer indexing wraps modulo ``L``.
    """

    heights: np.ndarray
    dx: float = 1.0

    def __post_init__(self):
        h = np.asarray(self.heights)
        if h.ndim != 1:
            raise ParameterError("heights", "heights must be a 1-D array")
        if h.size < MIN_SITES:
            raise ParameterError("heights", f"L must be at least {MIN_SITES}, got {h.size}")
        if np.issubdtype(h.dtype, np.integer):
            h = h.astype(np.int64, copy=False)
            if (h < 0).any():
                raise ParameterError("heights", "discrete heights must be non-negative")
        else:
            h = h.astype(np.float64, copy=False)
            if not np.isfinite(h).all():
                raise ParameterError("heights", "heights must be finite")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise ParameterError("dx", "dx must be positive")
        self.heights = h

    @property
    def L(self) -> int:
        return self.heights.size

    @property
    def periodic(self) -> bool:
        return True

    @property
    def is_discrete(self) -> bool:
        return np.issubdtype(self.heights.dtype, np.integer)

    def __len__(self) -> int:
        return self.heights.size

    def __getitem__(self, i: int):
        return self.heights[i % self.heights.size]

    def copy(self) -> "HeightField":
        return HeightField(self.heights.copy(), self.dx)


def flat_field(L: int, h0: Union[int, float] = 0, dx: float = 1.0) -> HeightField:
    """Constant interface of ``L`` sites at height ``h0``.

    An integer ``h0`` gives a lattice (int64) field, a float gives a real one.
    """
    if L < MIN_SITES:
        raise ParameterError("L", f"L must be at least {MIN_SITES}, got {L}")
    dtype = np.int64 if isinstance(h0, (int, np.integer)) else np.float64
    return HeightField(np.full(L, h0, dtype=dtype), dx)


class RandomSource:
    """Single-owner wrapper around a PCG64 generator.

    PCG64 has a published reference specification, so a given seed yields the
    same stream on every platform.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform01(self, size=None):
        return self._gen.random(size)

    def uniform_pm1(self, size=None):
        """Uniform draws on [-1, 1)."""
        return self._gen.uniform(-1.0, 1.0, size)

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size)


def _check_times(t_end: float, snapshot_times: Sequence[float]):
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ParameterError("t_end", "t_end must be positive")
    for s in snapshot_times:
        if not (0 <= s <= t_end):
            raise ParameterError("snapshot_times", f"snapshot time {s} outside [0, t_end]")


@dataclass
class DiscreteParams:
    L: int = 1024
    theta_max: float = math.radians(60.0)
    side_rule: SideRule = SideRule.FALL_DOWN
    t_end: float = 100.0
    snapshot_times: Sequence[float] = field(default_factory=tuple)
    seed: int = 0
    samples_per_decade: int = 20

    def __post_init__(self):
        self.side_rule = SideRule(self.side_rule)
        self.snapshot_times = tuple(float(s) for s in self.snapshot_times)

    def validate(self) -> "DiscreteParams":
        if int(self.L) != self.L or self.L < MIN_SITES:
            raise ParameterError("L", f"L must be an integer >= {MIN_SITES}")
        if not (0 <= self.theta_max < math.pi / 2):
            raise ParameterError("theta_max", "theta_max must be below π/2 and non-negative")
        _check_times(self.t_end, self.snapshot_times)
        if self.samples_per_decade < 1:
            raise ParameterError("samples_per_decade", "samples_per_decade must be positive")
        return self

    def to_dict(self) -> dict:
        return _as_dict(self)


@dataclass
class ContinuumParams:
    L: int = 1024
    dx: float = 1.0
    dt: float = 0.01
    R: float = 1.0
    nu: float = 1.0
    D: float = 1.0
    model: ContinuumModel = ContinuumModel.NONLINEAR_ANISO
    g_exponent: float = 2.0
    t_end: float = 100.0
    snapshot_times: Sequence[float] = field(default_factory=tuple)
    seed: int = 0
    exposure_window: Optional[int] = None
    samples_per_decade: int = 20

    def __post_init__(self):
        self.model = ContinuumModel(self.model)
        self.snapshot_times = tuple(float(s) for s in self.snapshot_times)

    @classmethod
    def pure_shadow(cls, **overrides) -> "ContinuumParams":
        """Reference set for the pure shadowing equation: dt=0.05, dx=1, R=1."""
        kw = dict(model=ContinuumModel.PURE_SHADOW, dt=0.05, dx=1.0, R=1.0, D=1.0, nu=0.0)
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def nonlinear(cls, **overrides) -> "ContinuumParams":
        """Reference set for the nonlinear model: dt=0.01, dx=1, D=1, nu=1, R=1."""
        kw = dict(model=ContinuumModel.NONLINEAR_ANISO, dt=0.01, dx=1.0, R=1.0, D=1.0, nu=1.0)
        kw.update(overrides)
        return cls(**kw)

    @property
    def window(self) -> int:
        return self.L // 2 if self.exposure_window is None else int(self.exposure_window)

    def validate(self) -> "ContinuumParams":
        if int(self.L) != self.L or self.L < MIN_SITES:
            raise ParameterError("L", f"L must be an integer >= {MIN_SITES}")
        for name in ("dt", "dx", "R"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(name, f"{name} must be positive")
        for name in ("nu", "D"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ParameterError(name, f"{name} must be non-negative")
        if not math.isfinite(self.g_exponent):
            raise ParameterError("g_exponent", "g_exponent must be finite")
        if not (1 <= self.window <= self.L // 2):
            raise ParameterError("exposure_window", "exposure_window must lie in [1, L/2]")
        _check_times(self.t_end, self.snapshot_times)
        if self.samples_per_decade < 1:
            raise ParameterError("samples_per_decade", "samples_per_decade must be positive")
        return self

    def to_dict(self) -> dict:
        return _as_dict(self)


def _as_dict(params) -> dict:
    out = {}
    for f in fields(params):
        v = getattr(params, f.name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def validate(params: Union[DiscreteParams, ContinuumParams]):
    """Check every invariant of ``params`` and return it unchanged."""
    return params.validate()
