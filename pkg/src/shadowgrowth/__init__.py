"""Shadowed thin-film deposition: ballistic Monte-Carlo and continuum models."""

__version__ = "0.1.0"

from .analysis import (
    Histogram,
    RunRecord,
    fit_exponent,
    fourier_mode,
    height_histogram,
    peak_statistics,
    roughness,
)
from .continuum import (
    DispersionParams,
    SchemeState,
    StabilityError,
    critical_wavenumber,
    linear_growth_rate,
    run_continuum,
    step_nonlinear,
    step_pure_shadow,
)
from .core import (
    ContinuumModel,
    ContinuumParams,
    DiscreteParams,
    HeightField,
    ParameterError,
    RandomSource,
    SideRule,
    flat_field,
    validate,
)
from .discrete import ImpactEvent, apply_impact, run_discrete, trace_particle
from .exposure import (
    DegenerateExposureError,
    ExposureProfile,
    exposure_angle,
    exposure_oracle,
    exposure_profile,
    exposure_profile_fast,
)
