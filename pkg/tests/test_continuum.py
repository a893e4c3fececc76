import math

import numpy as np
import pytest

from shadowgrowth.analysis import peak_statistics, roughness
from shadowgrowth.continuum import (
    DispersionParams,
    SchemeState,
    StabilityError,
    critical_wavenumber,
    linear_growth_rate,
    mode_wavenumber,
    nearest_mode_index,
    nonlinear_increment,
    run_continuum,
    seeded_mode_growth,
    step_nonlinear,
    step_pure_shadow,
)
from shadowgrowth.core import ContinuumParams, HeightField, ParameterError, RandomSource, flat_field

from conftest import random_field

PI = math.pi


def test_pure_shadow_flat_growth():
    p = ContinuumParams.pure_shadow(L=32, D=0.0)
    st = SchemeState.start(flat_field(32, 2.0))
    rng = RandomSource(0)
    for _ in range(40):
        st = step_pure_shadow(st, p, rng)
    np.testing.assert_allclose(st.field.heights, 2.0 + 40 * 0.05, rtol=0, atol=1e-12)
    assert roughness(st.field) < 1e-12
    assert st.t == pytest.approx(2.0)


def test_pure_shadow_mean_rate_on_rough_field(rng):
    p = ContinuumParams.pure_shadow(L=64, D=0.0)
    st = SchemeState.start(random_field(rng, 64, "walk", scale=20))
    r = RandomSource(1)
    m0 = st.field.heights.mean()
    for n in range(1, 201):
        st = step_pure_shadow(st, p, r)
        assert st.field.heights.mean() == pytest.approx(m0 + n * p.dt * p.R, rel=1e-9)


def test_stepper_model_mismatch():
    st = SchemeState.start(flat_field(8, 0.0))
    with pytest.raises(ParameterError):
        step_nonlinear(st, ContinuumParams.pure_shadow(L=8), RandomSource(0))
    with pytest.raises(ParameterError):
        step_pure_shadow(st, ContinuumParams.nonlinear(L=8), RandomSource(0))


def test_nonlinear_flat_growth():
    p = ContinuumParams.nonlinear(L=32, D=0.0)
    st = SchemeState.start(flat_field(32, 0.0))
    rng = RandomSource(0)
    for _ in range(50):
        st = step_nonlinear(st, p, rng)
    np.testing.assert_allclose(st.field.heights, 50 * 0.01, atol=1e-12)
    assert roughness(st.field) < 1e-12


def test_nonlinear_spike_one_step_by_hand():
    A = 1.0
    h = np.zeros(8)
    h[3] = A
    p = ContinuumParams.nonlinear(L=8, D=0.0, R=0.0, nu=1.0, dt=0.01)
    # exposure by hand: blockers at the spike only, window 4
    omega = [
        PI - math.atan(A / 3),  # 0: spike 3 sites right
        PI - math.atan(A / 2),  # 1
        PI - math.atan(A / 1),  # 2
        PI,  # 3: the spike itself
        PI - math.atan(A / 1),  # 4
        PI - math.atan(A / 2),  # 5
        PI - math.atan(A / 3),  # 6: spike 3 sites left
        PI - 2 * math.atan(A / 4),  # 7: spike 4 sites away on both sides
    ]
    omega_bar = sum(omega) / 8
    expected = h.copy()
    expected[3] += (PI / omega_bar) ** 2 * 0.01 * (-2 * A)
    expected[2] += (omega[2] / omega_bar) ** 2 * 0.01 * A
    expected[4] += (omega[4] / omega_bar) ** 2 * 0.01 * A
    st = SchemeState.start(HeightField(h))
    np.testing.assert_allclose(st.profile_cache.omega, omega, atol=1e-15)
    st = step_nonlinear(st, p, RandomSource(0))
    np.testing.assert_allclose(st.field.heights, expected, atol=1e-15)
    assert st.field.heights.sum() != pytest.approx(A, abs=1e-6)


def test_nonlinear_spike_decays():
    h = np.zeros(16)
    h[5] = 4.0
    p = ContinuumParams.nonlinear(L=16, D=0.0, R=0.0)
    st = SchemeState.start(HeightField(h))
    rng = RandomSource(0)
    prev = st.field.heights.max()
    for _ in range(50):
        st = step_nonlinear(st, p, rng)
        assert st.field.heights[5] < prev
        prev = st.field.heights[5]


def test_scheme_locality(rng):
    p = ContinuumParams.nonlinear(L=32)
    f = random_field(rng, 32, "gauss")
    st = SchemeState.start(f)
    omega_hat = st.profile_cache.normalized
    eps = RandomSource(3).uniform_pm1(32)
    base = nonlinear_increment(f.heights, omega_hat, p, eps)
    i = 10
    other = f.heights.copy()
    other[[0, 5, 8, 12, 20, 31]] += 17.0
    moved = nonlinear_increment(other, omega_hat, p, eps)
    assert moved[i] == base[i]
    # the stepper is exactly h + increment with the pre-step exposure
    rng_a, rng_b = RandomSource(9), RandomSource(9)
    new = step_nonlinear(st, p, rng_a).field.heights
    np.testing.assert_array_equal(new, f.heights + nonlinear_increment(f.heights, omega_hat, p, rng_b.uniform_pm1(32)))


def test_noise_is_zero_mean():
    L, n = 16, 10_000
    p = ContinuumParams.nonlinear(L=L, R=0.0, nu=0.0, D=1.0)
    st = SchemeState.start(flat_field(L, 0.0))
    rng = RandomSource(4)
    incs = np.empty((n, L))
    for k in range(n):
        before = st.field.heights
        st = step_nonlinear(st, p, rng)
        incs[k] = st.field.heights - before
    mean = incs.mean(axis=0)
    se = incs.std(axis=0, ddof=1) / math.sqrt(n)
    assert (np.abs(mean) <= 5 * se).all()


def test_dispersion_examples():
    p = DispersionParams()
    k_star = critical_wavenumber(p)
    assert k_star == pytest.approx(1.4 / PI, rel=1e-15)
    assert k_star == pytest.approx(0.4456, abs=1e-4)
    assert linear_growth_rate(0.0, p) == 0.0
    assert linear_growth_rate(k_star, p) == pytest.approx(0.0, abs=1e-15)
    assert linear_growth_rate(k_star / 2, p) == pytest.approx(k_star**2 / 4, rel=1e-12)
    assert linear_growth_rate(k_star / 2, p) == pytest.approx(0.0496, abs=1e-4)
    assert critical_wavenumber(DispersionParams(R=2.0)) == pytest.approx(2 * k_star)
    assert critical_wavenumber(DispersionParams(nu=2.0)) == pytest.approx(k_star / 2)
    with pytest.raises(ValueError):
        critical_wavenumber(DispersionParams(nu=0.0))
    with pytest.raises(ValueError):
        linear_growth_rate(-1.0, p)


def test_dispersion_sign_structure():
    L = 256
    dp = DispersionParams()
    k_star = critical_wavenumber(dp)
    p = ContinuumParams.nonlinear(L=L, D=0.0)
    rates = {f: seeded_mode_growth(p, nearest_mode_index(f * k_star, L))[0] for f in (0.25, 0.5, 2.0)}
    assert rates[0.25] > 0 and rates[0.5] > 0 and rates[2.0] < 0


def test_nearest_mode_index():
    assert nearest_mode_index(mode_wavenumber(9, 256), 256) == 9
    assert nearest_mode_index(0.0, 256) == 1
    assert nearest_mode_index(100.0, 256) == 128


def test_run_pure_shadow_flat_noiseless():
    rec = run_continuum(ContinuumParams.pure_shadow(L=32, D=0.0, t_end=5.0))
    assert rec.W[-1] < 1e-12
    assert rec.mean_h[-1] == pytest.approx(5.0, rel=1e-12)
    assert rec.t[-1] == pytest.approx(5.0)


def test_run_records_samples_and_snapshots():
    p = ContinuumParams.nonlinear(L=32, t_end=2.0, snapshot_times=[0.0, 1.0, 2.0], seed=2)
    rec = run_continuum(p)
    assert np.all(np.diff(rec.t) > 0)
    assert [t for t, _ in rec.snapshots] == pytest.approx([0.0, 1.0, 2.0])
    assert rec.snapshots[0][1].heights.tolist() == [0.0] * 32
    assert rec.params_echo["model"] == "nonlinear"


def test_run_is_deterministic():
    p = ContinuumParams.nonlinear(L=32, t_end=3.0, seed=5)
    a, b = run_continuum(p), run_continuum(p)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.final.heights, b.final.heights)


def test_run_rejects_mismatched_initial():
    with pytest.raises(ParameterError):
        run_continuum(ContinuumParams.nonlinear(L=32, t_end=1.0), flat_field(16, 0.0))


def test_blowup_guard():
    p = ContinuumParams.nonlinear(L=32, dt=2.0, t_end=400.0)
    with pytest.raises(StabilityError) as exc:
        run_continuum(p)
    assert exc.value.step > 0
    assert exc.value.t == pytest.approx(exc.value.step * 2.0)


def test_stability_envelope_paper_parameters():
    rec = run_continuum(ContinuumParams.nonlinear(L=64, t_end=1000.0, seed=1))
    assert np.isfinite(rec.final.heights).all()
    assert rec.t[-1] == pytest.approx(1000.0)


def test_pure_shadow_peaks_coarsen():
    votes = 0
    for seed in range(10):
        rec = run_continuum(ContinuumParams.pure_shadow(L=128, t_end=100.0, snapshot_times=[10.0, 100.0], seed=seed))
        early = peak_statistics(rec.snapshot_at(10.0))[0]
        late = peak_statistics(rec.snapshot_at(100.0))[0]
        votes += late < early
    assert votes >= 6
