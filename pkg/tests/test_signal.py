import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from encoded_excitation.rng import trial_rng
from encoded_excitation.signal import (
    FrequencyGrid,
    PhaseCode,
    SpectralAmplitude,
    TemporalMode,
    TimeGrid,
    apply_spectral_phase,
    chip_phase_mask,
    default_frequency_grid,
    default_time_grid,
    encode,
    encoded_temporal_closed_form,
    intensity_trace,
    normalize,
    rect_spectrum,
    sinc,
    sinc_temporal,
    to_time,
)

W = 1.5


def test_frequency_grid_samples_and_symmetry():
    g = FrequencyGrid(0.0, 0.25, 5)
    np.testing.assert_allclose(g.omega, [-0.5, -0.25, 0.0, 0.25, 0.5])
    assert g.edges == pytest.approx((-0.625, 0.625))
    with pytest.raises(ValueError):
        FrequencyGrid(0.0, 0.0, 5)


def test_time_grid_spanning_uses_multiples_of_dt():
    g = TimeGrid.spanning(-1.0, 1.0, 0.1)
    assert g.t[0] == pytest.approx(-1.0)
    assert g.t[-1] == pytest.approx(1.0)
    assert np.any(np.isclose(g.t, 0.0, atol=1e-15))


def test_rect_spectrum_values_and_mass():
    grid = default_frequency_grid(W, pad_cells=10)
    xi = rect_spectrum(W, 2.0, grid)
    centre = np.argmin(np.abs(grid.omega))
    assert xi.values[centre] == pytest.approx(math.sqrt(2.0) / W)
    outside = np.abs(grid.omega) >= 0.51 * W
    assert np.all(xi.values[outside] == 0)
    assert xi.mass == pytest.approx(2.0 / W, rel=1e-12)


def test_rect_spectrum_rejects_narrow_grid():
    with pytest.raises(ValueError, match="narrower than the band"):
        rect_spectrum(W, 1.0, FrequencyGrid(0.0, 0.01, 11))


def test_sinc_temporal_peak_and_zeros():
    tgrid = TimeGrid(-2 * math.pi / W, 2 * math.pi / W / 100, 201)
    mode = sinc_temporal(W, 4.0, tgrid)
    assert mode.values[100].real == pytest.approx(2.0)
    assert abs(mode.values[0]) < 1e-12
    assert abs(mode.values[-1]) < 1e-12
    assert mode.full_mass == pytest.approx(2 * math.pi * 4.0 / W)


def test_to_time_of_rect_matches_sinc():
    # to_time carries the unitary 1/sqrt(2 pi); the printed sinc form does not
    tgrid = TimeGrid.spanning(-300.0, 300.0, 0.01)
    xi = rect_spectrum(W, 1.0, default_frequency_grid(W))
    got = to_time(xi, tgrid).values * math.sqrt(2 * math.pi)
    want = sinc_temporal(W, 1.0, tgrid).values
    assert np.max(np.abs(got - want)) < 1e-9


def test_to_time_parseval():
    tgrid = TimeGrid.spanning(-20000.0, 20000.0, 0.5)
    xi = rect_spectrum(W, 1.0, default_frequency_grid(W))
    mode = to_time(xi, tgrid)
    # sinc^2 tails beyond |t| = L hold 2 / (pi W L) of the mass
    tail = 2 / (np.pi * W * 20000.0)
    assert mode.grid_mass == pytest.approx(xi.mass * (1 - tail), rel=1e-6)


def test_to_time_single_chip_is_flat_with_linear_phase():
    grid = default_frequency_grid(W, 5)
    code = PhaseCode.for_bandwidth(np.zeros(5), W)
    chip = np.floor((grid.omega + W / 2) / code.chip_width + 1e-9).astype(int)
    values = np.where(chip == 4, 1.0, 0.0)
    xi = SpectralAmplitude(grid, values, 1.0, W, code.chip_width)
    tgrid = TimeGrid.spanning(-1.0, 1.0, 0.01)
    mode = to_time(xi, tgrid)
    centre = 2 * code.chip_width
    env = mode.values * np.exp(1j * centre * tgrid.t)
    assert np.ptp(np.abs(env)) / np.abs(env).max() < 0.01
    assert np.ptp(np.angle(env)) < 1e-9


def test_to_time_rejects_under_resolved_code():
    code = PhaseCode.for_bandwidth(np.zeros(7), W)
    coarse = default_frequency_grid(W, 7, subdivision=4)
    xi = encode(rect_spectrum(W, 1.0, coarse), code)
    with pytest.raises(ValueError, match="under-resolves"):
        to_time(xi, TimeGrid.spanning(-1, 1, 0.1))


def test_chip_mask_three_chips():
    code = PhaseCode.for_bandwidth([0.0, math.pi, 0.0], 3.0)
    grid = default_frequency_grid(3.0, 3, pad_cells=4)
    theta = chip_phase_mask(code, grid)
    centre = (grid.omega >= -0.5) & (grid.omega < 0.5)
    assert np.all(theta[centre] == math.pi)
    assert np.all(theta[~centre] == 0)
    assert np.count_nonzero(centre) == 16


def test_chip_mask_even_puts_resonance_on_boundary():
    code = PhaseCode.for_bandwidth([0.0, math.pi], 2.0)
    grid = default_frequency_grid(2.0, 2)
    theta = chip_phase_mask(code, grid)
    np.testing.assert_array_equal(theta[grid.omega < 0], 0.0)
    np.testing.assert_array_equal(theta[grid.omega > 0], math.pi)
    np.testing.assert_allclose(code.chip_indices(), [-0.5, 0.5])


def test_zero_code_mask_and_identity_phase():
    code = PhaseCode.for_bandwidth(np.zeros(7), W)
    xi = rect_spectrum(W, 1.0, default_frequency_grid(W, 7))
    assert np.all(chip_phase_mask(code, xi.grid) == 0)
    np.testing.assert_array_equal(encode(xi, code).values, xi.values)


def test_binary_chips_flip_sign():
    code = PhaseCode.for_bandwidth([0.0, math.pi, 0.0], W)
    xi = rect_spectrum(W, 1.0, default_frequency_grid(W, 3))
    out = encode(xi, code)
    flipped = chip_phase_mask(code, xi.grid) == math.pi
    np.testing.assert_allclose(out.values[flipped], -xi.values[flipped], atol=1e-15)


def test_apply_phase_rejects_grid_mismatch():
    xi = rect_spectrum(W, 1.0, default_frequency_grid(W))
    with pytest.raises(ValueError, match="grids differ"):
        apply_spectral_phase(xi, np.zeros(xi.grid.count + 1))


@settings(max_examples=60, deadline=None)
@given(
    n0=st.integers(1, 65),
    seed=st.integers(0, 2**32),
    peak=st.floats(0.01, 100.0),
)
def test_encoding_preserves_norm(n0, seed, peak):
    rng = np.random.default_rng(seed)
    code = PhaseCode.for_bandwidth(rng.uniform(-np.pi, np.pi, n0), W)
    xi = rect_spectrum(W, peak, default_frequency_grid(W, n0, pad_cells=3))
    out = encode(xi, code)
    assert abs(out.norm - xi.norm) <= 1e-12 * xi.norm


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), count=st.integers(1, 400))
def test_arbitrary_phase_is_unitary(seed, count):
    rng = np.random.default_rng(seed)
    grid = FrequencyGrid(0.0, 0.01, count)
    xi = SpectralAmplitude(grid, rng.normal(size=count) + 1j * rng.normal(size=count), 1.0, 1.0)
    out = apply_spectral_phase(xi, rng.uniform(-50, 50, count))
    assert abs(out.norm - xi.norm) <= 1e-12 * xi.norm


def test_closed_form_zero_code_reduces_to_sinc():
    for n0 in (1, 3, 7, 31):
        code = PhaseCode.for_bandwidth(np.zeros(n0), W)
        tgrid = default_time_grid(1.0, W, n0)
        coded = encoded_temporal_closed_form(code, W, 1.0, tgrid).values
        plain = sinc_temporal(W, 1.0, tgrid).values
        assert np.max(np.abs(coded - plain)) <= 1e-9


def test_closed_form_comb_is_periodic():
    code = PhaseCode.random_binary(7, W, trial_rng(3, 0))
    tgrid = default_time_grid(1.0, W, 7)
    t = tgrid.t
    from encoded_excitation.signal import _comb

    np.testing.assert_allclose(_comb(code, t + code.period), _comb(code, t), atol=1e-9)


def test_closed_form_rejects_even_and_mismatch():
    tgrid = TimeGrid.spanning(-1, 1, 0.1)
    with pytest.raises(ValueError, match="to_time"):
        encoded_temporal_closed_form(PhaseCode.for_bandwidth(np.zeros(4), W), W, 1.0, tgrid)
    with pytest.raises(ValueError, match="bandwidth"):
        encoded_temporal_closed_form(PhaseCode.for_bandwidth(np.zeros(3), W), 2 * W, 1.0, tgrid)


@pytest.mark.parametrize("n0", [3, 5, 7, 31, 63])
def test_closed_form_matches_transform(n0):
    # cells are integrated exactly, so the two paths agree far inside 1e-3 of peak
    tgrid = default_time_grid(1.0, W, n0)
    fgrid = default_frequency_grid(W, n0)
    worst = 0.0
    for i in range(20):
        code = PhaseCode.random_binary(n0, W, trial_rng(11, i, stream=n0))
        closed = encoded_temporal_closed_form(code, W, 1.0, tgrid).values / math.sqrt(2 * np.pi)
        path = to_time(encode(rect_spectrum(W, 1.0, fgrid), code), tgrid).values
        worst = max(worst, np.max(np.abs(closed - path)))
    assert worst <= 1e-3 / math.sqrt(2 * np.pi)


def test_default_time_grid_tiles_comb_period():
    for n0 in (3, 31, 63):
        g = default_time_grid(1.0, W, n0)
        steps = 2 * np.pi / (W / n0) / g.dt
        assert steps == pytest.approx(round(steps), abs=1e-9)
        assert g.dt <= 0.01
        assert g.t[0] <= -60 and g.t_end >= 30


def test_normalize_modes():
    tgrid = default_time_grid(1.0, W)
    mode = sinc_temporal(W, 1.0, tgrid)
    unit = normalize(mode)
    assert unit.normalized
    assert unit.grid_mass == pytest.approx(1.0, rel=1e-9)
    np.testing.assert_allclose(normalize(unit).values, unit.values, rtol=1e-12)
    np.testing.assert_allclose(normalize(mode.scaled(5.0)).values, unit.values, rtol=1e-12)
    line = normalize(mode, "line")
    assert line.full_mass == 1.0
    assert 0 < line.truncated_mass < 0.02
    with pytest.raises(ValueError):
        normalize(TemporalMode(tgrid, np.zeros(tgrid.count)))
    with pytest.raises(ValueError):
        normalize(TemporalMode(tgrid, np.ones(tgrid.count)), "line")


def test_intensity_trace():
    tgrid = default_time_grid(1.0, W, 31)
    plain = normalize(sinc_temporal(W, 1.0, tgrid))
    trace = intensity_trace(plain)
    assert np.sum(trace) * tgrid.dt == pytest.approx(1.0)
    assert abs(tgrid.t[np.argmax(trace)]) < tgrid.dt
    code = PhaseCode.random_binary(31, W, trial_rng(0, 0))
    coded = normalize(encoded_temporal_closed_form(code, W, 1.0, tgrid))
    assert intensity_trace(coded).max() < trace.max()


def test_spreading_trend_in_mean_peak_intensity():
    peaks = []
    for n0 in (3, 5, 7, 31, 63):
        tgrid = default_time_grid(1.0, W, n0)
        vals = []
        for i in range(30):
            code = PhaseCode.random_binary(n0, W, trial_rng(5, i, stream=n0))
            vals.append(intensity_trace(normalize(encoded_temporal_closed_form(code, W, 1.0, tgrid), "line")).max())
        peaks.append(np.mean(vals))
    assert all(a >= b for a, b in zip(peaks, peaks[1:]))


def test_phase_code_validation():
    with pytest.raises(ValueError):
        PhaseCode(np.array([]), 1.0)
    with pytest.raises(ValueError):
        PhaseCode(np.zeros(3), 0.0)
    code = PhaseCode.for_bandwidth([0, np.pi, 0], 3.0)
    assert code.is_binary and code.n0 == 3 and code.bandwidth == pytest.approx(3.0)
    assert not PhaseCode.for_bandwidth([0.1], 1.0).is_binary


def test_sinc_definition():
    assert sinc(0.0) == 1.0
    assert sinc(np.pi) == pytest.approx(0.0, abs=1e-16)
