import warnings

import numpy as np
import pytest

from latticecond.bands import BandData
from latticecond.conductivity import (
    AmbiguousUnitError,
    ConductivityCurve,
    FermiTieWarning,
    InsufficientBandsError,
    NoPlateauError,
    band_crossings,
    bands_below,
    estimate_sigma0,
    find_plateaus,
    jump_locations,
    quantize,
    sigma_xy,
    sweep,
    zero_field_limit,
)
from latticecond.model import ModelParams


def fake_bands(means, sums):
    means = np.asarray(means, dtype=float)
    M = means.size
    return BandData(
        params=ModelParams(),
        lvalues=np.array([0]),
        kvalues=np.array([0.0]),
        energies=means[:, None],
        px_mean=np.asarray(sums, dtype=float)[:, None],
        y_mean=np.zeros((M, 1)),
        band_mean_energy=means,
        band_momentum_sum=np.asarray(sums, dtype=float),
    )


def curve(values, efields=None):
    values = np.asarray(values, dtype=float)
    efields = np.arange(values.size, dtype=float) if efields is None else np.asarray(efields)
    return ConductivityCurve(
        fermi_level=0.0,
        efield_values=efields,
        sigma_over_alpha=values,
        n_bands_included=np.zeros(values.size, dtype=int),
        band_means=np.zeros((values.size, 1)),
        band_sums=np.zeros((values.size, 1)),
    )


def test_sigma_below_all_bands_is_zero():
    assert sigma_xy(fake_bands([-3, -2, -1], [1, 2, 3]), -10) == 0.0


def test_sigma_sums_included_bands():
    b = fake_bands([-3, -2, -1], [1.5, 2.25, 4.0])
    assert sigma_xy(b, -2.5) == 1.5
    assert sigma_xy(b, -1.5) == 3.75


def test_insufficient_bands():
    with pytest.raises(InsufficientBandsError):
        sigma_xy(fake_bands([-3, -2], [1, 1]), -1.0)


def test_tie_excluded_with_warning():
    b = fake_bands([-3, -2, -1], [1, 2, 3])
    with pytest.warns(FermiTieWarning):
        assert bands_below(b, -2.0) == 1


def test_additivity_exact():
    rng = np.random.default_rng(0)
    means = np.sort(rng.uniform(-10, 0, 8))
    sums = rng.normal(size=8) * 13.78
    b = fake_bands(means, sums)
    between = 0.5 * (means[:-1] + means[1:])
    for n in range(1, 7):
        assert sigma_xy(b, between[n]) == sigma_xy(b, between[n - 1]) + sums[n]


def test_monotone_filling():
    b = fake_bands([-5, -4, -4, -1], [1, 1, 1, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FermiTieWarning)
        counts = [bands_below(b, ef) for ef in np.linspace(-6, -1, 51)]
    assert np.all(np.diff(counts) >= 0)


def test_estimate_sigma0_synthetic_levels():
    levels = [13.8, 27.5, 41.3]
    curves = [curve(np.repeat(levels, 4))]
    fit = estimate_sigma0(curves)
    assert fit.sigma0_over_alpha == pytest.approx(13.77, abs=0.01)
    assert fit.assignments == [[1, 2, 3]]
    assert fit.residual < 0.05


def test_estimate_sigma0_zero_only():
    with pytest.raises(NoPlateauError):
        estimate_sigma0([curve(np.zeros(10))])


def test_estimate_sigma0_no_fit():
    with pytest.raises(NoPlateauError):
        estimate_sigma0([curve(np.repeat([1.0, 1.3], 5))], max_multiple=3)


def test_estimate_sigma0_ambiguous():
    # 10.5 gives steps (1, 2) within 5%, 1.0 gives (10, 21) exactly
    with pytest.raises(AmbiguousUnitError):
        estimate_sigma0([curve(np.repeat([10.0, 21.0], 5))], max_multiple=21)


def test_submultiples_are_not_ambiguous():
    fit = estimate_sigma0([curve(np.repeat([7.0, 14.0, 21.0], 3))])
    assert fit.sigma0_over_alpha == pytest.approx(7.0)


@pytest.mark.parametrize("seed", range(5))
def test_estimate_sigma0_noisy(seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(5, 20)
    steps = np.repeat(rng.choice([-3, -1, 1, 2, 3, 4], size=6), 6)
    noise = rng.uniform(-0.005, 0.005, steps.size)
    fit = estimate_sigma0([curve(steps * u * (1 + noise))])
    assert abs(fit.sigma0_over_alpha - u) / u < 0.02


def test_quantize_and_jumps():
    u = 7.0
    values = np.repeat([0, 1, 3, 2], 5) * u
    fit = estimate_sigma0([curve(values)])
    (q,) = quantize([curve(values)], fit.sigma0_over_alpha)
    assert list(q.integer_steps) == list(np.repeat([0, 1, 3, 2], 5))
    assert q.jump_locations == [4.5, 9.5, 14.5]
    assert np.all(np.abs(q.sigma_over_alpha - q.integer_steps * u) <= 0.05 * u)


def test_quantize_leaves_steps_absent_when_off_grid():
    (q,) = quantize([curve([0, 7, 7, 10.5, 14])], 7.0)
    assert q.integer_steps is None


def test_find_plateaus_and_consistency():
    values = np.array([10, 10.02, 10.01, 20, 20.1, 20.05, 0.0, 0.0])
    runs = find_plateaus(values)
    assert [(r.start, r.stop) for r in runs] == [(0, 3), (3, 6), (6, 8)]
    for r in runs:
        seg = values[r.start : r.stop]
        assert np.ptp(seg) < max(0.01 * abs(seg.mean()), 1e-12) or np.ptp(seg) == 0
    assert jump_locations(np.arange(8.0), values) == [2.5, 5.5]


def test_band_crossings():
    E = np.array([0.0, 1.0, 2.0])
    means = np.array([[-2.0, 1.0], [0.0, 2.0], [2.0, 3.0]])
    assert band_crossings(E, means, 1.0) == [0.0, 1.5]


def test_zero_field_limit_linear():
    c = curve(3.0 + 2.0 * np.arange(1, 6), efields=np.arange(1, 6, dtype=float))
    assert zero_field_limit(c) == pytest.approx(3.0)


def test_sweep_single_field_below_bands():
    p = ModelParams(lam=1, Ux=100, Uy=100, N=2, Q=5, J=5)
    (c,) = sweep(p, [0.5], [-1e6], M=3)
    assert c.sigma_over_alpha.tolist() == [0.0]
    assert c.n_bands_included.tolist() == [0]
    assert c.band_means.shape == (1, 3)


def test_sweep_rejects_unsorted_fields():
    with pytest.raises(ValueError):
        sweep(ModelParams(N=2, Q=5, J=5), [1.0, 0.5], [0.0], M=2)


def test_sweep_recomputable_from_bands():
    p = ModelParams(lam=1, Ux=300, Uy=300, N=4, Q=9, J=9)
    E = [0.5, 1.0, 1.5]
    (c,) = sweep(p, E, [-564.5], M=6)
    for i in range(len(E)):
        n = c.n_bands_included[i]
        assert c.sigma_over_alpha[i] == (np.cumsum(c.band_sums[i])[n - 1] if n else 0.0)
        assert n == np.count_nonzero(c.band_means[i] < -564.5)
