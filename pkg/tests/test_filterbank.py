import json
import math

import numpy as np
import pytest

from scatdecay.filterbank import (
    ConditionReport,
    MOTHERS,
    bandpass_mother,
    bank_lp_sum,
    build_bank,
    check_asymmetry,
    check_littlewood_paley,
    dyadic_term_grid,
    estimate_vanishing_order,
    even_morlet_mother,
    ideal_lp_sum,
    load_bank,
    make_mother,
    morlet_first_order_mother,
    morlet_mother,
    save_bank,
    shannon_mother,
)


# --- mother profiles -------------------------------------------------------


def test_morlet_vanishes_to_second_order_at_origin():
    m = morlet_mother(3.0, 1.0)
    assert m(0.0) == 0.0
    # symmetric difference quotient kills the quadratic term, leaving O(h^2)
    h = 1e-6
    assert abs((m(h) - m(-h)) / (2 * h)) < 1e-9


def test_morlet_peak_value():
    # exact closed form at the center: 1 - 10*exp(-9) for center 3, width 1
    m = morlet_mother(3.0, 1.0)
    assert float(m(3.0)) == pytest.approx(1.0 - 10.0 * math.exp(-9.0), abs=1e-15)
    assert float(m(3.0)) == pytest.approx(0.9987659019591332, abs=1e-15)


def test_first_order_morlet_peak_value():
    m = morlet_first_order_mother(3.0, 1.0)
    assert float(m(3.0)) == pytest.approx(1.0 - math.exp(-9.0), abs=1e-15)
    assert float(m(0.0)) == 0.0


def test_first_order_morlet_is_linear_near_zero():
    m = morlet_first_order_mother(3.0, 1.0)
    # ratio hat(w)/w stabilizes to a nonzero constant
    r1 = float(m(1e-5)) / 1e-5
    r2 = float(m(1e-6)) / 1e-6
    assert abs(r1 - r2) < 1e-4 * abs(r1)
    assert abs(r1) > 0.01


def test_even_morlet_is_even():
    m = even_morlet_mother(3.0, 1.0)
    w = np.linspace(0.01, 8.0, 50)
    assert np.array_equal(m(w), m(-w))


def test_shannon_band_is_half_open():
    m = shannon_mother()
    assert float(m(1.0)) == 0.0
    assert float(m(1.0 + 1e-9)) == pytest.approx(math.sqrt(2.0))
    assert float(m(2.0)) == pytest.approx(math.sqrt(2.0))
    assert float(m(2.0 + 1e-9)) == 0.0
    assert float(m(-1.5)) == 0.0


def test_bandpass_validates_parameters():
    with pytest.raises(ValueError):
        bandpass_mother(2.0, 1.0)
    with pytest.raises(ValueError):
        bandpass_mother(1.0, 2.0, amplitude=0.0)


def test_make_mother_registry():
    assert set(MOTHERS) == {
        "morlet",
        "morlet_first_order",
        "even_morlet",
        "shannon",
        "bandpass",
    }
    with pytest.raises(ValueError):
        make_mother("mexican_hat")
    with pytest.raises(ValueError):
        make_mother("morlet", sharpness=2.0)


def test_scaled_profile_doubles_argument():
    m = morlet_mother()
    f = m.scaled(-2)
    w = np.array([1.0, 3.0, -5.0])
    assert np.array_equal(f(w), m(w / 4.0))


# --- bank construction -----------------------------------------------------


def test_default_finest_octave():
    bank = build_bank(shannon_mother(), 0, 256)
    assert bank.j_min == -7
    assert list(bank.scales) == list(range(-7, 1))


def test_filters_sample_dilated_mother():
    bank = build_bank(morlet_mother(), 0, 64)
    w = np.arange(-32, 32, dtype=float)
    for j in bank.scales:
        expected = bank.mother(w * 2.0**j)
        assert np.array_equal(bank.filters[j].coeffs.real, expected)
        assert np.all(bank.filters[j].coeffs.imag == 0.0)


def test_dilation_covariance_is_bitwise():
    # psi_hat_{j+1}(w) and psi_hat_j(2w) are the same floats
    bank = build_bank(morlet_mother(), 0, 128)
    w = np.arange(1, 32)
    for j in range(bank.j_min, bank.j_max):
        a = bank.filters[j + 1].coeffs[w + 64]
        b = bank.filters[j].coeffs[2 * w + 64]
        assert np.array_equal(a, b)


def test_validated_band_shannon():
    bank = build_bank(shannon_mother(), 0, 256)
    assert bank.validated_band == (2, 127)


def test_validated_band_morlet():
    bank = build_bank(morlet_mother(), 0, 256)
    assert bank.validated_band == (3, 127)


def test_validated_band_shrinks_with_coarse_floor():
    # dropping the fine octaves uncovers the top of the spectrum
    full = build_bank(shannon_mother(), 0, 256)
    clipped = build_bank(shannon_mother(), 0, 256, j_min=-4)
    assert clipped.validated_band is not None
    assert clipped.validated_band[0] == full.validated_band[0]
    assert clipped.validated_band[1] < full.validated_band[1]


def test_empty_octave_range_rejected():
    with pytest.raises(ValueError):
        build_bank(shannon_mother(), 0, 64, j_min=1)


# --- converged dyadic sums -------------------------------------------------


def test_shannon_ideal_sum_is_one_everywhere():
    # sqrt(2)^2 lands one ulp above 2, so "exactly 1" means within an ulp
    vals = ideal_lp_sum(shannon_mother(), np.geomspace(0.25, 100.0, 300))
    assert np.max(np.abs(vals - 1.0)) <= 4e-16


def test_ideal_sum_scale_invariance_bitwise():
    m = morlet_mother()
    w = np.geomspace(1.0, 2.0, 41)
    assert np.array_equal(ideal_lp_sum(m, w), ideal_lp_sum(m, 2.0 * w))
    assert np.array_equal(ideal_lp_sum(m, w), ideal_lp_sum(m, 16.0 * w))


def test_term_grid_masks_by_window():
    js, p, m = dyadic_term_grid(shannon_mother(), np.array([3.0]))
    # exactly one octave catches 3.0: j = -1 puts it at 1.5
    hot = np.flatnonzero(p[:, 0])
    assert js[hot].tolist() == [-1]
    assert p[hot, 0] == pytest.approx([2.0])
    assert np.all(m == 0.0)


def test_term_grid_rejects_nonpositive():
    with pytest.raises(ValueError):
        dyadic_term_grid(shannon_mother(), np.array([0.0, 1.0]))


def test_bank_sum_matches_ideal_inside_validated_band():
    bank = build_bank(morlet_mother(), 0, 256)
    lo, hi = bank.validated_band
    w = np.arange(lo, hi + 1, dtype=float)
    assert np.max(np.abs(bank_lp_sum(bank, w) - ideal_lp_sum(bank.mother, w))) <= 1e-3


# --- condition checks ------------------------------------------------------


def test_littlewood_paley_shannon_margin_is_zero_to_roundoff():
    report = check_littlewood_paley(build_bank(shannon_mother(), 0, 256))
    assert report.passed
    assert report.margin == pytest.approx(0.0, abs=4e-16)
    assert report.witness_freq == 2.0


def test_littlewood_paley_morlet():
    report = check_littlewood_paley(build_bank(morlet_mother(), 0, 256))
    assert report.passed
    assert 0.44 < report.margin < 0.46


def test_littlewood_paley_rejects_inflated_amplitude():
    # 1.1x the tight octave indicator overshoots: margin 1 - 1.21
    loud = bandpass_mother(1.0, 2.0, amplitude=1.1 * math.sqrt(2.0))
    report = check_littlewood_paley(build_bank(loud, 0, 256))
    assert not report.passed
    assert report.margin == pytest.approx(-0.21, abs=1e-12)


def test_asymmetry_shannon():
    report = check_asymmetry(build_bank(shannon_mother(), 0, 256))
    assert report.passed
    assert report.margin == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_asymmetry_morlet():
    report = check_asymmetry(build_bank(morlet_mother(), 0, 256))
    assert report.passed
    assert report.margin > 0.5


def test_asymmetry_even_profile_fails_with_zero_margin():
    report = check_asymmetry(build_bank(even_morlet_mother(), 0, 256))
    assert not report.passed
    assert report.margin == 0.0
    assert report.details["per_octave_ok"]


def test_order_estimate_morlet():
    report = estimate_vanishing_order(morlet_mother())
    assert report.passed
    assert not report.identically_zero
    assert 2.0 < report.slope < 2.02
    assert report.epsilon_hat == pytest.approx(report.slope - 1.0)


def test_order_estimate_rejects_first_order_morlet():
    report = estimate_vanishing_order(morlet_first_order_mother())
    assert not report.passed
    assert 1.01 < report.slope < 1.03
    assert report.epsilon_hat < 0.05


def test_order_estimate_even_morlet_passes():
    # symmetrization preserves the quadratic order
    report = estimate_vanishing_order(even_morlet_mother())
    assert report.passed
    assert 1.99 < report.slope < 2.02


def test_order_estimate_shannon_identically_zero():
    report = estimate_vanishing_order(shannon_mother())
    assert report.passed
    assert report.identically_zero
    assert report.residual == 0.0


def test_order_estimate_flags_inconsistent_indicator():
    # indicator with mass on the fit window contradicts its flag
    with pytest.raises(ValueError):
        estimate_vanishing_order(bandpass_mother(5e-4, 2.0))


def test_order_estimate_needs_six_points():
    with pytest.raises(ValueError):
        estimate_vanishing_order(morlet_mother(), n_points=5)


def test_condition_report_payload_round_trips_through_json():
    report = check_littlewood_paley(build_bank(morlet_mother(), 0, 64))
    payload = json.loads(json.dumps(report.to_payload()))
    assert payload["condition"] == "littlewood_paley"
    assert payload["passed"] is True
    assert isinstance(payload["margin"], float)


# --- serialization ---------------------------------------------------------


def test_bank_round_trip(tmp_path):
    bank = build_bank(morlet_mother(2.5, 0.8), -1, 128, j_min=-5)
    path = tmp_path / "bank.json"
    save_bank(path, bank)
    loaded = load_bank(path)
    assert loaded.j_max == -1 and loaded.j_min == -5 and loaded.n == 128
    assert loaded.mother.name == "morlet"
    assert loaded.mother.params == {"center": 2.5, "width": 0.8}
    for j in bank.scales:
        assert np.array_equal(loaded.filters[j].coeffs, bank.filters[j].coeffs)


def test_load_bank_rejects_unknown_mother(tmp_path):
    path = tmp_path / "bank.json"
    path.write_text(json.dumps({"mother": {"name": "haar", "params": {}}, "J": 0, "N": 64}))
    with pytest.raises(ValueError):
        load_bank(path)


def test_load_bank_rejects_missing_fields(tmp_path):
    path = tmp_path / "bank.json"
    path.write_text(json.dumps({"J": 0, "N": 64}))
    with pytest.raises(ValueError):
        load_bank(path)
