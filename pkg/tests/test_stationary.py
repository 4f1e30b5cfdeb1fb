import json
import math

import numpy as np
import pytest

from scatdecay.decay import compute_constants
from scatdecay.filterbank import build_bank, shannon_mother
from scatdecay.signals import Spectrum, dft, energy, frequencies, gaussian_lowpass
from scatdecay.stationary import (
    expected_filter_energy,
    filter_spectrum,
    load_model,
    make_model,
    mc_layer_energy,
    save_model,
    simulate,
    stationary_bound,
)


# --- model construction ------------------------------------------------------


def test_white_density_is_flat():
    model = make_model("white", 64, sigma=1.5)
    assert np.all(model.density == 2.25)
    # per-sample variance is the density total
    assert model.autocov[0] == pytest.approx(64 * 2.25, rel=1e-12)
    assert np.max(np.abs(model.autocov[1:])) < 1e-10


def test_ar1_autocovariance_matches_formula():
    n, sigma, rho = 64, 1.0, 0.6
    model = make_model("ar1", n, sigma=sigma, rho=rho)
    k = np.arange(n)
    want = sigma**2 * (rho**k + rho ** (n - k)) / (1.0 + rho**n)
    assert np.max(np.abs(model.autocov - want)) < 1e-12
    assert np.min(model.density) > 0.0
    # density peaks at zero frequency for positive correlation
    w = frequencies(n)
    assert np.argmax(model.density) == int(np.flatnonzero(w == 0)[0])


def test_ar1_zero_correlation_has_unit_sample_variance():
    model = make_model("ar1", 32, sigma=1.0, rho=0.0)
    assert model.autocov[0] == pytest.approx(1.0, rel=1e-12)
    assert np.all(np.abs(model.density - 1.0 / 32) < 1e-15)


def test_filtered_noise_density():
    model = make_model(
        "filtered_noise", 64, sigma=2.0, filter={"name": "gaussian_lowpass", "a": 4.0}
    )
    w = frequencies(64)
    want = 4.0 * np.exp(-2.0 * (w / 4.0) ** 2)
    assert np.max(np.abs(model.density - want)) < 1e-12


def test_band_filter_spectrum():
    h = filter_spectrum("band", 32, lo=3, hi=6)
    w = np.abs(frequencies(32))
    assert np.array_equal(h.coeffs.real, ((w >= 3) & (w <= 6)).astype(float))


def test_model_validation():
    with pytest.raises(ValueError):
        make_model("pink", 64)
    with pytest.raises(ValueError):
        make_model("ar1", 64, rho=1.0)
    with pytest.raises(ValueError):
        make_model("white", 64, sigma=-1.0)
    with pytest.raises(ValueError):
        make_model("filtered_noise", 64, filter={"name": "comb"})
    with pytest.raises(ValueError):
        make_model("filtered_noise", 64)


def test_model_round_trip(tmp_path):
    model = make_model("ar1", 128, sigma=0.5, rho=0.3, mean=1.0)
    path = tmp_path / "model.json"
    save_model(path, model)
    loaded = load_model(path)
    assert loaded.kind == "ar1" and loaded.n == 128 and loaded.mean == 1.0
    assert np.array_equal(loaded.density, model.density)
    payload = json.loads(path.read_text())
    assert set(payload) == {"kind", "params", "N"}


# --- simulation ---------------------------------------------------------------


def test_simulation_is_reproducible_and_trialwise_stable():
    model = make_model("white", 64)
    a = simulate(model, 3, seed=42)
    b = simulate(model, 3, seed=42)
    c = simulate(model, 5, seed=42)
    for k in range(3):
        assert np.array_equal(a[k].samples, b[k].samples)
        assert np.array_equal(a[k].samples, c[k].samples)
    other = simulate(model, 1, seed=43)
    assert not np.array_equal(a[0].samples, other[0].samples)


def test_simulated_bin_variance_matches_density():
    n, trials = 128, 400
    model = make_model("white", n, sigma=1.0)
    spectra = np.stack([np.abs(dft(sig).coeffs) ** 2 for sig in simulate(model, trials, 0)])
    bin_var = spectra.mean(axis=0)
    # every bin has expectation 1; averaging over bins tightens the noise
    assert float(bin_var.mean()) == pytest.approx(1.0, abs=0.02)
    assert float(np.max(np.abs(bin_var - 1.0))) < 0.35


def test_simulated_sample_variance_is_density_total():
    n, trials = 128, 400
    model = make_model("white", n, sigma=1.0)
    values = np.concatenate([sig.samples.real for sig in simulate(model, trials, 1)])
    assert float(np.var(values)) == pytest.approx(n, rel=0.05)


def test_simulated_mean_is_respected():
    model = make_model("white", 64, sigma=0.1, mean=3.0)
    sims = simulate(model, 50, seed=2)
    grand = np.mean([np.mean(s.samples.real) for s in sims])
    assert grand == pytest.approx(3.0, abs=0.2)


def test_zero_variance_model_is_deterministic():
    model = make_model("white", 32, sigma=0.0, mean=2.0)
    (sig,) = simulate(model, 1, seed=9)
    assert np.max(np.abs(sig.samples - 2.0)) < 1e-12


def test_simulate_needs_positive_trials():
    with pytest.raises(ValueError):
        simulate(make_model("white", 32), 0, seed=0)


# --- exact filter energies ------------------------------------------------------


def test_expected_energy_single_bin_indicator():
    model = make_model("white", 64, sigma=1.0)
    coeffs = np.zeros(64, dtype=complex)
    coeffs[40] = 1.0  # one frequency bin
    assert expected_filter_energy(model, Spectrum(coeffs)) == pytest.approx(1.0)


def test_expected_energy_pure_mean():
    model = make_model("white", 64, sigma=0.0, mean=2.0)
    h = gaussian_lowpass(4.0, 64)  # h_hat(0) = 1
    assert expected_filter_energy(model, h) == pytest.approx(4.0, abs=1e-14)


def test_expected_energy_matches_monte_carlo():
    model = make_model("ar1", 64, sigma=1.0, rho=0.5)
    h = gaussian_lowpass(6.0, 64)
    want = expected_filter_energy(model, h)
    got = []
    for sig in simulate(model, 600, seed=5):
        coeffs = dft(sig).coeffs * h.coeffs
        got.append(float(np.sum(np.abs(coeffs) ** 2)))
    stderr = float(np.std(got, ddof=1) / math.sqrt(len(got)))
    assert abs(float(np.mean(got)) - want) < 3.0 * stderr


def test_expected_energy_length_mismatch():
    with pytest.raises(ValueError):
        expected_filter_energy(make_model("white", 64), gaussian_lowpass(2.0, 32))


# --- layer energies and the bound ------------------------------------------------


@pytest.fixture(scope="module")
def shannon_128():
    bank = build_bank(shannon_mother(), 0, 128)
    return bank, compute_constants(bank)


def test_layer_one_matches_analytic_value(shannon_128):
    bank, _ = shannon_128
    model = make_model("white", 128, sigma=1.0)
    est = mc_layer_energy(model, bank, 1, trials=300, seed=11)
    # modulus preserves energy, so layer 1 is a sum of exact identities
    want = sum(expected_filter_energy(model, bank.filters[j]) for j in bank.scales)
    assert abs(est.estimate - want) < 3.0 * est.stderr
    assert est.stderr < 0.05 * want


def test_mc_estimate_is_reproducible(shannon_128):
    bank, _ = shannon_128
    model = make_model("white", 128)
    a = mc_layer_energy(model, bank, 2, trials=50, seed=3)
    b = mc_layer_energy(model, bank, 2, trials=50, seed=3)
    assert a == b


def test_bound_dominates_white_noise_layers(shannon_128):
    bank, constants = shannon_128
    model = make_model("white", 128, sigma=1.0)
    for n in (2, 3):
        est = mc_layer_energy(model, bank, n, trials=250, seed=n)
        bound = stationary_bound(model, constants, n)
        assert est.estimate <= bound + 3.0 * est.stderr


def test_bound_closed_form_for_white():
    bank = build_bank(shannon_mother(), 0, 128)
    constants = compute_constants(bank)
    model = make_model("white", 128, sigma=2.0)
    width = constants.r * constants.a**2
    w = frequencies(128)
    want = float(np.sum(4.0 * (1.0 - np.exp(-2.0 * (w / width) ** 2))))
    assert stationary_bound(model, constants, 2) == pytest.approx(want, rel=1e-14)


def test_bound_ignores_the_mean(shannon_128):
    bank, constants = shannon_128
    flat = make_model("white", 128, sigma=1.0, mean=0.0)
    lifted = make_model("white", 128, sigma=1.0, mean=5.0)
    assert stationary_bound(flat, constants, 2) == stationary_bound(lifted, constants, 2)


def test_mc_layer_guards(shannon_128):
    bank, _ = shannon_128
    model = make_model("white", 128)
    with pytest.raises(ValueError):
        mc_layer_energy(model, bank, 5, trials=10, seed=0)
    with pytest.raises(ValueError):
        mc_layer_energy(model, bank, 2, trials=1, seed=0)
    with pytest.raises(ValueError):
        mc_layer_energy(make_model("white", 64), bank, 2, trials=10, seed=0)
    with pytest.raises(ValueError):
        stationary_bound(model, compute_constants(bank), 1)
