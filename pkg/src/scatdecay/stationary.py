"""Wide-sense stationary models and Monte Carlo checks of the decay bound.

A model is specified by its mean and its spectral density on the
centered grid, normalized so that the density at a bin equals the
variance of that bin of the transform,

    density(w) = E |X_hat(w)|^2,

with the convention that the autocovariance is the plain inverse
transform sum R(k) = sum_w density(w) exp(2 pi i w k / N); in particular
R(0) = sum_w density(w) is the per-sample variance.

Realizations are synthesized spectrally: independent complex Gaussians
of unit second moment at positive bins, mirrored to negative bins, real
Gaussians at the two self-paired bins.  Convolution energies then have
an exact expectation,

    E ||X * h||^2 = |mean * h_hat(0)|^2 + sum_w |h_hat(w)|^2 density(w),

which pins layer one of the scattering cascade analytically and leaves
Monte Carlo only for the deeper layers.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .decay import DecayConstants
from .filterbank import FilterBank
from .scattering import layer_energy_profile
from .signals import Signal, Spectrum, frequencies, gaussian_lowpass, idft

__all__ = [
    "StationaryModel",
    "MCEstimate",
    "filter_spectrum",
    "make_model",
    "simulate",
    "expected_filter_energy",
    "mc_layer_energy",
    "stationary_bound",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class StationaryModel:
    """Mean plus spectral density of a circular stationary process."""

    kind: str
    params: dict
    n: int
    mean: float
    density: np.ndarray
    autocov: np.ndarray

    def density_spectrum(self) -> Spectrum:
        return Spectrum(self.density.astype(np.complex128))


def _finalize(kind: str, params: dict, n: int, mean: float, density: np.ndarray):
    density = np.asarray(density, dtype=np.float64)
    if density.size != n:
        raise ValueError("density length does not match the grid")
    if np.min(density) < -1e-12:
        raise ValueError(f"spectral density is negative at its minimum {np.min(density)}")
    density = np.maximum(density, 0.0)
    autocov = idft(Spectrum(density.astype(np.complex128)), real=True).samples.real
    if np.max(np.abs(autocov)) > autocov[0] + 1e-10:
        raise ValueError("autocovariance exceeds its lag-zero value")
    density.setflags(write=False)
    autocov.setflags(write=False)
    return StationaryModel(
        kind=kind, params=params, n=n, mean=float(mean), density=density, autocov=autocov
    )


def filter_spectrum(name: str, n: int, **params) -> Spectrum:
    """Named filters available to filtered-noise models."""
    if name == "gaussian_lowpass":
        return gaussian_lowpass(float(params["a"]), n)
    if name == "band":
        lo, hi = float(params["lo"]), float(params["hi"])
        if not 0 <= lo < hi:
            raise ValueError(f"need 0 <= lo < hi, got ({lo}, {hi})")
        amp = float(params.get("amplitude", 1.0))
        w = np.abs(frequencies(n))
        return Spectrum((amp * ((w >= lo) & (w <= hi))).astype(np.complex128))
    raise ValueError(f"unknown filter {name!r}")


def make_model(kind: str, n: int, **params) -> StationaryModel:
    """Build one of the registered model families.

    white
        flat density sigma^2 at every bin (per-sample variance N sigma^2).
    ar1
        exponential autocovariance wrapped on the circle,
        R(k) = sigma^2 (rho^k + rho^(N-k)) / (1 + rho^N), so sigma^2 is
        the per-sample variance; density follows by transform.
    filtered_noise
        white noise of level sigma shaped by a named filter,
        density = sigma^2 |h_hat|^2.

    Every family accepts ``mean`` (default 0).
    """
    params = dict(params)
    mean = float(params.setdefault("mean", 0.0))
    sigma = float(params.setdefault("sigma", 1.0))
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if kind == "white":
        density = np.full(n, sigma**2)
    elif kind == "ar1":
        rho = float(params.get("rho", 0.0))
        params["rho"] = rho
        if not 0.0 <= rho < 1.0:
            raise ValueError(f"rho must be in [0, 1), got {rho}")
        k = np.arange(n, dtype=np.float64)
        autocov = sigma**2 * (rho**k + rho ** (n - k)) / (1.0 + rho**n)
        spec = np.fft.fftshift(np.fft.fft(autocov)) / n
        density = spec.real
    elif kind == "filtered_noise":
        spec = params.get("filter")
        if not isinstance(spec, dict) or "name" not in spec:
            raise ValueError("filtered_noise needs filter={'name': ..., ...}")
        h = filter_spectrum(spec["name"], n, **{k: v for k, v in spec.items() if k != "name"})
        density = sigma**2 * np.abs(h.coeffs) ** 2
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return _finalize(kind, params, n, mean, density)


def simulate(model: StationaryModel, trials: int, seed: int) -> list[Signal]:
    """Draw independent realizations, reproducibly.

    Per-trial generators come from spawning the seed sequence, so trial k
    of a run is the same signal no matter how many trials are requested.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    n = model.n
    w = frequencies(n)
    pos = w > 0
    root = np.sqrt(model.density)
    out = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        draw = rng.standard_normal((2, int(pos.sum())))
        coeffs = np.zeros(n, dtype=np.complex128)
        coeffs[pos] = root[pos] * (draw[0] + 1j * draw[1]) / math.sqrt(2.0)
        coeffs[1 : n // 2][::-1] = np.conj(coeffs[pos])  # negative bins, skip -N/2
        # the two self-paired bins carry real unit-variance draws
        coeffs[w == 0] = root[w == 0] * rng.standard_normal()
        coeffs[w == -(n // 2)] = root[w == -(n // 2)] * rng.standard_normal()
        sig = idft(Spectrum(coeffs), real=True)
        out.append(Signal(sig.samples.real + model.mean, real=True))
    return out


def expected_filter_energy(model: StationaryModel, h: Spectrum) -> float:
    """Exact E ||X * h||^2; no sampling involved."""
    if h.n != model.n:
        raise ValueError(f"filter length {h.n} does not match model grid {model.n}")
    w = frequencies(model.n)
    gain = np.abs(h.coeffs) ** 2
    dc = float(np.abs(h.coeffs[w == 0][0]))
    return float((model.mean * dc) ** 2 + np.sum(gain * model.density))


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean of one layer's energy over independent realizations."""

    n: int
    estimate: float
    stderr: float
    trials: int
    seed: int


def mc_layer_energy(
    model: StationaryModel, bank: FilterBank, n: int, trials: int, seed: int
) -> MCEstimate:
    """Monte Carlo estimate of E (layer-n energy) under the model.

    Depth is capped at 4: each extra layer multiplies the tree by the
    bank breadth, and stationary expectations at depth 5+ are far beyond
    what a sane trial budget resolves.
    """
    if not 1 <= n <= 4:
        raise ValueError("layer must be between 1 and 4")
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    if bank.n != model.n:
        raise ValueError(f"bank grid {bank.n} does not match model grid {model.n}")
    values = np.empty(trials)
    for k, sig in enumerate(simulate(model, trials, seed)):
        values[k] = layer_energy_profile(sig, bank, n)[n]
    estimate = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(trials))
    return MCEstimate(n=n, estimate=estimate, stderr=stderr, trials=trials, seed=seed)


def stationary_bound(model: StationaryModel, constants: DecayConstants, n: int) -> float:
    """Expected layer-n energy bound sum_w density(w) (1 - |chi_hat(w)|^2).

    The mean never enters: the bound's Gaussian equals one at w = 0, so
    the deterministic component is annihilated exactly.
    """
    if n < 2:
        raise ValueError("the contraction argument starts at layer 2")
    w = frequencies(model.n)
    width = constants.r * constants.a**n
    loss = 1.0 - np.exp(-2.0 * (w / width) ** 2)
    return float(np.sum(model.density * loss))


def save_model(path: str | os.PathLike, model: StationaryModel) -> None:
    payload = {"kind": model.kind, "params": model.params, "N": model.n}
    with open(os.fspath(path), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> StationaryModel:
    with open(os.fspath(path)) as fh:
        payload = json.load(fh)
    try:
        kind = payload["kind"]
        n = int(payload["N"])
        params = dict(payload.get("params", {}))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from None
    return make_model(kind, n, **params)
