"""Periodic signals on the unit circle and their discrete Fourier pairs.

Everything in this package lives on the circle [0, 1) sampled at the N
points t_k = k/N, with N a power of two.  Frequency content is indexed by
the centered integer grid {-N/2, ..., N/2 - 1}.  With the normalization
used here (forward transform divided by N) the transform of a unit
complex tone is a unit spike, and energy

    energy(s) = (1/N) * sum_k |s_k|^2 = sum_w |c_w|^2

is preserved exactly between the two domains.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Signal",
    "Spectrum",
    "frequencies",
    "reflection_index",
    "dft",
    "idft",
    "convolve",
    "modulus",
    "energy",
    "shift",
    "gaussian_lowpass",
    "dirac",
    "complex_tone",
    "band_limited_signal",
    "read_signal",
    "write_signal",
]


def _check_length(n: int) -> None:
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"sample count must be a power of two >= 2, got {n}")


def _locked(values, n_expected: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError("values must be finite")
    _check_length(arr.size)
    if n_expected is not None and arr.size != n_expected:
        raise ValueError(f"length mismatch: {arr.size} != {n_expected}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """Samples of a periodic function at t_k = k/N.

    ``real=True`` asserts the imaginary part is identically zero; the
    constructor enforces it exactly rather than within a tolerance, so
    callers must strip known-zero imaginary round-off themselves.
    """

    samples: np.ndarray
    real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samples", _locked(self.samples))
        if self.real and np.any(self.samples.imag != 0.0):
            raise ValueError("real=True but imaginary part is nonzero")

    @property
    def n(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients on the centered grid {-N/2, ..., N/2 - 1}."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _locked(self.coeffs))

    @property
    def n(self) -> int:
        return self.coeffs.size


def frequencies(n: int) -> np.ndarray:
    """Centered integer frequency grid for n samples."""
    _check_length(n)
    return np.arange(-(n // 2), n // 2)


def reflection_index(n: int) -> np.ndarray:
    """Index map sending the bin of w to the bin of -w (mod n).

    On the centered grid -n/2 has no positive partner and maps to itself.
    """
    _check_length(n)
    return np.concatenate(([0], np.arange(n - 1, 0, -1)))


def dft(signal: Signal) -> Spectrum:
    return Spectrum(np.fft.fftshift(np.fft.fft(signal.samples)) / signal.n)


def idft(spectrum: Spectrum, real: bool = False) -> Signal:
    """Invert ``dft``.

    With ``real=True`` the caller asserts the coefficients are
    conjugate-symmetric; the round-off imaginary part is dropped so the
    result carries an exact zero imaginary part.
    """
    samples = np.fft.ifft(np.fft.ifftshift(spectrum.coeffs)) * spectrum.n
    if real:
        resid = np.max(np.abs(samples.imag))
        scale = max(np.max(np.abs(samples.real)), 1.0)
        if resid > 1e-9 * scale:
            raise ValueError("coefficients are not conjugate-symmetric")
        samples = samples.real
    return Signal(samples, real=real)


def convolve(signal: Signal, filt: Spectrum) -> Signal:
    """Circular convolution, evaluated as a product in frequency."""
    if signal.n != filt.n:
        raise ValueError(f"length mismatch: {signal.n} != {filt.n}")
    spec = dft(signal)
    return idft(Spectrum(spec.coeffs * filt.coeffs))


def modulus(signal: Signal) -> Signal:
    return Signal(np.abs(signal.samples), real=True)


def energy(signal: Signal) -> float:
    """Squared norm (1/N) * sum |s_k|^2."""
    s = signal.samples
    return float(np.sum(s.real * s.real + s.imag * s.imag) / signal.n)


def shift(signal: Signal, steps: int) -> Signal:
    """Translate by ``steps`` grid points: (T_m f)(t) = f(t - m/N)."""
    return Signal(np.roll(signal.samples, steps), real=signal.real)


def gaussian_lowpass(a: float, n: int) -> Spectrum:
    """Gaussian low-pass profile exp(-(w/a)^2) on the length-n grid."""
    if a <= 0:
        raise ValueError("width must be positive")
    w = frequencies(n)
    return Spectrum(np.exp(-((w / a) ** 2)).astype(np.complex128))


def dirac(n: int) -> Signal:
    """Discrete impulse with unit integral, so its transform is all ones."""
    samples = np.zeros(n, dtype=np.complex128)
    samples[0] = n
    return Signal(samples, real=True)


def complex_tone(n: int, omega: int) -> Signal:
    """Unit tone exp(2*pi*i*omega*t) on the sample grid."""
    w = int(omega)
    if not -(n // 2) <= w < n // 2:
        raise ValueError(f"frequency {w} outside the length-{n} grid")
    t = np.arange(n) / n
    return Signal(np.exp(2j * np.pi * w * t))


def band_limited_signal(
    n: int,
    band: tuple[int, int],
    rng: np.random.Generator,
    real: bool = True,
) -> Signal:
    """Random signal supported on |w| inside ``band`` (inclusive).

    Coefficients are standard complex Gaussian; with ``real=True`` the
    negative bins are the conjugates of the positive ones, so the sample
    values are exactly real.
    """
    lo, hi = int(band[0]), int(band[1])
    if not 1 <= lo <= hi < n // 2:
        raise ValueError(f"band {band} not inside the length-{n} grid")
    w = frequencies(n)
    coeffs = np.zeros(n, dtype=np.complex128)
    pos = (w >= lo) & (w <= hi)
    draw = rng.standard_normal((2, int(pos.sum())))
    coeffs[pos] = (draw[0] + 1j * draw[1]) / np.sqrt(2.0)
    if real:
        neg = (w <= -lo) & (w >= -hi)
        coeffs[neg] = np.conj(coeffs[pos][::-1])
        return idft(Spectrum(coeffs), real=True)
    return idft(Spectrum(coeffs))


# ---------------------------------------------------------------------------
# File formats.  CSV holds one sample per line, "re" or "re,im"; raw holds
# little-endian float64, interleaved re,im when complex, with a sidecar
# "<path>.meta" recording the count and complexity.


def write_signal(path: str | os.PathLike, signal: Signal, fmt: str = "csv") -> None:
    path = os.fspath(path)
    if fmt == "csv":
        with open(path, "w") as fh:
            for v in signal.samples:
                if signal.real:
                    fh.write(f"{float(v.real)!r}\n")
                else:
                    fh.write(f"{float(v.real)!r},{float(v.imag)!r}\n")
    elif fmt == "raw":
        if signal.real:
            data = signal.samples.real.astype("<f8")
        else:
            data = np.empty(2 * signal.n, dtype="<f8")
            data[0::2] = signal.samples.real
            data[1::2] = signal.samples.imag
        data.tofile(path)
        with open(path + ".meta", "w") as fh:
            fh.write(f"N={signal.n};complex={0 if signal.real else 1}\n")
    else:
        raise ValueError(f"unknown signal format {fmt!r}")


def _read_meta(path: str) -> tuple[int, bool]:
    with open(path) as fh:
        text = fh.read().strip()
    fields = dict(item.split("=", 1) for item in text.split(";") if item)
    try:
        n = int(fields["N"])
        is_complex = bool(int(fields["complex"]))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed sidecar {path}: {text!r}") from exc
    return n, is_complex


def read_signal(path: str | os.PathLike) -> Signal:
    """Load a signal from CSV, or from raw float64 via its sidecar."""
    path = os.fspath(path)
    if os.path.exists(path + ".meta"):
        n, is_complex = _read_meta(path + ".meta")
        data = np.fromfile(path, dtype="<f8")
        if data.size != (2 * n if is_complex else n):
            raise ValueError(f"raw payload holds {data.size} values, expected N={n}")
        if is_complex:
            return Signal(data[0::2] + 1j * data[1::2])
        return Signal(data.astype(np.complex128), real=True)
    rows = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if rows.shape[1] == 1:
        return Signal(rows[:, 0].astype(np.complex128), real=True)
    if rows.shape[1] == 2:
        return Signal(rows[:, 0] + 1j * rows[:, 1])
    raise ValueError(f"signal CSV must have 1 or 2 columns, got {rows.shape[1]}")
