"""Certified decay rates for scattering layer energies.

The modulus of a band-pass convolution moves energy toward low
frequencies.  How fast it moves is governed by two frequency functionals
built from the converged dyadic sums of the mother profile:

    S(w)  = (1/2) sum_j |psi_hat(2^j w)|^2 + |psi_hat(-2^j w)|^2
    F1(w) = sum_j (|psi_hat(2^j w)|^2 - |psi_hat(-2^j w)|^2) * 2^-j / (2 S(w))
    F2(w) = sum_j (|psi_hat(2^j w)|^2 + |psi_hat(-2^j w)|^2) * 2^-2j / (2 S(w))

Both are exactly homogeneous across octaves (F1 doubles, F2 quadruples),
so their envelopes over one octave give global constants

    c = inf F1(w)/w,   C = sup F2(w)/w^2,   a = 1 / sqrt(1 - c^2/C),

and after an admissible Gaussian width x_init is found, the layer-n
energy of a real band-limited signal obeys

    ||U_n f||^2 <= sum_w |f_hat(w)|^2 (1 - exp(-2 (w / (r a^n))^2)),

with r = x_init / a^2.  Everything here is computed on grids with
explicit margins; no step trusts a claimed inequality without checking
it at the grid points it will later be used on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BankConditionError,
    CoverageHoleError,
    DegenerateOctaveError,
    VanishingOrderError,
    WeakAsymmetryError,
)
from .filterbank import (
    ConditionReport,
    FilterBank,
    check_littlewood_paley,
    dyadic_term_grid,
    estimate_vanishing_order,
)
from .scattering import layer_energy_profile
from .signals import Signal, dft, frequencies

__all__ = [
    "FreqFunctional",
    "DecayConstants",
    "InitLowpass",
    "DecayRow",
    "Lemma1Report",
    "compute_S",
    "compute_F1",
    "compute_F2",
    "compute_constants",
    "initialize_lowpass",
    "initialize_x",
    "lemma1_check",
    "lemma2_envelope_check",
    "verify_decay",
]

# sums smaller than this are holes, not small denominators
_MASS_FLOOR = 1e-12


def _chi_sq(w: np.ndarray, x: float) -> np.ndarray:
    """Squared Gaussian low-pass profile |chi_hat_x(w)|^2."""
    return np.exp(-2.0 * (w / x) ** 2)


@dataclass(frozen=True)
class FreqFunctional:
    """One of the dyadic-sum functionals sampled on integer frequencies."""

    name: str
    omegas: np.ndarray
    values: np.ndarray
    band: tuple[int, int]


def _band_or_raise(bank: FilterBank) -> tuple[int, int]:
    if bank.validated_band is None:
        raise CoverageHoleError(
            "bank has no validated band: the retained octaves nowhere "
            "reproduce the full dyadic sum"
        )
    return bank.validated_band


def _functional_terms(bank: FilterBank, omegas: np.ndarray):
    """Converged S, F1 and F2 numerators at strictly positive omegas."""
    js, p, m = dyadic_term_grid(bank.mother, omegas)
    s = 0.5 * (np.sum(p, axis=0) + np.sum(m, axis=0))
    w1 = np.ldexp(1.0, -js)[:, None]
    n1 = 0.5 * np.sum((p - m) * w1, axis=0)
    n2 = 0.5 * np.sum((p + m) * w1 * w1, axis=0)
    return s, n1, n2


def _functional_on_band(bank: FilterBank, which: str) -> FreqFunctional:
    lo, hi = _band_or_raise(bank)
    omegas = np.arange(lo, hi + 1, dtype=np.float64)
    s, n1, n2 = _functional_terms(bank, omegas)
    holes = np.flatnonzero(s <= _MASS_FLOOR)
    if holes.size:
        raise CoverageHoleError(
            f"dyadic sum vanishes at frequency {int(omegas[holes[0]])} "
            f"inside the validated band [{lo}, {hi}]"
        )
    values = {"S": s, "F1": n1 / s, "F2": n2 / s}[which]
    return FreqFunctional(which, omegas.astype(np.int64), values, (lo, hi))


def compute_S(bank: FilterBank) -> FreqFunctional:
    """Symmetrized octave mass on the validated band."""
    return _functional_on_band(bank, "S")


def compute_F1(bank: FilterBank) -> FreqFunctional:
    """First-moment functional; F1(2w) = 2 F1(w) bitwise."""
    return _functional_on_band(bank, "F1")


def compute_F2(bank: FilterBank) -> FreqFunctional:
    """Second-moment functional; F2(2w) = 4 F2(w) bitwise."""
    return _functional_on_band(bank, "F2")


# ---------------------------------------------------------------------------
# Initial low-pass construction.


@dataclass(frozen=True)
class InitLowpass:
    """Window phi_hat whose squared profile complements the octave sums.

    Built as the autocorrelation of a raised-cosine bump, rescaled by M so
    that |phi_hat|^2 + sum of octave profiles stays below one everywhere.
    ``phi_grid``/``phi_values`` sample the unscaled autocorrelation on its
    support [-1/2, 1/2]; evaluation at arbitrary frequencies interpolates
    that table after the M-rescale and is exactly zero outside.
    """

    j_max: int
    n: int
    m_scale: float
    alpha_tilde: float
    curvature_sup: float
    phi_grid: np.ndarray
    phi_values: np.ndarray

    def phi_hat(self, w) -> np.ndarray:
        u = self.m_scale * np.asarray(w, dtype=np.float64)
        return np.interp(u, self.phi_grid, self.phi_values, left=0.0, right=0.0)


def _lp_up_to_coarsest(bank: FilterBank, omegas: np.ndarray) -> np.ndarray:
    """Converged symmetrized sum over all octaves j <= j_max (no floor)."""
    js, p, m = dyadic_term_grid(bank.mother, omegas)
    keep = (js <= bank.j_max)[:, None]
    return 0.5 * np.sum(np.where(keep, p + m, 0.0), axis=0)


def initialize_lowpass(bank: FilterBank, fine_points: int = 1 << 14) -> InitLowpass:
    """Construct the initial window and certify its curvature budget.

    Steps, each with its own grid check:

    1. raised cosine gamma_hat(xi) = cos^2(2 pi xi) on [-1/4, 1/4],
       normalized to unit squared integral;
    2. phi0_hat = gamma_hat * gamma_hat (autocorrelation), pinned to
       phi0_hat(0) = 1 exactly and bounded by 1;
    3. alpha_tilde = min over the support of (1 - phi0_hat^2) / u^2,
       the worst quadratic headroom of the window;
    4. curvature_sup = sup over the positive reals of the octave sums
       for j <= j_max divided by w^2; a dense log grid is topped up with
       points just above each dyadic edge, where indicator-type profiles
       jump and an integer grid badly under-samples the sup;
    5. m_scale = sqrt(curvature_sup / alpha_tilde), inflated by 1e-6 so
       the rescaled window hides strictly inside the uncovered zone.

    The combined bound |phi_hat|^2 + octave sums <= 1 is then verified on
    both the continuum grid and the integer grid; a violation means the
    bank is not usable with this construction.
    """
    order = estimate_vanishing_order(bank.mother)
    if not order.passed:
        raise VanishingOrderError(
            "cannot build the initial window: near-zero decay order "
            f"{order.epsilon_hat:.4f} is below {order.threshold}"
        )

    xi = np.linspace(-0.25, 0.25, fine_points + 1)
    dxi = xi[1] - xi[0]
    gamma = np.cos(2.0 * np.pi * xi) ** 2
    gamma = gamma / math.sqrt(float(np.trapezoid(gamma**2, xi)))

    phi0 = np.convolve(gamma, gamma) * dxi
    center = fine_points  # index of u = 0 on the doubled grid
    phi0 = phi0 / phi0[center]
    u = np.linspace(-0.5, 0.5, 2 * fine_points + 1)
    if float(np.max(phi0)) > 1.0 + 1e-12 or abs(float(phi0[center]) - 1.0) != 0.0:
        raise BankConditionError("window autocorrelation failed normalization checks")

    inner = u != 0.0
    alpha_tilde = float(np.min((1.0 - phi0[inner] ** 2) / u[inner] ** 2))

    half = bank.n // 2
    grid = np.geomspace(2.0**-8, float(half), 20001)
    edges = []
    for k in range(-8, int(math.log2(half)) + 1):
        edges.append(2.0**k)
        edges.append(2.0**k * (1.0 + 1e-9))
    grid = np.unique(np.concatenate([grid, np.asarray(edges)]))
    curvature_sup = float(np.max(_lp_up_to_coarsest(bank, grid) / grid**2))

    m_scale = math.sqrt(curvature_sup / alpha_tilde) * (1.0 + 1e-6)
    init = InitLowpass(
        j_max=bank.j_max,
        n=bank.n,
        m_scale=m_scale,
        alpha_tilde=alpha_tilde,
        curvature_sup=curvature_sup,
        phi_grid=u,
        phi_values=phi0,
    )

    combined = init.phi_hat(grid) ** 2 + _lp_up_to_coarsest(bank, grid)
    ints = np.arange(1, half + 1, dtype=np.float64)
    combined_int = init.phi_hat(ints) ** 2 + _lp_up_to_coarsest(bank, ints)
    worst = max(float(np.max(combined)), float(np.max(combined_int)))
    if worst > 1.0 + 1e-9:
        raise BankConditionError(
            f"initial window violates the combined bound: max {worst:.12f}"
        )
    return init


def _smoothed_window_sq(init: InitLowpass, omegas: np.ndarray) -> np.ndarray:
    """(|phi_hat|^2 * g)(w) for the unit Gaussian weight g.

    The integrand vanishes outside phi_hat's support, so the quadrature
    runs over exactly that interval on the construction's fine grid.
    """
    support = init.phi_grid / init.m_scale
    values = init.phi_values**2
    gap = omegas[:, None] - support[None, :]
    kernel = np.exp(-(gap**2)) / math.sqrt(math.pi)
    return np.trapezoid(values[None, :] * kernel, support, axis=1)


def initialize_x(
    bank: FilterBank,
    init: InitLowpass | None = None,
    tol: float = 1e-9,
) -> float:
    """Largest admissible Gaussian width on the eighth-octave search grid.

    The admissibility condition compares the retrenchment envelope

        F(w) = (1 - (|phi_hat|^2 * g)(w)) * (octave sums for j <= j_max)

    against 1 - |chi_hat_x(w)|^2 on the validated integer band.  F does
    not depend on x and the right side grows as x shrinks, so the search
    walks x = 2^(m/8) downward from 2^8 and stops at the first width that
    clears the condition everywhere.
    """
    lo, hi = _band_or_raise(bank)
    if init is None:
        init = initialize_lowpass(bank)
    omegas = np.arange(lo, hi + 1, dtype=np.float64)
    envelope = (1.0 - _smoothed_window_sq(init, omegas)) * _lp_up_to_coarsest(bank, omegas)
    for m in range(64, -65, -1):
        x = 2.0 ** (m / 8.0)
        if np.all(envelope <= 1.0 - _chi_sq(omegas, x) + tol):
            return x
    raise BankConditionError(
        "no admissible Gaussian width in [2^-8, 2^8]: the envelope "
        "exceeds the modulation budget at every candidate"
    )


# ---------------------------------------------------------------------------
# Decay constants.


@dataclass(frozen=True)
class DecayConstants:
    """Certified rates for one bank.

    ``delta`` = c/C is the guaranteed downward frequency drift per layer,
    ``a`` the per-layer width contraction, ``x_init`` the admissible
    starting width and ``r`` = x_init / a^2 the effective width in the
    layer-n energy bound.  ``margins`` records the slack of every grid
    inequality the computation relied on.
    """

    c: float
    C: float
    delta: float
    a: float
    x_init: float
    r: float
    band: tuple[int, int]
    margins: dict

    def to_payload(self) -> dict:
        return {
            "c": self.c,
            "C": self.C,
            "delta": self.delta,
            "a": self.a,
            "x_init": self.x_init,
            "r": self.r,
            "validated_band": list(self.band),
            "margins": self.margins,
        }


def _octave_samples(bank: FilterBank) -> np.ndarray:
    """Sampling set in the reference octave (1, 2].

    Dense geometric grid, a point hugging the open left edge where
    second-moment envelopes of indicator profiles peak, and the exact
    octave image g / 2^(ceil(log2 g) - 1) of every validated integer
    frequency, so banks whose mass sits on isolated frequencies are
    sampled where that mass actually lives.
    """
    lo, hi = _band_or_raise(bank)
    dense = 2.0 ** np.linspace(0.0, 1.0, 4097)[1:]
    ints = np.arange(lo, hi + 1, dtype=np.float64)
    images = ints / 2.0 ** (np.ceil(np.log2(ints)) - 1.0)
    return np.unique(np.concatenate([dense, [1.0 + 1e-12], images]))


def compute_constants(bank: FilterBank) -> DecayConstants:
    """Derive the decay constants, refusing banks that cannot support them.

    Preconditions are checked in order of how informative the failure is:
    missing coverage, an inflated squared sum, too little decay order near
    zero, no strict analytic preference (c <= 0), and octave mass so
    concentrated that c^2 reaches C and the contraction disappears.
    """
    band = _band_or_raise(bank)

    lp = check_littlewood_paley(bank)
    if not lp.passed:
        raise BankConditionError(
            f"squared sums exceed one (margin {lp.margin:.3e} at w = {lp.witness_freq})"
        )
    order = estimate_vanishing_order(bank.mother)
    if not order.passed:
        raise VanishingOrderError(
            f"near-zero decay order {order.epsilon_hat:.4f} below {order.threshold}"
        )

    x = _octave_samples(bank)
    s, n1, n2 = _functional_terms(bank, x)
    usable = s > _MASS_FLOOR
    if not np.any(usable):
        raise CoverageHoleError("no octave mass anywhere on the sampling set")
    x = x[usable]
    f1 = n1[usable] / s[usable]
    f2 = n2[usable] / s[usable]

    c = float(np.min(f1 / x))
    big_c = float(np.max(f2 / x**2))
    if c <= 1e-15:
        raise WeakAsymmetryError(
            f"first-moment rate c = {c:.3e} is not positive; the bank has "
            "no strict analytic preference and the drift argument collapses"
        )
    if c * c >= big_c * (1.0 - 1e-12):
        raise DegenerateOctaveError(
            f"degenerate octave: c^2 = {c * c:.12e} reaches C = {big_c:.12e}, "
            "so the width contraction a is unbounded"
        )

    delta = c / big_c
    a = 1.0 / math.sqrt(1.0 - c * c / big_c)
    init = initialize_lowpass(bank)
    x_init = initialize_x(bank, init)
    r = x_init / a**2

    lo, hi = band
    omegas = np.arange(lo, hi + 1, dtype=np.float64)
    envelope = (1.0 - _smoothed_window_sq(init, omegas)) * _lp_up_to_coarsest(bank, omegas)
    x_margin = float(np.min(1.0 - _chi_sq(omegas, x_init) - envelope))

    margins = {
        "littlewood_paley": lp.margin,
        "vanishing_order_epsilon": order.epsilon_hat,
        "octave_gap": big_c - c * c,
        "x_condition": x_margin,
    }
    return DecayConstants(
        c=c,
        C=big_c,
        delta=delta,
        a=a,
        x_init=x_init,
        r=r,
        band=band,
        margins=margins,
    )


# ---------------------------------------------------------------------------
# Lemma-level checks.


@dataclass(frozen=True)
class Lemma1Report:
    """Positivity of one smoothed-modulus case against its spectral floor."""

    j: int
    x: float
    delta: float
    lhs: float
    rhs: float
    margin: float
    passed: bool


def lemma1_check(
    f: Signal, j: int, x: float, delta: float, bank: FilterBank
) -> Lemma1Report:
    """Check ||  |f * psi_j| * chi_x  ||^2 >= sum |f_hat psi_hat_j|^2 |chi_hat_x(w - delta)|^2.

    The left side keeps the full modulus; the right side is what survives
    if the modulus were replaced by a modulation to ``delta``.  The
    inequality is the positivity that drives the decay argument; it must
    hold for every real center delta, not just the favourable one.
    """
    if j not in bank.filters:
        raise ValueError(f"octave {j} outside bank range [{bank.j_min}, {bank.j_max}]")
    if f.n != bank.n:
        raise ValueError(f"signal length {f.n} does not match bank grid {bank.n}")
    if x <= 0:
        raise ValueError("width x must be positive")
    w = frequencies(f.n)
    f_hat = dft(f).coeffs
    psi = bank.filters[j].coeffs
    filtered = f_hat * psi
    u = np.abs(np.fft.ifft(np.fft.ifftshift(filtered)) * f.n)
    u_hat = np.fft.fftshift(np.fft.fft(u)) / f.n
    smoothed = u_hat * np.exp(-((w / x) ** 2))
    lhs = float(np.sum(np.abs(smoothed) ** 2))
    rhs = float(np.sum(np.abs(filtered) ** 2 * _chi_sq(w - delta, x)))
    margin = lhs - rhs
    scale = float(np.sum(np.abs(f_hat) ** 2))
    return Lemma1Report(
        j=j,
        x=x,
        delta=delta,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        passed=margin >= -1e-10 * max(scale, 1e-300),
    )


def lemma2_envelope_check(
    bank: FilterBank,
    constants: DecayConstants,
    x: float,
    a: float | None = None,
    tol: float = 1e-9,
) -> ConditionReport:
    """Check the one-step width contraction envelope at width ``x``.

    For every validated frequency the octave-weighted modulation losses,
    each centered at the drifted frequency delta * 2^-j, must fit under
    the loss of a single Gaussian contracted by ``a``:

        (1/2) sum_j [ p_j (1 - |chi_hat_x(w - delta 2^-j)|^2)
                    + m_j (1 - |chi_hat_x(-w - delta 2^-j)|^2) ]
            <= 1 - |chi_hat_{a x}(w)|^2.

    Passing ``a`` overrides the certified contraction, which is how one
    demonstrates that a faster claimed contraction is false.
    """
    if x <= 0:
        raise ValueError("width x must be positive")
    contraction = constants.a if a is None else a
    if contraction <= 0:
        raise ValueError("contraction must be positive")
    lo, hi = _band_or_raise(bank)
    omegas = np.arange(lo, hi + 1, dtype=np.float64)
    js, p, m = dyadic_term_grid(bank.mother, omegas)
    s = 0.5 * (np.sum(p, axis=0) + np.sum(m, axis=0))
    centers = constants.delta * np.ldexp(1.0, -js)[:, None]
    loss_pos = 1.0 - _chi_sq(omegas[None, :] - centers, x)
    loss_neg = 1.0 - _chi_sq(-omegas[None, :] - centers, x)
    lhs = 0.5 * np.sum(p * loss_pos + m * loss_neg, axis=0)
    rhs = 1.0 - _chi_sq(omegas, contraction * x)
    gaps = rhs - lhs
    idx = int(np.argmin(gaps))
    margin = float(gaps[idx])
    return ConditionReport(
        condition="modulation_envelope",
        passed=bool(margin >= -tol) and bool(np.all(s > _MASS_FLOOR)),
        margin=margin,
        witness_freq=float(omegas[idx]),
        tolerance=tol,
        details={
            "x": x,
            "contraction": contraction,
            "delta": constants.delta,
            "band": [int(lo), int(hi)],
        },
    )


# ---------------------------------------------------------------------------
# End-to-end verification.


@dataclass(frozen=True)
class DecayRow:
    n: int
    empirical: float
    bound: float
    slack: float


def verify_decay(
    f: Signal,
    bank: FilterBank,
    constants: DecayConstants,
    n_max: int = 4,
) -> list[DecayRow]:
    """Compare actual layer energies against the certified bound.

    The input must be real and spectrally supported on the validated
    band; outside it the constants certify nothing.  Rows start at layer
    2, the first layer the contraction argument controls.
    """
    if not 2 <= n_max <= 5:
        raise ValueError("n_max must be between 2 and 5")
    if not f.real:
        raise ValueError("decay verification needs a real signal")
    if f.n != bank.n:
        raise ValueError(f"signal length {f.n} does not match bank grid {bank.n}")
    lo, hi = _band_or_raise(bank)
    w = frequencies(f.n)
    power = np.abs(dft(f).coeffs) ** 2
    inside = (np.abs(w) >= lo) & (np.abs(w) <= hi)
    total = float(np.sum(power))
    if total == 0.0:
        raise ValueError("signal is identically zero")
    if float(np.sum(power[~inside])) > 1e-12 * total:
        raise ValueError(
            f"signal has spectral mass outside the validated band [{lo}, {hi}]"
        )
    profile = layer_energy_profile(f, bank, n_max)
    rows = []
    for n in range(2, n_max + 1):
        width = constants.r * constants.a**n
        bound = float(np.sum(power * (1.0 - _chi_sq(w, width))))
        empirical = profile[n]
        rows.append(DecayRow(n=n, empirical=empirical, bound=bound, slack=bound - empirical))
    return rows
