"""Dyadic analytic filter banks and the conditions that certify them.

A bank is generated from a mother profile psi_hat by dyadic dilation,
psi_hat_j(w) = psi_hat(2^j w), with larger j meaning coarser scale.  A
bank keeps the octaves j in [j_min, j_max]; by default j_min reaches down
to the finest octave that still fits on the length-N grid.

Three conditions are checked here:

* the symmetrized squared sums stay below one (no energy inflation),
* positive frequencies strictly dominate their mirrors (analyticity),
* |psi_hat| decays at better-than-linear order near zero.

All three are grid evaluations that report a signed margin and a witness
frequency; downstream bounds consume the margins, so the checks never
round a failure up to a pass.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .signals import Spectrum, frequencies

__all__ = [
    "X_WINDOW",
    "MotherWavelet",
    "FilterBank",
    "ConditionReport",
    "VanishingOrderReport",
    "MOTHERS",
    "morlet_mother",
    "morlet_first_order_mother",
    "even_morlet_mother",
    "shannon_mother",
    "bandpass_mother",
    "make_mother",
    "build_bank",
    "dyadic_term_grid",
    "ideal_lp_sum",
    "bank_lp_sum",
    "check_littlewood_paley",
    "check_asymmetry",
    "estimate_vanishing_order",
    "save_bank",
    "load_bank",
]

# Scaled arguments x = 2^j * w kept when a dyadic sum over all integer j
# is truncated to machine convergence.  Every registered mother is below
# 1e-30 outside this window, so the truncation is exact in float64.
X_WINDOW = (1e-8, 16.0)


@dataclass(frozen=True)
class MotherWavelet:
    """Frequency profile of the generating wavelet.

    ``hat`` maps real frequencies to real amplitudes, vectorized over
    ndarray input.  ``zero_near_origin`` marks indicator-type profiles
    that vanish identically on a neighbourhood of zero; the order check
    accepts those by flag instead of fitting a slope to zeros.
    """

    name: str
    params: dict
    hat: Callable[[np.ndarray], np.ndarray]
    zero_near_origin: bool = False

    def __call__(self, w) -> np.ndarray:
        return np.asarray(self.hat(np.asarray(w, dtype=np.float64)), dtype=np.float64)

    def scaled(self, j: int) -> Callable[[np.ndarray], np.ndarray]:
        """Profile of the octave-j filter, w -> psi_hat(2^j w)."""
        return lambda w: self(np.ldexp(np.asarray(w, dtype=np.float64), j))


def morlet_mother(center: float = 3.0, width: float = 1.0) -> MotherWavelet:
    """Analytic Morlet profile with a double zero at the origin.

    The Gaussian bump at ``center`` is corrected by a Gaussian at zero.
    A plain amplitude correction only cancels the value at the origin and
    leaves a linear term; multiplying the correction by
    (1 + center*w/width^2) also cancels the derivative, so
    |psi_hat(w)| = O(w^2) as w -> 0 and the order check passes with room
    to spare.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    kappa = math.exp(-(center**2) / (2.0 * width**2))

    def hat(w):
        main = np.exp(-((w - center) ** 2) / (2.0 * width**2))
        corr = kappa * (1.0 + center * w / width**2) * np.exp(-(w**2) / (2.0 * width**2))
        return main - corr

    return MotherWavelet("morlet", {"center": center, "width": width}, hat)


def morlet_first_order_mother(center: float = 3.0, width: float = 1.0) -> MotherWavelet:
    """Morlet with only the zero-mean correction.

    Kept as the canonical near-linear profile: psi_hat(w) ~ c*w near the
    origin, so the vanishing-order check rejects it.  Useful in tests and
    as a contrast case; the decay machinery must refuse it.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    kappa = math.exp(-(center**2) / (2.0 * width**2))

    def hat(w):
        return np.exp(-((w - center) ** 2) / (2.0 * width**2)) - kappa * np.exp(
            -(w**2) / (2.0 * width**2)
        )

    return MotherWavelet("morlet_first_order", {"center": center, "width": width}, hat)


def even_morlet_mother(center: float = 3.0, width: float = 1.0) -> MotherWavelet:
    """Symmetrized Morlet, psi_hat(w) = psi_hat(-w).

    Satisfies the sum and order conditions but carries no analytic
    preference between +w and -w, so the strict-dominance check fails
    with margin zero.
    """
    base = morlet_mother(center, width)
    root_half = 1.0 / math.sqrt(2.0)

    def hat(w):
        return (base.hat(w) + base.hat(-w)) * root_half

    return MotherWavelet("even_morlet", {"center": center, "width": width}, hat)


def shannon_mother() -> MotherWavelet:
    """Indicator of the octave (1, 2], scaled so the octave sums are 1."""
    amp = math.sqrt(2.0)

    def hat(w):
        return amp * ((w > 1.0) & (w <= 2.0))

    return MotherWavelet("shannon", {}, hat, zero_near_origin=True)


def bandpass_mother(lo: float, hi: float, amplitude: float = math.sqrt(2.0)) -> MotherWavelet:
    """Indicator of the half-open band (lo, hi] at a fixed amplitude.

    Generalizes the octave indicator; narrow bands make legal but nearly
    useless banks whose decay constants collapse, which is exactly what
    the degenerate-octave guard in the constants computation detects.
    """
    if not 0.0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got ({lo}, {hi})")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")

    def hat(w):
        return amplitude * ((w > lo) & (w <= hi))

    return MotherWavelet(
        "bandpass", {"lo": lo, "hi": hi, "amplitude": amplitude}, hat, zero_near_origin=True
    )


MOTHERS: Mapping[str, Callable[..., MotherWavelet]] = {
    "morlet": morlet_mother,
    "morlet_first_order": morlet_first_order_mother,
    "even_morlet": even_morlet_mother,
    "shannon": shannon_mother,
    "bandpass": bandpass_mother,
}


def make_mother(name: str, **params) -> MotherWavelet:
    try:
        builder = MOTHERS[name]
    except KeyError:
        raise ValueError(f"unknown mother wavelet {name!r}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for mother {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Dyadic sums over all integer scales, truncated to the converged window.


def dyadic_term_grid(
    mother: MotherWavelet, omegas: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Squared amplitudes of every converged octave term at each frequency.

    Parameters
    ----------
    mother : MotherWavelet
    omegas : array of strictly positive frequencies.

    Returns
    -------
    js : int array of octaves, ascending.
    p, m : arrays of shape (len(js), len(omegas)) holding
        |psi_hat(2^j w)|^2 and |psi_hat(-2^j w)|^2, zeroed where the
        scaled argument 2^j w falls outside the converged window.

    The window mask depends only on 2^j * w, so doubling w shifts the
    retained term set by exactly one octave and dyadic homogeneity of
    sums built from these terms holds bitwise.
    """
    omegas = np.asarray(omegas, dtype=np.float64)
    if omegas.size == 0 or np.any(omegas <= 0):
        raise ValueError("frequencies must be strictly positive")
    j_lo = int(math.ceil(math.log2(X_WINDOW[0] / float(omegas.max()))))
    j_hi = int(math.floor(math.log2(X_WINDOW[1] / float(omegas.min()))))
    js = np.arange(j_lo, j_hi + 1)
    x = np.ldexp(omegas[None, :], js[:, None])
    keep = (x >= X_WINDOW[0]) & (x <= X_WINDOW[1])
    p = np.where(keep, mother(x) ** 2, 0.0)
    m = np.where(keep, mother(-x) ** 2, 0.0)
    return js, p, m


def ideal_lp_sum(mother: MotherWavelet, omegas: np.ndarray) -> np.ndarray:
    """Symmetrized squared sum over all integer octaves (converged)."""
    _, p, m = dyadic_term_grid(mother, omegas)
    return 0.5 * (np.sum(p, axis=0) + np.sum(m, axis=0))


def bank_lp_sum(bank: "FilterBank", omegas: np.ndarray) -> np.ndarray:
    """Symmetrized squared sum restricted to the bank's octaves."""
    omegas = np.asarray(omegas, dtype=np.float64)
    total = np.zeros_like(omegas)
    for j in range(bank.j_min, bank.j_max + 1):
        x = np.ldexp(omegas, j)
        total += 0.5 * (bank.mother(x) ** 2 + bank.mother(-x) ** 2)
    return total


@dataclass(frozen=True)
class FilterBank:
    """Filters psi_hat_j sampled on the centered length-N grid.

    ``validated_band`` is the widest contiguous range of positive integer
    frequencies on which the retained octaves reproduce the full dyadic
    sum to within ``coverage_tol``; outside it the bank under-covers and
    no quantitative claim is made.
    """

    mother: MotherWavelet
    j_max: int
    j_min: int
    n: int
    filters: Mapping[int, Spectrum]
    validated_band: tuple[int, int] | None
    coverage_tol: float

    @property
    def scales(self) -> range:
        return range(self.j_min, self.j_max + 1)


def _validated_band(
    mother: MotherWavelet, j_min: int, j_max: int, n: int, tol: float
) -> tuple[int, int] | None:
    omegas = np.arange(1, n // 2, dtype=np.float64)
    ideal = ideal_lp_sum(mother, omegas)
    kept = np.zeros_like(omegas)
    for j in range(j_min, j_max + 1):
        x = np.ldexp(omegas, j)
        keep = (x >= X_WINDOW[0]) & (x <= X_WINDOW[1])
        kept += 0.5 * np.where(keep, mother(x) ** 2 + mother(-x) ** 2, 0.0)
    ok = np.abs(ideal - kept) <= tol
    if not np.any(ok):
        return None
    # widest contiguous run of covered integers; first one wins a tie
    best, start = None, None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if best is None or i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    if start is not None and (best is None or ok.size - start > best[1] - best[0]):
        best = (start, ok.size)
    return int(omegas[best[0]]), int(omegas[best[1] - 1])


def build_bank(
    mother: MotherWavelet,
    j_max: int,
    n: int,
    j_min: int | None = None,
    coverage_tol: float = 1e-3,
) -> FilterBank:
    """Sample the dilated mother on the grid for octaves j_min..j_max.

    ``j_min`` defaults to j_max - ceil(log2 n) + 1, the finest octave
    whose pass band still lies on the grid.
    """
    if j_min is None:
        j_min = j_max - math.ceil(math.log2(n)) + 1
    if j_min > j_max:
        raise ValueError(f"empty octave range [{j_min}, {j_max}]")
    if coverage_tol <= 0:
        raise ValueError("coverage_tol must be positive")
    w = frequencies(n).astype(np.float64)
    filters = {
        j: Spectrum(mother(np.ldexp(w, j)).astype(np.complex128))
        for j in range(j_min, j_max + 1)
    }
    band = _validated_band(mother, j_min, j_max, n, coverage_tol)
    return FilterBank(mother, j_max, j_min, n, filters, band, coverage_tol)


# ---------------------------------------------------------------------------
# Condition checks.


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    passed: bool
    margin: float
    witness_freq: float | None
    tolerance: float
    details: dict

    def to_payload(self) -> dict:
        return {
            "condition": self.condition,
            "passed": self.passed,
            "margin": self.margin,
            "witness_freq": self.witness_freq,
            "tolerance": self.tolerance,
            "details": self.details,
        }


def check_littlewood_paley(bank: FilterBank, tol: float = 1e-9) -> ConditionReport:
    """Certify the symmetrized squared sums never exceed one.

    Evaluated at every grid magnitude |w| in 0..N/2; margin is
    1 - max(sum), so a tight bank reports exactly 0.0.
    """
    omegas = np.arange(0, bank.n // 2 + 1, dtype=np.float64)
    total = np.zeros_like(omegas)
    for j in bank.scales:
        x = np.ldexp(omegas, j)
        total += 0.5 * (bank.mother(x) ** 2 + bank.mother(-x) ** 2)
    worst = int(np.argmax(total))
    margin = 1.0 - float(total[worst])
    return ConditionReport(
        condition="littlewood_paley",
        passed=margin >= -tol,
        margin=margin,
        witness_freq=float(omegas[worst]),
        tolerance=tol,
        details={"max_sum": float(total[worst]), "grid": f"0..{bank.n // 2}"},
    )


def check_asymmetry(bank: FilterBank, tol: float = 1e-12) -> ConditionReport:
    """Certify positive frequencies dominate their mirrors.

    Two claims are combined: per octave, |psi_hat_j(-w)| never exceeds
    |psi_hat_j(w)| beyond ``tol``; and at every checked w some octave
    dominates strictly.  The margin is min over w of the best per-octave
    amplitude gap, so an even profile reports exactly 0.0 and fails.

    Checked on the validated band, where the bank actually covers; with
    no validated band it falls back to the full positive grid.
    """
    if bank.validated_band is not None:
        lo, hi = bank.validated_band
    else:
        lo, hi = 1, bank.n // 2 - 1
    omegas = np.arange(lo, hi + 1, dtype=np.float64)
    gaps = np.full((len(bank.scales), omegas.size), -np.inf)
    worst_violation = 0.0
    for row, j in enumerate(bank.scales):
        x = np.ldexp(omegas, j)
        gap = np.abs(bank.mother(x)) - np.abs(bank.mother(-x))
        gaps[row] = gap
        worst_violation = min(worst_violation, float(gap.min()))
    best = gaps.max(axis=0)
    idx = int(np.argmin(best))
    per_octave_ok = worst_violation >= -tol
    margin = float(best[idx]) if per_octave_ok else worst_violation
    return ConditionReport(
        condition="asymmetry",
        passed=per_octave_ok and margin > 0.0,
        margin=margin,
        witness_freq=float(omegas[idx]),
        tolerance=tol,
        details={
            "band": [int(lo), int(hi)],
            "per_octave_ok": per_octave_ok,
        },
    )


@dataclass(frozen=True)
class VanishingOrderReport:
    slope: float
    epsilon_hat: float
    passed: bool
    threshold: float
    fit_window: tuple[float, float]
    n_points: int
    residual: float
    identically_zero: bool

    def as_condition_report(self, tol: float = 0.0) -> ConditionReport:
        margin = math.inf if self.identically_zero else self.epsilon_hat - self.threshold
        return ConditionReport(
            condition="vanishing_order",
            passed=self.passed,
            margin=margin,
            witness_freq=None,
            tolerance=tol,
            details={
                "slope": self.slope,
                "epsilon_hat": self.epsilon_hat,
                "threshold": self.threshold,
                "fit_window": list(self.fit_window),
                "n_points": self.n_points,
                "residual": self.residual,
                "identically_zero": self.identically_zero,
            },
        )


def estimate_vanishing_order(
    mother: MotherWavelet,
    lo: float = 2.0**-10,
    hi: float = 2.0**-4,
    n_points: int = 25,
    threshold: float = 0.05,
) -> VanishingOrderReport:
    """Fit the decay order of |psi_hat| near zero.

    A least-squares line through (log w, log |psi_hat(w)|) on a geometric
    grid in [lo, hi] estimates |psi_hat(w)| ~ w^(1 + eps); the profile
    passes when eps >= threshold, or when it vanishes identically on the
    window (indicator-type mothers, flagged at construction).
    """
    if n_points < 6:
        raise ValueError("need at least 6 fit points")
    if not 0.0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    x = np.geomspace(lo, hi, n_points)
    vals = np.abs(mother(x))
    if mother.zero_near_origin or not np.any(vals > 0.0):
        if np.any(vals > 0.0):
            raise ValueError(
                f"mother {mother.name!r} is flagged zero near the origin "
                "but has mass on the fit window"
            )
        return VanishingOrderReport(
            slope=math.inf,
            epsilon_hat=math.inf,
            passed=True,
            threshold=threshold,
            fit_window=(lo, hi),
            n_points=n_points,
            residual=0.0,
            identically_zero=True,
        )
    if np.any(vals == 0.0):
        raise ValueError("profile vanishes at isolated fit points; cannot fit order")
    design = np.column_stack([np.log(x), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, np.log(vals), rcond=None)
    slope = float(coef[0])
    fitted = design @ coef
    residual = float(np.sqrt(np.mean((np.log(vals) - fitted) ** 2)))
    eps = slope - 1.0
    return VanishingOrderReport(
        slope=slope,
        epsilon_hat=eps,
        passed=eps >= threshold,
        threshold=threshold,
        fit_window=(lo, hi),
        n_points=n_points,
        residual=residual,
        identically_zero=False,
    )


# ---------------------------------------------------------------------------
# Serialization.  A bank file records the recipe, not the samples.


def save_bank(path: str | os.PathLike, bank: FilterBank) -> None:
    payload = {
        "mother": {"name": bank.mother.name, "params": bank.mother.params},
        "J": bank.j_max,
        "j_min": bank.j_min,
        "N": bank.n,
    }
    with open(os.fspath(path), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_bank(path: str | os.PathLike, coverage_tol: float = 1e-3) -> FilterBank:
    with open(os.fspath(path)) as fh:
        payload = json.load(fh)
    try:
        mother_spec = payload["mother"]
        mother = make_mother(mother_spec["name"], **mother_spec.get("params", {}))
        j_max = int(payload["J"])
        n = int(payload["N"])
        j_min = payload.get("j_min")
        j_min = int(j_min) if j_min is not None else None
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed bank file {path}: {exc}") from None
    return build_bank(mother, j_max, n, j_min=j_min, coverage_tol=coverage_tol)
