"""Command-line front end.

Commands mirror the library's workflow: certify a bank, run a transform,
verify the decay bound, Monte Carlo a stationary model, and a small demo
of why the modulus pushes energy toward zero frequency.

Exit codes are part of the contract:

    0   everything ran and every checked condition passed
    1   a condition failed or the bank cannot support the machinery
    2   unreadable or malformed input (files, flags, formats)
    3   the requested tree exceeds the safety budget

All outputs are byte-stable for identical inputs: floats are written in
shortest round-trip form, JSON keys are sorted, and nothing records
timestamps or the environment.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .decay import compute_constants, verify_decay
from .errors import BudgetExceededError, ScatdecayError
from .filterbank import FilterBank, check_asymmetry, check_littlewood_paley, estimate_vanishing_order, load_bank
from .scattering import (
    LowPass,
    export_result,
    gaussian_output_lowpass,
    scatter,
    shannon_tight_pair,
)
from .signals import Signal, band_limited_signal, convolve, dft, energy, read_signal, write_signal
from .stationary import load_model, mc_layer_energy, stationary_bound

__all__ = ["RunConfig", "main"]


@dataclass(frozen=True)
class RunConfig:
    """Common options shared by the subcommands."""

    bank: str | None
    signal: str | None
    model: str | None
    out: str | None
    seed: int
    depth: int
    trials: int
    prune_eps: float
    scale: int
    tol: float | None
    lowpass: str

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        get = lambda name, default=None: getattr(args, name, default)
        return cls(
            bank=get("bank"),
            signal=get("signal"),
            model=get("model"),
            out=get("out"),
            seed=get("seed", 0),
            depth=get("depth", 2),
            trials=get("trials", 200),
            prune_eps=get("prune_eps", 0.0),
            scale=get("scale", 0),
            tol=get("tol"),
            lowpass=get("lowpass", "auto"),
        )


def _jsonable(value):
    """JSON payloads with non-finite floats spelled out as strings."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_out(cfg: RunConfig) -> str:
    if not cfg.out:
        raise ValueError("an output directory is required (--out)")
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _load_bank(cfg: RunConfig) -> FilterBank:
    if not cfg.bank:
        raise ValueError("a bank file is required (--bank)")
    return load_bank(cfg.bank)


def _output_lowpass(bank: FilterBank, kind: str) -> LowPass:
    if kind == "auto":
        kind = "tight" if bank.mother.name == "shannon" else "gaussian"
    if kind == "tight":
        if bank.mother.name != "shannon":
            raise ValueError("the tight pair is only defined for the shannon bank")
        _, low = shannon_tight_pair(bank.j_max, bank.n, j_min=bank.j_min)
        return low
    if kind == "gaussian":
        return gaussian_output_lowpass(bank.j_max, bank.n)
    raise ValueError(f"unknown lowpass choice {kind!r}")


def cmd_bank_check(cfg: RunConfig) -> int:
    bank = _load_bank(cfg)
    out = _ensure_out(cfg)
    lp_tol = cfg.tol if cfg.tol is not None else 1e-9
    reports = [
        check_littlewood_paley(bank, tol=lp_tol),
        check_asymmetry(bank),
        estimate_vanishing_order(bank.mother).as_condition_report(),
    ]
    for report in reports:
        _write_json(os.path.join(out, f"check_{report.condition}.json"), report.to_payload())
        verdict = "PASS" if report.passed else "FAIL"
        where = "" if report.witness_freq is None else f" at w={report.witness_freq:g}"
        print(f"{report.condition}: {verdict} (margin={report.margin:.6g}{where})")
    band = bank.validated_band
    print(f"validated band: {band[0]}..{band[1]}" if band else "validated band: none")
    return 0 if all(r.passed for r in reports) else 1


def cmd_scatter_run(cfg: RunConfig) -> int:
    bank = _load_bank(cfg)
    if not cfg.signal:
        raise ValueError("a signal file is required (--signal)")
    sig = read_signal(cfg.signal)
    out = _ensure_out(cfg)
    low = _output_lowpass(bank, cfg.lowpass)
    result = scatter(sig, bank, low, cfg.depth, prune_eps=cfg.prune_eps)
    export_result(result, out)
    kept = len(result.s)
    print(
        f"depth={cfg.depth} paths={kept} pruned={len(result.pruned_paths)} "
        f"pruned_mass={result.pruned_mass:.6g}"
    )
    return 0


def cmd_decay_verify(cfg: RunConfig) -> int:
    bank = _load_bank(cfg)
    out = _ensure_out(cfg)
    constants = compute_constants(bank)
    if cfg.signal:
        sig = read_signal(cfg.signal)
    else:
        lo, hi = constants.band
        sig = band_limited_signal(bank.n, (lo, hi), np.random.default_rng(cfg.seed))
    rows = verify_decay(sig, bank, constants, n_max=cfg.depth)
    _write_json(os.path.join(out, "constants.json"), constants.to_payload())
    with open(os.path.join(out, "decay.csv"), "w") as fh:
        fh.write("n,empirical,bound,slack\n")
        for row in rows:
            fh.write(f"{row.n},{row.empirical!r},{row.bound!r},{row.slack!r}\n")
    slack_tol = cfg.tol if cfg.tol is not None else 1e-8
    print(
        f"constants: c={constants.c:.6g} C={constants.C:.6g} a={constants.a:.6g} "
        f"r={constants.r:.6g} band={constants.band[0]}..{constants.band[1]}"
    )
    ok = True
    for row in rows:
        good = row.slack >= -slack_tol
        ok = ok and good
        print(
            f"layer {row.n}: empirical={row.empirical:.6g} bound={row.bound:.6g} "
            f"slack={row.slack:.6g} [{'OK' if good else 'VIOLATED'}]"
        )
    return 0 if ok else 1


def cmd_stationary_run(cfg: RunConfig) -> int:
    bank = _load_bank(cfg)
    if not cfg.model:
        raise ValueError("a model file is required (--model)")
    model = load_model(cfg.model)
    out = _ensure_out(cfg)
    constants = compute_constants(bank)
    est = mc_layer_energy(model, bank, cfg.depth, trials=cfg.trials, seed=cfg.seed)
    bound = stationary_bound(model, constants, cfg.depth)
    ok = est.estimate <= bound + 3.0 * est.stderr
    _write_json(
        os.path.join(out, "mc_report.json"),
        {
            "n": est.n,
            "estimate": est.estimate,
            "stderr": est.stderr,
            "trials": est.trials,
            "seed": est.seed,
            "bound": bound,
            "pass": ok,
        },
    )
    print(
        f"layer {est.n}: estimate={est.estimate:.6g} (stderr {est.stderr:.3g}, "
        f"{est.trials} trials) bound={bound:.6g} [{'OK' if ok else 'VIOLATED'}]"
    )
    return 0 if ok else 1


def _default_chirp(n: int) -> Signal:
    # frequency sweeps 2 -> 6 over one period; mean frequency 4 is an
    # integer, so the phase closes and the signal is periodic
    t = np.arange(n) / n
    return Signal(np.cos(2.0 * np.pi * (2.0 * t + 2.0 * t**2)), real=True)


def _abs_centroid(coeffs: np.ndarray, n: int) -> float:
    w = np.abs(np.arange(-(n // 2), n // 2))
    power = np.abs(coeffs) ** 2
    return float(np.sum(w * power) / np.sum(power))


def cmd_demo_modulus_shift(cfg: RunConfig) -> int:
    from .filterbank import build_bank, morlet_mother

    out = _ensure_out(cfg)
    if cfg.signal:
        sig = read_signal(cfg.signal)
    else:
        sig = _default_chirp(512)
    bank = build_bank(morlet_mother(), 0, sig.n)
    if cfg.scale not in bank.filters:
        raise ValueError(f"scale {cfg.scale} outside bank range [{bank.j_min}, {bank.j_max}]")
    filtered = convolve(sig, bank.filters[cfg.scale])
    mod = Signal(np.abs(filtered.samples), real=True)
    low = gaussian_output_lowpass(bank.j_max, sig.n)
    smoothed = convolve(mod, low.spectrum)
    before = _abs_centroid(dft(filtered).coeffs, sig.n)
    after = _abs_centroid(dft(mod).coeffs, sig.n)

    write_signal(os.path.join(out, "input.csv"), sig)
    write_signal(os.path.join(out, "filtered.csv"), filtered)
    write_signal(os.path.join(out, "modulus.csv"), mod)
    write_signal(os.path.join(out, "smoothed.csv"), smoothed)
    _write_json(
        os.path.join(out, "summary.json"),
        {
            "scale": cfg.scale,
            "centroid_filtered": before,
            "centroid_modulus": after,
            "energy_filtered": energy(filtered),
            "energy_modulus": energy(mod),
            "energy_smoothed": energy(smoothed),
        },
    )
    shifted = after < before
    print(
        f"|w|-centroid: filtered={before:.6g} modulus={after:.6g} "
        f"[{'shifted down' if shifted else 'NOT shifted'}]"
    )
    return 0 if shifted else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatdecay",
        description="Scattering transforms with certified layer-energy decay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, depth_default=2, depth_help="tree depth"):
        p.add_argument("--bank", help="bank recipe (JSON)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--depth", type=int, default=depth_default, help=depth_help)
        p.add_argument("--tol", type=float, default=None, help="tolerance override")

    bank = sub.add_parser("bank", help="filter bank operations")
    bank_sub = bank.add_subparsers(dest="action", required=True)
    check = bank_sub.add_parser("check", help="run the certification checks")
    add_common(check)
    check.set_defaults(handler=cmd_bank_check)

    scat = sub.add_parser("scatter", help="scattering transforms")
    scat_sub = scat.add_subparsers(dest="action", required=True)
    run = scat_sub.add_parser("run", help="compute a scattering tree")
    add_common(run)
    run.add_argument("--signal", help="input signal (CSV or raw + sidecar)")
    run.add_argument("--prune-eps", type=float, default=0.0, dest="prune_eps",
                     help="relative energy floor for pruning")
    run.add_argument("--lowpass", choices=("auto", "gaussian", "tight"), default="auto",
                     help="output smoothing filter")
    run.set_defaults(handler=cmd_scatter_run)

    decay = sub.add_parser("decay", help="decay-bound operations")
    decay_sub = decay.add_subparsers(dest="action", required=True)
    verify = decay_sub.add_parser("verify", help="constants plus bound-vs-empirical table")
    add_common(verify, depth_default=4, depth_help="deepest layer to verify")
    verify.add_argument("--signal", help="real band-limited input (default: synthesized)")
    verify.set_defaults(handler=cmd_decay_verify)

    stat = sub.add_parser("stationary", help="stationary-model operations")
    stat_sub = stat.add_subparsers(dest="action", required=True)
    srun = stat_sub.add_parser("run", help="Monte Carlo layer energy against the bound")
    add_common(srun)
    srun.add_argument("--model", help="stationary model (JSON)")
    srun.add_argument("--trials", type=int, default=200, help="Monte Carlo trials")
    srun.set_defaults(handler=cmd_stationary_run)

    demo = sub.add_parser("demo", help="illustrations")
    demo_sub = demo.add_subparsers(dest="action", required=True)
    shift = demo_sub.add_parser(
        "modulus-shift", help="how the modulus moves a chirp's spectrum toward zero"
    )
    shift.add_argument("--signal", help="input signal (default: built-in chirp)")
    shift.add_argument("--out", help="output directory")
    shift.add_argument("--scale", type=int, default=0, help="octave of the analyzing filter")
    shift.set_defaults(handler=cmd_demo_modulus_shift)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        return args.handler(cfg)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ScatdecayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
