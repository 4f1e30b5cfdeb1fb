"""Scattering transform: iterated wavelet modulus with low-pass readout.

The tree is indexed by paths p = (j_1, ..., j_n) of octave choices.  The
root carries the input itself; extending a path by j takes the modulus
of a convolution with the octave-j filter,

    U[()](f) = f,    U[p + (j,)](f) = |U[p](f) * psi_j|,

and every retained node is read out through the low-pass, S[p] = U[p] * phi.

Layer batches are propagated as matrices through one FFT per layer, so
depth-n trees cost O(B^n * N log N) but vectorize well.  A hard budget
(depth 6, breadth 12) guards against accidentally requesting trees with
millions of nodes.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import BudgetExceededError, NonTightBankError
from .filterbank import FilterBank, build_bank, shannon_mother
from .signals import (
    Signal,
    Spectrum,
    energy,
    frequencies,
    gaussian_lowpass,
    reflection_index,
    write_signal,
)

__all__ = [
    "Path",
    "MAX_DEPTH",
    "MAX_BREADTH",
    "LowPass",
    "ScatteringResult",
    "BalanceReport",
    "propagate",
    "scatter",
    "layer_energy_profile",
    "energy_balance",
    "shannon_tight_pair",
    "gaussian_output_lowpass",
    "export_result",
]

Path = tuple[int, ...]

MAX_DEPTH = 6
MAX_BREADTH = 12

# rows per FFT batch are capped so a chunk stays around 64 MB
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class LowPass:
    """Output smoothing filter phi_hat with its nominal scale."""

    spectrum: Spectrum
    scale: int


def _check_budget(n_max: int, breadth: int) -> None:
    if n_max < 0:
        raise ValueError("depth must be nonnegative")
    if n_max > MAX_DEPTH or breadth > MAX_BREADTH:
        total = sum(breadth**k for k in range(n_max + 1))
        raise BudgetExceededError(
            f"requested depth {n_max} with {breadth} octaves per node "
            f"(~{total} paths) exceeds the budget of depth {MAX_DEPTH}, "
            f"breadth {MAX_BREADTH}",
            estimated_paths=total,
        )


def _unshifted(spec: Spectrum) -> np.ndarray:
    # FFT bin order, ready to multiply against np.fft.fft output
    return np.fft.ifftshift(spec.coeffs)


def _filter_rows(bank: FilterBank) -> np.ndarray:
    return np.stack([_unshifted(bank.filters[j]) for j in bank.scales])


def _thread_count() -> int:
    raw = os.environ.get("SCATTER_THREADS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"SCATTER_THREADS must be an integer, got {raw!r}") from None
    return max(1, count)


def _map_chunks(fn, batch: np.ndarray, rows_per_chunk: int) -> list[np.ndarray]:
    chunks = [batch[i : i + rows_per_chunk] for i in range(0, batch.shape[0], rows_per_chunk)]
    workers = _thread_count()
    if workers == 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() preserves chunk order, so assembly does not depend on timing
        return list(pool.map(fn, chunks))


def _layer_moduli(batch: np.ndarray, filts: np.ndarray) -> np.ndarray:
    """All children |row * psi_j| of a layer, shape (rows*B, N)."""
    rows, n = batch.shape
    nfilt = filts.shape[0]
    per_chunk = max(1, _CHUNK_ELEMENTS // (nfilt * n))

    def step(chunk):
        spec = np.fft.fft(chunk, axis=1)
        prod = spec[:, None, :] * filts[None, :, :]
        return np.abs(np.fft.ifft(prod.reshape(-1, n), axis=1))

    return np.concatenate(_map_chunks(step, batch, per_chunk))


def _lowpass_rows(batch: np.ndarray, phi: np.ndarray) -> np.ndarray:
    n = batch.shape[1]
    per_chunk = max(1, _CHUNK_ELEMENTS // n)

    def step(chunk):
        return np.fft.ifft(np.fft.fft(chunk, axis=1) * phi[None, :], axis=1)

    return np.concatenate(_map_chunks(step, batch, per_chunk))


def _row_energies(batch: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(batch):
        return np.sum(batch.real**2 + batch.imag**2, axis=1) / batch.shape[1]
    return np.sum(batch**2, axis=1) / batch.shape[1]


def propagate(f: Signal, path: Path, bank: FilterBank) -> Signal:
    """Apply the modulus-convolution chain along one path."""
    if f.n != bank.n:
        raise ValueError(f"signal length {f.n} does not match bank grid {bank.n}")
    current = f.samples
    for j in path:
        if j not in bank.filters:
            raise ValueError(f"octave {j} outside bank range [{bank.j_min}, {bank.j_max}]")
        spec = np.fft.fft(current) * _unshifted(bank.filters[j])
        current = np.abs(np.fft.ifft(spec))
    return Signal(current, real=len(path) > 0 or f.real)


@dataclass(frozen=True)
class ScatteringResult:
    """Full tree of internal nodes and low-passed outputs.

    ``layer_energies[k]`` sums ||U[p]f||^2 over every path computed at
    depth k, including paths pruned at that depth; ``output_energies[k]``
    sums ||S[p]f||^2 over retained paths only, so the two disagree
    exactly by what pruning discarded.
    """

    bank: FilterBank
    lowpass: LowPass
    n_max: int
    prune_eps: float
    u: Mapping[Path, Signal]
    s: Mapping[Path, Signal]
    layer_energies: Mapping[int, float]
    output_energies: Mapping[int, float]
    pruned_mass: float
    pruned_paths: tuple[Path, ...]


def scatter(
    f: Signal,
    bank: FilterBank,
    lowpass: LowPass,
    n_max: int,
    prune_eps: float = 0.0,
) -> ScatteringResult:
    """Compute the scattering tree of ``f`` to depth ``n_max``.

    Parameters
    ----------
    f : input signal on the bank's grid.
    bank : analytic filter bank.
    lowpass : output smoothing filter.
    n_max : tree depth; capped by the safety budget.
    prune_eps : relative energy floor.  A node whose energy falls below
        prune_eps * ||f||^2 is dropped after being counted; zero keeps
        everything, including exactly silent nodes.
    """
    breadth = len(bank.filters)
    _check_budget(n_max, breadth)
    if prune_eps < 0:
        raise ValueError("prune_eps must be nonnegative")
    if f.n != bank.n or f.n != lowpass.spectrum.n:
        raise ValueError("signal, bank and lowpass must share one grid")

    filts = _filter_rows(bank)
    phi = _unshifted(lowpass.spectrum)
    scales = list(bank.scales)
    threshold = prune_eps * energy(f)

    u_tree: dict[Path, Signal] = {}
    s_tree: dict[Path, Signal] = {}
    layer_energies: dict[int, float] = {}
    output_energies: dict[int, float] = {}
    pruned_paths: list[Path] = []
    pruned_mass = 0.0

    paths: list[Path] = [()]
    batch = f.samples[None, :]
    layer_energies[0] = float(_row_energies(batch)[0])
    for depth in range(n_max + 1):
        if depth > 0:
            batch = _layer_moduli(batch, filts)
            paths = [p + (j,) for p in paths for j in scales]
            energies = _row_energies(batch)
            layer_energies[depth] = float(np.sum(energies))
            # prune after counting: discarded mass stays auditable
            if prune_eps > 0.0:
                keep = energies >= threshold
                for p, e in zip(
                    [q for q, k in zip(paths, keep) if not k],
                    energies[~keep],
                ):
                    pruned_paths.append(p)
                    pruned_mass += float(e)
                batch = batch[keep]
                paths = [p for p, k in zip(paths, keep) if k]
        if batch.shape[0] == 0:
            output_energies[depth] = 0.0
            continue
        outputs = _lowpass_rows(batch, phi)
        output_energies[depth] = float(np.sum(_row_energies(outputs)))
        real_nodes = depth > 0 or f.real
        for p, row, out in zip(paths, batch, outputs):
            u_tree[p] = Signal(row, real=real_nodes)
            s_tree[p] = Signal(out)

    return ScatteringResult(
        bank=bank,
        lowpass=lowpass,
        n_max=n_max,
        prune_eps=prune_eps,
        u=u_tree,
        s=s_tree,
        layer_energies=layer_energies,
        output_energies=output_energies,
        pruned_mass=pruned_mass,
        pruned_paths=tuple(pruned_paths),
    )


def layer_energy_profile(f: Signal, bank: FilterBank, n_max: int) -> dict[int, float]:
    """Total energy per layer, sum over paths of ||U[p]f||^2, no pruning.

    Cheaper than ``scatter`` when only the energies are needed: nodes are
    never stored, only propagated.
    """
    breadth = len(bank.filters)
    _check_budget(n_max, breadth)
    if f.n != bank.n:
        raise ValueError(f"signal length {f.n} does not match bank grid {bank.n}")
    filts = _filter_rows(bank)
    profile = {0: energy(f)}
    batch = f.samples[None, :]
    for depth in range(1, n_max + 1):
        batch = _layer_moduli(batch, filts)
        profile[depth] = float(np.sum(_row_energies(batch)))
    return profile


@dataclass(frozen=True)
class BalanceReport:
    """Decomposition ||f||^2 = outputs below layer n + energy at layer n."""

    n: int
    total: float
    captured: float
    tail: float
    residual: float
    relative_residual: float


def _partition_defect(bank: FilterBank, lowpass: LowPass) -> float:
    w = np.abs(lowpass.spectrum.coeffs) ** 2
    for j in bank.scales:
        w = w + np.abs(bank.filters[j].coeffs) ** 2
    sym = 0.5 * (w + w[reflection_index(bank.n)])
    return float(np.max(np.abs(sym - 1.0)))


def energy_balance(result: ScatteringResult, n: int, tol: float = 1e-9) -> BalanceReport:
    """Exact conservation check for tight pairs on real input.

    Requires an unpruned tree of depth >= n and a (bank, lowpass) pair
    whose symmetrized squared profiles sum to one on the whole grid;
    otherwise the identity

        ||f||^2 = sum_{|p| < n} ||S[p]f||^2 + sum_{|p| = n} ||U[p]f||^2

    has no reason to hold and the call refuses rather than reporting a
    meaningless residual.
    """
    if result.prune_eps != 0.0:
        raise ValueError("energy balance requires an unpruned tree")
    if not 1 <= n <= result.n_max:
        raise ValueError(f"need 1 <= n <= {result.n_max}, got {n}")
    root = result.u[()]
    if not root.real:
        raise ValueError("energy balance is an identity for real signals")
    defect = _partition_defect(result.bank, result.lowpass)
    if defect > tol:
        raise NonTightBankError(
            f"filter pair is not tight: partition defect {defect:.3e} exceeds {tol:.1e}"
        )
    total = result.layer_energies[0]
    captured = sum(result.output_energies[k] for k in range(n))
    tail = result.layer_energies[n]
    residual = abs(total - captured - tail)
    return BalanceReport(
        n=n,
        total=total,
        captured=captured,
        tail=tail,
        residual=residual,
        relative_residual=residual / total if total > 0 else 0.0,
    )


def shannon_tight_pair(j_max: int = 0, n: int = 256, j_min: int | None = None):
    """Octave-indicator bank plus the low-pass that makes it unitary.

    The low-pass passes |w| <= 2^-j_max and also claims the unpaired bin
    at -N/2, which belongs to no octave on the grid; with that bin closed
    the symmetrized profiles partition frequency exactly and the energy
    balance holds to machine precision for real signals.
    """
    bank = build_bank(shannon_mother(), j_max, n, j_min=j_min)
    w = frequencies(n)
    phi = (np.abs(w) <= 2.0**-j_max).astype(np.complex128)
    phi[w == -(n // 2)] = 1.0
    return bank, LowPass(Spectrum(phi), j_max)


def gaussian_output_lowpass(j_max: int, n: int) -> LowPass:
    """Gaussian readout exp(-(2^j_max * w)^2) at the bank's coarsest scale."""
    return LowPass(gaussian_lowpass(2.0**-j_max, n), j_max)


def _path_label(path: Path) -> str:
    return "root" if not path else "_".join(str(j) for j in path)


def export_result(result: ScatteringResult, out_dir: str | os.PathLike) -> None:
    """Write outputs, the layer profile and a manifest under ``out_dir``.

    Files are byte-stable for identical inputs: floats are written in
    shortest round-trip form and the manifest is sorted, with no
    timestamps or environment records.
    """
    out = os.fspath(out_dir)
    os.makedirs(out, exist_ok=True)
    for path, sig in sorted(result.s.items()):
        write_signal(os.path.join(out, f"s_{_path_label(path)}.csv"), sig)
    with open(os.path.join(out, "profile.csv"), "w") as fh:
        fh.write("n,energy\n")
        for depth in sorted(result.layer_energies):
            fh.write(f"{depth},{result.layer_energies[depth]!r}\n")
    manifest = {
        "bank": {
            "mother": {"name": result.bank.mother.name, "params": result.bank.mother.params},
            "J": result.bank.j_max,
            "j_min": result.bank.j_min,
            "N": result.bank.n,
        },
        "n_max": result.n_max,
        "prune_eps": result.prune_eps,
        "signal_energy": result.layer_energies[0],
        "layer_energies": {str(k): v for k, v in result.layer_energies.items()},
        "output_energies": {str(k): v for k, v in result.output_energies.items()},
        "pruned_mass": result.pruned_mass,
        "pruned_paths": [list(p) for p in result.pruned_paths],
        "retained_paths": [list(p) for p in sorted(result.s)],
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
