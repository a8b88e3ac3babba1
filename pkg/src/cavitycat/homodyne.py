"""Homodyne probe of the prepared field.

A reference field ``beta = |beta| e^{i phi}`` is injected (a displacement),
then a probe atom in the ground state crosses the cavity. The probability
that it leaves in the ground state, as a function of ``phi``, peaks where
the reference cancels one of the superposed components.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import TruncationError
from .fock import FieldState, displacement_matrix, truncation_for

NORM_TOL = 1e-8
SMOOTH_WINDOW = 5


@dataclass(frozen=True, eq=False)
class ProbeScan:
    phis: np.ndarray
    probs: np.ndarray
    beta_mag: float
    gt_p: float

    def __post_init__(self):
        if len(self.phis) != len(self.probs):
            raise ValueError("phis and probs differ in length")

    def to_csv(self) -> str:
        rows = ["phi,pg"] + [f"{p:.10g},{v:.17g}" for p, v in zip(self.phis, self.probs)]
        return "\n".join(rows) + "\n"


def output_cutoff(state: FieldState, beta_mag: float) -> int:
    """Cutoff large enough to hold ``D(beta)|state>``."""
    return max(state.n_max, truncation_for(math.sqrt(state.mean_photon()) + beta_mag))


def _check_norm(out: np.ndarray, ref: float):
    err = abs(np.vdot(out, out).real - ref)
    if err > NORM_TOL:
        raise TruncationError(f"displaced state lost norm {err:.3e}; raise n_max")


def inject_field(state: FieldState, beta: complex, n_max: int | None = None) -> FieldState:
    """Apply ``D(beta)``: ``amps'[m] = sum_n <m|D(beta)|n> amps[n]``."""
    if n_max is None:
        n_max = output_cutoff(state, abs(beta))
    dmat = displacement_matrix(beta, n_max + 1, state.amps.size)
    out = dmat @ state.amps
    _check_norm(out, state.norm_sq())
    return FieldState(out)


def probe_probability(state: FieldState, gt_p: float) -> float:
    """Ground-state survival probability of a probe atom: ``sum_m |F_m|^2 cos^2(gt_p sqrt m)``."""
    probs = np.abs(state.amps) ** 2
    c2 = np.cos(gt_p * np.sqrt(np.arange(probs.size))) ** 2
    return float(probs @ c2 / probs.sum())


def phase_grid(n_phi: int) -> np.ndarray:
    return 2 * math.pi * np.arange(n_phi) / n_phi


def probe_probabilities(
    prepared: FieldState, beta_mag: float, gt_p: float, phis, n_max: int | None = None, threads: int = 1
) -> np.ndarray:
    """``P_g(phi)`` at arbitrary ``phis``.

    ``<m|D(|b| e^{i phi})|n> = e^{i (m-n) phi} <m|D(|b|)|n>``, so the displacement
    block is built once and rephased per angle.
    """
    if n_max is None:
        n_max = output_cutoff(prepared, beta_mag)
    amps = prepared.amps / math.sqrt(prepared.norm_sq())
    dmat = displacement_matrix(beta_mag, n_max + 1, amps.size)
    m = np.arange(n_max + 1)
    n = np.arange(amps.size)
    c2 = np.cos(gt_p * np.sqrt(m)) ** 2

    def one(phi):
        # e^{i(m-n)phi}: rephase the input by e^{-i n phi}, the output by e^{i m phi}
        out = dmat @ (amps * np.exp(-1j * n * phi))
        probs = np.abs(out) ** 2
        _check_norm(out, 1.0)
        return float(probs @ c2)

    phis = np.asarray(phis, dtype=float)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, phis))
    else:
        vals = [one(p) for p in phis]
    return np.array(vals)


def phase_scan(
    prepared: FieldState, beta_mag: float, gt_p: float, n_phi: int, n_max: int | None = None, threads: int = 1
) -> ProbeScan:
    if beta_mag <= 0:
        raise ValueError("beta_mag must be positive")
    phis = phase_grid(n_phi)
    probs = probe_probabilities(prepared, beta_mag, gt_p, phis, n_max, threads)
    return ProbeScan(phis, probs, beta_mag, gt_p)


def find_peaks(scan: ProbeScan, prominence: float = 0.25) -> list[tuple[float, float]]:
    """Dominant maxima of a periodic scan, sorted by height.

    The scan is smoothed with a centred 5-sample circular window, then local
    maxima with prominence at least ``prominence * (max - min)`` are kept.
    Heights are reported from the raw scan.
    """
    probs = np.asarray(scan.probs, dtype=float)
    size = probs.size
    if size < 64:
        raise ValueError("find_peaks needs at least 64 samples")
    half = SMOOTH_WINDOW // 2
    padded = np.concatenate([probs[-half:], probs, probs[:half]])
    smooth = np.convolve(padded, np.ones(SMOOTH_WINDOW) / SMOOTH_WINDOW, mode="valid")
    span = smooth.max() - smooth.min()
    if span <= 0:
        return []
    # three periods so prominence sees the wrap-around
    tiled = np.concatenate([smooth, smooth, smooth])
    idx, _ = signal.find_peaks(tiled, prominence=prominence * span)
    idx = idx[(idx >= size) & (idx < 2 * size)] - size
    peaks = [(float(scan.phis[i]), float(probs[i])) for i in idx]
    return sorted(peaks, key=lambda p: -p[1])


def angular_distance(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)
