"""Resonant atom passages through the cavity.

Each atom enters in the ground state, interacts resonantly for a scaled time
``gt`` and is detected. Detection in the ground state multiplies the photon
amplitudes by ``cos(gt sqrt(n))``; repeated passages split a coherent field
into ``2**N`` phase-shifted branches.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ZeroProjectionError
from .fock import (
    CoherentSuperposition,
    FieldState,
    coherent_state,
    expect_annihilation,
    fidelity,
    superposition_to_state,
    truncation_for,
)

ZERO_PROB = 1e-14


class Detection(str, Enum):
    GROUND = "ground"
    EXCITED = "excited"


@dataclass(frozen=True)
class AtomPassage:
    gt: float
    detected: Detection = Detection.GROUND

    def __post_init__(self):
        if not math.isfinite(self.gt) or self.gt < 0:
            raise ValueError(f"gt must be finite and >= 0, got {self.gt}")
        object.__setattr__(self, "detected", Detection(self.detected))


@dataclass(frozen=True)
class ApproxParams:
    """Phase and rotation picked up by one branch in the linearized picture."""

    eta: float
    theta: float
    nbar: float

    @classmethod
    def from_gt(cls, gt: float, nbar: float) -> "ApproxParams":
        root = math.sqrt(nbar)
        return cls(eta=gt * root / 2, theta=gt / (2 * root), nbar=nbar)


def _sqrt_n(size: int) -> np.ndarray:
    return np.sqrt(np.arange(size, dtype=float))


def branch_probabilities(state: FieldState, gt: float) -> tuple[float, float]:
    """Ground and excited detection probabilities for one passage."""
    probs = np.abs(state.amps) ** 2
    c2 = np.cos(gt * _sqrt_n(probs.size)) ** 2
    total = probs.sum()
    p_ground = float(probs @ c2 / total)
    p_excited = float(probs @ (1.0 - c2) / total)
    return p_ground, p_excited


def project_atom(state: FieldState, passage: AtomPassage) -> tuple[FieldState, float]:
    """Condition the field on the detected atomic state.

    Returns the renormalized field and the probability of that detection
    outcome. Raises :class:`ZeroProjectionError` below ``1e-14``.
    """
    amps = state.amps / math.sqrt(state.norm_sq())
    root = _sqrt_n(amps.size)
    if passage.detected is Detection.GROUND:
        out = amps * np.cos(passage.gt * root)
    else:
        # one photon absorbed: |g,n> -> -i sin(gt sqrt n) |e,n-1>
        out = np.zeros_like(amps)
        out[:-1] = -1j * np.sin(passage.gt * root[1:]) * amps[1:]
    prob = float(np.vdot(out, out).real)
    if prob < ZERO_PROB:
        raise ZeroProjectionError(
            f"detection '{passage.detected.value}' at gt={passage.gt:.6g} has probability {prob:.3e}",
            probability=prob,
        )
    return FieldState(out / math.sqrt(prob)), prob


def multi_atom_sequence(
    alpha: complex, passages: Sequence[AtomPassage], n_max: int | None = None
) -> tuple[FieldState, float]:
    """Field after a run of atoms, all conditioned on ground-state detection."""
    if not passages:
        raise ValueError("at least one passage is required")
    for p in passages:
        if p.detected is not Detection.GROUND:
            raise ValueError("the preparation protocol conditions every atom on the ground state")
    state = coherent_state(alpha, n_max)
    joint = 1.0
    for p in passages:
        state, prob = project_atom(state, p)
        joint *= prob
    return state, joint


def prepare(alpha: complex, gts: Sequence[float], n_max: int | None = None) -> tuple[FieldState, float]:
    """Shorthand for :func:`multi_atom_sequence` with ground detections."""
    return multi_atom_sequence(alpha, [AtomPassage(gt) for gt in gts], n_max)


def sqrt_expansion(n: float, nbar: float) -> float:
    """Second-order Taylor expansion of ``sqrt(n)`` about ``nbar``."""
    if nbar <= 0:
        raise ValueError("nbar must be positive")
    d = n - nbar
    return math.sqrt(nbar) + d / (2 * math.sqrt(nbar)) - d * d / (8 * nbar**1.5)


def sign_vectors(count: int):
    return list(itertools.product((1, -1), repeat=count))


def approximate_superposition(alpha: complex, gts: Sequence[float]) -> CoherentSuperposition:
    """Linearized-phase approximation: ``2**N`` coherent states on the circle ``|alpha|``.

    Each sign vector ``s`` contributes weight ``2**-N exp(i sum s_k eta_k)`` and
    center ``alpha exp(i sum s_k theta_k)``. The quadratic distortion term is
    deliberately left out.
    """
    if abs(alpha) == 0:
        raise ValueError("alpha must be nonzero")
    nbar = abs(alpha) ** 2
    params = [ApproxParams.from_gt(gt, nbar) for gt in gts]
    scale = 2.0 ** -len(gts)
    terms = []
    for signs in sign_vectors(len(gts)):
        eta = sum(s * p.eta for s, p in zip(signs, params))
        theta = sum(s * p.theta for s, p in zip(signs, params))
        terms.append((scale * np.exp(1j * eta), complex(alpha) * np.exp(1j * theta)))
    return CoherentSuperposition(tuple(terms))


def compass_gts(alpha_prime: float) -> tuple[float, float]:
    """Interaction times giving rotations of pi/2 and pi/4 for ``|alpha| = alpha_prime``."""
    return math.pi * alpha_prime, math.pi * alpha_prime / 2


def compass_state(alpha_prime: float) -> CoherentSuperposition:
    """Four-component state with lobes at ``+-alpha', +-i alpha'``.

    Built from :func:`approximate_superposition` with ``alpha = alpha' e^{i pi/4}``,
    so that ``eta1 = pi alpha'^2 / 2`` and ``eta2 = pi alpha'^2 / 4``.
    """
    return approximate_superposition(alpha_prime * np.exp(1j * math.pi / 4), compass_gts(alpha_prime))


def compass_superposition(alpha_prime: float, eta1: float, eta2: float) -> CoherentSuperposition:
    """Same four centers as :func:`compass_state` with arbitrary branch phases."""
    a = float(alpha_prime)
    return CoherentSuperposition(
        (
            (0.25 * np.exp(-1j * (eta1 - eta2)), a),
            (0.25 * np.exp(1j * (eta1 + eta2)), -a),
            (0.25 * np.exp(1j * (eta1 - eta2)), 1j * a),
            (0.25 * np.exp(-1j * (eta1 + eta2)), -1j * a),
        )
    )


def fidelity_exact_vs_approx(alpha: complex, gts: Sequence[float], n_max: int | None = None) -> float:
    exact, _ = prepare(alpha, gts, n_max)
    approx = approximate_superposition(alpha, gts)
    return fidelity(exact, approx)


def branch_states(alpha: complex, gts: Sequence[float], n_max: int | None = None) -> list[tuple[tuple, FieldState]]:
    """The exact (undistorted-by-approximation) branches ``c_n exp(i sqrt(n) sum s_k gt_k)``.

    Returned as ``(signs, normalized state)`` pairs in :func:`sign_vectors` order.
    """
    base = coherent_state(alpha, n_max)
    root = _sqrt_n(base.amps.size)
    out = []
    for signs in sign_vectors(len(gts)):
        phase = sum(s * gt for s, gt in zip(signs, gts))
        out.append((signs, FieldState(base.amps * np.exp(1j * phase * root))))
    return out


def branch_centroid_angles(alpha: complex, gts: Sequence[float], n_max: int | None = None) -> list[float]:
    """``arg <a>`` of every exact branch, in ``[0, 2 pi)``."""
    return [
        float(np.angle(expect_annihilation(b)) % (2 * math.pi)) for _, b in branch_states(alpha, gts, n_max)
    ]


def approx_state_for(alpha: complex, gts: Sequence[float], n_max: int | None = None) -> FieldState:
    """Fock rendering of :func:`approximate_superposition`, matched to the exact cutoff."""
    if n_max is None:
        n_max = truncation_for(abs(alpha))
    return superposition_to_state(approximate_superposition(alpha, gts), n_max)
