"""Zero-temperature cavity damping of the four-lobe superposition.

Two independent routes: the closed-form evolution of coherent dyads
(``|mu><nu| -> <nu|mu>^(1 - e^{-kt}) |mu_t><nu_t|`` with ``mu_t = mu e^{-kt/2}``)
and a fixed-step RK4 integration of the damping master equation in the Fock
basis. All times are the dimensionless product ``kappa * t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StepSizeError
from .fock import (
    CoherentSuperposition,
    DensityMatrix,
    coherent_amplitudes,
    coherent_overlap,
    superposition_to_density,
    truncation_for,
)
from .jc import compass_superposition
from .phase_space import wigner_dyads

MAX_RATE_STEP = 0.1  # kappa * dt * n_max


@dataclass(frozen=True)
class DampingParams:
    kappa_t: float
    nbar_thermal: float = 0.0

    def __post_init__(self):
        if self.kappa_t < 0:
            raise ValueError("kappa_t must be >= 0")
        if self.nbar_thermal != 0:
            raise ValueError("only a zero-temperature reservoir is modelled")


@dataclass(frozen=True, eq=False)
class DyadSum:
    """``sum_j c_j |ket_j><bra_j|`` over coherent states."""

    coeffs: np.ndarray
    kets: np.ndarray
    bras: np.ndarray

    def __post_init__(self):
        for name in ("coeffs", "kets", "bras"):
            arr = np.asarray(getattr(self, name), dtype=complex).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dyads(cls, dyads) -> "DyadSum":
        c, k, b = zip(*dyads)
        return cls(np.array(c), np.array(k), np.array(b))

    @classmethod
    def from_superposition(cls, s: CoherentSuperposition) -> "DyadSum":
        w, mu = s.weights, s.centers
        return cls(
            (w[:, None] * w.conj()[None, :]).ravel(), np.repeat(mu, mu.size), np.tile(mu, mu.size)
        )

    @property
    def dyads(self):
        return list(zip(self.coeffs, self.kets, self.bras))

    def trace(self) -> complex:
        return complex((self.coeffs * coherent_overlap(self.bras, self.kets)).sum())

    def normalized(self) -> "DyadSum":
        return DyadSum(self.coeffs / self.trace().real, self.kets, self.bras)

    def hermiticity_error(self) -> float:
        """Largest mismatch between a dyad and its adjoint partner."""
        worst = 0.0
        for c, k, b in self.dyads:
            partner = np.abs(self.kets - b) + np.abs(self.bras - k)
            j = int(np.argmin(partner))
            worst = max(worst, float(partner[j]), abs(self.coeffs[j] - np.conj(c)))
        return worst

    def purity(self) -> float:
        # Tr(rho^2) = sum_ab c_a c_b <bra_a|ket_b> <bra_b|ket_a>
        g = coherent_overlap(self.bras[:, None], self.kets[None, :])
        return float((self.coeffs[:, None] * self.coeffs[None, :] * g * g.T).sum().real)

    def expectation_projector(self, mu: complex, nu: complex) -> complex:
        """``<mu| rho |nu>``."""
        return complex((self.coeffs * coherent_overlap(mu, self.kets) * coherent_overlap(self.bras, nu)).sum())

    def to_density(self, n_max: int) -> DensityMatrix:
        out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        cache = {}
        for c, k, b in self.dyads:
            for z in (k, b):
                if z not in cache:
                    cache[z] = coherent_amplitudes(z, n_max)
            out += c * np.outer(cache[k], cache[b].conj())
        return DensityMatrix(out)

    def wigner(self, gamma):
        val = (wigner_dyads(self.coeffs, self.kets, self.bras, gamma) / self.trace()).real
        return float(val) if np.ndim(val) == 0 else val


def analytic_decohered_state(alpha_prime: float, eta1: float, eta2: float, kappa_t: float) -> DyadSum:
    """Damped four-lobe state as 16 coherent dyads, renormalized to unit trace.

    Diagonal dyads keep weight 1/16. Opposite-lobe coherences decay with
    ``exp(-2 a^2 x)`` and adjacent-lobe ones with ``exp(-a^2 (1 +- i) x)``,
    ``x = 1 - exp(-kappa_t)``. The imaginary part is the phase of the
    coherent overlap ``<bra|ket>`` raised to the power ``x``.
    """
    if alpha_prime <= 0:
        raise ValueError("alpha_prime must be positive")
    DampingParams(kappa_t)
    a2 = alpha_prime**2
    x = -math.expm1(-kappa_t)
    at = alpha_prime * math.exp(-kappa_t / 2)
    opp = math.exp(-2 * a2 * x)
    adj_p = np.exp(-a2 * (1 + 1j) * x)  # <i a|a>-type pairs
    adj_m = np.exp(-a2 * (1 - 1j) * x)  # <a|i a>-type pairs
    e = lambda phase: np.exp(1j * phase)
    A, mA, iA, miA = at, -at, 1j * at, -1j * at
    dyads = [
        (1.0, A, A), (1.0, mA, mA), (1.0, iA, iA), (1.0, miA, miA),
        (opp * e(-2 * eta1), A, mA),
        (opp * e(2 * eta1), mA, A),
        (opp * e(2 * eta1), iA, miA),
        (opp * e(-2 * eta1), miA, iA),
        (adj_p * e(-2 * (eta1 - eta2)), A, iA),
        (adj_p * e(-2 * eta2), miA, A),
        (adj_p * e(2 * (eta1 + eta2)), mA, miA),
        (adj_p * e(-2 * eta2), iA, mA),
        (adj_m * e(2 * (eta1 - eta2)), iA, A),
        (adj_m * e(2 * eta2), A, miA),
        (adj_m * e(-2 * (eta1 + eta2)), miA, mA),
        (adj_m * e(2 * eta2), mA, iA),
    ]
    raw = DyadSum.from_dyads([(c / 16, k, b) for c, k, b in dyads])
    return raw.normalized()


def evolve_dyads(rho: DyadSum, kappa_t: float) -> DyadSum:
    """Damping applied dyad by dyad to an arbitrary coherent-dyad sum."""
    x = -math.expm1(-kappa_t)
    shrink = math.exp(-kappa_t / 2)
    # <bra|ket>^x taken as exp(x * log<bra|ket>) with the unwrapped exponent
    z = -0.5 * np.abs(rho.bras) ** 2 - 0.5 * np.abs(rho.kets) ** 2 + rho.bras.conj() * rho.kets
    factor = np.exp(x * z)
    return DyadSum(rho.coeffs * factor, rho.kets * shrink, rho.bras * shrink)


def _damping_rhs(rho: np.ndarray, sq: np.ndarray, num: np.ndarray) -> np.ndarray:
    # d rho/dt = a rho a^dag - (N rho + rho N)/2, with kappa = 1
    out = -0.5 * (num[:, None] + num[None, :]) * rho
    out[:-1, :-1] += sq[:, None] * sq[None, :] * rho[1:, 1:]
    return out


def steps_for(kappa_t: float, n_max: int) -> int:
    return max(1, int(math.ceil(kappa_t * n_max / MAX_RATE_STEP - 1e-12)))


def lindblad_evolve(rho0: DensityMatrix, kappa_t: float, steps: int | None = None) -> DensityMatrix:
    """Fixed-step RK4 integration of the zero-temperature damping equation."""
    DampingParams(kappa_t)
    n_max = rho0.n_max
    if steps is None:
        steps = steps_for(kappa_t, n_max)
    if steps < 1:
        raise StepSizeError("steps must be positive")
    h = kappa_t / steps
    if h * n_max > MAX_RATE_STEP * (1 + 1e-12):
        raise StepSizeError(f"kappa*dt*n_max = {h * n_max:.3g} exceeds {MAX_RATE_STEP}; use >= {steps_for(kappa_t, n_max)} steps")
    sq = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    num = np.arange(n_max + 1, dtype=float)
    rho = np.array(rho0.elems)
    for _ in range(steps):
        k1 = _damping_rhs(rho, sq, num)
        k2 = _damping_rhs(rho + 0.5 * h * k1, sq, num)
        k3 = _damping_rhs(rho + 0.5 * h * k2, sq, num)
        k4 = _damping_rhs(rho + h * k3, sq, num)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return DensityMatrix(rho)


def lindblad_trajectory(rho0: DensityMatrix, kappa_ts: Sequence[float]) -> list[DensityMatrix]:
    """States at increasing ``kappa_ts``, integrating segment by segment."""
    out = []
    rho, t = rho0, 0.0
    for kt in kappa_ts:
        if kt < t:
            raise ValueError("kappa_ts must be non-decreasing")
        if kt > t:
            rho = lindblad_evolve(rho, kt - t)
        out.append(rho)
        t = kt
    return out


def cross_term_wigner(eta1: float, alpha_prime: float, kappa_t: float, gamma):
    """Wigner contribution of the opposite-lobe coherences.

    Expressed for the 1/16-weighted dyad sum before renormalization:
    ``exp(-2|g|^2 - 2 a^2 x) / (4 pi) * [cos(2 eta1 + 4 a_t Im g) + cos(2 eta1 + 4 a_t Re g)]``.
    Along a ray at angle ``theta`` the two cosines have spatial frequencies
    ``4 a_t sin(theta)`` and ``4 a_t cos(theta)``.
    """
    g = np.asarray(gamma, dtype=complex)
    x = -math.expm1(-kappa_t)
    at = alpha_prime * math.exp(-kappa_t / 2)
    env = np.exp(-2 * np.abs(g) ** 2 - 2 * alpha_prime**2 * x) / (4 * math.pi)
    val = env * (np.cos(2 * eta1 + 4 * at * g.imag) + np.cos(2 * eta1 + 4 * at * g.real))
    return float(val) if np.ndim(val) == 0 else val


def raw_trace(alpha_prime: float, eta1: float, eta2: float) -> float:
    """Trace of the 1/16-weighted dyad sum; constant in time under damping."""
    return compass_superposition(alpha_prime, eta1, eta2).norm_sq()


def _classify(ket: complex, bra: complex) -> str:
    if abs(ket) == 0:
        return "diagonal"
    r = bra / ket
    if abs(r - 1) < 1e-9:
        return "diagonal"
    if abs(r + 1) < 1e-9:
        return "opposite"
    return "adjacent"


def coherence_magnitudes(rho: DyadSum) -> dict:
    """Mean coefficient magnitude of each dyad class."""
    groups: dict[str, list[float]] = {"diagonal": [], "opposite": [], "adjacent": []}
    for c, k, b in rho.dyads:
        groups[_classify(k, b)].append(abs(c))
    return {name: float(np.mean(v)) for name, v in groups.items() if v}


def _fit_rate(xs, mags) -> float:
    slope, _ = np.polyfit(np.asarray(xs), np.log(np.asarray(mags)), 1)
    return float(-slope)


def decay_rate_diagnostic(
    alpha_prime: float,
    kappa_t_samples: Sequence[float],
    source: str = "analytic",
    n_max: int | None = None,
) -> tuple[float, float]:
    """Fitted decay rates of opposite- and adjacent-lobe coherences vs ``1 - e^{-kt}``.

    ``source='analytic'`` reads the dyad coefficients directly;
    ``source='lindblad'`` integrates the master equation and reads
    ``<mu_t| rho |nu_t>`` for ``nu_t = -mu_t`` and ``nu_t = i mu_t``.
    """
    samples = sorted(float(k) for k in kappa_t_samples)
    if len(samples) < 3:
        raise ValueError("need at least three kappa_t samples")
    xs = [-math.expm1(-k) for k in samples]
    eta1, eta2 = math.pi * alpha_prime**2 / 2, math.pi * alpha_prime**2 / 4
    if source == "analytic":
        mags = [coherence_magnitudes(analytic_decohered_state(alpha_prime, eta1, eta2, k)) for k in samples]
        central = [m["opposite"] for m in mags]
        adjacent = [m["adjacent"] for m in mags]
    elif source == "lindblad":
        if n_max is None:
            n_max = truncation_for(alpha_prime)
        rho0 = superposition_to_density(compass_superposition(alpha_prime, eta1, eta2), n_max)
        central, adjacent = [], []
        for k, rho in zip(samples, lindblad_trajectory(rho0, samples)):
            at = alpha_prime * math.exp(-k / 2)
            ket = coherent_amplitudes(at, n_max)
            opp = coherent_amplitudes(-at, n_max)
            adj = coherent_amplitudes(1j * at, n_max)
            central.append(abs(np.vdot(ket, rho.elems @ opp)))
            adjacent.append(abs(np.vdot(ket, rho.elems @ adj)))
    else:
        raise ValueError(f"unknown source {source!r}")
    return _fit_rate(xs, central), _fit_rate(xs, adjacent)


def _disk_points(center: complex, radius: float, step: float) -> np.ndarray:
    ax = np.arange(-radius, radius + step / 2, step)
    pts = center + ax[None, :] + 1j * ax[:, None]
    return pts[np.abs(pts - center) <= radius]


def contrasts(rho: DyadSum, alpha_t: float, radius: float = 0.7, step: float = 0.02) -> tuple[float, float]:
    """Wigner max-min in the central disk and in the fringe band between ``alpha_t`` and ``i alpha_t``."""
    central = rho.wigner(_disk_points(0j, radius, step))
    band = rho.wigner(_disk_points((alpha_t + 1j * alpha_t) / 2, radius, step))
    return float(central.max() - central.min()), float(band.max() - band.min())


def snapshot_summary(alpha_prime: float, eta1: float, eta2: float, kappa_t: float) -> dict:
    rho = analytic_decohered_state(alpha_prime, eta1, eta2, kappa_t)
    c, a = contrasts(rho, alpha_prime * math.exp(-kappa_t / 2))
    return {
        "kappa_t": kappa_t,
        "trace": rho.trace().real,
        "purity": rho.purity(),
        "central_contrast": c,
        "adjacent_contrast": a,
    }
