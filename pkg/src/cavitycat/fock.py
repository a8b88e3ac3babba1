"""Truncated Fock-space primitives for a single cavity mode.

Conventions: hbar = 1, interaction times enter only as products g*t,
and ``D(beta) = exp(beta a^dag - conj(beta) a)`` so that ``D(beta)|0> = |beta>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import ConfigError, TruncationError

TAIL_WIDTH = 5
TAIL_TOL = 1e-10


def truncation_for(alpha_mag: float) -> int:
    """Default Fock cutoff for a field of amplitude ``alpha_mag``.

    ``ceil(|a|^2 + 8|a| + 10)`` keeps about eight Poisson standard
    deviations above the mean photon number.
    """
    a = abs(alpha_mag)
    return int(math.ceil(a * a + 8 * a + 10))


def tail_mass(amps: np.ndarray, width: int = TAIL_WIDTH) -> float:
    probs = np.abs(amps) ** 2
    return float(probs[max(len(probs) - width, 0):].sum())


@dataclass(frozen=True, eq=False)
class FieldState:
    """Pure cavity state as amplitudes over photon numbers ``0..n_max``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amps must be a 1-d vector with n_max >= 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "FieldState":
        return FieldState(self.amps / math.sqrt(self.norm_sq()))

    def mean_photon(self) -> float:
        probs = np.abs(self.amps) ** 2
        return float(probs @ np.arange(probs.size) / probs.sum())

    def padded(self, n_max: int) -> "FieldState":
        if n_max < self.n_max:
            raise ValueError("padding cannot shrink a state")
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[: self.amps.size] = self.amps
        return FieldState(amps)

    def to_json(self) -> dict:
        return {"n_max": self.n_max, "re": self.amps.real.tolist(), "im": self.amps.imag.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "FieldState":
        try:
            amps = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
            n_max = int(doc["n_max"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed field-state document: {exc}") from exc
        if amps.size != n_max + 1:
            raise ConfigError(f"field-state document has {amps.size} amplitudes for n_max={n_max}")
        return cls(amps)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density operator in the truncated Fock basis."""

    elems: np.ndarray

    def __post_init__(self):
        elems = np.asarray(self.elems, dtype=complex)
        if elems.ndim != 2 or elems.shape[0] != elems.shape[1]:
            raise ValueError("density matrix must be square")
        elems = elems.copy()
        elems.setflags(write=False)
        object.__setattr__(self, "elems", elems)

    @property
    def n_max(self) -> int:
        return self.elems.shape[0] - 1

    def trace(self) -> complex:
        return complex(np.trace(self.elems))

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.elems, self.elems).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elems - self.elems.conj().T)))

    def padded(self, n_max: int) -> "DensityMatrix":
        if n_max < self.n_max:
            raise ValueError("padding cannot shrink a density matrix")
        out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        d = self.elems.shape[0]
        out[:d, :d] = self.elems
        return DensityMatrix(out)

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "re": self.elems.real.ravel().tolist(),
            "im": self.elems.imag.ravel().tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DensityMatrix":
        try:
            n_max = int(doc["n_max"])
            flat = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
            return cls(flat.reshape(n_max + 1, n_max + 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed density-matrix document: {exc}") from exc


@dataclass(frozen=True)
class CoherentSuperposition:
    """``sum_k w_k |mu_k>`` with exact (untruncated) coherent components."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(w), complex(mu)) for w, mu in self.terms)
        if not terms:
            raise ValueError("a superposition needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    @property
    def centers(self) -> np.ndarray:
        return np.array([mu for _, mu in self.terms])

    def gram(self) -> np.ndarray:
        mu = self.centers
        return coherent_overlap(mu[:, None], mu[None, :])

    def norm_sq(self) -> float:
        w = self.weights
        val = w.conj() @ self.gram() @ w
        return float(val.real)

    def normalized(self) -> "CoherentSuperposition":
        s = math.sqrt(self.norm_sq())
        return CoherentSuperposition(tuple((w / s, mu) for w, mu in self.terms))

    def max_amplitude(self) -> float:
        return float(np.max(np.abs(self.centers)))


def coherent_overlap(gamma, mu):
    """``<gamma|mu>`` for coherent states; broadcasts over arrays."""
    gamma = np.asarray(gamma, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    return np.exp(-0.5 * np.abs(gamma) ** 2 - 0.5 * np.abs(mu) ** 2 + gamma.conj() * mu)


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Fock amplitudes of ``|alpha>`` by the recurrence ``c_n = c_{n-1} alpha / sqrt(n)``.

    No truncation check; see :func:`coherent_state` for the guarded version.
    """
    alpha = complex(alpha)
    amps = np.empty(n_max + 1, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, n_max + 1):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent_state(alpha: complex, n_max: int | None = None) -> FieldState:
    if n_max is None:
        n_max = truncation_for(abs(alpha))
    amps = coherent_amplitudes(alpha, n_max)
    tail = tail_mass(amps)
    if tail >= TAIL_TOL:
        raise TruncationError(
            f"n_max={n_max} too small for |alpha|={abs(alpha):.4g}: tail mass {tail:.3e}; "
            f"use n_max >= {truncation_for(abs(alpha))}"
        )
    return FieldState(amps)


def fock_state(n: int, n_max: int) -> FieldState:
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return FieldState(amps)


def iter_displacement_diagonal(beta, k: int, count: int) -> Iterator[np.ndarray]:
    """Yield ``<n+k|D(beta)|n>`` for ``n = 0 .. count-1``.

    ``beta`` may be an array; the recurrence runs elementwise. The values are
    ``sqrt(n!/(n+k)!) beta^k exp(-|beta|^2/2) L_n^(k)(|beta|^2)`` computed by the
    three-term Laguerre recurrence rescaled so that no factorial is formed.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    head = np.exp(-0.5 * x) * np.ones_like(beta)
    for j in range(1, k + 1):
        head = head * beta / math.sqrt(j)
    if count <= 0:
        return
    prev = head
    yield prev
    if count == 1:
        return
    cur = (1.0 + k - x) * prev / math.sqrt(k + 1.0)
    yield cur
    for n in range(1, count - 1):
        nxt = ((2 * n + 1 + k - x) * cur - math.sqrt(n * (n + k)) * prev) / math.sqrt(
            (n + 1.0) * (n + k + 1.0)
        )
        prev, cur = cur, nxt
        yield cur


def displacement_element(m: int, n: int, beta: complex) -> complex:
    """``<m|D(beta)|n>`` from the associated-Laguerre closed form."""
    if m < 0 or n < 0:
        raise ValueError("photon numbers must be non-negative")
    if m >= n:
        val = None
        for val in iter_displacement_diagonal(beta, m - n, n + 1):
            pass
        return complex(val)
    # <m|D|n> = (-1)^(n-m) conj(<n|D|m>)
    return (-1) ** (n - m) * complex(np.conj(displacement_element(n, m, beta)))


def displacement_matrix(beta: complex, rows: int, cols: int | None = None) -> np.ndarray:
    """Block ``<m|D(beta)|n>`` for ``m < rows``, ``n < cols`` (exact elements, not a truncated exponential)."""
    if cols is None:
        cols = rows
    out = np.zeros((rows, cols), dtype=complex)
    size = max(rows, cols)
    for k in range(size):
        diag = np.array(list(iter_displacement_diagonal(beta, k, size - k)))
        lower = min(rows - k, cols)
        if lower > 0:
            idx = np.arange(lower)
            out[idx + k, idx] = diag[:lower]
        if k > 0:
            upper = min(cols - k, rows)
            if upper > 0:
                idx = np.arange(upper)
                out[idx, idx + k] = (-1) ** k * np.conj(diag[:upper])
    return out


State = Union[FieldState, CoherentSuperposition]


def superposition_amplitudes(s: CoherentSuperposition, n_max: int) -> np.ndarray:
    amps = np.zeros(n_max + 1, dtype=complex)
    for w, mu in s.terms:
        amps += w * coherent_amplitudes(mu, n_max)
    return amps


def superposition_to_state(s: CoherentSuperposition, n_max: int | None = None) -> FieldState:
    """Fock rendering of a superposition, renormalized; raises if the cutoff clips it."""
    if n_max is None:
        n_max = truncation_for(s.max_amplitude())
    amps = superposition_amplitudes(s.normalized(), n_max)
    tail = tail_mass(amps)
    if tail >= TAIL_TOL or abs(np.vdot(amps, amps).real - 1.0) > 1e-8:
        raise TruncationError(f"n_max={n_max} clips the superposition (tail mass {tail:.3e})")
    return FieldState(amps).normalized()


def overlap(a: State, b: State) -> complex:
    """``<a|b>``. Coherent superpositions use the exact Gaussian overlap."""
    if isinstance(a, CoherentSuperposition) and isinstance(b, CoherentSuperposition):
        g = coherent_overlap(a.centers[:, None], b.centers[None, :])
        return complex(a.weights.conj() @ g @ b.weights)
    if isinstance(a, CoherentSuperposition):
        return complex(np.conj(overlap(b, a)))
    if isinstance(b, CoherentSuperposition):
        return complex(np.vdot(a.amps, superposition_amplitudes(b, a.n_max)))
    if a.n_max != b.n_max:
        n = max(a.n_max, b.n_max)
        a, b = a.padded(n), b.padded(n)
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: State, b: State) -> float:
    """``|<a|b>|^2`` between the normalized inputs."""
    na = overlap(a, a).real
    nb = overlap(b, b).real
    return float(abs(overlap(a, b)) ** 2 / (na * nb))


def to_density(state: FieldState) -> DensityMatrix:
    return DensityMatrix(np.outer(state.amps, state.amps.conj()))


def superposition_to_density(s: CoherentSuperposition, n_max: int | None = None) -> DensityMatrix:
    return to_density(superposition_to_state(s, n_max))


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def expect_annihilation(state: FieldState) -> complex:
    """``<a>`` for a normalized state."""
    amps = state.amps
    n = np.arange(1, amps.size)
    return complex(np.vdot(amps[:-1], np.sqrt(n) * amps[1:]))

