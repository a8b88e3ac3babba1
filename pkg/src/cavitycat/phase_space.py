"""Wigner and Husimi-Q distributions, phase-space grids, Q-function zeros.

Normalization: both distributions integrate to one over the complex plane
``gamma = x + i y`` with measure ``dx dy``; the vacuum Wigner peak is ``2/pi``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import ndimage, optimize

from .errors import ConstraintError, GridTooLargeError, NumericalGuardError, TruncationError
from .fock import (
    CoherentSuperposition,
    DensityMatrix,
    FieldState,
    coherent_overlap,
    iter_displacement_diagonal,
    to_density,
)

MAX_GRID_POINTS = 4_000_000
ROWS_PER_CHUNK = 8
IMAG_TOL = 1e-10

PhaseInput = Union[FieldState, DensityMatrix, CoherentSuperposition]


def _as_density(obj) -> DensityMatrix:
    if isinstance(obj, DensityMatrix):
        return obj
    if isinstance(obj, FieldState):
        return to_density(obj.normalized())
    raise TypeError(f"expected FieldState or DensityMatrix, got {type(obj).__name__}")


def required_cutoff(gamma) -> int:
    """Smallest ``n_max`` that passes the Wigner guard ``|gamma| < sqrt(n_max)``."""
    r2 = float(np.max(np.abs(np.asarray(gamma)) ** 2, initial=0.0))
    return int(math.floor(r2)) + 1


def _wigner_sum(elems: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    # W = (2/pi) sum_{n,m} rho_nm (-1)^n <m|D(2 gamma)|n>, walked diagonal by diagonal
    beta = 2.0 * gamma
    size = elems.shape[0]
    total = np.zeros(gamma.shape, dtype=complex)
    for k in range(size):
        upper = elems.diagonal(k)
        lower = elems.diagonal(-k)
        for n, f in enumerate(iter_displacement_diagonal(beta, k, size - k)):
            sign = -1.0 if n % 2 else 1.0
            if upper[n] != 0:
                total += (sign * upper[n]) * f
            if k and lower[n] != 0:
                total += (sign * lower[n]) * np.conj(f)
    return total


def wigner(rho: FieldState | DensityMatrix, gamma):
    """Wigner function from the Fock representation.

    Uses the displaced-parity kernel ``(2/pi) Tr[rho D(2 gamma) P]`` with exact
    Laguerre matrix elements. ``gamma`` may be a scalar or an array.
    """
    rho = _as_density(rho)
    gamma_arr = np.asarray(gamma, dtype=complex)
    if np.any(np.abs(gamma_arr) ** 2 >= rho.n_max):
        raise TruncationError(
            f"|gamma| up to {np.max(np.abs(gamma_arr)):.3g} needs n_max > {required_cutoff(gamma_arr) - 1}; "
            f"got {rho.n_max} (pad the state first)"
        )
    total = _wigner_sum(rho.elems, gamma_arr)
    trace = abs(rho.trace())
    if np.max(np.abs(total.imag), initial=0.0) > IMAG_TOL * max(trace, 1.0):
        raise NumericalGuardError("Wigner sum has a non-negligible imaginary part; input not Hermitian?")
    w = (2.0 / math.pi) * total.real / trace
    return float(w) if np.ndim(w) == 0 else w


def wigner_dyads(coeffs, kets, bras, gamma):
    """Wigner function of ``sum_j c_j |ket_j><bra_j|`` (unnormalized).

    Each dyad contributes ``(2/pi) <bra|ket> exp(-2 (gamma - ket)(conj(gamma) - conj(bra)))``.
    """
    g = np.asarray(gamma, dtype=complex)[..., None]
    coeffs = np.asarray(coeffs, dtype=complex)
    kets = np.asarray(kets, dtype=complex)
    bras = np.asarray(bras, dtype=complex)
    ov = coherent_overlap(bras, kets)
    terms = coeffs * ov * np.exp(-2.0 * (g - kets) * (g.conj() - bras.conj()))
    return (2.0 / math.pi) * terms.sum(axis=-1)


def wigner_superposition(s: CoherentSuperposition, gamma):
    """Exact Wigner function of a coherent superposition (no truncation)."""
    s = s.normalized()
    w = s.weights
    mu = s.centers
    coeffs = (w[:, None] * w.conj()[None, :]).ravel()
    kets = np.repeat(mu, mu.size)
    bras = np.tile(mu, mu.size)
    val = wigner_dyads(coeffs, kets, bras, gamma).real
    return float(val) if np.ndim(val) == 0 else val


def _coherent_bra_columns(gamma: np.ndarray, size: int) -> np.ndarray:
    # column n holds <gamma|n> = exp(-|gamma|^2/2) conj(gamma)^n / sqrt(n!)
    cols = np.empty(gamma.shape + (size,), dtype=complex)
    cols[..., 0] = np.exp(-0.5 * np.abs(gamma) ** 2)
    gc = gamma.conj()
    for n in range(1, size):
        cols[..., n] = cols[..., n - 1] * gc / math.sqrt(n)
    return cols


def superposition_amplitude(s: CoherentSuperposition, gamma):
    """``<gamma|psi>`` for a superposition (as given; not renormalized)."""
    g = np.asarray(gamma, dtype=complex)[..., None]
    return (s.weights * coherent_overlap(g, s.centers)).sum(axis=-1)


def q_function(state: PhaseInput, gamma):
    """Husimi ``Q(gamma) = <gamma|rho|gamma> / pi``."""
    gamma_arr = np.asarray(gamma, dtype=complex)
    if isinstance(state, CoherentSuperposition):
        amp = superposition_amplitude(state, gamma_arr)
        val = np.abs(amp) ** 2 / (math.pi * state.norm_sq())
    elif isinstance(state, FieldState):
        bra = _coherent_bra_columns(gamma_arr, state.amps.size)
        amp = bra @ state.amps
        val = np.abs(amp) ** 2 / (math.pi * state.norm_sq())
    elif isinstance(state, DensityMatrix):
        bra = _coherent_bra_columns(gamma_arr, state.elems.shape[0])
        val = ((bra @ state.elems) * bra.conj()).sum(axis=-1).real / (math.pi * state.trace().real)
    else:
        raise TypeError(f"unsupported input {type(state).__name__}")
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ValueError("grid ranges must be increasing")

    @classmethod
    def square(cls, half_width: float, step: float) -> "GridSpec":
        return cls(-half_width, half_width, -half_width, half_width, step)

    def _axis(self, lo: float, hi: float) -> np.ndarray:
        count = int(round((hi - lo) / self.step)) + 1
        return lo + self.step * np.arange(count)

    @property
    def xs(self) -> np.ndarray:
        return self._axis(self.re_min, self.re_max)

    @property
    def ys(self) -> np.ndarray:
        return self._axis(self.im_min, self.im_max)

    @property
    def size(self) -> int:
        return self.xs.size * self.ys.size

    def points(self) -> np.ndarray:
        """Complex points, shape ``(len(ys), len(xs))``; rows run along ``y``."""
        return self.xs[None, :] + 1j * self.ys[:, None]


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    spec: GridSpec
    values: np.ndarray

    def integral(self) -> float:
        return float(self.values.sum() * self.spec.step**2)

    def to_csv(self) -> str:
        xs, ys = self.spec.xs, self.spec.ys
        lines = ["x,y,value"]
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                lines.append(f"{x:.10g},{y:.10g},{self.values[j, i]:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        s = self.spec
        return {
            "re_range": [s.re_min, s.re_max],
            "im_range": [s.im_min, s.im_max],
            "step": s.step,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PhaseSpaceGrid":
        spec = GridSpec(doc["re_range"][0], doc["re_range"][1], doc["im_range"][0], doc["im_range"][1], doc["step"])
        return cls(spec, np.asarray(doc["values"], dtype=float))


def _evaluator(kind: str, obj: PhaseInput, spec: GridSpec) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "q":
        if isinstance(obj, FieldState):
            obj = obj.normalized()
        return lambda g: np.asarray(q_function(obj, g), dtype=float)
    if kind == "wigner":
        if isinstance(obj, CoherentSuperposition):
            s = obj.normalized()
            return lambda g: np.asarray(wigner_superposition(s, g), dtype=float)
        rho = _as_density(obj)
        corners = np.array([complex(x, y) for x in (spec.re_min, spec.re_max) for y in (spec.im_min, spec.im_max)])
        need = required_cutoff(corners)
        if rho.n_max < need:
            # zero-padding is exact and lifts the kernel guard
            rho = rho.padded(need)
        return lambda g: np.asarray(wigner(rho, g), dtype=float)
    raise ValueError(f"unknown distribution kind {kind!r}")


def evaluate_grid(kind: str, obj: PhaseInput, spec: GridSpec, threads: int = 1) -> PhaseSpaceGrid:
    """Evaluate ``kind`` ('wigner' or 'q') on every grid point.

    Rows are processed in fixed blocks so the result does not depend on
    ``threads``.
    """
    if spec.size > MAX_GRID_POINTS:
        raise GridTooLargeError(f"grid has {spec.size} points (limit {MAX_GRID_POINTS})")
    f = _evaluator(kind, obj, spec)
    pts = spec.points()
    blocks = [pts[i : i + ROWS_PER_CHUNK] for i in range(0, pts.shape[0], ROWS_PER_CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(f, blocks))
    else:
        parts = [f(b) for b in blocks]
    return PhaseSpaceGrid(spec, np.vstack(parts))


def count_lobes(grid: PhaseSpaceGrid, fraction: float = 0.5) -> int:
    """Connected components (8-neighbour) above ``fraction`` of the grid maximum."""
    mask = grid.values > fraction * grid.values.max()
    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    return int(count)


@dataclass(frozen=True)
class QZero:
    n1: int
    n2: int
    gamma_mag: float
    ray_angle: float = math.pi / 4

    @property
    def alpha_prime(self) -> float:
        return math.sqrt(2 * (self.n1 - self.n2))


def q_zero_closed_form(n1: int, n2: int) -> QZero:
    """Exact Q-function zero of the four-lobe state on the ``pi/4`` ray.

    Valid for lobes at ``+-a, +-ia`` with ``a**2 = 2 (n1 - n2)`` and branch
    phases ``eta1 = pi a^2 / 2``, ``eta2 = pi a^2 / 4``.
    """
    if not (n1 > n2 >= 1):
        raise ConstraintError(f"need n1 > n2 >= 1, got n1={n1}, n2={n2}")
    lead = 3 * n2 - n1 + 1
    if lead <= 0:
        raise ConstraintError(f"3*n2 - n1 + 1 = {lead} <= 0 gives no zero at positive |gamma|")
    return QZero(n1, n2, math.pi * lead / (2 * math.sqrt(n1 - n2)))


def q_zero_scan(s: CoherentSuperposition, ray_angle: float, r_max: float, step: float = 0.01) -> list[float]:
    """Radii of exact zeros of ``<gamma|psi>`` along ``gamma = r e^{i ray_angle}``.

    Local minima of ``|A|^2`` on a uniform mesh are bracketed; a sign change of
    ``A`` projected on its phase at the left end of the bracket is bisected, and
    the root is kept only if ``|A|^2 < 1e-20``.
    """
    s = s.normalized()
    direction = np.exp(1j * ray_angle)

    def amp(r):
        return complex(superposition_amplitude(s, r * direction))

    rs = step * np.arange(1, int(math.floor(r_max / step + 1e-9)) + 1)
    mag = np.abs(superposition_amplitude(s, rs * direction)) ** 2
    roots = []
    for i in range(1, rs.size - 1):
        if not (mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]):
            continue
        lo, hi = rs[i - 1], rs[i + 1]
        a_lo = amp(lo)
        if a_lo == 0:
            continue
        ref = np.conj(a_lo) / abs(a_lo)

        def g(r):
            return (amp(r) * ref).real

        if g(hi) >= 0:
            continue
        r0 = optimize.bisect(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(amp(r0)) ** 2 < 1e-20 and (not roots or abs(r0 - roots[-1]) > step / 2):
            roots.append(float(r0))
    return roots
