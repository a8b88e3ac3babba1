"""Reproduction checks run by ``cavitycat accept`` and the test suite.

Each ``criterion_*`` function returns a :class:`CriterionResult`; artifacts
are written only when an output directory is given.
"""
from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import decoherence, homodyne, jc, phase_space
from .errors import ZeroProjectionError
from .fock import coherent_state, superposition_to_density
from .io import dumps, write_text
from .phase_space import GridSpec

FIG1_ALPHA = 4.0
FIG1_GTS = (3.7 * math.pi, 1.9 * math.pi)
FIG3_ALPHA = 8.0
FIG3_GTS = (8 * math.pi, 4 * math.pi, 2 * math.pi)
FIG4_GTP = 1.5 * math.pi
SEED = 20040101


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] criterion {self.number:2d}: {self.name} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": bool(self.passed), "details": self.details}


def _timed(fn: Callable[..., CriterionResult]):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        limit = res.details.get("runtime_limit_s")
        if limit is not None and res.seconds >= limit:
            res.passed = False
            res.details["runtime_exceeded"] = True
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def fig1_state():
    return jc.prepare(FIG1_ALPHA, FIG1_GTS)


def ladder_rk4(amps: np.ndarray, gt: float, h_phase: float = 0.01):
    """Integrate the two-level ladder equations from an atom in the ground state.

    Returns ``(c_g[n], c_e[n-1])`` after scaled time ``gt``, with ``c_e`` stored
    at index ``n``. Independent of :func:`jc.project_atom`.
    """
    w = np.sqrt(np.arange(amps.size))
    cg = np.array(amps, dtype=complex)
    ce = np.zeros_like(cg)
    steps = max(1, math.ceil(gt * w.max() / h_phase))
    h = gt / steps

    def rhs(g, e):
        return -1j * w * e, -1j * w * g

    for _ in range(steps):
        a1, b1 = rhs(cg, ce)
        a2, b2 = rhs(cg + h / 2 * a1, ce + h / 2 * b1)
        a3, b3 = rhs(cg + h / 2 * a2, ce + h / 2 * b2)
        a4, b4 = rhs(cg + h * a3, ce + h * b3)
        cg = cg + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        ce = ce + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
    return cg, ce


@_timed
def criterion_1(threads: int = 1) -> CriterionResult:
    """Four Q lobes for the two-atom state."""
    state, _ = fig1_state()
    grid = phase_space.evaluate_grid("q", state, GridSpec.square(6, 0.05), threads)
    lobes = phase_space.count_lobes(grid)
    return CriterionResult(1, "four-component Q structure", lobes == 4,
                           {"lobes": lobes, "runtime_limit_s": 60})


@_timed
def criterion_2(threads: int = 1) -> CriterionResult:
    """Eight Q lobes after three atoms."""
    state, _ = jc.prepare(FIG3_ALPHA, FIG3_GTS)
    grid = phase_space.evaluate_grid("q", state, GridSpec.square(12, 0.05), threads)
    lobes = phase_space.count_lobes(grid)
    return CriterionResult(2, "eight-component generalization", lobes == 8,
                           {"lobes": lobes, "n_max": state.n_max, "runtime_limit_s": 240})


STATED_QZERO_TARGETS = {(2, 1): math.pi, (3, 1): math.pi / math.sqrt(2)}


@_timed
def criterion_3() -> CriterionResult:
    """Numerical Q zeros on the pi/4 ray vs the stated targets and the closed form."""
    details = {}
    ok = True
    for (n1, n2), target in STATED_QZERO_TARGETS.items():
        qz = phase_space.q_zero_closed_form(n1, n2)
        roots = phase_space.q_zero_scan(jc.compass_state(qz.alpha_prime), math.pi / 4, 2 * qz.gamma_mag + 4)
        err_stated = min((abs(r - target) for r in roots), default=math.inf)
        err_formula = min((abs(r - qz.gamma_mag) for r in roots), default=math.inf)
        details[f"{n1},{n2}"] = {
            "stated_target": target,
            "closed_form": qz.gamma_mag,
            "roots": roots,
            "err_stated": err_stated,
            "err_closed_form": err_formula,
            "closed_form_ok": err_formula < 1e-6,
            "stated_ok": err_stated < 1e-6,
        }
        ok = ok and err_stated < 1e-6
    return CriterionResult(3, "Q-zero closed form on the pi/4 ray", ok, details)


@_timed
def criterion_4(threads: int = 1) -> CriterionResult:
    """Wigner negativity, bound and normalization of the two-atom state."""
    state, _ = fig1_state()
    spec = GridSpec.square(8, 0.08)
    grid = phase_space.evaluate_grid("wigner", state, spec, threads)
    central = grid.values[np.abs(spec.points()) < 1.5]
    w_min = float(central.min())
    w_absmax = float(np.abs(grid.values).max())
    integral = grid.integral()
    ok = w_min < -0.05 and w_absmax <= 2 / math.pi + 1e-10 and abs(integral - 1) <= 1e-3
    return CriterionResult(4, "Wigner negativity and bounds", ok,
                           {"central_min": w_min, "max_abs": w_absmax, "integral": integral})


@_timed
def criterion_5() -> CriterionResult:
    """Gaussian-dyad Wigner equals the Fock-series Wigner."""
    rng = np.random.default_rng(SEED)
    details = {}
    ok = True
    for ap in (math.sqrt(2), 2.0, 4.0):
        s = jc.compass_state(ap)
        half = ap + 2
        g = rng.uniform(-half, half, 200) + 1j * rng.uniform(-half, half, 200)
        rho = superposition_to_density(s)
        rho = rho.padded(max(rho.n_max, phase_space.required_cutoff(g)))
        err = float(np.abs(phase_space.wigner(rho, g) - phase_space.wigner_superposition(s, g)).max())
        details[f"{ap:.6f}"] = err
        ok = ok and err < 1e-8
    return CriterionResult(5, "dyad vs Fock-series Wigner", ok, details)


def fig4_scan(threads: int = 1):
    state, _ = fig1_state()
    return homodyne.phase_scan(state, FIG1_ALPHA, FIG4_GTP, 720, threads=threads)


@_timed
def criterion_6(threads: int = 1) -> CriterionResult:
    """Four homodyne peaks at the branch centroids shifted by pi."""
    scan = fig4_scan(threads)
    peaks = homodyne.find_peaks(scan)
    expected = [(c + math.pi) % (2 * math.pi) for c in jc.branch_centroid_angles(FIG1_ALPHA, FIG1_GTS)]
    misses = [min(homodyne.angular_distance(p, e) for p, _ in peaks) for e in expected] if peaks else [math.inf]
    ok = len(peaks) == 4 and max(misses) <= 0.15
    return CriterionResult(6, "homodyne peaks", ok,
                           {"peaks": peaks, "expected": expected, "max_angle_error": max(misses)})


@_timed
def criterion_7() -> CriterionResult:
    """Analytic dyad sum vs RK4 master-equation integration."""
    details = {}
    ok = True
    for a in (2.0, 4.0):
        nbar = a * a
        eta1, eta2 = math.pi * nbar / 2, math.pi * nbar / 4
        rho0 = superposition_to_density(jc.compass_superposition(a, eta1, eta2), 60)
        times = [1 / (2 * nbar), 1 / nbar, 2 / nbar]
        for kt, rho in zip(times, decoherence.lindblad_trajectory(rho0, times)):
            ref = decoherence.analytic_decohered_state(a, eta1, eta2, kt).to_density(60)
            err = float(np.abs(ref.elems - rho.elems).max())
            details[f"alpha={a:g},kt={kt:.6g}"] = err
            ok = ok and err < 1e-6
    details["runtime_limit_s"] = 180
    return CriterionResult(7, "decoherence oracle equivalence", ok, details)


@_timed
def criterion_8() -> CriterionResult:
    """Opposite-lobe coherences decay twice as fast as adjacent ones."""
    samples = [1 / 32, 1 / 16, 1 / 8]
    c_a, a_a = decoherence.decay_rate_diagnostic(4.0, samples, "analytic")
    c_n, a_n = decoherence.decay_rate_diagnostic(4.0, samples, "lindblad")
    r_a, r_n = c_a / a_a, c_n / a_n
    ok = abs(r_a - 2) <= 1e-10 and abs(r_n - 2) <= 0.05
    return CriterionResult(8, "two-times-faster decoherence", ok,
                           {"analytic_rates": [c_a, a_a], "analytic_ratio": r_a,
                            "lindblad_rates": [c_n, a_n], "lindblad_ratio": r_n})


@_timed
def criterion_9() -> CriterionResult:
    """Detection probabilities are complete; cos/sin amplitudes match an RK4 ladder."""
    rng = np.random.default_rng(SEED + 9)
    worst_sum = 0.0
    worst_amp = 0.0
    for _ in range(50):
        alpha = rng.uniform(0.5, 4.0) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        gt = rng.uniform(0, 4 * math.pi)
        state = coherent_state(alpha)
        probs = []
        for outcome in ("ground", "excited"):
            try:
                _, p = jc.project_atom(state, jc.AtomPassage(gt, outcome))
            except ZeroProjectionError as exc:
                p = exc.probability
            probs.append(p)
        pg, pe = probs
        worst_sum = max(worst_sum, abs(pg + pe - 1))
        cg, ce = ladder_rk4(state.amps, gt)
        w = np.sqrt(np.arange(state.amps.size))
        worst_amp = max(worst_amp,
                        float(np.abs(cg - np.cos(gt * w) * state.amps).max()),
                        float(np.abs(ce + 1j * np.sin(gt * w) * state.amps).max()))
    ok = worst_sum <= 1e-12 and worst_amp <= 1e-8
    return CriterionResult(9, "probability completeness", ok,
                           {"max_sum_error": worst_sum, "max_amplitude_error": worst_amp})


def determinism_artifacts(threads: int) -> dict[str, str]:
    """Artifacts whose bytes must not depend on ``threads``."""
    state, _ = fig1_state()
    q = phase_space.evaluate_grid("q", state, GridSpec.square(6, 0.1), threads)
    w = phase_space.evaluate_grid("wigner", state, GridSpec.square(6, 0.2), threads)
    return {
        "q_fig2a.csv": q.to_csv(),
        "wigner_fig1a.csv": w.to_csv(),
        "scan_fig4.csv": fig4_scan(threads).to_csv(),
    }


@_timed
def criterion_10(threads: int = 4) -> CriterionResult:
    """Byte-identical artifacts across repeated runs and thread counts."""
    digests = []
    for t in (1, threads, 1):
        arts = determinism_artifacts(t)
        digests.append({k: hashlib.sha256(v.encode()).hexdigest() for k, v in arts.items()})
    ok = all(d == digests[0] for d in digests)
    return CriterionResult(10, "determinism", ok, {"sha256": digests[0], "threads_compared": [1, threads]})


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
)
_THREADED = {criterion_1, criterion_2, criterion_4, criterion_6}


def run_all(out_dir=None, threads: int = 1, echo=print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        if crit is criterion_10:
            res = crit(max(threads, 4))
        elif crit in _THREADED:
            res = crit(threads)
        else:
            res = crit()
        echo(res.line())
        results.append(res)
    if out_dir is not None:
        out = Path(out_dir)
        for name, text in determinism_artifacts(threads).items():
            write_text(out / name, text)
        summary = {
            "passed": all(r.passed for r in results),
            "criteria": [r.to_json() for r in results],
        }
        write_text(out / "acceptance_summary.json", dumps(_jsonable(summary)))
    return results


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
