import cmath
import math

import numpy as np
import pytest

from cavitycat import homodyne, jc
from cavitycat.errors import TruncationError
from cavitycat.fock import coherent_state, fock_state
from conftest import brute_displacement


def test_inject_into_vacuum_gives_coherent_state():
    beta = 1.5 * cmath.exp(0.3j)
    out = homodyne.inject_field(fock_state(0, 5), beta)
    ref = coherent_state(beta, out.n_max)
    assert np.abs(out.amps - ref.amps).max() < 1e-14


def test_zero_reference_is_identity():
    s = coherent_state(2 - 1j)
    out = homodyne.inject_field(s, 0)
    assert np.abs(out.amps[: s.amps.size] - s.amps).max() < 1e-15


def test_cancelling_reference_returns_vacuum():
    a0 = 3 * cmath.exp(1.1j)
    out = homodyne.inject_field(coherent_state(a0), -a0)
    assert abs(out.amps[0]) ** 2 == pytest.approx(1, abs=1e-10)


def test_injection_matches_matrix_exponential():
    s, _ = jc.prepare(1.5, [1.2 * math.pi])
    beta = 0.8 - 0.6j
    out = homodyne.inject_field(s, beta, n_max=40)
    dim = 120
    padded = np.zeros(dim, dtype=complex)
    padded[: s.amps.size] = s.amps
    ref = brute_displacement(beta, dim) @ padded
    assert np.abs(out.amps - ref[:41]).max() < 1e-10


def test_injection_rejects_small_cutoff():
    with pytest.raises(TruncationError):
        homodyne.inject_field(coherent_state(3), 3, n_max=15)


def test_probe_probability_limits():
    assert homodyne.probe_probability(fock_state(0, 5), 1.3) == 1
    assert homodyne.probe_probability(coherent_state(2), 0.0) == pytest.approx(1)
    # gt sqrt(4) = pi: the probe returns to the ground state
    assert homodyne.probe_probability(fock_state(4, 6), math.pi / 2) == pytest.approx(1, abs=1e-15)


def test_coherent_scan_peaks_at_pi():
    alpha = 3.0
    scan = homodyne.phase_scan(coherent_state(alpha), alpha, 1.5 * math.pi, 360)
    assert np.all((scan.probs >= 0) & (scan.probs <= 1 + 1e-12))
    assert scan.phis[np.argmax(scan.probs)] == pytest.approx(math.pi)
    assert scan.probs.max() == pytest.approx(1, abs=1e-10)
    peaks = homodyne.find_peaks(scan)
    assert len(peaks) == 1 and peaks[0][0] == pytest.approx(math.pi)


def test_scan_is_periodic(fig1):
    p = homodyne.probe_probabilities(fig1[0], 4, 1.5 * math.pi, [0.0, 2 * math.pi, 1.0, 1.0 + 2 * math.pi])
    assert abs(p[0] - p[1]) < 1e-12
    assert abs(p[2] - p[3]) < 1e-12


def test_scan_threads_agree(fig1):
    a = homodyne.phase_scan(fig1[0], 4, 1.5 * math.pi, 90, threads=1)
    b = homodyne.phase_scan(fig1[0], 4, 1.5 * math.pi, 90, threads=4)
    assert a.to_csv() == b.to_csv()


def test_scan_matches_direct_injection(fig1):
    phi = 0.77
    direct = homodyne.probe_probability(homodyne.inject_field(fig1[0], 4 * cmath.exp(1j * phi)), 1.5 * math.pi)
    fast = homodyne.probe_probabilities(fig1[0], 4, 1.5 * math.pi, [phi])[0]
    assert fast == pytest.approx(direct, abs=1e-12)


def _scan_from(values):
    phis = homodyne.phase_grid(len(values))
    return homodyne.ProbeScan(phis, np.asarray(values), 1.0, 1.0)


def test_find_peaks_flat_and_single():
    assert homodyne.find_peaks(_scan_from(np.full(128, 0.3))) == []
    phis = homodyne.phase_grid(256)
    peaks = homodyne.find_peaks(_scan_from(np.cos(phis / 2) ** 2))
    assert len(peaks) == 1 and peaks[0][0] == 0.0


def test_find_peaks_needs_samples():
    with pytest.raises(ValueError):
        homodyne.find_peaks(_scan_from(np.zeros(10)))


def test_scan_csv_header():
    text = _scan_from(np.linspace(0, 1, 64)).to_csv()
    assert text.splitlines()[0] == "phi,pg"
    assert len(text.splitlines()) == 65


def test_symmetric_preparation_peaks_quarter_turn_apart():
    alpha = 4 * cmath.exp(1j * math.pi / 4)
    state, _ = jc.prepare(alpha, (4 * math.pi, 2 * math.pi))
    scan = homodyne.phase_scan(state, 4, 1.5 * math.pi, 720)
    top = sorted(p for p, _ in homodyne.find_peaks(scan)[:4])
    assert len(top) == 4
    gaps = np.diff(top + [top[0] + 2 * math.pi])
    assert np.all(np.abs(gaps - math.pi / 2) < 0.15)


def test_peaks_track_branch_centroids(fig1):
    scan = homodyne.phase_scan(fig1[0], 4, 1.5 * math.pi, 720)
    peaks = [p for p, _ in homodyne.find_peaks(scan)]
    for ang in jc.branch_centroid_angles(4, (3.7 * math.pi, 1.9 * math.pi)):
        target = (ang + math.pi) % (2 * math.pi)
        assert min(homodyne.angular_distance(p, target) for p in peaks) < 0.15


def test_angular_distance_wraps():
    assert homodyne.angular_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
