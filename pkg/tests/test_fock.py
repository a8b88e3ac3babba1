import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavitycat.errors import TruncationError
from cavitycat.fock import (
    CoherentSuperposition,
    DensityMatrix,
    FieldState,
    coherent_amplitudes,
    coherent_state,
    displacement_element,
    displacement_matrix,
    fock_state,
    overlap,
    superposition_to_density,
    tail_mass,
    to_density,
    truncation_for,
)
from conftest import brute_displacement

complexes = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


def mp_displacement(m, n, beta):
    mpmath.mp.dps = 40
    b = mpmath.mpc(beta.real, beta.imag)
    x = abs(b) ** 2
    if m >= n:
        val = mpmath.sqrt(mpmath.factorial(n) / mpmath.factorial(m)) * b ** (m - n) * mpmath.exp(-x / 2) * mpmath.laguerre(n, m - n, x)
        return complex(val)
    return (-1) ** (n - m) * complex(mpmath.conj(mp_displacement(n, m, beta)))


def test_truncation_rule():
    assert truncation_for(4) == 58
    assert truncation_for(8) == 138
    assert truncation_for(0) == 10


def test_vacuum_coherent_state():
    s = coherent_state(0, 10)
    assert s.amps[0] == 1
    assert np.all(s.amps[1:] == 0)


def test_coherent_state_normalized():
    s = coherent_state(2, 40)
    assert abs(s.norm_sq() - 1) < 1e-10


def test_coherent_amplitude_matches_high_precision():
    mpmath.mp.dps = 40
    expected = complex(mpmath.mpf(2) ** 2 * mpmath.exp(-2) / mpmath.sqrt(mpmath.factorial(2)))
    assert coherent_state(2, 40).amps[2] == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.3827859860, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.5, 2 - 1j, 4, 8j])
def test_coherent_amplitudes_all_levels(alpha):
    mpmath.mp.dps = 40
    n_max = truncation_for(abs(alpha))
    amps = coherent_state(alpha, n_max).amps
    a = mpmath.mpc(complex(alpha).real, complex(alpha).imag)
    for n in (0, 1, 7, n_max // 2, n_max):
        ref = complex(a**n / mpmath.sqrt(mpmath.factorial(n)) * mpmath.exp(-abs(a) ** 2 / 2))
        assert abs(amps[n] - ref) < 1e-14


def test_truncation_too_small():
    with pytest.raises(TruncationError):
        coherent_state(8, 120)


def test_tail_mass_invariant_for_default_cutoff():
    for a in (0.3, 1, 2, 4, 6, 8):
        assert tail_mass(coherent_state(a).amps) < 1e-10


def test_tail_decays_monotonically():
    probs = np.abs(coherent_state(3).amps) ** 2
    start = int(math.ceil(9 + 3))
    assert np.all(np.diff(probs[start:]) < 0)


def test_displacement_vacuum_elements():
    assert displacement_element(0, 0, 1) == pytest.approx(math.exp(-0.5))
    assert displacement_element(1, 0, 1) == pytest.approx(math.exp(-0.5))


def test_displacement_matches_matrix_exponential():
    beta = 1.0
    ref = brute_displacement(beta, 30)
    assert abs(displacement_element(1, 0, beta) - ref[1, 0]) < 1e-12
    beta = 1.3 - 0.7j
    ref = brute_displacement(beta, 80)
    assert np.abs(displacement_matrix(beta, 30) - ref[:30, :30]).max() < 1e-12


@pytest.mark.parametrize("m,n,beta", [(0, 5, 2j), (40, 3, 3 + 1j), (7, 60, -2.5), (100, 100, 6 + 4j), (130, 2, 9j)])
def test_displacement_matches_laguerre_oracle(m, n, beta):
    assert abs(displacement_element(m, n, beta) - mp_displacement(m, n, beta)) < 1e-13


@given(st.integers(0, 20), complexes)
@settings(max_examples=40, deadline=None)
def test_displacement_column_unitary(n, beta):
    rows = truncation_for(abs(beta) + math.sqrt(n)) + 20
    col = displacement_matrix(beta, rows, n + 1)[:, n]
    assert abs(np.sum(np.abs(col) ** 2) - 1) < 1e-10


def test_displacement_zero_is_identity():
    assert np.array_equal(displacement_matrix(0, 12), np.eye(12))


@pytest.mark.parametrize("beta", [0.1, 0.2 + 0.1j, 0.3j])
def test_displacement_inverse_on_inner_block(beta):
    n_max = 40
    prod = displacement_matrix(beta, n_max + 1) @ displacement_matrix(-beta, n_max + 1)
    inner = n_max - 10
    assert np.abs(prod[:inner, :inner] - np.eye(inner)).max() < 1e-8


def test_displacement_inverse_with_wide_inner_sum():
    beta = 1.1 + 0.4j
    n, wide = 30, 120
    prod = displacement_matrix(beta, n, wide) @ displacement_matrix(-beta, wide, n)
    assert np.abs(prod - np.eye(n)).max() < 1e-12


def test_displacement_of_vacuum_is_coherent():
    beta = 1.5 - 0.5j
    col = displacement_matrix(beta, 41, 1)[:, 0]
    assert np.abs(col - coherent_amplitudes(beta, 40)).max() < 1e-14


def test_overlap_self():
    s = coherent_state(1.5 + 0.2j)
    assert overlap(s, s) == pytest.approx(1, abs=1e-12)


def test_coherent_overlap_identity():
    a = CoherentSuperposition(((1, 2),))
    b = CoherentSuperposition(((1, -2),))
    assert overlap(a, b) == pytest.approx(math.exp(-8), rel=1e-12)


def test_cross_representation_overlap():
    s = CoherentSuperposition(((1, 1.5),))
    assert abs(overlap(coherent_state(1.5), s) - 1) < 1e-8


@given(complexes, complexes, complexes)
@settings(max_examples=30, deadline=None)
def test_overlap_conjugate_symmetric(a, b, c):
    s1 = CoherentSuperposition(((1, a), (0.5j, b)))
    s2 = CoherentSuperposition(((1, c), (-1, b)))
    assert overlap(s1, s2) == pytest.approx(np.conj(overlap(s2, s1)), abs=1e-12)
    f1, f2 = coherent_state(a, 60), coherent_state(c, 60)
    assert overlap(f1, f2) == pytest.approx(np.conj(overlap(f2, f1)), abs=1e-12)


def test_vacuum_density():
    rho = to_density(fock_state(0, 5))
    expected = np.zeros((6, 6))
    expected[0, 0] = 1
    assert np.array_equal(rho.elems, expected)


def test_pure_density_idempotent(fig1):
    rho = to_density(fig1[0])
    assert np.abs(rho.elems @ rho.elems - rho.elems).max() < 1e-10
    assert abs(rho.trace() - 1) < 1e-10
    assert rho.hermiticity_error() < 1e-12


def test_superposition_density_trace():
    s = CoherentSuperposition(((1, 2), (1, -2), (1j, 2j)))
    rho = superposition_to_density(s)
    assert abs(rho.trace() - 1) < 1e-10
    assert np.all(np.diag(rho.elems).real >= -1e-12)


def test_field_state_json_roundtrip(fig1):
    doc = json.loads(json.dumps(fig1[0].to_json()))
    assert set(doc) == {"n_max", "re", "im"}
    back = FieldState.from_json(doc)
    assert np.array_equal(back.amps, fig1[0].amps)


def test_density_json_is_row_major():
    elems = np.arange(9).reshape(3, 3) + 1j * np.arange(9).reshape(3, 3)[::-1]
    doc = DensityMatrix(elems).to_json()
    assert doc["re"] == list(map(float, range(9)))
    assert np.array_equal(DensityMatrix.from_json(doc).elems, elems)


def test_states_are_immutable():
    s = coherent_state(1)
    with pytest.raises(ValueError):
        s.amps[0] = 0
