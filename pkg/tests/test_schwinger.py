import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from schwingerlab.fock import basis_index, basis_state
from schwingerlab.opcore import DomainError, identity
from schwingerlab.schwinger import (
    KINDS,
    JMLabel,
    algebra_report,
    build_generators,
    casimir,
    casimir_commutators,
    casimir_identity_residual,
    casimir_spectrum,
    infer_j,
    jm_map,
    restricted_eigenvalues,
    safe_projector,
    schwinger_state,
    shift_theorem_check,
)

hbars = st.sampled_from([1.0, 0.5, 1.3, 2.0])


@pytest.mark.parametrize("kind", KINDS)
def test_generators_are_adjoint_pairs(kind):
    g = build_generators(kind, cutoff=6, hbar=0.7)
    assert g.jminus == g.jplus.dag()
    assert g.jz.is_hermitian()


def test_bb_matrix_elements_match_hand_built():
    cutoff, hbar = 5, 1.5
    a = oracles.ladder(cutoff)
    a1, a2 = np.kron(a, np.eye(cutoff)), np.kron(np.eye(cutoff), a)
    g = build_generators("bb", cutoff=cutoff, hbar=hbar)
    np.testing.assert_allclose(g.jplus.entries, hbar * a1.T @ a2, atol=1e-14)
    np.testing.assert_allclose(g.jz.entries, hbar / 2 * (a1.T @ a1 - a2.T @ a2), atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 10), hbars)
def test_bb_su2_and_casimir_identities(cutoff, hbar):
    g = build_generators("bb", cutoff=cutoff, hbar=hbar)
    assert algebra_report(g).passed
    assert max(casimir_commutators(g).values()) <= 1e-10 * hbar ** 3
    assert casimir_identity_residual(g) <= 1e-10 * hbar ** 2


@pytest.mark.parametrize("cutoff, expected", [(8, 9.0), (12, 22.5)])
def test_bb_quarter_prefactor_is_off(cutoff, expected):
    # the extra 1/4 leaves 3/4 of hbar^2 (N/2)(N/2+1) at the top safe level
    g = build_generators("bb", cutoff=cutoff)
    assert casimir_identity_residual(g, variant="printed_bb") == pytest.approx(expected)


def test_bb_casimir_multiplets():
    g = build_generators("bb", cutoff=6)
    levels = casimir_spectrum(g)
    assert [(lv.j, lv.multiplicity) for lv in levels] == [
        (Fraction(k, 2), k + 1) for k in range(5)
    ]
    for lv in levels:
        assert lv.eigenvalue == pytest.approx(float(lv.j * (lv.j + 1)), abs=1e-12)


def test_unsummed_bb_projector_still_supports_the_algebra():
    g = build_generators("bb", cutoff=6)
    p = safe_projector(g, summed=False)
    assert np.trace(p.entries).real == 25
    assert algebra_report(g, p).passed


def test_ff_generators_and_casimir():
    g = build_generators("ff", hbar=2.0)
    assert safe_projector(g) == identity(4)
    assert algebra_report(g).max_residual == 0
    assert casimir_identity_residual(g) == 0
    vals = restricted_eigenvalues(casimir(g), safe_projector(g))
    np.testing.assert_allclose(vals, [0, 0, 3, 3], atol=1e-12)


# -- boson-fermion constructions ----------------------------------------------


@pytest.mark.parametrize("cutoff", [4, 8, 16])
def test_bf_naive_su2_residual_grows_with_occupation(cutoff):
    # [J+, J-] - 2 hbar Jz = -2 hbar^2 N Nf, largest at the top safe level
    hbar = 1.5
    g = build_generators("bf_naive", cutoff=cutoff, hbar=hbar)
    rep = algebra_report(g)
    assert rep.residuals["[J+,J-]-2hbar*Jz"] == pytest.approx(2 * (cutoff - 2) * hbar ** 2)
    assert rep.residuals["[Jz,J+]-hbar*J+"] <= 1e-12
    assert not rep.passed


def test_bf_naive_commutator_closed_form():
    cutoff, hbar = 10, 0.8
    g = build_generators("bf_naive", cutoff=cutoff, hbar=hbar)
    p = safe_projector(g)
    n = np.kron(np.diag(np.arange(cutoff)), np.eye(2))
    nf = np.kron(np.eye(cutoff), np.diag([0.0, 1.0]))
    want = hbar ** 2 * (n - 2 * n @ nf - nf)
    got = g.jplus @ g.jminus - g.jminus @ g.jplus
    np.testing.assert_allclose(p.entries @ (got.entries - want) @ p.entries, 0, atol=1e-12)


def test_bf_naive_casimir_identity():
    g = build_generators("bf_naive", cutoff=12, hbar=1.2)
    assert casimir_identity_residual(g) <= 1e-10


@pytest.mark.parametrize("form", ["eq58", "eq59"])
def test_bf_corrected_raising_operator_is_form_independent(form):
    g = build_generators("bf_corrected", cutoff=8, jz_form=form)
    ref = build_generators("bf_corrected", cutoff=8)
    np.testing.assert_allclose(g.jplus.entries, ref.jplus.entries, atol=1e-14)


def test_bf_corrected_default_form_satisfies_su2():
    g = build_generators("bf_corrected", cutoff=16)
    assert g.jz_form == "eq58"
    assert algebra_report(g).passed
    assert max(casimir_commutators(g).values()) <= 1e-10


def test_bf_corrected_alternative_jz_fails_only_on_the_vacuum():
    g = build_generators("bf_corrected", cutoff=16, jz_form="eq59")
    rep = algebra_report(g)
    assert rep.residuals["[J+,J-]-2hbar*Jz"] == pytest.approx(1.0)
    p = safe_projector(g).entries.copy()
    p[0, 0] = 0
    diff = (g.jplus @ g.jminus - g.jminus @ g.jplus - 2 * g.jz).entries
    np.testing.assert_allclose(p @ diff @ p, 0, atol=1e-12)


@pytest.mark.parametrize("n", range(0, 7))
def test_bf_corrected_raising_action(n):
    # J+ |n,1> = hbar |n+1,0>: the fermion label drops as the boson rises
    layout = (8, 2)
    g = build_generators("bf_corrected", cutoff=8, hbar=1.25)
    out = g.jplus @ basis_state((n, 1), layout)
    np.testing.assert_allclose(out, 1.25 * basis_state((n + 1, 0), layout), atol=1e-14)
    assert not np.any(g.jplus @ basis_state((n, 0), layout))


@pytest.mark.parametrize("form, vacuum", [("eq58", 0.0), ("eq59", 0.25)])
def test_bf_corrected_spectrum(form, vacuum):
    cutoff = 16
    g = build_generators("bf_corrected", cutoff=cutoff, jz_form=form)
    levels = {round(lv.eigenvalue, 10): lv.multiplicity for lv in casimir_spectrum(g)}
    assert levels == {vacuum: 1, 0.75: 2 * (cutoff - 1) - 1}


def test_bf_corrected_truncation_edge_is_not_a_doublet():
    cutoff = 10
    g = build_generators("bf_corrected", cutoff=cutoff)
    edge = basis_index((cutoff - 1, 1), g.layout)
    assert casimir(g).entries[edge, edge].real == pytest.approx(0.25)


# -- labels and states ----------------------------------------------------------


@given(st.integers(0, 12), st.integers(0, 12))
def test_jm_map_round_trip(n1, n2):
    label = jm_map(n1, n2)
    assert (label.n1, label.n2) == (n1, n2)
    assert label.j == Fraction(n1 + n2, 2)


@pytest.mark.parametrize("j, m", [(-1, 0), (Fraction(1, 2), 0), (1, 2), (Fraction(1, 3), Fraction(1, 3))])
def test_invalid_labels(j, m):
    with pytest.raises(DomainError):
        JMLabel(j, m)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 6), st.data(), hbars)
def test_schwinger_state_is_a_joint_eigenvector(two_j, data, hbar):
    j = Fraction(two_j, 2)
    m = j - data.draw(st.integers(0, two_j))
    label = JMLabel(j, m)
    cutoff = two_j + 2
    vec = schwinger_state(label, cutoff)
    np.testing.assert_allclose(vec, basis_state((label.n1, label.n2), (cutoff, cutoff)), atol=1e-12)
    g = build_generators("bb", cutoff=cutoff, hbar=hbar)
    np.testing.assert_allclose(g.jz @ vec, hbar * float(m) * vec, atol=1e-12)
    np.testing.assert_allclose(casimir(g) @ vec, hbar ** 2 * float(j * (j + 1)) * vec, atol=1e-10)
    if m < j:
        up = schwinger_state(JMLabel(j, m + 1), cutoff)
        coef = hbar * math.sqrt(float((j - m) * (j + m + 1)))
        np.testing.assert_allclose(g.jplus @ vec, coef * up, atol=1e-12)


def test_schwinger_state_needs_room():
    with pytest.raises(DomainError):
        schwinger_state(JMLabel(2, 2), cutoff=4)


@pytest.mark.parametrize("value, j", [(0.0, 0), (0.75, Fraction(1, 2)), (2.0, 1), (6.0, 2), (1.0, None)])
def test_infer_j(value, j):
    assert infer_j(value) == j
    if j is not None:
        assert infer_j(value * 4, hbar=2.0) == j


# -- construction errors ----------------------------------------------------------


def test_build_generators_validation():
    with pytest.raises(DomainError):
        build_generators("spin")
    with pytest.raises(DomainError):
        build_generators("bb", jz_form="eq58")
    with pytest.raises(DomainError):
        build_generators("bf_corrected", jz_form="eq60")
    assert build_generators("BF-naive", cutoff=3).kind == "bf_naive"


# -- shift theorem ----------------------------------------------------------------


@pytest.mark.parametrize("r", [-0.5, 0, 0.5, 1, 2])
def test_shift_theorem_listed_powers(r):
    assert shift_theorem_check(r, 16).passed


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 3, allow_nan=False), st.integers(3, 20))
def test_shift_theorem_any_power(r, cutoff):
    rep = shift_theorem_check(r, cutoff, tol=1e-9)
    assert rep.passed, rep


def test_shift_theorem_requires_room():
    with pytest.raises(DomainError):
        shift_theorem_check(1, cutoff=2)
