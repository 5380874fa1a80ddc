import pytest
import torch

from bureskit.errors import ValidationError
from bureskit.invariants import (
    cayley_hamilton_residual,
    char_poly,
    chi_at,
    commutant_basis,
    e_from_p,
    e_from_p_det,
    gram_matrix,
    is_generic,
    newton_residuals,
    p_from_e,
    p_from_e_det,
    power_traces,
)
from bureskit.states import Xorshift64Star, random_state

from conftest import diag


def test_power_traces():
    assert power_traces(diag(1.0, 2.0), 3).tolist() == [3.0, 5.0, 9.0]
    assert power_traces(diag(1.0, 2.0, 3.0), 3).tolist() == [6.0, 14.0, 36.0]
    assert power_traces(torch.eye(4), 5).tolist() == [4.0] * 5


def test_power_traces_rejects_zero_order():
    with pytest.raises(ValidationError):
        power_traces(diag(1.0, 2.0), 0)


def test_char_poly_diagonal():
    inv = char_poly(diag(1.0, 2.0))
    assert inv.k.tolist() == pytest.approx([1.0, -3.0, 2.0])
    assert inv.e.tolist() == pytest.approx([3.0, 2.0])
    assert inv.p.tolist() == pytest.approx([3.0, 5.0, 9.0])
    assert inv.newton_residual < 1e-15

    inv = char_poly(diag(1.0, 2.0, 3.0))
    assert inv.k.tolist() == pytest.approx([1.0, -6.0, 11.0, -6.0])
    assert inv.p.tolist() == pytest.approx([6.0, 14.0, 36.0, 98.0, 276.0])


def test_elementary_and_power_conversions():
    assert e_from_p([3.0, 5.0]).tolist() == pytest.approx([3.0, 2.0])
    assert p_from_e([3.0, 2.0], 3).tolist() == pytest.approx([3.0, 5.0, 9.0])
    assert p_from_e([3.0, 2.0], 5).tolist() == pytest.approx([3.0, 5.0, 9.0, 17.0, 33.0])
    assert p_from_e([1.0], 4).tolist() == pytest.approx([1.0] * 4)


def test_determinant_forms_agree_with_recursion():
    p = [6.0, 14.0, 36.0]
    assert e_from_p_det(p).tolist() == pytest.approx(e_from_p(p).tolist())
    e = [6.0, 11.0, 6.0]
    assert p_from_e_det(e, 5).tolist() == pytest.approx(p_from_e(e, 5).tolist())


@pytest.mark.parametrize("n", [2, 4, 8])
def test_round_trip(n):
    state = random_state(n, floor=0.05, rng=Xorshift64Star(n))
    p = power_traces(state, n)
    again = p_from_e(e_from_p(p), n)
    assert torch.allclose(again, p, rtol=1e-10, atol=0.0)


@pytest.mark.parametrize("n", [1, 3, 6, 8])
def test_newton_and_cayley_hamilton(n, tol):
    state = random_state(n, floor=0.05, rng=Xorshift64Star(100 + n))
    inv = char_poly(state)
    assert max(newton_residuals(inv.p, inv.k)) <= tol.newton
    assert cayley_hamilton_residual(state, inv) <= tol.newton


def test_chi_vanishes_on_companion_powers():
    inv = char_poly(diag(1.0, 2.0))
    assert torch.allclose(chi_at(inv, diag(1.0, 2.0)), torch.zeros(2, 2, dtype=torch.complex128))


def test_gram_matrix():
    gram = gram_matrix(diag(1.0, 2.0))
    assert gram.entries.tolist() == [[3.0, 5.0], [5.0, 9.0]]
    assert float(torch.linalg.det(gram.entries)) == pytest.approx(2.0)
    assert gram.row_residual < 1e-14

    gram = gram_matrix(torch.eye(2) / 2)
    assert gram.entries.tolist() == [[1.0, 0.5], [0.5, 0.25]]


def test_gram_matrix_rows_follow_the_companion_matrix(tol, caplog):
    assert gram_matrix(diag(1.0, 2.0, 3.0)).row_residual < 1e-13
    gram = gram_matrix(random_state(6, floor=0.05, rng=Xorshift64Star(6)))
    assert gram.row_residual <= tol.newton
    assert "Hankel row relation" not in caplog.text


def test_genericity():
    assert is_generic(diag(1.0, 2.0)).generic
    report = is_generic(torch.eye(2) / 2)
    assert not report
    assert report.det_p == 0.0
    assert not is_generic(diag(1.0, 1.0, 2.0))


def test_genericity_is_scale_invariant(state_with_spectrum):
    rho = state_with_spectrum([0.3, 0.7, 1.1])
    small = is_generic(rho * 1e-3).normalized
    large = is_generic(rho * 1e3).normalized
    assert small == pytest.approx(large, rel=1e-6)


def test_det_p_identity(state_with_spectrum):
    lam = [0.2, 0.5, 0.9, 1.4]
    gram = gram_matrix(state_with_spectrum(lam))
    expected = torch.prod(torch.tensor(lam, dtype=torch.float64))
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            expected = expected * (lam[i] - lam[j]) ** 2
    det_p = float(torch.linalg.det(gram.entries))
    assert det_p == pytest.approx(float(expected), rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 4, 6, 8])
def test_commutant_basis_is_orthonormal(n):
    rho = random_state(n, floor=0.05, rng=Xorshift64Star(200 + n)).entries
    basis = commutant_basis(rho)
    assert basis.complete
    vectors = basis.vectors
    inner = torch.einsum("iab,bc,jca->ij", vectors, rho, vectors).real
    assert torch.allclose(inner, torch.eye(n, dtype=torch.float64), atol=1e-12)
    # polynomials in ϱ commute with it
    for v in vectors:
        assert torch.allclose(v @ rho, rho @ v, atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_basis_determinant_matches_lu(n):
    rho = random_state(n, floor=0.05, rng=Xorshift64Star(300 + n))
    report = is_generic(rho)
    det_p = float(torch.linalg.det(gram_matrix(rho).entries))
    assert report.det_p == pytest.approx(det_p, rel=1e-8)


def test_commutant_basis_stops_at_repeated_eigenvalues():
    basis = commutant_basis(diag(1.0, 1.0, 2.0))
    assert not basis.complete
    assert basis.vectors.shape[0] == 2
    assert basis.det_gram(4.0) == 0.0


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_random_states_are_generic(n):
    rng = Xorshift64Star(400 + n)
    for _ in range(10):
        report = is_generic(random_state(n, floor=0.05, rng=rng))
        assert report.generic
        assert 0.0 < report.normalized <= 1.0
        assert report.det_p > 0.0
