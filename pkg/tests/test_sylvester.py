import numpy as np
import pytest
import torch
from numpy.polynomial import polynomial as poly

from bureskit.errors import ValidationError
from bureskit.invariants import char_poly, chi_at
from bureskit.states import StateMatrix, TangentMatrix, Xorshift64Star, random_tangent
from bureskit.sylvester import (
    _finish,
    chi_block_horner,
    chi_block_upper,
    chi_upper_block,
    solve_block_poly,
    solve_block_poly_many,
    solve_dense,
)

from conftest import diag, offdiag

SOLVERS = [solve_block_poly, solve_dense]


def test_chi_block_upper_examples():
    assert chi_block_upper(diag(2.0), diag(3.0)).tolist() == [[3.0]]
    m = chi_block_upper(diag(1.0, 2.0), offdiag())
    assert torch.allclose(m, torch.tensor([[0.0, -2.0], [-4.0, 0.0]], dtype=m.dtype))
    assert not chi_block_upper(diag(1.0, 2.0), torch.zeros(2, 2)).abs().any()


def test_chi_block_upper_rejects_mismatch():
    inv = char_poly(diag(1.0, 2.0))
    with pytest.raises(ValidationError):
        chi_upper_block(diag(1.0, 2.0), diag(1.0, 2.0), torch.zeros(3, 3), inv)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chi_block_upper_is_a_block_of_the_horner_evaluation(n, state_with_spectrum):
    rho = state_with_spectrum([0.4 + 0.3 * i for i in range(n)])
    y = random_tangent(n, Xorshift64Star(n))
    full = chi_block_horner(rho, y)
    assert torch.allclose(chi_block_upper(rho, y), full[:n, n:], atol=1e-10)
    assert torch.allclose(full[n:, n:], torch.zeros(n, n, dtype=full.dtype), atol=1e-10)


@pytest.mark.parametrize("solver", SOLVERS)
def test_solver_examples(solver):
    assert solver(diag(2.0), diag(3.0)).x.entries.real.item() == pytest.approx(0.75)

    y = random_tangent(3, Xorshift64Star(4))
    x = solver(torch.eye(3) / 2, y).x.entries
    assert torch.allclose(x, y.entries, atol=1e-12)

    x = solver(diag(1.0, 2.0), offdiag()).x.entries
    assert torch.allclose(x, offdiag() / 3)

    x = solver(diag(1.0, 2.0), torch.eye(2)).x.entries
    assert torch.allclose(x, diag(0.5, 0.25))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_solvers_agree(n, tol, state_with_spectrum):
    rho = state_with_spectrum([0.3 + 0.5 * i for i in range(n)])
    y = random_tangent(n, Xorshift64Star(n))
    block = solve_block_poly(rho, y, tol=tol)
    dense = solve_dense(rho, y, tol)
    scale = float(y.entries.abs().sum(dim=1).max())
    for solution in (block, dense):
        assert solution.residual <= tol.solve * scale
        assert solution.asymmetry <= tol.solve
        assert not solution.warnings
    gap = (block.x.entries - dense.x.entries).abs().max() / dense.x.entries.abs().max()
    assert float(gap) <= tol.xroute


def test_block_poly_is_linear(tol, state_with_spectrum):
    rho = state_with_spectrum([0.2, 0.6, 1.3])
    rng = Xorshift64Star(77)
    y1, y2 = random_tangent(3, rng), random_tangent(3, rng)
    combined = TangentMatrix(0.5 * y1.entries - 2.0 * y2.entries)
    left = solve_block_poly(rho, combined).x.entries
    right = 0.5 * solve_block_poly(rho, y1).x.entries - 2.0 * solve_block_poly(rho, y2).x.entries
    assert torch.allclose(left, right, rtol=tol.solve, atol=tol.solve)


def _bezout_inverse(inv):
    """q with a(t)χ(t) + q(t)χ(−t) = 1, degrees below n."""
    n = inv.n
    chi = np.array([float(inv.k[n - m]) for m in range(n + 1)])
    chi_neg = chi * np.array([(-1) ** m for m in range(n + 1)])
    columns = []
    for base in (chi, chi_neg):
        for i in range(n):
            column = poly.polymul(np.eye(1, n, i).ravel(), base)
            columns.append(np.pad(column, (0, 2 * n - len(column))))
    rhs = np.zeros(2 * n)
    rhs[0] = 1.0
    solution = np.linalg.solve(np.column_stack(columns), rhs)
    return solution[n:]


@pytest.mark.parametrize("spectrum", [[0.8], [1.0, 2.0], [0.5, 1.0, 3.0]])
def test_bezout_witness_inverts_chi_at_minus_rho(spectrum, state_with_spectrum):
    rho = state_with_spectrum(spectrum)
    inv = char_poly(rho)
    q = _bezout_inverse(inv)
    q_rho = sum(float(c) * torch.matrix_power(rho, i) for i, c in enumerate(q))
    identity = torch.eye(len(spectrum), dtype=rho.dtype)
    assert torch.allclose(q_rho @ chi_at(inv, -rho), identity, atol=1e-9)

    y = random_tangent(len(spectrum), Xorshift64Star(2)).entries
    m = chi_block_upper(rho, y, inv)
    assert torch.allclose(-q_rho @ m, solve_block_poly(rho, y, inv).x.entries, atol=1e-9)


def test_dense_solver_on_a_complex_state(state_with_spectrum):
    rho = state_with_spectrum([0.3, 0.9, 1.6])
    y = random_tangent(3, Xorshift64Star(9))
    x = solve_dense(rho, y).x.entries
    assert torch.allclose(rho @ x + x @ rho, y.entries, atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_many_right_hand_sides_share_one_factorization(n, state_with_spectrum):
    rho = StateMatrix.validate(state_with_spectrum([0.2 + 0.3 * i for i in range(n)]))
    inv = char_poly(rho)
    rng = Xorshift64Star(n)
    ys = torch.stack([random_tangent(n, rng).entries for _ in range(4)])
    solutions = solve_block_poly_many(rho, ys, inv)
    assert solutions.shape == ys.shape
    for y, x in zip(ys, solutions):
        assert torch.allclose(x, solve_block_poly(rho, y, inv).x.entries, atol=1e-10)


def test_asymmetry_is_checked_against_the_solver_bound(tol):
    rho = diag(1.0, 2.0)
    x = offdiag() / 3
    x[0, 1] += 2e-10
    symmetric = (x + x.T.conj()) / 2
    y = rho @ symmetric + symmetric @ rho
    solution = _finish(rho, y, x, "dense", 1.0, [], tol)
    assert tol.herm < solution.asymmetry <= tol.solve
    assert not solution.warnings

    x[0, 1] += 1e-8
    solution = _finish(rho, y, x, "dense", 1.0, [], tol)
    assert any("asymmetry" in w for w in solution.warnings)
