import pytest
import torch

from bureskit import bureskit, golden
from bureskit.coeffs import coeff_companion
from bureskit.errors import ValidationError
from bureskit.invariants import char_poly, gram_matrix
from bureskit.metric import bures_prop1, bures_prop4, power_differentials
from bureskit.states import Xorshift64Star, random_state, random_tangent

from conftest import diag


def _close(a, b, rel=1e-9):
    return float((a - b).abs().max()) <= rel * float(b.abs().max())


def test_hand_values():
    expected = torch.tensor([[11.0, -3.0], [-3.0, 1.0]], dtype=torch.float64) / 12
    assert torch.allclose(golden.coeffs_n2([3.0, 2.0]), expected)
    expected = torch.tensor([[-8 / 3, 2.0], [2.0, -4 / 3]], dtype=torch.float64)
    assert torch.allclose(golden.split_n2_e([3.0, 2.0]), expected)
    assert torch.allclose(golden.split_n2_p([3.0, 5.0]), expected)
    assert golden.det_gram_n3([6.0, 14.0, 36.0, 98.0, 276.0]) == pytest.approx(24.0)


def test_too_few_invariants():
    with pytest.raises(ValidationError):
        golden.coeffs_n3([1.0, 2.0])


def test_n3_forms_on_a_diagonal_state():
    inv = char_poly(diag(1.0, 2.0, 3.0))
    assert _close(golden.coeffs_n3(inv.e), coeff_companion(inv).entries)
    gram = gram_matrix(diag(1.0, 2.0, 3.0))
    assert _close(golden.gram_inverse_n3(inv.p), torch.linalg.inv(gram.entries))


@pytest.mark.parametrize("seed", range(5))
def test_n2_forms_on_random_states(seed):
    rng = Xorshift64Star(seed)
    cache = bureskit(random_state(2, floor=0.05, rng=rng))
    yprime, y = random_tangent(2, rng), random_tangent(2, rng)
    inv = cache.invariants

    assert _close(golden.coeffs_n2(inv.e), cache.coefficients.entries)
    split = 2 * cache.coefficients.entries - cache.gram_inverse
    assert _close(golden.split_n2_e(inv.e), split)
    assert _close(golden.split_n2_p(inv.p), split)

    expected = bures_prop1(cache, yprime, y).value
    assert golden.prop1_n2(cache.state, yprime, y, inv.e) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    dp_prime = power_differentials(cache, yprime)
    dp = power_differentials(cache, y)
    parallel = bures_prop4(cache, yprime, y).parallel_part
    assert golden.parallel_n2_p(inv.p, dp_prime, dp) == pytest.approx(parallel, rel=1e-9, abs=1e-12)
    from_e = golden.parallel_n2_e(inv.e, golden.de_from_dp(inv.p, dp_prime), golden.de_from_dp(inv.p, dp))
    assert from_e == pytest.approx(parallel, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_n3_forms_on_random_states(seed):
    rng = Xorshift64Star(100 + seed)
    cache = bureskit(random_state(3, floor=0.05, rng=rng))
    yprime, y = random_tangent(3, rng), random_tangent(3, rng)
    inv = cache.invariants

    assert _close(golden.coeffs_n3(inv.e), cache.coefficients.entries)
    assert golden.det_gram_n3(inv.p) == pytest.approx(cache.genericity.det_p, rel=1e-8)
    if cache.generic:
        assert _close(golden.gram_inverse_n3(inv.p), cache.gram_inverse, rel=1e-8)

    expected = bures_prop1(cache, yprime, y).value
    assert golden.prop1_n3(cache.state, yprime, y, inv.e) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_explicit_forms_check_dimension():
    with pytest.raises(ValidationError):
        golden.prop1_n3(diag(1.0, 2.0), torch.eye(2), torch.eye(2), [3.0, 2.0, 0.0])
