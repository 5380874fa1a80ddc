import pytest
import torch

from bureskit.states import Xorshift64Star, ginibre
from bureskit.utils import Tolerances, dagger


@pytest.fixture(scope="session")
def tol():
    return Tolerances()


@pytest.fixture
def rng():
    return Xorshift64Star(20240229)


@pytest.fixture
def state_with_spectrum(rng):
    """U diag(λ) U* with U the unitary factor of a Ginibre matrix."""

    def func(spectrum):
        n = len(spectrum)
        q, _ = torch.linalg.qr(ginibre(n, rng))
        lam = torch.tensor(spectrum, dtype=torch.float64).to(torch.complex128)
        rho = q @ torch.diag(lam) @ dagger(q)
        return (rho + dagger(rho)) / 2

    return func


def offdiag():
    return torch.tensor([[0.0, 1.0], [1.0, 0.0]], dtype=torch.complex128)


def diag(*values):
    return torch.diag(torch.tensor(values, dtype=torch.float64)).to(torch.complex128)
