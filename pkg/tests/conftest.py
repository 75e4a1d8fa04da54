from fractions import Fraction

import pytest

from ergolab.dynamics import TorusRotation
from ergolab.polyfam import PolynomialFamily, infer_basis, parse_polynomial
from ergolab.symreal import RadicalBasis, parse_symreal


def real(text: str):
    return parse_symreal(text, infer_basis([text]))


def torus(*alphas: str) -> TorusRotation:
    basis = infer_basis(alphas)
    return TorusRotation(tuple(parse_symreal(a, basis) for a in alphas))


def family(*texts: str) -> PolynomialFamily:
    return PolynomialFamily.from_strings(texts)


def poly(text: str):
    return parse_polynomial(text)


@pytest.fixture
def b23():
    return RadicalBasis((2, 3))


F = Fraction
