import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from stable_spde import fraccalc as fc
from stable_spde.errors import DomainError, ParameterError
from stable_spde.lepage import sample_path
from stable_spde.stable_core import StableParams, generate_atoms


def poly(c, order=1.0):
    c = np.asarray(c, dtype=float)
    return fc.HolderFunction(lambda x: P.polyval(x, c), holder_order=order)


ONE = poly([1.0])
X = poly([0.0, 1.0])
X2 = poly([0.0, 0.0, 1.0])


def exact_rs(cf, cg, a=0.0, b=1.0):
    q = P.polyint(P.polymul(cf, P.polyder(cg)))
    return P.polyval(b, q) - P.polyval(a, q)


def test_left_derivative_examples():
    assert fc.frac_derivative_left(ONE, 0.0, 0.5, 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert fc.frac_derivative_left(X, 0.0, 0.5, 1.0) == pytest.approx(1 / math.gamma(1.5), rel=1e-10)


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_left_derivative_power_law(beta):
    # D^beta x^2 = Gamma(3)/Gamma(3-beta) x^(2-beta) on a = 0.
    x = np.array([0.1, 0.4, 0.9])
    ref = 2 / math.gamma(3 - beta) * x ** (2 - beta)
    assert np.allclose(fc.frac_derivative_left(X2, 0.0, beta, x), ref, rtol=1e-9)


def test_right_derivative_examples():
    assert fc.frac_derivative_right(poly([3.0]), 1.0, 0.5, 0.3) == 0.0
    # g(x) = x: D^{1-beta}_{1-} (x - 1) at x is -(1-x)^beta / Gamma(1+beta).
    for beta in (0.3, 0.5, 0.7):
        ref = -((1 - 0.5) ** beta) / math.gamma(1 + beta)
        assert fc.frac_derivative_right(X, 1.0, beta, 0.5) == pytest.approx(ref, rel=1e-10)


def test_derivative_domains():
    with pytest.raises(DomainError):
        fc.frac_derivative_left(X, 0.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        fc.frac_derivative_right(X, 1.0, 0.5, 1.0)
    with pytest.raises(ParameterError):
        fc.frac_derivative_left(X, 0.0, 1.0, 0.5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 0.95), st.floats(0.2, 0.8))
def test_derivatives_linear(c1, c2, x, beta):
    f, h = poly([1.0, -2.0, 0.5]), poly([0.0, 3.0, 0.0, -1.0])
    comb = poly(c1 * np.array([1.0, -2.0, 0.5, 0.0]) + c2 * np.array([0.0, 3.0, 0.0, -1.0]))
    for D, end in ((fc.frac_derivative_left, 0.0), (fc.frac_derivative_right, 1.0)):
        lhs = D(comb, end, beta, x)
        rhs = c1 * D(f, end, beta, x) + c2 * D(h, end, beta, x)
        assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(c1) + abs(c2)))


def test_zahle_examples():
    assert fc.zahle_integral(ONE, X, 0.0, 1.0, 0.4) == pytest.approx(1.0, abs=1e-10)
    assert fc.zahle_integral(X, X2, 0.0, 1.0, 0.4) == pytest.approx(2 / 3, abs=1e-10)
    v1 = fc.zahle_integral(X, X2, 0.0, 1.0, 0.3)
    v2 = fc.zahle_integral(X, X2, 0.0, 1.0, 0.45)
    assert abs(v1 - v2) < 1e-6
    assert fc.zahle_integral(X, X2, 0.4, 0.4, 0.5) == 0.0


def test_zahle_admissibility():
    rough = poly([0.0, 1.0], order=0.4)
    with pytest.raises(ParameterError):
        fc.zahle_integral(rough, X, 0.0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        fc.zahle_integral(X, poly([0.0, 1.0], order=0.3), 0.0, 1.0, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.lists(st.floats(-2, 2), min_size=2, max_size=5))
def test_zahle_matches_riemann_stieltjes_for_polynomials(cf, cg):
    ref = exact_rs(cf, cg)
    got = fc.zahle_integral(poly(cf), poly(cg), 0.0, 1.0, 0.4)
    assert got == pytest.approx(ref, abs=1e-8 * (1 + sum(map(abs, cf)) * sum(map(abs, cg))))


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_zahle_bilinear(c1, c2):
    f1, f2, g = poly([1.0, 2.0]), poly([0.0, -1.0, 1.0]), poly([0.0, 0.5, 0.0, 1.0])
    comb = poly(c1 * np.array([1.0, 2.0, 0.0]) + c2 * np.array([0.0, -1.0, 1.0]))
    lhs = fc.zahle_integral(comb, g, 0.0, 1.0, 0.5)
    rhs = c1 * fc.zahle_integral(f1, g, 0.0, 1.0, 0.5) + c2 * fc.zahle_integral(f2, g, 0.0, 1.0, 0.5)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(c1) + abs(c2)))


def test_riemann_stieltjes_oracle():
    x, x2 = lambda v: v, lambda v: v * v  # noqa: E731
    assert fc.riemann_stieltjes_oracle(lambda v: 2.5 + 0 * v, x2, 0.0, 1.0, 7) == pytest.approx(2.5, abs=1e-15)
    assert abs(fc.riemann_stieltjes_oracle(x, x2, 0.0, 1.0, 10**6) - 2 / 3) < 2e-6
    assert fc.riemann_stieltjes_oracle(lambda v: v + 1, x2, 0.5, 2.0, 1) == 1.5 * (4 - 0.25)


def test_piecewise_linear_closed_form_matches_quadrature():
    nodes = np.array([0.0, 0.3, 0.55, 1.0])
    vals = np.array([0.0, 1.0, -0.5, 0.25])
    pl = fc.PiecewiseLinear(nodes, vals)
    generic = fc.HolderFunction(pl.evaluator, holder_order=1.0, breakpoints=pl.breakpoints)
    for x in (0.1, 0.4, 0.8):
        closed = pl.right_fractional_derivative(1.0, 0.6, np.array([x]))[0]
        # A direct integral of -g' (u-x)^(beta-1) / Gamma(beta), piece by piece.
        ref = 0.0
        for lo, hi, m in zip(nodes[:-1], nodes[1:], pl.slopes):
            lo, hi = max(lo, x), hi
            if hi > lo:
                ref -= m * ((hi - x) ** 0.6 - (lo - x) ** 0.6) / 0.6
        assert closed == pytest.approx(ref / math.gamma(0.6), rel=1e-12)
    del generic


def test_zahle_with_path_interpolant():
    x = np.linspace(0, 1, 1025)
    y = np.sin(7 * x) + x**2
    g = fc.PiecewiseLinear(x, y)
    f = fc.HolderFunction(np.cos)
    exact = np.sum(np.diff(y) / np.diff(x) * (np.sin(x[1:]) - np.sin(x[:-1])))
    assert fc.zahle_integral(f, g, 0.0, 1.0, 0.5) == pytest.approx(exact, abs=1e-8)


def test_zahle_with_sampled_path_is_reproducible():
    p = StableParams()
    path = sample_path(np.linspace(0, 1, 257), generate_atoms(200, p, 3), 200)
    g = fc.PiecewiseLinear(path.grid, path.values)
    f = fc.HolderFunction(lambda s: np.exp(-s), holder_order=0.9)
    a = fc.zahle_integral(f, g, 0.0, 1.0, p.beta)
    b = fc.zahle_integral(f, g, 0.0, 1.0, p.beta)
    assert a == b and math.isfinite(a)
    assert a == pytest.approx(fc.riemann_stieltjes_oracle(lambda s: np.exp(-s), g, 0.0, 1.0, 2**16), abs=1e-3)


def test_holder_constant_estimate():
    f = fc.HolderFunction(lambda x: np.sqrt(np.abs(x)), holder_order=0.5)
    assert 0.5 < f.holder_constant_estimate(-1, 1) <= 1.0 + 1e-12
