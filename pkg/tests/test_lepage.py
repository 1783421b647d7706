import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stable_spde import lepage as lp
from stable_spde.errors import DomainError, InputError
from stable_spde.stable_core import AtomSequence, StableParams, generate_atoms, series_constant

P = StableParams(alpha=1.5, hurst=0.7)


def _hand_atoms(g=1 + 0j, gamma=1.0, L=0.0, params=P):
    return AtomSequence(np.array([gamma]), np.array([1.0]), np.array([L]), np.array([g]), 0, params)


def test_kernel_examples():
    assert lp.harmonizable_kernel(0.0, 3.0, P) == 0
    v = lp.harmonizable_kernel(1.0, math.pi, P)
    assert v.real == pytest.approx(-2 * math.pi ** (-(2 / 3 + 0.7)), rel=1e-14)
    assert v.real == pytest.approx(-0.418400, abs=5e-7)  # quoted as -0.41833, an arithmetic slip
    assert abs(v.imag) < 1e-15
    with pytest.raises(DomainError):
        lp.harmonizable_kernel(1.0, 0.0, P)


def test_kernel_magnitude_identity():
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 5, 100)
    x = rng.uniform(-20, 20, 100)
    mag = np.abs(lp.harmonizable_kernel(t, x, P))
    ref = 2 * np.abs(np.sin(t * x / 2)) * np.abs(x) ** (-1 / P.alpha - P.hurst)
    assert np.max(np.abs(mag - ref)) < 1e-12
    bound = np.minimum(2, t * np.abs(x)) * np.abs(x) ** (-1 / P.alpha - P.hurst)
    assert np.all(mag <= bound * (1 + 1e-12))


def test_atom_weight_hand_case():
    # Series multiplier 1/C_alpha (see decisions ledger), phi(1) = 1/4.
    w = lp.atom_weight(1, _hand_atoms())
    expected = 0.25 ** (-2 / 3) / 1.845270
    assert w.weight.real == pytest.approx(expected, rel=1e-6)
    assert w.log_abs == pytest.approx(math.log(abs(w.weight)), rel=1e-14)


def test_atom_weight_zero_mark_and_homogeneity():
    assert lp.atom_weight(1, _hand_atoms(g=0j)).weight == 0
    w1 = abs(lp.atom_weight(1, _hand_atoms(gamma=1.3)).weight)
    w2 = abs(lp.atom_weight(1, _hand_atoms(gamma=2.6)).weight)
    assert w2 / w1 == pytest.approx(2 ** (-1 / P.alpha), rel=1e-14)
    with pytest.raises(IndexError):
        lp.atom_weight(2, _hand_atoms())


def test_atom_weight_extreme_xi_stays_finite():
    w = lp.atom_weight(1, _hand_atoms(L=650.0))
    assert math.isfinite(w.log_abs) and w.log_abs > 600 / P.alpha


def test_evaluate_zn_hand_case():
    atoms = _hand_atoms()
    expected = 0.25 ** (-2 / 3) / 1.845270 * (math.cos(1) - 1)
    assert lp.evaluate_ZN(1.0, atoms, 1) == pytest.approx(expected, rel=1e-6)
    assert lp.evaluate_ZN(1.0, atoms, 0) == 0.0
    assert lp.evaluate_ZN(0.0, atoms, 1) == 0.0
    with pytest.raises(IndexError):
        lp.evaluate_ZN(1.0, atoms, 2)


def test_additivity_and_telescoping():
    atoms = generate_atoms(300, P, 17)
    t = 0.83
    contrib = lp.atom_contributions(t, atoms, 300)
    for N in (0, 1, 57, 299):
        d = lp.evaluate_ZN(t, atoms, N + 1) - lp.evaluate_ZN(t, atoms, N)
        assert d == pytest.approx(contrib[N], abs=1e-12 * (1 + np.sum(np.abs(contrib))))
    # Direct weights times kernel, all in linear space (moderate xi only).
    k = np.nonzero(np.abs(atoms.log_abs_xis) < 30)[0][:20]
    for i in k:
        w = lp.atom_weight(i + 1, atoms).weight
        f = lp.harmonizable_kernel(t, atoms.xis[i], P)
        assert (w * f).real == pytest.approx(contrib[i], rel=1e-10, abs=1e-300)
    assert lp.evaluate_ZN(t, atoms, 300) == pytest.approx(np.sum(contrib), abs=1e-12 * np.sum(np.abs(contrib)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 200))
def test_zero_at_origin(seed, n):
    atoms = generate_atoms(n, P, seed)
    assert lp.evaluate_ZN(0.0, atoms, n) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([-4.0, -1.0, 0.5, 2.0, 8.0]), st.floats(-10, 10, allow_subnormal=False))
def test_linearity_in_marks(seed, c, c_any):
    atoms = generate_atoms(64, P, seed)
    base = lp.evaluate_ZN(0.7, atoms, 64)
    # Powers of two commute with rounding, so the identity is exact.
    assert lp.evaluate_ZN(0.7, atoms.with_gs(atoms.gs * c), 64) == c * base
    scale = np.sum(np.abs(lp.atom_contributions(0.7, atoms, 64)))
    assert lp.evaluate_ZN(0.7, atoms.with_gs(atoms.gs * c_any), 64) == pytest.approx(c_any * base, abs=1e-13 * abs(c_any) * scale)


def test_sample_path_bitwise_matches_pointwise():
    atoms = generate_atoms(2500, P, 5)
    grid = np.linspace(0, 1, 37)
    path = lp.sample_path(grid, atoms, 2500)
    pointwise = np.array([lp.evaluate_ZN(t, atoms, 2500) for t in grid])
    assert np.array_equal(path.values, pointwise)
    assert np.array_equal(path.values, lp.sample_path(grid, atoms, 2500).values)
    assert path.values[0] == 0.0


def test_sample_path_prefix_consistency():
    atoms = generate_atoms(101, P, 8)
    grid = np.linspace(0, 2, 50)
    a = lp.sample_path(grid, atoms, 100).values
    b = lp.sample_path(grid, atoms, 101).values
    inc = np.array([lp.atom_contributions(t, atoms, 101)[100] for t in grid])
    assert np.allclose(a + inc, b, rtol=0, atol=1e-12 * (1 + np.max(np.abs(b))))


def test_sample_path_rejects_bad_grids():
    atoms = generate_atoms(5, P, 1)
    for grid in ([0.0, 0.5, 0.4], [], [-0.1, 0.2]):
        with pytest.raises(InputError):
            lp.sample_path(grid, atoms, 5)


def test_holder_exponent_of_path():
    atoms = generate_atoms(10_000, P, 99)
    path = lp.sample_path(np.linspace(0, 1, 2**12), atoms, 10_000)
    assert 0.5 < lp.estimate_holder_exponent(path) < 0.9


def _scale_parameter_fourier(alpha, hurst):
    """Independent oracle: expand (2|sin(x/2)|)^alpha in cosines and use
    int_0^inf (cos nx - 1) x^(-1-s) dx = n^s Gamma(-s) cos(pi s / 2)."""
    import mpmath as mp

    mp.mp.dps = 30
    a = mp.mpf(alpha)
    s = a * mp.mpf(hurst)
    amp = 2 * mp.gamma(a + 1) * mp.sin(mp.pi * (1 + a / 2)) / mp.pi
    term = lambda n: amp * mp.exp(mp.loggamma(n - a / 2) - mp.loggamma(n + 1 + a / 2)) * n**s  # noqa: E731
    total = mp.nsum(term, [1, mp.inf], method="euler-maclaurin")
    return float(2 * mp.gamma(-s) * mp.cos(mp.pi * s / 2) * total)


def _scale_parameter_qaws(alpha, hurst, periods=2000):
    """Independent oracle: QUADPACK algebraic-weight rules on [0, 1], [1, 2 pi]
    and on every period, plus a first-order zeta tail."""
    from scipy import integrate
    from scipy.special import zeta

    a, s = alpha, alpha * hurst
    tp = 2 * math.pi
    opts = dict(weight="alg", epsabs=1e-15, epsrel=1e-13)
    head = integrate.quad(
        lambda x: (2 * math.sin(x / 2) / x) ** a if x > 0 else 1.0, 0, 1, wvar=(a - 1 - s, 0), **opts
    )[0]
    head += integrate.quad(
        lambda x: (2 * math.sin(x / 2) / (tp - x)) ** a * x ** (-1 - s) if x < tp else tp ** (-1 - s),
        1, tp, wvar=(0, a), **opts,
    )[0]
    body = 0.0
    for k in range(1, periods):
        lo = tp * k

        def g(x, lo=lo):
            d = abs((x - lo) * (lo + tp - x)) / tp
            return (1.0 if d < 1e-12 else 2 * abs(math.sin(x / 2)) / d) ** a * x ** (-1 - s)

        body += integrate.quad(g, lo, lo + tp, wvar=(a, a), **opts)[0] / tp**a
    mean = integrate.quad(lambda v: (2 * abs(math.sin(v / 2))) ** a, 0, tp)[0]
    tail = mean * tp ** (-1 - s) * zeta(1 + s, periods + 0.5)
    return 2 * (head + body + tail)


@pytest.mark.parametrize("alpha,hurst", [(1.5, 0.7), (1.2, 0.6), (1.8, 0.9)])
def test_scale_parameter_against_quadpack(alpha, hurst):
    p = StableParams(alpha=alpha, hurst=hurst, gamma=0.95)
    assert lp.scale_parameter(1.0, p) == pytest.approx(_scale_parameter_qaws(alpha, hurst), rel=1e-9)


@pytest.mark.parametrize("alpha,hurst", [(1.5, 0.7), (1.2, 0.6)])
def test_scale_parameter_against_fourier_series(alpha, hurst):
    # The cosine-series sum decays like n^(s-1-alpha); at alpha = 1.8 mpmath's
    # Euler-Maclaurin tail is itself off in the 8th digit, so that case is omitted.
    p = StableParams(alpha=alpha, hurst=hurst, gamma=0.95)
    assert lp.scale_parameter(1.0, p) == pytest.approx(_scale_parameter_fourier(alpha, hurst), rel=1e-9)


def test_scale_parameter_domain():
    assert lp.scale_parameter(0.3, P) > 0
    with pytest.raises(DomainError):
        lp.scale_parameter(0.0, P)


def test_scale_parameter_ratio():
    r = lp.scale_parameter(2.0, P) / lp.scale_parameter(1.0, P)
    assert r == pytest.approx(2 ** (P.alpha * P.hurst), rel=1e-6)


def test_empirical_char_function_basics():
    assert lp.empirical_char_function(np.zeros(10), 3.0) == 1 + 0j
    assert lp.empirical_char_function(np.random.default_rng(0).normal(size=50), 0.0) == 1 + 0j
    with pytest.raises(InputError):
        lp.empirical_char_function([], 1.0)


def test_series_sum_has_unit_scale():
    # sum Gamma_k^(-1/alpha) Re(g_k) * series_constant is SaS(1): check E cos(lam X) = exp(-|lam|^alpha).
    from stable_spde.stable_core import ARRIVALS_STREAM, GAUSS_STREAM, sample_arrival_times, sample_gaussians, substream

    a = 1.5
    M, n = 4000, 2000
    vals = np.empty(M)
    for m in range(M):
        g = sample_arrival_times(n, substream(m, ARRIVALS_STREAM))
        z = sample_gaussians(n, a, substream(m, GAUSS_STREAM))
        vals[m] = series_constant(a) * np.sum(g ** (-1 / a) * z.real)
    for lam in (0.5, 1.0):
        ecf = np.mean(np.cos(lam * vals))
        assert abs(ecf - math.exp(-(lam**a))) < 4 / math.sqrt(M) + 0.01
