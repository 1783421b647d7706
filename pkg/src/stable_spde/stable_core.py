"""Model parameters, analytic constants and the three LePage generator families.

The series representation needs three independent ingredients per atom ``k``:

* ``Gamma_k``: arrival times of a unit-rate Poisson process,
* ``xi_k``:    i.i.d. draws from the log-Cauchy-like density ``phi``,
* ``g_k``:     i.i.d. rotationally invariant complex Gaussians with
  ``E|Re g|^alpha = 1``.

Spectral points span hundreds of orders of magnitude (``ln|xi|`` has a
polynomial tail), so :class:`AtomSequence` stores ``sign(xi)`` and
``ln|xi|`` rather than ``xi`` itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError

# Domain-separation constants for the three per-family substreams.  Changing
# any of them changes every simulated path, so they are part of the RNG
# contract.
ARRIVALS_STREAM = 0x41525256  # "ARRV"
XI_STREAM = 0x58495F5F  # "XI__"
GAUSS_STREAM = 0x47415553  # "GAUS"

_TWO53 = float(2**53)


@dataclass(frozen=True)
class StableParams:
    """Parameter bundle ``(alpha, H, eta, gamma, beta)``.

    ``beta`` defaults to the midpoint of the admissible interval
    ``(1 - hurst, gamma)``.
    """

    alpha: float = 1.5
    hurst: float = 0.7
    eta: float = 1.0
    gamma: float = 0.9
    beta: float | None = None

    def __post_init__(self):
        a, h, e, g = float(self.alpha), float(self.hurst), float(self.eta), float(self.gamma)
        if not 1.0 < a < 2.0:
            raise ParameterError(f"alpha must lie in (1, 2), got {a}")
        if not 0.5 < h < 1.0:
            raise ParameterError(f"hurst must lie in (1/2, 1), got {h}")
        if not (e > 0.0 and math.isfinite(e)):
            raise ParameterError(f"eta must be positive, got {e}")
        if not 0.5 < g < 1.0:
            raise ParameterError(f"gamma must lie in (1/2, 1), got {g}")
        if not 1.0 - h < g:
            raise ParameterError(
                f"empty fractional-order interval: need 1 - hurst < gamma, got {1.0 - h} >= {g}"
            )
        b = 0.5 * ((1.0 - h) + g) if self.beta is None else float(self.beta)
        if not 1.0 - h < b < g:
            raise ParameterError(f"beta must lie in ({1.0 - h}, {g}), got {b}")
        for name, value in (("alpha", a), ("hurst", h), ("eta", e), ("gamma", g), ("beta", b)):
            object.__setattr__(self, name, value)


def _check_alpha(alpha):
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (1, 2), got {alpha}")


def _check_eta(eta):
    if not (eta > 0.0 and math.isfinite(eta)):
        raise ParameterError(f"eta must be positive, got {eta}")


def normalization_constant(eta):
    """``K_eta = eta / 4``, normalising ``|x|^-1 (1 + |ln|x||)^(-1-eta)``.

    In ``u = ln|x|`` the unnormalised mass is ``2 * int (1+|u|)^(-1-eta) du
    = 4 / eta``.
    """
    _check_eta(eta)
    return eta / 4.0


def log_density_phi(log_abs_x, eta):
    """``ln phi(x)`` as a function of ``ln|x|``; never overflows."""
    _check_eta(eta)
    L = np.asarray(log_abs_x, dtype=float)
    return math.log(eta / 4.0) - L - (1.0 + eta) * np.log1p(np.abs(L))


def density_phi(x, eta):
    """Spectral sampling density ``K_eta |x|^-1 (1 + |ln|x||)^(-1-eta)``."""
    _check_eta(eta)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise DomainError("density_phi is singular at x = 0")
    ax = np.abs(x)
    out = (eta / 4.0) / ax * (1.0 + np.abs(np.log(ax))) ** (-1.0 - eta)
    return out if out.ndim else float(out)


def xi_cdf(x, eta):
    """Closed-form distribution function of ``phi``."""
    _check_eta(eta)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        L = np.log(np.abs(x))
    tail = 0.5 * (1.0 - (1.0 + np.abs(L)) ** (-eta))
    f_log = 0.5 + np.sign(L) * tail  # P(ln|X| <= L)
    out = np.where(x > 0, 0.5 + 0.5 * f_log, 0.5 - 0.5 * f_log)
    out = np.where(x == 0, 0.5, out)
    return out if out.ndim else float(out)


def stable_scaling_constant(alpha):
    """``(Gamma(2-alpha) cos(pi alpha/2) / (1-alpha))^(1/alpha)``.

    Numerator and denominator are both negative on ``(1, 2)``.  Note that
    this is the reciprocal of the factor that makes the LePage sum unit-scale;
    see :func:`series_constant`.
    """
    _check_alpha(alpha)
    base = math.gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2.0) / (1.0 - alpha)
    return base ** (1.0 / alpha)


def series_constant(alpha):
    """Multiplier of the LePage sum giving ``Re int f dM`` its exact law.

    ``sum_k Gamma_k^(-1/alpha) W_k`` is SaS with ``sigma^alpha =
    E|W|^alpha * Gamma(2-alpha) cos(pi alpha/2) / (1-alpha)``, so the
    normalising factor is ``1 / stable_scaling_constant(alpha)``.
    """
    return 1.0 / stable_scaling_constant(alpha)


def gaussian_half_scale(alpha):
    """Standard deviation ``s`` of ``Re g`` such that ``E|Re g|^alpha = 1``."""
    _check_alpha(alpha)
    log_moment = 0.5 * alpha * math.log(2.0) + gammaln(0.5 * (alpha + 1.0)) - 0.5 * math.log(math.pi)
    return math.exp(-log_moment / alpha)


def _open_uniforms(rng, shape):
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    k = rng.integers(0, 2**53, size=shape, dtype=np.int64)
    return (k.astype(float) + 0.5) / _TWO53


def sample_arrival_times(n, rng):
    """First ``n`` arrival times of a unit-rate Poisson process."""
    n = int(n)
    if n <= 0:
        return np.empty(0)
    return np.cumsum(-np.log(_open_uniforms(rng, n)))


def _xi_from_uniforms(v, eta):
    """Inverse-CDF map from an ``(n, 3)`` block of uniforms to ``(sign, ln|xi|)``.

    Columns: sign of ``xi``, sign of ``ln|xi|``, and ``U`` with
    ``|ln|xi|| = (1-U)^(-1/eta) - 1``.  A uniform ``>= 1/2`` selects ``+1``.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    sign_x = np.where(v[:, 0] >= 0.5, 1.0, -1.0)
    sign_u = np.where(v[:, 1] >= 0.5, 1.0, -1.0)
    mag = np.expm1(-np.log1p(-v[:, 2]) / eta)
    return sign_x, sign_u * mag


def sample_log_xi(n, eta, rng):
    """Draw ``n`` spectral points as ``(sign, ln|xi|)`` pairs."""
    _check_eta(eta)
    n = int(n)
    if n <= 0:
        return np.empty(0), np.empty(0)
    return _xi_from_uniforms(_open_uniforms(rng, (n, 3)), eta)


def sample_xi(n, eta, rng):
    """Draw ``n`` points from ``phi``.  Extreme draws saturate to 0 or inf;
    use :func:`sample_log_xi` when that matters."""
    sign, L = sample_log_xi(n, eta, rng)
    with np.errstate(over="ignore"):
        return sign * np.exp(L)


def sample_gaussians(n, alpha, rng):
    """Rotationally invariant complex Gaussians with ``E|Re g|^alpha = 1``.

    Box-Muller on two uniforms per atom: the modulus and the (uniform) phase
    are drawn separately, which makes the rotational invariance explicit.
    """
    s = gaussian_half_scale(alpha)
    n = int(n)
    if n <= 0:
        return np.empty(0, dtype=complex)
    v = _open_uniforms(rng, (n, 2))
    r = s * np.sqrt(-2.0 * np.log(v[:, 0]))
    return r * np.exp(2j * np.pi * v[:, 1])


def substream(seed, family):
    """Independent generator for one generator family of a master seed."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(family),))
    return np.random.Generator(np.random.PCG64(ss))


def replication_seed(base_seed, index):
    """Master seed of replication ``index``, derived from ``base_seed`` by counter."""
    ss = np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1), spawn_key=(0x5245504C, int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AtomSequence:
    """Immutable LePage generators for atoms ``k = 1..count`` (stored 0-based)."""

    gammas: np.ndarray
    xi_signs: np.ndarray
    log_abs_xis: np.ndarray
    gs: np.ndarray
    seed: int
    params: StableParams = field(default_factory=StableParams)

    def __post_init__(self):
        for name in ("gammas", "xi_signs", "log_abs_xis", "gs"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = len(self.gammas)
        if not (len(self.xi_signs) == len(self.log_abs_xis) == len(self.gs) == n):
            raise ValueError("atom arrays must have equal length")

    @property
    def count(self):
        return len(self.gammas)

    def __len__(self):
        return self.count

    @property
    def xis(self):
        with np.errstate(over="ignore"):
            return self.xi_signs * np.exp(self.log_abs_xis)

    def prefix(self, n):
        """The first ``n`` atoms, as their own sequence."""
        if n > self.count:
            raise IndexError(f"requested {n} atoms from a sequence of {self.count}")
        return AtomSequence(
            self.gammas[:n], self.xi_signs[:n], self.log_abs_xis[:n], self.gs[:n], self.seed, self.params
        )

    def with_gs(self, gs):
        return AtomSequence(self.gammas, self.xi_signs, self.log_abs_xis, gs, self.seed, self.params)

    def __eq__(self, other):
        if not isinstance(other, AtomSequence):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.params == other.params
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("gammas", "xi_signs", "log_abs_xis", "gs")
            )
        )

    __hash__ = None


def generate_atoms(n, params, seed, *, gaussian_seed=None):
    """Deterministic atom sequence for ``(n, params, seed)``.

    Each family consumes its own substream in fixed per-atom blocks, so the
    first ``n`` atoms of a longer sequence equal ``generate_atoms(n, ...)``
    bit for bit.  ``gaussian_seed`` re-seeds the Gaussian marks alone.
    """
    if not isinstance(params, StableParams):
        raise ParameterError("params must be a StableParams instance")
    n = int(n)
    if n < 0:
        raise ParameterError(f"atom count must be nonnegative, got {n}")
    gammas = sample_arrival_times(n, substream(seed, ARRIVALS_STREAM))
    signs, logs = sample_log_xi(n, params.eta, substream(seed, XI_STREAM))
    gseed = seed if gaussian_seed is None else gaussian_seed
    gs = sample_gaussians(n, params.alpha, substream(gseed, GAUSS_STREAM))
    return AtomSequence(gammas, signs, logs, gs, int(seed), params)
