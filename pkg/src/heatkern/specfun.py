"""Scalar special functions shared by the spectral evaluators.

Three functions recur throughout the numeric layer:

* ``theta``  -- lattice Gaussian sum with two Poisson-dual representations,
* ``alpha``  -- the entire function  int_0^1 exp(-(1 - xi^2) z / 4) dxi,
* ``f_q``    -- the family            int_0^1 (1 + (1 - xi^2) z / 4)^q dxi.

Each has a fast series or closed form on part of its range and a
Gauss-Legendre fallback elsewhere.  The quadrature (``f_q_quadrature``,
node-doubling until two successive rules agree) is the ground truth the
shortcuts are checked against in the test suite.

Everything here is pure and thread-safe; ``SpecialFunctionConfig`` carries
the numerical knobs and sensible defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre


@dataclass(frozen=True)
class SpecialFunctionConfig:
    """Numerical knobs for the special-function evaluators.

    ``tolerance`` is a relative target for series truncation and for the
    node-doubling stop rule; ``min_nodes``/``max_nodes`` bound the
    Gauss-Legendre rule sizes; ``theta_crossover`` is where ``theta``
    switches between its two dual series (both need ~5 terms there);
    ``alpha_series_radius`` is the largest positive argument at which the
    alternating series is still used (cancellation grows like e^{z/4}).
    """

    tolerance: float = 1e-13
    min_nodes: int = 16
    max_nodes: int = 4096
    theta_crossover: float = math.pi
    alpha_series_radius: float = 36.0

    def __post_init__(self) -> None:
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.min_nodes < 16:
            raise ValueError("need at least 16 quadrature nodes")
        if self.max_nodes < self.min_nodes:
            raise ValueError("max_nodes must be >= min_nodes")
        if self.theta_crossover <= 0.0:
            raise ValueError("theta_crossover must be positive")


DEFAULT_CONFIG = SpecialFunctionConfig()

# exp(-45) ~ 2.9e-20: summation cutoff exponent used by theta and friends.
_EXP_CUTOFF = 45.0


def theta(t: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Gaussian lattice sum  sum_n exp(-pi^2 n^2 / t)  over all integers n.

    By Poisson summation the same value equals
    sqrt(t/pi) * sum_n exp(-t n^2); the faster-converging side is picked
    automatically (crossover at ``config.theta_crossover``).  Always >= 1.
    """
    t = float(t)
    if t <= 0.0:
        raise ValueError("theta(t) requires t > 0")
    if t <= config.theta_crossover:
        n_cut = math.ceil(math.sqrt(_EXP_CUTOFF * t) / math.pi) + 1
        tail = math.fsum(
            math.exp(-math.pi * math.pi * n * n / t) for n in range(1, n_cut + 1)
        )
        return 1.0 + 2.0 * tail
    n_cut = math.ceil(math.sqrt(_EXP_CUTOFF / t)) + 1
    tail = math.fsum(math.exp(-t * n * n) for n in range(1, n_cut + 1))
    return math.sqrt(t / math.pi) * (1.0 + 2.0 * tail)


@dataclass(frozen=True)
class ThetaValue:
    """A checked (argument, value) pair for the lattice sum ``theta``."""

    t: float
    value: float

    def __post_init__(self) -> None:
        if self.t <= 0.0:
            raise ValueError("theta argument must be positive")
        if self.value < 1.0:
            raise ValueError("theta values are >= 1 by positivity of the sum")

    @classmethod
    def at(cls, t: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> "ThetaValue":
        return cls(t=float(t), value=theta(t, config))


@lru_cache(maxsize=None)
def _unit_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights transplanted from [-1, 1] to [0, 1]."""
    x, w = legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def integrate_unit_interval(f, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Integrate a smooth vectorized integrand over [0, 1].

    Doubles the Gauss-Legendre node count from ``config.min_nodes`` until two
    successive rules agree to ``config.tolerance`` (relative, floored at 1),
    capped at ``config.max_nodes``.  Returns the finest estimate.
    """
    n = config.min_nodes
    xs, ws = _unit_rule(n)
    prev = float(np.dot(ws, f(xs)))
    while n < config.max_nodes:
        n *= 2
        xs, ws = _unit_rule(n)
        cur = float(np.dot(ws, f(xs)))
        if abs(cur - prev) <= config.tolerance * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def _alpha_series_scalar(z: float, config: SpecialFunctionConfig) -> float:
    # alpha(z) = sum_k c_k (-z)^k with c_0 = 1, c_{k+1}/c_k = 1/(2(2k+3)).
    term = 1.0
    total = 1.0
    for k in range(500):
        term *= -z / (2.0 * (2 * k + 3))
        total += term
        if abs(term) <= config.tolerance * max(1.0, abs(total)):
            break
    return total


def _alpha_matrix(z: np.ndarray, config: SpecialFunctionConfig) -> np.ndarray:
    # Same series with matrix powers; alpha is entire so this converges for
    # every square matrix, with the usual cancellation caveat once the
    # spectral radius exceeds the scalar series radius.
    z = np.asarray(z)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError("matrix argument must be square")
    dtype = np.result_type(z.dtype, np.float64)
    term = np.eye(z.shape[0], dtype=dtype)
    total = term.copy()
    for k in range(500):
        term = term @ z * (-1.0 / (2.0 * (2 * k + 3)))
        total += term
        if np.max(np.abs(term)) <= config.tolerance * max(1.0, np.max(np.abs(total))):
            break
    return total


def alpha(z, config: SpecialFunctionConfig = DEFAULT_CONFIG):
    """The entire function  int_0^1 exp(-(1 - xi^2) z / 4) dxi.

    alpha(0) = 1,  alpha(z) = 1 - z/6 + O(z^2),  z*alpha(z) -> 2 as z -> +inf,
    and it satisfies  4 alpha' + (1 + 2/z) alpha = 2/z.

    Scalars use the power series for z <= series radius (for negative z the
    terms are one-signed, so the series is stable however large -z gets,
    up to overflow near z ~ -2800) and endpoint-safe quadrature beyond it.
    A square ndarray is mapped through the same series with matrix powers.
    """
    if isinstance(z, np.ndarray) and z.ndim == 2:
        return _alpha_matrix(z, config)
    z = float(z)
    if z <= config.alpha_series_radius:
        return _alpha_series_scalar(z, config)
    return integrate_unit_interval(
        lambda xi: np.exp(-(1.0 - xi * xi) * (z / 4.0)), config
    )


def alpha_prime(z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Derivative of ``alpha``:  -(1/4) int_0^1 (1 - xi^2) exp(-(1-xi^2)z/4) dxi."""
    z = float(z)
    if z <= config.alpha_series_radius:
        # alpha'(z) = -sum_j d_j (-z)^j, d_0 = 1/6,
        # d_{j+1}/d_j = (j+2) / ((j+1) * 2 * (2j+5)).
        term = 1.0 / 6.0
        total = term
        for j in range(500):
            term *= -z * (j + 2) / ((j + 1) * 2.0 * (2 * j + 5))
            total += term
            if abs(term) <= config.tolerance * max(1.0, abs(total)):
                break
        return -total
    return integrate_unit_interval(
        lambda xi: -0.25 * (1.0 - xi * xi) * np.exp(-(1.0 - xi * xi) * (z / 4.0)),
        config,
    )


def alpha_ode_residual(z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Residual of  4 alpha' + (1 + 2/z) alpha - 2/z;  identically zero in exact arithmetic."""
    z = float(z)
    if z == 0.0:
        raise ValueError("the defining equation is singular at z = 0")
    return 4.0 * alpha_prime(z, config) + (1.0 + 2.0 / z) * alpha(z, config) - 2.0 / z


def f_q_quadrature(q: float, z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Ground-truth quadrature of  int_0^1 (1 + (1 - xi^2) z / 4)^q dxi,  z >= 0."""
    z = float(z)
    if z < 0.0:
        raise ValueError("f_q(q, z) requires z >= 0")
    if z == 0.0:
        return 1.0
    q = float(q)
    return integrate_unit_interval(
        lambda xi: (1.0 + (1.0 - xi * xi) * (z / 4.0)) ** q, config
    )


def _f_nonneg_int(q: int, z: float) -> float:
    # Terminating series: sum_j q! j! / ((q-j)! (2j+1)!) z^j, exact coefficients.
    return math.fsum(
        math.factorial(q)
        * math.factorial(j)
        / (math.factorial(q - j) * math.factorial(2 * j + 1))
        * z**j
        for j in range(q + 1)
    )


def f_minus_half_closed(z: float) -> float:
    """Closed form  (2/sqrt(z)) arcsin((1 + 4/z)^{-1/2})  for the q = -1/2 member.

    Kept as a helper that the tests compare against the quadrature ground
    truth; ``f_q`` itself does not trust it (the arcsin branch is checked,
    not assumed).
    """
    z = float(z)
    if z < 0.0:
        raise ValueError("requires z >= 0")
    if z == 0.0:
        return 1.0
    return (2.0 / math.sqrt(z)) * math.asin(1.0 / math.sqrt(1.0 + 4.0 / z))


def f_q(q: float, z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """The family  int_0^1 (1 + (1 - xi^2) z / 4)^q dxi  on z >= 0.

    Dispatch: q = -3/2 has the rational closed form 4/(z+4); non-negative
    integer q terminates as a degree-q polynomial; every other q (including
    -1/2) goes through the quadrature ground truth.

    f_q(0) = 1 for every q, and f_q(z) ~ (Gamma(q+1)^2 / Gamma(2q+2)) z^q
    for large z.
    """
    z = float(z)
    if z < 0.0:
        raise ValueError("f_q(q, z) requires z >= 0")
    if z == 0.0:
        return 1.0
    q = float(q)
    if q == -1.5:
        return 4.0 / (z + 4.0)
    if q >= 0.0 and q == int(q):
        return _f_nonneg_int(int(q), z)
    return f_q_quadrature(q, z, config)
