"""Closed second-order forms of the heat trace and the determinant shift.

For a potential with Fourier modes q_k the heat trace is, exactly through
second order in the potential,

    Omega(t) = theta(t/a^2) 2 pi a (N - t tr q0)
               + pi a t^2 sum_{k in Z} |q_k|^2 beta_k(t/a^2),

where |q_k|^2 = tr(q_k q_k^dagger) and ``beta_k`` is the lattice pairing
weight below (beta_0 = theta, and beta_k -> alpha(t k^2) in the continuum
limit).  Pushing the same expansion through the Mellin transform gives the
large-shift determinant family

    b_q(lam) = 2 pi a q mu^{q-1} tr q0
               + pi a q (q-1) mu^{q-2} sum_{k in Z} |q_k|^2 f_{q-2}(k^2/(mu a^2)),

mu = -lam, whose q = 1/2 value is the determinant correction gamma; via
f_{-3/2}(z) = 4/(z+4) it collapses to the rational form

    gamma(lam) = pi a tr q0 / sqrt(mu)
                 - pi a^3 / sqrt(mu) * sum_{k in Z} |q_k|^2 / (k^2 + 4 mu a^2).

Both k-sums run over the whole lattice including k = 0 (the constant-
potential check Omega = 2 pi a theta e^{-tc} pins that term and the
coefficient pi a of the quadratic part; see the test suite).  Everything
here is an asymptotic statement in a sqrt(-lam) (resp. small t/a^2), and
`SpectralCorrection.scale` carries that regime marker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heatcoeffs import global_invariant
from .specfun import DEFAULT_CONFIG, SpecialFunctionConfig, f_q, integrate_unit_interval, theta

_EXP_CUTOFF = 45.0


def beta_k(k: int, t: float,
           config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Pairing weight of lattice mode k at dimensionless time t:

        beta_k(t) = sqrt(t/pi) int_0^1 dxi
                    sum_n exp(-t [n^2 + (1+xi)/2 (k^2 - 2 n k)]).

    The n-sum is a shifted Gaussian centred at (1+xi) k / 2; terms beyond
    the e^{-45} radius are dropped.  beta_{-k} = beta_k by n -> -n.
    """
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("beta_k needs t > 0")
    k = abs(int(k))
    radius = math.sqrt(_EXP_CUTOFF / t) + 1.0
    ns = np.arange(math.floor(k / 2 - radius), math.ceil(k + radius) + 1,
                   dtype=float)

    def integrand(xs: np.ndarray) -> np.ndarray:
        c = 0.5 * (1.0 + xs)
        # complete the square: n^2 + 2c(k^2/2 - nk) = (n - ck)^2 + c(1-c)k^2
        dev = ns[None, :] - c[:, None] * k
        expo = -t * (dev * dev + (c * (1.0 - c) * k * k)[:, None])
        return np.exp(expo).sum(axis=1)

    return math.sqrt(t / math.pi) * integrate_unit_interval(integrand, config)


def _mode_weights(Q) -> list[tuple[int, float, float]]:
    """(k, lattice multiplicity, |q_k|^2) for k >= 0 with nonzero weight."""
    out = []
    for k in range(Q.bandwidth + 1):
        w = Q.mode_norm_sq(k)
        if w != 0.0:
            out.append((k, 1.0 if k == 0 else 2.0, w))
    return out


@dataclass(frozen=True)
class PerturbativeTrace:
    """Second-order trace value with its mode-resolved ingredients.

    ``mode_terms[k]`` is the total contribution of the +-k pair (already
    multiplicity-weighted); ``mean_term`` is the theta-dressed Weyl plus
    tr q0 part.  value = mean_term + sum of mode_terms.
    """

    t: float
    value: float
    mean_term: float
    mode_terms: dict[int, float]

    @classmethod
    def omega(cls, problem, t: float,
              config: SpecialFunctionConfig = DEFAULT_CONFIG) -> "PerturbativeTrace":
        if not (t > 0.0 and math.isfinite(t)):
            raise ValueError("omega expansion needs t > 0")
        Q = problem.Q
        a = problem.a
        tau = t / a ** 2
        tr_q0 = float(np.trace(Q.mean()).real)
        mean_term = theta(tau, config) * 2.0 * math.pi * a * (problem.dim - t * tr_q0)
        mode_terms = {}
        for k, mult, w in _mode_weights(Q):
            mode_terms[k] = math.pi * a * t * t * mult * w * beta_k(k, tau, config)
        return cls(t=t, value=mean_term + math.fsum(mode_terms.values()),
                   mean_term=mean_term, mode_terms=mode_terms)


def omega_exact2(problem, t: float,
                 config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Normalized heat trace, exact through second order in the potential."""
    return PerturbativeTrace.omega(problem, t, config).value


@dataclass(frozen=True)
class SpectralCorrection:
    """(b_q, gamma) pair with the asymptotic regime marker a sqrt(-lam).

    Iterates as the (b_q, gamma) tuple so callers can unpack directly.
    """

    b_q: float
    gamma: float
    scale: float

    def __iter__(self):
        return iter((self.b_q, self.gamma))


def bq_gamma(problem, q: float, lam: float,
             config: SpecialFunctionConfig = DEFAULT_CONFIG) -> SpectralCorrection:
    """Large-shift spectral forms of B_q(lam) minus its free part, and of
    the determinant correction gamma = b_{1/2}.  Requires lam < 0; accuracy
    is O(eps^3) plus relative corrections e^{-2 pi a sqrt(-lam)}."""
    if not (lam < 0.0 and math.isfinite(lam)):
        raise ValueError("spectral forms need lam < 0")
    a = problem.a
    mu = -lam
    Q = problem.Q
    tr_q0 = float(np.trace(Q.mean()).real)
    weights = _mode_weights(Q)

    def b_spectral(qq: float) -> float:
        ssum = math.fsum(
            mult * w * f_q(qq - 2.0, k * k / (mu * a * a), config)
            for k, mult, w in weights)
        return (2.0 * math.pi * a * qq * mu ** (qq - 1.0) * tr_q0
                + math.pi * a * qq * (qq - 1.0) * mu ** (qq - 2.0) * ssum)

    gsum = math.fsum(mult * w / (k * k + 4.0 * mu * a * a)
                     for k, mult, w in weights)
    gamma = (math.pi * a * tr_q0 / math.sqrt(mu)
             - math.pi * a ** 3 / math.sqrt(mu) * gsum)
    # the q = 1/2 reduction must reproduce gamma exactly (f_{-3/2} = 4/(z+4))
    assert abs(b_spectral(0.5) - gamma) <= 1e-12 * max(1.0, abs(gamma))
    return SpectralCorrection(b_q=b_spectral(q), gamma=gamma,
                              scale=a * math.sqrt(mu))


def weyl_log_det(problem, lam: float) -> float:
    """Leading free-determinant growth 2 pi a N sqrt(-lam)."""
    if not lam < 0.0:
        raise ValueError("Weyl term needs lam < 0")
    return 2.0 * math.pi * problem.a * problem.dim * math.sqrt(-lam)


def resummed_omega(problem, t: float, order: int) -> float:
    """Partial sum sum_{k<=order} (-t)^k A_k / k! of the local expansion.

    Asymptotic in t/a^2 -> 0: the terms grow past the optimal order, they
    do not converge at fixed t.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    return math.fsum(
        (-t) ** k * global_invariant(k, problem.Q).value / math.factorial(k)
        for k in range(order + 1))


def trace_comparison_rows(problem, eigen, ts, order: int = 6,
                          config: SpecialFunctionConfig = DEFAULT_CONFIG):
    """(t, Omega_oracle, Omega_eps2, Omega_resummed) rows for reporting."""
    from .oracle import omega as oracle_omega

    rows = []
    for t in ts:
        rows.append((
            float(t),
            oracle_omega(eigen, problem, float(t)),
            omega_exact2(problem, float(t), config),
            resummed_omega(problem, float(t), order),
        ))
    return rows


def det_comparison_rows(problem, eigen, lams, plan=None,
                        config: SpecialFunctionConfig = DEFAULT_CONFIG):
    """(lam, logDet_oracle, Weyl, gamma) rows for reporting."""
    from .oracle import log_det

    rows = []
    for lam in lams:
        lam = float(lam)
        corr = bq_gamma(problem, 0.5, lam, config)
        rows.append((
            lam,
            log_det(eigen, problem, lam, plan),
            weyl_log_det(problem, lam),
            corr.gamma,
        ))
    return rows
