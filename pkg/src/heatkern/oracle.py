"""Brute-force spectral ground truth for -D^2 + Q on the circle.

A plane-wave Galerkin truncation turns the operator into a finite Hermitian
matrix; its eigenvalues feed everything downstream:

* ``heat_trace`` / ``omega``      -- exponential sums with explicit refusal
  when the truncation cannot support the requested time,
* ``zeta``                        -- head sum over computed eigenvalues plus
  an Euler-Maclaurin tail built on the free-plus-mean asymptotics,
* ``b_function`` / ``log_det``    -- the Mellin family B_q(lambda) via a
  split integral: exact small-t series against the local invariants and a
  closed-form incomplete-gamma tail over the computed spectrum.

``floquet_log_det`` is an entirely independent determinant route (trace of
the period map minus two) used to cross-check the Mellin machinery.

Conventions: potential modes q_n with q_{-n} = q_n^dagger, free eigenvalue
of mode n is (n/a)^2, eigenvalues are reported sorted ascending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import linalg, special
from scipy.integrate import solve_ivp

from .errors import ResolutionError
from .heatcoeffs import global_invariant
from .periodic import PeriodicFunction

# e^{-45} ~ 3e-20: dropping exponentials beyond this leaves float64 intact.
_EXP_CUT = 45.0


# ----------------------------------------------------------------- problem

@dataclass(frozen=True)
class SpectralProblem:
    """Potential bundle on a circle of radius a: the data of -D^2 + Q."""

    a: float
    dim: int
    Q: PeriodicFunction

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError("radius a must be positive and finite")
        if self.dim < 1:
            raise ValueError("bundle dimension must be >= 1")
        if self.Q.matrix_dim != self.dim:
            raise ValueError(
                f"potential is {self.Q.matrix_dim}x{self.Q.matrix_dim}, "
                f"problem says dim={self.dim}"
            )
        if abs(self.Q.a - self.a) > 1e-12 * abs(self.a):
            raise ValueError("potential radius disagrees with problem radius")

    @property
    def bandwidth(self) -> int:
        return self.Q.bandwidth

    @classmethod
    def free(cls, a: float = 1.0, dim: int = 1) -> "SpectralProblem":
        return cls(a=a, dim=dim, Q=PeriodicFunction.zero(a, dim))

    @classmethod
    def from_potential(cls, Q: PeriodicFunction) -> "SpectralProblem":
        return cls(a=Q.a, dim=Q.matrix_dim, Q=Q)

    def to_json_obj(self) -> dict:
        """JSON form: {a, N, modes: [{n, matrix: [[[re, im], ...], ...]}]}.

        Only modes n >= 0 are written; readers complete q_{-n} = q_n^dagger.
        """
        modes = []
        for n in range(self.bandwidth + 1):
            m = self.Q.mode(n)
            if n > 0 and not np.any(m):
                continue
            modes.append({
                "n": n,
                "matrix": [[[float(z.real), float(z.imag)] for z in row]
                           for row in m],
            })
        return {"a": self.a, "N": self.dim, "modes": modes}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SpectralProblem":
        try:
            a = float(obj["a"])
            dim = int(obj["N"])
            raw = obj["modes"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"problem JSON missing field: {exc}") from exc
        given: dict[int, np.ndarray] = {}
        for entry in raw:
            n = int(entry["n"])
            m = np.array(
                [[complex(re, im) for re, im in row] for row in entry["matrix"]],
                dtype=complex,
            )
            if m.shape != (dim, dim):
                raise ValueError(f"mode {n}: matrix shape {m.shape} != ({dim},{dim})")
            if n in given:
                raise ValueError(f"mode {n} listed twice")
            given[n] = m
        # Hermitian completion: q_{-n} := q_n^dagger for any one-sided mode,
        # consistency check when both signs are present.
        mode_dict = dict(given)
        for n, m in list(mode_dict.items()):
            if -n not in mode_dict:
                mode_dict[-n] = m.conj().T
            else:
                other = mode_dict[-n]
                if not np.allclose(other, m.conj().T, atol=1e-12):
                    raise ValueError(f"modes {n} and {-n} are not mutual adjoints")
        bw = max(abs(n) for n in mode_dict) if mode_dict else 0
        stack = np.zeros((2 * bw + 1, dim, dim), dtype=complex)
        for n, m in mode_dict.items():
            stack[n + bw] = m
        Q = PeriodicFunction(a, stack)
        return cls(a=a, dim=dim, Q=Q)


# -------------------------------------------------------------- eigenvalues

def assemble(problem: SpectralProblem, n_max: int) -> np.ndarray:
    """Dense Hermitian Galerkin matrix on plane waves |n| <= n_max.

    Block (n, m) is (n/a)^2 delta_{nm} + q_{n-m}; refuses n_max below the
    potential bandwidth, where the matrix would silently drop couplings.
    """
    bw = problem.bandwidth
    if n_max < bw:
        raise ResolutionError(
            f"n_max={n_max} cannot represent a bandwidth-{bw} potential",
            suggestion={"n_max": bw},
        )
    N = problem.dim
    size = (2 * n_max + 1) * N
    H = np.zeros((size, size), dtype=complex)
    inv_a2 = 1.0 / problem.a ** 2
    for n in range(-n_max, n_max + 1):
        i = (n + n_max) * N
        H[i:i + N, i:i + N] += (n * n * inv_a2) * np.eye(N)
    for k in range(-bw, bw + 1):
        qk = problem.Q.mode(k)
        if not np.any(qk):
            continue
        for n in range(max(-n_max, -n_max + k), min(n_max, n_max + k) + 1):
            i = (n + n_max) * N
            j = (n - k + n_max) * N
            H[i:i + N, j:j + N] += qk
    scale = max(1.0, float(np.max(np.abs(H))))
    assert float(np.max(np.abs(H - H.conj().T))) <= 1e-14 * scale
    return H


@dataclass(frozen=True)
class EigenData:
    """Sorted spectrum of one Galerkin truncation, plus the geometry needed
    by the tail formulas (radius, bundle dimension, mean-mode eigenvalues)."""

    n_max: int
    eigenvalues: np.ndarray
    a: float
    dim: int
    n_band: int
    q0_eigs: tuple[float, ...]

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        if vals.ndim != 1 or vals.size != (2 * self.n_max + 1) * self.dim:
            raise ValueError("eigenvalue count disagrees with truncation size")
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def eigendata(problem: SpectralProblem, n_max: int) -> EigenData:
    H = assemble(problem, n_max)
    vals = np.linalg.eigvalsh(H)
    q0e = np.linalg.eigvalsh(problem.Q.mean())
    return EigenData(
        n_max=n_max,
        eigenvalues=vals,
        a=problem.a,
        dim=problem.dim,
        n_band=problem.bandwidth,
        q0_eigs=tuple(float(x) for x in q0e),
    )


def _suggest_n_max(eigen: EigenData, t: float, lam: float = 0.0) -> int:
    lam_top = _EXP_CUT / t + lam
    need = math.ceil(eigen.a * math.sqrt(max(lam_top, 1.0)))
    return need + eigen.n_band + 2


def heat_trace(eigen: EigenData, t: float) -> float:
    """Theta(t) = sum_n exp(-t lambda_n) over the computed spectrum.

    Refuses when the truncation top does not reach the e^{-45} floor at
    this t — the missing tail would alias into the answer.
    """
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("heat time t must be positive and finite")
    if t * eigen.lambda_max < _EXP_CUT:
        raise ResolutionError(
            f"truncation n_max={eigen.n_max} too small for t={t:g}: "
            f"t*lambda_max={t * eigen.lambda_max:.2f} < {_EXP_CUT}",
            suggestion={"n_max": _suggest_n_max(eigen, t)},
        )
    return float(np.sum(np.exp(-t * eigen.eigenvalues)))


def omega(eigen: EigenData, problem: SpectralProblem, t: float) -> float:
    """Normalized trace (4 pi t)^{1/2} Theta(t)."""
    if abs(problem.a - eigen.a) > 1e-12 * eigen.a:
        raise ValueError("eigendata belongs to a different radius")
    return math.sqrt(4.0 * math.pi * t) * heat_trace(eigen, t)


# --------------------------------------------------------------------- zeta

def _em_tail(s: float, lam: float, a: float, shift: float, W: int) -> float:
    """Euler-Maclaurin completion of 2*sum_{n>=W} ((n/a)^2 + c)^{-s}.

    c = shift - lam comes from the free-plus-mean eigenvalue asymptotics;
    the 1/n^2 corrections the approximation ignores are parity-cancelled
    between +n and -n, so the leftover error is O(W^{-2s-3}).
    """
    c = shift - lam
    if c <= 0.0:
        raise ValueError("tail shift must stay above lambda")
    g = (W / a) ** 2 + c

    def f(x):
        return ((x / a) ** 2 + c) ** (-s)

    # integral_W^infty ((x/a)^2+c)^{-s} dx via the regularized beta function
    w_tilde = W / (a * math.sqrt(c))
    u0 = 1.0 / (1.0 + w_tilde ** 2)
    integral = (
        a * c ** (0.5 - s) * 0.5
        * special.betainc(s - 0.5, 0.5, u0) * special.beta(s - 0.5, 0.5)
    )
    fp = -2.0 * s * W / a ** 2 * g ** (-s - 1.0)
    fppp = (
        12.0 * s * (s + 1.0) * W / a ** 4 * g ** (-s - 2.0)
        - 8.0 * s * (s + 1.0) * (s + 2.0) * W ** 3 / a ** 6 * g ** (-s - 3.0)
    )
    return 2.0 * (integral + 0.5 * f(W) - fp / 12.0 + fppp / 720.0)


def zeta(eigen: EigenData, s: float, lam: float) -> float:
    """Spectral zeta sum_n (lambda_n - lam)^{-s}.

    Head: eigenvalues of the modes |n| <= n_c (a safety margin below the
    truncation).  Tail: Euler-Maclaurin on (n/a)^2 + d_alpha - lam with
    d_alpha the mean-mode eigenvalues.  s = 0 returns the continuation
    value 0 exactly; 0 < s <= 1/2 has no convergent head sum and is
    refused (use the Mellin route and the functional relation instead).
    """
    if s == 0.0:
        return 0.0
    if s <= 0.5:
        raise ValueError("zeta head sum needs s > 1/2 (or exactly s = 0)")
    if lam >= eigen.lambda_min:
        raise ValueError(
            f"shift lam={lam:g} must lie below lambda_1={eigen.lambda_min:g}"
        )
    n_c = eigen.n_max - (eigen.n_band + 8)
    if n_c < max(2 * eigen.n_band + 2, 4):
        raise ResolutionError(
            f"n_max={eigen.n_max} leaves no room for a zeta head",
            suggestion={"n_max": eigen.n_max + eigen.n_band + 16},
        )
    head_count = (2 * n_c + 1) * eigen.dim
    head = float(np.sum((eigen.eigenvalues[:head_count] - lam) ** (-s)))
    tail = 0.0
    for d in eigen.q0_eigs:
        tail += _em_tail(s, lam, eigen.a, d, n_c + 1)
    return head + tail


# ------------------------------------------------------------ Mellin family

@dataclass(frozen=True)
class MellinPlan:
    """Split-integral plan for B_q: series on (0, t*], spectrum beyond.

    ``tail_rule`` chooses between the closed-form incomplete-gamma tail
    (exact per eigenvalue) and a per-eigenvalue scaled Gauss-Laguerre rule
    kept as an independent cross-check.
    """

    t_star: float
    series_order: int = 8
    tail_rule: str = "exact-gamma"
    tail_nodes: int = 128
    check_tol: float = 1e-6

    def __post_init__(self):
        if not (self.t_star > 0.0 and math.isfinite(self.t_star)):
            raise ValueError("split point t_star must be positive")
        if not 2 <= self.series_order <= 12:
            raise ValueError("series order outside the supported range 2..12")
        if self.tail_rule not in ("exact-gamma", "laguerre"):
            raise ValueError(f"unknown tail rule {self.tail_rule!r}")
        if self.tail_nodes < 16:
            raise ValueError("tail quadrature needs at least 16 nodes")

    @classmethod
    def default(cls, problem: SpectralProblem, lam: float) -> "MellinPlan":
        # Keep |lam| * t_star small so the e^{t lam}-dressed series stays
        # inside its useful range; a^2/4 caps the split well below the
        # circle's diffusion scale.
        t_star = min(problem.a ** 2 / 4.0, 0.2 / max(1.0, -lam))
        return cls(t_star=t_star)

    def halved(self) -> "MellinPlan":
        return replace(self, t_star=self.t_star / 2.0)


@lru_cache(maxsize=8)
def _laguerre_rule(nodes: int):
    x, w = special.roots_laguerre(nodes)
    return x, w


def _falling_half(j: int) -> float:
    """(1/2)(1/2 - 1)...(1/2 - j + 1); empty product for j = 0."""
    out = 1.0
    for i in range(j):
        out *= 0.5 - i
    return out


def _upper_gamma(beta: float, x: np.ndarray) -> np.ndarray:
    """Unregularized upper incomplete gamma, any real beta, x > 0."""
    if beta > 1e-12:
        return special.gammaincc(beta, x) * special.gamma(beta)
    if abs(beta) <= 1e-12:
        return special.exp1(x)
    # one stable step of the downward recurrence; x <= ~46 here, so the
    # cancellation costs at most a couple of digits per level
    return (_upper_gamma(beta + 1.0, x) - x ** beta * np.exp(-x)) / beta


def _tail_exact_gamma(mu: np.ndarray, t_star: float, q: float, n_ibp: int) -> float:
    total = 0.0
    for j in range(n_ibp + 1):
        beta = n_ibp - q + 0.5 - j
        coeff = math.comb(n_ibp, j) * _falling_half(j)
        terms = (-mu) ** (n_ibp - j) * mu ** (-beta) * _upper_gamma(beta, mu * t_star)
        total += coeff * float(np.sum(terms))
    return total


def _tail_laguerre(mu: np.ndarray, t_star: float, q: float, n_ibp: int,
                   nodes: int) -> float:
    u, w = _laguerre_rule(nodes)
    t = t_star + u[None, :] / mu[:, None]          # (modes, nodes)
    F = np.zeros_like(t)
    for j in range(n_ibp + 1):
        coeff = math.comb(n_ibp, j) * _falling_half(j)
        F += coeff * (-mu[:, None]) ** (n_ibp - j) * t ** (0.5 - j)
    F *= t ** (n_ibp - q - 1.0)
    integrals = np.exp(-mu * t_star) / mu * (F @ w)
    return float(np.sum(integrals))


def b_function(eigen: EigenData, problem: SpectralProblem, q: float,
               lam: float, plan: MellinPlan | None = None) -> float:
    """Mellin transform B_q(lam) of the normalized heat trace.

    Continuation below the naive convergence strip is by parts-integration
    of depth ceil(q)+1; the small-t side then integrates the termwise
    series exactly, the large-t side reduces to upper incomplete gamma
    functions per computed eigenvalue.  q = 1/2 is the log-determinant.
    """
    if abs(problem.a - eigen.a) > 1e-12 * eigen.a:
        raise ValueError("eigendata belongs to a different radius")
    margin = 1e-3 / problem.a ** 2
    if not lam <= eigen.lambda_min - margin:
        raise ValueError(
            f"lam={lam:g} too close to the spectrum (lambda_1={eigen.lambda_min:g})"
        )
    if plan is None:
        plan = MellinPlan.default(problem, lam)
    K = plan.series_order
    n_ibp = max(0, math.ceil(q) + 1)
    if n_ibp >= K:
        raise ValueError(f"q={q:g} needs series order > {n_ibp}")
    t_star = plan.t_star

    mu_all = eigen.eigenvalues - lam
    if float(mu_all[-1]) * t_star < _EXP_CUT:
        raise ResolutionError(
            f"truncation top {eigen.lambda_max:.3g} cannot anchor the tail "
            f"at t_star={t_star:g}",
            suggestion={"n_max": _suggest_n_max(eigen, t_star, lam)},
        )

    inv_list = [global_invariant(k, problem.Q).value for k in range(K + 1)]
    g = []
    for m in range(K + 1):
        acc = 0.0
        for k in range(m + 1):
            acc += (lam ** (m - k) / math.factorial(m - k)
                    * (-1.0) ** k * inv_list[k] / math.factorial(k))
        g.append(acc)

    # split-point consistency: the truncated series must still describe the
    # dressed trace at t*, else the answer would silently lose digits
    g_series = math.fsum(g[m] * t_star ** m for m in range(K + 1))
    g_exact = math.sqrt(4.0 * math.pi * t_star) * float(
        np.sum(np.exp(-t_star * mu_all)))
    if abs(g_series - g_exact) > plan.check_tol * max(1.0, abs(g_exact)):
        raise ResolutionError(
            f"series/spectrum mismatch {abs(g_series - g_exact):.3g} at "
            f"t_star={t_star:g}; the split point sits outside the series range",
            suggestion={"t_star": t_star / 2.0, "series_order": K + 2},
        )

    small = math.fsum(
        g[m] * (math.factorial(m) / math.factorial(m - n_ibp))
        * t_star ** (m - q) / (m - q)
        for m in range(n_ibp, K + 1)
    )

    mu = np.asarray(mu_all[mu_all * t_star <= _EXP_CUT + 1.0], dtype=float)
    if mu.size == 0:
        tail = 0.0
    elif plan.tail_rule == "laguerre":
        tail = math.sqrt(4.0 * math.pi) * _tail_laguerre(
            mu, t_star, q, n_ibp, plan.tail_nodes)
    else:
        tail = math.sqrt(4.0 * math.pi) * _tail_exact_gamma(mu, t_star, q, n_ibp)

    return (-1.0) ** n_ibp / special.gamma(n_ibp - q) * (small + tail)


def log_det(eigen: EigenData, problem: SpectralProblem, lam: float,
            plan: MellinPlan | None = None) -> float:
    """log Det(L - lam), i.e. B_q at q = 1/2."""
    return b_function(eigen, problem, 0.5, lam, plan)


# ------------------------------------------------- independent determinant

def floquet_log_det(problem: SpectralProblem, lam: float,
                    rtol: float = 1e-12) -> float:
    """log Det(L - lam) through the period map: Det = tr M(lam) - 2.

    Scalar problems only.  The fundamental system of -psi'' + (Q-lam) psi
    is integrated over one period in panels with QR-free rescaling (the
    solutions grow like exp(sqrt(-lam) x)); the accumulated log scale
    recovers the determinant without overflow.  Completely independent of
    the eigenvalue/Mellin pipeline — used as a cross-check oracle.
    """
    if problem.dim != 1:
        raise ValueError("period-map determinant implemented for dim = 1 only")
    import cmath

    a = problem.a
    period = 2.0 * math.pi * a
    modes = [(n, complex(problem.Q.mode(n)[0, 0]))
             for n in range(-problem.bandwidth, problem.bandwidth + 1)
             if np.any(problem.Q.mode(n))]

    def q_of(x: float) -> float:
        return sum((m * cmath.exp(1j * n * x / a)).real for n, m in modes)

    m_grid = max(64, 4 * problem.bandwidth + 4)
    q_scale = float(np.max(np.abs(problem.Q.sample_scalar(m_grid))))
    rate = math.sqrt(max(-lam, 0.0) + q_scale + 1.0)
    panels = max(4, math.ceil(rate * period / 20.0))

    def rhs(x, y):
        w = q_of(x) - lam
        return [y[1], w * y[0], y[3], w * y[2]]

    Y = np.array([1.0, 0.0, 0.0, 1.0])
    log_scale = 0.0
    for p in range(panels):
        x0 = period * p / panels
        x1 = period * (p + 1) / panels
        sol = solve_ivp(rhs, (x0, x1), Y, method="DOP853",
                        rtol=rtol, atol=1e-14, dense_output=False)
        if not sol.success:
            raise ArithmeticError(f"period-map integration failed: {sol.message}")
        Y = sol.y[:, -1]
        c = float(np.max(np.abs(Y)))
        Y = Y / c
        log_scale += math.log(c)
    trace_scaled = Y[0] + Y[3]
    inner = trace_scaled - 2.0 * math.exp(-log_scale)
    if inner <= 0.0:
        raise ArithmeticError("period-map trace at or below 2: lam not below spectrum?")
    return log_scale + math.log(inner)


# ------------------------------------------------------ high-precision path

def _parity_tridiagonals(problem: SpectralProblem, n_max: int):
    """Cosine/sine split of a real even scalar potential of bandwidth <= 1.

    Returns (diag_even, offsq_even, diag_odd, offsq_odd) where offsq holds
    the *squares* of the off-diagonal couplings: the cosine block's first
    coupling is sqrt(2) q_1, whose square 2 q_1^2 is exact in binary while
    the root is not, and only the square enters the Newton recurrence.
    """
    if problem.dim != 1:
        raise ValueError("high-precision path supports dim = 1 only")
    if problem.bandwidth > 1:
        raise ValueError("high-precision path supports bandwidth <= 1 only")
    q0 = complex(problem.Q.mode(0)[0, 0])
    q1 = complex(problem.Q.mode(1)[0, 0]) if problem.bandwidth >= 1 else 0.0 + 0.0j
    if abs(q0.imag) > 1e-14 or abs(q1.imag) > 1e-14:
        raise ValueError("high-precision path needs a real even potential")
    q0, q1 = q0.real, q1.real
    inv_a2 = 1.0 / problem.a ** 2
    diag_even = [q0] + [m * m * inv_a2 + q0 for m in range(1, n_max + 1)]
    offsq_even = [2.0 * q1 * q1] + [q1 * q1] * (n_max - 1)
    diag_odd = [m * m * inv_a2 + q0 for m in range(1, n_max + 1)]
    offsq_odd = [q1 * q1] * (n_max - 1)
    return diag_even, offsq_even, diag_odd, offsq_odd


def _newton_refine_tridiagonal(diag, offsq, seeds, dps: int):
    """Refine float64 eigenvalue seeds of a symmetric tridiagonal matrix to
    dps digits via Newton on the characteristic-polynomial recurrence.
    ``offsq`` carries the squared couplings (float-to-mpf is exact)."""
    import mpmath as mp

    n = len(diag)
    d = [mp.mpf(x) for x in diag]
    e2 = [mp.mpf(x) for x in offsq]
    refined = []
    with mp.workdps(dps):
        for seed in seeds:
            lam = mp.mpf(float(seed))
            for _ in range(8):
                p_prev, p = mp.mpf(1), d[0] - lam
                dp_prev, dp = mp.mpf(0), mp.mpf(-1)
                for k in range(1, n):
                    p_new = (d[k] - lam) * p - e2[k - 1] * p_prev
                    dp_new = -p + (d[k] - lam) * dp - e2[k - 1] * dp_prev
                    p_prev, p = p, p_new
                    dp_prev, dp = dp, dp_new
                step = p / dp
                lam -= step
                if abs(step) <= mp.mpf(10) ** (-(dps - 2)) * max(1, abs(lam)):
                    break
            refined.append(lam)
    return refined


def eigenvalues_hp(problem: SpectralProblem, n_max: int, dps: int = 50):
    """All Galerkin eigenvalues (|n| <= n_max) of a real even scalar
    potential, refined to ``dps`` digits.  Returns a sorted list of mpf."""
    import mpmath as mp

    de, oe, do, oo = _parity_tridiagonals(problem, n_max)
    out = []
    for diag, offsq in ((de, oe), (do, oo)):
        if len(diag) == 1:
            seeds = np.array(diag)
        else:
            seeds = linalg.eigh_tridiagonal(
                np.array(diag), np.sqrt(np.array(offsq)), eigvals_only=True)
        out.extend(_newton_refine_tridiagonal(diag, offsq, seeds, dps))
    return sorted(out)


def heat_trace_hp(problem: SpectralProblem, n_max: int, t, dps: int = 50,
                  values=None):
    """High-precision Theta(t); same refusal rule as the float64 path.
    ``values`` lets callers reuse one eigenvalues_hp run across many t."""
    import mpmath as mp

    vals = values if values is not None else eigenvalues_hp(problem, n_max, dps)
    with mp.workdps(dps):
        tt = mp.mpf(t)
        top = vals[-1]
        if tt * top < _EXP_CUT + 15:
            raise ResolutionError(
                f"hp truncation n_max={n_max} too small for t={float(t):g}",
                suggestion={"n_max": n_max * 2},
            )
        return mp.fsum(mp.e ** (-tt * v) for v in vals)
