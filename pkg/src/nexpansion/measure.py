"""Invariant densities, normalising constant, dilogarithm and entropy.

On a plateau [A, B] the invariant density of T_alpha is a signed sum of six
terms H*M/(N + M x) over sub-intervals cut by the first two orbit points of
alpha and alpha + 1; it is the projection of H*N/(N + xy)^2 on the planar
domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import NExpParams, digit_range
from .matching import MatchingPair, plateau_heights
from .natext import build_domain

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure Python fallback
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

PI2_6 = math.pi ** 2 / 6.0
DEFAULT_BURN_IN = 1000


# ---------------------------------------------------------------- dilogarithm

def _li2_series(x: float) -> float:
    # |x| <= 1/2: terms shrink at least like 2^-k / k^2
    total, term, k = 0.0, x, 1
    while True:
        inc = term / (k * k)
        total += inc
        if abs(inc) < 1e-18 * max(1.0, abs(total)):
            return total
        k += 1
        term *= x


def dilog(x: float) -> float:
    """Real dilogarithm Li2(x) = sum x^k/k^2 for x <= 1."""
    x = float(x)
    if x > 1.0:
        raise ValueError(f"dilog is real-valued only for x <= 1, got {x!r}")
    if x == 1.0:
        return PI2_6
    if x == 0.0:
        return 0.0
    if x < -1.0:
        # inversion: Li2(x) = -pi^2/6 - log(-x)^2/2 - Li2(1/x)
        return -PI2_6 - 0.5 * math.log(-x) ** 2 - dilog(1.0 / x)
    if x < -0.5:
        # Landen: Li2(x) = -Li2(x/(x-1)) - log(1-x)^2/2, x/(x-1) in (1/3, 1/2]
        return -_li2_series(x / (x - 1.0)) - 0.5 * math.log1p(-x) ** 2
    if x <= 0.5:
        return _li2_series(x)
    # reflection: Li2(x) = pi^2/6 - log(x)log(1-x) - Li2(1-x)
    return PI2_6 - math.log(x) * math.log1p(-x) - _li2_series(1.0 - x)


def _log_antiderivative(M: float, N: float, x: float) -> float:
    r = M / N * x
    return dilog(-r) + math.log(x) * math.log1p(r)


def log_integral(M: float, N: float, n: float, m: float) -> float:
    """Integral of log(x) * M/(N + M x) over [n, m] via the dilogarithm."""
    if n == m:
        return 0.0
    return _log_antiderivative(M, N, m) - _log_antiderivative(M, N, n)


# ---------------------------------------------------------------- densities

def normalizing_constant(pair: MatchingPair) -> float:
    h = plateau_heights(pair)
    N, d, i = pair.N, pair.d, pair.i
    args = (N - (h.A + 1.0) * d, N - (d + i) * h.B)
    if min(args) <= 0:
        raise AssertionError(f"non-positive logarithm argument for {pair}: {args}")
    inv = 2.0 * math.log(h.A) + 2.0 * math.log1p(h.B) - math.log(args[0]) - math.log(args[1])
    return 1.0 / inv


class DensityTerm(NamedTuple):
    sign: int
    M: float
    lo: float
    hi: float


@dataclass(frozen=True)
class PiecewiseLogDensity:
    """f(x) = H * sum sign * M/(N + M x) * 1[lo, hi)(x) on [alpha, alpha + 1]."""

    N: int
    alpha: float
    H: float
    terms: tuple[DensityTerm, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        top = self.alpha + 1.0
        for t in self.terms:
            m = (x >= t.lo) & ((x < t.hi) | ((t.hi == top) & (x == top)))
            out = out + np.where(m, t.sign * t.M / (self.N + t.M * x), 0.0)
        return self.H * out

    def scaled(self, factor: float) -> "PiecewiseLogDensity":
        return PiecewiseLogDensity(self.N, self.alpha, self.H * factor, self.terms)

    @property
    def breakpoints(self) -> list[float]:
        return sorted({t.lo for t in self.terms} | {t.hi for t in self.terms})

    def integral(self, a: Optional[float] = None, b: Optional[float] = None) -> float:
        """Exact integral over [a, b] (defaults to the whole interval)."""
        a = self.alpha if a is None else a
        b = self.alpha + 1.0 if b is None else b
        total = 0.0
        for t in self.terms:
            lo, hi = max(a, t.lo), min(b, t.hi)
            if hi > lo:
                total += t.sign * (math.log(self.N + t.M * hi) - math.log(self.N + t.M * lo))
        return self.H * total

    def log_moment(self) -> float:
        """Integral of log(x) f(x) over the interval, in closed form."""
        total = 0.0
        for t in self.terms:
            if t.hi > t.lo:
                total += t.sign * log_integral(t.M, self.N, t.lo, t.hi)
        return self.H * total


def density_1d(pair: MatchingPair, alpha: float) -> PiecewiseLogDensity:
    """Invariant density for alpha in the closed plateau of ``pair``."""
    dom = build_domain(pair, alpha)
    m, h = dom.x_marks, dom.heights
    a, a1 = dom.alpha, dom.alpha + 1.0
    terms = (
        DensityTerm(+1, h.D, a, m.t_a1),
        DensityTerm(+1, h.E, m.t_a1, m.t2_a),
        DensityTerm(+1, h.F, m.t2_a, a1),
        DensityTerm(-1, h.A, a, m.t2_a1),
        DensityTerm(-1, h.B, m.t2_a1, m.t_a),
        DensityTerm(-1, h.C, m.t_a, a1),
    )
    return PiecewiseLogDensity(pair.N, a, normalizing_constant(pair), terms)


def transfer_residual(pair: MatchingPair, alpha: float, f: PiecewiseLogDensity, x):
    """|f(x) - (P f)(x)| with P the Perron-Frobenius operator of T_alpha.

    Accepts scalars or arrays.
    """
    N = pair.N
    p = NExpParams(N, alpha)
    lo, hi = digit_range(p)
    x = np.asarray(x, dtype=float)
    pf = np.zeros_like(x)
    for j in range(lo, hi + 1):
        y = N / (x + j)
        # the branch with digit j covers x iff its preimage lies in [alpha, alpha+1]
        ok = (y >= alpha) & (y <= alpha + 1.0)
        pf = pf + np.where(ok, f(np.clip(y, alpha, alpha + 1.0)) * y * y / N, 0.0)
    res = np.abs(f(x) - pf)
    return float(res) if res.ndim == 0 else res


# ---------------------------------------------------------------- entropy

def entropy_closed_form(pair: MatchingPair) -> float:
    """Entropy on the plateau, computed from the shape of the domain at alpha = B.

    There the density is H*(E/(N+Ex) - A/(N+Ax)) on (B, D) and
    H*(E/(N+Ex) - C/(N+Cx)) on (D, B+1), and Rohlin's formula gives
    log N - 2 * integral of log(x) f(x).
    """
    h = plateau_heights(pair)
    N = pair.N
    H = normalizing_constant(pair)
    B, D = h.B, h.D
    s = (log_integral(h.E, N, B, B + 1.0)
         - log_integral(h.A, N, B, D)
         - log_integral(h.C, N, D, B + 1.0))
    return math.log(N) - 2.0 * H * s


@njit(cache=True)
def _birkhoff_log_mean(N, alpha, x, iterations, burn_in):
    for _ in range(burn_in):
        y = N / x
        x = y - math.floor(y - alpha)
    s = 0.0
    for _ in range(iterations):
        s += math.log(x)
        y = N / x
        x = y - math.floor(y - alpha)
    return s / iterations


def entropy_birkhoff(params: NExpParams, iterations: int, burn_in: int = DEFAULT_BURN_IN, seed: int = 0) -> float:
    """Time average of log|T'(x)| = log N - 2 log x along one seeded orbit.

    The starting point x_0 is uniform in (alpha, alpha + 1); after burn_in
    steps the terms x_b, ..., x_{b+iterations-1} are averaged.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rng = np.random.default_rng(seed)
    x0 = float(rng.uniform(params.alpha, params.alpha + 1.0))
    mean_log = _birkhoff_log_mean(float(params.N), params.alpha, x0, int(iterations), int(burn_in))
    return math.log(params.N) - 2.0 * mean_log


def derive_seed(seed: int, index: int) -> int:
    """Independent 63-bit seed for grid point ``index`` of a run seeded by ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class EntropyResult:
    closed_form: float
    birkhoff_estimate: Optional[float] = None
    birkhoff_iterations: int = 0
    seed: int = 0

    @property
    def deviation(self) -> Optional[float]:
        if self.birkhoff_estimate is None:
            return None
        return abs(self.birkhoff_estimate - self.closed_form)


def entropy(pair: MatchingPair, alpha: Optional[float] = None, iterations: int = 0,
            seed: int = 0, burn_in: int = DEFAULT_BURN_IN) -> EntropyResult:
    """Closed-form plateau entropy, optionally compared with a simulation at alpha."""
    h = entropy_closed_form(pair)
    if not iterations:
        return EntropyResult(h)
    if alpha is None:
        ph = plateau_heights(pair)
        alpha = 0.5 * (ph.A + ph.B)
    est = entropy_birkhoff(NExpParams(pair.N, alpha), iterations, burn_in, seed)
    return EntropyResult(h, est, iterations, seed)


class SweepRow(NamedTuple):
    alpha: float
    entropy: float
    iterations: int
    seed: int


def _sweep_point(args):
    N, a, iterations, s, burn_in = args
    return entropy_birkhoff(NExpParams(N, a), iterations, burn_in, s)


def entropy_sweep(N: int, alpha_lo: float, alpha_hi: float, steps: int, iterations: int,
                  seed: int = 0, burn_in: int = DEFAULT_BURN_IN, workers: int = 1) -> list[SweepRow]:
    """Birkhoff entropy on a uniform alpha grid including both ends.

    Grid point g is simulated with ``derive_seed(seed, g)``, so the table does
    not depend on ``workers``.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not 0.0 < alpha_lo < alpha_hi:
        raise ValueError("need 0 < alpha_lo < alpha_hi")
    NExpParams(N, alpha_hi)  # validates the upper end against sqrt(N) - 1
    alphas = [alpha_lo + (alpha_hi - alpha_lo) * g / (steps - 1) for g in range(steps)]
    alphas[-1] = alpha_hi
    seeds = [derive_seed(seed, g) for g in range(steps)]
    jobs = [(N, a, iterations, s, burn_in) for a, s in zip(alphas, seeds)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            values = list(ex.map(_sweep_point, jobs))
    else:
        values = [_sweep_point(j) for j in jobs]
    return [SweepRow(a, v, iterations, s) for a, v, s in zip(alphas, values, seeds)]
