"""Integer lattice laws on truncated supports.

A law is stored as a dense probability vector over a contiguous window of
integers together with the analytic mass remaining outside the window, so
that downstream results can carry honest error budgets instead of silently
renormalising.  Power laws P(X=t) proportional to t^(-alpha) * L(t) with
L(t) = C*(ln(t+e))^rho are described analytically by PowerLawSpec; series
sums (normalizer, tails, moments) are evaluated by partial summation plus
an Euler-Maclaurin tail so that truncation never contaminates constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import (
    DegenerateLawError,
    DivergentMomentError,
    QuadratureError,
    SupportOverflowError,
    ValidationError,
)

MAX_SUPPORT = 1 << 26
FFT_THRESHOLD = 1 << 10
MASS_TOL = 1e-12

_EM_EDGE = 1 << 16  # partial sums reach at least this point before the EM tail


def _sv_values(t, C, rho):
    """L(t) = C*(ln(t+e))^rho, vectorized."""
    t = np.asarray(t, dtype=float)
    if rho == 0.0:
        return np.full(t.shape, C)
    return C * np.log(t + math.e) ** rho


def _power_terms(t, beta, C, rho):
    """f(t) = C * t^(-beta) * (ln(t+e))^rho, vectorized."""
    t = np.asarray(t, dtype=float)
    return t ** (-beta) * _sv_values(t, C, rho)


def _series_converges(beta, rho):
    return beta > 1.0 or (beta == 1.0 and rho < -1.0)


def _em_integral(beta, C, rho, T):
    """integral_T^inf C t^(-beta) (ln(t+e))^rho dt."""
    if rho == 0.0:
        return C * T ** (1.0 - beta) / (beta - 1.0)
    # substitute t = T/u so the infinite range maps to (0, 1];
    # quad on [T, inf) underflows silently for these integrands
    def integrand(u):
        t = T / u
        return C * t ** (-beta) * math.log(t + math.e) ** rho * T / (u * u)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200
        )
    if not abs(err) <= 1e-6 * abs(val) + 1e-300:
        raise QuadratureError(
            f"tail integral unreliable: value {val:.6e}, estimate {err:.3e}"
        )
    return val


def _em_derivatives(beta, C, rho, T):
    """f'(T) and f'''(T) for f = C t^(-beta) (ln(t+e))^rho via log-derivative chain."""
    T = float(T)
    f = C * T ** (-beta) * math.log(T + math.e) ** rho
    L = math.log(T + math.e)
    te = T + math.e
    g1 = -beta / T + rho / (te * L)
    g2 = beta / T**2 - rho * (L + 1.0) / (te**2 * L**2)
    g3 = -2.0 * beta / T**3 + rho * (2.0 * (L + 1.0) ** 2 - 1.0) / (te**3 * L**3)
    f1 = f * g1
    f3 = f * (g1**3 + 3.0 * g1 * g2 + g3)
    return f1, f3


@lru_cache(maxsize=4096)
def _series_tail(beta, C, rho, T):
    """sum_{t=T}^inf C t^(-beta) (ln(t+e))^rho, exact to ~1e-16 absolute.

    Partial sum up to the EM edge, then Euler-Maclaurin:
        sum_{t=T2}^inf f(t) = int_{T2}^inf f + f(T2)/2 - f'(T2)/12 + f'''(T2)/720
    with the next term below 1e-19 for every admissible (beta, rho).
    """
    if T < 1:
        raise ValidationError("series tail start must be >= 1")
    if not _series_converges(beta, rho):
        raise DivergentMomentError(
            f"series with exponent {beta} and log power {rho} diverges"
        )
    T2 = max(T, _EM_EDGE)
    parts = []
    lo = T
    while lo < T2:
        hi = min(lo + (1 << 20), T2)
        parts.append(math.fsum(_power_terms(np.arange(lo, hi), beta, C, rho)))
        lo = hi
    partial = math.fsum(parts)
    f1, f3 = _em_derivatives(beta, C, rho, T2)
    fT = C * float(T2) ** (-beta) * math.log(T2 + math.e) ** rho
    tail = _em_integral(beta, C, rho, float(T2)) + 0.5 * fT - f1 / 12.0 + f3 / 720.0
    return partial + tail


@dataclass(frozen=True)
class PowerLawSpec:
    """Analytic description of a heavy-tailed lattice law.

    One-sided laws live on {1, 2, ...} (plus 0 when a given-constant
    normalization leaves a remainder); two-sided laws mirror the form with
    constant b on the negative axis.  Under exact-normalize the probabilities
    are a*t^(-alpha)*L(t)/Z with Z chosen so the total mass is one; under
    given-constant they are used as written and P(X=0) absorbs the remainder.
    """

    alpha: float
    side: str = "one-sided"
    a: float = 1.0
    b: float = 0.0
    sv_family: tuple = (1.0, 0.0)
    normalization: str = "exact-normalize"

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValidationError("tail exponent must exceed 1 (series diverges)")
        if self.side not in ("one-sided", "two-sided"):
            raise ValidationError(f"unknown side {self.side!r}")
        if self.normalization not in ("exact-normalize", "given-constant"):
            raise ValidationError(f"unknown normalization {self.normalization!r}")
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValidationError("tail constants must be >= 0 with a+b > 0")
        if self.side == "one-sided" and self.b != 0.0:
            raise ValidationError("one-sided law cannot carry a left-tail constant")
        C, rho = self.sv_family
        if C <= 0:
            raise ValidationError("slowly-varying constant C must be positive")
        if not -3.0 <= rho <= 3.0:
            raise ValidationError("log exponent rho must lie in [-3, 3]")
        if self.normalization == "given-constant" and self._remainder() < -1e-12:
            raise ValidationError(
                "given-constant law is improper: series mass exceeds one"
            )

    # -- derived constants ------------------------------------------------

    @property
    def C(self):
        return self.sv_family[0]

    @property
    def rho(self):
        return self.sv_family[1]

    def _base_series(self):
        return _series_tail(self.alpha, self.C, self.rho, 1)

    def _remainder(self):
        return 1.0 - (self.a + self.b) * self._base_series()

    @property
    def normalizer(self):
        if self.normalization == "exact-normalize":
            return (self.a + self.b) * self._base_series()
        return 1.0

    @property
    def effective_a(self):
        return self.a / self.normalizer

    @property
    def effective_b(self):
        return self.b / self.normalizer

    @property
    def p0(self):
        if self.normalization == "exact-normalize":
            return 0.0
        return max(0.0, self._remainder())

    # -- pointwise / tail values ------------------------------------------

    def sv(self, t):
        return _sv_values(t, self.C, self.rho)

    def L1(self, t):
        """Slowly-varying pmf factor including the tail constant: P(X=t) = t^(-alpha)*L1(t)."""
        return self.effective_a * self.sv(t)

    def pmf_value(self, t):
        t = int(t)
        if t == 0:
            return self.p0
        const = self.effective_a if t > 0 else self.effective_b
        if const == 0.0:
            return 0.0
        return const * float(_power_terms(abs(t), self.alpha, self.C, self.rho))

    def tail_value(self, t):
        """P(X > t) for integer t, from the analytic series."""
        t = int(t)
        if t >= 0:
            if self.effective_a == 0.0:
                return 0.0
            return self.effective_a * _series_tail(self.alpha, self.C, self.rho, t + 1)
        below = self.effective_b * _series_tail(self.alpha, self.C, self.rho, -t)
        return 1.0 - below

    def abs_tail(self, x):
        """P(|X| > x) for integer x >= 0."""
        x = int(x)
        consts = self.effective_a + self.effective_b
        return consts * _series_tail(self.alpha, self.C, self.rho, x + 1)

    def tail_beyond(self, T):
        """Mass outside the window [-T, T] (one-sided: outside [0, T])."""
        return self.abs_tail(T)

    # -- analytic moments ---------------------------------------------------

    def moment(self, k):
        """E X^k from the analytic series; raises when the moment diverges."""
        if k < 0:
            raise ValidationError("moment order must be >= 0")
        if k == 0:
            return 1.0
        if not _series_converges(self.alpha - k, self.rho):
            if self.effective_b == 0.0 or k % 2 == 0:
                return math.inf
            raise DivergentMomentError(
                f"moment {k} undefined for alpha={self.alpha}, rho={self.rho}"
            )
        s = _series_tail(self.alpha - k, self.C, self.rho, 1)
        sign = -1.0 if k % 2 == 1 else 1.0
        return self.effective_a * s + sign * self.effective_b * s

    def mean(self):
        try:
            return self.moment(1)
        except DivergentMomentError:
            raise

    def variance(self):
        m1 = self.moment(1)
        m2 = self.moment(2)
        if math.isinf(m1) or math.isinf(m2):
            raise DivergentMomentError("variance diverges")
        return m2 - m1 * m1

    def abs_moment_tail(self, k, t_right, t_left=None):
        """Bound on sum_{|t| beyond edges} |t|^k P(X=t); inf when divergent."""
        if not _series_converges(self.alpha - k, self.rho):
            return math.inf
        out = 0.0
        if self.effective_a > 0.0:
            out += self.effective_a * _series_tail(
                self.alpha - k, self.C, self.rho, t_right + 1
            )
        if self.effective_b > 0.0 and t_left is not None:
            out += self.effective_b * _series_tail(
                self.alpha - k, self.C, self.rho, t_left + 1
            )
        return out


@dataclass(frozen=True)
class TruncationPolicy:
    """How to truncate an analytic law onto a finite window."""

    t_max: int | None = None
    mode: str = "keep-tail-mass"
    target_tail: float | None = None

    def __post_init__(self):
        if self.mode not in ("keep-tail-mass", "renormalize"):
            raise ValidationError(f"unknown truncation mode {self.mode!r}")
        if self.t_max is None and self.target_tail is None:
            raise ValidationError("policy needs t_max or target_tail")
        if self.t_max is not None and self.t_max < 1:
            raise ValidationError("t_max must be >= 1")
        if self.target_tail is not None and not 0.0 < self.target_tail < 1.0:
            raise ValidationError("target_tail must lie in (0, 1)")


@dataclass(eq=False)
class LatticePmf:
    """Dense probabilities on a contiguous integer window plus outside mass."""

    offset: int
    probs: np.ndarray
    tail_left: float = 0.0
    tail_right: float = 0.0
    label: str = ""
    spec: PowerLawSpec | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ValidationError("probs must be a nonempty 1-d vector")
        if probs.min() < -1e-13:
            raise ValidationError("negative probability in pmf")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        self.probs = probs
        self.offset = int(self.offset)
        if self.tail_left < 0 or self.tail_right < 0:
            raise ValidationError("tail masses must be >= 0")

    # -- basic accessors ----------------------------------------------------

    @property
    def tail_mass(self):
        return self.tail_left + self.tail_right

    @property
    def support_min(self):
        return self.offset

    @property
    def support_max(self):
        return self.offset + len(self.probs) - 1

    def mass(self):
        return float(math.fsum(self.probs))

    def at(self, t):
        i = int(t) - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    def support_values(self):
        return np.arange(self.offset, self.offset + len(self.probs))

    def validate(self):
        total = self.mass() + self.tail_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"mass {total} outside [1-1e-12, 1+1e-12]")
        return self

    def is_degenerate(self):
        return np.count_nonzero(self.probs) <= 1 and self.tail_mass == 0.0

    def span(self):
        """gcd of support differences; 0 for a point mass."""
        pts = np.flatnonzero(self.probs > 0.0)
        if len(pts) <= 1:
            return 0
        diffs = np.diff(pts)
        return int(np.gcd.reduce(diffs))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def point(cls, k, label=None):
        return cls(offset=int(k), probs=np.array([1.0]), label=label or f"delta_{k}")

    @classmethod
    def uniform(cls, lo, hi, label=None):
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValidationError("uniform needs lo <= hi")
        w = hi - lo + 1
        return cls(offset=lo, probs=np.full(w, 1.0 / w), label=label or f"uniform[{lo},{hi}]")

    @classmethod
    def from_probs(cls, offset, seq, tail_left=0.0, tail_right=0.0, label="", spec=None):
        return cls(
            offset=offset,
            probs=np.asarray(seq, dtype=float),
            tail_left=tail_left,
            tail_right=tail_right,
            label=label,
            spec=spec,
        )


def build_power_law(spec: PowerLawSpec, policy: TruncationPolicy) -> LatticePmf:
    """Materialize an analytic power law onto a finite window.

    Under keep-tail-mass the tails hold the exact analytic remainder of the
    normalizing series; under renormalize the retained window is rescaled to
    unit mass and the tails are zeroed.
    """
    if policy.target_tail is not None:
        T = _solve_edge(spec, policy.target_tail)
        if policy.t_max is not None and policy.t_max < T:
            raise ValidationError(
                f"t_max={policy.t_max} too small to reach target_tail "
                f"(needs {T})"
            )
    else:
        T = policy.t_max

    two_sided = spec.side == "two-sided"
    width = 2 * T + 1 if two_sided else T + 1
    if width > MAX_SUPPORT:
        raise SupportOverflowError(f"window of {width} cells exceeds budget")

    pos = spec.effective_a * _power_terms(np.arange(1, T + 1), spec.alpha, spec.C, spec.rho)
    if two_sided:
        neg = spec.effective_b * _power_terms(
            np.arange(1, T + 1), spec.alpha, spec.C, spec.rho
        )
        probs = np.concatenate([neg[::-1], [spec.p0], pos])
        offset = -T
        tail_left = spec.effective_b * _series_tail(spec.alpha, spec.C, spec.rho, T + 1)
    else:
        if spec.p0 > 0.0:
            probs = np.concatenate([[spec.p0], pos])
            offset = 0
        else:
            probs = pos
            offset = 1
        tail_left = 0.0
    tail_right = spec.effective_a * _series_tail(spec.alpha, spec.C, spec.rho, T + 1)

    label = (
        f"power-law(alpha={spec.alpha}, side={spec.side}, a={spec.a}, b={spec.b}, "
        f"C={spec.C}, rho={spec.rho}, {spec.normalization}, t_max={T}, {policy.mode})"
    )
    if policy.mode == "renormalize":
        probs = probs / math.fsum(probs)
        return LatticePmf(offset=offset, probs=probs, label=label, spec=spec)
    return LatticePmf(
        offset=offset,
        probs=probs,
        tail_left=tail_left,
        tail_right=tail_right,
        label=label,
        spec=spec,
    )


def _solve_edge(spec, target):
    """Smallest T >= 1 with mass outside [-T, T] at most target."""
    if spec.tail_beyond(1) <= target:
        return 1
    hi = 2
    while spec.tail_beyond(hi) > target:
        hi *= 2
        if hi > MAX_SUPPORT:
            raise SupportOverflowError(
                f"target_tail={target} needs a window beyond {MAX_SUPPORT} cells"
            )
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if spec.tail_beyond(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class Moment:
    """A moment value together with an explicit tail-error bound."""

    value: float
    error: float

    def __float__(self):
        return self.value


def moment(p: LatticePmf, k: int) -> Moment:
    """E X^k over the retained window, with a bound on the tail contribution.

    The bound is finite only when the analytic spec is attached and the
    order-k tail series converges (k < alpha-1); otherwise the error is
    reported as infinite rather than silently dropped.
    """
    if k < 0:
        raise ValidationError("moment order must be >= 0")
    t = p.support_values().astype(float)
    value = math.fsum(p.probs * t**k)
    if p.tail_mass == 0.0:
        return Moment(value, 0.0)
    if k == 0:
        return Moment(value, p.tail_mass)
    if p.spec is not None:
        err = p.spec.abs_moment_tail(
            k,
            t_right=p.support_max,
            t_left=abs(p.support_min) if p.support_min < 0 else None,
        )
        return Moment(value, err)
    return Moment(value, math.inf)


def tail_prob(p: LatticePmf, t: int) -> float:
    """P(X > t): retained mass above t plus the right tail.

    Exact whenever t >= offset-1 (always, for one-sided laws); for t below
    the retained window of a two-sided law the left tail is included whole,
    which is exact in the limit t -> -inf and an upper bound otherwise.
    """
    t = int(t)
    i = t - p.offset + 1
    if i <= 0:
        extra = p.tail_left if t < p.offset - 1 else 0.0
        return min(1.0, p.mass() + p.tail_right + extra)
    if i >= len(p.probs):
        return p.tail_right
    return float(np.sum(p.probs[i:])) + p.tail_right


def convolve(p: LatticePmf, q: LatticePmf, window=None) -> LatticePmf:
    """Exact distribution of the sum of independent p and q.

    Direct summation below the size threshold, FFT above; FFT negatives (all
    at roundoff scale) are clamped to zero.  Tail masses propagate by
    p.tail + q.tail - p.tail*q.tail, with the ambiguous cross terms
    (left tail of one times right tail of the other) split evenly between
    the two sides.  `window=(lo, hi)` drops mass outside [lo, hi] into the
    adjacent tails; for laws with nonnegative support the retained values
    stay exact because no path through the chopped region can return.
    """
    n_out = len(p.probs) + len(q.probs) - 1
    if n_out > MAX_SUPPORT:
        raise SupportOverflowError(f"convolution support {n_out} exceeds budget")
    if n_out < FFT_THRESHOLD:
        probs = np.convolve(p.probs, q.probs)
    else:
        from scipy.signal import fftconvolve

        probs = fftconvolve(p.probs, q.probs)
        probs = np.clip(probs, 0.0, None)
    offset = p.offset + q.offset

    pk = 1.0 - p.tail_mass
    qk = 1.0 - q.tail_mass
    cross = p.tail_left * q.tail_right + p.tail_right * q.tail_left
    tail_left = (
        p.tail_left * (q.tail_left + qk) + q.tail_left * pk + 0.5 * cross
    )
    tail_right = (
        p.tail_right * (q.tail_right + qk) + q.tail_right * pk + 0.5 * cross
    )

    label = f"{p.label}(+){q.label}"
    if len(label) > 120:
        label = label[:117] + "..."
    out = LatticePmf(
        offset=offset,
        probs=probs,
        tail_left=tail_left,
        tail_right=tail_right,
        label=label,
    )
    if window is not None:
        out = truncate_window(out, window[0], window[1])
    return out


def truncate_window(p: LatticePmf, lo, hi) -> LatticePmf:
    """Keep support within [lo, hi]; chopped mass moves to the matching tail."""
    lo = max(int(lo), p.offset)
    hi = min(int(hi), p.support_max)
    if hi < lo:
        raise ValidationError("window does not intersect the support")
    i0 = lo - p.offset
    i1 = hi - p.offset + 1
    cut_left = float(np.sum(p.probs[:i0]))
    cut_right = float(np.sum(p.probs[i1:]))
    return LatticePmf(
        offset=lo,
        probs=p.probs[i0:i1].copy(),
        tail_left=p.tail_left + cut_left,
        tail_right=p.tail_right + cut_right,
        label=p.label,
        spec=p.spec,
    )


def self_convolve(p: LatticePmf, n: int, window=None) -> LatticePmf:
    """Distribution of the n-fold sum via binary exponentiation; n=0 is delta_0."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    if n == 0:
        return LatticePmf.point(0, label=f"({p.label})^0")
    acc = None
    base = p
    m = n
    while True:
        if m & 1:
            acc = base if acc is None else convolve(acc, base, window=window)
        m >>= 1
        if m == 0:
            break
        base = convolve(base, base, window=window)
    out = LatticePmf(
        offset=acc.offset,
        probs=acc.probs,
        tail_left=acc.tail_left,
        tail_right=acc.tail_right,
        label=f"({p.label})^{n}",
    )
    return out


def alpha3_norming(a, b, n):
    """sqrt(0.5*(a+b)*n*ln n): the alpha=3 norming formula, real n allowed."""
    n = float(n)
    if n < 1.0:
        raise ValidationError("n must be >= 1")
    return math.sqrt(0.5 * (a + b) * n * math.log(n))


def norming_b(x, n: int) -> float:
    """Norming sequence b_n for sums of n copies.

    PowerLawSpec input: quantile inversion of the analytic two-sided tail for
    alpha < 3 (max{1, inf{x : P(|X|>x) < 1/n}}); the sqrt(0.5(a+b) n ln n)
    formula with the law's effective tail constants at alpha = 3; sigma*sqrt(n)
    for alpha > 3.  LatticePmf input uses the Gaussian branch with sigma from
    the retained moments (all moments finite on a finite window).
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if isinstance(x, PowerLawSpec):
        alpha = x.alpha
        if alpha < 3.0:
            return float(_quantile_norming(x, n))
        if alpha == 3.0:
            return alpha3_norming(x.effective_a, x.effective_b, n)
        sigma = math.sqrt(x.variance())
        return sigma * math.sqrt(n)
    if isinstance(x, LatticePmf):
        if x.spec is not None:
            return norming_b(x.spec, n)
        m1 = moment(x, 1)
        m2 = moment(x, 2)
        var = m2.value - m1.value**2
        if var <= 1e-15:
            raise DegenerateLawError("norming undefined for a point mass")
        return math.sqrt(var * n)
    raise ValidationError(f"unsupported input type {type(x)!r}")


def _quantile_norming(spec, n):
    thr = 1.0 / n
    if spec.abs_tail(1) < thr:
        return 1
    hi = 2
    while spec.abs_tail(hi) >= thr:
        hi *= 2
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if spec.abs_tail(mid) < thr:
            hi = mid
        else:
            lo = mid
    return hi
