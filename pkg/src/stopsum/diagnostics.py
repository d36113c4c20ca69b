"""Quantitative diagnostics for sums of heavy-tailed lattice variables.

Four families of checks, all built on exact windowed convolutions:

* local-limit errors: sup-norm distance between the scaled pmf of an n-fold
  sum and its limit density (stable, or Gaussian with the appropriate
  norming);
* renewal and window sums: partial sums of P(S_n = t) over n, exact, with
  any cut-off remainder bounded explicitly;
* a constant-free decomposition inequality splitting P(S_n = t) by the
  largest summand, where both sides are computed exactly;
* large-deviation bounds for P(S_n >= x, M_n < y) reported as both sides of
  the inequality without the unknown absolute constant.

Exact paths are pure; Monte Carlo paths take a seed and a declared worker
count and use counter-based substreams, so results do not depend on
scheduling or chunk sizes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .asym import StableLaw, stable_density_grid
from .errors import (
    BudgetError,
    DegenerateLawError,
    SpanError,
    SupportOverflowError,
    ValidationError,
)
from .lattice import (
    LatticePmf,
    PowerLawSpec,
    TruncationPolicy,
    alpha3_norming,
    build_power_law,
    convolve,
    moment,
    norming_b,
    self_convolve,
    truncate_window,
)

__all__ = [
    "BoundReport",
    "l_delta",
    "llt_error",
    "window_sum",
    "renewal_sum",
    "decomposition_bound",
    "large_dev_bound",
    "two_term_approx",
]

# cells allowed in a single exact convolution support
EXACT_CELL_BUDGET = 1 << 24
MC_DEFAULT_SAMPLES = 10**6
# uniform draws held in memory at once during Monte Carlo
_MC_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True)
class BoundReport:
    """Both sides of a probability inequality, with provenance.

    ``rhs_without_constant`` omits the absolute constant of the bound, so
    ``ratio`` is meaningful only up to that constant.  ``samples`` and
    ``half_width`` are zero for exact reports; Monte Carlo reports carry the
    sample count and a 95% confidence half-width.  ``conditions`` holds the
    applicability quantities of the specific bound variant.
    """

    lhs: float
    rhs_without_constant: float
    ratio: float
    method: str
    samples: int = 0
    half_width: float = 0.0
    conditions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("exact", "monte-carlo"):
            raise ValidationError(f"unknown method {self.method!r}")
        for name in ("lhs", "rhs_without_constant", "ratio", "half_width"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "samples", int(self.samples))
        clean = {}
        for k, v in self.conditions.items():
            if isinstance(v, np.floating):
                v = float(v)
            elif isinstance(v, np.integer):
                v = int(v)
            clean[k] = v
        object.__setattr__(self, "conditions", clean)
        if self.lhs < 0.0:
            raise ValidationError("lhs must be nonnegative")
        if self.method == "monte-carlo" and not self.half_width > 0.0:
            raise ValidationError("monte-carlo reports need a positive half-width")

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs_without_constant": self.rhs_without_constant,
            "ratio": self.ratio,
            "method": self.method,
            "samples": self.samples,
            "half_width": self.half_width,
            "conditions": dict(self.conditions),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _ratio(lhs, rhs):
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs == 0.0 else math.inf


def _phi(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _materialize(x, t_max):
    """A pmf of x whose retained values are exact through t_max."""
    if isinstance(x, PowerLawSpec):
        return build_power_law(x, TruncationPolicy(t_max=int(t_max)))
    if isinstance(x, LatticePmf):
        if x.tail_right > 0.0 and x.support_max < t_max:
            if x.spec is not None:
                return build_power_law(x.spec, TruncationPolicy(t_max=int(t_max)))
            raise ValidationError(
                f"pmf window ends at {x.support_max} with unresolved tail mass; "
                f"values through {t_max} are needed"
            )
        return x
    raise ValidationError(f"expected PowerLawSpec or LatticePmf, got {type(x)!r}")


def _span_of_differences(p):
    """gcd of support-point differences; 0 for a point mass."""
    vals = p.support_values()[p.probs > 0.0]
    if len(vals) <= 1:
        return 0
    return int(np.gcd.reduce(np.diff(vals)))


def _renewal_span(p):
    """gcd of the positive support points (renewal-theoretic span)."""
    if p.spec is not None:
        return 1
    vals = p.support_values()[p.probs > 0.0]
    vals = vals[vals > 0]
    if len(vals) == 0:
        return 0
    return int(np.gcd.reduce(vals))


def _exact_mean(p):
    if p.spec is not None:
        mu = p.spec.mean()
        if math.isinf(mu):
            raise ValidationError("mean diverges for this tail exponent")
        return float(mu)
    m = moment(p, 1)
    if not m.error < 1e-12:
        raise ValidationError("mean not exactly recoverable from the retained window")
    return m.value


# --------------------------------------------------------------------------
# local limit error


def llt_error(x, n, z_core=60.0):
    """Sup-norm local-limit error of the n-fold sum of x.

    Computes tau_n = sup_s |b_n P(S_n = s) - g((s - a_n)/b_n)| where g is the
    limit density matched to the tail exponent: the totally skewed stable
    density with index alpha-1 under quantile norming for alpha < 3, the
    standard normal under sqrt(0.5 (a+b) n ln n) norming at alpha = 3, and
    the standard normal under sigma sqrt(n) for alpha > 3 or for a plain
    finite pmf.  The sup is exact on a window around the bulk; outside it the
    difference is bounded by exact out-of-window maxima plus a union bound
    over the largest summand, widening the window until that bound is
    dominated.  alpha = 2 sits between the branches and is rejected.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if isinstance(x, LatticePmf) and x.spec is None:
        return _llt_finite(x, n)
    spec = x if isinstance(x, PowerLawSpec) else x.spec
    if not isinstance(spec, PowerLawSpec):
        raise ValidationError(f"expected PowerLawSpec or LatticePmf, got {type(x)!r}")
    alpha = spec.alpha
    if alpha == 2.0:
        raise ValidationError(
            "alpha = 2 has stable index 1, outside both density branches"
        )
    if alpha < 3.0:
        if spec.effective_b != 0.0:
            raise ValidationError(
                "stable branch needs a one-sided law; a two-sided limit is not "
                "totally skewed"
            )
        law = StableLaw(alpha - 1.0, alpha - 1.0)
        bn = float(norming_b(spec, n))
        an = n * spec.mean() if alpha > 2.0 else 0.0
        dens = lambda z: stable_density_grid(law, z)
        return _llt_windowed(spec, n, bn, an, dens, z_core)
    if alpha == 3.0:
        bn = alpha3_norming(spec.effective_a, spec.effective_b, n)
        an = n * spec.mean()
    else:
        bn = float(norming_b(spec, n))
        an = n * spec.mean()
    if spec.effective_b == 0.0:
        return _llt_windowed(spec, n, bn, an, _phi, z_core)
    return _llt_two_sided(spec, n, bn, an)


def _llt_finite(p, n):
    """Gaussian-branch error for a finite zero-tail pmf; fully exact."""
    if p.is_degenerate():
        raise DegenerateLawError("local limit error undefined for a point mass")
    if p.tail_mass > 0.0:
        raise ValidationError("finite pmf branch needs zero tail mass")
    span = _span_of_differences(p)
    if span != 1:
        raise SpanError(f"lattice span {span} != 1")
    bn = float(norming_b(p, n))
    an = n * moment(p, 1).value
    cells = n * (len(p.probs) - 1) + 1
    if cells > EXACT_CELL_BUDGET:
        raise SupportOverflowError(f"exact convolution needs {cells} cells")
    conv = self_convolve(p, n)
    z = (conv.support_values() - an) / bn
    g = _phi(z)
    tau = float(np.max(np.abs(bn * conv.probs - g)))
    # beyond the support the pmf is zero and the density keeps falling
    return max(tau, float(g[0]), float(g[-1]))


def _llt_windowed(spec, n, bn, an, dens, z_core):
    """One-sided laws: exact values on [0, wtop], certified bound beyond.

    Past the window, P(S_n = s) <= n max_{i >= s/n} P(X_1 = i) because the
    largest summand must carry at least s/n; the window is widened until
    that bound (and the density at the edge) is dominated by the in-window
    sup.
    """
    core_top = int(an + z_core * bn) + 16
    wtop = core_top
    for _ in range(24):
        q = math.ceil((wtop + 1.0) / n)
        if bn * n * spec.pmf_value(q) <= 1e-4 * max(1.0, bn) or wtop * 4 > EXACT_CELL_BUDGET:
            break
        wtop *= 2
    while True:
        if wtop > EXACT_CELL_BUDGET:
            raise BudgetError(
                f"out-of-window certification needs more than {EXACT_CELL_BUDGET} "
                f"cells at n={n}"
            )
        xm = build_power_law(spec, TruncationPolicy(t_max=wtop))
        conv = self_convolve(xm, n, window=(0, wtop))
        top = min(core_top, conv.support_max)
        s = np.arange(0, top + 1)
        bp = np.zeros(top + 1)
        bp[conv.offset :] = bn * conv.probs[: top + 1 - conv.offset]
        g = dens((s - an) / bn)
        tau_core = float(np.max(np.abs(bp - g)))
        n_core = top + 1 - conv.offset
        guard = bn * float(conv.probs[n_core:].max(initial=0.0))
        g_right = float(g[-1])
        # below s = 0 the pmf is zero and the density only falls further left
        g_neg = float(dens(np.array([(-1.0 - an) / bn]))[0])
        beyond = bn * n * spec.pmf_value(math.ceil((wtop + 1.0) / n))
        outside = max(guard, g_right, g_neg, beyond)
        if outside <= max(0.5 * tau_core, 1e-9):
            return max(tau_core, outside)
        wtop *= 4


def _llt_two_sided(spec, n, bn, an):
    """Two-sided laws: full-support convolution of a truncated law.

    Window truncation is not exact here (mass can leave and re-enter), so
    the whole support is kept and the reported value carries the bound
    n * tail_mass on the per-point truncation error, widening the summand
    window until that slop is dominated.
    """
    W = 4096
    while True:
        cells = n * 2 * W + 1
        if cells > EXACT_CELL_BUDGET:
            raise BudgetError(f"two-sided exact convolution needs {cells} cells")
        xm = build_power_law(spec, TruncationPolicy(t_max=W))
        conv = self_convolve(xm, n)
        z = (conv.support_values() - an) / bn
        g = _phi(z)
        tau_in = float(np.max(np.abs(bn * conv.probs - g)))
        slop = bn * (1.0 - (1.0 - xm.tail_mass) ** n)
        edge = max(float(g[0]), float(g[-1]))
        if slop + edge <= 0.05 * tau_in:
            return tau_in + slop + edge
        W *= 2


# --------------------------------------------------------------------------
# window and renewal sums


def window_sum(x, t, u):
    """Exact sum of P(S_n = t) over all n with |n mu - t| <= u.

    The summand law must be nonnegative; values of S_n at t then stay exact
    under the computation window [0, t] because overshooting paths cannot
    return.
    """
    t = int(t)
    if t < 0:
        raise ValidationError("t must be >= 0")
    if not u >= 0.0:
        raise ValidationError("u must be >= 0")
    xm = _materialize(x, t)
    if xm.offset < 0:
        raise ValidationError("window sums support nonnegative laws only")
    mu = _exact_mean(xm)
    if not mu > 0.0:
        raise ValidationError("window sums need mu > 0")
    n_lo = max(1, math.ceil((t - u) / mu))
    n_hi = math.floor((t + u) / mu)
    if n_hi < n_lo:
        raise ValidationError(f"no summand count n satisfies |n*mu - {t}| <= {u}")
    if xm.offset >= 1:
        n_hi = min(n_hi, t // xm.offset)
    if n_hi < n_lo:
        return 0.0
    xw = truncate_window(xm, xm.offset, t) if xm.support_max > t else xm
    cur = self_convolve(xw, n_lo, window=(0, t))
    total = cur.at(t)
    for _ in range(n_lo + 1, n_hi + 1):
        cur = convolve(cur, xw, window=(0, t))
        total += cur.at(t)
    return float(total)


def renewal_sum(x, t, n_max=None, with_remainder=False):
    """Sum over n >= 1 of P(S_n = t), the renewal mass at t.

    Exact termination at n = t//offset when the law lives on {1, 2, ...}.
    Otherwise the series stops once n*mu clears t by 20 norming units and 50
    consecutive increments fall below 1e-14; the cut tail is then bounded by
    an exponential-moment bound (geometric in n) and returned alongside the
    sum when ``with_remainder`` is set, never silently dropped.
    """
    t = int(t)
    if t < 0:
        raise ValidationError("t must be >= 0")
    if n_max is not None and n_max < 1:
        raise ValidationError("n_max must be >= 1")
    xm = _materialize(x, t)
    if xm.offset < 0:
        raise ValidationError("renewal sums support nonnegative laws only")
    span = _renewal_span(xm)
    if span == 0:
        raise DegenerateLawError("renewal sum needs mass above 0")
    if span != 1:
        raise SpanError(f"lattice span {span} != 1")
    mu = _exact_mean(xm)
    if not mu > 0.0:
        raise ValidationError("renewal sums need mu > 0")
    if xm.offset > t or (xm.offset >= 1 and t == 0):
        return (0.0, 0.0) if with_remainder else 0.0
    xw = truncate_window(xm, xm.offset, t) if xm.support_max > t else xm
    total = 0.0
    remainder = 0.0
    cur = None
    small_run = 0
    n = 0
    while True:
        n += 1
        cur = xw if cur is None else convolve(cur, xw, window=(0, max(t, xw.offset)))
        inc = cur.at(t)
        total += inc
        if xm.offset >= 1 and (n + 1) * xm.offset > t:
            break
        small_run = small_run + 1 if inc < 1e-14 else 0
        if n_max is not None and n >= n_max:
            remainder = _geometric_remainder(xw, t, n)
            break
        if small_run >= 50 and n * mu > t + 20.0 * _norming_or_zero(xm, n):
            remainder = _geometric_remainder(xw, t, n)
            break
    if with_remainder:
        return float(total), float(remainder)
    return float(total)


def _norming_or_zero(p, n):
    try:
        return float(norming_b(p, n))
    except DegenerateLawError:
        return 0.0


def _geometric_remainder(xw, t, n_stop):
    """Bound on sum_{n > n_stop} P(S_n = t) from E e^{-theta S_n} = M(theta)^n.

    P(S_n = t) <= e^{theta t} M(theta)^n for every theta > 0; summing the
    geometric series and minimizing over a fixed theta grid gives a
    deterministic, fully rigorous remainder.  Tail mass of xw sits above its
    window top and is bounded by e^{-theta (top+1)} per unit.
    """
    vals = xw.support_values().astype(float)
    top = xw.support_max
    best = math.inf
    for th in np.geomspace(1e-4, 30.0, 80):
        m_th = float(np.dot(xw.probs, np.exp(-th * vals)))
        m_th += xw.tail_mass * math.exp(-th * (top + 1))
        if m_th >= 1.0:
            continue
        log_bound = th * t + (n_stop + 1) * math.log(m_th) - math.log1p(-m_th)
        if log_bound < 700.0:
            best = min(best, math.exp(log_bound))
    return best


# --------------------------------------------------------------------------
# decomposition inequality


def decomposition_bound(x, n, t, delta):
    """Exact both sides of the largest-summand decomposition inequality.

    lhs = P(S_n = t).  rhs = n max_{i >= delta t} P(X_1 = i) + Q1 L2 + Q2 L1,
    where the sum splits into halves of floor(n/2) and n - floor(n/2)
    summands, Qk is the sup of the k-th half-sum pmf and Lk(t, delta) the
    probability that the k-th half-sum reaches t/2 with every summand below
    delta t.  Constant-free: lhs <= rhs must hold exactly.
    """
    n = int(n)
    t = int(t)
    if n < 2 or t < 2:
        raise ValidationError("decomposition needs n >= 2 and t >= 2")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    xm = _materialize(x, t)
    if xm.offset < 0 and xm.tail_mass > 0.0:
        raise ValidationError(
            "negative support with unresolved tails cannot be convolved exactly"
        )
    cells = n * (len(xm.probs) - 1) + 1
    if cells > EXACT_CELL_BUDGET:
        raise SupportOverflowError(f"exact decomposition needs {cells} cells")

    direct = n * _sup_pmf_from(xm, math.ceil(delta * t))

    n1 = n // 2
    n2 = n - n1
    idl = math.ceil(delta * t) - 1  # i < delta t for integer i
    xtr = None
    if idl >= xm.offset:
        tr = truncate_window(xm, xm.offset, min(idl, xm.support_max))
        xtr = LatticePmf(offset=tr.offset, probs=tr.probs.copy(), label=tr.label)
    j0 = math.ceil(t / 2.0)
    halves = []
    for k in (n1, n2):
        conv_k = self_convolve(xm, k)
        q_k = float(conv_k.probs.max())
        if conv_k.tail_mass > q_k:
            raise BudgetError("half-sum sup not certifiable: tail mass exceeds it")
        if xtr is None:
            l_k = 0.0
        else:
            z = self_convolve(xtr, k)
            l_k = float(z.probs[max(0, j0 - z.offset) :].sum())
        halves.append((q_k, l_k))
    (q1, l1), (q2, l2) = halves
    rhs = direct + q1 * l2 + q2 * l1

    if xm.offset > 0 and t < n * xm.offset:
        lhs = 0.0  # every summand is >= offset, so S_n cannot reach t
    else:
        full = self_convolve(xm, n, window=(0, t) if xm.offset >= 0 else None)
        lhs = float(full.at(t))
    return BoundReport(
        lhs=lhs,
        rhs_without_constant=rhs,
        ratio=_ratio(lhs, rhs),
        method="exact",
        conditions={
            "direct_term": direct,
            "q1": q1,
            "l1": l1,
            "q2": q2,
            "l2": l2,
            "delta": delta,
        },
    )


def _sup_pmf_from(p, i0):
    """Exact sup of P(X = i) over integer i >= i0."""
    vals = p.probs[max(0, i0 - p.offset) :]
    sup = float(vals.max()) if len(vals) else 0.0
    if p.tail_right > 0.0:
        if p.spec is None:
            raise ValidationError(
                "sup over the unresolved right tail needs an analytic spec"
            )
        j0 = max(i0, p.support_max + 1)
        # past ln(j+e) > rho/alpha the analytic pmf is monotone decreasing;
        # rho <= 3 and alpha > 1 make j = 21 a safe scan horizon
        scan_hi = max(j0 + 1, 22)
        sup = max(sup, max(p.spec.pmf_value(j) for j in range(j0, scan_hi)))
    return sup


# --------------------------------------------------------------------------
# large deviation bounds


def large_dev_bound(
    variant,
    x,
    n,
    x_threshold,
    y_threshold,
    r=None,
    method="auto",
    samples=MC_DEFAULT_SAMPLES,
    seed=0,
    workers=1,
    beta=1.0,
):
    """Both sides of P(S_n >= x, M_n < y) <= c (n y^{1-alpha} L1(y))^{x/y}.

    The rhs is reported without the unknown constant c.  The variant selects
    the tail-exponent regime and which applicability quantities go into the
    report: 'i' for 1 < alpha < 2; 'ii' for alpha = 2 (reports L_Delta(y)
    and the n P(X>=y) L_Delta^{1+beta} condition); 'iii' for centered laws
    with 2 < alpha < 3; 'iv' for alpha = 3 (reports Pi(x), V, W).  The lhs
    restricts every summand below y, so it is the mass at >= x of the n-fold
    convolution of the below-y restriction: exact when the support budget
    allows, otherwise inverse-CDF Monte Carlo with counter-based substreams.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n must be >= 1")
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    xthr = float(x_threshold)
    ythr = float(y_threshold)

    if isinstance(x, LatticePmf) and x.spec is None:
        # degenerate short-circuit for finite laws: nothing above y and no
        # real threshold on the sum
        if xthr <= 0.0 and x.tail_right == 0.0 and x.support_max < ythr:
            return BoundReport(
                lhs=1.0,
                rhs_without_constant=math.inf,
                ratio=0.0,
                method="exact",
                conditions={"degenerate": True},
            )
        raise ValidationError("large deviation bounds need an analytic spec")
    spec = x if isinstance(x, PowerLawSpec) else x.spec
    if not isinstance(spec, PowerLawSpec):
        raise ValidationError(f"expected PowerLawSpec or LatticePmf, got {type(x)!r}")

    if not (xthr >= ythr > 0.0):
        raise ValidationError("need x >= y > 0")
    if r is not None and xthr / ythr > r:
        raise ValidationError(f"x/y = {xthr / ythr:.3g} exceeds declared r = {r}")

    alpha = spec.alpha
    conditions = {"x_over_y": xthr / ythr}
    if variant == "i":
        if not 1.0 < alpha < 2.0:
            raise ValidationError("variant i needs 1 < alpha < 2")
    elif variant == "ii":
        if alpha != 2.0:
            raise ValidationError("variant ii needs alpha = 2")
        ld = l_delta(spec, ythr)
        p_geq_y = spec.tail_value(math.ceil(ythr) - 1)
        conditions.update(
            l_delta=ld,
            beta=beta,
            condition_value=n * p_geq_y * ld ** (1.0 + beta),
        )
    elif variant == "iii":
        if not 2.0 <= alpha < 3.0:
            raise ValidationError("variant iii needs 2 <= alpha < 3")
        if alpha == 2.0:
            raise ValidationError(
                "left tail of the lattice family decays like 1/t at alpha = 2, "
                "too slow for the centered variant"
            )
        mu = spec.mean()
        if abs(mu) > 1e-12:
            raise ValidationError("variant iii needs mean zero")
        conditions["mean"] = mu
    elif variant == "iv":
        if alpha != 3.0:
            raise ValidationError("variant iv needs alpha = 3")
        mu = spec.mean()
        if abs(mu) > 1e-12:
            raise ValidationError("variant iv needs mean zero")
        conditions.update(_alpha3_conditions(spec, n, xthr, ythr))
    else:
        raise ValidationError(f"unknown variant {variant!r}")

    rhs = (n * ythr ** (1.0 - alpha) * spec.L1(ythr)) ** (xthr / ythr)

    iy = math.ceil(ythr) - 1
    if iy < _spec_min_support(spec):
        # every summand is >= y, so the maximum restriction is impossible
        return BoundReport(
            lhs=0.0,
            rhs_without_constant=rhs,
            ratio=0.0,
            method="exact",
            conditions=conditions,
        )
    xm = _materialize(x if isinstance(x, LatticePmf) else spec, iy)
    tr = truncate_window(xm, xm.offset, min(iy, xm.support_max))
    if tr.offset < 0:
        # the left window also truncates; its missing mass biases the lhs
        below_lo = 1.0 - spec.tail_value(tr.offset - 1)
        conditions["left_truncation_bias"] = min(1.0, n * below_lo)
    xtr = LatticePmf(offset=tr.offset, probs=tr.probs.copy(), label=tr.label)

    cells = n * (len(xtr.probs) - 1) + 1
    if method == "auto":
        method = "exact" if cells <= EXACT_CELL_BUDGET else "monte-carlo"
    if method == "exact":
        if cells > EXACT_CELL_BUDGET:
            raise SupportOverflowError(f"exact path needs {cells} cells")
        z = self_convolve(xtr, n)
        j0 = math.ceil(xthr)
        lhs = float(z.probs[max(0, j0 - z.offset) :].sum())
        return BoundReport(
            lhs=lhs,
            rhs_without_constant=rhs,
            ratio=_ratio(lhs, rhs),
            method="exact",
            conditions=conditions,
        )
    if method != "monte-carlo":
        raise ValidationError(f"unknown method {method!r}")
    lhs, hw = _mc_restricted_tail(xtr, n, xthr, samples, seed, workers)
    conditions.update(seed=seed, workers=workers)
    return BoundReport(
        lhs=lhs,
        rhs_without_constant=rhs,
        ratio=_ratio(lhs, rhs),
        method="monte-carlo",
        samples=samples,
        half_width=hw,
        conditions=conditions,
    )


def _spec_min_support(spec):
    if spec.effective_b > 0.0:
        return -(1 << 62)
    return 0 if spec.p0 > 0.0 else 1


def l_delta(spec, y):
    """Integrated-tail ratio: int_0^y P(X >= u) du / (y P(X >= y)).

    P(X >= u) is constant on (k-1, k], so the integral up to floor(y) is
    sum_{k<=m} P(X >= k), which equals the partial expectation
    sum_{t<=m} t P(X=t) + m P(X > m).
    """
    if not y >= 1.0:
        raise ValidationError("need y >= 1")
    m = math.floor(y)
    ts = np.arange(1, m + 1, dtype=float)
    pmf = spec.effective_a * ts ** (-spec.alpha) * spec.sv(ts)
    head = float(np.dot(ts, pmf)) + m * spec.tail_value(m)
    head += (y - m) * spec.tail_value(m)
    return float(head / (y * spec.tail_value(math.ceil(y) - 1)))


def _alpha3_conditions(spec, n, xthr, ythr):
    """Condition quantities for the alpha = 3 variant.

    c_star is the smallest constant with P(X >= t) <= c_star t^{-2} L1(t)
    for t >= 1, found by scanning (the ratio peaks at small t and decays to
    1/(alpha-1)).  V and W switch on whether t^{-1} L1(t) is integrable at
    infinity, i.e. on rho < -1; their integrals start at 1 because the
    integrand is not integrable at the origin for this family.
    """
    from scipy import integrate

    ts = np.unique(
        np.concatenate(
            [np.arange(1, 65), np.geomspace(64.0, 1e4, 48).astype(int)]
        )
    )
    c_star = max(
        spec.tail_value(int(t) - 1) * float(t) ** 2.0 / spec.L1(float(t)) for t in ts
    )
    pi_x = n * c_star * xthr**-2.0 * spec.L1(xthr)
    if pi_x > 0.0 and abs(math.log(pi_x)) > 0.0:
        u = ythr / abs(math.log(pi_x))
    else:
        u = math.inf
    integrable = spec.rho < -1.0
    if not math.isfinite(u):
        v_u = w_u = 0.0
    elif integrable:
        v_u = u**-2.0
        w_u = u**-2.0
    else:
        l1 = lambda s: spec.L1(s)
        i1, _ = integrate.quad(lambda s: l1(s) / s, 1.0, max(u, 1.0))
        v_u = u**-2.0 * i1
        inner = lambda s: integrate.quad(lambda v: l1(v) / v**2, s, math.inf)[0]
        i2, _ = integrate.quad(inner, 1.0, max(u, 1.0), limit=200)
        w_u = u**-2.0 * spec.L1(u) * i2
    return {
        "c_star": c_star,
        "pi_x": pi_x,
        "u": u,
        "V": v_u,
        "W": w_u,
        "condition_value": n * (v_u + w_u),
    }


def _mc_restricted_tail(xtr, n, xthr, samples, seed, workers):
    """Monte Carlo of P(sum of n below-y draws >= x), defective-law scaled.

    Block b of the sample budget uses the Philox stream keyed (seed, b), so
    the result depends only on (seed, workers, samples).
    """
    keep = float(xtr.probs.sum())
    if keep <= 0.0:
        return 0.0, 3.0 / samples
    cdf = np.cumsum(xtr.probs) / keep
    vals = xtr.offset + np.arange(len(xtr.probs))
    per_block = [samples // workers] * workers
    per_block[-1] += samples - sum(per_block)
    hits = 0
    rows = max(1, _MC_CHUNK_CELLS // max(n, 1))
    for b, m_b in enumerate(per_block):
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, b], dtype=np.uint64))
        )
        done = 0
        while done < m_b:
            m = min(rows, m_b - done)
            u = rng.random((m, n))
            s = vals[np.searchsorted(cdf, u)].sum(axis=1)
            hits += int(np.count_nonzero(s >= xthr))
            done += m
    p_hat = hits / samples
    lhs = keep**n * p_hat
    if hits == 0:
        half = keep**n * 3.0 / samples
    else:
        half = 1.96 * keep**n * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return lhs, half


# --------------------------------------------------------------------------
# two-term tail approximation


def two_term_approx(x, n, t):
    """Gaussian center plus single-jump tail for P(S_n - floor(n mu) = t).

    Valid for tail exponents above 3 (finite variance) and t at least
    sqrt(n): the first term is the local CLT density, the second the
    contribution of one summand carrying the whole excess.
    """
    n = int(n)
    t = int(t)
    if n < 1:
        raise ValidationError("n must be >= 1")
    if isinstance(x, LatticePmf) and x.is_degenerate():
        raise DegenerateLawError("sigma = 0: no Gaussian scale")
    spec = x if isinstance(x, PowerLawSpec) else getattr(x, "spec", None)
    if not isinstance(spec, PowerLawSpec):
        raise ValidationError("two-term approximation needs an analytic spec")
    if not spec.alpha > 3.0:
        raise ValidationError("two-term approximation needs alpha > 3")
    if t < math.sqrt(n):
        raise ValidationError(f"t = {t} below sqrt(n) = {math.sqrt(n):.3g}")
    mu = spec.mean()
    var = spec.variance()
    if not var > 0.0:
        raise DegenerateLawError("sigma = 0: no Gaussian scale")
    gauss = math.exp(-t * t / (2.0 * n * var)) / math.sqrt(2.0 * math.pi * n * var)
    jump = n * (spec.alpha - 1.0) * spec.tail_value(math.floor(t + mu)) / t
    return gauss + jump
