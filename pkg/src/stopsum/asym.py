"""Regime selection and first-order asymptotic predictors for stopped sums.

The decision table maps tail exponents (alpha for the summand, gamma for the
stopping variable when it is power-law), the sign of the summand mean, and a
set of user-asserted side conditions to the applicable limit statement and its
predictor.  Four predictor shapes cover every row:

    single-big-jump     P(S_N = t) ~ E N * P(X_1 = t)
    stopping-dominates  P(S_N = t) ~ (1/mu) * P(N = floor(t/mu))
    combined            the sum of the two terms above
    subcritical-stable  both indices below 2; stable-law fractional moment

Conditions that cannot be decided from finite data (moment bounds, tail
regularity) are asserted by the caller as flags; `auto_flags` derives the
ones our parametric laws provably satisfy.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    BudgetError,
    DivergentMomentError,
    QuadratureError,
    ValidationError,
)
from .lattice import LatticePmf, PowerLawSpec

# user-assertable side conditions, named by what they grant
FLAGS = {
    "EN_finite": "the stopping variable has a finite mean",
    "EN_log_moment": "E[N log N] is finite",
    "left_tail_O": "E[X^2 1{X < -t}] = O(1/log t): left tail of X negligible at second order",
    "left_tail_limit": "E[X^2 1{X < -t}] has a (finite) limit as t grows",
    "N_small_vs_X": "the tail of N is o() of the tail of X",
    "N_tail_small": "the tail of N is small against the combined norming scale",
    "XI_25_1": "the slowly varying factor of X is stable when its argument is rescaled by a power of itself",
    "N_moment_1+tau": "E[N^{1+tau}] finite for some tau > 0",
    "N_moment_1+alpha": "E[N^{1+alpha}] finite",
    "N_regularity": "the pmf of N is regularly varying with a locally uniform ratio",
    "X_small_vs_N": "the tail of X is o() of the tail of N",
    "alpha3_remainder": "alpha = 3 model with relative pmf error O((loglog t)^{-1-eps})",
    "x_nonneg": "the summand is nonnegative with probability one",
    "X_L1_const": "the slowly varying pmf factor of X converges to a constant",
}

_MU_SIGNS = ("negative", "zero", "positive")

PREDICTORS = (
    "single-big-jump",
    "stopping-dominates",
    "combined",
    "subcritical-stable",
)


@dataclass(frozen=True)
class RegimeInput:
    """Inputs to the decision table.

    gamma is None when the stopping variable is not modeled as a power law;
    rows that compare gamma then report it as a missing condition.
    """

    alpha: float
    gamma: float | None = None
    mu_sign: str = "positive"
    flags: frozenset = frozenset()

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValidationError("alpha must exceed 1")
        if self.gamma is not None and not self.gamma > 1.0:
            raise ValidationError("gamma must exceed 1 when present")
        if self.mu_sign not in _MU_SIGNS:
            raise ValidationError(f"mu_sign must be one of {_MU_SIGNS}")
        object.__setattr__(self, "flags", frozenset(self.flags))
        unknown = sorted(self.flags - set(FLAGS))
        if unknown:
            raise ValidationError(
                f"unknown flags {unknown}; known flags: {sorted(FLAGS)}"
            )


@dataclass(frozen=True)
class RegimeReport:
    """Outcome of select_regime.

    theorem/predictor/quote describe the primary (first, weakest-condition)
    matching row; alternates lists every other matching row; unmet lists, for
    each non-matching row, the conditions that failed.  An empty report
    (theorem None) still carries the full unmet breakdown.
    """

    theorem: str | None
    predictor: str | None
    quote: str | None
    unmet: tuple = ()
    alternates: tuple = ()

    @property
    def empty(self):
        return self.predictor is None

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "predictor": self.predictor,
            "quote": self.quote,
            "alternates": [dict(a) for a in self.alternates],
            "unmet": [
                {"theorem": tag, "missing": list(miss)} for tag, miss in self.unmet
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _flag(name):
    return (name, lambda r: name in r.flags)


def _flag_if_mu(name, sign):
    label = f"{name} (when mu {sign})"
    return (label, lambda r: r.mu_sign != sign or name in r.flags)


def _mu(sign):
    return (f"mu {sign}", lambda r: r.mu_sign == sign)


def _mu_not(sign):
    return (f"mu not {sign}", lambda r: r.mu_sign != sign)


def _alpha(lo=None, hi=None, lo_eq=None, eq=None):
    if eq is not None:
        return (f"alpha = {eq}", lambda r: r.alpha == eq)
    if lo is not None and hi is not None:
        return (f"{lo} < alpha < {hi}", lambda r: lo < r.alpha < hi)
    if lo is not None:
        return (f"alpha > {lo}", lambda r: r.alpha > lo)
    if lo_eq is not None:
        return (f"alpha >= {lo_eq}", lambda r: r.alpha >= lo_eq)
    return (f"alpha < {hi}", lambda r: r.alpha < hi)


def _gamma(pred, label):
    return (label, lambda r: r.gamma is not None and pred(r.gamma, r.alpha))


_GAMMA_PRESENT = ("power-law N (gamma present)", lambda r: r.gamma is not None)
_EN_OR_GAMMA = (
    "EN_finite or power-law N",
    lambda r: "EN_finite" in r.flags or r.gamma is not None,
)


@dataclass(frozen=True)
class _Row:
    tag: str
    predictor: str
    quote: str
    needs: tuple


# Decision table, strongest statements first, weaker conditions before
# stronger within a group; the first matching row is the primary report.
RULES = (
    _Row(
        "Theorem 1(i)",
        "single-big-jump",
        "For γ>α and γ>2 we have",
        (
            _flag("x_nonneg"),
            _gamma(lambda g, a: g > a, "gamma > alpha"),
            _gamma(lambda g, a: g > 2, "gamma > 2"),
        ),
    ),
    _Row(
        "Theorem 1(ii)",
        "stopping-dominates",
        "For α>γ and α>2 we have",
        (
            _flag("x_nonneg"),
            _gamma(lambda g, a: a > g, "alpha > gamma"),
            _alpha(lo=2),
            _mu("positive"),
        ),
    ),
    _Row(
        "Theorem 1(iii)",
        "combined",
        "For α>2, γ≥2 and E N<∞",
        (
            _flag("x_nonneg"),
            _alpha(lo=2),
            _gamma(lambda g, a: g >= 2, "gamma >= 2"),
            _flag("EN_finite"),
        ),
    ),
    _Row(
        "Theorem 1(iv)",
        "subcritical-stable",
        "For α,γ<2 conditions",
        (
            _alpha(hi=2),
            _gamma(lambda g, a: g < 2, "gamma < 2"),
        ),
    ),
    _Row(
        "Theorem 2(i)",
        "single-big-jump",
        "Suppose that E N<∞",
        (
            _alpha(hi=2),
            _flag("EN_finite"),
            _flag("X_L1_const"),
        ),
    ),
    _Row(
        "Theorem 2(ii)",
        "single-big-jump",
        "Suppose that E N<∞",
        (
            _alpha(eq=2.0),
            _flag("EN_finite"),
            _flag("X_L1_const"),
            _flag("EN_log_moment"),
        ),
    ),
    _Row(
        "Theorem 2(iii)",
        "single-big-jump",
        "Suppose that E N<∞",
        (
            _alpha(lo=2, hi=3),
            _flag("EN_finite"),
            _flag("X_L1_const"),
            _flag("left_tail_O"),
            _flag_if_mu("N_small_vs_X", "positive"),
        ),
    ),
    _Row(
        "Theorem 2(iv)",
        "single-big-jump",
        "Suppose that E N<∞",
        (
            _alpha(eq=3.0),
            _flag("EN_finite"),
            _flag("X_L1_const"),
            _flag("left_tail_O"),
            _mu_not("negative"),
            _flag_if_mu("N_small_vs_X", "positive"),
            _flag_if_mu("EN_log_moment", "zero"),
        ),
    ),
    _Row(
        "Theorem 2(v)",
        "single-big-jump",
        "Suppose that E N<∞",
        (
            _alpha(lo=3),
            _flag("EN_finite"),
            _flag("left_tail_O"),
            _flag_if_mu("N_small_vs_X", "positive"),
            _flag_if_mu("N_tail_small", "zero"),
        ),
    ),
    _Row(
        "Theorem 3",
        "single-big-jump",
        "Assume that E N^{1+τ}<∞ for some τ>0.",
        (
            ("1 < alpha <= 3", lambda r: 1.0 < r.alpha <= 3.0),
            _flag("N_moment_1+tau"),
            (
                "left_tail_O (when 2 < alpha <= 3)",
                lambda r: not 2.0 < r.alpha <= 3.0 or "left_tail_O" in r.flags,
            ),
            (
                "N_small_vs_X (when mu positive and 2 < alpha <= 3)",
                lambda r: not (r.mu_sign == "positive" and 2.0 < r.alpha <= 3.0)
                or "N_small_vs_X" in r.flags,
            ),
        ),
    ),
    _Row(
        "Theorem 4",
        "single-big-jump",
        "Let 2<α<3. Suppose that μ>0.",
        (
            _alpha(lo=2, hi=3),
            _mu("positive"),
            _flag("XI_25_1"),
            _flag("left_tail_O"),
            _flag("N_small_vs_X"),
        ),
    ),
    _Row(
        "Theorem 5",
        "single-big-jump",
        "If E N^{1+α}<∞ then",
        (
            _flag("N_moment_1+alpha"),
            _flag("X_L1_const"),
        ),
    ),
    _Row(
        "Theorem 5",
        "single-big-jump",
        "If E N^{1+α}<∞ then",
        (
            _flag("XI_25_1"),
            _gamma(lambda g, a: g > 2 + a, "gamma > 2 + alpha"),
        ),
    ),
    _Row(
        "Proposition 1(ii)",
        "single-big-jump",
        "Suppose that E N<∞. Then",
        (
            _alpha(eq=3.0),
            _mu("positive"),
            _flag("alpha3_remainder"),
            _flag("EN_finite"),
            _flag("N_small_vs_X"),
        ),
    ),
    _Row(
        "Proposition 1(i)",
        "combined",
        "Let α=3. Assume that μ>0 and",
        (
            _alpha(eq=3.0),
            _mu("positive"),
            _flag("alpha3_remainder"),
            _flag("N_regularity"),
            _flag("EN_finite"),
        ),
    ),
    _Row(
        "Proposition 1(i)",
        "stopping-dominates",
        "Let α=3. Assume that μ>0 and",
        (
            _alpha(eq=3.0),
            _mu("positive"),
            _flag("alpha3_remainder"),
            _flag("N_regularity"),
            _flag("X_small_vs_N"),
            _EN_OR_GAMMA,
        ),
    ),
    _Row(
        "mixed(i)",
        "combined",
        "Let α>2. Suppose that μ>0 and",
        (
            _alpha(lo=2, hi=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("X_L1_const"),
            _flag("left_tail_limit"),
            _flag("EN_finite"),
        ),
    ),
    _Row(
        "mixed(i)",
        "stopping-dominates",
        "Let α>2. Suppose that μ>0 and",
        (
            _alpha(lo=2, hi=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("X_L1_const"),
            _flag("left_tail_limit"),
            _flag("X_small_vs_N"),
            _EN_OR_GAMMA,
        ),
    ),
    _Row(
        "mixed(ii)",
        "combined",
        "Let α>2. Suppose that μ>0 and",
        (
            _alpha(lo=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("left_tail_O"),
            _flag("EN_finite"),
        ),
    ),
    _Row(
        "mixed(ii)",
        "stopping-dominates",
        "Let α>2. Suppose that μ>0 and",
        (
            _alpha(lo=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("left_tail_O"),
            _flag("X_small_vs_N"),
            _EN_OR_GAMMA,
        ),
    ),
    _Row(
        "mixed-sv",
        "combined",
        "Suppose that μ>0 and",
        (
            _alpha(lo=2, hi=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("XI_25_1"),
            _flag("left_tail_limit"),
            _flag("EN_finite"),
        ),
    ),
    _Row(
        "mixed-sv",
        "stopping-dominates",
        "Suppose that μ>0 and",
        (
            _alpha(lo=2, hi=3),
            _mu("positive"),
            _flag("N_regularity"),
            _flag("XI_25_1"),
            _flag("left_tail_limit"),
            _flag("X_small_vs_N"),
            _EN_OR_GAMMA,
        ),
    ),
)


def select_regime(inp: RegimeInput) -> RegimeReport:
    """Walk the decision table and report the primary match plus alternates.

    Pure table lookup: the first row whose every condition holds wins; all
    other matching rows are listed as alternates, and every non-matching row
    contributes its list of failed conditions to `unmet`.
    """
    matches = []
    unmet = []
    seen = set()
    for row in RULES:
        missing = [label for label, ok in row.needs if not ok(inp)]
        if missing:
            unmet.append((row.tag, tuple(missing)))
        else:
            key = (row.tag, row.predictor)
            if key not in seen:
                seen.add(key)
                matches.append(row)
    if not matches:
        return RegimeReport(None, None, None, unmet=tuple(unmet))
    primary, rest = matches[0], matches[1:]
    alternates = tuple(
        (("theorem", r.tag), ("predictor", r.predictor), ("quote", r.quote))
        for r in rest
    )
    return RegimeReport(
        theorem=primary.tag,
        predictor=primary.predictor,
        quote=primary.quote,
        unmet=tuple(unmet),
        alternates=alternates,
    )


def auto_flags(x, n=None, include_mu=True):
    """Flags our parametric laws provably satisfy, derivable from exponents.

    x is the summand law spec; n (optional) the stopping law spec.  Works on
    PowerLawSpec directly or a LatticePmf carrying one.  Moment flags for N
    follow from gamma; comparison flags need both exponents.
    """
    xs = x.spec if isinstance(x, LatticePmf) else x
    ns = n.spec if isinstance(n, LatticePmf) else n
    if not isinstance(xs, PowerLawSpec):
        raise ValidationError("auto_flags needs the analytic law of X")
    out = {"XI_25_1"}
    if xs.rho == 0.0:
        out.add("X_L1_const")
    nonneg = xs.side == "one-sided"
    if nonneg:
        out.add("x_nonneg")
    if nonneg or xs.alpha > 3.0:
        # E X^2 1{X < -t} vanishes identically or decays polynomially
        out.add("left_tail_O")
        out.add("left_tail_limit")
    if xs.alpha == 3.0 and xs.rho == 0.0:
        out.add("alpha3_remainder")
    if ns is not None:
        if not isinstance(ns, PowerLawSpec):
            raise ValidationError("auto_flags needs the analytic law of N")
        g, rho_n = ns.alpha, ns.rho
        out.add("N_regularity")
        if g > 2.0 or (g == 2.0 and rho_n < -1.0):
            out.update(("EN_finite", "N_moment_1+tau"))
        if g > 2.0 or (g == 2.0 and rho_n < -2.0):
            out.add("EN_log_moment")
        if g > 2.0 + xs.alpha:
            out.add("N_moment_1+alpha")
        if g > xs.alpha:
            out.add("N_small_vs_X")
        if g > (1.0 + xs.alpha) / 2.0:
            out.add("N_tail_small")
        if xs.alpha > g:
            out.add("X_small_vs_N")
    return frozenset(out)


# -- predictors -------------------------------------------------------------


def _pmf_at(law, t, who):
    if isinstance(law, PowerLawSpec):
        return law.pmf_value(t)
    if isinstance(law, LatticePmf):
        if t > law.support_max and law.tail_right > 0.0:
            raise BudgetError(
                f"predictor needs P({who}={t}) beyond the retained window "
                f"(support ends at {law.support_max} with tail mass "
                f"{law.tail_right:.3e}); widen the window"
            )
        if t < law.support_min and law.tail_left > 0.0:
            raise BudgetError(
                f"predictor needs P({who}={t}) below the retained window"
            )
        return law.at(t)
    raise ValidationError(f"{who} must be a LatticePmf or PowerLawSpec")


def predict(regime, t, x=None, n=None, mu=None, EN=None):
    """Evaluate the regime's predictor at integer t.

    single-big-jump needs (x, EN); stopping-dominates needs (n, mu > 0);
    combined needs all four; subcritical-stable needs analytic specs for both
    laws and delegates to predict_subcritical.
    """
    predictor = regime.predictor if isinstance(regime, RegimeReport) else str(regime)
    if predictor not in PREDICTORS:
        raise ValidationError(
            f"no predictor defined (got {predictor!r}); select_regime gave an "
            "empty report or an unknown name was passed"
        )
    t = int(t)

    def big_jump():
        if x is None or EN is None:
            raise ValidationError("single-big-jump needs x and EN")
        if not math.isfinite(EN) or EN <= 0:
            raise ValidationError("EN must be positive and finite")
        return EN * _pmf_at(x, t, "X")

    def dominates():
        if n is None or mu is None:
            raise ValidationError("stopping-dominates needs n and mu")
        if not mu > 0:
            raise ValidationError("stopping-dominates needs mu > 0")
        return _pmf_at(n, int(t // mu), "N") / mu

    if predictor == "single-big-jump":
        return big_jump()
    if predictor == "stopping-dominates":
        return dominates()
    if predictor == "combined":
        return big_jump() + dominates()

    xs = x.spec if isinstance(x, LatticePmf) else x
    ns = n.spec if isinstance(n, LatticePmf) else n
    if not isinstance(xs, PowerLawSpec) or not isinstance(ns, PowerLawSpec):
        raise ValidationError("subcritical-stable needs analytic specs for x and n")
    if xs.rho != 0.0:
        raise ValidationError(
            "subcritical-stable predictor needs a constant slowly varying "
            "factor for X (rho = 0)"
        )
    return predict_subcritical(
        t,
        xs.alpha,
        ns.alpha,
        a=xs.effective_a * xs.C,
        l2_const=ns.effective_a * ns.C,
        l2_rho=ns.rho,
    )


def predict_subcritical(t, alpha, gamma, a, l2_const=1.0, l2_rho=0.0):
    """Local probability predictor when both indices sit below 2.

    P(S_N = t) ~ (alpha-1) * t^{-1-k} * L2(t^{alpha-1}) * E[Z^k] with
    k = (alpha-1)(gamma-1), Z the one-sided stable limit of normalized sums
    of X (index alpha-1, scale set by the local constant a of X), and L2 the
    slowly varying pmf factor of N.
    """
    if not 1.0 < alpha < 2.0 or not 1.0 < gamma < 2.0:
        raise ValidationError("subcritical predictor needs alpha, gamma in (1,2)")
    if not a > 0.0:
        raise ValidationError("scale constant a must be positive")
    if t < 1:
        raise ValidationError("t must be >= 1")
    ap = alpha - 1.0
    kappa = ap * (gamma - 1.0)
    law = StableLaw(index=ap, scale_constant=a)
    mom = stable_frac_moment(law, kappa)
    l2 = l2_const * math.log(float(t) ** ap + math.e) ** l2_rho
    return ap * l2 * float(t) ** (-1.0 - kappa) * mom


# -- stable law machinery ---------------------------------------------------


@dataclass(frozen=True)
class StableLaw:
    """Stable limit law of normalized sums, pinned by (index, scale_constant).

    index in (0,1) is the regime where partial sums of a nonnegative law with
    local exponent alpha = index+1 need no centering; scale_constant is the
    local pmf constant of that law.  The characteristic function is

        cf(l) = exp{ (c/index) |l|^index Gamma(1-index)
                     (i sign(l) sin(index pi/2) - cos(index pi/2)) }

    which for scale_constant = index reduces to the unit law.  Index in (1,2)
    is also accepted: the same expression then describes the centered
    two-sided limit used by the local-limit diagnostics.
    """

    index: float
    scale_constant: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.index < 2.0) or self.index == 1.0:
            raise ValidationError("index must lie in (0,1) or (1,2)")
        if not self.scale_constant > 0.0:
            raise ValidationError("scale_constant must be positive")

    @property
    def d(self):
        """Laplace-exponent coefficient: E e^{-sZ} = e^{-d s^index} (index<1)."""
        return (self.scale_constant / self.index) * math.gamma(1.0 - self.index)

    @property
    def _decay(self):
        # |cf(l)| = exp(-_decay |l|^index); positive on both index ranges
        return self.d * math.cos(self.index * math.pi / 2.0)

    @property
    def _im_coeff(self):
        return self.d * math.sin(self.index * math.pi / 2.0)

    def cf(self, lam):
        lam = np.asarray(lam, dtype=float)
        mag = np.abs(lam) ** self.index
        re = -self._decay * mag
        im = self._im_coeff * mag * np.sign(lam)
        out = np.exp(re + 1j * im)
        if out.ndim == 0:
            return complex(out)
        return out


def stable_cf(alpha, lam):
    """Characteristic function of the unit one-sided stable limit, index alpha-1."""
    if not 1.0 < alpha < 2.0:
        raise ValidationError("alpha must lie in (1,2)")
    ap = alpha - 1.0
    lam = float(lam)
    bracket = complex(
        -math.cos(ap * math.pi / 2.0),
        math.copysign(1.0, lam) * math.sin(ap * math.pi / 2.0),
    )
    return cmath.exp(math.gamma(2.0 - alpha) * abs(lam) ** ap * bracket)


@lru_cache(maxsize=8)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _density_series(law, z, tol=1e-13):
    """Series in z^{-index}: convergent for index < 1, asymptotic for
    index > 1.  Returns None when it cannot certify ~1e-12 accuracy.

    The break tests use the sin-free term bound exp(ln_t); the sin factor
    vanishes on even k whenever index*2 is an integer and would fake
    convergence."""
    ap, d = law.index, law.d
    if z <= 0.0:
        return None
    ln_ad = math.log(abs(d))
    sgn_d = 1.0 if d >= 0 else -1.0
    lnz = math.log(z)
    terms = []
    peak = 0.0
    prev_bound = math.inf
    for k in range(1, 420):
        ln_t = (
            math.lgamma(k * ap + 1.0)
            - math.lgamma(k + 1.0)
            + k * ln_ad
            - (k * ap + 1.0) * lnz
        )
        if ln_t > 700.0:
            return None
        bound = math.exp(ln_t)
        if ap > 1.0 and bound > prev_bound:
            # asymptotic regime: truncate at the smallest term
            if prev_bound < tol:
                return max(math.fsum(terms[:-1]) / math.pi, 0.0)
            return None
        sign = (1.0 if k % 2 == 1 else -1.0) * sgn_d**k
        terms.append(sign * bound * math.sin(k * math.pi * ap))
        peak = max(peak, bound)
        prev_bound = bound
        if bound < 1e-18:
            break
    else:
        return None
    total = math.fsum(terms) / math.pi
    if peak * 5e-16 > max(1e-12, 1e-9 * abs(total)):
        return None
    return max(total, 0.0)


def _invert_nodes(law, zmax):
    """Quadrature nodes for cf inversion resolving the phase up to |z|=zmax.

    Integrates in v with l = v^k, k = ceil(2/index) for index < 1, so the
    l^index cusp at the origin becomes C2-smooth; k = 1 suffices above 1.
    Returns (lam, weights) with the Jacobian folded into the weights."""
    D = law._decay
    lam_max = (46.0 / D) ** (1.0 / law.index)
    k = 1 if law.index > 1.0 else int(math.ceil(2.0 / law.index))
    phase = abs(zmax) * lam_max + (abs(law._im_coeff) + D) * lam_max**law.index
    m = int(k * phase / 1.5) + 8
    if m > 2_000_000:
        raise QuadratureError(
            f"cf inversion at z={zmax:.3g} needs {m} panels; index "
            f"{law.index} too extreme for the oscillatory route"
        )
    xg, wg = _gl(16)
    edges = np.linspace(0.0, lam_max ** (1.0 / k), m + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    v = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    if k == 1:
        return v, w
    return v**k, w * k * v ** (k - 1)


def _density_invert(law, z):
    """cf inversion: g(z) = (1/pi) int_0^inf e^{-D l^a} cos(c l^a - l z) dl."""
    lam, w = _invert_nodes(law, z)
    mag = lam**law.index
    vals = np.exp(-law._decay * mag) * np.cos(law._im_coeff * mag - lam * z)
    return float(np.dot(w, vals)) / math.pi


def stable_density(law: StableLaw, z: float) -> float:
    """Density of the stable law at z, accurate to ~1e-8 absolute for |z|<=50.

    Series where it is reliable (large z relative to the scale), cf inversion
    otherwise; one-sided laws (index < 1) return 0 at and left of the origin.
    """
    z = float(z)
    if law.index < 1.0:
        if z <= 0.0:
            return 0.0
        # essential zero near the origin: bound the saddle exponent
        ap = law.index
        expo = (
            -(1.0 - ap)
            * ap ** (ap / (1.0 - ap))
            * (law.d / z**ap) ** (1.0 / (1.0 - ap))
        )
        if expo < -700.0:
            return 0.0
    val = _density_series(law, z)
    if val is not None:
        return val
    return _density_invert(law, z)


def stable_density_grid(law: StableLaw, zs) -> np.ndarray:
    """Vectorized density on a grid: shared quadrature nodes per magnitude
    chunk, series handled pointwise where it wins."""
    zs = np.asarray(zs, dtype=float)
    out = np.empty(zs.shape, dtype=float)
    flat = zs.ravel()
    res = np.empty(flat.shape, dtype=float)
    todo = []
    for i, z in enumerate(flat):
        if law.index < 1.0 and z <= 0.0:
            res[i] = 0.0
            continue
        val = _density_series(law, z)
        if val is None:
            todo.append(i)
        else:
            res[i] = val
    if todo:
        todo = np.array(todo)
        order = todo[np.argsort(np.abs(flat[todo]))]
        for chunk in np.array_split(order, max(1, len(order) // 512)):
            if len(chunk) == 0:
                continue
            zmax = float(np.max(np.abs(flat[chunk])))
            lam, w = _invert_nodes(law, zmax)
            mag = lam**law.index
            damp = np.exp(-law._decay * mag)
            base = law._im_coeff * mag
            vals = np.cos(base[None, :] - np.outer(flat[chunk], lam))
            res[chunk] = (vals * (damp * w)[None, :]).sum(axis=1) / math.pi
    out.ravel()[:] = res
    return out


def stable_frac_moment(law: StableLaw, s: float) -> float:
    """E Z^s for the one-sided law, 0 <= s < index.

    Quadrature of z^s g(z) up to Z0 plus the closed series for the remainder
    (the same expansion that gives the density's tail, integrated term by
    term); the split point keeps the series geometric.
    """
    if law.index >= 1.0:
        raise ValidationError("fractional moments are for one-sided laws (index < 1)")
    if s < 0.0:
        raise ValidationError("s must be >= 0")
    if s >= law.index:
        raise DivergentMomentError(
            f"E Z^s diverges for s >= index ({s} >= {law.index})"
        )
    ap, d = law.index, law.d
    z0 = (2.0 * d) ** (1.0 / ap)
    xg, wg = _gl(32)
    # geometric panels: z0 grows like d^{1/index}, a uniform grid starves
    # the density peak when the index is small
    edges = np.concatenate([[0.0], z0 * np.geomspace(1e-5, 1.0, 56)])
    acc = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for xx, ww in zip(xg, wg):
            z = mid + half * xx
            acc.append(half * ww * z**s * stable_density(law, z))
    head = math.fsum(acc)
    # integral_{z0}^inf z^s g(z) dz, term by term
    tail_terms = []
    for k in range(1, 200):
        ln_t = (
            math.lgamma(k * ap + 1.0)
            - math.lgamma(k + 1.0)
            + k * math.log(d)
            + (s - k * ap) * math.log(z0)
        )
        bound = math.exp(ln_t) / (k * ap - s)
        coeff = math.sin(k * math.pi * ap) / (k * ap - s)
        term = (1.0 if k % 2 == 1 else -1.0) * math.exp(ln_t) * coeff
        tail_terms.append(term)
        # sin-free bound: the sin factor hits float zeros on even k
        if bound < 1e-18:
            break
    tail = math.fsum(tail_terms) / math.pi
    return head + tail


def stable_frac_moment_exact(law: StableLaw, s: float) -> float:
    """Mellin closed form d^{s/index} Gamma(1-s/index) / Gamma(1-s).

    Independent of the quadrature route; kept as the cross-check the tests
    freeze against.
    """
    if law.index >= 1.0:
        raise ValidationError("fractional moments are for one-sided laws (index < 1)")
    if s >= law.index:
        raise DivergentMomentError("moment diverges")
    return law.d ** (s / law.index) * math.gamma(1.0 - s / law.index) / math.gamma(
        1.0 - s
    )


def sample_stable(law: StableLaw, size: int, rng) -> np.ndarray:
    """Draws from the one-sided law: Kanter's representation scaled by d^{1/index}."""
    if law.index >= 1.0:
        raise ValidationError("sampler covers one-sided laws (index < 1)")
    ap = law.index
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a_u = (
        np.sin(ap * u) ** (ap / (1.0 - ap))
        * np.sin((1.0 - ap) * u)
        / np.sin(u) ** (1.0 / (1.0 - ap))
    )
    unit = (a_u / e) ** ((1.0 - ap) / ap)
    return law.d ** (1.0 / ap) * unit
