"""Clustering curve of a random intersection graph, in closed form.

Vertices carry iid activity weights Y and attributes carry iid
attractiveness weights X; an attribute links to a vertex with probability
min(1, XY/sqrt(mn)) and vertices sharing an attribute become adjacent.  In
the m/n -> beta limit the local clustering coefficient of degree-k vertices
converges to

    C*(k) = 1 / (1 + sqrt(beta) (a2^2 b2 / (a3 b1)) p1(k) / p2(k)),

where a_i = E X^i, b_i = E Y^i and p1, p2 are point probabilities of small
independent combinations of mixed Poisson laws and their stopped sums.  This
module builds those laws exactly on finite windows, evaluates the curve, and
fits its k^(-delta) scaling.

Everything here is pure; the heavy component pmfs are computed once per
(params, window) pair and shared read-only across evaluations of many k.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateLawError, ValidationError
from .lattice import LatticePmf, PowerLawSpec, TruncationPolicy, build_power_law
from .stopsum import StopPolicy, stopped_sum_pmf

__all__ = [
    "ClusterParams",
    "MixedPoissonSpec",
    "c_star",
    "c_star_curve",
    "c_star_formula",
    "d_star_pmf",
    "delta_exponent",
    "lambda_tail_check",
    "loglog_slope",
    "mixed_poisson_pmf",
    "p1_p2",
]

_CHUNK_CELLS = 1 << 21
# a mixing law may carry analytic tail mass up to this much; the builder
# rules below keep the induced pmf error far under 1e-3 of any reported value
_MIXING_TAIL_BUDGET = 1e-9
_STOP_TAIL_TARGET = 1e-12
_N_TOP_CAP = 1 << 15


@dataclass(frozen=True, eq=False)
class MixedPoissonSpec:
    """Mixed Poisson law: rate lambda = scale * Z with Z drawn from mixing.

    tilt = r weights the mixture by lambda^r:
    P(Lambda = s) = E[e^(-lambda) lambda^(s+r) / s!] / E[lambda^r].
    """

    mixing: LatticePmf
    scale: float
    tilt: int = 0

    def __post_init__(self):
        if self.mixing.offset < 0:
            raise ValidationError("mixing weight must be nonnegative")
        if not self.scale > 0.0:
            raise ValidationError("scale must be positive")
        if self.tilt < 0 or self.tilt != int(self.tilt):
            raise ValidationError("tilt must be a nonnegative integer")
        if self.mixing.tail_mass > _MIXING_TAIL_BUDGET:
            raise ValidationError(
                f"mixing tail mass {self.mixing.tail_mass:.3e} exceeds the "
                f"{_MIXING_TAIL_BUDGET:.0e} budget; truncate the weight law wider"
            )


def _poisson_mixture(lam, weights, s_max, tilt):
    """sum_z w_z e^(-lam_z) lam_z^(s+tilt) / s! for s = 0..s_max, log-space."""
    out = np.zeros(s_max + 1)
    pos = (lam > 0.0) & (weights > 0.0)
    if tilt == 0:
        out[0] += float(weights[~(lam > 0.0)].sum())
    lam_p = lam[pos]
    if len(lam_p) == 0:
        return out
    log_w = np.log(weights[pos])
    log_lam = np.log(lam_p)
    s = np.arange(s_max + 1, dtype=float)
    lgam = gammaln(s + 1.0)
    rows = max(1, _CHUNK_CELLS // (s_max + 1))
    for i in range(0, len(lam_p), rows):
        sl = slice(i, i + rows)
        ll = (
            (log_w[sl] - lam_p[sl])[:, None]
            + np.outer(log_lam[sl], s + tilt)
            - lgam[None, :]
        )
        np.exp(ll, out=ll)
        out += ll.sum(axis=0)
    return out


def mixed_poisson_pmf(spec: MixedPoissonSpec, s_max) -> LatticePmf:
    """P(Lambda = s) for s = 0..s_max as an exact finite Poisson mixture.

    The mixing law is used as retained (renormalized through the tilt moment
    E[lambda^r] of the retained support), so the output is a proper law whose
    mass beyond s_max lands in tail_right.
    """
    s_max = int(s_max)
    if s_max < 0:
        raise ValidationError("s_max must be >= 0")
    z = spec.mixing.support_values().astype(float)
    w = spec.mixing.probs
    lam = spec.scale * z
    norm = float(np.dot(w, lam**spec.tilt)) if spec.tilt else float(w.sum())
    if norm < 1e-300:
        raise DegenerateLawError(
            f"E[lambda^{spec.tilt}] vanishes; the tilted law is undefined"
        )
    probs = _poisson_mixture(lam, w, s_max, spec.tilt) / norm
    total = float(probs.sum())
    return LatticePmf(
        offset=0,
        probs=probs,
        tail_right=max(0.0, 1.0 - total),
        label=f"MixPois[{spec.mixing.label}; b={spec.scale:g}, r={spec.tilt}]",
    )


def lambda_tail_check(spec: MixedPoissonSpec, t_grid):
    """Rows (t, lhs*t^alpha, target, deviation) for the mixed Poisson tail.

    For a power-law mixing with P(Z=t) ~ a t^(-alpha), alpha > 2, the plain
    (untilted) numerator obeys E[e^(-bZ)(bZ)^t / t!] ~ a b^(alpha-1) t^(-alpha);
    each row compares the rescaled left side against the constant target.
    """
    pspec = spec.mixing.spec
    if pspec is None:
        raise ValidationError("tail check needs a power-law mixing, got a plain pmf")
    if spec.tilt != 0:
        raise ValidationError("tail check is stated for the untilted mixture")
    if pspec.side != "one-sided":
        raise ValidationError("mixing weight must be one-sided")
    if pspec.rho != 0.0:
        raise ValidationError("tail check needs a constant slowly-varying part")
    if not pspec.alpha > 2.0:
        raise ValidationError("tail check needs alpha > 2")
    ts = [int(t) for t in t_grid]
    if not ts or any(t < 1 for t in ts):
        raise ValidationError("t_grid must hold positive integers")

    # past rate 2 t_hi the Poisson kernel at any t <= t_hi is exponentially
    # dead, so a 1e-9 analytic remainder never shows against the t^(-alpha) lhs
    law = _weight_law(pspec, spec.scale, 0, max(ts), tail_cap=1e-9)
    z = law.support_values().astype(float)
    lam = spec.scale * z
    target = pspec.L1(1.0) * spec.scale ** (pspec.alpha - 1.0)
    rows = []
    for t in ts:
        vals = np.exp(np.log(lam) * t - lam - math.lgamma(t + 1.0))
        lhs = float(np.dot(law.probs, vals))
        scaled = lhs * float(t) ** pspec.alpha
        rows.append(
            {
                "t": t,
                "scaled_lhs": scaled,
                "target": target,
                "deviation": abs(scaled - target),
            }
        )
    return rows


@dataclass(frozen=True)
class ClusterParams:
    """Limit parameters of the clustering curve.

    alpha, gamma are the attribute / vertex weight tail exponents (both must
    exceed 6 for the third-moment machinery), beta the attribute-to-vertex
    ratio limit m/n, a and b the tail constants, a1..a3 and b1, b2 the weight
    moments.  Carrying the weight specs enables the pmf pipeline.
    """

    alpha: float
    gamma: float
    beta: float
    a: float
    b: float
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    x_spec: PowerLawSpec | None = None
    y_spec: PowerLawSpec | None = None

    def __post_init__(self):
        if not (self.alpha > 6.0 and self.gamma > 6.0):
            raise ValidationError("clustering limit needs alpha > 6 and gamma > 6")
        if not self.beta > 0.0:
            raise ValidationError("beta must be positive")
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValidationError("tail constants must be positive")
        for name in ("a1", "a2", "a3", "b1", "b2"):
            v = getattr(self, name)
            if not (0.0 < v < math.inf):
                raise ValidationError(f"moment {name} must be positive and finite")

    @classmethod
    def from_specs(cls, x_spec: PowerLawSpec, y_spec: PowerLawSpec, beta, **moments):
        """Build params from analytic weight laws; moments come from the
        series (exact) unless overridden by keyword."""
        for who, s in (("attribute", x_spec), ("vertex", y_spec)):
            if s.side != "one-sided":
                raise ValidationError(f"{who} weight law must be one-sided")
            if s.rho != 0.0:
                raise ValidationError(
                    f"{who} weight law needs a constant slowly-varying part"
                )
        vals = {
            "a1": x_spec.moment(1),
            "a2": x_spec.moment(2),
            "a3": x_spec.moment(3),
            "b1": y_spec.moment(1),
            "b2": y_spec.moment(2),
        }
        unknown = set(moments) - set(vals)
        if unknown:
            raise ValidationError(f"unknown moment overrides {sorted(unknown)}")
        vals.update(moments)
        return cls(
            alpha=x_spec.alpha,
            gamma=y_spec.alpha,
            beta=float(beta),
            a=x_spec.L1(1.0),
            b=y_spec.L1(1.0),
            x_spec=x_spec,
            y_spec=y_spec,
            **vals,
        )


def _weight_law(wspec: PowerLawSpec, scale, tilt, s_max, tail_cap=1e-15):
    """Truncate an analytic weight so the mixed Poisson built from it is
    trustworthy on 0..s_max: the retained rates must reach past 2(s_max+tilt)
    (the Poisson kernel is decreasing there) and the dropped analytic mass
    must be negligible outright."""
    z_top = max(int(math.ceil(2.0 * (s_max + tilt + 32) / scale)), 256)
    while wspec.tail_value(z_top) > tail_cap and z_top < (1 << 22):
        z_top *= 2
    return build_power_law(wspec, TruncationPolicy(t_max=z_top))


def _mixed_from_spec(wspec, scale, tilt, s_max):
    mixing = _weight_law(wspec, scale, tilt, s_max)
    return mixed_poisson_pmf(MixedPoissonSpec(mixing, scale, tilt), s_max)


def _require_specs(params: ClusterParams):
    if params.x_spec is None or params.y_spec is None:
        raise ValidationError(
            "pmf pipeline needs the weight laws; build params via from_specs"
        )


def _lambda1_pmf(params: ClusterParams, r, s_max):
    """Attribute-side mixed Poisson with rate X b1 / sqrt(beta), tilt r."""
    return _mixed_from_spec(
        params.x_spec, params.b1 / math.sqrt(params.beta), r, s_max
    )


def _lambda0_pmf(params: ClusterParams, r, t_max):
    """Vertex-side mixed Poisson with rate Y a1 sqrt(beta), tilt r.

    Carried past t_max / E[tau] with sqrt slack: the stopping-dominated part
    of the stopped sum at t rides on N ~ t / E[tau], so a mass-only cutoff
    would cut exactly the t^-(gamma-r) route.  On top of that the declared
    tail must sit under the stopping target."""
    scale = params.a1 * math.sqrt(params.beta)
    tau_mean = (params.a2 / params.a1) * params.b1 / math.sqrt(params.beta)
    reach = t_max / tau_mean
    n_need = int(math.ceil(reach + 16.0 * math.sqrt(reach + 1.0))) + 64
    s_top = max(1024, n_need)
    while True:
        lam0 = _mixed_from_spec(params.y_spec, scale, r, s_top)
        if lam0.tail_right <= _STOP_TAIL_TARGET or s_top >= _N_TOP_CAP:
            return lam0
        s_top *= 2


def d_star_pmf(r, params: ClusterParams, t_max) -> LatticePmf:
    """Degree-core law: sum of iid attribute-side mixed Poissons, stopped at
    the r-tilted vertex-side mixed Poisson.  Exact on 0..t_max; cutoff and
    window remainders land in the returned tail_right."""
    if r not in (0, 1, 2):
        raise ValidationError("tilt r must be one of 0, 1, 2")
    _require_specs(params)
    t_max = int(t_max)
    if t_max < 0:
        raise ValidationError("t_max must be >= 0")
    tau = _lambda1_pmf(params, 1, t_max)
    lam0 = _lambda0_pmf(params, r, t_max)
    # pin the cutoff at the full retained support of the stopping law (a
    # mass-based target could again cut below t_max / E[tau]); direct
    # convolutions keep relative accuracy in the deep tail, where the curve
    # lives at ~1e-15 and FFT roundoff would drown it
    res = stopped_sum_pmf(
        tau,
        lam0,
        StopPolicy(n_max=lam0.support_max, window=t_max, force_direct=True),
    )
    return res.pmf


@lru_cache(maxsize=4)
def _pipeline(params: ClusterParams, t_max: int):
    """Component pmfs and the two convolution curves, shared across k."""
    top = int(t_max)
    d1 = d_star_pmf(1, params, top)
    d2 = d_star_pmf(2, params, top)
    l2 = _lambda1_pmf(params, 2, top)
    l3 = _lambda1_pmf(params, 3, top)
    p1 = np.convolve(d2.probs, l2.probs)[: top + 1]
    p1 = np.convolve(p1, l2.probs)[: top + 1]
    p2 = np.convolve(d1.probs, l3.probs)[: top + 1]
    p1.flags.writeable = False
    p2.flags.writeable = False
    return p1, p2


def p1_p2(k, params: ClusterParams, t_max=1024):
    """Point probabilities p1(k) = P(d*2 + L2 + L2' = k-2) and
    p2(k) = P(d*1 + L3 = k-2) of the independent component combinations."""
    k = int(k)
    if k < 2:
        raise ValidationError("degree k must be >= 2")
    _require_specs(params)
    if k - 2 > int(t_max):
        raise ValidationError(f"k - 2 = {k - 2} falls beyond the window {t_max}")
    p1_arr, p2_arr = _pipeline(params, int(t_max))
    return float(p1_arr[k - 2]), float(p2_arr[k - 2])


def c_star_formula(p1, p2, params: ClusterParams):
    """Clustering limit from already-computed p1, p2.  Scale-free in (p1, p2)."""
    if p1 < 0.0 or p2 < 0.0:
        raise ValidationError("p1 and p2 must be nonnegative")
    if p2 == 0.0:
        raise ValidationError("C*(k) undefined where p2(k) = 0")
    front = math.sqrt(params.beta) * (params.a2**2 * params.b2) / (
        params.a3 * params.b1
    )
    return 1.0 / (1.0 + front * (p1 / p2))


def c_star(k, params: ClusterParams, t_max=1024):
    """C*(k), the limiting local clustering coefficient at degree k."""
    p1, p2 = p1_p2(k, params, t_max)
    return c_star_formula(p1, p2, params)


def c_star_curve(params: ClusterParams, ks, t_max=1024):
    """Rows (k, p1, p2, c_star) over a degree grid, components shared."""
    rows = []
    for k in ks:
        p1, p2 = p1_p2(k, params, t_max)
        rows.append(
            {"k": int(k), "p1": p1, "p2": p2, "c_star": c_star_formula(p1, p2, params)}
        )
    return rows


def delta_exponent(alpha, gamma):
    """Scaling exponent of C*(k) ~ c k^(-delta)."""
    if not (alpha > 6.0 and gamma > 6.0):
        warnings.warn(
            "scaling exponent derived under alpha, gamma > 6; value returned anyway",
            RuntimeWarning,
            stacklevel=2,
        )
    return max(0.0, min(alpha - gamma - 1.0, 1.0))


def loglog_slope(xs, ys, weights=None):
    """Least-squares slope of log y against log x.

    Optional nonnegative weights rescale each point's pull on the fit.
    When y is an empirical frequency, weighting by the underlying count
    matches the sampling variance of its logarithm, so thinly populated
    points stop dominating the slope.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValidationError("need two aligned points or more")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValidationError("log-log fit needs positive coordinates")
    if weights is None:
        w = np.ones(len(xs))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != xs.shape:
            raise ValidationError("weights must align with the points")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and nonnegative")
        if np.count_nonzero(w) < 2:
            raise ValidationError("need two points with positive weight")
    lx = np.log(xs)
    ly = np.log(ys)
    total = w.sum()
    lx = lx - (w * lx).sum() / total
    ly = ly - (w * ly).sum() / total
    return float(np.dot(w * lx, ly) / np.dot(w * lx, lx))
