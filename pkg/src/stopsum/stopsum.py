"""Randomly stopped sums and maxima of iid lattice variables.

P(S_N = t) = sum_k P(N=k) P(S_k = t) is evaluated exactly on a support
window by a baby-step/giant-step scheme: the X-powers inside each block of
B consecutive k are folded into one array by a weighted sum, and blocks are
combined by Horner steps in the giant power X^(*B).  Cost is one window-size
multiply-add per retained k plus ~2*sqrt(K) convolutions instead of K.

Error accounting distinguishes two numbers.  truncation_error is the mass
P(N > n_cutoff) of the dropped stopping values (the spec-level invariant).
window_error bounds the error of the *retained window values*: when X has
minimum support >= 1, S_k > t for every k > t, so the series for a window
[0, W] terminates by itself at k = W and the retained values are exact even
though P(N > n_cutoff) may dwarf them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import BudgetError, SupportOverflowError, ValidationError
from .lattice import FFT_THRESHOLD, MAX_SUPPORT, LatticePmf, self_convolve

_BLOCK_BYTES = 256 << 20  # cap on the block-coefficient matrix


@dataclass(frozen=True)
class StopPolicy:
    """Cutoff rule for the stopping variable and support window for the sum.

    n_max pins the cutoff directly.  window bounds the retained support of
    S_N to [0, window]; when the summands charge at least 1 each, the cutoff
    then caps at the window top and the retained values are exact.  Otherwise
    the smallest cutoff with P(N > cutoff) <= tail_target is used (default
    1e-9, falling back to the whole retained support of N; an explicit
    unreachable target raises).  force_direct switches every convolution to
    direct summation, which keeps *relative* accuracy in deep tails where
    FFT roundoff (~1e-15 absolute) would dominate.
    """

    n_max: int | None = None
    tail_target: float | None = None
    window: int | None = None
    force_direct: bool = False

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise ValidationError("n_max must be >= 0")
        if self.tail_target is not None and not 0.0 < self.tail_target < 1.0:
            raise ValidationError("tail_target must lie in (0,1)")
        if self.window is not None and self.window < 0:
            raise ValidationError("window must be >= 0")


@dataclass(frozen=True)
class StoppedSumResult:
    pmf: LatticePmf
    n_cutoff: int
    truncation_error: float
    window_error: float


def _n_weights(n: LatticePmf, cutoff: int):
    """P(N=k) for k = 0..cutoff as a dense array."""
    if n.offset < 0:
        raise ValidationError("stopping variable must be nonnegative")
    q = np.zeros(cutoff + 1)
    lo = n.offset
    hi = min(n.support_max, cutoff)
    if hi >= lo:
        q[lo : hi + 1] = n.probs[: hi - lo + 1]
    return q


def _beyond_cutoff(n: LatticePmf, cutoff: int):
    """P(N > cutoff) including the analytic tail of n."""
    if cutoff >= n.support_max:
        return n.tail_right
    return float(np.sum(n.probs[cutoff + 1 - n.offset :])) + n.tail_right


def _resolve_cutoff(n: LatticePmf, policy: StopPolicy, window_top):
    """window_top is passed only when the series-termination argument applies
    (X with min support >= 1 and a finite window): summands beyond the window
    top cannot land inside the window, so the cutoff caps there and the
    retained values come out exact.  Without termination, an explicit
    tail_target that N cannot meet raises instead of silently under-counting;
    the default target falls back to all of the retained support."""
    if policy.n_max is not None:
        return policy.n_max
    if window_top is not None:
        return min(n.support_max, max(window_top, n.offset))
    target = policy.tail_target if policy.tail_target is not None else 1e-9
    if _beyond_cutoff(n, n.support_max) > target:
        if policy.tail_target is not None:
            raise BudgetError(
                f"P(N > {n.support_max}) = {_beyond_cutoff(n, n.support_max):.3e} "
                f"already exceeds tail_target={target:.3e}; N needs a wider window"
            )
        return n.support_max
    lo, hi = n.offset, n.support_max
    if _beyond_cutoff(n, lo) <= target:
        while lo > 0 and _beyond_cutoff(n, lo - 1) <= target:
            lo -= 1
        return lo
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _beyond_cutoff(n, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _conv_window(u, v, top, force_direct):
    n_out = len(u) + len(v) - 1
    if force_direct or n_out < FFT_THRESHOLD:
        w = np.convolve(u, v)
    else:
        w = np.clip(fftconvolve(u, v), 0.0, None)
    return w[: top + 1]


def _mixture(q, x1, top, force_direct):
    """sum_k q[k] * X^(*k) over values 0..top; x1 is X on offsets 0..len-1."""
    K = len(q) - 1
    if K <= 64:
        acc = np.array([q[K]])
        for k in range(K, 0, -1):
            acc = _conv_window(acc, x1, top, force_direct)
            acc[0] += q[k - 1]
        return acc if K > 0 else np.array([q[0]])

    B = max(int(math.isqrt(K + 1)) + 1, 2)
    max_rows = max(2, _BLOCK_BYTES // (8 * (top + 1)))
    J = (K + 1 + B - 1) // B
    if J > max_rows:
        J = max_rows
        B = (K + 1 + J - 1) // J
        J = (K + 1 + B - 1) // B
    qpad = np.zeros(J * B)
    qpad[: K + 1] = q
    Q = qpad.reshape(J, B)

    inner = np.zeros((J, top + 1))
    cur = np.array([1.0])  # X^(*0)
    for r in range(B):
        cols = Q[:, r]
        if cols.any():
            inner[:, : len(cur)] += np.outer(cols, cur)
        if r < B - 1 or J > 1:
            cur = _conv_window(cur, x1, top, force_direct)
    giant = cur  # X^(*B)

    R = inner[J - 1]
    for j in range(J - 2, -1, -1):
        R = _conv_window(R, giant, top, force_direct) + inner[j]
    return R


def stopped_sum_pmf(x: LatticePmf, n: LatticePmf, policy: StopPolicy) -> StoppedSumResult:
    """Exact distribution of S_N = X_1 + ... + X_N on a support window.

    Requires nonnegative X (the window bookkeeping relies on monotone
    support growth).  A point-mass N delegates to self_convolve so that the
    fixed-n result is reproduced bit for bit.
    """
    if x.offset < 0:
        raise ValidationError("X must be nonnegative for the windowed mixture")
    if n.offset < 0:
        raise ValidationError("stopping variable must be nonnegative")

    if n.is_degenerate() and n.tail_mass == 0.0:
        k0 = int(n.support_values()[np.argmax(n.probs)])
        win = (0, policy.window) if policy.window is not None else None
        pmf = self_convolve(x, k0, window=win)
        werr = 0.0 if (policy.window is None or x.tail_right == 0.0
                       or x.support_max >= policy.window) else k0 * x.tail_right
        return StoppedSumResult(pmf=pmf, n_cutoff=k0, truncation_error=0.0,
                                window_error=werr)

    term_top = policy.window if (policy.window is not None and x.offset >= 1) else None
    cutoff = _resolve_cutoff(n, policy, term_top)
    if policy.window is not None:
        top = policy.window
    else:
        top = cutoff * x.support_max
        if top > MAX_SUPPORT:
            raise SupportOverflowError(
                f"unwindowed support {top} exceeds budget; set policy.window"
            )
    if (top + 1) * 8 * 3 > 4 * _BLOCK_BYTES:
        raise SupportOverflowError(f"window {top} exceeds the memory budget")

    q = _n_weights(n, cutoff)
    x1 = np.zeros(min(x.support_max, top) + 1)
    hi = min(x.support_max, top)
    x1[x.offset : hi + 1] = x.probs[: hi - x.offset + 1]

    R = _mixture(q, x1, top, policy.force_direct)

    q_mass = math.fsum(q)
    mass_in = math.fsum(R)
    tail_right = max(0.0, q_mass - mass_in)
    trunc = _beyond_cutoff(n, cutoff)

    series_complete = n.tail_right == 0.0 and cutoff >= n.support_max
    # exactness-by-termination needs every k <= top carried at its true weight
    terminated = (
        x.offset >= 1
        and cutoff >= top
        and (n.tail_right == 0.0 or n.support_max >= top)
    )
    if series_complete or terminated:
        werr = 0.0
    else:
        werr = trunc
    if x.tail_right > 0.0 and x.support_max < top:
        # unknown X mass below the window top could re-enter retained values
        en_ret = math.fsum(q * np.arange(len(q)))
        werr += en_ret * x.tail_right

    pmf = LatticePmf(
        offset=0,
        probs=R,
        tail_left=0.0,
        tail_right=tail_right + trunc,
        label=f"S_N[{x.label}; {n.label}]",
    )
    return StoppedSumResult(pmf=pmf, n_cutoff=cutoff, truncation_error=trunc,
                            window_error=werr)


def stopped_max_pmf(x: LatticePmf, n: LatticePmf, policy: StopPolicy) -> StoppedSumResult:
    """Distribution of M_N = max(X_1..X_N), with M_0 = 0 by convention.

    P(M_N <= t) = E[F(t)^N] evaluated as a polynomial in F(t) with the
    retained N weights as coefficients (Horner); F includes the analytic
    left tail of X so two-sided laws are handled exactly on the window.
    """
    if n.offset < 0:
        raise ValidationError("stopping variable must be nonnegative")
    cutoff = _resolve_cutoff(n, policy, None)
    q = _n_weights(n, cutoff)

    lo = min(0, x.support_min)
    hi = x.support_max if policy.window is None else min(x.support_max, policy.window)
    if hi < lo:
        raise ValidationError("window excludes the whole support")

    # F(t) on t = lo-1 .. hi
    vals = np.zeros(hi - lo + 2)
    idx0 = x.support_min - lo + 1
    m = hi - x.support_min + 1
    if m > 0:
        vals[idx0 : idx0 + m] = x.probs[:m]
    F = x.tail_left + np.cumsum(vals)
    F = np.minimum(F, 1.0)

    cdf = np.polynomial.polynomial.polyval(F, q)
    q0 = q[0]
    tgrid = np.arange(lo - 1, hi + 1)
    cdf = np.where(tgrid < 0, cdf - q0, cdf)

    probs = np.clip(np.diff(cdf), 0.0, None)
    trunc = _beyond_cutoff(n, cutoff)
    series_complete = n.tail_right == 0.0 and cutoff >= n.support_max
    werr = 0.0 if series_complete else trunc
    below = max(0.0, float(cdf[0]))
    above = max(0.0, (1.0 - trunc) - below - math.fsum(probs))

    pmf = LatticePmf(
        offset=lo,
        probs=probs,
        tail_left=below,
        tail_right=above + trunc,
        label=f"M_N[{x.label}; {n.label}]",
    )
    return StoppedSumResult(pmf=pmf, n_cutoff=cutoff, truncation_error=trunc,
                            window_error=werr)


def ratio_curve(exact: StoppedSumResult, predictor, t_grid):
    """Rows (t, exact, predicted, ratio, error_budget) for exact/predictor.

    Refuses when the error bound on the retained values exceeds one
    thousandth of the smallest predictor value on the grid: a ratio computed
    from values this uncertain would be noise dressed as evidence.
    """
    rows = []
    preds = []
    for t in t_grid:
        pv = float(predictor(int(t)))
        if not pv > 0.0:
            raise ValidationError(f"predictor must be positive on the grid; got {pv} at t={t}")
        preds.append(pv)
    budget = exact.window_error
    floor = 1e-3 * min(preds)
    if budget > floor:
        raise BudgetError(
            f"window error bound {budget:.3e} exceeds 1e-3 * min predictor "
            f"({floor:.3e}); refusing to report ratios built on noise"
        )
    for t, pv in zip(t_grid, preds):
        t = int(t)
        if not exact.pmf.support_min <= t <= exact.pmf.support_max:
            raise ValidationError(f"t={t} outside the retained window")
        ev = exact.pmf.at(t)
        rows.append(
            {
                "t": t,
                "exact": ev,
                "predicted": pv,
                "ratio": ev / pv,
                "error_budget": budget,
            }
        )
    return rows
