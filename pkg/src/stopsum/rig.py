"""Random intersection graph sampler and clustering measurement.

Actors carry weights Y and attributes carry weights X, both drawn from
nonnegative integer laws.  Attribute i links actor j with probability
min{1, X_i Y_j / sqrt(n m)} independently across pairs, and two actors
become adjacent when they share at least one attribute.  This module
samples such graphs reproducibly, measures per-degree clustering with a
between-vertex error bar, and reduces samples to degree histograms that
can be compared against the limiting stopped-sum law.

Sampling cost tracks the realized edge count, not n*m: actors are walked
in decreasing weight order and runs of low-probability cells are crossed
with geometric skips.  Every attribute row consumes its own counter-based
stream keyed (seed, attribute index), so a sample is bit-identical for
any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from stopsum.errors import BudgetError, DivergentMomentError, ValidationError
from stopsum.lattice import (
    LatticePmf,
    PowerLawSpec,
    TruncationPolicy,
    build_power_law,
)

__all__ = [
    "BudgetError",
    "ClusteringEstimate",
    "EDGE_BUDGET",
    "GraphSample",
    "PAIR_BUDGET",
    "RigConfig",
    "average_degree_histogram",
    "degree_histogram",
    "degree_tail_slopes",
    "edge_lines",
    "empirical_ck",
    "sample_bipartite",
    "sample_graph",
]

EDGE_BUDGET = 1 << 24
PAIR_BUDGET = 1 << 28

# cells at least this likely are tested one by one; rarer cells are skipped over
_DENSE_CUT = 0.05
# rows at most this long are tested in one vectorized block
_DENSE_ALL = 128
# stream tags for the two weight draws; rows use the attribute index, which
# can never reach 2**63, so the three stream families stay disjoint
_ACTOR_STREAM = 1 << 63
_ATTR_STREAM = (1 << 63) + 1
_SPEC_TARGET_TAIL = 1e-12
_WEIGHT_TAIL_BUDGET = 1e-9

_EMPTY_ROW = np.empty(0, dtype=np.int64)
_EMPTY_ROW.flags.writeable = False


@dataclass(frozen=True)
class RigConfig:
    """Sampling recipe: graph sizes, weight laws for both sides, seed."""

    n: int
    m: int
    actor_weights: PowerLawSpec | LatticePmf
    attr_weights: PowerLawSpec | LatticePmf
    seed: int

    def __post_init__(self):
        for name in ("n", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer")
            if value < 1:
                raise ValidationError(f"{name} must be >= 1")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ValidationError("seed must be an integer")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must fit in 64 unsigned bits")
        for name in ("actor_weights", "attr_weights"):
            law = getattr(self, name)
            if not isinstance(law, (PowerLawSpec, LatticePmf)):
                raise ValidationError(
                    f"{name} must be a PowerLawSpec or a LatticePmf"
                )


@dataclass(eq=False)
class GraphSample:
    """One sampled graph: bipartite incidence plus the actor projection.

    incidence[i] holds the sorted actor indices linked to attribute i, and
    adjacency[v] the sorted neighbors of actor v in the projected graph,
    which is symmetric and loop-free by construction.
    """

    n: int
    m: int
    x_weights: np.ndarray
    y_weights: np.ndarray
    incidence: list[np.ndarray]
    adjacency: list[np.ndarray]
    degrees: np.ndarray

    def __post_init__(self):
        if len(self.incidence) != self.m:
            raise ValidationError("incidence needs one row per attribute")
        if len(self.adjacency) != self.n:
            raise ValidationError("adjacency needs one row per actor")
        self.degrees = np.asarray(self.degrees, dtype=np.int64)
        if self.degrees.shape != (self.n,):
            raise ValidationError("degrees needs one entry per actor")

    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2


@dataclass(frozen=True)
class ClusteringEstimate:
    """Average closed-wedge fraction among the degree-k actors."""

    k: int
    c_hat: float
    stderr: float
    vertex_count: int

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)):
            raise ValidationError("k must be an integer")
        if self.k < 2:
            raise ValidationError("k must be >= 2")
        if self.vertex_count < 0:
            raise ValidationError("vertex_count must be >= 0")
        if self.vertex_count == 0:
            if not (math.isnan(self.c_hat) and math.isnan(self.stderr)):
                raise ValidationError("an empty estimate carries NaN values")
        else:
            if not 0.0 <= self.c_hat <= 1.0:
                raise ValidationError("c_hat must lie in [0, 1]")
            if not (math.isfinite(self.stderr) and self.stderr >= 0.0):
                raise ValidationError("stderr must be finite and >= 0")

    @property
    def empty(self) -> bool:
        return self.vertex_count == 0


def _weight_table(law, role: str):
    """Support values, cdf, and mean of a nonnegative weight law."""
    if isinstance(law, PowerLawSpec):
        if law.side != "one-sided":
            raise ValidationError(f"{role} weight law must be one-sided")
        pmf = build_power_law(
            law, TruncationPolicy(target_tail=_SPEC_TARGET_TAIL, mode="renormalize")
        )
        try:
            mean = law.mean()
        except DivergentMomentError:
            mean = math.inf
    elif isinstance(law, LatticePmf):
        if law.offset < 0:
            raise ValidationError(f"{role} weights must be nonnegative")
        if law.tail_mass > _WEIGHT_TAIL_BUDGET:
            raise ValidationError(
                f"{role} weight law leaves {law.tail_mass:.3g} outside its window"
            )
        pmf = law
        mean = None
    else:
        raise ValidationError(f"{role} weights must be a PowerLawSpec or a LatticePmf")
    values = pmf.support_values().astype(float)
    probs = np.asarray(pmf.probs, dtype=float)
    total = float(probs.sum())
    if total <= 0.0:
        raise ValidationError(f"{role} weight law has no mass in its window")
    probs = probs / total
    if mean is None:
        mean = float(values @ probs)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return values, cdf, mean


def _draw_weights(values, cdf, count: int, seed: int, stream: int) -> np.ndarray:
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    )
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return values[np.minimum(idx, values.size - 1)]


class _RowStream:
    """One Philox generator rewound per row instead of rebuilt.

    Rewinding by state assignment is several times cheaper than a fresh
    Generator and yields bit-identical draws, which keeps the per-row
    stream contract while letting one worker reuse its generator.
    """

    def __init__(self):
        self._bits = np.random.Philox(key=np.array([0, 0], dtype=np.uint64))
        self._rng = np.random.Generator(self._bits)
        self._template = self._bits.state

    def use(self, seed, index):
        state = self._template
        inner = state["state"]
        inner["key"][0] = seed
        inner["key"][1] = index
        inner["counter"][:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bits.state = state
        return self._rng


def _sample_row(rng, x_weight, y_sorted, neg_y_sorted, order, norm):
    """Incidence row of one attribute, one exact Bernoulli draw per cell.

    Cells are visited in decreasing probability order.  Short rows and the
    dense head are tested in vectorized blocks; the sparse remainder is
    crossed by geometric skips under the bound seen at the last landing,
    thinning each landing by the true cell probability.  The bound only
    tightens along the walk, so every cell links with exactly
    min{1, x y / norm} while only landed cells are ever touched.
    """
    c = x_weight / norm
    count = y_sorted.size
    if c <= 0.0:
        return _EMPTY_ROW
    if count <= _DENSE_ALL:
        p = np.minimum(1.0, c * y_sorted)
        hits_arr = np.flatnonzero(rng.random(count) < p)
        if hits_arr.size == 0:
            return _EMPTY_ROW
        row = order[hits_arr]
        row.sort()
        return row
    hits: list[int] = []
    head = int(np.searchsorted(neg_y_sorted, -_DENSE_CUT / c, side="right"))
    if head > 0:
        p_head = np.minimum(1.0, c * y_sorted[:head])
        u = rng.random(head)
        hits.extend(np.flatnonzero(u < p_head).tolist())
    j = head
    if j < count:
        bound = min(1.0, c * float(y_sorted[j]))
        while bound > 0.0:
            j += int(rng.geometric(bound)) - 1
            if j >= count:
                break
            cell = min(1.0, c * float(y_sorted[j]))
            if cell >= bound or rng.random() * bound < cell:
                hits.append(j)
            bound = cell
            j += 1
    if not hits:
        return _EMPTY_ROW
    row = order[np.asarray(hits, dtype=np.int64)]
    row.sort()
    return row


def sample_bipartite(attr_weights, actor_weights, norm, seed, workers=1):
    """Incidence rows (attribute -> sorted actor indices) for fixed weights.

    Pair (i, j) links independently with probability
    min{1, attr_weights[i] * actor_weights[j] / norm}.  Row i draws from
    its own stream keyed (seed, i), so output does not depend on workers.
    """
    xs = np.ascontiguousarray(attr_weights, dtype=float)
    ys = np.ascontiguousarray(actor_weights, dtype=float)
    if xs.ndim != 1 or ys.ndim != 1:
        raise ValidationError("weights must be one-dimensional")
    if xs.size == 0 or ys.size == 0:
        raise ValidationError("need at least one attribute and one actor")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValidationError("weights must be finite")
    if (xs < 0.0).any() or (ys < 0.0).any():
        raise ValidationError("weights must be nonnegative")
    if not (isinstance(norm, (int, float)) and math.isfinite(norm) and norm > 0):
        raise ValidationError("norm must be a positive finite number")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError("seed must be an integer")
    if not 0 <= seed < 1 << 64:
        raise ValidationError("seed must fit in 64 unsigned bits")
    if isinstance(workers, bool) or not isinstance(workers, (int, np.integer)):
        raise ValidationError("workers must be an integer")
    if workers < 1:
        raise ValidationError("workers must be >= 1")

    order = np.argsort(-ys, kind="stable")
    y_sorted = ys[order]
    neg_y_sorted = -y_sorted
    nm = float(norm)

    def chunk(span) -> list[np.ndarray]:
        stream = _RowStream()
        return [
            _sample_row(stream.use(seed, i), xs[i], y_sorted, neg_y_sorted, order, nm)
            for i in range(span.start, span.stop)
        ]

    if workers == 1 or xs.size == 1:
        return chunk(range(xs.size))
    bounds = np.linspace(0, xs.size, int(workers) * 4 + 1).astype(int)
    spans = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        rows: list[np.ndarray] = []
        for part in pool.map(chunk, spans):
            rows.extend(part)
        return rows


def _project(rows, n: int):
    """Actor adjacency lists from incidence rows, deduplicated and sorted."""
    grouped: list[list[np.ndarray]] = [[] for _ in range(n)]
    for row in rows:
        if row.size < 2:
            continue
        for pos in range(row.size):
            grouped[int(row[pos])].append(np.delete(row, pos))
    return [
        np.unique(np.concatenate(parts)) if parts else _EMPTY_ROW
        for parts in grouped
    ]


def sample_graph(config: RigConfig, workers: int = 1) -> GraphSample:
    """Sample one graph, refusing unaffordable requests before any work.

    The expected edge count is estimated from the weight means as
    min{n m, sqrt(n m) E[X] E[Y]}; requests above EDGE_BUDGET raise
    BudgetError carrying the estimate.  The projection likewise refuses
    once the realized rows imply more than PAIR_BUDGET ordered pairs.
    """
    if not isinstance(config, RigConfig):
        raise ValidationError("config must be a RigConfig")
    x_values, x_cdf, x_mean = _weight_table(config.attr_weights, "attribute")
    y_values, y_cdf, y_mean = _weight_table(config.actor_weights, "actor")
    norm = math.sqrt(config.n * config.m)
    estimate = min(float(config.n) * float(config.m), norm * x_mean * y_mean)
    if estimate > EDGE_BUDGET:
        raise BudgetError(
            f"expected about {estimate:.4g} links, over the {EDGE_BUDGET} budget; "
            "reduce n, m, or the weight means",
            estimate=estimate,
        )
    xs = _draw_weights(x_values, x_cdf, config.m, config.seed, _ATTR_STREAM)
    ys = _draw_weights(y_values, y_cdf, config.n, config.seed, _ACTOR_STREAM)
    rows = sample_bipartite(xs, ys, norm, config.seed, workers=workers)
    pairs = sum(r.size * (r.size - 1) for r in rows)
    if pairs > PAIR_BUDGET:
        raise BudgetError(
            f"projection would touch {pairs} ordered pairs, over the "
            f"{PAIR_BUDGET} budget",
            estimate=float(pairs),
        )
    adjacency = _project(rows, config.n)
    degrees = np.fromiter((a.size for a in adjacency), dtype=np.int64, count=config.n)
    return GraphSample(
        n=config.n,
        m=config.m,
        x_weights=xs,
        y_weights=ys,
        incidence=rows,
        adjacency=adjacency,
        degrees=degrees,
    )


def empirical_ck(sample: GraphSample, k) -> ClusteringEstimate:
    """Closed-wedge fraction among degree-k actors, one vote per actor.

    Each degree-k actor contributes its own fraction of adjacent neighbor
    pairs; the estimate is their mean and the error bar is the
    between-actor standard error.  No degree-k actor yields the empty
    estimate (vertex_count 0, NaN values).
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise ValidationError("k must be an integer")
    if k < 2:
        raise ValidationError("k must be >= 2")
    vertices = np.flatnonzero(sample.degrees == k)
    if vertices.size == 0:
        return ClusteringEstimate(k=int(k), c_hat=math.nan, stderr=math.nan, vertex_count=0)
    pair_count = k * (k - 1) / 2.0
    fractions = np.empty(vertices.size, dtype=float)
    for slot, v in enumerate(vertices):
        nbrs = sample.adjacency[v]
        closed = 0
        for u in nbrs:
            closed += np.intersect1d(
                nbrs, sample.adjacency[int(u)], assume_unique=True
            ).size
        fractions[slot] = closed / 2.0 / pair_count
    c_hat = float(fractions.mean())
    if vertices.size > 1:
        stderr = float(fractions.std(ddof=1) / math.sqrt(vertices.size))
    else:
        stderr = 0.0
    return ClusteringEstimate(
        k=int(k), c_hat=min(c_hat, 1.0), stderr=stderr, vertex_count=int(vertices.size)
    )


def degree_histogram(sample: GraphSample) -> LatticePmf:
    """Empirical actor-degree law of one sample as a lattice pmf."""
    counts = np.bincount(sample.degrees)
    return LatticePmf(
        offset=0,
        probs=counts / float(sample.n),
        label=f"degree-histogram(n={sample.n}, m={sample.m})",
    )


def average_degree_histogram(
    config: RigConfig, replicates: int, workers: int = 1
) -> LatticePmf:
    """Degree pmf averaged over independent samples at consecutive seeds.

    One sample at the configured sizes barely populates the upper degree
    range, so tail comparisons average the histogram over replicates
    seeded config.seed, config.seed + 1, ...  The result is the empirical
    degree law of replicates * n actors.
    """
    if isinstance(replicates, bool) or not isinstance(replicates, (int, np.integer)):
        raise ValidationError("replicates must be an integer")
    if replicates < 1:
        raise ValidationError("replicates must be >= 1")
    if config.seed + replicates > 1 << 64:
        raise ValidationError("seed range exceeds 64 bits")
    counts = np.zeros(1, dtype=np.int64)
    for step in range(int(replicates)):
        sample = sample_graph(replace(config, seed=config.seed + step), workers=workers)
        fresh = np.bincount(sample.degrees)
        if fresh.size > counts.size:
            fresh[: counts.size] += counts
            counts = fresh
        else:
            counts[: fresh.size] += fresh
    return LatticePmf(
        offset=0,
        probs=counts / float(config.n * replicates),
        label=(
            f"degree-histogram(n={config.n}, m={config.m}, "
            f"replicates={replicates})"
        ),
    )


def edge_lines(sample: GraphSample):
    """Projected edges as 0-indexed "u v" lines, each edge once (u < v)."""
    for u in range(sample.n):
        nbrs = sample.adjacency[u]
        for v in nbrs[nbrs > u]:
            yield f"{u} {int(v)}"


def degree_tail_slopes(empirical, model, total, lo=8, hi=64, min_count=5.0):
    """Tail-slope comparison between an empirical and a model degree law.

    Both pmfs are reduced to tail functions P(D >= k).  Bins are the k in
    [lo, hi] where the empirical tail keeps at least min_count of the
    `total` observations, and both slopes are fitted on those shared bins
    with the empirical tail counts as weights, so the comparison stays
    inside the measured range and thin bins cannot swing it.  Returns
    (empirical slope, model slope, bins).
    """
    from stopsum.clustering import loglog_slope

    if not 0 <= lo < hi:
        raise ValidationError("need 0 <= lo < hi")
    if total <= 0.0:
        raise ValidationError("total must be positive")
    width = hi + 2

    def tail_fn(law):
        if law.offset < 0:
            raise ValidationError("degree laws live on nonnegative integers")
        dense = np.zeros(max(width, law.offset + law.probs.size))
        dense[law.offset : law.offset + law.probs.size] = law.probs
        return dense[::-1].cumsum()[::-1][:width] + law.tail_right

    emp_tail = tail_fn(empirical)
    mod_tail = tail_fn(model)

    ks = np.array(
        [k for k in range(lo, hi + 1) if emp_tail[k] * total >= min_count],
        dtype=float,
    )
    if ks.size < 2:
        raise ValidationError(
            f"fewer than two bins in [{lo}, {hi}] hold {min_count} observations"
        )
    bins = ks.astype(int)
    counts = emp_tail[bins] * total
    emp_slope = loglog_slope(ks, emp_tail[bins], weights=counts)
    model_slope = loglog_slope(ks, mod_tail[bins], weights=counts)
    return emp_slope, model_slope, bins
