"""Random and planted hypergraphs, colorings, occurrence statistics, and the
three-stage core construction with its free-vertex bookkeeping.

Vertices are ``1..n`` and colors ``1..q`` throughout.  Everything that
samples takes an explicit ``numpy.random.Generator``; all result types are
immutable, so identical seeds give identical objects.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .diagnostics import warn_regime
from .moments import ModelParams, stability_constant
from .polytope import overlap_of, separability_window

__all__ = [
    "Hypergraph",
    "Coloring",
    "CoreThresholds",
    "CoreDecomposition",
    "SeparabilityReport",
    "sample_hypergraph",
    "planted_edge_probability",
    "sample_planted",
    "is_proper",
    "monochromatic_count",
    "is_balanced",
    "balanced_coloring",
    "random_coloring",
    "edge_count_m",
    "extract_core",
    "in_cluster",
    "cluster_size_log_bound",
    "separability_scan",
]


@dataclass(frozen=True)
class Hypergraph:
    """A simple k-uniform hypergraph on vertices ``1..n``.

    Edges are strictly increasing k-tuples; construction normalizes the
    order and rejects duplicate edges or out-of-range vertices.
    """

    n: int
    k: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"edge arity k={self.k} must be at least 2")
        if self.n < self.k:
            raise ValueError(f"need n >= k, got n={self.n}, k={self.k}")
        edges = self.edges
        cleaned = []
        for e in edges:
            if len(e) != self.k:
                raise ValueError(f"edge {e!r} does not have arity {self.k}")
            t = tuple(int(v) for v in e)
            prev = 0
            for v in t:
                if v <= prev:  # unsorted or repeated vertex
                    t = tuple(sorted(set(t)))
                    if len(t) != self.k:
                        raise ValueError(f"edge {e!r} has repeated vertices")
                    break
                prev = v
            if t[0] < 1 or t[-1] > self.n:
                raise ValueError(f"edge {e!r} has vertices outside 1..{self.n}")
            cleaned.append(t)
        if len(set(cleaned)) != len(cleaned):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", tuple(cleaned))

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        """Edges as an (m, k) integer array (empty-safe)."""
        if not self.edges:
            return np.empty((0, self.k), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)


@lru_cache(maxsize=256)
def _class_sizes(assignment: tuple[int, ...], q: int) -> tuple[int, ...]:
    counts = [0] * q
    for v in assignment:
        counts[v - 1] += 1
    return tuple(counts)


@dataclass(frozen=True)
class Coloring:
    """An assignment of colors ``1..q`` to vertices ``1..n``."""

    assignment: tuple[int, ...]
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q={self.q} must be positive")
        object.__setattr__(
            self, "assignment", tuple(int(v) for v in self.assignment)
        )
        for v in self.assignment:
            if not 1 <= v <= self.q:
                raise ValueError(f"color {v} outside 1..{self.q}")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def class_sizes(self) -> tuple[int, ...]:
        """Size of each color class, indexed by color - 1."""
        return _class_sizes(self.assignment, self.q)

    def class_members(self, j: int) -> frozenset[int]:
        return frozenset(
            v for v, col in enumerate(self.assignment, start=1) if col == j
        )

    def overlap(self, other: "Coloring"):
        return overlap_of(self, other)


def is_balanced(sigma: Coloring) -> bool:
    """Every class size within sqrt(n) of n/q."""
    n = sigma.n
    bound = math.sqrt(n)
    return all(abs(size - n / sigma.q) <= bound for size in sigma.class_sizes())


def balanced_coloring(n: int, q: int) -> Coloring:
    """The round-robin coloring 1,2,..,q,1,2,.. (class sizes differ by <= 1)."""
    return Coloring(tuple(1 + (i % q) for i in range(n)), q)


def random_coloring(n: int, q: int, rng: np.random.Generator) -> Coloring:
    return Coloring(tuple(int(x) for x in rng.integers(1, q + 1, size=n)), q)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _sample_distinct_ksets(
    n: int,
    k: int,
    count: int,
    rng: np.random.Generator,
    colors: np.ndarray | None = None,
) -> np.ndarray:
    """First ``count`` distinct sorted k-sets from an i.i.d. uniform stream.

    Taking the first distinct values of an exchangeable stream yields a
    uniformly random ``count``-subset.  When ``colors`` is given (array
    indexed by vertex id), monochromatic sets are excluded from the stream,
    so the result is uniform over non-monochromatic k-sets.  Returns a
    (count, k) array of row-sorted vertex ids, in draw order.
    """
    if count == 0:
        return np.empty((0, k), dtype=np.int64)
    use_codes = (n + 1) ** k < 2**62
    chunks: list[np.ndarray] = []
    have = 0
    seen_codes = np.empty(0, dtype=np.int64)
    seen_set: set[tuple[int, ...]] = set()
    while have < count:
        need = count - have
        batch = max(64, int(need * 1.15) + 8)
        draw = rng.integers(1, n + 1, size=(batch, k), dtype=np.int64)
        rows = np.sort(draw, axis=1)
        ok = (np.diff(rows, axis=1) > 0).all(axis=1)
        if colors is not None:
            cols = colors[rows]
            ok &= ~(cols == cols[:, :1]).all(axis=1)
        rows = rows[ok]
        if rows.shape[0] == 0:
            continue
        if use_codes:
            codes = rows[:, 0].copy()
            for col in range(1, k):
                codes = codes * (n + 1) + rows[:, col]
            _, first = np.unique(codes, return_index=True)
            order = np.sort(first)
            rows, codes = rows[order], codes[order]
            fresh = ~np.isin(codes, seen_codes)
            rows, codes = rows[fresh], codes[fresh]
            seen_codes = np.concatenate([seen_codes, codes])
            chunks.append(rows)
            have += rows.shape[0]
        else:  # k-sets too large to encode; fall back to hashing tuples
            keep = []
            for r, row in enumerate(map(tuple, rows.tolist())):
                if row not in seen_set:
                    seen_set.add(row)
                    keep.append(r)
            chunks.append(rows[keep])
            have += len(keep)
    return np.concatenate(chunks, axis=0)[:count]


def _trusted_hypergraph(n: int, k: int, rows: np.ndarray) -> Hypergraph:
    """Build a Hypergraph from sampler output, skipping re-validation.

    ``rows`` must already be distinct row-sorted k-sets in range — exactly
    what :func:`_sample_distinct_ksets` produces.  Rows are put into
    lexicographic order so equal edge sets compare equal.
    """
    if rows.shape[0]:
        rows = rows[np.lexsort(rows.T[::-1])]
    h = Hypergraph.__new__(Hypergraph)
    object.__setattr__(h, "n", n)
    object.__setattr__(h, "k", k)
    object.__setattr__(h, "edges", tuple(map(tuple, rows.tolist())))
    return h


def sample_hypergraph(
    n: int, k: int, m: int, rng: np.random.Generator
) -> Hypergraph:
    """Uniformly random set of exactly ``m`` distinct k-subsets of ``1..n``."""
    total = comb(n, k)
    if m > total:
        raise ValueError(f"m={m} exceeds the {total} available edges")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if total <= 200_000:
        from itertools import combinations

        population = list(combinations(range(1, n + 1), k))
        idx = rng.choice(total, size=m, replace=False)
        rows = (
            np.asarray([population[i] for i in idx], dtype=np.int64)
            if m
            else np.empty((0, k), dtype=np.int64)
        )
    else:
        rows = _sample_distinct_ksets(n, k, m, rng)
    return _trusted_hypergraph(n, k, rows)


def _planted_denominator(n: int, k: int, sigma: Coloring) -> int:
    return comb(n, k) - sum(comb(size, k) for size in sigma.class_sizes())


def planted_edge_probability(p: ModelParams, sigma: Coloring) -> float:
    """Per-edge inclusion probability making the expected edge count c*n."""
    if p.n is None:
        raise ValueError("planted model needs n in the parameters")
    if sigma.n != p.n or sigma.q != p.q:
        raise ValueError(
            f"coloring has (n={sigma.n}, q={sigma.q}), "
            f"params say (n={p.n}, q={p.q})"
        )
    if not is_balanced(sigma):
        warn_regime(
            "planted-unbalanced",
            "planting on an unbalanced coloring; the c*n edge-count identity "
            "assumes near-equal classes",
        )
    denom = _planted_denominator(p.n, p.k, sigma)
    if denom <= 0:
        raise ValueError("no non-monochromatic k-set exists for this coloring")
    prob = p.c * p.n / denom
    if prob > 1.0:
        raise ValueError(
            f"edge probability {prob:.4f} exceeds 1: density c={p.c} too high "
            f"for n={p.n}"
        )
    return prob


def sample_planted(
    p: ModelParams, sigma: Coloring, rng: np.random.Generator
) -> Hypergraph:
    """Include every non-monochromatic k-set independently with the planted
    probability (realized as a binomial count plus a uniform distinct
    sample, which is the same process).  Never emits an edge monochromatic
    under ``sigma``."""
    prob = planted_edge_probability(p, sigma)
    denom = _planted_denominator(p.n, p.k, sigma)
    count = int(rng.binomial(denom, prob))
    colors = np.zeros(p.n + 1, dtype=np.int64)
    colors[1:] = sigma.assignment
    rows = _sample_distinct_ksets(p.n, p.k, count, rng, colors=colors)
    return _trusted_hypergraph(p.n, p.k, rows)


# ---------------------------------------------------------------------------
# coloring predicates and counts
# ---------------------------------------------------------------------------

def monochromatic_count(h: Hypergraph, tau: Coloring) -> int:
    """Number of edges with all vertices the same color under ``tau``."""
    if tau.n != h.n:
        raise ValueError(f"coloring covers {tau.n} vertices, hypergraph has {h.n}")
    arr = h.edge_array()
    if arr.shape[0] == 0:
        return 0
    colors = np.asarray(tau.assignment, dtype=np.int64)[arr - 1]
    return int((colors == colors[:, :1]).all(axis=1).sum())


def is_proper(h: Hypergraph, sigma: Coloring) -> bool:
    return monochromatic_count(h, sigma) == 0


def edge_count_m(h: Hypergraph, alpha: int, X1, X2, X3=None) -> int:
    """Edges with a pivot in X1, alpha witnesses in X2, and the rest in X3.

    Counts edges ``e`` admitting some ``x`` in ``e & X1`` and ``alpha``
    distinct vertices of X2 among ``e - {x}`` whose complement within
    ``e - {x}`` lies in X3.  For ``alpha = k-1`` the X3 argument is ignored
    (there is nothing left over).  Each edge counts once however many
    pivots qualify.  Plain per-edge scan; meant for small instances and
    spot checks, not bulk pipelines.
    """
    if not 1 <= alpha <= h.k:
        raise ValueError(f"alpha={alpha} outside 1..{h.k}")
    s1 = {X1} if isinstance(X1, int) else set(X1)
    s2 = {X2} if isinstance(X2, int) else set(X2)
    ignore_x3 = alpha == h.k - 1
    s3 = set() if X3 is None else (set((X3,)) if isinstance(X3, int) else set(X3))
    count = 0
    for e in h.edges:
        es = set(e)
        for x in es & s1:
            rest = es - {x}
            if ignore_x3:
                if len(rest & s2) >= alpha:
                    count += 1
                    break
                continue
            out = rest - s3
            if len(out) <= alpha and out <= s2 and (
                len(rest & s2 & s3) >= alpha - len(out)
            ):
                count += 1
                break
    return count


# ---------------------------------------------------------------------------
# the core construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoreThresholds:
    """Occurrence thresholds for the three construction stages.

    ``blocked_min`` is exposed for completeness but not consumed by any
    predicate here (a vertex is blocked in a color as soon as one fully
    supported edge exists).
    """

    t_w: float
    t_u: float
    t_z: float
    t_core: float
    blocked_min: float = 15.0

    @classmethod
    def defaults(cls, k: int) -> "CoreThresholds":
        return cls(t_w=300.0 * k, t_u=100.0 * k, t_z=100.0 * k, t_core=100.0 * k)

    @classmethod
    def scaled(cls, k: int, factor: float) -> "CoreThresholds":
        """Defaults divided by ``factor`` (keeps the t_w >= t_u + t_z + t_core
        relation that makes the containment property deterministic)."""
        base = cls.defaults(k)
        return cls(
            t_w=base.t_w / factor,
            t_u=base.t_u / factor,
            t_z=base.t_z / factor,
            t_core=base.t_core / factor,
            blocked_min=base.blocked_min / factor,
        )


@dataclass(frozen=True, eq=False)
class CoreDecomposition:
    """Everything the construction produces on one colored instance.

    ``w_ij[(i, j)]`` holds the class-i vertices with few fully-j-colored
    edges; ``w``, ``u``, ``z`` are the stage unions; ``core`` is the
    greatest fixed point of the support inequality; the ``a*`` sets collect
    degenerate vertices and ``f1``/``f2`` the 1-free and 2-free ones.
    """

    w_ij: dict
    w: frozenset
    u: frozenset
    z: frozenset
    core: frozenset
    a0: frozenset
    a00: frozenset
    az: frozenset
    aw: frozenset
    f1: frozenset
    f2: frozenset
    thresholds: CoreThresholds


def extract_core(
    h: Hypergraph, sigma: Coloring, thresholds: CoreThresholds | None = None
) -> CoreDecomposition:
    """Run the full construction: W from raw support counts, U from W-contact
    counts, Z as the contact closure of U, the core by peeling, then the
    degenerate and free vertex sets.

    The closure adds one vertex at a time (lowest id among the currently
    eligible, so the result is reproducible) and all contact counts are
    maintained incrementally — they only ever grow as Z grows.
    """
    if sigma.n != h.n:
        raise ValueError(f"coloring covers {sigma.n} vertices, hypergraph has {h.n}")
    n, k, q = h.n, h.k, sigma.q
    th = thresholds if thresholds is not None else CoreThresholds.defaults(k)
    colors = np.zeros(n + 1, dtype=np.int64)
    colors[1:] = sigma.assignment
    earr = h.edge_array()
    n_edges = earr.shape[0]
    ecols = colors[earr] if n_edges else np.empty((0, k), dtype=np.int64)

    # support[e, pivot] = j when the edge minus its pivot is entirely color j
    support = np.zeros((n_edges, k), dtype=np.int64)
    base_count = np.zeros((n + 1, q + 1), dtype=np.int64)
    for pi in range(k):
        rest = np.delete(ecols, pi, axis=1)
        mono = (rest == rest[:, :1]).all(axis=1)
        support[:, pi] = np.where(mono, rest[:, 0] if k > 1 else 0, 0)
        sel = support[:, pi] > 0
        np.add.at(base_count, (earr[sel, pi], support[sel, pi]), 1)

    # CR1 — scarce support
    w_ij: dict[tuple[int, int], frozenset[int]] = {}
    vert_colors = colors[1:]
    ids = np.arange(1, n + 1)
    for i in range(1, q + 1):
        in_i = vert_colors == i
        for j in range(1, q + 1):
            if i == j:
                continue
            members = ids[in_i & (base_count[1:, j] < th.t_w)]
            w_ij[(i, j)] = frozenset(int(v) for v in members)
    w_class_mask = np.zeros(n + 1, dtype=bool)
    for members in w_ij.values():
        for v in members:
            w_class_mask[v] = True
    w_set = frozenset(int(v) for v in ids[w_class_mask[1:]])

    # CR2 — heavy contact with W: count support edges touching W in the
    # supporting class
    w_any_count = np.zeros((n + 1, q + 1), dtype=np.int64)
    if n_edges:
        w_arr = w_class_mask[earr]
        w_sum = w_arr.sum(axis=1)
        for pi in range(k):
            touching = (w_sum - w_arr[:, pi]) > 0
            sel = (support[:, pi] > 0) & touching
            np.add.at(w_any_count, (earr[sel, pi], support[sel, pi]), 1)
    u_mask = np.zeros(n + 1, dtype=bool)
    for j in range(1, q + 1):
        u_mask[1:] |= (vert_colors != j) & (w_any_count[1:, j] > th.t_u)
    u_set = frozenset(int(v) for v in ids[u_mask[1:]])

    # CR3 — closure: z_count[v, j] = contact count of v with Z inside class j
    z_mask = u_mask.copy()
    z_count = np.zeros((n + 1, q + 1), dtype=np.int64)
    out_of_class = np.zeros((n_edges, k, q + 1), dtype=np.int8)
    qualified = np.zeros((n_edges, k, q + 1), dtype=bool)
    incident: list[list[int]] = [[] for _ in range(n + 1)]
    if n_edges:
        for ei, e in enumerate(h.edges):
            for v in e:
                incident[v].append(ei)
        z_arr = z_mask[earr]
        z_sum = z_arr.sum(axis=1)
        for j in range(1, q + 1):
            in_j = ecols == j
            in_j_sum = in_j.sum(axis=1)
            zj = z_arr & in_j
            zj_sum = zj.sum(axis=1)
            for pi in range(k):
                b_in_j = in_j_sum - in_j[:, pi]
                out = (k - 1) - b_in_j
                out_of_class[:, pi, j] = out
                b_z_in = zj_sum - zj[:, pi]
                b_z_out = (z_sum - z_arr[:, pi]) - b_z_in
                qual = ((out == 0) & (b_z_in + b_z_out > 0)) | (
                    (out == 1) & (b_z_out > 0)
                )
                qualified[:, pi, j] = qual
                sel = qual
                np.add.at(z_count, (earr[sel, pi], j), 1)

    def _eligible(v: int) -> bool:
        if z_mask[v]:
            return False
        own = colors[v]
        return any(
            z_count[v, j] > th.t_z for j in range(1, q + 1) if j != own
        )

    heap = [int(v) for v in ids if _eligible(v)]
    heapq.heapify(heap)
    while heap:
        u_vert = heapq.heappop(heap)
        if z_mask[u_vert] or not _eligible(u_vert):
            continue
        z_mask[u_vert] = True
        cu = colors[u_vert]
        for ei in incident[u_vert]:
            edge = h.edges[ei]
            for pi, v in enumerate(edge):
                if v == u_vert:
                    continue
                for j in range(1, q + 1):
                    if qualified[ei, pi, j]:
                        continue
                    out = out_of_class[ei, pi, j]
                    if (out == 0 and cu == j) or (out == 1 and cu != j):
                        qualified[ei, pi, j] = True
                        z_count[v, j] += 1
                        if (
                            j != colors[v]
                            and not z_mask[v]
                            and z_count[v, j] > th.t_z
                        ):
                            heapq.heappush(heap, int(v))
    z_set = frozenset(int(v) for v in ids[z_mask[1:]])

    # core — greatest fixed point by peeling with a work queue
    alive = np.zeros(n + 1, dtype=bool)
    alive[1:] = True
    core_count = base_count.copy()
    b_alive = np.full((n_edges, k), k - 1, dtype=np.int64)

    def _dies(v: int) -> bool:
        own = colors[v]
        return any(
            core_count[v, j] < th.t_core for j in range(1, q + 1) if j != own
        )

    pending = [int(v) for v in ids if _dies(v)]
    queued = np.zeros(n + 1, dtype=bool)
    for v in pending:
        queued[v] = True
    while pending:
        v = pending.pop()
        alive[v] = False
        for ei in incident[v]:
            edge = h.edges[ei]
            for pi, wv in enumerate(edge):
                if wv == v:
                    continue
                b_alive[ei, pi] -= 1
                if b_alive[ei, pi] == k - 2:  # just lost full support
                    col = support[ei, pi]
                    if col > 0:
                        core_count[wv, col] -= 1
                        if (
                            alive[wv]
                            and not queued[wv]
                            and col != colors[wv]
                            and core_count[wv, col] < th.t_core
                        ):
                            queued[wv] = True
                            pending.append(int(wv))
    core_set = frozenset(int(v) for v in ids[alive[1:]])

    # degenerate vertex sets (full graph, not the core)
    a_members = np.zeros(n + 1, dtype=np.int64)
    a0_mask = np.zeros(n + 1, dtype=bool)
    for i in range(1, q + 1):
        m_i = (vert_colors != i) & (base_count[1:, i] == 0)
        a0_mask[1:] |= m_i
        a_members[1:] += m_i
    a0 = frozenset(int(v) for v in ids[a0_mask[1:]])
    a00 = frozenset(int(v) for v in ids[a_members[1:] >= 2])

    za_count = np.zeros((n + 1, q + 1), dtype=np.int64)
    if n_edges:
        z_arr = z_mask[earr]
        z_sum = z_arr.sum(axis=1)
        for pi in range(k):
            touching = (z_sum - z_arr[:, pi]) > 0
            sel = (support[:, pi] > 0) & touching
            np.add.at(za_count, (earr[sel, pi], support[sel, pi]), 1)
    az_mask = np.zeros(n + 1, dtype=bool)
    for j in range(1, q + 1):
        az_mask[1:] |= (vert_colors != j) & (za_count[1:, j] > 0)
    az = frozenset(int(v) for v in ids[az_mask[1:]])

    aw_mask = np.zeros(n + 1, dtype=bool)
    for j in range(1, q + 1):
        clean = base_count[1:, j] - w_any_count[1:, j]  # supports avoiding W
        aw_mask[1:] |= (vert_colors != j) & (clean == 0)
    aw = frozenset(int(v) for v in ids[aw_mask[1:] & ~a0_mask[1:]])

    # blocked colors and free vertices
    blocked = np.zeros((n + 1, q + 1), dtype=bool)
    if n_edges:
        full = b_alive == (k - 1)
        for pi in range(k):
            sel = (support[:, pi] > 0) & full[:, pi]
            blocked[earr[sel, pi], support[sel, pi]] = True
    unblocked = q - blocked[1:, 1:].sum(axis=1)
    f1 = frozenset(int(v) for v in ids[unblocked >= 2])
    f2 = frozenset(int(v) for v in ids[unblocked >= 3])

    return CoreDecomposition(
        w_ij=w_ij,
        w=w_set,
        u=u_set,
        z=z_set,
        core=core_set,
        a0=a0,
        a00=a00,
        az=az,
        aw=aw,
        f1=f1,
        f2=f2,
        thresholds=th,
    )


# ---------------------------------------------------------------------------
# clusters
# ---------------------------------------------------------------------------

def in_cluster(sigma: Coloring, tau: Coloring, k: int) -> bool:
    """True iff every diagonal overlap entry clears the stability threshold."""
    if not is_balanced(tau):
        warn_regime(
            "cluster-unbalanced",
            "cluster membership queried for an unbalanced coloring",
        )
    a = overlap_of(sigma, tau)
    diag = np.diag(a.entries)
    return bool(np.min(diag) > stability_constant(k) / sigma.q)


def cluster_size_log_bound(decomp: CoreDecomposition, q: int, n: int) -> float:
    """Per-vertex log of the free-vertex cluster bound 2^{|F1 minus (F2|AW)|} q^{|F2|AW|}."""
    heavy = decomp.f2 | decomp.aw
    light = decomp.f1 - heavy
    return (len(light) * math.log(2) + len(heavy) * math.log(q)) / n


@dataclass(frozen=True)
class SeparabilityReport:
    """Window violations across a family of colorings.

    ``violations`` rows are ``(tau_index, i, j, value)``; ``rejected`` rows
    are ``(tau_index, reason)`` for colorings that were not proper balanced
    colorings to begin with.  ``window`` is the open interval checked and
    ``clamped`` records whether its upper end was pulled down to 1/q.
    """

    violations: tuple[tuple[int, int, int, float], ...]
    rejected: tuple[tuple[int, str], ...]
    window: tuple[float, float]
    clamped: bool
    checked: int

    @property
    def separable(self) -> bool:
        return not self.violations


def separability_scan(h: Hypergraph, sigma: Coloring, taus) -> SeparabilityReport:
    """Report every overlap entry of (sigma, tau) inside the forbidden window."""
    lo, hi, clamped = separability_window(sigma.q, h.k)
    violations: list[tuple[int, int, int, float]] = []
    rejected: list[tuple[int, str]] = []
    checked = 0
    for idx, tau in enumerate(taus):
        if monochromatic_count(h, tau) > 0:
            rejected.append((idx, "not a proper coloring"))
            continue
        if not is_balanced(tau):
            rejected.append((idx, "not balanced"))
            continue
        checked += 1
        a = overlap_of(sigma, tau).entries
        for i in range(sigma.q):
            for j in range(sigma.q):
                v = float(a[i, j])
                if lo < v < hi:
                    violations.append((idx, i + 1, j + 1, v))
    return SeparabilityReport(
        violations=tuple(violations),
        rejected=tuple(rejected),
        window=(lo, hi),
        clamped=clamped,
        checked=checked,
    )
