"""Exact brute-force references at tiny scale.

Everything here is deliberately naive: exhaustive enumeration with
incremental per-edge bookkeeping, exact big-integer binomials, and plain
Monte-Carlo.  These are the ground truth the analytic modules are tested
against, so clarity beats speed throughout.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .diagnostics import BudgetError, warn_regime
from .moments import ModelParams
from .simulator import (
    Coloring,
    CoreDecomposition,
    Hypergraph,
    cluster_size_log_bound,
    in_cluster,
    is_balanced,
    monochromatic_count,
    sample_hypergraph,
)

__all__ = [
    "ExactCounts",
    "ClusterEnumeration",
    "enumerate_colorings",
    "exact_expected_colorings",
    "enumerate_cluster",
    "partition_function",
    "log_partition_function",
    "empirical_first_moment",
    "tame_counts",
]

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class ExactCounts:
    """Exact coloring counts for one instance.

    ``by_class_profile`` maps each multiset of class sizes (as a descending
    tuple) to the number of proper colorings realizing it.  ``z_tame`` is
    filled only by :func:`tame_counts`.
    """

    z_q: int
    z_bal: int
    z_tame: int | None = None
    by_class_profile: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.z_bal <= self.z_q:
            raise ValueError(
                f"balanced count {self.z_bal} outside 0..{self.z_q}"
            )
        if self.z_tame is not None and not 0 <= self.z_tame <= self.z_bal:
            raise ValueError(
                f"tame count {self.z_tame} outside 0..{self.z_bal}"
            )


def _check_budget(q: int, n: int, budget: int) -> None:
    if q**n > budget:
        raise BudgetError(
            f"enumeration needs {q}**{n} = {q**n} states, over the budget of "
            f"{budget}; shrink n (or raise the budget explicitly)"
        )


def enumerate_colorings(
    h: Hypergraph,
    q: int,
    filter: str = "all",
    *,
    return_list: bool = False,
    budget: int = DEFAULT_BUDGET,
):
    """Exhaustively count proper colorings, with per-edge pruning.

    Assignment vectors are visited in colexicographic order (vertex 1
    varies fastest); each step updates only the counters of edges incident
    to the vertex being (un)assigned, and a branch is cut the moment an
    edge completes monochromatic.  Returns :class:`ExactCounts`, or
    ``(ExactCounts, colorings)`` when ``return_list`` is set — the list
    holds every proper coloring (``filter="all"``) or only the balanced
    ones (``filter="balanced"``), in visit order.
    """
    if filter not in ("all", "balanced"):
        raise ValueError(f'filter must be "all" or "balanced", got {filter!r}')
    _check_budget(q, h.n, budget)
    n, k = h.n, h.k
    edges = h.edges
    incident: list[list[int]] = [[] for _ in range(n + 1)]
    for ei, e in enumerate(edges):
        for v in e:
            incident[v].append(ei)
    assigned = [0] * len(edges)  # vertices of the edge colored so far
    first_color = [0] * len(edges)
    uniform = [True] * len(edges)
    class_sizes = [0] * (q + 1)
    assign = [0] * (n + 1)
    target = n / q
    slack = math.sqrt(n)

    z_q = 0
    z_bal = 0
    profiles: Counter = Counter()
    found: list[Coloring] = []

    def descend(v: int) -> None:
        nonlocal z_q, z_bal
        if v == 0:
            z_q += 1
            balanced = all(
                abs(class_sizes[j] - target) <= slack for j in range(1, q + 1)
            )
            if balanced:
                z_bal += 1
            profiles[tuple(sorted(class_sizes[1:], reverse=True))] += 1
            if return_list and (filter == "all" or balanced):
                found.append(Coloring(tuple(assign[1:]), q))
            return
        for c in range(1, q + 1):
            undo: list[tuple[int, bool]] = []
            dead = False
            for ei in incident[v]:
                undo.append((ei, uniform[ei]))
                assigned[ei] += 1
                if assigned[ei] == 1:
                    first_color[ei] = c
                elif uniform[ei] and first_color[ei] != c:
                    uniform[ei] = False
                if assigned[ei] == k and uniform[ei]:
                    dead = True  # the edge just completed monochromatic
            if not dead:
                assign[v] = c
                class_sizes[c] += 1
                descend(v - 1)
                class_sizes[c] -= 1
                assign[v] = 0
            for ei, was_uniform in reversed(undo):
                assigned[ei] -= 1
                uniform[ei] = was_uniform

    descend(n)
    counts = ExactCounts(z_q=z_q, z_bal=z_bal, by_class_profile=dict(profiles))
    if return_list:
        return counts, tuple(found)
    return counts


def _compositions(total: int, parts: int):
    """All ordered tuples of ``parts`` nonnegative integers summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def exact_expected_colorings(
    n: int,
    k: int,
    m: int,
    q: int,
    *,
    balanced_only: bool = False,
    max_n: int = 30,
) -> Fraction:
    """Exact expectation of the proper-coloring count over the m-edge model.

    Sums, over ordered class-size profiles, the multinomial number of maps
    with that profile times the exact hypergeometric probability that none
    of the m uniformly chosen edges is monochromatic:
    ``C(C(n,k) - sum_i C(n_i,k), m) / C(C(n,k), m)``.  Everything is exact
    integer/rational arithmetic.  ``balanced_only`` restricts the sum to
    balanced profiles (the expectation of the balanced count).
    """
    if n > max_n:
        raise BudgetError(
            f"n={n} exceeds the exact-binomial guard max_n={max_n}"
        )
    total_sets = comb(n, k)
    if m > total_sets:
        raise ValueError(f"m={m} exceeds the {total_sets} available edges")
    denominator = comb(total_sets, m)
    slack = math.sqrt(n)
    total = Fraction(0)
    for profile in _compositions(n, q):
        if balanced_only and any(
            abs(size - n / q) > slack for size in profile
        ):
            continue
        maps = math.factorial(n)
        for size in profile:
            maps //= math.factorial(size)
        valid = total_sets - sum(comb(size, k) for size in profile)
        total += maps * Fraction(comb(valid, m), denominator)
    return total


@dataclass(frozen=True)
class ClusterEnumeration:
    """The full cluster of a coloring, with the optional size comparison.

    ``log_size`` is ``ln`` of the member count; the bound fields are filled
    only when a core decomposition was supplied (``log_bound`` is the
    per-vertex bound, compared against ``log_size / n``).
    """

    colorings: tuple[Coloring, ...]
    log_size: float
    log_bound: float | None = None
    within_bound: bool | None = None


def enumerate_cluster(
    h: Hypergraph,
    sigma: Coloring,
    decomp: CoreDecomposition | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
) -> ClusterEnumeration:
    """All balanced proper colorings whose diagonal overlaps with ``sigma``
    all clear the stability threshold."""
    if monochromatic_count(h, sigma) > 0:
        raise ValueError("sigma is not a proper coloring of this hypergraph")
    if not is_balanced(sigma):
        raise ValueError("sigma is not balanced")
    _, balanced = enumerate_colorings(
        h, sigma.q, filter="balanced", return_list=True, budget=budget
    )
    members = tuple(
        tau for tau in balanced if in_cluster(sigma, tau, h.k)
    )
    log_size = math.log(len(members)) if members else -math.inf
    if decomp is None:
        return ClusterEnumeration(colorings=members, log_size=log_size)
    bound = cluster_size_log_bound(decomp, sigma.q, h.n)
    return ClusterEnumeration(
        colorings=members,
        log_size=log_size,
        log_bound=bound,
        within_bound=bool(log_size <= bound * h.n),
    )


def _monochromatic_histogram(
    h: Hypergraph, q: int, budget: int
) -> dict[int, int]:
    """Exact histogram of the monochromatic-edge count over all q^n maps."""
    _check_budget(q, h.n, budget)
    n, k = h.n, h.k
    edges = h.edges
    incident: list[list[int]] = [[] for _ in range(n + 1)]
    for ei, e in enumerate(edges):
        for v in e:
            incident[v].append(ei)
    assigned = [0] * len(edges)
    first_color = [0] * len(edges)
    uniform = [True] * len(edges)
    histogram: Counter = Counter()
    mono = 0

    def descend(v: int) -> None:
        nonlocal mono
        if v == 0:
            histogram[mono] += 1
            return
        for c in range(1, q + 1):
            undo: list[tuple[int, bool]] = []
            completed = 0
            for ei in incident[v]:
                undo.append((ei, uniform[ei]))
                assigned[ei] += 1
                if assigned[ei] == 1:
                    first_color[ei] = c
                elif uniform[ei] and first_color[ei] != c:
                    uniform[ei] = False
                if assigned[ei] == k and uniform[ei]:
                    completed += 1
            mono += completed
            descend(v - 1)
            mono -= completed
            for ei, was_uniform in reversed(undo):
                assigned[ei] -= 1
                uniform[ei] = was_uniform

    descend(n)
    return dict(histogram)


def partition_function(
    h: Hypergraph, q: int, beta: float, *, budget: int = DEFAULT_BUDGET
) -> float:
    """Soft-constraint sum over all q^n maps of exp(-beta * #monochromatic).

    Built from the exact integer histogram of monochromatic-edge counts, so
    beta = 0 returns q^n exactly and large beta degrades gracefully to the
    proper-coloring count.
    """
    histogram = _monochromatic_histogram(h, q, budget)
    return math.fsum(
        count * math.exp(-beta * mono) for mono, count in sorted(histogram.items())
    )


def log_partition_function(
    h: Hypergraph, q: int, beta: float, *, budget: int = DEFAULT_BUDGET
) -> float:
    """log of :func:`partition_function`, accumulated in log-domain (safe
    for beta large enough that every soft term underflows)."""
    histogram = _monochromatic_histogram(h, q, budget)
    terms = [
        math.log(count) - beta * mono for mono, count in histogram.items()
    ]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


@lru_cache(maxsize=8)
def _assignment_table(q: int, n: int) -> np.ndarray:
    """All q^n assignment vectors as a (q^n, n) int8 array, colex order."""
    states = q**n
    table = np.empty((states, n), dtype=np.int8)
    idx = np.arange(states)
    for v in range(n):
        table[:, v] = (idx // q**v) % q + 1
    return table


def empirical_first_moment(
    p: ModelParams, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the proper-coloring count
    over independent uniform m-edge instances.

    Per-instance counting is vectorized: each possible edge contributes a
    precomputed monochromatic mask over all q^n assignments, and an
    instance's count is the number of assignments avoiding all its masks.
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    if p.n is None:
        raise ValueError("empirical first moment needs n in the parameters")
    n, k, q, m = p.n, p.k, p.q, p.m
    if q**n > 4_000_000:
        raise BudgetError(
            f"{q}**{n} assignments is too large for the tabulated counter"
        )
    table = _assignment_table(q, n)
    mono_masks: dict[tuple[int, ...], np.ndarray] = {}

    def mask_for(edge: tuple[int, ...]) -> np.ndarray:
        got = mono_masks.get(edge)
        if got is None:
            cols = table[:, np.asarray(edge) - 1]
            got = (cols == cols[:, :1]).all(axis=1)
            mono_masks[edge] = got
        return got

    counts = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        instance = sample_hypergraph(n, k, m, rng)
        bad = np.zeros(table.shape[0], dtype=bool)
        for edge in instance.edges:
            bad |= mask_for(edge)
        counts[t] = table.shape[0] - int(bad.sum())
    mean = float(counts.mean())
    std_error = float(counts.std(ddof=1) / math.sqrt(trials))
    return mean, std_error


def tame_counts(
    h: Hypergraph, q: int, *, budget: int = DEFAULT_BUDGET
) -> ExactCounts:
    """Count colorings passing all three tameness conditions.

    A balanced proper coloring qualifies when additionally (a) no other
    balanced proper coloring produces an overlap entry inside the
    separability window, and (b) its cluster is no larger than the exact
    expectation of the balanced-coloring count at this edge count.  The
    expectation threshold is used bare — the unspecified constant factors
    around it are dropped, which a warning records.
    """
    from .polytope import overlap_of, separability_window

    warn_regime(
        "tame-threshold-bare",
        "cluster-size condition compares against the bare expected balanced "
        "count; unspecified constant factors are dropped",
    )
    counts, balanced = enumerate_colorings(
        h, q, filter="balanced", return_list=True, budget=budget
    )
    lo, hi, _ = separability_window(q, h.k)
    threshold = exact_expected_colorings(h.n, h.k, h.m, q, balanced_only=True)
    z_tame = 0
    for sigma in balanced:
        separable = True
        for tau in balanced:
            a = overlap_of(sigma, tau).entries
            if bool(((a > lo) & (a < hi)).any()):
                separable = False
                break
        if not separable:
            continue
        cluster = sum(
            1 for tau in balanced if in_cluster(sigma, tau, h.k)
        )
        if cluster <= threshold:
            z_tame += 1
    return ExactCounts(
        z_q=counts.z_q,
        z_bal=counts.z_bal,
        z_tame=z_tame,
        by_class_profile=counts.by_class_profile,
    )
