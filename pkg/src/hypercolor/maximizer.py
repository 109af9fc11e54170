"""Multistart search for the maximum of the rate function over overlap domains.

The strategy is ordinary numerical optimization: many independent
projected-gradient ascents from random feasible points, interleaved with
row-averaging moves wherever :func:`~hypercolor.polytope.averaging_condition`
licenses them, reduced deterministically (max by value, exact ties broken by
lexicographic matrix comparison).  Nothing here certifies a global optimum;
each report pairs the empirical maximum with the closed-form comparison
values it is expected to track.

For the stability-restricted domains the large entries are pinned to the
leading diagonal without loss of generality -- the rate is invariant under
row and column permutations -- and the ascent moves only the complementary
block, restarting whenever a step leaves the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import ProjectionError
from .moments import ModelParams, flat_rate, s_stable_rate, stable_rate
from .polytope import (
    DEFAULT_TOL,
    DomainKind,
    DomainTag,
    OverlapMatrix,
    _sinkhorn,
    averaging_condition,
    averaging_exponent_window,
    random_point_in_D,
    random_point_in_tame,
    separability_window,
)

__all__ = [
    "SearchConfig",
    "MaximizationReport",
    "CondensationReport",
    "maximize",
    "directional_derivative",
    "s_stable_gap_table",
    "condensation_witness",
]

_ENTRY_FLOOR = 1e-300
_MIN_STEP = 1e-18


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for :func:`maximize`.

    ``starts`` independent ascents; each stops when the projected-gradient
    norm drops below ``grad_tol``, when no strictly improving step exists,
    or after ``max_steps`` accepted steps.  Backtracking halves the step
    from ``step_init``.  Deterministic for a fixed ``seed``.
    """

    starts: int = 200
    max_steps: int = 10_000
    step_init: float = 0.1
    grad_tol: float = 1e-10
    seed: int = 0
    membership_tol: float = DEFAULT_TOL
    max_restarts_per_start: int = 5
    flatten_period: int = 20
    projection_iterations: int = 100_000
    projection_tol: float = 1e-12


@dataclass(frozen=True)
class MaximizationReport:
    """Outcome of one multistart maximization.

    ``gap`` is ``best_value - flat_value`` exactly.  ``per_s_results`` rows
    are ``(s, best value found over the s-stable slice, comparator)`` where
    the comparator is ``F(flat(s)) + q**(0.999 - k)``; the list is populated
    for the tame domain (one row per stability index) and for a single
    stability-restricted domain (one row), and empty otherwise.  A ``nan``
    best value marks a slice the sampler could not populate.
    """

    domain: DomainTag
    best_point: OverlapMatrix
    best_value: float
    flat_value: float
    gap: float
    starts: int
    converged_starts: int
    membership_restarts: int
    per_s_results: tuple[tuple[int, float, float], ...] = ()


class _BlockAscent:
    """Projected ascent over the free block of a (possibly pinned) matrix.

    ``s`` leading diagonal entries are frozen at 1/q (s = 0 means the whole
    matrix is free); the remaining (q-s) x (q-s) block carries the search.
    """

    def __init__(
        self,
        p: ModelParams,
        s: int,
        *,
        columns: bool,
        restrict_stability: bool,
        config: SearchConfig,
    ):
        self.q, self.k, self.c = p.q, p.k, p.c
        self.params = p
        self.s = s
        self.block = self.q - s
        self.columns = columns
        self.restrict_stability = restrict_stability
        self.cfg = config
        self.g_const = 1.0 - 2.0 * float(self.q) ** (1 - self.k)
        self.h_fixed = s * math.log(self.q) / self.q
        self.p_fixed = s * float(self.q) ** (-self.k)
        self.stab_lo, _, _ = separability_window(self.q, self.k)
        if self.q >= 3:
            mu_lo, mu_hi = averaging_exponent_window(self.q)
            self.flatten_active = mu_lo <= mu_hi
        else:
            # the exponent window is undefined below q = 3
            self.flatten_active = False

    # -- objective ---------------------------------------------------------

    def value(self, sub: np.ndarray) -> float:
        positive = sub[sub > 0.0]
        h = self.h_fixed - float(np.sum(positive * np.log(positive)))
        p_sum = self.p_fixed + float(np.sum(positive**self.k))
        return h + self.c * math.log(self.g_const + p_sum)

    def projected_gradient(self, sub: np.ndarray) -> np.ndarray:
        p_sum = self.p_fixed + float(np.sum(sub**self.k))
        g = -(1.0 + np.log(sub)) + (
            self.c * self.k * sub ** (self.k - 1) / (self.g_const + p_sum)
        )
        g = g - g.mean(axis=1, keepdims=True)
        if self.columns:
            g = g - g.mean(axis=0, keepdims=True) + g.mean()
        return g

    # -- feasibility -------------------------------------------------------

    def project(self, sub: np.ndarray) -> np.ndarray:
        sub = np.maximum(sub, _ENTRY_FLOOR)
        if not self.columns:
            return sub / (self.q * sub.sum(axis=1, keepdims=True))
        x, residual = _sinkhorn(
            sub, self.cfg.projection_iterations, self.cfg.projection_tol
        )
        if residual > self.cfg.membership_tol:
            raise ProjectionError(
                f"projection stalled at residual {residual:.3e}", residual
            )
        return x * (self.block / self.q)

    def in_domain(self, sub: np.ndarray) -> bool:
        if not self.restrict_stability:
            return True
        # every above-threshold entry is pinned, so the block must stay at
        # or below the stability threshold (which also keeps it clear of the
        # separability window)
        return bool(np.max(sub) <= self.stab_lo)

    def assemble(self, sub: np.ndarray) -> np.ndarray:
        if self.s == 0:
            return sub.copy()
        arr = np.zeros((self.q, self.q))
        arr[np.arange(self.s), np.arange(self.s)] = 1.0 / self.q
        arr[self.s :, self.s :] = sub
        return arr

    # -- the averaging pass --------------------------------------------------

    def flatten_pass(
        self, sub: np.ndarray, current: float
    ) -> tuple[np.ndarray, float]:
        """Average each row over the largest certified column set, if any.

        A no-op whenever the admissible exponent window is empty.  Applied
        moves are re-checked against the public predicate, reprojected, and
        kept only if the rate strictly improves.
        """
        if not self.flatten_active:
            return sub, current
        q, k = self.q, self.k
        lnq = math.log(q)
        llq = math.log(lnq)
        arr = sub.copy()
        moved = False
        for i in range(self.block):
            row = arr[i]
            order = np.argsort(row)
            for size in range(self.block, 1, -1):
                mu = min(1.0, math.log(size) / lnq)
                if mu < 3.0 * llq / lnq:
                    break
                bound = 0.995 / (k * float(q) ** (k - 1)) * (mu - llq / lnq)
                J = order[:size]
                if float(row[J].max()) ** (k - 1) < bound:
                    full = self.assemble(arr)
                    if not averaging_condition(
                        full, i + self.s, [int(j) + self.s for j in J], mu, self.params
                    ):  # pragma: no cover - the prefix scan mirrors the predicate
                        break
                    row[J] = row[J].mean()
                    moved = True
                    break
        if not moved:
            return sub, current
        # The no-decrease guarantee for averaging is asymptotic in q; at
        # small q a certified move can still lose a little.  Treat the pass
        # as a proposal: keep it only when it strictly improves.
        try:
            candidate = self.project(arr)
        except (ProjectionError, ValueError):  # pragma: no cover - defensive
            return sub, current
        improved = self.value(candidate)
        if improved > current and self.in_domain(candidate):
            return candidate, improved
        return sub, current

    # -- one ascent ----------------------------------------------------------

    def ascend(self, sub: np.ndarray) -> tuple[float, np.ndarray, bool, bool]:
        """Run one ascent; returns (value, point, converged, membership_lost)."""
        cfg = self.cfg
        try:
            cur = self.project(sub)
        except (ProjectionError, ValueError):
            return -math.inf, sub, False, True
        if not self.in_domain(cur):
            return -math.inf, cur, False, True
        f_cur = self.value(cur)
        step = cfg.step_init
        for it in range(cfg.max_steps):
            if self.flatten_active and it % cfg.flatten_period == 0:
                cur, f_cur = self.flatten_pass(cur, f_cur)
            grad = self.projected_gradient(cur)
            if float(np.linalg.norm(grad)) < cfg.grad_tol:
                return f_cur, cur, True, False
            beta = step
            accepted = False
            while beta > _MIN_STEP:
                try:
                    cand = self.project(cur + beta * grad)
                except (ProjectionError, ValueError):
                    beta *= 0.5
                    continue
                f_cand = self.value(cand)
                if f_cand > f_cur:
                    if not self.in_domain(cand):
                        return f_cur, cur, False, True
                    cur, f_cur = cand, f_cand
                    step = min(beta * 2.0, cfg.step_init)
                    accepted = True
                    break
                beta *= 0.5
            if not accepted:
                # no strictly improving step at any resolution: stalled at a
                # local maximum, which we count as convergence
                return f_cur, cur, True, False
        return f_cur, cur, False, False


def _sample_block(
    q: int, k: int, s: int, restrict: bool, rng: np.random.Generator
) -> np.ndarray:
    if restrict and s > 0:
        point = random_point_in_tame(q, k, s, rng)
        return point.entries[s:, s:].copy()
    if restrict:
        return random_point_in_tame(q, k, 0, rng).entries.copy()
    return random_point_in_D(q, rng).entries.copy()


def _search_slice(
    p: ModelParams,
    s: int,
    *,
    columns: bool,
    restrict_stability: bool,
    config: SearchConfig,
    seeds: list[np.random.SeedSequence],
) -> tuple[float, np.ndarray | None, int, int, int]:
    """Multistart over one slice; returns (best, sub, converged, restarts, ran)."""
    engine = _BlockAscent(
        p, s, columns=columns, restrict_stability=restrict_stability, config=config
    )
    best_val = -math.inf
    best_sub: np.ndarray | None = None
    converged_total = 0
    restarts_total = 0
    ran = 0
    for seq in seeds:
        rng = np.random.default_rng(seq)
        start_best = -math.inf
        start_sub: np.ndarray | None = None
        converged = False
        attempts = 0
        while attempts <= config.max_restarts_per_start:
            try:
                sub0 = _sample_block(p.q, p.k, s, restrict_stability, rng)
            except ValueError:
                # the sampler cannot populate this slice at all
                return best_val, best_sub, converged_total, restarts_total, ran
            val, sub, converged, lost = engine.ascend(sub0)
            if val > start_best:
                start_best, start_sub = val, sub
            if not lost:
                break
            restarts_total += 1
            attempts += 1
        ran += 1
        if converged:
            converged_total += 1
        if start_sub is not None and (
            start_best > best_val
            or (
                start_best == best_val
                and best_sub is not None
                and tuple(start_sub.ravel()) < tuple(best_sub.ravel())
            )
        ):
            best_val, best_sub = start_best, start_sub
    return best_val, best_sub, converged_total, restarts_total, ran


def maximize(
    domain: DomainTag,
    p: ModelParams,
    config: SearchConfig | None = None,
    rng: np.random.Generator | None = None,
) -> MaximizationReport:
    """Empirical maximum of the rate over ``domain`` by multistart ascent.

    Each start alternates an averaging pass (active only where the exponent
    window is nonempty) with projected-gradient steps and a halving line
    search; every accepted step strictly increases the rate.  A step that
    leaves the domain triggers a restart from a fresh sample, counted in
    ``membership_restarts``.  Passing ``rng`` derives the root seed from it;
    otherwise ``config.seed`` makes the whole run deterministic.
    """
    cfg = config or SearchConfig()
    p = ModelParams(q=p.q, k=p.k, c=p.c, n=p.n)
    root_seed = cfg.seed if rng is None else int(rng.integers(2**63))
    root = np.random.SeedSequence(root_seed)
    q, k, c = p.q, p.k, p.c
    flat_value = flat_rate(q, k, c)
    penalty = float(q) ** (0.999 - k)

    if domain.kind in (DomainKind.D, DomainKind.S):
        seeds = root.spawn(cfg.starts)
        best, sub, conv, restarts, _ = _search_slice(
            p,
            0,
            columns=domain.kind is DomainKind.D,
            restrict_stability=False,
            config=cfg,
            seeds=seeds,
        )
        if sub is None:  # pragma: no cover - D sampling cannot fail
            raise RuntimeError("no feasible start found")
        engine = _BlockAscent(
            p, 0, columns=domain.kind is DomainKind.D,
            restrict_stability=False, config=cfg,
        )
        point = OverlapMatrix(engine.assemble(sub), tol=10 * q * cfg.membership_tol)
        return MaximizationReport(
            domain=domain,
            best_point=point,
            best_value=best,
            flat_value=flat_value,
            gap=best - flat_value,
            starts=cfg.starts,
            converged_starts=conv,
            membership_restarts=restarts,
        )

    if domain.kind is DomainKind.D_S:
        s_values = [int(domain.s)]  # type: ignore[arg-type]
        starts_per_s = cfg.starts
    else:  # D_TAME: one sub-search per stability index
        s_values = list(range(q))
        starts_per_s = max(1, cfg.starts // q)

    all_seeds = root.spawn(starts_per_s * len(s_values))
    best_val = -math.inf
    best_sub: np.ndarray | None = None
    best_s = -1
    conv_total = 0
    restarts_total = 0
    per_s: list[tuple[int, float, float]] = []
    for idx, s in enumerate(s_values):
        seeds = all_seeds[idx * starts_per_s : (idx + 1) * starts_per_s]
        val, sub, conv, restarts, ran = _search_slice(
            p, s, columns=True, restrict_stability=True, config=cfg, seeds=seeds
        )
        conv_total += conv
        restarts_total += restarts
        comparator = s_stable_rate(q, k, c, s) + penalty
        per_s.append((s, val if sub is not None else math.nan, comparator))
        if sub is not None and val > best_val:
            best_val, best_sub, best_s = val, sub, s
    if best_sub is None:
        raise RuntimeError("no feasible start found in any stability slice")
    engine = _BlockAscent(
        p, best_s, columns=True, restrict_stability=True, config=cfg
    )
    point = OverlapMatrix(engine.assemble(best_sub), tol=10 * q * cfg.membership_tol)
    return MaximizationReport(
        domain=domain,
        best_point=point,
        best_value=best_val,
        flat_value=flat_value,
        gap=best_val - flat_value,
        starts=starts_per_s * len(s_values),
        converged_starts=conv_total,
        membership_restarts=restarts_total,
        per_s_results=tuple(per_s),
    )


def directional_derivative(a, i: int, x: int, y: int, p: ModelParams) -> float:
    """Rate change per unit of mass moved from column ``y`` to ``x`` in row ``i``.

    Computed as ``ln(a_iy/a_ix) + c k (a_ix^{k-1} - a_iy^{k-1}) / g`` where
    ``g`` is the energy argument; either entry at zero is a domain error
    (log singularity).
    """
    arr = np.asarray(getattr(a, "entries", a), dtype=float)
    a_ix, a_iy = float(arr[i, x]), float(arr[i, y])
    if a_ix <= 0.0 or a_iy <= 0.0:
        raise ValueError(
            f"directional derivative undefined at zero entry: "
            f"a[{i},{x}]={a_ix}, a[{i},{y}]={a_iy}"
        )
    q, k, c = p.q, p.k, p.c
    g = 1.0 - 2.0 * float(q) ** (1 - k) + float(np.sum(arr**k))
    return math.log(a_iy / a_ix) + c * k * (a_ix ** (k - 1) - a_iy ** (k - 1)) / g


def s_stable_gap_table(p: ModelParams) -> list[tuple[int, float, float, float]]:
    """Rows ``(s, F(flat(s)), F(flat), margin)`` for every ``1 <= s < q``.

    ``margin = F(flat) - F(flat(s)) - q**(0.999-k)``; positive margins mean
    the s-stable candidate stays dominated even after the additive slack.
    All values come from the log-safe closed forms, so the table is exact
    for q far beyond matrix-representable sizes.
    """
    q, k, c = p.q, p.k, p.c
    f_flat = flat_rate(q, k, c)
    penalty = math.exp((0.999 - k) * math.log(q))
    table = []
    for s in range(1, q):
        f_s = s_stable_rate(q, k, c, s)
        table.append((s, f_s, f_flat, f_flat - f_s - penalty))
    return table


@dataclass(frozen=True)
class CondensationReport:
    """Signed differences F(stable) - F(flat) along a grid of offsets.

    Each row is ``(gamma, c, difference)`` with ``c = (q**(k-1) - 1/2) ln q
    - gamma``.  ``positive_gammas`` lists the offsets (if any) where the
    stable point beats the flat one; an empty tuple is a report of "none
    found", not a refutation.
    """

    q: int
    k: int
    rows: tuple[tuple[float, float, float], ...]
    positive_gammas: tuple[float, ...]


def condensation_witness(q: int, k: int, gamma_grid) -> CondensationReport:
    """Evaluate F(stable) - F(flat) at densities just below the upper bound."""
    gammas = [float(g) for g in gamma_grid]
    for g in gammas:
        if not g > 0.0:
            raise ValueError(f"gamma values must be positive, got {g}")
    upper = (float(q) ** (k - 1) - 0.5) * math.log(q)
    rows = []
    positive = []
    for gamma in gammas:
        c = upper - gamma
        diff = stable_rate(q, k, c) - flat_rate(q, k, c)
        rows.append((gamma, c, diff))
        if diff > 0.0:
            positive.append(gamma)
    return CondensationReport(
        q=q, k=k, rows=tuple(rows), positive_gammas=tuple(positive)
    )
