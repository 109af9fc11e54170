"""Overlap matrices, feasible domains, projections, and the flattening move.

The central object is a q-by-q nonnegative matrix whose entries sum to 1:
the joint color-frequency matrix of a pair of colorings.  The feasible
domains are

* ``D``      — all row and column sums equal ``1/q`` (a scaled version of
  the doubly stochastic polytope),
* ``S``      — row sums equal ``1/q`` only,
* ``D_s``    — members of ``D`` with exactly ``s`` entries above the
  stability threshold ``stability_constant(k)/q``,
* ``D_tame`` — members of ``D`` that are separable and ``s``-stable for
  some ``0 <= s < q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import ProjectionError, warn_regime
from .moments import ModelParams, kappa, stability_constant

__all__ = [
    "DEFAULT_TOL",
    "OverlapMatrix",
    "DomainKind",
    "DomainTag",
    "flat_overlap",
    "scaled_identity",
    "s_stable_overlap",
    "stable_overlap",
    "overlap_of",
    "is_in_D",
    "is_in_S",
    "stability_index",
    "separability_window",
    "is_separable_matrix",
    "is_tame_matrix",
    "domain_member",
    "flatten",
    "averaging_condition",
    "averaging_exponent_window",
    "project_to_D",
    "random_point_in_D",
    "random_point_in_tame",
]

#: Default tolerance for stochasticity and membership checks.
DEFAULT_TOL = 1e-9


class OverlapMatrix:
    """Immutable q-by-q overlap matrix: nonnegative entries summing to 1.

    Parameters
    ----------
    entries:
        Square array-like of nonnegative reals.
    tol:
        Allowed deviation of the total sum from 1.  Matrices built from
        colorings have entries that are exact multiples of ``1/n`` and
        pass at any reasonable tolerance.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, *, tol: float = DEFAULT_TOL):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"entries must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("matrix must be at least 1x1")
        if np.any(arr < 0):
            raise ValueError("overlap matrix has a negative entry")
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(
                f"overlap entries sum to {total!r}, expected 1 within tol={tol}"
            )
        arr.flags.writeable = False
        self._entries = arr

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def q(self) -> int:
        return self._entries.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self._entries[i]

    def __repr__(self) -> str:
        return f"OverlapMatrix(q={self.q})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, OverlapMatrix):
            return NotImplemented
        return self.q == other.q and bool(np.all(self._entries == other._entries))

    def __hash__(self) -> int:
        return hash(self._entries.tobytes())


class DomainKind(str, enum.Enum):
    D = "D"
    S = "S"
    D_S = "D_s"
    D_TAME = "D_tame"


@dataclass(frozen=True)
class DomainTag:
    """A feasible domain; ``s`` is required exactly for the ``D_s`` kind."""

    kind: DomainKind
    s: int | None = None

    def __post_init__(self):
        if self.kind == DomainKind.D_S:
            if self.s is None or self.s < 0:
                raise ValueError("D_s domain requires a stability index s >= 0")
        elif self.s is not None:
            raise ValueError(f"domain {self.kind.value} does not take an s")

    @classmethod
    def doubly_stochastic(cls) -> DomainTag:
        return cls(DomainKind.D)

    @classmethod
    def row_stochastic(cls) -> DomainTag:
        return cls(DomainKind.S)

    @classmethod
    def stable(cls, s: int) -> DomainTag:
        return cls(DomainKind.D_S, s)

    @classmethod
    def tame(cls) -> DomainTag:
        return cls(DomainKind.D_TAME)


# ---------------------------------------------------------------------------
# canonical matrices
# ---------------------------------------------------------------------------

def flat_overlap(q: int) -> OverlapMatrix:
    """All entries ``q**-2``: the barycenter of ``D`` (uncorrelated pair)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return OverlapMatrix(np.full((q, q), 1.0 / q ** 2))


def scaled_identity(q: int) -> OverlapMatrix:
    """``1/q`` on the diagonal, zero elsewhere (perfectly aligned pair)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return OverlapMatrix(np.eye(q) / q)


def s_stable_overlap(q: int, s: int) -> OverlapMatrix:
    """Block overlap with ``s`` locked colors: ``1/q`` on the first ``s``
    diagonal entries, the remaining ``(q-s)``-square block constant
    ``1/(q(q-s))``."""
    if not 0 <= s < q:
        raise ValueError(f"require 0 <= s < q, got s={s}, q={q}")
    arr = np.zeros((q, q))
    for i in range(s):
        arr[i, i] = 1.0 / q
    arr[s:, s:] = 1.0 / (q * (q - s))
    return OverlapMatrix(arr)


def stable_overlap(q: int, k: int) -> OverlapMatrix:
    """Correlated stationary overlap: diagonal ``1/q - q**-k``, off-diagonal
    ``q**-k / (q-1)``."""
    if q < 2 or k < 2:
        raise ValueError(f"require q >= 2 and k >= 2, got ({q}, {k})")
    off = float(q) ** (-k) / (q - 1)
    diag = 1.0 / q - float(q) ** (-k)
    arr = np.full((q, q), off)
    np.fill_diagonal(arr, diag)
    return OverlapMatrix(arr)


def overlap_of(sigma, tau, q: int | None = None) -> OverlapMatrix:
    """Joint color-frequency matrix of two colorings of the same vertex set.

    Accepts :class:`hypercolor.simulator.Coloring` objects or plain
    sequences of colors in ``1..q``.  Entry ``(i, j)`` is the fraction of
    vertices colored ``i+1`` by ``sigma`` and ``j+1`` by ``tau``.
    """
    sa = np.asarray(getattr(sigma, "assignment", sigma), dtype=int)
    ta = np.asarray(getattr(tau, "assignment", tau), dtype=int)
    if sa.shape != ta.shape or sa.ndim != 1:
        raise ValueError("colorings must be one-dimensional and equal length")
    q_s = getattr(sigma, "q", None)
    q_t = getattr(tau, "q", None)
    if q is None:
        q = q_s or q_t or int(max(sa.max(), ta.max()))
    for q_declared in (q_s, q_t):
        if q_declared is not None and q_declared != q:
            raise ValueError(f"color-count mismatch: {q_declared} != {q}")
    n = sa.size
    if n == 0:
        raise ValueError("colorings must be nonempty")
    if sa.min() < 1 or ta.min() < 1 or sa.max() > q or ta.max() > q:
        raise ValueError(f"colors must lie in 1..{q}")
    counts = np.zeros((q, q), dtype=np.int64)
    np.add.at(counts, (sa - 1, ta - 1), 1)
    return OverlapMatrix(counts / n)


# ---------------------------------------------------------------------------
# membership predicates
# ---------------------------------------------------------------------------

def _entries_of(a) -> np.ndarray:
    return np.asarray(getattr(a, "entries", a), dtype=float)


def is_in_D(a, tol: float = DEFAULT_TOL) -> bool:
    """All row sums and all column sums equal ``1/q`` within ``tol``."""
    arr = _entries_of(a)
    q = arr.shape[0]
    target = 1.0 / q
    return bool(
        np.all(np.abs(arr.sum(axis=1) - target) <= tol)
        and np.all(np.abs(arr.sum(axis=0) - target) <= tol)
    )


def is_in_S(a, tol: float = DEFAULT_TOL) -> bool:
    """All row sums equal ``1/q`` within ``tol`` (columns unconstrained)."""
    arr = _entries_of(a)
    q = arr.shape[0]
    return bool(np.all(np.abs(arr.sum(axis=1) - 1.0 / q) <= tol))


def stability_index(a, k: int) -> int:
    """Number of entries strictly above ``stability_constant(k)/q``."""
    arr = _entries_of(a)
    q = arr.shape[0]
    return int(np.sum(arr > stability_constant(k) / q))


def separability_window(q: int, k: int) -> tuple[float, float, bool]:
    """Forbidden open entry window ``(stability_constant(k)/q, (1-kappa)/q)``.

    At small ``q`` the raw window is empty because ``1 - kappa`` drops
    below the stability constant; in that case the window is clamped to
    ``(stability_constant(k)/q, 1/q)`` and the third element of the result
    is True (a structured warning is emitted).
    """
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")  # kappa warns on its own at small q
        kap = kappa(q, k)
    lo = stability_constant(k) / q
    hi = (1.0 - kap) / q
    clamped = hi <= lo
    if clamped:
        hi = 1.0 / q
        warn_regime(
            "kappa-window-clamped",
            f"separability window empty at q={q}, k={k}; clamped to "
            f"({lo:.6g}, {hi:.6g})",
        )
    return lo, hi, clamped


def is_separable_matrix(a, k: int) -> bool:
    """True iff no entry lies in the open separability window."""
    arr = _entries_of(a)
    q = arr.shape[0]
    lo, hi, _ = separability_window(q, k)
    return not bool(np.any((arr > lo) & (arr < hi)))


def is_tame_matrix(a, k: int, tol: float = DEFAULT_TOL) -> bool:
    """Separable, ``s``-stable for some ``0 <= s < q``, and in ``D``."""
    arr = _entries_of(a)
    q = arr.shape[0]
    if not is_in_D(arr, tol=tol):
        return False
    if not 0 <= stability_index(arr, k) < q:
        return False
    return is_separable_matrix(arr, k)


def domain_member(tag: DomainTag, a, k: int, tol: float = DEFAULT_TOL) -> bool:
    """Membership test for a :class:`DomainTag`."""
    if tag.kind == DomainKind.D:
        return is_in_D(a, tol=tol)
    if tag.kind == DomainKind.S:
        return is_in_S(a, tol=tol)
    if tag.kind == DomainKind.D_S:
        return is_in_D(a, tol=tol) and stability_index(a, k) == tag.s
    if tag.kind == DomainKind.D_TAME:
        return is_tame_matrix(a, k, tol=tol)
    raise ValueError(f"unknown domain kind {tag.kind!r}")


# ---------------------------------------------------------------------------
# flattening move
# ---------------------------------------------------------------------------

def flatten(a, i: int, J) -> OverlapMatrix:
    """Replace the row-``i`` entries on column set ``J`` by their average.

    Row sums are preserved exactly up to rounding; all other entries are
    untouched.  ``J`` is a nonempty set of 0-based column indices.
    """
    arr = _entries_of(a).copy()
    q = arr.shape[0]
    J = sorted(set(int(j) for j in J))
    if not J:
        raise ValueError("flatten: J must be nonempty")
    if J[0] < 0 or J[-1] >= q:
        raise ValueError(f"flatten: J out of range 0..{q - 1}")
    if not 0 <= i < q:
        raise ValueError(f"flatten: row {i} out of range 0..{q - 1}")
    arr[i, J] = arr[i, J].mean()
    return OverlapMatrix(arr)


def averaging_exponent_window(q: int) -> tuple[float, float]:
    """Admissible exponent window ``[3 ln ln q / ln q, 1]`` for
    :func:`averaging_condition` (empty below q of about 94)."""
    if q < 3:
        raise ValueError(f"averaging window needs q >= 3, got {q}")
    return 3.0 * math.log(math.log(q)) / math.log(q), 1.0


def averaging_condition(a, i: int, J, mu: float, p: ModelParams) -> bool:
    """True iff flattening row ``i`` on ``J`` is certified non-decreasing.

    The certificate requires the exponent ``mu`` to lie in
    ``[3 ln ln q / ln q, 1]`` — outside that window the function returns
    False with a structured warning (the window is empty for q below
    roughly 94) — and then checks both::

        |J| >= q**mu
        max_{j in J} a[i, j]**(k-1) < 0.995/(k q**(k-1)) * (mu - ln ln q / ln q)
    """
    arr = _entries_of(a)
    q, k = p.q, p.k
    if arr.shape[0] != q:
        raise ValueError(f"matrix is {arr.shape[0]}x{arr.shape[0]}, params say q={q}")
    J = sorted(set(int(j) for j in J))
    if not J:
        raise ValueError("averaging_condition: J must be nonempty")
    lo, hi = averaging_exponent_window(q)
    if not lo <= mu <= hi:
        warn_regime(
            "averaging-exponent-outside-window",
            f"exponent mu={mu} outside admissible window [{lo:.4f}, {hi}] at q={q}",
        )
        return False
    if len(J) < float(q) ** mu:
        return False
    bound = 0.995 / (k * float(q) ** (k - 1)) * (mu - math.log(math.log(q)) / math.log(q))
    return bool(np.max(arr[i, J] ** (k - 1)) < bound)


# ---------------------------------------------------------------------------
# projection and sampling
# ---------------------------------------------------------------------------

def _sinkhorn(arr: np.ndarray, iterations: int, tol: float) -> tuple[np.ndarray, float]:
    """Alternating row/column rescaling toward all sums = 1/q."""
    q = arr.shape[0]
    target = 1.0 / q
    x = arr.copy()
    residual = math.inf
    # Nearly-decomposable matrices (entries at the tiny positive floor the
    # optimizer uses) converge so slowly that finishing the sweep budget
    # costs more than the caller's fallback; bail once progress stalls.
    best = math.inf
    stale = 0
    for _ in range(iterations):
        rows = x.sum(axis=1, keepdims=True)
        if np.any(rows <= 0):
            raise ValueError("projection: matrix has a nonpositive row sum")
        x *= target / rows
        cols = x.sum(axis=0, keepdims=True)
        if np.any(cols <= 0):
            raise ValueError("projection: matrix has a nonpositive column sum")
        x *= target / cols
        residual = max(
            float(np.max(np.abs(x.sum(axis=1) - target))),
            float(np.max(np.abs(x.sum(axis=0) - target))),
        )
        if residual <= tol:
            break
        if residual < 0.999 * best:
            best = residual
            stale = 0
        else:
            stale += 1
            if stale >= 50:
                break
    return x, residual


def project_to_D(a, iterations: int = 100_000, tol: float = 1e-10) -> OverlapMatrix:
    """Project a nonnegative matrix into ``D`` by alternating rescaling.

    Raises
    ------
    ProjectionError
        If the residual (worst sum deviation) still exceeds ``tol`` after
        ``iterations`` sweeps; the error carries the final residual.
    """
    arr = _entries_of(a).astype(float)
    if np.any(arr < 0):
        raise ValueError("project_to_D requires a nonnegative matrix")
    x, residual = _sinkhorn(arr, iterations, tol)
    if residual > tol:
        raise ProjectionError(
            f"projection did not converge: residual {residual} > tol {tol}",
            residual=residual,
        )
    return OverlapMatrix(x, tol=max(DEFAULT_TOL, 4 * x.shape[0] * tol))


def random_point_in_D(q: int, rng: np.random.Generator) -> OverlapMatrix:
    """Projection of an i.i.d. entrywise-exponential random matrix into D."""
    raw = rng.exponential(size=(q, q))
    return project_to_D(raw)


def random_point_in_tame(
    q: int,
    k: int,
    s: int,
    rng: np.random.Generator,
    max_tries: int = 500,
) -> OverlapMatrix:
    """Random member of ``D`` that is separable with stability index ``s``.

    Plants ``s`` diagonal entries drawn from ``[(1 - kappa')/q, 1/q]``
    where ``kappa'`` is the effective (possibly clamped) window width,
    zeroes the rest of those rows and columns so the planted entries
    survive membership in ``D``, projects an exponential-noise block onto
    the remaining coordinates, and rejects draws whose stability pattern
    or separability came out wrong.

    Note that whenever the separability window is clamped (every
    practically reachable ``q``), an above-window entry of a member of
    ``D`` must equal ``1/q`` exactly, so the planted values collapse to
    the upper endpoint; and ``s = q - 1`` is infeasible (the leftover
    block is a single entry ``1/q``, which raises the index to ``q``).
    """
    if not 0 <= s < q:
        raise ValueError(f"require 0 <= s < q, got s={s}, q={q}")
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        lo, hi, clamped = separability_window(q, k)
    del lo, hi, clamped  # membership below re-derives the window
    for _ in range(max_tries):
        arr = np.zeros((q, q))
        # a member of D cannot exceed 1/q, so the planted draw from
        # [(1 - kappa')/q, 1/q] is pinned to the upper endpoint whenever
        # the window is clamped -- which covers every allocatable q
        for i in range(s):
            arr[i, i] = 1.0 / q
        block = q - s
        noise = rng.exponential(size=(block, block))
        try:
            sub, _residual = _sinkhorn(noise, 100_000, 1e-12)
        except ValueError:
            continue
        arr[s:, s:] = sub * (block / q)
        try:
            point = OverlapMatrix(arr)
        except ValueError:
            continue
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            ok = (
                is_in_D(point)
                and stability_index(point, k) == s
                and is_separable_matrix(point, k)
            )
        if ok:
            return point
    raise ValueError(
        f"random_point_in_tame: no acceptable draw in {max_tries} tries "
        f"(q={q}, k={k}, s={s})"
    )
