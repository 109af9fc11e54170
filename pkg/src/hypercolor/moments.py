"""Closed-form scalar machinery for the hypergraph-coloring second moment.

Everything here is a pure function of small scalar parameters or of a
q-by-q overlap matrix: the pair-entropy ``H``, the interaction term ``E``,
the rate ``F = H + E`` whose exponential governs second-moment counts,
colorability threshold bounds, the curvature of ``F`` at the flat overlap,
and a handful of auxiliary inequalities used by the maximizer and the
simulator.

Conventions
-----------
* ``0 · ln 0 = 0`` everywhere.
* All logarithms are natural; all returned quantities are in nats.
* Functions accept either a plain ``numpy`` array or any object with an
  ``entries`` attribute (such as :class:`hypercolor.polytope.OverlapMatrix`).
* Formulas that must survive astronomically large ``q`` (up to ``10**300``)
  are computed in the log domain and say so in their docstrings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import warn_regime

__all__ = [
    "ModelParams",
    "RateValue",
    "ThresholdBounds",
    "FlatHessian",
    "StabilityBoundaryReport",
    "entropy",
    "kth_power_sum",
    "energy_argument",
    "energy",
    "rate",
    "first_moment_exponent",
    "first_moment_zero",
    "threshold_bounds",
    "flat_rate",
    "scaled_identity_rate",
    "s_stable_entropy",
    "s_stable_power_sum",
    "s_stable_rate",
    "stable_entropy",
    "stable_power_sum",
    "stable_rate",
    "hessian_at_flat",
    "binary_entropy",
    "entropy_row_bound",
    "entropy_row_bound2",
    "separable_window_check",
    "stability_boundary_report",
    "kappa",
    "stability_constant",
    "chernoff_phi",
]


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Model parameters: ``q`` colors, ``k``-uniform edges, density ``c``.

    ``n`` (vertex count) is optional and only required by operations that
    touch finite instances; when present the derived edge count is
    ``m = ceil(c * n)``.

    ``c = 0`` is accepted so that pure-entropy limits are expressible.
    """

    q: int
    k: int
    c: float
    n: int | None = None

    def __post_init__(self):
        if not (isinstance(self.q, (int, np.integer)) and self.q >= 2):
            raise ValueError(f"q must be an integer >= 2, got {self.q!r}")
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 2):
            raise ValueError(f"k must be an integer >= 2, got {self.k!r}")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be a finite real >= 0, got {self.c!r}")
        if self.n is not None:
            if not (isinstance(self.n, (int, np.integer)) and self.n >= self.k):
                raise ValueError(f"n must be an integer >= k, got {self.n!r}")
            m = self.m
            if not (0 <= m <= math.comb(self.n, self.k)):
                raise ValueError(
                    f"derived edge count m={m} outside [0, C(n,k)="
                    f"{math.comb(self.n, self.k)}]"
                )

    @property
    def m(self) -> int:
        """Edge count ``ceil(c * n)``; requires ``n``."""
        if self.n is None:
            raise ValueError("m requires n to be set")
        return math.ceil(self.c * self.n)


@dataclass(frozen=True)
class RateValue:
    """Decomposed rate: ``rate = entropy + energy`` (exactly, as computed)."""

    entropy: float
    energy: float
    rate: float
    log_domain: bool = False


@dataclass(frozen=True)
class ThresholdBounds:
    """Colorability threshold bounds for (q, k).

    ``classical_lower`` omits a non-constructive correction term; the
    omission is recorded by ``epsilon_omitted`` and a structured warning.
    """

    q: int
    k: int
    classical_lower: float
    upper: float
    new_lower: float
    c_range_lo: float
    c_range_hi: float
    epsilon_omitted: bool = True


@dataclass(frozen=True)
class FlatHessian:
    """Curvature of the rate function at the flat overlap, in the chart that
    drops the last matrix entry (dimension ``q**2 - 1``).

    Two closed forms are carried deliberately:

    ``matrix``
        The conservative variant whose interaction term is doubled; its top
        eigenvalue changes sign exactly at ``critical_c``.
    ``exact_matrix``
        The term-by-term second-derivative assembly; finite differences of
        the rate reproduce it, and its top eigenvalue changes sign at
        ``exact_flip_c = 2 * critical_c``.

    ``negative_definite`` tests ``c < critical_c``, which is sufficient for
    both matrices to be negative definite (the conservative threshold is the
    smaller of the two).
    """

    q: int
    k: int
    c: float
    matrix: np.ndarray
    exact_matrix: np.ndarray
    critical_c: float
    exact_flip_c: float
    negative_definite: bool


@dataclass(frozen=True)
class StabilityBoundaryReport:
    """Both readings of the stability-boundary inequality (see
    :func:`stability_boundary_report`)."""

    q: float
    k: int
    printed_constant: float
    printed_s: float
    printed_holds: bool
    override_constant: float | None = None
    override_s: float | None = None
    override_holds: bool | None = None


# ---------------------------------------------------------------------------
# basic overlap functionals
# ---------------------------------------------------------------------------

def _as_entries(a) -> np.ndarray:
    """Coerce an overlap-like object to a float array."""
    return np.asarray(getattr(a, "entries", a), dtype=float)


def entropy(a) -> float:
    """Pair entropy ``-sum a_ij ln a_ij`` with the ``0 ln 0 = 0`` convention.

    Raises
    ------
    ValueError
        If any entry is negative.
    """
    arr = _as_entries(a)
    if np.any(arr < 0):
        raise ValueError("entropy: matrix has a negative entry")
    pos = arr[arr > 0]
    return float(-np.sum(pos * np.log(pos)))


def kth_power_sum(a, k: int) -> float:
    """Sum of k-th powers of the entries (the k-norm raised to the k)."""
    arr = _as_entries(a)
    return float(np.sum(arr ** k))


def energy_argument(a, q: int, k: int) -> float:
    """The log argument ``1 - 2 q**(1-k) + sum a_ij**k`` of the energy."""
    return 1.0 - 2.0 * float(q) ** (1 - k) + kth_power_sum(a, k)


def energy(a, p: ModelParams) -> float:
    """Interaction term ``c * ln(1 - 2 q**(1-k) + sum a_ij**k)``.

    The logarithm is evaluated as ``log1p`` of the (tiny, cancellation-free)
    deviation from 1, which keeps ``c * ln(...)`` accurate even when ``c``
    is large enough to amplify an ordinary ``log(g)`` rounding error past
    the size of the final rate.

    Raises
    ------
    ValueError
        If the log argument is not strictly positive (the offending value
        is included in the message).
    """
    u = kth_power_sum(a, p.k) - 2.0 * float(p.q) ** (1 - p.k)
    if u <= -1.0:
        raise ValueError(f"energy: log argument {1.0 + u} is not positive")
    return p.c * math.log1p(u)


def rate(a, p: ModelParams) -> RateValue:
    """Rate ``F = H + E`` of an overlap matrix under parameters ``p``."""
    h = entropy(a)
    e = energy(a, p)
    return RateValue(entropy=h, energy=e, rate=h + e)


# ---------------------------------------------------------------------------
# first moment and thresholds
# ---------------------------------------------------------------------------

def first_moment_exponent(p: ModelParams) -> float:
    """Per-vertex exponent of the expected number of colorings:
    ``ln q + c ln(1 - q**(1-k))``."""
    return math.log(p.q) + p.c * math.log1p(-float(p.q) ** (1 - p.k))


def first_moment_zero(q: int, k: int) -> float:
    """Density at which :func:`first_moment_exponent` crosses zero:
    ``ln q / (-ln(1 - q**(1-k)))``."""
    return math.log(q) / (-math.log1p(-float(q) ** (1 - k)))


def threshold_bounds(q: int, k: int) -> ThresholdBounds:
    """Colorability threshold bounds for ``q >= 3`` colors, arity ``k >= 3``.

    * ``classical_lower = (q**(k-1) - 1) ln q - 1`` (a non-constructive
      correction term is omitted; flagged via warning and
      ``epsilon_omitted``),
    * ``upper = (q**(k-1) - 1/2) ln q``,
    * ``new_lower = upper - ln 2 - 1.01 ln q / q``,
    * working window ``c_range = [upper - 2, new_lower]``.
    """
    if q < 3 or k < 3:
        raise ValueError(f"threshold_bounds requires q >= 3 and k >= 3, got ({q}, {k})")
    lq = math.log(q)
    qk1 = float(q) ** (k - 1)
    upper = (qk1 - 0.5) * lq
    new_lower = upper - math.log(2.0) - 1.01 * lq / q
    classical_lower = (qk1 - 1.0) * lq - 1.0
    warn_regime(
        "epsilon-omitted",
        "classical_lower omits a non-constructive positive correction term",
    )
    return ThresholdBounds(
        q=q,
        k=k,
        classical_lower=classical_lower,
        upper=upper,
        new_lower=new_lower,
        c_range_lo=upper - 2.0,
        c_range_hi=new_lower,
    )


# ---------------------------------------------------------------------------
# closed forms at the special matrices (log-safe in q)
# ---------------------------------------------------------------------------

def flat_rate(q: int, k: int, c: float) -> float:
    """Rate at the flat overlap: ``2 (ln q + c ln(1 - q**(1-k)))``."""
    return 2.0 * (math.log(q) + c * math.log1p(-float(q) ** (1 - k)))


def scaled_identity_rate(q: int, k: int, c: float) -> float:
    """Rate at the scaled identity, which is half the flat rate."""
    return math.log(q) + c * math.log1p(-float(q) ** (1 - k))


def s_stable_entropy(q: int, s: int) -> float:
    """Entropy of the block overlap with ``s`` locked colors:
    ``(s/q) ln q + ((q-s)/q) ln(q (q-s))``."""
    if not 0 <= s < q:
        raise ValueError(f"require 0 <= s < q, got s={s}, q={q}")
    qf = float(q)
    return (s / qf) * math.log(qf) + ((q - s) / qf) * math.log(qf * (q - s))


def s_stable_power_sum(q: int, s: int, k: int) -> float:
    """k-th power sum of the block overlap with ``s`` locked colors:
    ``s q**(-k) + q**(-k) (q-s)**(2-k)``."""
    if not 0 <= s < q:
        raise ValueError(f"require 0 <= s < q, got s={s}, q={q}")
    qf = float(q)
    return s * qf ** (-k) + qf ** (-k) * float(q - s) ** (2 - k)


def s_stable_rate(q: int, k: int, c: float, s: int) -> float:
    """Rate at the block overlap with ``s`` locked colors (log-safe)."""
    arg = -2.0 * float(q) ** (1 - k) + s_stable_power_sum(q, s, k)
    return s_stable_entropy(q, s) + c * math.log1p(arg)


def stable_entropy(q: int, k: int) -> float:
    """Entropy of the correlated stationary overlap (diagonal
    ``1/q - q**(-k)``, off-diagonal ``q**(-k)/(q-1)``)."""
    qf = float(q)
    d = (1.0 - qf ** (1 - k)) / qf
    o = qf ** (-k) / (q - 1)
    out = -q * d * math.log(d)
    if o > 0:
        out -= q * (q - 1) * o * math.log(o)
    return out


def stable_power_sum(q: int, k: int) -> float:
    """k-th power sum of the correlated stationary overlap."""
    qf = float(q)
    d = (1.0 - qf ** (1 - k)) / qf
    o = qf ** (-k) / (q - 1)
    return q * d ** k + q * (q - 1) * o ** k


def stable_rate(q: int, k: int, c: float) -> float:
    """Rate at the correlated stationary overlap (log-safe closed form).

    This is the scalar path; tests compare it against the independent
    matrix-based :func:`rate` evaluation.
    """
    arg = -2.0 * float(q) ** (1 - k) + stable_power_sum(q, k)
    return stable_entropy(q, k) + c * math.log1p(arg)


# ---------------------------------------------------------------------------
# curvature at the flat overlap
# ---------------------------------------------------------------------------

def hessian_at_flat(p: ModelParams) -> FlatHessian:
    """Hessian of the rate at the flat overlap in the dropped-entry chart.

    Both the entropy and the interaction contribute a multiple of
    ``(id + ones)`` on the ``q**2 - 1`` free coordinates.  Writing
    ``R = q**(2(k-1)) * (1 - q**(1-k))**2``:

    * ``exact_matrix = -q^2 (1 - c k (k-1) / R) (id + ones)`` is the
      term-by-term assembly of the second derivatives; a central
      finite-difference Hessian of the rate reproduces it.  Its top
      eigenvalue crosses zero at ``exact_flip_c = R / (k (k-1))``.
    * ``matrix = -q^2 (1 - 2 c k (k-1) / R) (id + ones)`` doubles the
      interaction contribution; its top eigenvalue crosses zero at the
      conservative threshold ``critical_c = R / (2 k (k-1))``, which is
      what ``negative_definite`` tests.

    The eigenvalues of ``(id + ones)`` are ``q**2`` (once) and ``1``
    (multiplicity ``q**2 - 2``), so at ``c = 0`` the spectrum is
    ``-q**2 * q**2`` once and ``-q**2`` otherwise.
    """
    q, k, c = p.q, p.k, p.c
    d = q * q - 1
    base = np.eye(d) + np.ones((d, d))
    big_r = float(q) ** (2 * (k - 1)) * (1.0 - float(q) ** (1 - k)) ** 2
    kk = k * (k - 1)
    exact = -q * q * (1.0 - c * kk / big_r) * base
    conservative = -q * q * (1.0 - 2.0 * c * kk / big_r) * base
    exact.flags.writeable = False
    conservative.flags.writeable = False
    critical_c = big_r / (2.0 * kk)
    return FlatHessian(
        q=q,
        k=k,
        c=c,
        matrix=conservative,
        exact_matrix=exact,
        critical_c=critical_c,
        exact_flip_c=2.0 * critical_c,
        negative_definite=c < critical_c,
    )


# ---------------------------------------------------------------------------
# row-entropy bounds
# ---------------------------------------------------------------------------

def binary_entropy(z: float) -> float:
    """``h(z) = -z ln z - (1-z) ln(1-z)`` on [0, 1], with 0 ln 0 = 0."""
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"binary_entropy: argument {z} outside [0, 1]")
    out = 0.0
    if z > 0.0:
        out -= z * math.log(z)
    if z < 1.0:
        out -= (1.0 - z) * math.log1p(-z)
    return out


def _check_row(row, q_expected: int | None = None, tol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(row, dtype=float)
    if arr.ndim != 1:
        raise ValueError("row must be one-dimensional")
    q = arr.size
    if q_expected is not None and q != q_expected:
        raise ValueError(f"row length {q} != expected {q_expected}")
    if np.any(arr < 0):
        raise ValueError("row has a negative entry")
    total = float(arr.sum())
    if abs(total - 1.0 / q) > tol:
        raise ValueError(
            f"row sums to {total}, expected 1/q = {1.0 / q} within tol={tol}"
        )
    return arr


def entropy_row_bound(row, J, tol: float = 1e-9) -> float:
    """Certified upper bound on the entropy of the scaled row ``q * row``.

    For a row summing to ``1/q`` and an index set ``J`` (0-based), with
    ``r = sum_{j in J} q * row[j]``, the bound is::

        h(r) + r ln|J| + (1 - r) ln(q - |J|)

    with the convention that an empty complement contributes ``(1-r) ln 0``
    only when ``r = 1`` (where it vanishes).
    """
    arr = _check_row(row, tol=tol)
    q = arr.size
    J = sorted(set(int(j) for j in J))
    if not J or J[0] < 0 or J[-1] >= q:
        raise ValueError(f"J must be a nonempty subset of 0..{q - 1}")
    r = float(q * arr[J].sum())
    r = min(max(r, 0.0), 1.0)
    out = binary_entropy(r) + (r * math.log(len(J)) if len(J) else 0.0)
    if q > len(J):
        if 1.0 - r > 0.0:
            out += (1.0 - r) * math.log(q - len(J))
    return out


def entropy_row_bound2(row, J, tol: float = 1e-9) -> float:
    """Refined bound that pins the first entry of the row.

    Requires ``q * row[0] < 1`` and ``J`` a 0-based subset of ``1..q-1``
    with ``0 < |J| < q - 1``.  With ``z = q * row[0]`` and
    ``r = sum_{j in J} q * row[j]`` the bound is::

        h(z) + (1 - z) h(r / (1 - z)) + r ln|J| + (1 - r - z) ln(q - |J| - 1)
    """
    arr = _check_row(row, tol=tol)
    q = arr.size
    J = sorted(set(int(j) for j in J))
    if not J or J[0] < 1 or J[-1] >= q:
        raise ValueError(f"J must be a nonempty subset of 1..{q - 1}")
    if not 0 < len(J) < q - 1:
        raise ValueError(f"require 0 < |J| < q-1, got |J|={len(J)}, q={q}")
    z = float(q * arr[0])
    if z >= 1.0:
        raise ValueError(f"pinned entry q*row[0] = {z} must be < 1")
    r = float(q * arr[J].sum())
    r = min(max(r, 0.0), 1.0 - z)
    out = binary_entropy(z) + (1.0 - z) * binary_entropy(r / (1.0 - z))
    out += r * math.log(len(J))
    rest = 1.0 - r - z
    if rest > 0.0:
        out += rest * math.log(q - len(J) - 1)
    return out


# ---------------------------------------------------------------------------
# stability / separability auxiliaries
# ---------------------------------------------------------------------------

def separable_window_check(q, k: int, s: float) -> bool:
    """Log-domain check of ``sqrt(2) e / q**((1 - k s**(k-1))/2) < 1 - s``.

    ``q`` may be an arbitrarily large integer (up to ``10**300`` and
    beyond); only its logarithm enters.
    """
    if not 0 < s < 1:
        raise ValueError(f"require 0 < s < 1, got {s}")
    if q < 1:
        raise ValueError(f"require q >= 1, got {q}")
    lhs = 0.5 * math.log(2.0) + 1.0 - 0.5 * (1.0 - k * s ** (k - 1)) * math.log(q)
    return lhs < math.log1p(-s)


def stability_boundary_report(
    q, k: int, constant_override: float | None = None
) -> StabilityBoundaryReport:
    """Evaluate :func:`separable_window_check` at the stability boundary.

    The boundary abscissa is ``s = (C/k)**(1/(k-1))`` with the printed
    constant ``C = 1.01``; with that constant the inequality fails for
    every ``q`` (the left side grows like a positive power of ``q``), so
    callers may supply ``constant_override`` to read the check at an
    alternative constant.  Both readings are reported; a structured
    warning records the disagreement.
    """
    printed = 1.01
    s_printed = (printed / k) ** (1.0 / (k - 1))
    printed_holds = separable_window_check(q, k, s_printed)
    over_s = over_holds = None
    if constant_override is not None:
        over_s = (constant_override / k) ** (1.0 / (k - 1))
        over_holds = separable_window_check(q, k, over_s)
    if not printed_holds:
        warn_regime(
            "stability-boundary-fails",
            "the stability-boundary inequality fails at the printed constant "
            f"1.01 for q={q}; report carries both readings",
        )
    return StabilityBoundaryReport(
        q=float(q) if not isinstance(q, int) else q,
        k=k,
        printed_constant=printed,
        printed_s=s_printed,
        printed_holds=printed_holds,
        override_constant=constant_override,
        override_s=over_s,
        override_holds=over_holds,
    )


def kappa(q: int, k: int) -> float:
    """Separability window width parameter ``q**(1-k) * (ln q)**20``.

    At small ``q`` this exceeds the range in which the separability window
    is nonempty; a structured warning is emitted in that case (the formula
    is intended for large ``q``).
    """
    if q < 2:
        raise ValueError(f"kappa requires q >= 2, got {q}")
    value = float(q) ** (1 - k) * math.log(q) ** 20
    if 1.0 - value <= stability_constant(k):
        warn_regime(
            "kappa-out-of-range",
            f"kappa({q},{k}) = {value:.6g} leaves no separability window at "
            "this q; large-q formula",
        )
    return value


def stability_constant(k: int) -> float:
    """Entry-size threshold constant ``(1.01/k)**(1/(k-1))``."""
    if k < 2:
        raise ValueError(f"stability_constant requires k >= 2, got {k}")
    return (1.01 / k) ** (1.0 / (k - 1))


def chernoff_phi(x: float) -> float:
    """Large-deviations rate ``(1+x) ln(1+x) - x`` for ``x > -1``."""
    if x <= -1:
        raise ValueError(f"chernoff_phi requires x > -1, got {x}")
    return (1.0 + x) * math.log1p(x) - x
