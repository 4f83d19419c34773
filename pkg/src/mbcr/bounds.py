"""Exact repair-bandwidth bounds for cooperative repair.

Everything here is computed with :class:`fractions.Fraction`; floats
only appear when a caller asks for a decimal rendering.

A cut type is an ordered composition (l_1, ..., l_s) of k with every
part in [1, r].  Each type yields a linear constraint on the per-link
downloads (beta1 from survivors, beta2 between newcomers)::

    B <= a * beta1 + b * beta2

and the minimum-bandwidth operating point is the optimum of the
two-variable LP ``min d*beta1 + (r-1)*beta2`` over all such constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from .errors import ParameterError, UnsupportedRegimeError

Rational = Fraction
CutType = tuple[int, ...]


@dataclass(frozen=True)
class SystemParams:
    B: Fraction
    k: int
    d: int
    r: int
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "B", Fraction(self.B))
        if self.k < 1 or self.r < 1:
            raise ParameterError(f"need k >= 1 and r >= 1, got k={self.k}, r={self.r}")
        if self.d < self.k:
            raise UnsupportedRegimeError(f"bounds hold only for d >= k (got d={self.d}, k={self.k})")
        if self.n is not None and self.n < self.k:
            raise ParameterError(f"need k <= n, got k={self.k}, n={self.n}")
        if self.B <= 0:
            raise ParameterError("file size must be positive")

    @property
    def denominator(self) -> int:
        """k(2d + r - k), the common denominator of the closed forms."""
        return self.k * (2 * self.d + self.r - self.k)


def _check_regime(k: int, d: int) -> None:
    if d < k:
        raise UnsupportedRegimeError(f"bounds hold only for d >= k (got d={d}, k={k})")


def gamma(d: int, r: int, beta1, beta2) -> Fraction:
    """Packets received per newcomer: d*beta1 + (r-1)*beta2."""
    return d * Fraction(beta1) + (r - 1) * Fraction(beta2)


def mbcr_lower_bound(p: SystemParams) -> Fraction:
    return p.B * (2 * p.d + p.r - 1) / p.denominator


def mbcr_point(p: SystemParams) -> tuple[Fraction, Fraction]:
    unit = p.B / p.denominator
    return 2 * unit, unit


def single_loss_bound(B, k: int, d: int) -> Fraction:
    """Minimum bandwidth for one-by-one repair, 2dB / (k(2d + 1 - k))."""
    _check_regime(k, d)
    return Fraction(2 * d) * Fraction(B) / (k * (2 * d + 1 - k))


def enumerate_cut_types(k: int, r: int) -> list[CutType]:
    """All ordered compositions of k with parts in [1, r], lexicographic."""
    if k < 1 or r < 1:
        raise ParameterError("k and r must be positive")

    def rec(rest: int) -> Iterator[CutType]:
        if rest == 0:
            yield ()
            return
        for first in range(1, min(r, rest) + 1):
            for tail in rec(rest - first):
                yield (first,) + tail

    return list(rec(k))


def validate_cut_type(t: Sequence[int], k: int | None = None, r: int | None = None) -> CutType:
    t = tuple(int(x) for x in t)
    if not t or any(x < 1 for x in t):
        raise ParameterError(f"cut type parts must be positive: {t}")
    if k is not None and sum(t) != k:
        raise ParameterError(f"cut type {t} does not sum to k={k}")
    if r is not None and max(t) > r:
        raise ParameterError(f"cut type {t} has a part larger than r={r}")
    return t


def cut_coefficients(t: Sequence[int], d: int, r: int) -> tuple[int, int]:
    """(a, b) such that the type-t cut gives B <= a*beta1 + b*beta2."""
    k = sum(t)
    cross = sum(x * y for x, y in combinations(t, 2))
    return d * k - cross, r * k - sum(x * x for x in t)


def file_size_bound(t: Sequence[int], d: int, r: int, beta1, beta2) -> Fraction:
    """Upper bound on B from a cut of type t, in closed algebraic form."""
    a, b = cut_coefficients(validate_cut_type(t), d, r)
    return a * Fraction(beta1) + b * Fraction(beta2)


def staged_cut_terms(t: Sequence[int], d: int, r: int, beta1, beta2) -> list[Fraction]:
    """Per-stage contributions l_v (d - sum_{j<v} l_j) beta1 + l_v (r - l_v) beta2."""
    t = validate_cut_type(t)
    out, before = [], 0
    for part in t:
        out.append(part * (d - before) * Fraction(beta1) + part * (r - part) * Fraction(beta2))
        before += part
    return out


@dataclass(frozen=True)
class Constraint:
    """B <= a*beta1 + b*beta2, derived from ``cut_type``."""

    a: int
    b: int
    cut_type: CutType
    label: str = ""

    def value(self, beta1, beta2) -> Fraction:
        return self.a * Fraction(beta1) + self.b * Fraction(beta2)


def special_constraints(k: int, d: int, r: int) -> list[Constraint]:
    """The binding constraints used in the optimality argument.

    Always the all-ones type; additionally type (k) when k <= r, otherwise
    (r, ..., r, b) with a = floor(k/r) copies of r and remainder b.
    """
    _check_regime(k, d)
    ones = (1,) * k
    out = [Constraint(*cut_coefficients(ones, d, r), ones, "all-ones")]
    if k <= r:
        t = (k,)
        out.append(Constraint(*cut_coefficients(t, d, r), t, "single-stage"))
    else:
        a, b = divmod(k, r)
        t = (r,) * a + ((b,) if b else ())
        out.append(Constraint(*cut_coefficients(t, d, r), t, "greedy-r"))
    return out


def all_constraints(k: int, d: int, r: int) -> list[Constraint]:
    return [Constraint(*cut_coefficients(t, d, r), t) for t in enumerate_cut_types(k, r)]


@dataclass(frozen=True)
class LPResult:
    """Optimum of min d*beta1 + (r-1)*beta2 s.t. all cut constraints.

    ``vertices`` lists every optimal vertex of the feasible region.
    ``unique`` is false when the optimum is attained on a whole edge or
    ray; then ``beta1``/``beta2`` is the optimal point with beta1 = 2*beta2
    if the optimal set contains one (see :func:`optimal_tradeoff_lp`).
    """

    beta1: Fraction
    beta2: Fraction
    gamma: Fraction
    vertices: tuple[tuple[Fraction, Fraction], ...]
    unique: bool
    constraints: tuple[Constraint, ...]

    @property
    def point(self) -> tuple[Fraction, Fraction]:
        return self.beta1, self.beta2


def _feasible(pt, B, constraints) -> bool:
    b1, b2 = pt
    return b1 >= 0 and b2 >= 0 and all(c.value(b1, b2) >= B for c in constraints)


def optimal_tradeoff_lp(p: SystemParams, constraints: Sequence[Constraint] | None = None) -> LPResult:
    """Solve the bandwidth LP exactly by vertex enumeration.

    Candidate vertices are all pairwise intersections of constraint lines
    and their intersections with the two axes.  Because the region is
    upward closed and the objective has non-negative weights, the optimum
    is attained at a vertex.

    When several points are optimal (k = 1, where only one constraint
    exists and it is parallel to the objective, or r = 1, where beta2 has
    zero weight everywhere), the returned representative is the optimal
    point on the ray beta1 = 2*beta2, falling back to the lowest optimal
    vertex.  ``unique`` records which case occurred.
    """
    B, d, r = p.B, p.d, p.r
    cons = tuple(constraints if constraints is not None else all_constraints(p.k, d, r))
    lines = [(Fraction(c.a), Fraction(c.b), B) for c in cons]
    lines += [(Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0))]

    candidates = set()
    for (a1, b1, c1), (a2, b2, c2) in combinations(set(lines), 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        candidates.add(((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det))
    feasible = [pt for pt in candidates if _feasible(pt, B, cons)]
    if not feasible:
        raise AssertionError(f"LP has no feasible vertex for {p}")

    def objective(pt):
        return gamma(d, r, *pt)

    best = min(objective(pt) for pt in feasible)
    vertices = tuple(sorted(pt for pt in feasible if objective(pt) == best))

    # The optimal set is a face: a single vertex, a segment between two
    # vertices, or a ray when a variable carries zero weight.
    unique = len(vertices) == 1 and (r > 1 or not _ray_along_beta2(vertices[0], B, cons))
    choice = vertices[0]
    if not unique:
        ratio_pt = _ratio_point_on_face(vertices, best, d, r, B, cons)
        if ratio_pt is not None:
            choice = ratio_pt
    return LPResult(choice[0], choice[1], best, vertices, unique, cons)


def _ray_along_beta2(pt, B, cons) -> bool:
    # With r = 1 the objective ignores beta2; moving up stays feasible and optimal.
    return _feasible((pt[0], pt[1] + 1), B, cons)


def _ratio_point_on_face(vertices, best, d, r, B, cons):
    """Optimal point with beta1 = 2*beta2, if the optimal face contains one."""
    # On the line beta1 = 2*beta2 the objective is (2d + r - 1) * beta2.
    beta2 = best / (2 * d + r - 1)
    pt = (2 * beta2, beta2)
    if _feasible(pt, B, cons) and gamma(d, r, *pt) == best:
        return pt
    return None


def lp_matches_closed_form(p: SystemParams) -> bool:
    res = optimal_tradeoff_lp(p)
    return res.point == mbcr_point(p) and res.gamma == mbcr_lower_bound(p)


def render(q: Fraction, places: int = 3) -> str:
    """Exact value plus a decimal approximation, e.g. ``16/3 (~5.333)``."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q} (~{float(q):.{places}f})"
