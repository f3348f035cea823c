"""Deciding m-isometricity of weighted shifts on graphs with one cycle.

Two independent routes are provided:

* the defect oracle, which evaluates the m-th forward difference of
  ``n -> ||S^n e_v||^2`` at every basis vector (``S`` maps basis vectors to
  mutually orthogonal vectors, so the operator identity reduces to these
  diagonal entries);
* the rank criterion, which only needs tree polynomials of degree
  ``<= m - 2``, the polynomial ``q`` and two rank computations.

Also here: complete hyperexpansivity sweeps and the generator of the
3-isometric family whose only branching points lie on the cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exactmath import (
    Polynomial,
    RationalMatrix,
    matrix_rank,
    matrix_solve,
    poly_interpolate,
)
from .graph import FunctionalGraph, VertexId
from .shift import (
    DEFAULT_POSITIVITY_HORIZON,
    InstanceError,
    MeasuredGraph,
    NormTable,
    TailTemplate,
    lambda_products,
    measured_graph,
    squared_norms,
    weights_from_measure,
)

FIT_MARGIN = 8


class NotMIsometric(Exception):
    """A prerequisite of the rank criterion fails (a tree norm is not polynomial)."""


def default_horizon(mg: MeasuredGraph, m: int) -> int:
    """Sweep horizon for order ``m``.

    Beyond the explicit trees every norm sequence obeys a linear recurrence
    of order at most ``kappa + max(d + 1, m)`` (``d`` the largest tail
    degree), so agreement with a degree ``m - 1`` polynomial on this many
    points past the explicit depth settles the question for all ``n``.
    """
    base = max(2 * m + 10, mg.kappa + m + 5)
    d = max(mg.max_tail_degree(), 0)
    decisive = mg.tree_height() + mg.kappa + max(d + 1, m) + m + 1
    return max(base, decisive, m + d + FIT_MARGIN)


# ---------------------------------------------------------------------------
# Defect oracle
# ---------------------------------------------------------------------------


def forward_difference(seq: Sequence[Fraction], m: int, n: int) -> Fraction:
    return sum(
        ((-1) ** (m - k) * math.comb(m, k) * seq[n + k] for k in range(m + 1)),
        Fraction(0),
    )


def defect(table: NormTable, v: VertexId, m: int, n: int) -> Fraction:
    """``sum_k (-1)^(m-k) C(m,k) ||S^(n+k) e_v||^2``."""
    if n + m > table.horizon:
        raise IndexError(f"defect at n={n}, m={m} needs horizon {n + m}, table has {table.horizon}")
    return forward_difference(table.sequence(v), m, n)


@dataclass(frozen=True)
class VertexDefect:
    max_abs: Fraction
    first_nonzero: tuple[int, Fraction] | None


@dataclass(frozen=True)
class DefectReport:
    m: int
    horizon: int
    vertices: Mapping[str, VertexDefect]

    @property
    def verdict(self) -> bool:
        return all(d.first_nonzero is None for d in self.vertices.values())

    def first_violation(self) -> tuple[str, int, Fraction] | None:
        for key, d in self.vertices.items():
            if d.first_nonzero is not None:
                return key, d.first_nonzero[0], d.first_nonzero[1]
        return None


def tail_key(mg: MeasuredGraph, i: int) -> str:
    return f"tail[{i}]@{mg.tails[i].attach}"


def _sweep(seq: Sequence[Fraction], m: int, count: int) -> VertexDefect:
    worst = Fraction(0)
    first = None
    for n in range(count):
        d = forward_difference(seq, m, n)
        if d != 0 and first is None:
            first = (n, d)
        worst = max(worst, abs(d))
    return VertexDefect(worst, first)


def is_m_isometric_oracle(mg: MeasuredGraph, m: int, horizon: int | None = None,
                          table: NormTable | None = None) -> DefectReport:
    if horizon is None:
        horizon = table.horizon if table is not None else default_horizon(mg, m)
    if horizon < m:
        raise ValueError("horizon must be at least m")
    if table is None or table.horizon < horizon:
        table = squared_norms(mg, horizon)
    count = horizon - m + 1
    out: dict[str, VertexDefect] = {}
    for v in mg.vertices:
        out[v] = _sweep(table.sequence(v)[: horizon + 1], m, count)
    # position k of a ray has defects mu(0)/mu(k) times those of position 0
    # shifted by k, so position 0 covers every (k, n) with k + n <= horizon - m
    for i, t in enumerate(mg.tails):
        seq = [t.mu(n) / t.mu(0) for n in range(horizon + 1)]
        out[tail_key(mg, i)] = _sweep(seq, m, count)
    return DefectReport(m, horizon, out)


# ---------------------------------------------------------------------------
# Rank criterion
# ---------------------------------------------------------------------------


def fit_norm_polynomial(table: NormTable, v: VertexId, degree_bound: int,
                        margin: int = FIT_MARGIN) -> Polynomial | None:
    """Polynomial of degree <= ``degree_bound`` matching the whole row, or None."""
    if table.horizon < degree_bound + margin:
        raise ValueError(
            f"fit needs horizon >= {degree_bound + margin}, table has {table.horizon}"
        )
    seq = table.sequence(v)
    p = poly_interpolate([(n, seq[n]) for n in range(degree_bound + 1)])
    for n in range(degree_bound + 1, table.horizon + 1):
        if p(n) != seq[n]:
            return None
    return p


def build_A(m: int, kappa: int) -> RationalMatrix:
    """Row r < m-1 holds the coefficients of ``b_(m-2-r)`` in terms of ``c``."""
    if m < 1 or kappa < 1:
        raise ValueError("build_A needs m >= 1 and kappa >= 1")

    def d(i: int, j: int) -> int:
        return math.comb(m - i, m - j - i) * kappa ** j

    rows = []
    for r in range(1, m):
        rows.append([d(i, r - i + 1) if i <= r else 0 for i in range(1, m + 1)])
    rows.append([0] * (m - 1) + [1])
    return RationalMatrix.from_rows(rows, cols=m)


def build_B(m: int, kappa: int) -> RationalMatrix:
    if kappa < 2:
        raise ValueError("B is only defined for kappa >= 2")
    return RationalMatrix.from_rows(
        [[l ** (m - 1 - j) for j in range(m)] for l in range(1, kappa)], cols=m
    )


def tree_polynomials(mg: MeasuredGraph, table: NormTable, m: int) -> dict[VertexId, Polynomial]:
    """Norm polynomials of degree <= m-2 for every explicit tree vertex.

    Raises :class:`NotMIsometric` naming the first vertex or tail without one.
    """
    bound = m - 2
    fits = {}
    for t in mg.classification.trees:
        for v in t.members:
            p = fit_norm_polynomial(table, v, bound)
            if p is None:
                raise NotMIsometric(f"not m-isometric: tree polynomial missing at {v}")
            fits[v] = p
    for i, t in enumerate(mg.tails):
        # ray norms are mu(k+n)/mu(k): a polynomial in n of degree deg(mu)
        if t.degree > bound:
            raise NotMIsometric(f"not m-isometric: tree polynomial missing at {tail_key(mg, i)}")
    return fits


def q_polynomial(mg: MeasuredGraph, table: NormTable, m: int,
                 fits: Mapping[VertexId, Polynomial] | None = None) -> Polynomial:
    c = mg.classification
    k = c.kappa
    if fits is None:
        fits = tree_polynomials(mg, table, m)
    lp = lambda_products(mg)
    w = weights_from_measure(mg)
    q = Polynomial()
    for i in range(k):
        for t in c.trees_at(i):
            q = q + fits[t.root].shift(k - i - 1) * (lp(0, i) * w[t.root])
    return q


@dataclass(frozen=True)
class RankCertificate:
    m: int
    kappa: int
    verdict: bool
    reason: str
    A: RationalMatrix | None = None
    b: tuple[Fraction, ...] = ()
    a: tuple[Fraction, ...] = ()
    q: Polynomial | None = None
    rank_A_tilde: int | None = None
    rank_B_tilde: int | None = None
    p0: Polynomial | None = None


def rank_criterion(mg: MeasuredGraph, table: NormTable, m: int) -> RankCertificate:
    # m = 1 is the degenerate case: no tree admits a polynomial of degree -1
    if m < 1:
        raise ValueError("the rank criterion needs m >= 1")
    k = mg.kappa
    try:
        q = q_polynomial(mg, table, m)
    except NotMIsometric as exc:
        return RankCertificate(m, k, False, str(exc))
    A = build_A(m, k)
    b = [q.coeff(l) for l in range(m - 2, -1, -1)] + [Fraction(1)]
    A_tilde = A.hstack(RationalMatrix.column(b))
    rank_a = matrix_rank(A_tilde)
    a: list[Fraction] = []
    rank_b = None
    if k > 1:
        a = [table(mg.cycle[0], i) for i in range(1, k)]
        B_tilde = A_tilde.vstack(build_B(m, k).hstack(RationalMatrix.column(a)))
        rank_b = matrix_rank(B_tilde)
        verdict = rank_a == m and rank_b == m
        reason = "rank conditions hold" if verdict else f"rank B~ = {rank_b}, rank A~ = {rank_a}, m = {m}"
    else:
        verdict = rank_a == m
        reason = "tree polynomials exist (cycle of length 1)"
    p0 = None
    if verdict:
        c = matrix_solve(A, b)  # (c_{m-1}, ..., c_0)
        p0 = Polynomial(reversed(c))
    return RankCertificate(m, k, verdict, reason, A, tuple(b), tuple(a), q, rank_a, rank_b, p0)


@dataclass(frozen=True)
class CrossValidation:
    agree: bool
    oracle: DefectReport
    rank: RankCertificate

    @property
    def verdict(self) -> bool:
        return self.oracle.verdict and self.rank.verdict


def cross_validate(mg: MeasuredGraph, m: int, horizon: int | None = None) -> CrossValidation:
    if horizon is None:
        horizon = default_horizon(mg, m)
    table = squared_norms(mg, horizon)
    oracle = is_m_isometric_oracle(mg, m, horizon, table=table)
    rank = rank_criterion(mg, table, m)
    return CrossValidation(oracle.verdict == rank.verdict, oracle, rank)


# ---------------------------------------------------------------------------
# Complete hyperexpansivity
# ---------------------------------------------------------------------------


def ch_sums(seq: Sequence[Fraction], max_order: int) -> list[Fraction]:
    """``sum_{k=0}^{n} (-1)^k C(n,k) seq[k]`` for n = 1..max_order."""
    return [
        sum(((-1) ** k * math.comb(n, k) * seq[k] for k in range(n + 1)), Fraction(0))
        for n in range(1, max_order + 1)
    ]


def ch_check(table: NormTable, v: VertexId, max_order: int) -> tuple[int, Fraction] | None:
    """First ``(n, value)`` with a positive sum, or None when every sum is <= 0."""
    if table.horizon < max_order:
        raise ValueError(f"ch_check needs horizon >= {max_order}")
    for n, s in enumerate(ch_sums(table.sequence(v), max_order), start=1):
        if s > 0:
            return n, s
    return None


def tail_ch_violation(tail: TailTemplate, max_order: int,
                      search: int = DEFAULT_POSITIVITY_HORIZON) -> tuple[int, int, Fraction] | None:
    """First ``(k, n, value)`` violation along a ray, or None.

    At position k the sums are ``(-1)^n Delta^n mu(k) / mu(k)``.  Degree <= 1
    never violates (positive leading coefficient); for degree >= 2 the second
    difference has positive leading coefficient, so it turns positive past
    the Cauchy root bound even if the finite search misses it.
    """
    p = tail.mu_poly
    # orders above deg(mu) vanish identically
    diffs = []
    cur = p
    for n in range(1, min(p.degree, max_order) + 1):
        cur = cur.shift(1) - cur
        diffs.append((n, cur if n % 2 == 0 else -cur))
    for k in range(search + 1):
        for n, d in diffs:
            val = d(k)
            if val > 0:
                return k, n, val / p(k)
    if p.degree <= 1 or max_order < 2:
        return None
    second = diffs[1][1]
    lead = second.leading
    k0 = math.ceil(1 + max(abs(c / lead) for c in second.coeffs[:-1])) if second.degree > 0 else 0
    k0 = max(k0, search + 1)
    return k0, 2, second(k0) / p(k0)


@dataclass(frozen=True)
class CHReport:
    max_order: int
    violations: Mapping[str, tuple]
    sums: Mapping[VertexId, tuple[Fraction, ...]]

    @property
    def verdict(self) -> bool:
        return not self.violations


def ch_sweep(mg: MeasuredGraph, max_order: int, table: NormTable | None = None) -> CHReport:
    if table is None or table.horizon < max_order:
        table = squared_norms(mg, max_order)
    violations: dict[str, tuple] = {}
    sums = {}
    for v in mg.vertices:
        sums[v] = tuple(ch_sums(table.sequence(v), max_order))
        hit = ch_check(table, v, max_order)
        if hit is not None:
            violations[v] = hit
    for i, t in enumerate(mg.tails):
        hit = tail_ch_violation(t, max_order)
        if hit is not None:
            violations[tail_key(mg, i)] = hit
    return CHReport(max_order, violations, sums)


# ---------------------------------------------------------------------------
# 3-isometric family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    """Cycle ``0 -> kappa-1 -> ... -> 1 -> 0`` under T with affine branches.

    ``branches[i]`` lists ``(mu((i,j,0)), mu((i,j,1)))`` for the branches
    attached at cycle vertex ``i``.
    """

    kappa: int
    mu0: Fraction
    branches: tuple[tuple[tuple[Fraction, Fraction], ...], ...]

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be at least 1")
        if len(self.branches) != self.kappa:
            raise ValueError("need one branch list per cycle vertex")
        if self.mu0 <= 0:
            raise ValueError("mu(0) must be positive")
        for i, bl in enumerate(self.branches):
            for j, (b0, b1) in enumerate(bl, start=1):
                if b0 <= 0 or b1 <= 0:
                    raise ValueError(f"branch ({i},{j}) needs positive measures")
                if b1 < b0:
                    # mu((i,j,k)) = b0 + (b1 - b0) k must stay positive for all k
                    raise ValueError(f"branch ({i},{j}) has negative slope; measure turns negative")


def family_cycle_label(i: int) -> str:
    return str(i)


def family_branch_label(i: int, j: int) -> str:
    return f"{i}.{j}.0"


@dataclass(frozen=True)
class FamilyInstance:
    instance: MeasuredGraph
    A: Fraction
    B: Fraction
    q0: Polynomial
    cycle_measure: tuple[Fraction, ...]


def family3_generate(spec: FamilySpec, positivity_horizon: int = DEFAULT_POSITIVITY_HORIZON) -> FamilyInstance:
    k = spec.kappa
    A = Fraction(0)
    B = Fraction(0)
    for i, bl in enumerate(spec.branches):
        for b0, b1 in bl:
            A += b1 - b0
            B += (b1 - b0) * (k - i - 1) + b0
    q0 = Polynomial([spec.mu0, (2 * B - A * k) / (2 * k), A / (2 * k)])

    def branch_mu(b0, b1, pos):
        return (b1 - b0) * pos + b0

    cyc = [Fraction(spec.mu0)]
    for i in range(1, k):
        val = q0(i) - sum(
            (branch_mu(b0, b1, i - l - 1) for l in range(i) for b0, b1 in spec.branches[l]),
            Fraction(0),
        )
        if val <= 0:
            raise InstanceError(f"family constraint infeasible: generated mu({i}) = {val}")
        cyc.append(val)

    vertices = [family_cycle_label(i) for i in range(k)]
    image = {family_cycle_label(0): family_cycle_label(k - 1)}
    for i in range(1, k):
        image[family_cycle_label(i)] = family_cycle_label(i - 1)
    measure = {family_cycle_label(i): cyc[i] for i in range(k)}
    tails = []
    for i, bl in enumerate(spec.branches):
        for j, (b0, b1) in enumerate(bl, start=1):
            lab = family_branch_label(i, j)
            vertices.append(lab)
            image[lab] = family_cycle_label(i)
            measure[lab] = Fraction(b0)
            # position k beyond (i,j,0) is (i,j,k+1)
            tails.append(TailTemplate(lab, Polynomial([b1, b1 - b0])))
    graph = FunctionalGraph(tuple(vertices), image)
    mg = measured_graph(graph, measure, tails, positivity_horizon)
    return FamilyInstance(mg, A, B, q0, tuple(cyc))
