"""Weighted shifts built from a measured functional graph.

The composition operator ``f -> f o T`` on ``L^2(mu)`` is modelled by the
weighted shift ``S e_u = sum_{T v = u} lambda_v e_v`` with
``lambda_v^2 = mu(v) / mu(T v)``.  Only squared weights are stored.

Infinite rays are described by :class:`TailTemplate`: a chain of vertices
beyond an explicit leaf whose measures follow a polynomial.  Norms along a
ray telescope, ``||S^n e_(k)||^2 = mu(k + n) / mu(k)``, so tails never need
truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactmath import Polynomial
from .graph import (
    CYCLE_WITH_TREES,
    Classification,
    FunctionalGraph,
    GraphError,
    VertexId,
    classify,
    connected_components,
)

DEFAULT_POSITIVITY_HORIZON = 64


class InstanceError(ValueError):
    """A measured graph violates one of its invariants."""


@dataclass(frozen=True)
class TailTemplate:
    """Ray beyond ``attach``; position ``k`` carries measure ``mu_poly(k)``."""

    attach: VertexId
    mu_poly: Polynomial

    def mu(self, k: int) -> Fraction:
        return self.mu_poly(k)

    @property
    def degree(self) -> int:
        return self.mu_poly.degree


@dataclass(frozen=True)
class MeasuredGraph:
    graph: FunctionalGraph
    measure: Mapping[VertexId, Fraction]
    tails: tuple[TailTemplate, ...]
    classification: Classification
    _tails_at: Mapping[VertexId, tuple[int, ...]] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        at: dict[VertexId, list[int]] = {}
        for i, t in enumerate(self.tails):
            at.setdefault(t.attach, []).append(i)
        object.__setattr__(self, "_tails_at", {v: tuple(ix) for v, ix in at.items()})

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return self.graph.vertices

    @property
    def cycle(self) -> tuple[VertexId, ...]:
        return self.classification.cycle

    @property
    def kappa(self) -> int:
        return self.classification.kappa

    def tails_at(self, v: VertexId) -> tuple[int, ...]:
        return self._tails_at.get(v, ())

    def image(self, v: VertexId) -> VertexId:
        return self.graph.image[v]

    def has_trees(self) -> bool:
        return bool(self.classification.trees)

    def tree_vertices(self) -> list[VertexId]:
        return [v for t in self.classification.trees for v in t.members]

    def tree_height(self) -> int:
        """Largest distance from the cycle to an explicit tree vertex."""
        depth = {}
        best = 0
        for t in self.classification.trees:
            for v in t.members:
                depth[v] = 1 if v == t.root else depth[self.image(v)] + 1
                best = max(best, depth[v])
        return best

    def max_tail_degree(self) -> int:
        return max((t.degree for t in self.tails), default=-1)


def measured_graph(
    graph: FunctionalGraph,
    measure: Mapping[VertexId, Fraction],
    tails: Sequence[TailTemplate] = (),
    positivity_horizon: int = DEFAULT_POSITIVITY_HORIZON,
) -> MeasuredGraph:
    """Validate and assemble a connected measured graph."""
    for v in graph.vertices:
        if v not in measure:
            raise InstanceError(f"missing measure for vertex {v!r}")
        if Fraction(measure[v]) <= 0:
            raise InstanceError(f"measure must be positive at vertex {v!r}")
    extra = set(measure) - set(graph.vertices)
    if extra:
        raise InstanceError(f"measure given for unknown vertex {sorted(extra)[0]!r}")
    classification = classify(graph)
    on_cycle = set(classification.cycle)
    for t in tails:
        if t.attach not in graph.image:
            raise InstanceError(f"tail attached to unknown vertex {t.attach!r}")
        if t.attach in on_cycle:
            raise InstanceError(f"tail must attach to a tree leaf, {t.attach!r} is on the cycle")
        if graph.children(t.attach):
            raise InstanceError(f"tail must attach to a leaf, {t.attach!r} has children")
        if t.mu_poly.is_zero() or t.mu_poly.leading <= 0:
            raise InstanceError(f"tail at {t.attach!r} needs a positive leading coefficient")
        for k in range(positivity_horizon + 1):
            if t.mu(k) <= 0:
                raise InstanceError(f"tail at {t.attach!r} has non-positive measure at position {k}")
    return MeasuredGraph(
        graph,
        {v: Fraction(measure[v]) for v in graph.vertices},
        tuple(tails),
        classification,
    )


def split_components(
    graph: FunctionalGraph,
    measure: Mapping[VertexId, Fraction],
    tails: Sequence[TailTemplate] = (),
    positivity_horizon: int = DEFAULT_POSITIVITY_HORIZON,
) -> list[MeasuredGraph]:
    """One measured graph per weakly connected component."""
    out = []
    for comp in connected_components(graph):
        keep = set(comp.vertices)
        out.append(
            measured_graph(
                comp,
                {v: measure[v] for v in comp.vertices if v in measure},
                [t for t in tails if t.attach in keep],
                positivity_horizon,
            )
        )
    attached = {t.attach for t in tails}
    unknown = attached - set(graph.vertices)
    if unknown:
        raise InstanceError(f"tail attached to unknown vertex {sorted(unknown)[0]!r}")
    return out


# ---------------------------------------------------------------------------
# Weights and boundedness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Weights:
    lambda_sq: Mapping[VertexId, Fraction]
    tails: tuple[TailTemplate, ...]
    attach_measure: tuple[Fraction, ...]

    def __getitem__(self, v: VertexId) -> Fraction:
        return self.lambda_sq[v]

    def tail(self, i: int, k: int) -> Fraction:
        """Squared weight at position ``k`` of tail ``i``."""
        t = self.tails[i]
        if k == 0:
            return t.mu(0) / self.attach_measure[i]
        return t.mu(k) / t.mu(k - 1)


def weights_from_measure(mg: MeasuredGraph) -> Weights:
    mu = mg.measure
    lam = {v: mu[v] / mu[mg.image(v)] for v in mg.vertices}
    return Weights(lam, mg.tails, tuple(mu[t.attach] for t in mg.tails))


def radon_nikodym(mg: MeasuredGraph) -> dict[VertexId, Fraction]:
    """``h_T(v) = mu(T^-1 {v}) / mu(v)`` on explicit vertices."""
    mu = mg.measure
    h = {}
    for v in mg.vertices:
        mass = sum((mu[u] for u in mg.graph.children(v)), Fraction(0))
        mass += sum((mg.tails[i].mu(0) for i in mg.tails_at(v)), Fraction(0))
        h[v] = mass / mu[v]
    return h


def check_bounded(mg: MeasuredGraph, horizon: int = DEFAULT_POSITIVITY_HORIZON) -> Fraction:
    """Supremum of ``h_T`` over explicit vertices and tail positions.

    Along a ray ``h_T(k) = mu(k+1)/mu(k)``; positions up to ``horizon`` are
    evaluated and the limit (1, by comparing leading terms) is included.
    """
    best = max(radon_nikodym(mg).values())
    for t in mg.tails:
        if t.mu_poly.is_zero() or t.mu_poly.leading <= 0:
            raise InstanceError(f"unbounded tail at {t.attach!r}")
        best = max(best, Fraction(1))
        for k in range(horizon + 1):
            best = max(best, t.mu(k + 1) / t.mu(k))
    return best


# ---------------------------------------------------------------------------
# Norm tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormTable:
    """``values[v][n] = ||S^n e_v||^2`` for explicit ``v`` and ``n <= horizon``."""

    horizon: int
    values: Mapping[VertexId, tuple[Fraction, ...]]
    tails: tuple[TailTemplate, ...]

    def __call__(self, v: VertexId, n: int) -> Fraction:
        if n > self.horizon:
            raise IndexError(f"n={n} exceeds table horizon {self.horizon}")
        return self.values[v][n]

    def tail(self, i: int, k: int, n: int) -> Fraction:
        t = self.tails[i]
        return t.mu(k + n) / t.mu(k)

    def sequence(self, v: VertexId) -> tuple[Fraction, ...]:
        return self.values[v]


def child_sum_table(mg: MeasuredGraph, horizon: int, edge_sq, tail_term) -> dict[VertexId, tuple[Fraction, ...]]:
    """Rows of ``t(v, n+1) = sum_u edge_sq(v, u) t(u, n) + sum_tails tail_term(v, i, n)``.

    Filled level by level in ``n``, so cycle vertices need no special order.
    """
    cur = {v: Fraction(1) for v in mg.vertices}
    cols = {v: [Fraction(1)] for v in mg.vertices}
    kids = {v: [(u, edge_sq(v, u)) for u in mg.graph.children(v)] for v in mg.vertices}
    for n in range(horizon):
        nxt = {}
        for v in mg.vertices:
            acc = Fraction(0)
            for u, w in kids[v]:
                acc += w * cur[u]
            for i in mg.tails_at(v):
                acc += tail_term(v, i, n)
            nxt[v] = acc
        for v in mg.vertices:
            cols[v].append(nxt[v])
        cur = nxt
    return {v: tuple(c) for v, c in cols.items()}


def squared_norms(mg: MeasuredGraph, horizon: int) -> NormTable:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    w = weights_from_measure(mg)
    mu = mg.measure

    def tail_term(v, i, n):
        # lambda^2 at position 0 times ||S^n e_(0)||^2 telescopes to mu(n)/mu(v)
        return mg.tails[i].mu(n) / mu[v]

    values = child_sum_table(mg, horizon, lambda v, u: w[u], tail_term)
    return NormTable(horizon, values, mg.tails)


@dataclass(frozen=True)
class LambdaProducts:
    """``table[(m, i)] = prod_{j=m+1}^{m+i} lambda^2_{v_(j mod kappa)}``."""

    kappa: int
    table: Mapping[tuple[int, int], Fraction]

    def __call__(self, m: int, i: int) -> Fraction:
        return self.table[(m, i)]


def lambda_products(mg: MeasuredGraph) -> LambdaProducts:
    c = mg.classification
    if c.variant != CYCLE_WITH_TREES:
        raise GraphError("lambda products need a graph with a cycle")
    w = weights_from_measure(mg)
    k = c.kappa
    table = {}
    for m in range(k):
        acc = Fraction(1)
        table[(m, 0)] = acc
        for i in range(1, k + 1):
            acc *= w[c.cycle[(m + i) % k]]
            table[(m, i)] = acc
    return LambdaProducts(k, table)


@dataclass(frozen=True)
class RecursionCheck:
    ok: bool
    violation: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def recursion_rhs(mg: MeasuredGraph, table: NormTable, lp: LambdaProducts, m: int, n: int) -> Fraction:
    """Right-hand side of ``s_{v_m}(n + kappa) = s_{v_m}(n) + tree terms``."""
    c = mg.classification
    k = c.kappa
    w = weights_from_measure(mg)
    acc = table(c.cycle[m], n)
    for i in range(k):
        for t in c.trees_at((i + m) % k):
            acc += lp(m, i) * w[t.root] * table(t.root, n + k - i - 1)
    return acc


def verify_recursion(mg: MeasuredGraph, table: NormTable) -> RecursionCheck:
    k = mg.kappa
    if table.horizon < k:
        raise ValueError("table horizon must be at least the cycle length")
    lp = lambda_products(mg)
    for m in range(k):
        v = mg.cycle[m]
        for n in range(table.horizon - k + 1):
            if table(v, n + k) != recursion_rhs(mg, table, lp, m, n):
                return RecursionCheck(False, (m, n))
    return RecursionCheck(True)
