"""Cauchy dual of a 2-isometric shift and its subnormality test.

The dual has squared edge weights ``c_v^2 lambda_u^2`` on ``(v, u)`` with
``c_v = ||S e_v||^-2``.  Subnormality reduces to each cycle vertex having a
two-atom moment measure ``(1 - alpha) delta_r + alpha delta_1`` where
``r^kappa = D``.  The atom ``r`` is irrational in general, so the moment
equations are compared after raising both sides to the power ``kappa``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .exactmath import Polynomial
from .graph import FunctionalGraph, VertexId
from .misometry import cross_validate, default_horizon
from .shift import (
    MeasuredGraph,
    TailTemplate,
    child_sum_table,
    measured_graph,
    squared_norms,
    weights_from_measure,
)


class NotLeftInvertible(ValueError):
    pass


class NotTwoIsometric(ValueError):
    pass


def adjoint_weight(mg: MeasuredGraph, v: VertexId) -> tuple[VertexId, Fraction]:
    """``S* e_v = lambda_v e_(T v)``; returns ``(T v, lambda_v^2)``."""
    return mg.image(v), mg.measure[v] / mg.measure[mg.image(v)]


@dataclass(frozen=True)
class DualWeights:
    c: Mapping[VertexId, Fraction]
    lambda_sq: Mapping[VertexId, Fraction]

    def edge(self, v: VertexId, u: VertexId) -> Fraction:
        """Squared dual weight on the edge ``(v, u)``."""
        return self.c[v] ** 2 * self.lambda_sq[u]


def dual_weights(mg: MeasuredGraph, table=None) -> DualWeights:
    if table is None or table.horizon < 1:
        table = squared_norms(mg, 1)
    c = {}
    for v in mg.vertices:
        s = table(v, 1)
        if s == 0:
            raise NotLeftInvertible(f"not left-invertible: ||S e_{v}|| = 0")
        c[v] = 1 / s
    # along a ray ||S e_(k)||^2 = mu(k+1)/mu(k) is positive and tends to 1,
    # so rays never spoil left-invertibility
    return DualWeights(c, dict(weights_from_measure(mg).lambda_sq))


@dataclass(frozen=True)
class DualNormTable:
    horizon: int
    values: Mapping[VertexId, tuple[Fraction, ...]]
    tails: tuple[TailTemplate, ...]

    def __call__(self, v: VertexId, n: int) -> Fraction:
        if n > self.horizon:
            raise IndexError(f"n={n} exceeds table horizon {self.horizon}")
        return self.values[v][n]

    def tail(self, i: int, k: int, n: int) -> Fraction:
        t = self.tails[i]
        return t.mu(k) / t.mu(k + n)

    def sequence(self, v: VertexId) -> tuple[Fraction, ...]:
        return self.values[v]


def dual_squared_norms(mg: MeasuredGraph, dw: DualWeights, horizon: int) -> DualNormTable:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    mu = mg.measure

    def tail_term(v, i, n):
        t = mg.tails[i]
        # leaf -> position 0 edge, then the telescoped ray norm mu(0)/mu(n)
        return dw.c[v] ** 2 * (t.mu(0) / mu[v]) * (t.mu(0) / t.mu(n))

    values = child_sum_table(mg, horizon, dw.edge, tail_term)
    return DualNormTable(horizon, values, mg.tails)


@dataclass(frozen=True)
class MomentCheck:
    m: int
    n: int
    s: Fraction
    nonnegative: bool
    power_equation: bool

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.power_equation


@dataclass(frozen=True)
class DualCertificate:
    kappa: int
    D: Fraction
    C: Mapping[int, Fraction]
    alpha: Mapping[int, Fraction]
    checks: tuple[MomentCheck, ...]
    verdict: bool
    reason: str


def dual_lambda_products(mg: MeasuredGraph, dw: DualWeights) -> dict[tuple[int, int], Fraction]:
    """Squared primed products ``prod_{j=m+1}^{m+i} lambda^2_(v_j) c^2_(v_(j-1))``."""
    cyc = mg.cycle
    k = len(cyc)
    out = {}
    for m in range(k):
        acc = Fraction(1)
        out[(m, 0)] = acc
        for i in range(1, k + 1):
            j = m + i
            acc *= dw.lambda_sq[cyc[j % k]] * dw.c[cyc[(j - 1) % k]] ** 2
            out[(m, i)] = acc
    return out


def moment_matches(s: Fraction, alpha: Fraction, D: Fraction, n: int, kappa: int) -> tuple[bool, bool]:
    """``s = (1 - alpha) D^(n/kappa) + alpha`` checked in kappa-th power form."""
    if s - alpha < 0:
        return False, False
    return True, (s - alpha) ** kappa == (1 - alpha) ** kappa * D ** n


def subnormality_check(mg: MeasuredGraph, dw: DualWeights, dual_table: DualNormTable,
                       two_isometric: bool | None = None) -> DualCertificate:
    if two_isometric is None:
        two_isometric = cross_validate(mg, 2).verdict
    if not two_isometric:
        raise NotTwoIsometric("dual check requires 2-isometry")
    c = mg.classification
    k = c.kappa
    lp = dual_lambda_products(mg, dw)
    D = lp[(0, k)]
    if not c.trees:
        return DualCertificate(k, D, {}, {}, (), True, "no trees: the shift is unitary")
    if D >= 1:
        # cannot happen for 2-isometric instances with trees; refuse rather than divide by zero
        raise NotTwoIsometric(f"dual cycle product D = {D} is not below 1")
    C = {}
    alpha = {}
    for m in range(k):
        acc = Fraction(0)
        for i in range(k):
            at = (m + i) % k
            branch = sum((dw.lambda_sq[t.root] for t in c.trees_at(at)), Fraction(0))
            acc += dw.c[c.cycle[at]] ** 2 * lp[(m, i)] * branch
        C[m] = acc
        alpha[m] = acc / (1 - D)
    if k == 1:
        return DualCertificate(k, D, C, alpha, (), True, "cycle of length 1")
    bad_alpha = [m for m in range(k) if not 0 <= alpha[m] <= 1]
    if dual_table.horizon < k - 1:
        raise ValueError(f"dual table needs horizon >= {k - 1}")
    checks = []
    for m in range(k):
        for n in range(1, k):
            s = dual_table(c.cycle[m], n)
            nonneg, eq = moment_matches(s, alpha[m], D, n, k)
            checks.append(MomentCheck(m, n, s, nonneg, eq))
    failed = [ch for ch in checks if not ch.ok]
    verdict = not bad_alpha and not failed
    if verdict:
        reason = "two-atom moment equations hold"
    elif bad_alpha:
        reason = f"alpha_{bad_alpha[0]} = {alpha[bad_alpha[0]]} outside [0, 1]"
    else:
        f = failed[0]
        reason = f"moment equation fails at m={f.m}, n={f.n}"
    return DualCertificate(k, D, C, alpha, tuple(checks), verdict, reason)


# ---------------------------------------------------------------------------
# Built-in three-cycle example
# ---------------------------------------------------------------------------

EXAMPLE_A_SQ = Fraction(4, 7)
EXAMPLE_Z_SQ = Fraction(1, 4)


def paper_example_instance(a_sq: Fraction = EXAMPLE_A_SQ, z_sq: Fraction = EXAMPLE_Z_SQ) -> MeasuredGraph:
    """Three-cycle with one constant ray hanging off each cycle vertex.

    Cycle measures (1, a^2, a^2); branch measures (1, a^2, a^2 z^2).
    """
    a_sq = Fraction(a_sq)
    z_sq = Fraction(z_sq)
    vertices = ("0", "1", "2", "0.0", "1.0", "2.0")
    image = {"0": "2", "1": "0", "2": "1", "0.0": "0", "1.0": "1", "2.0": "2"}
    branch = {"0.0": Fraction(1), "1.0": a_sq, "2.0": a_sq * z_sq}
    measure = {"0": Fraction(1), "1": a_sq, "2": a_sq, **branch}
    tails = [TailTemplate(v, Polynomial([branch[v]])) for v in ("0.0", "1.0", "2.0")]
    return measured_graph(FunctionalGraph(vertices, image), measure, tails)


@dataclass(frozen=True)
class ExampleReport:
    instance: MeasuredGraph
    oracle_two_isometric: bool
    rank_two_isometric: bool
    rank_A_tilde: int | None
    rank_B_tilde: int | None
    cycle_lambda_sq: tuple[Fraction, ...]
    s1: Fraction
    s2: Fraction
    q: Polynomial | None
    p0: Polynomial | None
    c: Mapping[VertexId, Fraction]
    dual_s1: Fraction
    dual_s2: Fraction
    D: Fraction
    D_closed_form: Fraction
    certificate: DualCertificate

    @property
    def subnormal(self) -> bool:
        return self.certificate.verdict

    @property
    def assertions_hold(self) -> bool:
        return (
            self.oracle_two_isometric
            and self.rank_two_isometric
            and self.D == self.D_closed_form
            and not self.subnormal
        )


def reproduce_paper_example(a_sq: Fraction = EXAMPLE_A_SQ, z_sq: Fraction = EXAMPLE_Z_SQ,
                            horizon: int = 20) -> ExampleReport:
    mg = paper_example_instance(a_sq, z_sq)
    cv = cross_validate(mg, 2, max(horizon, default_horizon(mg, 2)))
    table = squared_norms(mg, max(horizon, 2))
    dw = dual_weights(mg, table)
    dt = dual_squared_norms(mg, dw, max(horizon, 2))
    cert = subnormality_check(mg, dw, dt, two_isometric=cv.verdict)
    a_sq = Fraction(a_sq)
    z_sq = Fraction(z_sq)
    closed = 1 / (4 * (a_sq + 1) ** 2 * (1 / a_sq + z_sq) ** 2)
    v0 = mg.cycle[0]
    w = weights_from_measure(mg)
    return ExampleReport(
        instance=mg,
        oracle_two_isometric=cv.oracle.verdict,
        rank_two_isometric=cv.rank.verdict,
        rank_A_tilde=cv.rank.rank_A_tilde,
        rank_B_tilde=cv.rank.rank_B_tilde,
        cycle_lambda_sq=tuple(w[v] for v in mg.cycle),
        s1=table(v0, 1),
        s2=table(v0, 2),
        q=cv.rank.q,
        p0=cv.rank.p0,
        c=dw.c,
        dual_s1=dt(v0, 1),
        dual_s2=dt(v0, 2),
        D=cert.D,
        D_closed_form=closed,
        certificate=cert,
    )
