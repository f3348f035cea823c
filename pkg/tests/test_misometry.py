from __future__ import annotations

import random
from fractions import Fraction

import pytest

from compshift.cauchydual import paper_example_instance
from compshift.exactmath import Polynomial
from compshift.graph import validate
from compshift.misometry import (
    FamilySpec,
    NotMIsometric,
    build_B,
    ch_check,
    ch_sums,
    ch_sweep,
    cross_validate,
    default_horizon,
    defect,
    family3_generate,
    fit_norm_polynomial,
    is_m_isometric_oracle,
    q_polynomial,
    rank_criterion,
    tail_ch_violation,
    tree_polynomials,
)
from compshift.shift import InstanceError, TailTemplate, measured_graph, squared_norms

from generators import m_isometric_instance, perturb, pure_cycle, random_family_spec
from oracles import forward_differences


def test_example_defects():
    mg = paper_example_instance()
    t = squared_norms(mg, 22)
    for v in mg.vertices:
        for n in range(21):
            assert defect(t, v, 2, n) == 0
    assert defect(t, "0", 1, 0) == Fraction(4, 7)
    assert is_m_isometric_oracle(mg, 2, 22).verdict
    rep = is_m_isometric_oracle(mg, 1, 10)
    assert not rep.verdict
    assert rep.first_violation() == ("0", 0, Fraction(4, 7))


def test_defect_matches_repeated_differencing():
    rng = random.Random(8)
    for _ in range(10):
        mg = perturb(rng, m_isometric_instance(rng, 3), 3)
        t = squared_norms(mg, 12)
        for v in mg.vertices:
            diffs = forward_differences(t.sequence(v), 3)
            assert [defect(t, v, 3, n) for n in range(10)] == diffs


def test_example_rank_certificate():
    mg = paper_example_instance()
    t = squared_norms(mg, default_horizon(mg, 2))
    r = rank_criterion(mg, t, 2)
    assert r.verdict
    assert r.A.to_rows() == [[3, 0], [0, 1]]
    assert r.b == (Fraction(12, 7), Fraction(1))
    assert r.a == (Fraction(11, 7), Fraction(15, 7))
    assert r.q == Polynomial([Fraction(12, 7)])
    assert (r.rank_A_tilde, r.rank_B_tilde) == (2, 2)
    assert str(r.p0) == "4/7 x + 1"
    for n in range(t.horizon + 1):
        assert r.p0(n) == t("0", n)


def test_missing_tree_polynomial_is_reported():
    mg = paper_example_instance()
    t = squared_norms(mg, 20)
    bumped = measured_graph(mg.graph, mg.measure,
                            [TailTemplate("1.0", Polynomial([Fraction(4, 7), 1]))] + list(mg.tails[::2]))
    tb = squared_norms(bumped, 20)
    with pytest.raises(NotMIsometric, match="tree polynomial missing"):
        tree_polynomials(bumped, tb, 2)
    r = rank_criterion(bumped, tb, 2)
    assert not r.verdict and "tree polynomial missing" in r.reason
    assert q_polynomial(mg, t, 2) == Polynomial([Fraction(12, 7)])


def test_fit_norm_polynomial():
    mg = paper_example_instance()
    t = squared_norms(mg, 12)
    assert fit_norm_polynomial(t, "0", 1) == Polynomial([1, Fraction(4, 7)])
    assert fit_norm_polynomial(t, "0.0", 0) == Polynomial([1])
    assert fit_norm_polynomial(t, "0", 0) is None
    with pytest.raises(ValueError):
        fit_norm_polynomial(t, "0", 6)


def test_build_B():
    assert build_B(3, 3).to_rows() == [[1, 1, 1], [4, 2, 1]]
    with pytest.raises(ValueError):
        build_B(2, 1)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_constructions_are_m_isometric(m):
    rng = random.Random(100 + m)
    for _ in range(8):
        mg = m_isometric_instance(rng, m)
        cv = cross_validate(mg, m)
        assert cv.agree and cv.verdict
        # an m-isometry is an (m+1)-isometry
        assert cross_validate(mg, m + 1).verdict


def test_default_horizon_is_decisive():
    # doubling the horizon never changes a verdict
    rng = random.Random(21)
    for j in range(24):
        m = 2 + j % 3
        mg = m_isometric_instance(rng, m)
        if j % 2:
            mg = perturb(rng, mg, m)
        h = default_horizon(mg, m)
        assert is_m_isometric_oracle(mg, m, h).verdict == is_m_isometric_oracle(mg, m, 2 * h).verdict


def test_pure_cycles():
    rng = random.Random(2)
    mg = pure_cycle(rng, 3)
    assert cross_validate(mg, 2).verdict
    assert is_m_isometric_oracle(mg, 1).verdict
    uneven = pure_cycle(rng, 3, constant=False)
    while len(set(uneven.measure.values())) == 1:
        uneven = pure_cycle(rng, 3, constant=False)
    cv = cross_validate(uneven, 2)
    assert cv.agree and not cv.verdict


# ---------------------------------------------------------------------------
# complete hyperexpansivity
# ---------------------------------------------------------------------------


def test_ch_on_example_and_pure_cycle():
    assert ch_sweep(paper_example_instance(), 15).verdict
    rep = ch_sweep(pure_cycle(random.Random(0), 4), 10)
    assert rep.verdict
    assert all(s == 0 for sums in rep.sums.values() for s in sums)


def test_ch_failure_is_located():
    # non-expansive: ||S e_b||^2 = mu(a)/mu(b) = 1/2
    g = validate(["a", "b"], {"a": "b", "b": "a"})
    mg = measured_graph(g, {"a": Fraction(1), "b": Fraction(2)})
    t = squared_norms(mg, 5)
    assert ch_check(t, "b", 5) == (1, Fraction(1, 2))
    rep = ch_sweep(mg, 5)
    assert not rep.verdict and rep.violations["b"] == (1, Fraction(1, 2))


def test_ch_sums_definition():
    seq = [Fraction(x) for x in (1, 3, 4, 9)]
    assert ch_sums(seq, 3) == [Fraction(-2), Fraction(-1), Fraction(-5)]


def test_tail_ch_analysis():
    assert tail_ch_violation(TailTemplate("x", Polynomial([3, 2])), 15) is None
    assert tail_ch_violation(TailTemplate("x", Polynomial([5])), 15) is None
    hit = tail_ch_violation(TailTemplate("x", Polynomial([1, 0, 1])), 15)
    assert hit is not None and hit[1] == 2
    # violation only far along the ray: found through the root bound
    p = Polynomial([5000, 200, -1, Fraction(1, 300)])
    hit = tail_ch_violation(TailTemplate("x", p), 15)
    k, n, val = hit
    assert k > 64 and n == 2 and val > 0
    assert ch_sums([p(k + j) / p(k) for j in range(3)], 2)[1] == val


# ---------------------------------------------------------------------------
# 3-isometric family
# ---------------------------------------------------------------------------


def test_family_two_cycle_constant_branches():
    spec = FamilySpec(2, Fraction(3), (((Fraction(1), Fraction(1)),), ((Fraction(2), Fraction(2)),)))
    fam = family3_generate(spec)
    assert fam.A == 0
    assert fam.q0.degree <= 1
    assert cross_validate(fam.instance, 2).verdict
    assert cross_validate(fam.instance, 3).verdict


def test_family_mixed_slopes_three_isometric():
    spec = FamilySpec(3, Fraction(5), (
        ((Fraction(1), Fraction(2)),),
        ((Fraction(1, 2), Fraction(1, 2)), (Fraction(1), Fraction(4))),
        (),
    ))
    fam = family3_generate(spec)
    cv = cross_validate(fam.instance, 3)
    assert cv.agree and cv.verdict
    assert not cross_validate(fam.instance, 2).verdict
    assert fam.cycle_measure[0] == 5
    for i, mu in enumerate(fam.cycle_measure):
        assert fam.instance.measure[str(i)] == mu


def test_family_rejections():
    with pytest.raises(InstanceError, match="infeasible"):
        family3_generate(FamilySpec(3, Fraction(1, 50), (((Fraction(50), Fraction(50)),), (), ())))
    with pytest.raises(ValueError, match="slope"):
        FamilySpec(1, Fraction(1), (((Fraction(2), Fraction(1)),),))
    with pytest.raises(ValueError):
        FamilySpec(2, Fraction(1), ((),))


def test_random_family_specs():
    rng = random.Random(77)
    for _ in range(6):
        fam = family3_generate(random_family_spec(rng))
        assert cross_validate(fam.instance, 3).verdict


def test_rank_criterion_for_isometries():
    rng = random.Random(14)
    cv = cross_validate(pure_cycle(rng, 4), 1)
    assert cv.agree and cv.verdict and cv.rank.p0 == Polynomial([1])
    cv = cross_validate(paper_example_instance(), 1)
    assert cv.agree and not cv.verdict
    assert "tree polynomial missing" in cv.rank.reason
