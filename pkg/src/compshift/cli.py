"""Command-line front end.

Exit codes: 0 when the checked property holds, 1 when it fails on a
well-formed input, 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .cauchydual import (
    EXAMPLE_A_SQ,
    EXAMPLE_Z_SQ,
    NotTwoIsometric,
    dual_squared_norms,
    dual_weights,
    reproduce_paper_example,
    subnormality_check,
)
from .exactmath import Polynomial, RationalMatrix, format_rational, parse_rational
from .graph import GraphError
from .instancefile import InstanceFileError, dumps_instance, load_instance
from .misometry import (
    FamilySpec,
    ch_sweep,
    cross_validate,
    default_horizon,
    family3_generate,
    is_m_isometric_oracle,
)
from .shift import InstanceError, MeasuredGraph, squared_norms

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

DEFAULT_CH_ORDER = 15


class InputError(Exception):
    pass


@dataclass
class Report:
    command: str
    data: dict[str, Any] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    status: int = EXIT_OK

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def render(self, fmt: str) -> str:
        if fmt == "structured":
            doc = {"command": self.command, **self.data, "exit_status": self.status}
            return json.dumps(doc, indent=2) + "\n"
        return "\n".join(self.lines) + "\n"


def q(x: Fraction | int) -> str:
    return format_rational(x)


def poly_doc(p: Polynomial | None) -> Any:
    if p is None:
        return None
    return {"coefficients": [q(c) for c in p.coeffs], "text": str(p)}


def matrix_doc(M: RationalMatrix | None) -> Any:
    if M is None:
        return None
    return [[q(x) for x in row] for row in M.to_rows()]


def yes(flag: bool) -> str:
    return "true" if flag else "false"


def components_of(path: str) -> list[MeasuredGraph]:
    return load_instance(path).components()


def instance_summary(mg: MeasuredGraph) -> dict[str, Any]:
    c = mg.classification
    return {
        "vertices": len(mg.vertices),
        "kappa": c.kappa,
        "cycle": list(c.cycle),
        "trees": [
            {"root": t.root, "attachment": t.attachment, "attached_to": c.cycle[t.attachment],
             "members": list(t.members)}
            for t in c.trees
        ],
        "tails": [{"attach": t.attach, "mu_poly": [q(x) for x in t.mu_poly.coeffs]} for t in mg.tails],
    }


def summary_line(idx: int, mg: MeasuredGraph) -> str:
    c = mg.classification
    if c.trees:
        roots = ", ".join(f"{t.root}@{c.cycle[t.attachment]}" for t in c.trees)
        trees = f"{len(c.trees)} ({roots})"
    else:
        trees = "none"
    text = f"component {idx}: κ={c.kappa}, cycle: {' '.join(c.cycle)}, trees: {trees}"
    if mg.tails:
        text += f", tails: {len(mg.tails)}"
    return text


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(path: str) -> Report:
    rep = Report("classify")
    comps = components_of(path)
    rep.data["components"] = [instance_summary(mg) for mg in comps]
    for i, mg in enumerate(comps):
        rep.line(summary_line(i, mg))
    return rep


def cmd_check(path: str, m: int, horizon: int | None = None) -> Report:
    if m < 1:
        raise InputError("--m must be at least 1")
    rep = Report("check")
    rep.data["m"] = m
    comps = components_of(path)
    out = []
    holds = True
    disagree = False
    for i, mg in enumerate(comps):
        rep.line(summary_line(i, mg))
        h = horizon if horizon is not None else default_horizon(mg, m)
        if h < m:
            raise InputError(f"--horizon must be at least m = {m}")
        entry: dict[str, Any] = {"instance": instance_summary(mg), "horizon": h}
        if m == 1:
            rep_o = is_m_isometric_oracle(mg, 1, h)
            verdict = rep_o.verdict
            entry["oracle"] = oracle_doc(rep_o)
            rep.line(f"  horizon: {h}")
            rep.line(f"  isometry defect sweep: {yes(verdict)}")
            viol = rep_o.first_violation()
            if viol:
                rep.line(f"  first nonzero defect at {viol[0]}, n={viol[1]}: {q(viol[2])}")
        else:
            cv = cross_validate(mg, m, h)
            verdict = cv.verdict
            disagree |= not cv.agree
            entry["oracle"] = oracle_doc(cv.oracle)
            entry["rank"] = rank_doc(cv.rank)
            entry["agree"] = cv.agree
            rep.line(f"  horizon: {h}")
            rep.line(f"  defect oracle: {yes(cv.oracle.verdict)}")
            viol = cv.oracle.first_violation()
            if viol:
                rep.line(f"    first nonzero defect at {viol[0]}, n={viol[1]}: {q(viol[2])}")
            r = cv.rank
            rep.line(f"  rank criterion: {yes(r.verdict)} ({r.reason})")
            if r.q is not None:
                rep.line(f"    q = {r.q}")
                rep.line(f"    rank A~ = {r.rank_A_tilde}" + (
                    f", rank B~ = {r.rank_B_tilde}" if r.rank_B_tilde is not None else ""))
            if r.p0 is not None:
                rep.line(f"    p_0 = {r.p0}")
            rep.line(f"  criteria agree: {yes(cv.agree)}")
        entry["verdict"] = verdict
        holds &= verdict
        out.append(entry)
    rep.data["components"] = out
    rep.data["verdict"] = holds and not disagree
    rep.line(f"{m}-isometric: {yes(holds)}")
    if disagree:
        rep.line("criteria disagree")
    rep.status = EXIT_OK if holds and not disagree else EXIT_FAIL
    return rep


def oracle_doc(rep) -> dict[str, Any]:
    viol = rep.first_violation()
    return {
        "verdict": rep.verdict,
        "horizon": rep.horizon,
        "max_abs_defect": {k: q(d.max_abs) for k, d in rep.vertices.items()},
        "first_violation": None if viol is None else {"vertex": viol[0], "n": viol[1], "defect": q(viol[2])},
    }


def rank_doc(r) -> dict[str, Any]:
    return {
        "verdict": r.verdict,
        "reason": r.reason,
        "A": matrix_doc(r.A),
        "b": [q(x) for x in r.b],
        "a": [q(x) for x in r.a],
        "q": poly_doc(r.q),
        "rank_A_tilde": r.rank_A_tilde,
        "rank_B_tilde": r.rank_B_tilde,
        "p0": poly_doc(r.p0),
    }


def cmd_check_ch(path: str, max_order: int = DEFAULT_CH_ORDER, horizon: int | None = None) -> Report:
    if max_order < 1:
        raise InputError("--max-order must be at least 1")
    rep = Report("check-ch")
    rep.data["max_order"] = max_order
    comps = components_of(path)
    out = []
    holds = True
    mismatch = False
    for i, mg in enumerate(comps):
        rep.line(summary_line(i, mg))
        h = max(max_order, horizon or 0)
        ch = ch_sweep(mg, max_order, squared_norms(mg, h))
        two = cross_validate(mg, 2).verdict
        bad = ch.verdict != two
        mismatch |= bad
        holds &= ch.verdict
        rep.line(f"  completely hyperexpansive up to order {max_order}: {yes(ch.verdict)}")
        for where, hit in ch.violations.items():
            if len(hit) == 2:
                rep.line(f"    positive sum at {where}, n={hit[0]}: {q(hit[1])}")
            else:
                rep.line(f"    positive sum at {where} position {hit[0]}, n={hit[1]}: {q(hit[2])}")
        rep.line(f"  2-isometric: {yes(two)}")
        if bad:
            rep.line("  MISMATCH between complete hyperexpansivity and 2-isometry")
        out.append({
            "instance": instance_summary(mg),
            "ch_verdict": ch.verdict,
            "two_isometric": two,
            "mismatch": bad,
            "violations": {k: [x if isinstance(x, int) else q(x) for x in v] for k, v in ch.violations.items()},
            "sums": {v: [q(x) for x in s] for v, s in ch.sums.items()},
        })
    rep.data["components"] = out
    rep.data["verdict"] = holds
    rep.data["mismatch"] = mismatch
    rep.line(f"completely hyperexpansive: {yes(holds)}")
    rep.status = EXIT_OK if holds and not mismatch else EXIT_FAIL
    return rep


def certificate_doc(cert) -> dict[str, Any]:
    return {
        "kappa": cert.kappa,
        "D": q(cert.D),
        "C": {str(m): q(x) for m, x in cert.C.items()},
        "alpha": {str(m): q(x) for m, x in cert.alpha.items()},
        "checks": [
            {"m": ch.m, "n": ch.n, "s": q(ch.s), "nonnegative": ch.nonnegative,
             "power_equation": ch.power_equation}
            for ch in cert.checks
        ],
        "verdict": cert.verdict,
        "reason": cert.reason,
    }


def certificate_lines(rep: Report, cert, indent: str = "  ") -> None:
    rep.line(f"{indent}D = {q(cert.D)}")
    for m in cert.C:
        rep.line(f"{indent}C_{m} = {q(cert.C[m])}, alpha_{m} = {q(cert.alpha[m])}")
    for ch in cert.checks:
        status = "ok" if ch.ok else "fails"
        rep.line(f"{indent}moment m={ch.m} n={ch.n}: s = {q(ch.s)} {status}")
    rep.line(f"{indent}{cert.reason}")


def cmd_check_dual(path: str, horizon: int | None = None) -> Report:
    rep = Report("check-dual")
    comps = components_of(path)
    out = []
    holds = True
    for i, mg in enumerate(comps):
        rep.line(summary_line(i, mg))
        if not cross_validate(mg, 2).verdict:
            rep.line("  dual check requires 2-isometry")
            rep.data["components"] = out + [{"instance": instance_summary(mg), "error": "dual check requires 2-isometry"}]
            rep.data["verdict"] = False
            rep.status = EXIT_FAIL
            return rep
        h = max(mg.kappa, horizon or 0)
        table = squared_norms(mg, max(h, 1))
        dw = dual_weights(mg, table)
        dt = dual_squared_norms(mg, dw, h)
        cert = subnormality_check(mg, dw, dt, two_isometric=True)
        certificate_lines(rep, cert)
        rep.line(f"  subnormal: {yes(cert.verdict)}")
        holds &= cert.verdict
        out.append({"instance": instance_summary(mg), "c": {v: q(x) for v, x in dw.c.items()},
                    "certificate": certificate_doc(cert)})
    rep.data["components"] = out
    rep.data["verdict"] = holds
    rep.line(f"subnormal: {yes(holds)}")
    rep.status = EXIT_OK if holds else EXIT_FAIL
    return rep


def parse_branch(text: str, kappa: int) -> tuple[int, Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--branch expects i:mu0:mu1, got {text!r}")
    try:
        i = int(parts[0])
        b0, b1 = parse_rational(parts[1]), parse_rational(parts[2])
    except ValueError as exc:
        raise InputError(f"--branch {text!r}: {exc}") from exc
    if not 0 <= i < kappa:
        raise InputError(f"--branch {text!r}: cycle index must lie in [0, {kappa - 1}]")
    return i, b0, b1


def cmd_family3(kappa: int, mu0: str, branches: Sequence[str], out_path: str | None) -> Report:
    rep = Report("family3")
    if kappa < 1:
        raise InputError("--kappa must be at least 1")
    per: list[list[tuple[Fraction, Fraction]]] = [[] for _ in range(kappa)]
    for text in branches:
        i, b0, b1 = parse_branch(text, kappa)
        per[i].append((b0, b1))
    try:
        spec = FamilySpec(kappa, parse_rational(mu0), tuple(tuple(bl) for bl in per))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    fam = family3_generate(spec)
    mg = fam.instance
    rep.data["A"] = q(fam.A)
    rep.data["B"] = q(fam.B)
    rep.data["q0"] = poly_doc(fam.q0)
    rep.data["measure"] = {v: q(mg.measure[v]) for v in mg.vertices}
    rep.line(f"A = {q(fam.A)}, B = {q(fam.B)}")
    rep.line(f"q_0 = {fam.q0}")
    for v in mg.vertices:
        rep.line(f"mu({v}) = {q(mg.measure[v])}")
    text = dumps_instance(mg)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        rep.line(f"instance written to {out_path}")
        rep.data["out"] = out_path
    else:
        rep.data["instance"] = json.loads(text)
        rep.line(text.rstrip())
    return rep


def cmd_paper_example() -> Report:
    rep = Report("paper-example")
    ex = reproduce_paper_example()
    mg = ex.instance
    rep.line(f"three-cycle example, a^2 = {q(EXAMPLE_A_SQ)}, z^2 = {q(EXAMPLE_Z_SQ)}")
    rep.line(summary_line(0, mg))
    rep.line("cycle lambda^2: " + ", ".join(f"{v}: {q(x)}" for v, x in zip(mg.cycle, ex.cycle_lambda_sq)))
    rep.line(f"||S e_0||^2 = {q(ex.s1)}, ||S^2 e_0||^2 = {q(ex.s2)}")
    rep.line(f"q = {ex.q}")
    rep.line(f"rank A~ = {ex.rank_A_tilde}, rank B~ = {ex.rank_B_tilde}")
    rep.line(f"p_0 = {ex.p0}")
    rep.line(f"2-isometric (defect oracle): {yes(ex.oracle_two_isometric)}")
    rep.line(f"2-isometric (rank criterion): {yes(ex.rank_two_isometric)}")
    rep.line("c: " + ", ".join(f"{v}: {q(x)}" for v, x in ex.c.items()))
    rep.line(f"||S' e_0||^2 = {q(ex.dual_s1)}, ||S'^2 e_0||^2 = {q(ex.dual_s2)}")
    certificate_lines(rep, ex.certificate, indent="")
    rep.line(f"closed form D = {q(ex.D_closed_form)}")
    rep.line(f"subnormal: {yes(ex.subnormal)}")
    rep.line(f"all assertions hold: {yes(ex.assertions_hold)}")
    rep.data.update({
        "instance": instance_summary(mg),
        "cycle_lambda_sq": [q(x) for x in ex.cycle_lambda_sq],
        "s1": q(ex.s1),
        "s2": q(ex.s2),
        "q": poly_doc(ex.q),
        "rank_A_tilde": ex.rank_A_tilde,
        "rank_B_tilde": ex.rank_B_tilde,
        "p0": poly_doc(ex.p0),
        "two_isometric": ex.oracle_two_isometric and ex.rank_two_isometric,
        "c": {v: q(x) for v, x in ex.c.items()},
        "dual_s1": q(ex.dual_s1),
        "dual_s2": q(ex.dual_s2),
        "D_closed_form": q(ex.D_closed_form),
        "certificate": certificate_doc(ex.certificate),
        "subnormal": ex.subnormal,
        "assertions_hold": ex.assertions_hold,
    })
    rep.status = EXIT_OK if ex.assertions_hold else EXIT_FAIL
    return rep


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--out", help="write the report (family3: the instance file) to this path")

    p = argparse.ArgumentParser(prog="compshift", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="classify each component")
    s.add_argument("path")

    s = sub.add_parser("check", parents=[common], help="decide m-isometricity by both criteria")
    s.add_argument("path")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--horizon", type=int)

    s = sub.add_parser("check-ch", parents=[common], help="complete hyperexpansivity sweep")
    s.add_argument("path")
    s.add_argument("--max-order", type=int, default=DEFAULT_CH_ORDER)
    s.add_argument("--horizon", type=int)

    s = sub.add_parser("check-dual", parents=[common], help="subnormality of the Cauchy dual")
    s.add_argument("path")
    s.add_argument("--horizon", type=int)

    s = sub.add_parser("family3", parents=[common], help="generate a 3-isometric instance")
    s.add_argument("--kappa", type=int, required=True)
    s.add_argument("--mu0", default="1", help="measure of cycle vertex 0")
    s.add_argument("--branch", action="append", default=[], metavar="I:MU0:MU1",
                   help="branch at cycle vertex I with measures MU0, MU1 at its first two vertices")

    sub.add_parser("paper-example", parents=[common], help="reproduce the built-in three-cycle example")
    return p


def run(args: argparse.Namespace) -> Report:
    if args.command == "classify":
        return cmd_classify(args.path)
    if args.command == "check":
        return cmd_check(args.path, args.m, args.horizon)
    if args.command == "check-ch":
        return cmd_check_ch(args.path, args.max_order, args.horizon)
    if args.command == "check-dual":
        return cmd_check_dual(args.path, args.horizon)
    if args.command == "family3":
        return cmd_family3(args.kappa, args.mu0, args.branch, args.out)
    return cmd_paper_example()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = run(args)
    except (InputError, InstanceFileError, InstanceError, GraphError, NotTwoIsometric) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = rep.render(args.format)
    if args.out and args.command != "family3":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return rep.status


if __name__ == "__main__":
    sys.exit(main())
