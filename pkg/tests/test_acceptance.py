"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import random
import time
from fractions import Fraction
from functools import cache

import pytest

from _corpus import SHIFT, DRAIN, SLOW, OFFSET, FLIP, F_NEG_Y, fn, random_corpus, reconstruct
from elrf.detect import Case, Kind, detect_affine, detect_elrf, detect_elrf_given_f, detect_lrf, inc_space, lrf_space
from elrf.fm import equivalent, fm_project
from elrf.linear import Constraint, LinExpr, Polyhedron, Rel
from elrf.loop import CandidateFn, affine_lift
from elrf.lp import LpStatus, lp_solve
from elrf.oracle import check_certificate_on_traces
from elrf.verify import verify_certificate, verify_elrf, verify_increasing, verify_lrf

DEFAULT_BUDGET = 5.0
V = LinExpr.var


def report(number, title, ok, detail, elapsed, budget=DEFAULT_BUDGET):
    in_time = elapsed <= budget
    verdict = "PASS" if ok and in_time else "FAIL"
    line = f"[{verdict}] criterion {number:>2}: {title} ({detail}; {elapsed:.2f}s of {budget:.0f}s)"
    print(line)
    return ok and in_time, line


def timed(fn_):
    start = time.perf_counter()
    ok, detail = fn_()
    return ok, detail, time.perf_counter() - start


# certificates are shared: criterion 7 pays for the random corpus, 8 and 10 reuse it
@cache
def golden_certificates():
    """``(label, loop, f given to the detector or None, certificate)`` for the hand-written loops."""
    lifted_offset, _ = affine_lift(OFFSET)
    f_lifted = CandidateFn.build(lifted_offset.vars, {"y": -1})
    return (
        ("drain lrf", DRAIN, None, detect_lrf(DRAIN)),
        ("drain elrf", DRAIN, None, detect_elrf(DRAIN)),
        ("slow_drain given f", SLOW, F_NEG_Y, detect_elrf_given_f(SLOW, F_NEG_Y)),
        ("offset_drain affine", OFFSET, F_NEG_Y, detect_affine(OFFSET, "elrf_given_f", F_NEG_Y)),
        ("offset_drain lifted", lifted_offset, f_lifted, detect_elrf_given_f(lifted_offset, f_lifted)),
        ("flip elrf", FLIP, None, detect_elrf(FLIP)),
        ("shift elrf", SHIFT, None, detect_elrf(SHIFT)),
    )


@cache
def random_certificates():
    out = []
    for seed, loop in random_corpus(50):
        out.append((f"seed {seed} lrf", loop, None, detect_lrf(loop)))
        out.append((f"seed {seed} elrf", loop, None, detect_elrf(loop)))
    return tuple(out)


def criterion_1():
    xv, xn = V("x"), V("x'")
    dec = lp_solve(DRAIN.body.add(Constraint.gt(1 + xn - xv))).status
    pos = lp_solve(DRAIN.body.add(Constraint.lt(xv))).status
    ok = verify_lrf(DRAIN, fn({"x": 1})) and dec is LpStatus.INFEASIBLE and pos is LpStatus.INFEASIBLE
    return ok, f"decrease negation {dec.value}, positivity negation {pos.value}"


def criterion_2():
    space = lrf_space(DRAIN)
    expected = Polyhedron(("a1", "a2"), (Constraint.eq(V("a2")), Constraint.geq(V("a1"), 1)))
    return equivalent(space, expected), f"lrf_space = {space}"


def criterion_3():
    none = detect_lrf(SLOW).kind is Kind.NONE
    cert = detect_elrf_given_f(SLOW, F_NEG_Y)
    shape = (cert.kind is Kind.ELRF and cert.case is Case.PHI21 and cert.rho == fn({"x": 1}) and cert.k == 1)
    checked = verify_elrf(SLOW, F_NEG_Y, cert.rho, cert.k)
    trace = check_certificate_on_traces(SLOW, cert, trials=100, max_steps=1000, seed=0)
    ok = none and shape and checked and trace.ok
    return ok, (f"lrf none={none}, case {cert.case.value}, rho {cert.rho}, k {cert.k}, "
                f"verified={checked}, oracle violations {len(trace.violations)}")


def criterion_4():
    linear = detect_elrf_given_f(OFFSET, F_NEG_Y)
    affine = detect_affine(OFFSET, "elrf_given_f", F_NEG_Y)
    ok = (linear.kind is Kind.NONE and affine.kind is Kind.EVENTUAL_AFFINE
          and affine.rho == fn({"x": 1}, 1) and affine.k == 1
          and verify_elrf(OFFSET, F_NEG_Y, affine.rho, affine.k))
    return ok, f"linear {linear.kind.value}, affine rho {affine.rho}, k {affine.k}"


def criterion_5():
    inc = inc_space(FLIP)
    b1, b2 = V("b1"), V("b2")
    expected = Polyhedron(("b1", "b2"), (Constraint.leq(b1, -2), Constraint.eq(b1 - 2 * b2)))
    same = equivalent(inc.space, expected)
    cert = detect_elrf(FLIP)
    via_phi21 = cert.kind is Kind.ELRF and cert.case is Case.PHI21
    f_ok = len(cert.f) == 1 and inc.contains(cert.f[0]) and verify_increasing(FLIP, cert.f[0])
    ok = same and via_phi21 and f_ok and verify_certificate(FLIP, cert)
    return ok, f"INC = {inc.space}, case {cert.case.value if cert.case else None}, f = {cert.f[0] if cert.f else None}"


def criterion_6():
    cert = detect_elrf(SHIFT)
    ok = cert.kind is Kind.ELRF and verify_certificate(SHIFT, cert)
    return ok, f"case {cert.case.value if cert.case else None}, rho {cert.rho}, k {cert.k}"


def criterion_7():
    certs = random_certificates()
    lrf_hits = elrf_hits = failures = 0
    for (_, loop, _, lrf), (_, _, _, elrf) in zip(certs[::2], certs[1::2]):
        if lrf.kind is Kind.LRF:
            lrf_hits += 1
            if elrf.kind is not Kind.ELRF or not verify_certificate(loop, elrf):
                failures += 1
        elrf_hits += elrf.kind is Kind.ELRF
    return failures == 0 and lrf_hits > 0, f"{lrf_hits} LRF loops, {elrf_hits} ELRF loops, {failures} exceptions"


def criterion_8():
    checked = failures = 0
    for _, loop, f, cert in golden_certificates() + random_certificates():
        if cert.kind is not Kind.ELRF or cert.case is Case.PHI11:
            continue
        for _, feasible, fits in reconstruct(loop, f, cert):
            checked += 1
            failures += not (feasible and fits)
    return failures == 0 and checked > 0, f"{checked} reconstructed duals, {failures} exceptions"


def criterion_9():
    from test_fm import fm_agrees_with_lp_completion

    bad = fm_agrees_with_lp_completion(trials=200)
    return not bad, f"200 systems, {len(bad)} disagreements"


def criterion_10():
    total = violations = rejected = 0
    for label, loop, _, cert in golden_certificates() + random_certificates():
        if cert.kind not in (Kind.LRF, Kind.ELRF, Kind.EVENTUAL_AFFINE):
            continue
        total += 1
        rejected += not verify_certificate(loop, cert)
        rep = check_certificate_on_traces(loop, cert, trials=100, max_steps=1000, seed=2024)
        violations += len(rep.violations)
    return violations == 0 and rejected == 0 and total > 0, (
        f"{total} certificates, {violations} violations, {rejected} rejected by the checker")


CRITERIA = [
    (1, "drain: verify_lrf and both negations infeasible", criterion_1, DEFAULT_BUDGET),
    (2, "LRF space of drain is {a2 = 0, a1 >= 1}", criterion_2, DEFAULT_BUDGET),
    (3, "slow_drain: ELRF DEC2_POS1, rho = x, k = 1", criterion_3, DEFAULT_BUDGET),
    (4, "offset_drain: none linear, affine rho = x + 1, k = 1", criterion_4, DEFAULT_BUDGET),
    (5, "flip: INC and DEC2_POS1", criterion_5, DEFAULT_BUDGET),
    (6, "shift loop certificate", criterion_6, DEFAULT_BUDGET),
    (7, "LRF success implies ELRF success on 50 random loops", criterion_7, 60.0),
    (8, "k = P/lambda, b = p/lambda reconstruction", criterion_8, DEFAULT_BUDGET),
    (9, "FM projection agrees with LP completion", criterion_9, 60.0),
    (10, "every certificate survives 100 traces of 1000 steps", criterion_10, DEFAULT_BUDGET),
]


@pytest.mark.parametrize("number, title, check, budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, check, budget, capsys):
    ok, detail, elapsed = timed(check)
    with capsys.disabled():
        passed, line = report(number, title, ok, detail, elapsed, budget)
    assert passed, line


if __name__ == "__main__":
    results = []
    for number, title, check, budget in CRITERIA:
        ok, detail, elapsed = timed(check)
        results.append(report(number, title, ok, detail, elapsed, budget)[0])
    print(f"{sum(results)}/{len(results)} criteria passed")
