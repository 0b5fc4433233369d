import random
from fractions import Fraction

import pytest

from _corpus import SHIFT, DRAIN, SLOW, OFFSET, FLIP, F_NEG_Y, XY, fn, random_corpus, x, xp, y, yp
from elrf.detect import (
    CASE_ORDER, INC_EMPTY_NOTE, RELAXED_NOTE, Case, Certificate, Kind, case_feasibility, build_problem,
    detect_affine, detect_elrf, detect_elrf_given_f, detect_lrf, inc_space, lrf_space,
)
from elrf.errors import PreconditionError, StructuralError
from elrf.fm import equivalent
from elrf.linear import Constraint, LinExpr, Polyhedron
from elrf.loop import canonicalize
from elrf.lp import lp_solve
from elrf.verify import verify_certificate, verify_elrf, verify_increasing, verify_lrf

A1, A2 = LinExpr.var("a1"), LinExpr.var("a2")


def test_drain_has_a_plain_ranking_function():
    cert = detect_lrf(DRAIN)
    assert cert.kind is Kind.LRF and cert.rho == fn({"x": 1})
    assert cert.k is None and cert.f == ()


def test_lrf_space_of_drain():
    space = lrf_space(DRAIN)
    assert equivalent(space, Polyhedron(("a1", "a2"), (Constraint.eq(A2), Constraint.geq(A1, 1))))


def test_lrf_space_of_slow_drain_is_empty():
    assert not lp_solve(lrf_space(SLOW)).feasible


def test_no_plain_ranking_function_for_eventual_loops():
    for loop in (SLOW, OFFSET, FLIP):
        assert detect_lrf(loop).kind is Kind.NONE


def test_slow_drain_given_f():
    cert = detect_elrf_given_f(SLOW, F_NEG_Y)
    assert cert.kind is Kind.ELRF and cert.case is Case.PHI21
    assert cert.rho == fn({"x": 1}) and cert.k == 1 and cert.f == (F_NEG_Y,)


def test_offset_drain_linear_none_affine_found():
    assert detect_elrf_given_f(OFFSET, F_NEG_Y).kind is Kind.NONE
    cert = detect_affine(OFFSET, "elrf_given_f", F_NEG_Y)
    assert cert.kind is Kind.EVENTUAL_AFFINE
    assert cert.rho == fn({"x": 1}, 1) and cert.k == 1
    assert verify_elrf(OFFSET, F_NEG_Y, cert.rho, cert.k)


def test_affine_search_agrees_with_linear_on_slow_drain():
    linear = detect_elrf_given_f(SLOW, F_NEG_Y)
    affine = detect_affine(SLOW, "elrf_given_f", F_NEG_Y)
    assert affine.rho.constant == 0 and affine.rho == linear.rho and affine.k == linear.k


def test_affine_lrf_on_lifted_drain():
    cert = detect_affine(DRAIN, "lrf")
    assert cert.kind is Kind.LRF and cert.rho == fn({"x": 1})


def test_drain_given_minus_x_uses_phi11():
    cert = detect_elrf_given_f(DRAIN, fn({"x": -1}))
    assert cert.kind is Kind.ELRF and cert.case is Case.PHI11 and cert.k == 0


def test_inc_space_of_flip():
    b1, b2 = LinExpr.var("b1"), LinExpr.var("b2")
    expected = Polyhedron(("b1", "b2"), (Constraint.leq(b1, -2), Constraint.eq(b1 - b2 * 2)))
    assert equivalent(inc_space(FLIP).space, expected)


def test_inc_space_of_slow_drain_contains_minus_y():
    assert inc_space(SLOW).contains(F_NEG_Y)


def test_flip_parametric():
    cert = detect_elrf(FLIP)
    assert cert.kind is Kind.ELRF and cert.case is Case.PHI21
    (f,) = cert.f
    assert inc_space(FLIP).contains(f) and verify_increasing(FLIP, f)
    assert verify_certificate(FLIP, cert)


def test_shift_loop():
    cert = detect_elrf(SHIFT)
    assert cert.found and verify_certificate(SHIFT, cert)
    assert detect_lrf(SHIFT).kind is Kind.NONE


def test_parametric_search_on_a_loop_with_a_plain_ranking_function():
    cert = detect_elrf(DRAIN)
    assert cert.case is Case.PHI11 and cert.f == (fn({"x": -1}),) and cert.k == 0


def test_unsatisfiable_body_is_trivial():
    loop = canonicalize([(x, ">=", 1), (x, "<=", 0)], XY)
    for cert in (detect_lrf(loop), detect_elrf(loop), detect_elrf_given_f(loop, F_NEG_Y)):
        assert cert.kind is Kind.TRIVIAL
    with pytest.raises(PreconditionError):
        inc_space(loop)


def test_diagnostics_for_not_found():
    stuck = canonicalize([(xp, "=", x), (yp, "=", y)], XY)
    assert detect_elrf(stuck).diagnostics == (INC_EMPTY_NOTE,)
    growing = canonicalize([(x, ">=", 0), (xp, "=", x), (yp, ">=", y + 1)], XY)
    cert = detect_elrf(growing)
    assert cert.kind is Kind.NONE and cert.diagnostics == (RELAXED_NOTE,)


def test_given_f_must_be_increasing():
    with pytest.raises(PreconditionError):
        detect_elrf_given_f(SLOW, fn({"x": 1}))


def test_certificate_invariants():
    with pytest.raises(StructuralError):
        Certificate(Kind.ELRF, fn({"x": 1}))
    with pytest.raises(StructuralError):
        Certificate(Kind.LRF, fn({"x": 1}), k=Fraction(1))
    with pytest.raises(StructuralError):
        Certificate(Kind.ELRF, fn({"x": 1}), Fraction(0), (F_NEG_Y,), Case.PHI22_RELAXED)


def _grid():
    return [(Fraction(p), Fraction(q)) for p in range(-3, 4) for q in range(-3, 4)]


@pytest.mark.parametrize("loop", [DRAIN, SLOW, FLIP, SHIFT], ids=["drain", "slow_drain", "flip", "shift"])
def test_inc_membership_matches_the_checker(loop):
    space = inc_space(loop)
    for b in _grid():
        f = fn(dict(zip(XY, b)))
        assert space.contains(f) == verify_increasing(loop, f)


@pytest.mark.parametrize("loop", [DRAIN, SLOW, OFFSET], ids=["drain", "slow_drain", "offset_drain"])
def test_lrf_space_membership_matches_the_checker(loop):
    space = lrf_space(loop)
    for a in _grid():
        assert space.contains(dict(zip(("a1", "a2"), a))) == verify_lrf(loop, fn(dict(zip(XY, a))))


def test_random_corpus_checker_detector_agreement():
    for seed, loop in random_corpus(20):
        for cert in (detect_lrf(loop), detect_elrf(loop)):
            if cert.found:
                assert verify_certificate(loop, cert), (seed, cert)
            if cert.kind is Kind.NONE:
                assert not verify_certificate(loop, cert)


def test_case_order_does_not_change_the_verdict():
    for loop in (DRAIN, SLOW, FLIP, SHIFT):
        forward = detect_elrf(loop)
        backward = detect_elrf(loop, tuple(reversed(CASE_ORDER)))
        assert forward.found == backward.found
        assert verify_certificate(loop, backward)
        reversed_given = detect_elrf_given_f(SLOW, F_NEG_Y, tuple(reversed(CASE_ORDER)))
        assert reversed_given.found and verify_certificate(SLOW, reversed_given)


def test_case_feasibility_report():
    feas = case_feasibility(build_problem(SLOW, F_NEG_Y))
    assert feas[Case.PHI21] and not feas[Case.PHI11]
