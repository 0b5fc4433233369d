"""Certificate checkers.

Each check states the negation of the property as a linear system built
straight from the loop body and the candidate, and asks the LP solver for
infeasibility. Nothing computed during detection is reused.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import PreconditionError
from .linear import Constraint, LinExpr, Number, Q, Rel
from .loop import CandidateFn, SlcLoop
from .lp import lp_solve


def _guarded_body(loop: SlcLoop, guard: tuple[CandidateFn, Fraction] | None):
    body = loop.body
    if guard is not None:
        f, k = guard
        body = body.add(Constraint(f.as_expr() - Q(k), Rel.GEQ0))
    return body


def decrease_counterexample(
    loop: SlcLoop,
    rho: CandidateFn,
    guard: tuple[CandidateFn, Fraction] | None = None,
    margin: Number = 1,
):
    """A transition with ``rho(x) < margin + rho(x')`` (under ``f(x) >= k``), or None."""
    violation = Constraint(Q(margin) + rho.at_next() - rho.as_expr(), Rel.GT0)
    res = lp_solve(_guarded_body(loop, guard).add(violation))
    return res.point if res.feasible else None


def positivity_counterexample(
    loop: SlcLoop, rho: CandidateFn, guard: tuple[CandidateFn, Fraction] | None = None
):
    """A transition with ``rho(x) < 0`` (under ``f(x) >= k``), or None."""
    res = lp_solve(_guarded_body(loop, guard).add(Constraint(-rho.as_expr(), Rel.GT0)))
    return res.point if res.feasible else None


def check_decrease(loop, rho, guard=None, margin: Number = 1) -> bool:
    return decrease_counterexample(loop, rho, guard, margin) is None


def check_positive(loop, rho, guard=None) -> bool:
    return positivity_counterexample(loop, rho, guard) is None


def verify_lrf(loop: SlcLoop, rho: CandidateFn) -> bool:
    """``body => rho(x) >= 1 + rho(x') and rho(x) >= 0``; constants allowed."""
    return check_decrease(loop, rho) and check_positive(loop, rho)


def verify_increasing(loop: SlcLoop, f: CandidateFn) -> bool:
    """``body => f(x') >= 1 + f(x)`` for a linear ``f``."""
    if f.constant:
        raise PreconditionError(
            "increasing functions are linear; an affine offset adds nothing, drop the constant"
        )
    violation = Constraint(f.as_expr() + 1 - f.at_next(), Rel.GT0)
    return not lp_solve(loop.body.add(violation)).feasible


def _require_increasing(loop, f):
    if not verify_increasing(loop, f):
        raise PreconditionError(
            f"f = {f} is not increasing: some transition has f(x') < 1 + f(x)"
        )


def verify_elrf(
    loop: SlcLoop, f: CandidateFn, rho: CandidateFn, k: Number | None = None
) -> bool:
    """Is ``rho`` an eventual ranking function for ``(loop, f)``?

    With ``k`` the threshold is fixed; without it the existential question
    is answered by :func:`find_threshold`.
    """
    _require_increasing(loop, f)
    if k is None:
        return find_threshold(loop, f, rho) is not None
    guard = (f, Q(k))
    return check_decrease(loop, rho, guard) and check_positive(loop, rho, guard)


def verify_elrf_pair(
    loop: SlcLoop,
    f_decrease: CandidateFn,
    f_positive: CandidateFn,
    rho: CandidateFn,
    k: Number,
) -> bool:
    """Min-pair form: decrease where ``f_decrease >= k``, positivity where ``f_positive >= k``."""
    _require_increasing(loop, f_decrease)
    _require_increasing(loop, f_positive)
    k = Q(k)
    return check_decrease(loop, rho, (f_decrease, k)) and check_positive(loop, rho, (f_positive, k))


def find_threshold(loop: SlcLoop, f: CandidateFn, rho: CandidateFn) -> Fraction | None:
    """Run the given-``f`` decision procedure with ``rho`` pinned; return a threshold.

    The returned ``k`` is re-checked with the fixed-threshold test.
    """
    from .detect import CASE_ORDER, Case, extract_threshold
    from .farkas import DEC_P, POS_P, build_dec_pos, linearize
    from .lp import strict_margin, tighten_strict

    _require_increasing(loop, f)
    if not lp_solve(loop.body).feasible:
        return Fraction(0)
    dec, pos = build_dec_pos(loop, rho, f)
    dec_lin = linearize(dec, product_name=DEC_P)
    pos_lin = linearize(pos, product_name=POS_P)
    systems = {
        Case.PHI11: dec_lin.case1.conjoin(pos_lin.case1),
        Case.PHI12: dec_lin.case1.conjoin(pos_lin.case2),
        Case.PHI21: dec_lin.case2.conjoin(pos_lin.case1),
        Case.PHI22: dec_lin.case2.conjoin(pos_lin.case2),
    }
    for case in CASE_ORDER:
        system = systems[case]
        margin = strict_margin(system)
        if margin is None or margin <= 0:
            continue
        closed = tighten_strict(system, margin)
        products = [p for p in (DEC_P, POS_P) if p in closed.vars]
        res = lp_solve(closed, LinExpr({p: 1 for p in products}), "min")
        if not res.feasible:
            res = lp_solve(closed)
        k = extract_threshold(case, res.point)
        if verify_elrf(loop, f, rho, k):
            return k
        raise AssertionError(f"threshold {k} from case {case.value} failed the fixed-k check")
    return None


def verify_certificate(loop: SlcLoop, cert) -> bool:
    """Dispatch on the certificate kind; NONE certificates are never valid."""
    from .detect import Kind

    if cert.kind is Kind.TRIVIAL:
        return not lp_solve(loop.body).feasible
    if cert.kind is Kind.LRF:
        return verify_lrf(loop, cert.rho)
    if cert.kind in (Kind.ELRF, Kind.EVENTUAL_AFFINE):
        if len(cert.f) == 2:
            return verify_elrf_pair(loop, cert.f[0], cert.f[1], cert.rho, cert.k)
        return verify_elrf(loop, cert.f[0], cert.rho, cert.k)
    return False
