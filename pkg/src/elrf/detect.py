"""Decision procedures for (eventual) linear and affine ranking functions.

Every procedure reduces to feasibility of linear systems obtained from
Farkas duals. Case systems are named after the branches they combine:
``DEC1``/``POS1`` drop the ``f(x) >= k`` premise row (its multiplier is 0),
``DEC2``/``POS2`` keep it with a positive multiplier and product variables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from .errors import PreconditionError, SolverError, StructuralError
from .farkas import (
    DEC_LAMBDA,
    DEC_P,
    POS_LAMBDA,
    POS_P,
    DualSystem,
    LinearizedPair,
    build_dec_pos,
    build_inc_dual,
    linearize,
    rho_params,
)
from .fm import fm_project
from .linear import Constraint, LinExpr, Polyhedron, Rel
from .loop import CandidateFn, SlcLoop, affine_lift, body_satisfiable
from .lp import lp_solve, strict_margin, tighten_strict


class Kind(enum.Enum):
    LRF = "LRF"
    ELRF = "ELRF"
    EVENTUAL_AFFINE = "EventualAffine"
    TRIVIAL = "TriviallyTerminating"
    NONE = "None"


class Case(enum.Enum):
    PHI11 = "DEC1_POS1"
    PHI12 = "DEC1_POS2"
    PHI21 = "DEC2_POS1"
    PHI22 = "DEC2_POS2"
    PHI22_RELAXED = "DEC2_POS2_RELAXED"


CASE_ORDER = (Case.PHI11, Case.PHI12, Case.PHI21, Case.PHI22)

RELAXED_NOTE = "phi22 relaxed only"
INC_EMPTY_NOTE = "INC is empty: no linear increasing function"


@dataclass(frozen=True)
class Certificate:
    """Outcome of a detection run.

    ``f`` holds one increasing function, or the pair ``(f_d, f_p)`` for a
    relaxed DEC2/POS2 certificate: ``rho`` decreases where ``f_d >= k`` and
    is non-negative where ``f_p >= k``.
    """

    kind: Kind
    rho: CandidateFn | None = None
    k: Fraction | None = None
    f: tuple[CandidateFn, ...] = ()
    case: Case | None = None
    diagnostics: tuple[str, ...] = ()
    raw_solution: Mapping[str, Fraction] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        if self.kind in (Kind.ELRF, Kind.EVENTUAL_AFFINE):
            if self.rho is None or self.k is None or not self.f:
                raise StructuralError("eventual certificates carry rho, k and f")
        if self.kind is Kind.LRF and (self.k is not None or self.f):
            raise StructuralError("an LRF certificate carries neither k nor f")
        if self.case is Case.PHI22_RELAXED and len(self.f) != 2:
            raise StructuralError("a relaxed DEC2/POS2 certificate needs two functions")
        if len(self.f) > 2:
            raise StructuralError("at most two increasing functions")

    @property
    def found(self) -> bool:
        return self.kind not in (Kind.NONE,)

    @property
    def f_decrease(self) -> CandidateFn | None:
        return self.f[0] if self.f else None

    @property
    def f_positive(self) -> CandidateFn | None:
        return self.f[-1] if self.f else None


@dataclass(frozen=True)
class IncSpace:
    """Coefficient vectors ``b`` (named ``b1..bn``) of increasing functions."""

    loop_vars: tuple[str, ...]
    space: Polyhedron

    @property
    def params(self) -> tuple[str, ...]:
        return self.space.vars

    def is_empty(self) -> bool:
        return not lp_solve(self.space).feasible

    def contains(self, b: CandidateFn | Mapping[str, Fraction]) -> bool:
        if isinstance(b, CandidateFn):
            b = {p: b.coeff(v) for p, v in zip(self.params, self.loop_vars)}
        return self.space.contains(b)

    def function(self, values: Mapping[str, Fraction]) -> CandidateFn:
        return CandidateFn.build(
            self.loop_vars, {v: values[p] for p, v in zip(self.params, self.loop_vars)}
        )

    def homogenized(self, products: Sequence[str], lam: str) -> list[Constraint]:
        """Rows of ``products / lam in INC`` multiplied through by ``lam > 0``."""
        rename = dict(zip(self.params, products))
        rows = []
        for c in self.space.constraints:
            e = LinExpr(c.expr.coeffs).rename(rename) + LinExpr.var(lam, c.expr.constant)
            rows.append(Constraint(e, c.rel))
        return rows


def _trivial() -> Certificate:
    return Certificate(Kind.TRIVIAL)


def lrf_system(loop: SlcLoop) -> tuple[Polyhedron, tuple[str, ...], tuple[str, ...]]:
    """Conjunction of the decrease and positivity duals.

    Returns the system, the ranking parameters and the multipliers.
    """
    a = rho_params(loop)
    dec, pos = build_dec_pos(loop, a)
    system = dec.system.conjoin(pos.system)
    return system, a, dec.multipliers + pos.multipliers


def detect_lrf(loop: SlcLoop) -> Certificate:
    if not body_satisfiable(loop):
        return _trivial()
    system, a, _ = lrf_system(loop)
    sol = canonical_solution(system, a)
    if sol is None:
        return Certificate(Kind.NONE)
    return Certificate(Kind.LRF, rho=_rho_from(loop, a, sol), raw_solution=sol)


def lrf_space(loop: SlcLoop) -> Polyhedron:
    """All ranking coefficient vectors, over parameters ``a1..an``."""
    if not body_satisfiable(loop):
        raise PreconditionError("the ranking space is only defined for satisfiable bodies")
    system, _, multipliers = lrf_system(loop)
    return fm_project(system, multipliers)


def inc_space(loop: SlcLoop) -> IncSpace:
    if not body_satisfiable(loop):
        raise PreconditionError("INC is only computed for satisfiable bodies")
    b = rho_params(loop, "b")
    dual = build_inc_dual(loop, b)
    return IncSpace(loop.vars, fm_project(dual.system, dual.multipliers))


def _rho_from(loop: SlcLoop, a: Sequence[str], sol) -> CandidateFn:
    return CandidateFn.build(loop.vars, {v: sol[p] for v, p in zip(loop.vars, a)})


def canonical_solution(
    system: Polyhedron,
    a: Sequence[str],
    products: Sequence[str] = (),
) -> dict[str, Fraction] | None:
    """A reproducible feasible point of ``system``, or None.

    Strict rows are tightened to the largest margin (capped at 1), then
    ``sum |a_i|`` is minimised, then (with ``a`` fixed) the sum of
    ``products`` is minimised, and finally the point is scaled so that the
    ``a`` values are integers. Scaling by a factor >= 1 keeps every case
    system feasible because their only inhomogeneous rows read ``... >= 1``.
    """
    margin = strict_margin(system)
    if margin is None or margin <= 0:
        return None
    closed = tighten_strict(system, margin)

    split_rows = []
    names = []
    taken = set(closed.vars)
    for p in a:
        pos, neg = _fresh(p + "_pos", taken), _fresh(p + "_neg", taken)
        names += [pos, neg]
        split_rows += [
            Constraint(LinExpr.var(p) - LinExpr.var(pos) + LinExpr.var(neg), Rel.EQ0),
            Constraint(LinExpr.var(pos)),
            Constraint(LinExpr.var(neg)),
        ]
    widened = Polyhedron(closed.vars + tuple(names), closed.constraints + tuple(split_rows))
    res = lp_solve(widened, LinExpr({n: 1 for n in names}), "min")
    if res.status.name != "OPTIMAL":
        raise SolverError(f"minimising |a| over a feasible system gave {res.status}")
    point = {v: res.point[v] for v in closed.vars}

    if products:
        fixed = closed.add(*(Constraint(LinExpr.var(p) - point[p], Rel.EQ0) for p in a))
        second = lp_solve(fixed, LinExpr({p: 1 for p in products}), "min")
        if second.status.name == "OPTIMAL":
            point = dict(second.point)

    scale = lcm(*(point[p].denominator for p in a)) if a else 1
    if scale != 1:
        point = {v: x * scale for v, x in point.items()}
    if not system.contains(point):
        raise SolverError("canonical witness does not satisfy its case system")
    return point


def _fresh(base: str, taken: set) -> str:
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    taken.add(name)
    return name


def extract_threshold(case: Case, raw_solution: Mapping[str, Fraction]) -> Fraction:
    """Threshold ``k`` from a case solution (``P/lambda`` and friends)."""

    def ratio(prod, lam):
        den = raw_solution[lam]
        if den <= 0:
            raise SolverError(f"multiplier {lam} is {den} in a case that requires it positive")
        return raw_solution[prod] / den

    if case is Case.PHI11:
        return Fraction(0)
    if case is Case.PHI12:
        return ratio(POS_P, POS_LAMBDA)
    if case is Case.PHI21:
        return ratio(DEC_P, DEC_LAMBDA)
    return max(ratio(DEC_P, DEC_LAMBDA), ratio(POS_P, POS_LAMBDA))


@dataclass(frozen=True)
class ElrfProblem:
    """All case systems, for a fixed ``f`` or a parametric one."""

    loop: SlcLoop
    a: tuple[str, ...]
    f: CandidateFn | None
    b: tuple[str, ...]
    dec: DualSystem
    pos: DualSystem
    dec_lin: LinearizedPair
    pos_lin: LinearizedPair
    inc: IncSpace | None

    @property
    def parametric(self) -> bool:
        return self.f is None

    @property
    def inc_empty(self) -> bool:
        return self.parametric and self.inc.is_empty()

    def case_tag(self, case: Case) -> Case:
        if case is Case.PHI22 and self.parametric:
            return Case.PHI22_RELAXED
        return case

    def case_system(self, case: Case) -> Polyhedron | None:
        """The linear system of a case; None when it is vacuously infeasible."""
        d1, d2 = self.dec_lin.case1, self.dec_lin.case2
        p1, p2 = self.pos_lin.case1, self.pos_lin.case2
        if case is Case.PHI11:
            return d1.conjoin(p1)
        if self.parametric and self.inc_empty:
            return None
        if case is Case.PHI12:
            system = d1.conjoin(p2)
            extra = self._inc_rows(self.pos_lin)
        elif case is Case.PHI21:
            system = d2.conjoin(p1)
            extra = self._inc_rows(self.dec_lin)
        else:
            system = d2.conjoin(p2)
            extra = self._inc_rows(self.dec_lin) + self._inc_rows(self.pos_lin)
        return system.add(*extra)

    def _inc_rows(self, lin: LinearizedPair) -> list[Constraint]:
        if not self.parametric:
            return []
        prods = [lin.param_products[p] for p in self.b]
        return self.inc.homogenized(prods, lin.lambda_var)

    def products(self, case: Case) -> tuple[str, ...]:
        out = ()
        if case in (Case.PHI21, Case.PHI22):
            out += (DEC_P,)
        if case in (Case.PHI12, Case.PHI22):
            out += (POS_P,)
        return out

    def certificate(self, case: Case, sol: Mapping[str, Fraction]) -> Certificate:
        rho = _rho_from(self.loop, self.a, sol)
        k = extract_threshold(case, sol)
        if not self.parametric:
            fs = (self.f,)
        elif case is Case.PHI11:
            fs = (rho.scaled(-1),)
        else:
            fs = ()
            if case in (Case.PHI21, Case.PHI22):
                fs += (self._recover_f(self.dec_lin, sol),)
            if case in (Case.PHI12, Case.PHI22):
                fs += (self._recover_f(self.pos_lin, sol),)
            scale = lcm(*(c.denominator for f in fs for _, c in f.coeffs))
            if scale != 1:
                fs = tuple(f.scaled(scale) for f in fs)
                k *= scale
        diagnostics = (RELAXED_NOTE,) if self.case_tag(case) is Case.PHI22_RELAXED else ()
        return Certificate(
            Kind.ELRF, rho, k, fs, self.case_tag(case), diagnostics, dict(sol)
        )

    def _recover_f(self, lin: LinearizedPair, sol) -> CandidateFn:
        lam = sol[lin.lambda_var]
        return CandidateFn.build(
            self.loop.vars,
            {v: sol[lin.param_products[p]] / lam for v, p in zip(self.loop.vars, self.b)},
        )


def build_problem(loop: SlcLoop, f: CandidateFn | None = None) -> ElrfProblem:
    a = rho_params(loop)
    if f is not None:
        dec, pos = build_dec_pos(loop, a, f)
        dec_lin = linearize(dec, product_name=DEC_P)
        pos_lin = linearize(pos, product_name=POS_P)
        return ElrfProblem(loop, a, f, (), dec, pos, dec_lin, pos_lin, None)
    b = rho_params(loop, "b")
    inc = inc_space(loop)
    dec, pos = build_dec_pos(loop, a, b)
    p = tuple(f"p{i}" for i in range(1, loop.n + 1))
    pp = tuple(f"pp{i}" for i in range(1, loop.n + 1))
    dec_lin = linearize(dec, f_param_vars=b, product_name=DEC_P, f_product_names=p)
    pos_lin = linearize(pos, f_param_vars=b, product_name=POS_P, f_product_names=pp)
    return ElrfProblem(loop, a, None, b, dec, pos, dec_lin, pos_lin, inc)


def case_feasibility(problem: ElrfProblem, order: Iterable[Case] = CASE_ORDER) -> dict[Case, bool]:
    """Feasibility of each case, each tested on its own."""
    out = {}
    for case in order:
        system = problem.case_system(case)
        out[case] = system is not None and lp_solve(system).feasible
    return out


def _solve_cases(problem: ElrfProblem, order: Iterable[Case]) -> Certificate | None:
    for case in order:
        system = problem.case_system(case)
        if system is None:
            continue
        sol = canonical_solution(system, problem.a, problem.products(case))
        if sol is not None:
            return problem.certificate(case, sol)
    return None


def detect_elrf_given_f(
    loop: SlcLoop, f: CandidateFn, order: Iterable[Case] = CASE_ORDER
) -> Certificate:
    """Eventual linear ranking function for a known increasing ``f``."""
    from .verify import verify_increasing

    if f.vars != loop.vars:
        f = CandidateFn.build(loop.vars, dict(f.coeffs), f.constant)
    if not body_satisfiable(loop):
        return _trivial()
    if not verify_increasing(loop, f):
        raise PreconditionError(f"f = {f} is not increasing: body does not imply f(x') >= 1 + f(x)")
    cert = _solve_cases(build_problem(loop, f), order)
    return cert if cert is not None else Certificate(Kind.NONE)


def detect_elrf(loop: SlcLoop, order: Iterable[Case] = CASE_ORDER) -> Certificate:
    """Search over all increasing ``f``; DEC2/POS2 is relaxed to independent ``f_d``, ``f_p``."""
    if not body_satisfiable(loop):
        return _trivial()
    problem = build_problem(loop)
    cert = _solve_cases(problem, order)
    if cert is not None:
        return cert
    notes = [INC_EMPTY_NOTE] if problem.inc_empty else [RELAXED_NOTE]
    return Certificate(Kind.NONE, diagnostics=tuple(notes))


def detect_affine(loop: SlcLoop, mode: str = "lrf", f: CandidateFn | None = None) -> Certificate:
    """Affine variants through the pinned-variable lifting.

    ``mode`` is ``"lrf"``, ``"elrf_given_f"`` (needs ``f``) or ``"elrf"``.
    The lifted coefficient of the pinned variable becomes the constant of
    ``rho``; for recovered increasing functions it is folded into ``k``.
    """
    lifted, u = affine_lift(loop)
    if mode == "lrf":
        cert = detect_lrf(lifted)
    elif mode == "elrf_given_f":
        if f is None:
            raise PreconditionError("elrf_given_f mode needs an increasing function")
        f_lifted = CandidateFn.build(lifted.vars, dict(f.coeffs), f.constant)
        cert = detect_elrf_given_f(lifted, f_lifted)
    elif mode == "elrf":
        cert = detect_elrf(lifted)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _lower(loop, u, cert)


def _lower(loop: SlcLoop, u: str, cert: Certificate) -> Certificate:
    if cert.kind in (Kind.NONE, Kind.TRIVIAL):
        return cert
    rho = CandidateFn.build(loop.vars, {v: cert.rho.coeff(v) for v in loop.vars}, cert.rho.coeff(u))
    if cert.kind is Kind.LRF:
        return Certificate(Kind.LRF, rho, raw_solution=cert.raw_solution, diagnostics=cert.diagnostics)
    fs = tuple(CandidateFn.build(loop.vars, {v: g.coeff(v) for v in loop.vars}) for g in cert.f)
    k = max(cert.k - g.coeff(u) for g in cert.f)
    return Certificate(
        Kind.EVENTUAL_AFFINE, rho, k, fs, cert.case, cert.diagnostics, cert.raw_solution
    )
