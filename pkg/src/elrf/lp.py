"""Exact rational linear programming over mixed strict/non-strict systems.

The engine is a dense two-phase primal simplex on :class:`Fraction` entries
with Bland's anti-cycling rule, so it always terminates and needs no
tolerances. All variables are free. Equality rows are first used to
substitute variables away, which shrinks the tableaux built from Farkas
dual systems considerably.

Strict rows ``e > 0`` are handled with one shared margin variable ``s``:
each becomes ``e - s >= 0``, ``s <= 1`` is added and ``s`` is maximised.
The strict system is feasible iff the optimal margin is positive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import SolverError, StructuralError
from .linear import Constraint, LinExpr, Polyhedron, Rel

ZERO = Fraction(0)
ONE = Fraction(1)


class LpStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class LpOutcome:
    """Result of :func:`lp_solve`.

    ``point`` is present iff the status is FEASIBLE or OPTIMAL. When an
    objective was requested but its supremum is only approached (strict rows
    cut off the optimal face), the status is FEASIBLE, ``point`` is a strict
    witness and ``objective_value`` holds the unattained bound.
    """

    status: LpStatus
    point: Mapping[str, Fraction] | None = field(default=None)
    objective_value: Fraction | None = None

    @property
    def feasible(self) -> bool:
        return self.status in (LpStatus.FEASIBLE, LpStatus.OPTIMAL)


INFEASIBLE = LpOutcome(LpStatus.INFEASIBLE)


def lp_solve(
    system: Polyhedron,
    objective: LinExpr | None = None,
    direction: str = "max",
) -> LpOutcome:
    """Decide feasibility of ``system`` or optimise ``objective`` over it.

    ``direction`` is ``"max"`` or ``"min"``. Any returned point satisfies
    every row exactly, strict rows strictly.
    """
    if direction not in ("max", "min"):
        raise ValueError(f"direction must be 'max' or 'min', not {direction!r}")
    if not isinstance(system, Polyhedron):
        raise StructuralError("lp_solve expects a Polyhedron")
    if objective is not None:
        extra = objective.variables() - set(system.vars)
        if extra:
            raise StructuralError(f"objective uses undeclared variables {sorted(extra)}")

    if system.has_strict:
        outcome = _solve_strict(system, objective, direction)
    else:
        outcome = _solve_closed(system, objective, direction)
    if outcome.point is not None:
        _check_point(system, outcome.point)
    return outcome


def strict_margin(system: Polyhedron) -> Fraction | None:
    """Largest ``s <= 1`` such that every strict row satisfies ``e >= s``.

    Returns None if that relaxation is infeasible. For systems without
    strict rows the margin is 1 when the system is feasible.
    """
    margin_var = _fresh("__margin", system.vars)
    rows, _ = _with_margin(system, margin_var)
    res = _solve_closed(
        Polyhedron(system.vars + (margin_var,), rows), LinExpr.var(margin_var), "max"
    )
    if not res.feasible:
        return None
    return res.objective_value


def tighten_strict(system: Polyhedron, margin: Fraction) -> Polyhedron:
    """Replace each strict row ``e > 0`` by ``e - margin >= 0``."""
    rows = []
    for c in system.constraints:
        if c.strict:
            rows.append(Constraint(c.expr - margin, Rel.GEQ0))
        else:
            rows.append(c)
    return Polyhedron(system.vars, tuple(rows))


def _fresh(base: str, taken) -> str:
    name, i = base, 0
    taken = set(taken)
    while name in taken:
        i += 1
        name = f"{base}{i}"
    return name


def _with_margin(system: Polyhedron, margin_var: str):
    s = LinExpr.var(margin_var)
    rows = []
    for c in system.constraints:
        if c.strict:
            rows.append(Constraint(c.expr - s, Rel.GEQ0))
        else:
            rows.append(c)
    rows.append(Constraint(1 - s, Rel.GEQ0))
    return tuple(rows), s


def _solve_strict(system: Polyhedron, objective, direction) -> LpOutcome:
    margin_var = _fresh("__margin", system.vars)
    rows, s = _with_margin(system, margin_var)
    lifted = Polyhedron(system.vars + (margin_var,), rows)
    res = _solve_closed(lifted, s, "max")
    if not res.feasible or res.objective_value <= 0:
        return INFEASIBLE
    witness = {v: res.point[v] for v in system.vars}
    if objective is None:
        return LpOutcome(LpStatus.FEASIBLE, witness)

    closure = tighten_strict(system, ZERO)
    best = _solve_closed(closure, objective, direction)
    if best.status is LpStatus.UNBOUNDED:
        return best
    if all(c.holds(best.point) for c in system.constraints):
        return best
    # the optimal face of the closure may still meet the strict region
    face = closure.add(Constraint(objective - best.objective_value, Rel.EQ0))
    on_face = _solve_strict(
        Polyhedron(face.vars, face.constraints + tuple(c for c in system.constraints if c.strict)),
        None,
        direction,
    )
    if on_face.feasible:
        return LpOutcome(LpStatus.OPTIMAL, on_face.point, best.objective_value)
    return LpOutcome(LpStatus.FEASIBLE, witness, best.objective_value)


def _check_point(system: Polyhedron, point: Mapping[str, Fraction]) -> None:
    for c in system.constraints:
        if not c.holds(point):
            raise SolverError(f"solver returned a point violating {c}: {dict(point)}")


def _solve_closed(system: Polyhedron, objective, direction) -> LpOutcome:
    """Non-strict LP; strict rows must already be gone."""
    order = list(system.vars)
    obj = objective if objective is not None else LinExpr()
    if direction == "min":
        obj = -obj

    # presolve: use equalities to eliminate variables
    ineqs: list[LinExpr] = []
    eqs: list[LinExpr] = []
    for c in system.constraints:
        if c.rel is Rel.GT0:
            raise SolverError("strict row reached the closed solver")
        (eqs if c.rel is Rel.EQ0 else ineqs).append(c.expr)

    substitutions: list[tuple[str, LinExpr]] = []
    while eqs:
        e = eqs.pop()
        if e.is_constant():
            if e.constant != 0:
                return INFEASIBLE
            continue
        pivot = min(e.coeffs, key=order.index)
        c = e.coeffs[pivot]
        value = (e - LinExpr.var(pivot, c)) * (-1 / c)
        repl = {pivot: value}
        eqs = [x.substitute(repl) if pivot in x.coeffs else x for x in eqs]
        ineqs = [x.substitute(repl) if pivot in x.coeffs else x for x in ineqs]
        obj = obj.substitute(repl) if pivot in obj.coeffs else obj
        substitutions.append((pivot, value))

    live: list[LinExpr] = []
    for e in ineqs:
        if e.is_constant():
            if e.constant < 0:
                return INFEASIBLE
            continue
        live.append(e)

    eliminated = {v for v, _ in substitutions}
    free = [v for v in order if v not in eliminated]
    status, values, value = _simplex(live, free, obj)
    if status is LpStatus.INFEASIBLE:
        return INFEASIBLE
    if status is LpStatus.UNBOUNDED:
        return LpOutcome(LpStatus.UNBOUNDED)

    point = dict(values)
    for var, expr in reversed(substitutions):
        point[var] = expr.evaluate(point)
    point = {v: point[v] for v in order}
    if objective is None:
        return LpOutcome(LpStatus.FEASIBLE, point)
    val = objective.evaluate(point)
    return LpOutcome(LpStatus.OPTIMAL, point, val)


def _simplex(rows: list[LinExpr], variables: list[str], objective: LinExpr):
    """Maximise ``objective`` subject to ``row >= 0`` for all rows, variables free.

    Returns ``(status, assignment, value)``.
    """
    n = len(variables)
    m = len(rows)
    index = {v: i for i, v in enumerate(variables)}
    # columns: x+ (0..n-1), x- (n..2n-1), slack (2n..2n+m-1), artificials after
    n_struct = 2 * n + m
    tableau: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    artificial_rows = []
    for i, e in enumerate(rows):
        row = [ZERO] * n_struct
        for var, c in e.coeffs.items():
            j = index[var]
            row[j] = c
            row[n + j] = -c
        row[2 * n + i] = -ONE
        b = -e.constant
        if b <= 0:
            row = [-x for x in row]
            b = -b
            tableau.append(row)
            rhs.append(b)
            basis.append(2 * n + i)
        else:
            tableau.append(row)
            rhs.append(b)
            basis.append(-1)
            artificial_rows.append(i)

    n_art = len(artificial_rows)
    width = n_struct + n_art
    for row in tableau:
        row.extend([ZERO] * n_art)
    for k, i in enumerate(artificial_rows):
        tableau[i][n_struct + k] = ONE
        basis[i] = n_struct + k

    if n_art:
        cost = [ZERO] * n_struct + [-ONE] * n_art
        status = _iterate(tableau, rhs, basis, cost, width)
        value = sum((cost[basis[i]] * rhs[i] for i in range(len(rhs))), ZERO)
        if status is not LpStatus.OPTIMAL or value < 0:
            return LpStatus.INFEASIBLE, None, None
        # drive remaining artificials out of the basis
        i = 0
        while i < len(rhs):
            if basis[i] >= n_struct:
                col = next((j for j in range(n_struct) if tableau[i][j] != 0), None)
                if col is None:
                    del tableau[i], rhs[i], basis[i]
                    continue
                _pivot(tableau, rhs, basis, i, col)
            i += 1
        for row in tableau:
            del row[n_struct:]

    cost = [ZERO] * n_struct
    for var, c in objective.coeffs.items():
        j = index[var]
        cost[j] = c
        cost[n + j] = -c
    status = _iterate(tableau, rhs, basis, cost, n_struct)
    if status is LpStatus.UNBOUNDED:
        return LpStatus.UNBOUNDED, None, None

    y = [ZERO] * n_struct
    for i, j in enumerate(basis):
        y[j] = rhs[i]
    values = {v: y[i] - y[n + i] for v, i in index.items()}
    return LpStatus.OPTIMAL, values, objective.evaluate(values)


def _iterate(tableau, rhs, basis, cost, width) -> LpStatus:
    """Primal simplex with Bland's rule; maximises ``cost . y``."""
    while True:
        in_basis = set(basis)
        entering = None
        for j in range(width):
            if j in in_basis:
                continue
            d = cost[j]
            for i, b in enumerate(basis):
                cb = cost[b]
                if cb:
                    t = tableau[i][j]
                    if t:
                        d -= cb * t
            if d > 0:
                entering = j
                break
        if entering is None:
            return LpStatus.OPTIMAL
        leave = None
        best = None
        for i, row in enumerate(tableau):
            t = row[entering]
            if t > 0:
                ratio = rhs[i] / t
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return LpStatus.UNBOUNDED
        _pivot(tableau, rhs, basis, leave, entering)


def _pivot(tableau, rhs, basis, r, c) -> None:
    prow = tableau[r]
    p = prow[c]
    if p != 1:
        inv = 1 / p
        prow = [x * inv if x else x for x in prow]
        tableau[r] = prow
        rhs[r] *= inv
    nz = [j for j, x in enumerate(prow) if x]
    pr = rhs[r]
    for i, row in enumerate(tableau):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
            rhs[i] -= f * pr
    basis[r] = c
