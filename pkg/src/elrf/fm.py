"""Fourier-Motzkin projection and LP-based redundancy removal."""

from __future__ import annotations

import os
from typing import Iterable

from .errors import ResourceError, StructuralError
from .linear import Constraint, LinExpr, Polyhedron, Rel
from .lp import lp_solve

DEFAULT_ROW_CAP = 10_000


def row_cap() -> int:
    """FM row cap; ``ELRF_FM_ROW_CAP`` overrides the default of 10 000."""
    raw = os.environ.get("ELRF_FM_ROW_CAP")
    if raw is None:
        return DEFAULT_ROW_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"ELRF_FM_ROW_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError("ELRF_FM_ROW_CAP must be positive")
    return cap


def _tidy(rows: Iterable[Constraint]) -> list[Constraint] | None:
    """Normalize and deduplicate; None signals a false constant row."""
    seen = set()
    out = []
    for c in rows:
        truth = c.constant_truth()
        if truth is True:
            continue
        if truth is False:
            return None
        c = c.normalized()
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def fm_project(
    system: Polyhedron, eliminate: Iterable[str], cap: int | None = None
) -> Polyhedron:
    """Project ``system`` onto ``vars - eliminate``.

    Equalities mentioning the variable are used for substitution; otherwise
    rows are paired by opposite signs. A combination is strict iff one of
    its parents is. Redundant rows are dropped after every step.
    Raises :class:`ResourceError` if a step produces more than ``cap`` rows.
    """
    eliminate = list(dict.fromkeys(eliminate))
    missing = set(eliminate) - set(system.vars)
    if missing:
        raise StructuralError(f"cannot eliminate undeclared variables {sorted(missing)}")
    cap = row_cap() if cap is None else cap
    keep = tuple(v for v in system.vars if v not in set(eliminate))

    rows = _tidy(system.constraints)
    if rows is None:
        return Polyhedron.empty(keep)
    current_vars = list(system.vars)
    pending = list(eliminate)

    while pending:
        var = _choose(rows, pending)
        pending.remove(var)
        rows = _eliminate(rows, var)
        current_vars.remove(var)
        if rows is None:
            return Polyhedron.empty(keep)
        if len(rows) > cap:
            raise ResourceError(
                f"Fourier-Motzkin produced {len(rows)} rows eliminating {var!r} (cap {cap})"
            )
        reduced = remove_redundant(Polyhedron(tuple(current_vars), tuple(rows)))
        rows = list(reduced.constraints)

    return Polyhedron(keep, tuple(rows))


def _choose(rows: list[Constraint], pending: list[str]) -> str:
    """Prefer variables fixed by an equality, then the smallest pair product."""
    for var in pending:
        if any(c.rel is Rel.EQ0 and c.expr.coeff(var) for c in rows):
            return var

    def cost(var):
        pos = sum(1 for c in rows if c.expr.coeff(var) > 0)
        neg = sum(1 for c in rows if c.expr.coeff(var) < 0)
        return pos * neg - pos - neg

    return min(pending, key=lambda v: (cost(v), pending.index(v)))


def _eliminate(rows: list[Constraint], var: str) -> list[Constraint] | None:
    for c in rows:
        if c.rel is Rel.EQ0 and c.expr.coeff(var):
            a = c.expr.coeff(var)
            value = (c.expr - LinExpr.var(var, a)) * (-1 / a)
            rest = [r.substitute({var: value}) for r in rows if r is not c]
            return _tidy(rest)

    pos, neg, out = [], [], []
    for c in rows:
        a = c.expr.coeff(var)
        if a > 0:
            pos.append(c)
        elif a < 0:
            neg.append(c)
        else:
            out.append(c)
    for p in pos:
        ap = p.expr.coeff(var)
        for q in neg:
            aq = -q.expr.coeff(var)
            expr = p.expr * aq + q.expr * ap
            rel = Rel.GT0 if (p.strict or q.strict) else Rel.GEQ0
            out.append(Constraint(expr, rel))
    return _tidy(out)


def remove_redundant(system: Polyhedron) -> Polyhedron:
    """Equivalent polyhedron in which no row is implied by the others.

    Non-strict inequalities that hold with equality on the whole set are
    turned into equalities first. An unsatisfiable input yields the
    canonical empty polyhedron ``-1 >= 0``.
    """
    rows = _tidy(system.constraints)
    if rows is None or not lp_solve(Polyhedron(system.vars, tuple(rows))).feasible:
        return Polyhedron.empty(system.vars)

    rows = _promote_implicit_equalities(system.vars, rows)
    rows = _reduce_by_equalities(system.vars, rows)
    kept = list(rows)
    i = 0
    while i < len(kept):
        row = kept[i]
        others = Polyhedron(system.vars, tuple(kept[:i] + kept[i + 1 :]))
        if implies(others, row):
            del kept[i]
        else:
            i += 1
    return Polyhedron(system.vars, tuple(kept))


def _promote_implicit_equalities(vars, rows: list[Constraint]) -> list[Constraint]:
    base = Polyhedron(vars, tuple(rows))
    out = []
    for c in rows:
        if c.rel is Rel.GEQ0 and not lp_solve(base.add(Constraint(c.expr, Rel.GT0))).feasible:
            out.append(Constraint(c.expr, Rel.EQ0).normalized())
        else:
            out.append(c)
    return _tidy(out) or []


def _reduce_by_equalities(vars, rows: list[Constraint]) -> list[Constraint]:
    """Gauss-Jordan on the equalities, each pivoting on its last variable.

    The pivot is removed from every other row, so inequalities only keep
    the information the equalities do not already fix.
    """
    order = {v: i for i, v in enumerate(vars)}
    rows = list(rows)
    done: set[int] = set()
    while True:
        idx = next(
            (i for i, c in enumerate(rows) if c.rel is Rel.EQ0 and i not in done and c.expr.coeffs),
            None,
        )
        if idx is None:
            break
        done.add(idx)
        eq = rows[idx]
        pivot = max(eq.expr.coeffs, key=order.__getitem__)
        a = eq.expr.coeff(pivot)
        value = (eq.expr - LinExpr.var(pivot, a)) * (-1 / a)
        for i, c in enumerate(rows):
            if i != idx and c.expr.coeff(pivot):
                rows[i] = c.substitute({pivot: value}).normalized()
    return _tidy(rows) or []


def implies(system: Polyhedron, row: Constraint) -> bool:
    """True iff every point of ``system`` satisfies ``row``."""
    sys_ = system.with_vars(row.variables())
    return all(not lp_solve(sys_.add(neg)).feasible for neg in row.negations())


def includes(outer: Polyhedron, inner: Polyhedron) -> bool:
    """True iff ``inner`` is a subset of ``outer``."""
    inner = inner.with_vars(outer.vars)
    return all(implies(inner, c) for c in outer.constraints)


def equivalent(p: Polyhedron, q: Polyhedron) -> bool:
    """Mutual inclusion, decided exactly by LP."""
    return includes(p, q) and includes(q, p)
