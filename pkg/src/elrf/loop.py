"""Single-path linear constraint loops and candidate functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import PreconditionError, StructuralError
from .linear import Constraint, LinExpr, Number, Polyhedron, Q, Rel, format_expr
from .lp import lp_solve

PRIME = "'"


def primed(var: str) -> str:
    return var + PRIME


@dataclass(frozen=True)
class SlcLoop:
    """``while body(x, x'): x := x'`` with a non-strict polyhedral body."""

    vars: tuple[str, ...]
    body: Polyhedron

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.vars:
            raise StructuralError("a loop needs at least one variable")
        if len(set(self.vars)) != len(self.vars):
            raise StructuralError(f"duplicate loop variables {self.vars}")
        for v in self.vars:
            if v.endswith(PRIME):
                raise StructuralError(f"loop variable {v!r} must not end with a prime")
        expected = self.vars + self.primed_vars
        if self.body.vars != expected:
            raise StructuralError(f"body must be over {expected}, got {self.body.vars}")
        for c in self.body.constraints:
            if c.strict:
                raise StructuralError(f"loop bodies are non-strict; got {c}")

    @property
    def primed_vars(self) -> tuple[str, ...]:
        return tuple(primed(v) for v in self.vars)

    @property
    def all_vars(self) -> tuple[str, ...]:
        return self.vars + self.primed_vars

    @property
    def n(self) -> int:
        return len(self.vars)

    def prime_map(self) -> dict[str, str]:
        return dict(zip(self.vars, self.primed_vars))

    def transition_holds(self, x: Mapping[str, Number], x_next: Mapping[str, Number]) -> bool:
        point = {v: Q(x[v]) for v in self.vars}
        point.update({primed(v): Q(x_next[v]) for v in self.vars})
        return self.body.contains(point)


@dataclass(frozen=True)
class CandidateFn:
    """``sum(coeffs[v] * v) + constant`` over the loop variables.

    ``coeffs`` keeps every loop variable, zeros included, in loop order.
    """

    coeffs: tuple[tuple[str, Fraction], ...]
    constant: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", tuple((v, Q(c)) for v, c in self.coeffs)
        )
        object.__setattr__(self, "constant", Q(self.constant))
        for v, _ in self.coeffs:
            if v.endswith(PRIME):
                raise StructuralError(f"candidate coefficient on primed variable {v!r}")

    @classmethod
    def build(
        cls, vars: Sequence[str], mapping: Mapping[str, Number] | None = None, constant: Number = 0
    ) -> "CandidateFn":
        mapping = dict(mapping or {})
        unknown = set(mapping) - set(vars)
        if unknown:
            raise StructuralError(f"candidate mentions unknown variables {sorted(unknown)}")
        return cls(tuple((v, Q(mapping.get(v, 0))) for v in vars), Q(constant))

    @classmethod
    def from_expr(cls, vars: Sequence[str], expr: LinExpr) -> "CandidateFn":
        return cls.build(vars, expr.coeffs, expr.constant)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> Fraction:
        return dict(self.coeffs).get(var, Fraction(0))

    def as_expr(self) -> LinExpr:
        return LinExpr(dict(self.coeffs), self.constant)

    def at_next(self) -> LinExpr:
        """The same function applied to the primed variables."""
        return LinExpr({primed(v): c for v, c in self.coeffs}, self.constant)

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        return self.as_expr().evaluate(point)

    def linear_part(self) -> "CandidateFn":
        return CandidateFn(self.coeffs, Fraction(0))

    def scaled(self, factor: Number) -> "CandidateFn":
        f = Q(factor)
        return CandidateFn(tuple((v, c * f) for v, c in self.coeffs), self.constant * f)

    def __str__(self):
        return format_expr(self.as_expr(), self.vars)


_RELATIONS = {"<=", ">=", "=", "<", ">", "==", "=<"}


def canonicalize(
    raw_constraints: Iterable[tuple[LinExpr, str, LinExpr]], vars: Sequence[str]
) -> SlcLoop:
    """Build a loop from ``(lhs, op, rhs)`` triples over ``vars`` and their primes.

    Rows become ``lhs - rhs >= 0`` (``<=`` is flipped) or ``lhs - rhs = 0``.
    Strict relations are refused: loop bodies are non-strict.
    """
    vars = tuple(vars)
    declared = set(vars) | {primed(v) for v in vars}
    rows = []
    for lhs, op, rhs in raw_constraints:
        lhs, rhs = _expr(lhs), _expr(rhs)
        unknown = (lhs.variables() | rhs.variables()) - declared
        if unknown:
            raise StructuralError(f"undeclared variables {sorted(unknown)}")
        if op not in _RELATIONS:
            raise StructuralError(f"unknown relation {op!r}")
        if op in ("<", ">"):
            raise PreconditionError(
                f"strict relation {op!r} in a loop body; loop bodies must be non-strict"
            )
        if op in (">=",):
            rows.append(Constraint(lhs - rhs, Rel.GEQ0))
        elif op in ("<=", "=<"):
            rows.append(Constraint(rhs - lhs, Rel.GEQ0))
        else:
            rows.append(Constraint(lhs - rhs, Rel.EQ0))
    body = Polyhedron(vars + tuple(primed(v) for v in vars), tuple(rows))
    return SlcLoop(vars, body)


def _expr(value) -> LinExpr:
    if isinstance(value, LinExpr):
        return value
    return LinExpr.const(value)


def fresh_var(taken: Iterable[str], base: str = "u") -> str:
    taken = set(taken)
    name, i = base, 0
    while name in taken or primed(name) in taken:
        i += 1
        name = f"{base}{i}"
    return name


def affine_lift(loop: SlcLoop) -> tuple[SlcLoop, str]:
    """Add a fresh variable pinned to 1 before and after each iteration.

    Returns the lifted loop and the name of the new variable. A linear
    ranking function ``a.x + b*u`` of the lifted loop is the affine
    function ``a.x + b`` of the original one.
    """
    u = fresh_var(loop.all_vars)
    vars = loop.vars + (u,)
    rows = loop.body.constraints + (
        Constraint(LinExpr.var(u) - 1, Rel.EQ0),
        Constraint(LinExpr.var(primed(u)) - 1, Rel.EQ0),
    )
    body = Polyhedron(vars + tuple(primed(v) for v in vars), rows)
    return SlcLoop(vars, body), u


def body_satisfiable(loop: SlcLoop) -> bool:
    return lp_solve(loop.body).feasible
