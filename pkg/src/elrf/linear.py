"""Exact rational linear expressions, constraints and polyhedra.

Everything here is immutable. Coefficients are :class:`fractions.Fraction`
and floats are refused at the boundary so that no rounding can leak in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .errors import StructuralError

Number = Union[int, Fraction, str]


def Q(value: Number) -> Fraction:
    """Coerce ``value`` to a Fraction; strings like ``"3/2"`` are accepted."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(q: Fraction) -> str:
    """Render as ``"n"`` or ``"p/q"``."""
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class LinExpr:
    """``sum(coeffs[v] * v) + constant`` with rational coefficients."""

    __slots__ = ("_coeffs", "_constant", "_hash")

    def __init__(self, coeffs: Mapping[str, Number] | None = None, constant: Number = 0):
        cleaned = {}
        if coeffs:
            for var, c in coeffs.items():
                c = Q(c)
                if c:
                    cleaned[var] = c
        self._coeffs = MappingProxyType(cleaned)
        self._constant = Q(constant)
        self._hash = None

    @classmethod
    def var(cls, name: str, coeff: Number = 1) -> "LinExpr":
        return cls({name: coeff})

    @classmethod
    def const(cls, value: Number) -> "LinExpr":
        return cls(None, value)

    @property
    def coeffs(self) -> Mapping[str, Fraction]:
        return self._coeffs

    @property
    def constant(self) -> Fraction:
        return self._constant

    def coeff(self, var: str) -> Fraction:
        return self._coeffs.get(var, Fraction(0))

    def variables(self) -> frozenset[str]:
        return frozenset(self._coeffs)

    def is_constant(self) -> bool:
        return not self._coeffs

    def _combine(self, other: "LinExpr", sign: int) -> "LinExpr":
        out = dict(self._coeffs)
        for var, c in other._coeffs.items():
            out[var] = out.get(var, 0) + sign * c
        return LinExpr(out, self._constant + sign * other._constant)

    def __add__(self, other):
        if isinstance(other, LinExpr):
            return self._combine(other, 1)
        return LinExpr(self._coeffs, self._constant + Q(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, LinExpr):
            return self._combine(other, -1)
        return LinExpr(self._coeffs, self._constant - Q(other))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self * -1

    def __mul__(self, scalar):
        s = Q(scalar)
        return LinExpr({v: c * s for v, c in self._coeffs.items()}, self._constant * s)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1 / Q(scalar))

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        """Value at ``point``; every variable of the expression must be assigned."""
        total = self._constant
        for var, c in self._coeffs.items():
            try:
                total += c * Q(point[var])
            except KeyError:
                raise StructuralError(f"no value for variable {var!r}") from None
        return total

    def substitute(self, mapping: Mapping[str, "LinExpr | Number"]) -> "LinExpr":
        """Replace variables by expressions (or numbers) simultaneously."""
        out = LinExpr(None, self._constant)
        rest = {}
        for var, c in self._coeffs.items():
            if var in mapping:
                repl = mapping[var]
                out = out + (repl * c if isinstance(repl, LinExpr) else Q(repl) * c)
            else:
                rest[var] = c
        return out + LinExpr(rest)

    def rename(self, mapping: Mapping[str, str]) -> "LinExpr":
        out: dict[str, Fraction] = {}
        for var, c in self._coeffs.items():
            new = mapping.get(var, var)
            out[new] = out.get(new, 0) + c
        return LinExpr(out, self._constant)

    def primitive(self) -> "LinExpr":
        """Positive multiple with coprime integer coefficients (constant included)."""
        values = list(self._coeffs.values()) + [self._constant]
        values = [v for v in values if v]
        if not values:
            return self
        den = lcm(*(v.denominator for v in values))
        num = 0
        for v in values:
            num = gcd(num, (v * den).numerator)
        return self * Fraction(den, num)

    def _key(self):
        return (frozenset(self._coeffs.items()), self._constant)

    def __eq__(self, other):
        if not isinstance(other, LinExpr):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"LinExpr({self})"

    def __str__(self):
        return format_expr(self)


def format_term(coeff: Fraction, var: str, first: bool) -> str:
    mag = abs(coeff)
    body = var if mag == 1 else f"{format_rational(mag)}*{var}"
    if first:
        return f"-{body}" if coeff < 0 else body
    return f" - {body}" if coeff < 0 else f" + {body}"


def format_expr(expr: LinExpr, order: Iterable[str] | None = None) -> str:
    names = list(order) if order is not None else sorted(expr.coeffs)
    names += sorted(set(expr.coeffs) - set(names))
    parts = []
    for var in names:
        c = expr.coeff(var)
        if c:
            parts.append(format_term(c, var, not parts))
    k = expr.constant
    if k or not parts:
        if not parts:
            parts.append(format_rational(k))
        else:
            parts.append(f" - {format_rational(-k)}" if k < 0 else f" + {format_rational(k)}")
    return "".join(parts)


class Rel(enum.Enum):
    GEQ0 = ">="
    GT0 = ">"
    EQ0 = "="


@dataclass(frozen=True)
class Constraint:
    """``expr rel 0``."""

    expr: LinExpr
    rel: Rel = Rel.GEQ0

    @classmethod
    def geq(cls, lhs, rhs=0) -> "Constraint":
        return cls(_as_expr(lhs) - _as_expr(rhs), Rel.GEQ0)

    @classmethod
    def gt(cls, lhs, rhs=0) -> "Constraint":
        return cls(_as_expr(lhs) - _as_expr(rhs), Rel.GT0)

    @classmethod
    def eq(cls, lhs, rhs=0) -> "Constraint":
        return cls(_as_expr(lhs) - _as_expr(rhs), Rel.EQ0)

    @classmethod
    def leq(cls, lhs, rhs=0) -> "Constraint":
        return cls(_as_expr(rhs) - _as_expr(lhs), Rel.GEQ0)

    @classmethod
    def lt(cls, lhs, rhs=0) -> "Constraint":
        return cls(_as_expr(rhs) - _as_expr(lhs), Rel.GT0)

    @property
    def strict(self) -> bool:
        return self.rel is Rel.GT0

    def variables(self) -> frozenset[str]:
        return self.expr.variables()

    def holds(self, point: Mapping[str, Number]) -> bool:
        v = self.expr.evaluate(point)
        if self.rel is Rel.GEQ0:
            return v >= 0
        if self.rel is Rel.GT0:
            return v > 0
        return v == 0

    def negations(self) -> list["Constraint"]:
        """Constraints whose disjunction is the complement of this one."""
        if self.rel is Rel.GEQ0:
            return [Constraint(-self.expr, Rel.GT0)]
        if self.rel is Rel.GT0:
            return [Constraint(-self.expr, Rel.GEQ0)]
        return [Constraint(self.expr, Rel.GT0), Constraint(-self.expr, Rel.GT0)]

    def normalized(self) -> "Constraint":
        """Scale to coprime integers; equalities get a positive leading coefficient."""
        e = self.expr.primitive()
        if self.rel is Rel.EQ0:
            lead = next((e.coeffs[v] for v in sorted(e.coeffs)), e.constant)
            if lead < 0:
                e = -e
        return Constraint(e, self.rel)

    def substitute(self, mapping) -> "Constraint":
        return Constraint(self.expr.substitute(mapping), self.rel)

    def rename(self, mapping: Mapping[str, str]) -> "Constraint":
        return Constraint(self.expr.rename(mapping), self.rel)

    def constant_truth(self) -> bool | None:
        """Truth value when the expression is constant, else None."""
        if not self.expr.is_constant():
            return None
        return self.holds({})

    def __str__(self):
        return format_constraint(self)


def _as_expr(value) -> LinExpr:
    if isinstance(value, LinExpr):
        return value
    if isinstance(value, str) and not _looks_numeric(value):
        return LinExpr.var(value)
    return LinExpr.const(value)


def _looks_numeric(text: str) -> bool:
    try:
        Fraction(text)
    except ValueError:
        return False
    return True


def format_constraint(c: Constraint, order: Iterable[str] | None = None) -> str:
    """Human form with the constant moved right, e.g. ``b1 <= -2``."""
    e = c.expr
    names = list(order) if order is not None else sorted(e.coeffs)
    lead = next((e.coeff(v) for v in names if e.coeff(v)), None)
    if lead is None:
        lead = next((e.coeffs[v] for v in sorted(e.coeffs)), Fraction(0))
    op = {Rel.GEQ0: ">=", Rel.GT0: ">", Rel.EQ0: "="}[c.rel]
    if lead < 0:
        e = -e
        op = {">=": "<=", ">": "<", "=": "="}[op]
    lhs = LinExpr(e.coeffs)
    return f"{format_expr(lhs, order)} {op} {format_rational(-e.constant)}"


@dataclass(frozen=True)
class Polyhedron:
    """Conjunction of constraints over an ordered variable set."""

    vars: tuple[str, ...]
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(set(self.vars)) != len(self.vars):
            raise StructuralError(f"duplicate variable ids in {self.vars}")
        declared = set(self.vars)
        for c in self.constraints:
            if not isinstance(c, Constraint):
                raise StructuralError(f"not a Constraint: {c!r}")
            extra = c.variables() - declared
            if extra:
                raise StructuralError(f"constraint {c} uses undeclared variables {sorted(extra)}")

    @classmethod
    def universe(cls, vars: Iterable[str]) -> "Polyhedron":
        return cls(tuple(vars), ())

    @classmethod
    def empty(cls, vars: Iterable[str]) -> "Polyhedron":
        """The canonical unsatisfiable polyhedron ``-1 >= 0``."""
        return cls(tuple(vars), (Constraint(LinExpr.const(-1)),))

    def add(self, *constraints: Constraint) -> "Polyhedron":
        return Polyhedron(self.vars, self.constraints + tuple(constraints))

    def with_vars(self, extra: Iterable[str]) -> "Polyhedron":
        new = list(self.vars)
        for v in extra:
            if v not in new:
                new.append(v)
        return Polyhedron(tuple(new), self.constraints)

    def conjoin(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.with_vars(other.vars).vars, self.constraints + other.constraints)

    def substitute(self, mapping: Mapping[str, Number]) -> "Polyhedron":
        """Fix the given variables to numbers and drop them from ``vars``."""
        rest = tuple(v for v in self.vars if v not in mapping)
        return Polyhedron(rest, tuple(c.substitute(mapping) for c in self.constraints))

    def contains(self, point: Mapping[str, Number]) -> bool:
        return all(c.holds(point) for c in self.constraints)

    @property
    def has_strict(self) -> bool:
        return any(c.strict for c in self.constraints)

    def __len__(self):
        return len(self.constraints)

    def __str__(self):
        if not self.constraints:
            return "{}"
        return "{" + ", ".join(format_constraint(c, self.vars) for c in self.constraints) + "}"
