"""Farkas dual systems for parametric implications and their linearization.

An implication ``premise(x) => c(params).x + d(params) >= 0`` over
universally quantified ``x`` holds (for a satisfiable premise) iff there are
multipliers ``l_i >= 0`` with ``c_j = sum_i l_i * a_ij`` for every ``j`` and
``d >= sum_i l_i * b_i``. When premise coefficients themselves mention
parameters (the threshold ``k`` or the coefficients of a parametric
increasing function) the dual contains products ``l_i * param``; these are
kept symbolically in :class:`DualRow` until :func:`linearize` removes them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import PreconditionError, StructuralError
from .linear import Constraint, LinExpr, Number, Polyhedron, Q, Rel
from .loop import CandidateFn, SlcLoop, primed

DEC_PREFIX = "l"
POS_PREFIX = "lp"
INC_PREFIX = "m"
# multiplier of the ``f(x) >= k`` premise row and its products
DEC_LAMBDA, POS_LAMBDA = "l", "lp"
DEC_P, POS_P = "P", "Pp"
THRESHOLD = "k"


@dataclass(frozen=True)
class ParamRow:
    """``sum_j coeffs[j] * x_j + constant  rel  0`` with parametric entries."""

    coeffs: Mapping[str, LinExpr]
    constant: LinExpr = field(default_factory=LinExpr)
    rel: Rel = Rel.GEQ0
    label: str | None = None

    @classmethod
    def from_constraint(cls, c: Constraint) -> "ParamRow":
        return cls(
            {v: LinExpr.const(a) for v, a in c.expr.coeffs.items()},
            LinExpr.const(c.expr.constant),
            c.rel,
        )

    def params(self) -> frozenset[str]:
        out = set(self.constant.variables())
        for e in self.coeffs.values():
            out |= e.variables()
        return frozenset(out)

    def negated(self) -> "ParamRow":
        return ParamRow({v: -e for v, e in self.coeffs.items()}, -self.constant, self.rel, self.label)


@dataclass(frozen=True)
class DualRow:
    """``linear + sum(coeff * mult * param)  rel  0``."""

    linear: LinExpr
    products: tuple[tuple[str, str, Fraction], ...] = ()
    rel: Rel = Rel.GEQ0

    def product_multipliers(self) -> set[str]:
        return {m for m, _, _ in self.products}


@dataclass(frozen=True)
class DualSystem:
    multipliers: tuple[str, ...]
    params: tuple[str, ...]
    rows: tuple[DualRow, ...]
    premise_rows: tuple[tuple[str, int], ...]
    """``(multiplier, index of the source premise row)`` pairs."""

    @property
    def vars(self) -> tuple[str, ...]:
        return self.multipliers + self.params

    @property
    def is_linear(self) -> bool:
        return not any(r.products for r in self.rows)

    @property
    def system(self) -> Polyhedron:
        if not self.is_linear:
            raise StructuralError("dual system still contains multiplier-parameter products")
        return Polyhedron(self.vars, tuple(Constraint(r.linear, r.rel) for r in self.rows))

    def instantiate(self, values: Mapping[str, Number]) -> Polyhedron:
        """Fix some parameters to numbers; every product must be resolved."""
        vals = {p: Q(v) for p, v in values.items()}
        rows = []
        for r in self.rows:
            e = r.linear.substitute(vals)
            for m, p, c in r.products:
                if p not in vals:
                    raise StructuralError(f"product {m}*{p} left unresolved")
                e = e + LinExpr.var(m, c * vals[p])
            rows.append(Constraint(e, r.rel))
        rest = tuple(v for v in self.vars if v not in vals)
        return Polyhedron(rest, tuple(rows))


def farkas_dual(
    premise: Sequence[ParamRow] | Polyhedron,
    conclusion: ParamRow,
    universal: Sequence[str],
    params: Sequence[str] = (),
    prefix: str = DEC_PREFIX,
) -> DualSystem:
    """Dual of ``forall universal: premise => conclusion >= 0``.

    Premise rows are non-strict; an equality row contributes two opposed
    inequalities with multipliers ``<prefix><i>a`` / ``<prefix><i>b``.
    A row carrying a ``label`` uses it as its multiplier name.
    """
    if isinstance(premise, Polyhedron):
        premise = [ParamRow.from_constraint(c) for c in premise.constraints]
    universal = tuple(universal)
    params = tuple(params)
    if conclusion.rel is not Rel.GEQ0:
        raise PreconditionError("the conclusion must be an inequality expr >= 0")
    allowed = set(params)
    for row in list(premise) + [conclusion]:
        if row.rel is Rel.GT0:
            raise PreconditionError("Farkas' lemma is applied to non-strict premises only")
        stray = set(row.coeffs) - set(universal)
        if stray:
            raise StructuralError(f"row mentions non-universal variables {sorted(stray)}")
        if not row.params() <= allowed:
            raise StructuralError(f"row uses undeclared parameters {sorted(row.params() - allowed)}")

    expanded: list[tuple[str, ParamRow, int]] = []
    for i, row in enumerate(premise, start=1):
        base = row.label or f"{prefix}{i}"
        if row.rel is Rel.EQ0:
            expanded.append((base + "a", row, i - 1))
            expanded.append((base + "b", row.negated(), i - 1))
        else:
            expanded.append((base, row, i - 1))
    multipliers = tuple(name for name, _, _ in expanded)
    if len(set(multipliers)) != len(multipliers) or set(multipliers) & allowed:
        raise StructuralError(f"multiplier names clash: {multipliers}")

    rows: list[DualRow] = [DualRow(LinExpr.var(m)) for m in multipliers]

    def combination(pick) -> tuple[LinExpr, dict]:
        linear = LinExpr()
        products: dict[tuple[str, str], Fraction] = {}
        for m, row, _ in expanded:
            entry = pick(row)
            if entry.constant:
                linear = linear + LinExpr.var(m, entry.constant)
            for p, c in entry.coeffs.items():
                products[(m, p)] = products.get((m, p), 0) + c
        return linear, products

    def as_row(linear, products, rel) -> DualRow:
        prods = tuple((m, p, -c) for (m, p), c in products.items() if c)
        return DualRow(linear, prods, rel)

    for j in universal:
        zero = LinExpr()
        lin, prods = combination(lambda row: row.coeffs.get(j, zero))
        rows.append(as_row(conclusion.coeffs.get(j, zero) - lin, prods, Rel.EQ0))
    lin, prods = combination(lambda row: row.constant)
    rows.append(as_row(conclusion.constant - lin, prods, Rel.GEQ0))

    return DualSystem(
        multipliers,
        params,
        tuple(rows),
        tuple((m, idx) for m, _, idx in expanded),
    )


def rho_params(loop: SlcLoop, prefix: str = "a") -> tuple[str, ...]:
    """Coefficient parameter names ``a1..an`` in loop variable order."""
    return tuple(f"{prefix}{i}" for i in range(1, loop.n + 1))


def _rho_rows(loop: SlcLoop, rho: Sequence[str] | CandidateFn):
    """Conclusions ``rho(x) - rho(x') - 1 >= 0`` and ``rho(x) >= 0``."""
    if isinstance(rho, CandidateFn):
        coeff = {v: LinExpr.const(rho.coeff(v)) for v in loop.vars}
        const = LinExpr.const(rho.constant)
    else:
        if len(rho) != loop.n:
            raise StructuralError("one ranking parameter per loop variable is required")
        coeff = {v: LinExpr.var(a) for v, a in zip(loop.vars, rho)}
        const = LinExpr()
    dec = dict(coeff)
    dec.update({primed(v): -coeff[v] for v in loop.vars})
    return (
        ParamRow(dec, LinExpr.const(-1)),
        ParamRow(dict(coeff), const),
    )


def threshold_row(
    loop: SlcLoop, f: CandidateFn | Sequence[str], label: str, k: str = THRESHOLD
) -> ParamRow:
    """Premise row ``f(x) - k >= 0``; ``f`` fixed or given by parameter names."""
    if isinstance(f, CandidateFn):
        if f.constant:
            raise PreconditionError("increasing functions are linear (no constant)")
        coeffs = {v: LinExpr.const(f.coeff(v)) for v in loop.vars if f.coeff(v)}
    else:
        coeffs = {v: LinExpr.var(b) for v, b in zip(loop.vars, f)}
    return ParamRow(coeffs, -LinExpr.var(k), Rel.GEQ0, label)


def build_dec_pos(
    loop: SlcLoop,
    rho: Sequence[str] | CandidateFn,
    f: CandidateFn | Sequence[str] | None = None,
) -> tuple[DualSystem, DualSystem]:
    """DEC and POS duals for ``rho`` under ``body`` (and ``f(x) >= k`` if given).

    ``rho`` is either parameter names (one per loop variable) or a fixed
    candidate. ``f`` is a fixed increasing function, parameter names for a
    parametric one, or None for the plain ranking-function systems.
    """
    dec_concl, pos_concl = _rho_rows(loop, rho)
    params: list[str] = [] if isinstance(rho, CandidateFn) else list(rho)
    body = [ParamRow.from_constraint(c) for c in loop.body.constraints]
    dec_premise, pos_premise = list(body), list(body)
    if f is not None:
        if not isinstance(f, CandidateFn):
            params.extend(f)
        params.append(THRESHOLD)
        dec_premise.append(threshold_row(loop, f, DEC_LAMBDA))
        pos_premise.append(threshold_row(loop, f, POS_LAMBDA))
    universal = loop.all_vars
    dec = farkas_dual(dec_premise, dec_concl, universal, params, DEC_PREFIX)
    pos = farkas_dual(pos_premise, pos_concl, universal, params, POS_PREFIX)
    return dec, pos


def build_inc_dual(loop: SlcLoop, b: Sequence[str]) -> DualSystem:
    """Dual of ``body => f(x') - f(x) - 1 >= 0`` with ``f = b.x`` parametric."""
    coeffs = {}
    for v, p in zip(loop.vars, b):
        coeffs[v] = -LinExpr.var(p)
        coeffs[primed(v)] = LinExpr.var(p)
    concl = ParamRow(coeffs, LinExpr.const(-1))
    return farkas_dual(loop.body, concl, loop.all_vars, tuple(b), INC_PREFIX)


@dataclass(frozen=True)
class LinearizedPair:
    """The two branches of a dual with one product-carrying multiplier.

    ``case1`` sets that multiplier to zero; ``case2`` requires it positive
    and replaces ``lambda*k`` by ``product_vars[0]`` and ``lambda*b_i`` by
    the following entries (parametric increasing function only).
    """

    case1: Polyhedron
    case2: Polyhedron
    product_vars: tuple[str, ...]
    lambda_var: str
    param_products: Mapping[str, str]
    """parameter -> product variable standing for ``lambda * parameter``."""


def linearize(
    dual: DualSystem,
    k_var: str = THRESHOLD,
    f_param_vars: Sequence[str] = (),
    product_name: str = DEC_P,
    f_product_names: Sequence[str] = (),
) -> LinearizedPair:
    """Split ``exists k. dual`` into the ``lambda = 0`` and ``lambda > 0`` branches."""
    f_param_vars = tuple(f_param_vars)
    f_product_names = tuple(f_product_names)
    if len(f_product_names) != len(f_param_vars):
        raise StructuralError("one product name per parametric f coefficient is required")
    carriers = set()
    for r in dual.rows:
        carriers |= r.product_multipliers()
    if len(carriers) != 1:
        raise StructuralError(
            f"expected products on exactly one multiplier, found {sorted(carriers)}"
        )
    (lam,) = carriers
    mapping = {k_var: product_name, **dict(zip(f_param_vars, f_product_names))}
    eliminated = set(mapping)
    for r in dual.rows:
        stray = r.linear.variables() & eliminated
        if stray:
            raise StructuralError(f"parameters {sorted(stray)} occur outside products")
        for m, p, _ in r.products:
            if p not in mapping:
                raise StructuralError(f"unexpected product {m}*{p}")

    keep_params = tuple(p for p in dual.params if p not in eliminated)
    case1_rows, case2_rows = [], []
    for r in dual.rows:
        if r.linear == LinExpr.var(lam) and r.rel is Rel.GEQ0 and not r.products:
            case2_rows.append(Constraint(LinExpr.var(lam), Rel.GT0))
            continue
        case1_rows.append(Constraint(r.linear.substitute({lam: 0}), r.rel))
        e = r.linear
        for m, p, c in r.products:
            e = e + LinExpr.var(mapping[p], c)
        case2_rows.append(Constraint(e, r.rel))

    others = tuple(m for m in dual.multipliers if m != lam)
    product_vars = (product_name,) + f_product_names
    case1 = Polyhedron(others + keep_params, tuple(case1_rows))
    case2 = Polyhedron(dual.multipliers + keep_params + product_vars, tuple(case2_rows))
    return LinearizedPair(case1, case2, product_vars, lam, mapping)
