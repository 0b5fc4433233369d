"""Concrete simulation of loops, used to refute bad certificates.

The oracle never proves anything: it runs seeded traces and reports every
transition on which a certificate's promise is broken.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import ResourceError
from .linear import Constraint, LinExpr, Polyhedron, Rel
from .loop import SlcLoop, body_satisfiable, primed
from .lp import lp_solve

DEFAULT_MAX_STEPS = 1000


@dataclass(frozen=True)
class Trace:
    points: tuple[Mapping[str, Fraction], ...]
    terminated: bool


@dataclass(frozen=True)
class Violation:
    trial: int
    step: int
    state: Mapping[str, Fraction]
    successor: Mapping[str, Fraction]
    reason: str

    def __str__(self):
        fmt = lambda p: "{" + ", ".join(f"{v}: {q}" for v, q in p.items()) + "}"
        return f"trial {self.trial} step {self.step}: {self.reason} on {fmt(self.state)} -> {fmt(self.successor)}"


@dataclass
class TraceReport:
    trials: int = 0
    transitions: int = 0
    terminated: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _random_rational(rng: random.Random, bound: int = 5) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, 3))


def _nullspace(rows, names) -> list[dict[str, Fraction]]:
    """Exact basis of ``{d : row.d = 0 for every row}`` by Gauss-Jordan."""
    matrix = [[r.coeff(v) for v in names] for r in rows]
    pivots = []
    r = 0
    for c in range(len(names)):
        pivot = next((i for i in range(r, len(matrix)) if matrix[i][c]), None)
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        lead = matrix[r][c]
        matrix[r] = [a / lead for a in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][c]:
                factor = matrix[i][c]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(len(names)) if c not in pivots):
        d = {names[free]: Fraction(1)}
        for row, c in zip(matrix, pivots):
            if row[free]:
                d[names[c]] = -row[free]
        basis.append(d)
    return basis


def _walk(system: Polyhedron, point: Mapping[str, Fraction], rng, moves: int = 3) -> dict:
    """Hit-and-run from a feasible ``point`` of a non-strict ``system``.

    Directions are drawn from the null space of the equality rows and the
    step length uniformly from the feasible chord, capped for unbounded rays.
    """
    names = list(system.vars)
    basis = _nullspace([c.expr for c in system.constraints if c.rel is Rel.EQ0], names)
    point = dict(point)
    if not basis:
        return point
    inequalities = [c.expr for c in system.constraints if c.rel is not Rel.EQ0]
    for _ in range(moves):
        weights = [_random_rational(rng) for _ in basis]
        d = {v: sum((w * b.get(v, 0) for w, b in zip(weights, basis)), Fraction(0)) for v in names}
        if not any(d.values()):
            continue
        cap = Fraction(rng.randint(1, 10))
        lo, hi = -cap, cap
        for e in inequalities:
            slope = sum((a * d[v] for v, a in e.coeffs.items()), Fraction(0))
            if slope:
                bound = -e.evaluate(point) / slope
                if slope > 0:
                    lo = max(lo, bound)
                else:
                    hi = min(hi, bound)
        if lo > hi:
            continue
        t = lo + (hi - lo) * Fraction(rng.randint(0, 8), 8)
        point = {v: point[v] + t * d[v] for v in names}
    return point


def step(loop: SlcLoop, point: Mapping[str, Fraction], strategy: str = "lp_witness", seed=None):
    """A successor ``x'`` of ``point`` (keyed by unprimed names), or None.

    ``strategy`` is ``"lp_witness"`` or ``"randomized"`` (a seeded walk
    away from the LP witness).
    """
    pinned = loop.body.substitute({v: Fraction(point[v]) for v in loop.vars})
    res = lp_solve(pinned)
    if not res.feasible:
        return None
    nxt = dict(res.point)
    if strategy == "randomized":
        nxt = _walk(pinned, nxt, _rng(seed))
    elif strategy != "lp_witness":
        raise ValueError(f"unknown strategy {strategy!r}")
    return {v: nxt[primed(v)] for v in loop.vars}


def sample_start(loop: SlcLoop, rng, anchor: Mapping[str, Fraction] | None = None):
    """A start point from which at least one transition exists, or None.

    ``anchor`` is any feasible body point; passing it saves one LP per call.
    """
    rng = _rng(rng)
    if anchor is None:
        res = lp_solve(loop.body)
        if not res.feasible:
            return None
        anchor = res.point
    point = _walk(loop.body, anchor, rng, moves=4)
    return {v: point[v] for v in loop.vars}


def simulate(
    loop: SlcLoop,
    start: Mapping[str, Fraction],
    max_steps: int = DEFAULT_MAX_STEPS,
    strategy: str = "randomized",
    seed=None,
) -> Trace:
    rng = _rng(seed)
    points = [dict(start)]
    for _ in range(max_steps):
        nxt = step(loop, points[-1], strategy, rng)
        if nxt is None:
            return Trace(tuple(points), True)
        points.append(nxt)
    return Trace(tuple(points), False)


def _promises(cert):
    """Callables ``(x, x') -> reason or None`` for a certificate."""
    from .detect import Kind

    rho = cert.rho
    checks = []

    def decrease(x, nx):
        if rho.evaluate(x) < 1 + rho.evaluate(nx):
            return f"rho does not decrease by 1 ({rho.evaluate(x)} -> {rho.evaluate(nx)})"

    def positive(x, nx):
        if rho.evaluate(x) < 0:
            return f"rho is negative ({rho.evaluate(x)})"

    if cert.kind is Kind.LRF:
        return [(None, decrease), (None, positive)]
    if cert.kind in (Kind.ELRF, Kind.EVENTUAL_AFFINE):
        checks.append((cert.f_decrease, decrease))
        checks.append((cert.f_positive, positive))
        return checks
    return []


def check_certificate_on_traces(
    loop: SlcLoop,
    certificate,
    trials: int = 100,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
) -> TraceReport:
    """Simulate ``trials`` seeded traces and record every broken promise.

    LRF promises hold on every transition; eventual promises only on
    transitions whose source satisfies ``f(x) >= k`` (the decrease against
    ``f_d`` and positivity against ``f_p`` for a min-pair).
    """
    report = TraceReport()
    checks = _promises(certificate)
    base = lp_solve(loop.body)
    for trial in range(trials):
        report.trials += 1
        rng = random.Random(seed * 1_000_003 + trial)
        start = sample_start(loop, rng, base.point) if base.feasible else None
        if start is None:
            report.terminated += 1
            continue
        trace = simulate(loop, start, max_steps, "randomized", rng)
        report.terminated += trace.terminated
        for i, (x, nx) in enumerate(zip(trace.points, trace.points[1:])):
            report.transitions += 1
            for f, check in checks:
                if f is not None and f.evaluate(x) < certificate.k:
                    continue
                reason = check(x, nx)
                if reason:
                    report.violations.append(Violation(trial, i, x, nx, reason))
    return report


def random_loop(
    n_vars: int, n_rows: int, coeff_bound: int, seed: int, retries: int = 200
) -> SlcLoop:
    """Deterministic random loop with integer coefficients in ``[-bound, bound]``.

    Rows alternate between guards over ``x`` and update rows that bound one
    primed variable by the current values; unsatisfiable bodies are redrawn.
    """
    if n_vars < 1 or n_rows < 1:
        raise ValueError("need at least one variable and one row")
    rng = random.Random(seed)
    names = ["x", "y", "z", "w", "v", "t"][:n_vars] if n_vars <= 6 else [f"x{i}" for i in range(n_vars)]
    for _ in range(retries):
        rows = []
        for r in range(n_rows):
            coeffs = {}
            for v in rng.sample(names, rng.randint(1, min(n_vars, 2))):
                coeffs[v] = rng.randint(-coeff_bound, coeff_bound)
            if r % 2 == 1:
                v = rng.choice(names)
                coeffs[primed(v)] = rng.choice([c for c in range(-coeff_bound, coeff_bound + 1) if c])
            const = rng.randint(-coeff_bound, coeff_bound)
            rel = Rel.EQ0 if r % 2 == 1 and rng.random() < 0.2 else Rel.GEQ0
            rows.append(Constraint(LinExpr(coeffs, const), rel))
        body = Polyhedron(tuple(names) + tuple(primed(v) for v in names), tuple(rows))
        loop = SlcLoop(tuple(names), body)
        if body_satisfiable(loop):
            return loop
    raise ResourceError(f"no satisfiable random loop after {retries} attempts (seed {seed})")
