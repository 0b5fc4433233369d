"""Shared loops for the test modules."""

from pathlib import Path

from elrf.linear import LinExpr
from elrf.loop import CandidateFn, canonicalize
from elrf.loopfile import parse_loop_file
from elrf.oracle import random_loop

DATA = Path(__file__).parent / "data"
XY = ("x", "y")
x, y, xp, yp = (LinExpr.var(v) for v in ("x", "y", "x'", "y'"))


def load(name):
    return parse_loop_file((DATA / f"{name}.loop").read_text())


def fn(mapping, constant=0, vars=XY):
    return CandidateFn.build(vars, mapping, constant)


DRAIN = canonicalize([(x, ">=", 0), (yp, "<=", y - 1), (xp, "<=", x + y), (y, "<=", -1)], XY)
SLOW = canonicalize([(x, ">=", 0), (yp, "<=", y - 1), (xp, "<=", x + y)], XY)
OFFSET = canonicalize([(x, ">=", -1), (yp, "<=", y - 1), (xp, "<=", x + y)], XY)
FLIP = canonicalize([(x, ">=", 0), (xp, "<=", x + y), (yp, "<=", -y - 1)], XY)
SHIFT = canonicalize([(x, ">=", 1), (xp, "=", y), (yp, "=", y - 1)], XY)

GOLDEN = {"drain": DRAIN, "slow_drain": SLOW, "offset_drain": OFFSET, "flip": FLIP, "shift": SHIFT}
F_NEG_Y = fn({"y": -1})


def random_corpus(count=50):
    """Seeded loops with 2-3 variables, 3-6 rows and coefficients in [-3, 3]."""
    return [(s, random_loop(2 + s % 2, 3 + s % 4, 3, s)) for s in range(count)]


def reconstruct(loop, f, cert):
    """Substitute ``k = P/lambda`` (and ``b = p/lambda``) into the un-linearized duals.

    Returns a list of ``(side, feasible, same_multipliers_fit)`` triples, one
    per dual. A side whose multiplier is zero is instantiated with ``k = 0``.
    """
    from elrf.detect import Case, build_problem
    from elrf.lp import lp_solve

    problem = build_problem(loop, f)
    sol = cert.raw_solution
    case = Case.PHI22 if cert.case is Case.PHI22_RELAXED else cert.case
    out = []
    sides = [
        ("DEC", problem.dec, problem.dec_lin, case in (Case.PHI21, Case.PHI22)),
        ("POS", problem.pos, problem.pos_lin, case in (Case.PHI12, Case.PHI22)),
    ]
    for name, dual, lin, positive in sides:
        values = {p: sol[p] for p in problem.a}
        if positive:
            lam = sol[lin.lambda_var]
            for param, prod in lin.param_products.items():
                values[param] = sol[prod] / lam
        else:
            values.update({param: 0 for param in lin.param_products})
        system = dual.instantiate(values)
        mults = {m: sol.get(m, 0) for m in dual.multipliers}
        out.append((name, lp_solve(system).feasible, system.contains(mults)))
    return out
