"""Reader and writer for the plain-text loop format.

::

    vars: x, y
    body:
    x >= 0
    y' <= y - 1
    x' <= x + y
    increasing: -1*y
    candidate: 1*x + 1

Terms are ``q*v``, ``q``, ``v`` or ``v'`` with ``q`` an integer or ``p/q``.
``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ElrfError
from .linear import LinExpr, format_expr
from .loop import CandidateFn, SlcLoop, canonicalize, primed

SECTIONS = ("vars", "body", "increasing", "candidate")
_HEADER = re.compile(r"^\s*([A-Za-z_]+)\s*:")
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)(?P<prime>'?)"
    r"|(?P<rel><=|>=|==|=<|=|<|>)|(?P<op>[+\-*]))"
)


class ParseError(ElrfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class LoopFile:
    loop: SlcLoop
    increasing: CandidateFn | None = None
    candidate: CandidateFn | None = None


def _tokenize(text: str, line: int, offset: int):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = offset + len(text[:pos]) + (len(text[pos:]) - len(text[pos:].lstrip())) + 1
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", line, col)
        start = m.start(m.lastgroup) if m.lastgroup != "prime" else m.start("ident")
        col = offset + start + 1
        if m.group("num"):
            tokens.append(("num", Fraction(m.group("num")), col))
        elif m.group("ident"):
            name = m.group("ident") + m.group("prime")
            tokens.append(("var", name, col))
            if m.group("prime") and m.end() < len(text) and text[m.end()] == "'":
                raise ParseError("unexpected second prime", line, offset + m.end() + 1)
        elif m.group("rel"):
            tokens.append(("rel", m.group("rel"), col))
        else:
            tokens.append(("op", m.group("op"), col))
        pos = m.end()
    return tokens


def _parse_expr(tokens, i, line, end_col):
    """Parse ``term (('+'|'-') term)*`` starting at ``tokens[i]``."""
    expr = LinExpr()
    first = True
    while True:
        sign = 1
        if i < len(tokens) and tokens[i][0] == "op" and tokens[i][1] in "+-":
            sign = -1 if tokens[i][1] == "-" else 1
            i += 1
        elif not first:
            break
        if i >= len(tokens):
            raise ParseError("expected a term", line, end_col)
        kind, value, col = tokens[i]
        if kind == "num":
            i += 1
            if i < len(tokens) and tokens[i][:2] == ("op", "*"):
                i += 1
                if i >= len(tokens) or tokens[i][0] != "var":
                    raise ParseError("expected a variable after '*'", line, tokens[i][2] if i < len(tokens) else end_col)
                expr = expr + LinExpr.var(tokens[i][1], sign * value)
                i += 1
            else:
                expr = expr + sign * value
        elif kind == "var":
            expr = expr + LinExpr.var(value, sign)
            i += 1
        else:
            raise ParseError(f"expected a term, found {value!r}", line, col)
        first = False
        if i < len(tokens) and not (tokens[i][0] == "op" and tokens[i][1] in "+-"):
            break
    return expr, i


def _check_vars(expr_tokens, allowed, line):
    for kind, value, col in expr_tokens:
        if kind == "var" and value not in allowed:
            raise ParseError(f"undeclared variable {value!r}", line, col)


def _parse_function(text, line, offset, vars) -> CandidateFn:
    tokens = _tokenize(text, line, offset)
    _check_vars(tokens, set(vars), line)
    expr, i = _parse_expr(tokens, 0, line, offset + len(text) + 1)
    if i != len(tokens):
        raise ParseError(f"unexpected {tokens[i][1]!r}", line, tokens[i][2])
    return CandidateFn.from_expr(vars, expr)


def parse_loop_file(text: str) -> LoopFile:
    seen: dict[str, int] = {}
    vars: list[str] | None = None
    raw = []
    increasing = candidate = None
    pending_fns = []
    in_body = False

    for lineno, full in enumerate(text.splitlines(), start=1):
        content = full.split("#", 1)[0]
        if not content.strip():
            continue
        m = _HEADER.match(content)
        if m and m.group(1) in SECTIONS:
            name = m.group(1)
            if name in seen:
                raise ParseError(f"duplicate section {name!r} (first on line {seen[name]})", lineno, m.start(1) + 1)
            seen[name] = lineno
            rest = content[m.end():]
            in_body = name == "body"
            if name == "vars":
                names = [v.strip() for v in rest.split(",")]
                col = m.end()
                for v in names:
                    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
                        raise ParseError(f"bad variable name {v!r}", lineno, col + 1)
                if len(set(names)) != len(names):
                    raise ParseError("duplicate variable in vars", lineno, m.end() + 1)
                vars = names
            elif name == "body":
                if rest.strip():
                    raise ParseError("constraints go on the lines after 'body:'", lineno, m.end() + 1)
            else:
                pending_fns.append((name, rest, lineno, m.end()))
            continue
        if m and not in_body:
            raise ParseError(f"unknown section {m.group(1)!r}", lineno, m.start(1) + 1)
        if not in_body:
            raise ParseError("constraint outside the body section", lineno, 1)
        if vars is None:
            raise ParseError("'vars:' must come before the body", lineno, 1)
        raw.append(_parse_constraint(content, lineno, vars))

    if vars is None:
        raise ParseError("missing 'vars:' section", 1, 1)
    if "body" not in seen:
        raise ParseError("missing 'body:' section", 1, 1)
    for name, rest, lineno, offset in pending_fns:
        fn = _parse_function(rest, lineno, offset, vars)
        if name == "increasing":
            increasing = fn
        else:
            candidate = fn
    return LoopFile(canonicalize(raw, vars), increasing, candidate)


def _parse_constraint(content, lineno, vars):
    tokens = _tokenize(content, lineno, 0)
    allowed = set(vars) | {primed(v) for v in vars}
    _check_vars(tokens, allowed, lineno)
    rels = [t for t in tokens if t[0] == "rel"]
    if len(rels) != 1:
        col = rels[1][2] if rels else len(content) + 1
        raise ParseError("expected exactly one relation", lineno, col)
    _, op, col = rels[0]
    if op in ("<", ">"):
        raise ParseError(f"strict relation {op!r} is not allowed in a loop body", lineno, col)
    end = len(content) + 1
    lhs, i = _parse_expr(tokens, 0, lineno, end)
    if i >= len(tokens) or tokens[i][0] != "rel":
        raise ParseError("expected a relation", lineno, tokens[i][2] if i < len(tokens) else end)
    rhs, j = _parse_expr(tokens, i + 1, lineno, end)
    if j != len(tokens):
        raise ParseError(f"unexpected {tokens[j][1]!r}", lineno, tokens[j][2])
    op = {"==": "=", "=<": "<="}.get(op, op)
    return (lhs, op, rhs)


def print_loop_file(
    loop: SlcLoop, increasing: CandidateFn | None = None, candidate: CandidateFn | None = None
) -> str:
    lines = [f"vars: {', '.join(loop.vars)}", "body:"]
    for c in loop.body.constraints:
        op = "=" if c.rel.name == "EQ0" else ">="
        lines.append(f"{format_expr(c.expr, loop.all_vars)} {op} 0")
    if increasing is not None:
        lines.append(f"increasing: {format_expr(increasing.as_expr(), loop.vars)}")
    if candidate is not None:
        lines.append(f"candidate: {format_expr(candidate.as_expr(), loop.vars)}")
    return "\n".join(lines) + "\n"
