"""Command-line front end and the JSON certificate format."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .detect import (
    Case,
    Certificate,
    Kind,
    detect_affine,
    detect_elrf,
    detect_elrf_given_f,
    detect_lrf,
    inc_space,
)
from .errors import ElrfError, ResourceError
from .linear import format_constraint, format_rational
from .loop import CandidateFn
from .loopfile import LoopFile, ParseError, parse_loop_file
from .oracle import check_certificate_on_traces
from .verify import find_threshold, verify_elrf, verify_increasing, verify_lrf

STATUS = {
    Kind.LRF: "LRF_FOUND",
    Kind.ELRF: "ELRF_FOUND",
    Kind.EVENTUAL_AFFINE: "EVENTUAL_AFFINE_FOUND",
    Kind.TRIVIAL: "TRIVIAL_BODY_UNSAT",
    Kind.NONE: "NOT_FOUND",
}
_KIND = {v: k for k, v in STATUS.items()}

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3


class UsageError(ElrfError):
    pass


def _fn_json(fn: CandidateFn) -> dict:
    return {v: format_rational(c) for v, c in fn.coeffs}


def certificate_dict(cert: Certificate) -> dict:
    out = {"status": STATUS[cert.kind]}
    if cert.rho is not None:
        out["rho"] = _fn_json(cert.rho)
        out["constant"] = format_rational(cert.rho.constant)
    if cert.k is not None:
        out["k"] = format_rational(cert.k)
    if cert.f:
        fs = [_fn_json(f) for f in cert.f]
        out["f"] = fs[0] if len(fs) == 1 else fs
    if cert.case is not None:
        out["case"] = cert.case.value
    if cert.diagnostics:
        out["diagnostics"] = list(cert.diagnostics)
    return out


def emit_json(cert: Certificate) -> str:
    """Compact JSON with a fixed field order; fields without a value are left out."""
    return json.dumps(certificate_dict(cert), separators=(",", ":"))


def _fn_from_json(obj: dict, constant: str = "0") -> CandidateFn:
    return CandidateFn(tuple((v, Fraction(c)) for v, c in obj.items()), Fraction(constant))


def parse_json(text: str) -> Certificate:
    data = json.loads(text)
    try:
        kind = _KIND[data["status"]]
    except KeyError:
        raise ValueError(f"unknown certificate status {data.get('status')!r}") from None
    rho = _fn_from_json(data["rho"], data.get("constant", "0")) if "rho" in data else None
    k = Fraction(data["k"]) if "k" in data else None
    f = data.get("f", ())
    if isinstance(f, dict):
        f = [f]
    return Certificate(
        kind,
        rho,
        k,
        tuple(_fn_from_json(g) for g in f),
        Case(data["case"]) if "case" in data else None,
        tuple(data.get("diagnostics", ())),
    )


def format_certificate(cert: Certificate) -> str:
    lines = [STATUS[cert.kind]]
    if cert.case is not None:
        lines.append(f"case: {cert.case.value}")
    if cert.rho is not None:
        lines.append(f"rho: {cert.rho}")
    if cert.k is not None:
        lines.append(f"k: {format_rational(cert.k)}")
    if len(cert.f) == 1:
        lines.append(f"f: {cert.f[0]}")
    elif cert.f:
        lines.append(f"f_decrease: {cert.f[0]}")
        lines.append(f"f_positive: {cert.f[1]}")
    for d in cert.diagnostics:
        lines.append(f"note: {d}")
    return "\n".join(lines)


def _show(cert: Certificate, as_json: bool) -> str:
    return emit_json(cert) if as_json else format_certificate(cert)


def _need(value, section: str, command: str):
    if value is None:
        raise UsageError(f"{command} needs a '{section}:' line in the loop file")
    return value


def _cmd_detect_lrf(lf: LoopFile, args) -> str:
    cert = detect_affine(lf.loop, "lrf") if args.affine else detect_lrf(lf.loop)
    return _show(cert, args.json)


def _cmd_detect_elrf(lf: LoopFile, args) -> str:
    f = lf.increasing
    if args.affine:
        cert = detect_affine(lf.loop, "elrf" if f is None else "elrf_given_f", f)
    elif f is None:
        cert = detect_elrf(lf.loop)
    else:
        cert = detect_elrf_given_f(lf.loop, f)
    return _show(cert, args.json)


def _cmd_inc(lf: LoopFile, args) -> str:
    space = inc_space(lf.loop).space
    if args.json:
        return json.dumps([format_constraint(c, space.vars) for c in space.constraints])
    return "\n".join(format_constraint(c, space.vars) for c in space.constraints)


def _cmd_verify(lf: LoopFile, args) -> str:
    rho = _need(lf.candidate, "candidate", "verify")
    k = None
    if lf.increasing is None:
        if args.k is not None:
            raise UsageError("--k only applies to eventual checks; add an 'increasing:' line")
        ok = verify_lrf(lf.loop, rho)
    elif args.k is not None:
        k = args.k
        ok = verify_elrf(lf.loop, lf.increasing, rho, k)
    else:
        k = find_threshold(lf.loop, lf.increasing, rho)
        ok = k is not None
    status = "VERIFIED" if ok else "NOT_VERIFIED"
    if args.json:
        out = {"status": status}
        if ok and k is not None:
            out["k"] = format_rational(k)
        return json.dumps(out, separators=(",", ":"))
    return status if not ok or k is None else f"{status}\nk: {format_rational(k)}"


def _cmd_simulate(lf: LoopFile, args) -> str:
    """Check a certificate on traces: the file's candidate, or a detected one."""
    if lf.candidate is None:
        cert = detect_elrf(lf.loop) if lf.increasing is None else detect_elrf_given_f(lf.loop, lf.increasing)
    elif lf.increasing is None:
        cert = Certificate(Kind.LRF, lf.candidate)
    else:
        _need_increasing(lf)
        k = args.k if args.k is not None else find_threshold(lf.loop, lf.increasing, lf.candidate)
        if k is None:
            raise UsageError("no threshold makes the candidate an eventual ranking function; pass --k")
        kind = Kind.EVENTUAL_AFFINE if lf.candidate.constant else Kind.ELRF
        cert = Certificate(kind, lf.candidate, k, (lf.increasing,))
    report = check_certificate_on_traces(lf.loop, cert, trials=args.trials, seed=args.seed)
    if args.json:
        return json.dumps(
            {
                "certificate": certificate_dict(cert),
                "trials": report.trials,
                "transitions": report.transitions,
                "terminated": report.terminated,
                "violations": [str(v) for v in report.violations],
            },
            separators=(",", ":"),
        )
    lines = [
        f"certificate: {STATUS[cert.kind]}",
        f"trials: {report.trials}",
        f"transitions: {report.transitions}",
        f"terminated: {report.terminated}",
        f"violations: {len(report.violations)}",
    ]
    lines += [f"  {v}" for v in report.violations[:10]]
    return "\n".join(lines)


def _need_increasing(lf: LoopFile):
    if not verify_increasing(lf.loop, lf.increasing):
        raise UsageError(f"f = {lf.increasing} is not increasing on this loop")


COMMANDS = {
    "detect-lrf": _cmd_detect_lrf,
    "detect-elrf": _cmd_detect_elrf,
    "inc": _cmd_inc,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
}


def _rational(text: str) -> Fraction:
    try:
        if "." in text or "e" in text.lower():
            raise ValueError
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or p/q, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elrf", description="Linear and eventual linear ranking functions for SLC loops."
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("file", help="loop file, or - for stdin")
    parser.add_argument("--affine", action="store_true", help="allow an affine constant in rho")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--k", type=_rational, default=None, help="fixed threshold for verify/simulate")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        lf = parse_loop_file(text)
        print(COMMANDS[args.command](lf, args))
    except ResourceError as exc:
        print(f"elrf: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (OSError, ElrfError) as exc:
        kind = "parse error" if isinstance(exc, ParseError) else "error"
        print(f"elrf: {kind}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
