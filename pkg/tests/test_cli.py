import json
from fractions import Fraction

import pytest

from _corpus import DATA, DRAIN, SLOW, F_NEG_Y, GOLDEN, fn, load, random_corpus
from elrf.cli import emit_json, main, parse_json
from elrf.detect import Case, Certificate, Kind, detect_affine, detect_elrf, detect_elrf_given_f, detect_lrf
from elrf.loopfile import ParseError, parse_loop_file, print_loop_file


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def test_drain_file():
    lf = load("drain")
    assert lf.loop == DRAIN and len(lf.loop.body.constraints) == 4
    assert lf.increasing is None and lf.candidate is None


def test_increasing_line_is_attached():
    assert load("slow_drain").increasing == F_NEG_Y


def test_every_golden_file_matches_its_loop():
    for name, loop in GOLDEN.items():
        assert load(name).loop == loop


def test_rational_terms_and_comments():
    lf = parse_loop_file("vars: x, y  # two\nbody:\n3/2*x - y' >= -2 # c\nx' = 1/2\ncandidate: 2*x + 1\n")
    c0, c1 = lf.loop.body.constraints
    assert c0.expr.coeff("x") == Fraction(3, 2) and c0.expr.constant == 2
    assert c1.expr.constant == Fraction(-1, 2)
    assert lf.candidate == fn({"x": 2}, 1)


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("vars: x\nbody:\nx'' <= 3\n", 3, 3),
        ("vars: x\nbody:\nx > 3\n", 3, 3),
        ("vars: x\nbody:\nx < 3\n", 3, 3),
        ("vars: x\nvars: x\nbody:\n", 2, 1),
        ("vars: x\nbody:\nz >= 1\n", 3, 1),
        ("vars: x\nbody:\nx >= 1 >= 2\n", 3, 8),
        ("vars: x\nbody:\nx + >= 1\n", 3, 5),
        ("vars: x\nbody:\nx >= 1\nincreasing: x'\n", 4, 13),
        ("vars: x\nbody:\nx @ 1\n", 3, 3),
    ],
)
def test_parse_errors_carry_positions(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_loop_file(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_missing_sections():
    with pytest.raises(ParseError):
        parse_loop_file("body:\nx >= 0\n")
    with pytest.raises(ParseError):
        parse_loop_file("vars: x\n")


def test_print_parse_round_trip():
    loops = list(GOLDEN.values()) + [loop for _, loop in random_corpus(50)]
    for loop in loops:
        assert parse_loop_file(print_loop_file(loop)).loop == loop
    lf = load("slow_drain")
    again = parse_loop_file(print_loop_file(lf.loop, lf.increasing, fn({"x": 1}, -3)))
    assert again.increasing == lf.increasing and again.candidate == fn({"x": 1}, -3)


def test_json_examples():
    assert emit_json(Certificate(Kind.TRIVIAL)) == '{"status":"TRIVIAL_BODY_UNSAT"}'
    loop = parse_loop_file("vars: x, y\nbody:\nx >= 0\nx' = x\ny' >= y + 1\n").loop
    assert emit_json(detect_elrf(loop)) == '{"status":"NOT_FOUND","diagnostics":["phi22 relaxed only"]}'
    data = json.loads(emit_json(detect_elrf_given_f(SLOW, F_NEG_Y)))
    assert list(data) == ["status", "rho", "constant", "k", "f", "case"]
    assert data["k"] == "1" and data["rho"] == {"x": "1", "y": "0"} and data["case"] == "DEC2_POS1"


def test_json_round_trip():
    certs = [
        Certificate(Kind.TRIVIAL),
        Certificate(Kind.NONE, diagnostics=("phi22 relaxed only",)),
        detect_lrf(DRAIN),
        detect_elrf_given_f(SLOW, F_NEG_Y),
        detect_affine(GOLDEN["offset_drain"], "elrf_given_f", F_NEG_Y),
        detect_elrf(GOLDEN["flip"]),
        Certificate(Kind.ELRF, fn({"x": 1}), Fraction(-5, 3), (F_NEG_Y, F_NEG_Y.scaled(2)), Case.PHI22_RELAXED,
                    ("phi22 relaxed only",)),
    ]
    for cert in certs:
        assert parse_json(emit_json(cert)) == cert
    assert json.loads(emit_json(certs[-1]))["k"] == "-5/3"


def test_cli_detect_elrf_json(capsys):
    code, out, _ = run(capsys, "detect-elrf", DATA / "slow_drain.loop", "--json")
    data = json.loads(out)
    assert code == 0 and data["status"] == "ELRF_FOUND"
    assert data["rho"] == {"x": "1", "y": "0"} and data["k"] == "1" and data["case"] == "DEC2_POS1"


def test_cli_affine(capsys):
    code, out, _ = run(capsys, "detect-elrf", DATA / "offset_drain.loop")
    assert code == 0 and out == "NOT_FOUND"
    code, out, _ = run(capsys, "detect-elrf", DATA / "offset_drain.loop", "--affine", "--json")
    data = json.loads(out)
    assert data["status"] == "EVENTUAL_AFFINE_FOUND" and data["constant"] == "1" and data["k"] == "1"


def test_cli_inc(capsys):
    code, out, _ = run(capsys, "inc", DATA / "flip.loop")
    assert code == 0 and set(out.splitlines()) == {"b1 <= -2", "b1 - 2*b2 = 0"}


def test_cli_verify(capsys, tmp_path):
    path = tmp_path / "drain.loop"
    path.write_text((DATA / "drain.loop").read_text() + "candidate: 1*x\n")
    assert run(capsys, "verify", path) == (0, "VERIFIED", "")
    path.write_text((DATA / "slow_drain.loop").read_text() + "candidate: 1*x\n")
    code, out, _ = run(capsys, "verify", path)
    assert code == 0 and out.splitlines()[0] == "VERIFIED"
    assert run(capsys, "verify", path, "--k", "0")[:2] == (0, "NOT_VERIFIED")
    assert run(capsys, "verify", path, "--k", "1", "--json")[1] == '{"status":"VERIFIED","k":"1"}'


def test_cli_no_verdict_still_exits_zero(capsys):
    code, out, _ = run(capsys, "detect-lrf", DATA / "slow_drain.loop")
    assert code == 0 and out == "NOT_FOUND"


def test_cli_input_errors_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "verify", DATA / "slow_drain.loop")
    assert code == 2 and "candidate" in err
    bad = tmp_path / "bad.loop"
    bad.write_text("vars: x\nbody:\nx'' <= 3\n")
    code, _, err = run(capsys, "detect-lrf", bad)
    assert code == 2 and "line 3, column 3" in err
    assert run(capsys, "detect-lrf", tmp_path / "missing.loop")[0] == 2
    assert run(capsys, "bogus", bad)[0] == 2
    assert run(capsys, "verify", bad, "--k", "0.5")[0] == 2


def test_cli_resource_cap_exits_3(capsys, monkeypatch):
    monkeypatch.setenv("ELRF_FM_ROW_CAP", "1")
    code, _, err = run(capsys, "inc", DATA / "flip.loop")
    assert code == 3 and "resource" in err


def test_cli_simulate_is_deterministic(capsys):
    first = run(capsys, "simulate", DATA / "slow_drain.loop", "--seed", "5", "--trials", "20")
    second = run(capsys, "simulate", DATA / "slow_drain.loop", "--seed", "5", "--trials", "20")
    assert first == second and first[0] == 0 and "violations: 0" in first[1]


def test_cli_output_is_byte_identical(capsys):
    outs = {run(capsys, "detect-elrf", DATA / "flip.loop", "--json")[1] for _ in range(3)}
    assert len(outs) == 1
