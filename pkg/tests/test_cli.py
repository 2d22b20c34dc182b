import json
import shutil
from pathlib import Path

import pytest

from jethelm.cli import load_problem, main

DEMOS = Path(__file__).resolve().parent.parent / "demos" / "problems"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_check_damped_passes(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(["check", DEMOS / "damped.yaml", "--json", out], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["classification"] == "PoincareCartan"
    assert doc["exit_code"] == 0
    assert doc["settings"] == {"numeric_only": False, "probes": 32, "seed": 0, "tol": 1e-9}
    assert "PASS" in text


def test_check_asymmetric_fails_with_witness(capsys):
    code, text, _ = run(["check", DEMOS / "asymmetric.yaml"], capsys)
    assert code == 1
    assert "g_12 - g_21" in text


def test_check_missing_theta(capsys, tmp_path):
    p = write(tmp_path, "p.yaml", 'n: 1\nG: ["0"]\n')
    code, _, err = run(["check", p], capsys)
    assert code == 2 and "theta" in err


def test_from_lagrangian_coupled(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(["from-lagrangian", DEMOS / "coupled_lagrangian.yaml", "--json", out], capsys)
    doc = json.loads(out.read_text())["result"]
    assert code == 0
    assert doc["G"] == ["1/2*x2", "1/2*x1"]
    assert doc["report"]["route"] == "dJ-closed"
    assert doc["i_S theta_L - L"]["verdict"] == "ProvenZero"


def test_from_lagrangian_damped_matches_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(["from-lagrangian", DEMOS / "damped_lagrangian.yaml", "--json", out], capsys)
    assert code == 0
    assert json.loads(out.read_text())["result"]["matches_file_G"]["verdict"] == "ProvenZero"


def test_from_lagrangian_degenerate(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(["from-lagrangian", DEMOS / "degenerate_lagrangian.yaml", "--json", out], capsys)
    assert code == 1
    w = json.loads(out.read_text())["result"]["witness"]
    assert w["component"] == "det g" and w["expression"] == "0"


def test_from_lagrangian_large_n_needs_numeric_only(capsys, tmp_path):
    p = write(tmp_path, "p.yaml", "n: 5\nL: \"(y1^2+y2^2+y3^2+y4^2+y5^2)/2\"\n")
    code, _, err = run(["from-lagrangian", p], capsys)
    assert code == 2 and "--numeric-only" in err
    code, _, _ = run(["from-lagrangian", p, "--numeric-only"], capsys)
    assert code == 0


def test_geodesics_harmonic(capsys, tmp_path):
    out = tmp_path / "h.csv"
    code, _, _ = run(["geodesics", DEMOS / "harmonic.yaml", out], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x1,y1,f,el_residual"
    last = [float(v) for v in lines[-1].split(",")]
    assert abs(last[1] + 1) < 1e-6
    assert abs(last[3] - 0.5) < 1e-8


def test_geodesics_free_particle_columns(capsys, tmp_path):
    out = tmp_path / "f.csv"
    code, _, _ = run(["geodesics", DEMOS / "free_particle_conservative.yaml", out], capsys)
    assert code == 0
    for line in out.read_text().splitlines()[1:]:
        t, x1, y1, f, _ = map(float, line.split(","))
        assert abs(x1 - t) < 1e-12 and y1 == 1 and f == 1


def test_geodesics_numeric_only_from_lagrangian(capsys, tmp_path):
    p = write(
        tmp_path,
        "p.yaml",
        'n: 1\nL: "exp(2*t)*(y1^2 - x1^2)/2"\nintegrator: {t0: 0, t1: 1, h: 0.001, x0: [1], y0: [-1]}\n',
    )
    out = tmp_path / "o.csv"
    code, _, _ = run(["geodesics", p, out, "--numeric-only"], capsys)
    assert code == 0
    last = out.read_text().splitlines()[-1].split(",")
    assert abs(float(last[1]) - 0.36787944117144233) < 1e-6


def test_geodesics_domain_error(capsys, tmp_path):
    code, _, err = run(["geodesics", DEMOS / "singular_G.yaml", tmp_path / "s.csv"], capsys)
    assert code == 2 and "t=0.0" in err


def test_geodesics_blow_up(capsys, tmp_path):
    p = write(tmp_path, "p.yaml", 'n: 1\nG: ["-x1^3"]\nintegrator: {t0: 0, t1: 10, h: 0.1, x0: [10], y0: [10]}\n')
    code, text, _ = run(["geodesics", p, tmp_path / "o.csv"], capsys)
    assert code == 1 and "last good t" in text


def test_geodesics_needs_integrator(capsys, tmp_path):
    code, _, err = run(["geodesics", DEMOS / "asymmetric.yaml", tmp_path / "o.csv"], capsys)
    assert code == 2 and "integrator" in err


def test_identities_pass(capsys):
    code, text, _ = run(["identities", DEMOS / "quadratic_spray.yaml"], capsys)
    assert code == 0 and "FAIL" not in text


def test_identities_free_particle_mostly_proven(capsys, tmp_path):
    p = write(tmp_path, "p.yaml", 'n: 2\nG: ["0", "0"]\n')
    out = tmp_path / "r.json"
    code, _, _ = run(["identities", p, "--json", out], capsys)
    counts = json.loads(out.read_text())["verdict_counts"]
    assert code == 0 and counts.get("NonZero", 0) == 0
    assert counts["ProvenZero"] > counts.get("ProbablyZero", 0)


@pytest.mark.parametrize(
    "text, where",
    [
        ("n: 0\n", ":n"),
        ("n: 1\nG: [\"y1 +* 2\"]\n", ":G[1]"),
        ("n: 1\nG: [\"y2\"]\n", ":G[1]"),
        ("n: 2\nG: [\"0\"]\n", ":G"),
        ("n: 1\nG: [\"0\"]\nbogus: 1\n", "unknown"),
        ("n: 1\nG: [0\n", "malformed YAML"),
        ("- 1\n", "mapping"),
        ("n: 1\nG: [\"0\"]\ntheta0: \"y1\"\n", "together"),
        ("n: 1\nG: [\"0\"]\nintegrator: {t0: 0, t1: 1, h: 0.1, x0: [1]}\n", "y0"),
    ],
)
def test_input_errors_exit_2_with_location(capsys, tmp_path, text, where):
    p = write(tmp_path, "p.yaml", text)
    code, _, err = run(["identities", p], capsys)
    assert code == 2
    assert where in err


def test_missing_file_and_bad_usage(capsys, tmp_path):
    code, _, _ = run(["check", tmp_path / "nope.yaml"], capsys)
    assert code == 2
    code, _, _ = run(["frobnicate"], capsys)
    assert code == 2
    code, _, _ = run(["check", DEMOS / "damped.yaml", "--probes", "0"], capsys)
    assert code == 2


def test_flags_override_problem_settings(capsys, tmp_path):
    src = (DEMOS / "damped.yaml").read_text() + "seed: 5\nprobes: 8\n"
    p = write(tmp_path, "p.yaml", src)
    out = tmp_path / "r.json"
    run(["check", p, "--json", out], capsys)
    assert json.loads(out.read_text())["settings"]["probes"] == 8
    run(["check", p, "--json", out, "--probes", "16", "--seed", "9", "--tol", "1e-10"], capsys)
    s = json.loads(out.read_text())["settings"]
    assert (s["probes"], s["seed"], s["tol"]) == (16, 9, 1e-10)


def test_json_to_stdout(capsys):
    code, text, _ = run(["check", DEMOS / "damped.yaml", "--json", "-"], capsys)
    doc = json.loads(text[text.index("{") :])
    assert doc["command"] == "check" and code == 0


def test_numeric_only_gives_probe_evidence(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(["check", DEMOS / "damped.yaml", "--numeric-only", "--json", out], capsys)
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["result"]["conditions"]["H1"]["evidence"] in ("ProvenZero", "ProbablyZero")
    assert doc["result"]["conditions"]["H4"]["evidence"] == "ProbablyZero"


def test_load_problem_fields(tmp_path):
    p = shutil.copy(DEMOS / "damped.yaml", tmp_path / "d.yaml")
    prob = load_problem(str(p))
    assert prob.n == 1 and prob.integrator.h == 0.001 and prob.theta == ["exp(2*t)*y1"]
