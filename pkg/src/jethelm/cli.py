"""Command-line front end.

One YAML problem file drives every command::

    n: 1
    G: ["y1 + x1/2"]
    theta0: "exp(2*t)*(y1^2 - x1^2)/2"
    theta: ["exp(2*t)*y1"]
    integrator: {t0: 0, t1: 5, h: 0.001, x0: [1], y0: [-1]}

Exit codes: 0 pass, 1 mathematical failure (with witness), 2 input or usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml

from . import __version__
from .expr import (
    ParseError,
    Point,
    ProbeSettings,
    get_settings,
    is_zero,
    parse,
    set_settings,
    weakest,
)
from .geodesic import (
    BlowUpError,
    IntegrationDomainError,
    IntegratorConfig,
    conservation_check,
    el_residual_samples,
    first_integral_samples,
    integrate,
)
from .helmholtz import (
    MAX_SYMBOLIC_N,
    Lagrangian,
    OracleMismatchError,
    SemiBasicOneForm,
    SingularMetricError,
    check,
    determinant,
    euler_lagrange_semispray,
    numeric_semispray,
    poincare_cartan,
)
from .identities import run_identities, summarize
from .semispray import Semispray

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
TOOL = "jethelm"


class InputError(Exception):
    """Problem-file or usage error; ``location`` names the offending field."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass
class Integrator:
    t0: float
    t1: float
    h: float
    x0: List[float]
    y0: List[float]


@dataclass
class Problem:
    path: str
    n: int
    G: Optional[List[str]] = None
    theta0: Optional[str] = None
    theta: Optional[List[str]] = None
    L: Optional[str] = None
    seed: Optional[int] = None
    probes: Optional[int] = None
    tol: Optional[float] = None
    integrator: Optional[Integrator] = None
    parsed: Dict[str, Any] = field(default_factory=dict)

    def semispray(self) -> Semispray:
        if self.G is None:
            raise InputError("missing G", self.path)
        return self.parsed["G"]

    def one_form(self) -> SemiBasicOneForm:
        if self.theta0 is None or self.theta is None:
            raise InputError("missing theta0/theta block", self.path)
        return SemiBasicOneForm(self.parsed["theta0"], self.parsed["theta"])

    def lagrangian(self) -> Lagrangian:
        if self.L is None:
            raise InputError("missing L", self.path)
        return Lagrangian(self.parsed["L"], self.n)


_KNOWN = {"n", "G", "theta0", "theta", "L", "seed", "probes", "tol", "integrator"}


def _expr(text: Any, n: int, where: str):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise InputError("expected an expression string", where)
    try:
        return parse(text, n)
    except ParseError as exc:
        raise InputError(f"{exc.message} at column {exc.offset + 1} in {text!r}", where) from None


def _string_list(raw: Any, n: int, where: str) -> List[str]:
    if not isinstance(raw, list):
        raise InputError("expected a list", where)
    if len(raw) != n:
        raise InputError(f"expected {n} entries, got {len(raw)}", where)
    return [str(v) if not isinstance(v, str) else v for v in raw]


def _number(raw: Any, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise InputError("expected a number", where)
    if not math.isfinite(raw):
        raise InputError("expected a finite number", where)
    return float(raw)


def load_problem(path: str) -> Problem:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(exc.strerror or "cannot read file", path) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else path
        raise InputError("malformed YAML", loc) from None
    if not isinstance(data, dict):
        raise InputError("top level must be a mapping", path)
    unknown = sorted(set(data) - _KNOWN)
    if unknown:
        raise InputError(f"unknown field(s) {', '.join(map(str, unknown))}", path)
    n = data.get("n")
    if isinstance(n, bool) or not isinstance(n, int):
        raise InputError("n must be an integer", f"{path}:n")
    if n < 1:
        raise InputError("n must be at least 1", f"{path}:n")
    prob = Problem(path=path, n=n)
    if "G" in data:
        prob.G = _string_list(data["G"], n, f"{path}:G")
        G = [_expr(s, n, f"{path}:G[{i + 1}]") for i, s in enumerate(prob.G)]
        prob.parsed["G"] = Semispray(n, G)
    if ("theta0" in data) != ("theta" in data):
        raise InputError("theta0 and theta must be given together", path)
    if "theta0" in data:
        prob.theta0 = str(data["theta0"])
        prob.parsed["theta0"] = _expr(data["theta0"], n, f"{path}:theta0")
        prob.theta = _string_list(data["theta"], n, f"{path}:theta")
        prob.parsed["theta"] = [_expr(s, n, f"{path}:theta[{i + 1}]") for i, s in enumerate(prob.theta)]
    if "L" in data:
        prob.L = str(data["L"])
        prob.parsed["L"] = _expr(data["L"], n, f"{path}:L")
    if "seed" in data:
        if isinstance(data["seed"], bool) or not isinstance(data["seed"], int) or data["seed"] < 0:
            raise InputError("seed must be a non-negative integer", f"{path}:seed")
        prob.seed = data["seed"]
    if "probes" in data:
        if isinstance(data["probes"], bool) or not isinstance(data["probes"], int) or data["probes"] < 1:
            raise InputError("probes must be a positive integer", f"{path}:probes")
        prob.probes = data["probes"]
    if "tol" in data:
        prob.tol = _number(data["tol"], f"{path}:tol")
        if prob.tol <= 0:
            raise InputError("tol must be positive", f"{path}:tol")
    if "integrator" in data:
        raw = data["integrator"]
        where = f"{path}:integrator"
        if not isinstance(raw, dict):
            raise InputError("expected a mapping", where)
        missing = [k for k in ("t0", "t1", "h", "x0", "y0") if k not in raw]
        if missing:
            raise InputError(f"missing {', '.join(missing)}", where)
        vecs = {}
        for k in ("x0", "y0"):
            v = raw[k]
            if not isinstance(v, list) or len(v) != n:
                raise InputError(f"expected a list of {n} numbers", f"{where}.{k}")
            vecs[k] = [_number(c, f"{where}.{k}[{i + 1}]") for i, c in enumerate(v)]
        prob.integrator = Integrator(
            _number(raw["t0"], f"{where}.t0"),
            _number(raw["t1"], f"{where}.t1"),
            _number(raw["h"], f"{where}.h"),
            vecs["x0"],
            vecs["y0"],
        )
    return prob


# ---------------------------------------------------------------------------
# report documents


_KINDS = ("ProvenZero", "ProbablyZero", "NonZero")


def _count_verdicts(obj, counts: Dict[str, int]):
    # witnesses repeat a verdict already counted at their parent
    if isinstance(obj, dict):
        for key in ("verdict", "evidence"):
            v = obj.get(key)
            if v in _KINDS:
                counts[v] = counts.get(v, 0) + 1
        for key, val in obj.items():
            if key != "witness":
                _count_verdicts(val, counts)
    elif isinstance(obj, list):
        for val in obj:
            _count_verdicts(val, counts)


def document(command: str, prob: Problem, settings: ProbeSettings, body: dict, exit_code: int) -> dict:
    counts: Dict[str, int] = {}
    _count_verdicts(body, counts)
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "problem": Path(prob.path).name,
        "settings": {
            "seed": settings.seed,
            "probes": settings.probes,
            "tol": settings.tol,
            "numeric_only": settings.numeric_only,
        },
        "verdict_counts": dict(sorted(counts.items())),
        "exit_code": exit_code,
        "result": body,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=str) + "\n"


# ---------------------------------------------------------------------------
# commands; each returns (body, exit code, human-readable lines)


def _report_lines(rep: dict) -> List[str]:
    lines = [f"route {rep['route']}: {rep['classification']}"]
    for k, c in rep["conditions"].items():
        lines.append(f"  {k:3s} {c['evidence']}")
    if "witness" in rep:
        w = rep["witness"]
        lines.append(f"  witness: {w['condition']} / {w['component']} = {w['expression']}")
    if "lagrangian" in rep:
        lines.append(f"  L = {rep['lagrangian']['L'] or '(numeric quadrature)'}")
    if "first_integral" in rep:
        lines.append(f"  f = {rep['first_integral']['f'] or '(numeric)'}")
    if "dual_symmetry" in rep:
        lines.append(f"  dual symmetry: {'pass' if rep['dual_symmetry']['passed'] else 'fail'}")
    return lines


def cmd_check(prob: Problem, args) -> tuple:
    S = prob.semispray()
    theta = prob.one_form()
    rep = check(S, theta).as_dict()
    return rep, EXIT_PASS if rep["passed"] else EXIT_FAIL, _report_lines(rep)


def _symbolic_allowed(n: int, args) -> bool:
    if args.numeric_only:
        return False
    if n > MAX_SYMBOLIC_N:
        raise InputError(f"symbolic inversion supports n <= {MAX_SYMBOLIC_N}; rerun with --numeric-only")
    return True


def cmd_from_lagrangian(prob: Problem, args) -> tuple:
    L = prob.lagrangian()
    n = prob.n
    thL = poincare_cartan(L)
    body: Dict[str, Any] = {
        "L": str(L.L),
        "theta_L": {"theta0": str(thL.theta0), "theta": [str(e) for e in thL.theta]},
    }
    det = determinant(L.g)
    dv = is_zero(det, n=n)
    body["det_g"] = {"expression": str(det), **dv.as_dict()}
    if dv.is_zero:
        body["passed"] = False
        body["witness"] = {"condition": "regularity", "component": "det g", "expression": str(det), **dv.as_dict()}
        return body, EXIT_FAIL, [f"singular Lagrangian: det g = {det} ({dv.kind})"]
    if _symbolic_allowed(n, args):
        try:
            S = euler_lagrange_semispray(L)
        except SingularMetricError as exc:
            body["passed"] = False
            body["witness"] = {"condition": "regularity", "component": "det g", "expression": str(exc.det)}
            return body, EXIT_FAIL, [str(exc)]
        body["G"] = [str(e) for e in S.G]
    elif prob.G is not None:
        S = prob.semispray()
        body["G"] = None
        body["note"] = "numeric-only: G taken from the problem file, not derived"
    else:
        body["G"] = None
        body["passed"] = True
        body["note"] = "numeric-only: no symbolic G; the Helmholtz check needs G in the problem file"
        return body, EXIT_PASS, ["numeric-only: regular Lagrangian, check skipped (no G)"]
    lines = [f"G{i + 1} = {g}" for i, g in enumerate(body["G"] or prob.G)]
    lines.append(f"theta0 = {thL.theta0}")
    if prob.G is not None and body["G"] is not None:
        given = prob.semispray()
        mv = weakest(is_zero(a - b, n=n) for a, b in zip(S.G, given.G))
        body["matches_file_G"] = mv.as_dict()
        lines.append(f"G matches file: {mv.kind}")
        if not mv.is_zero:
            body["passed"] = False
            body["witness"] = {"condition": "file G", "component": "G - G_file", **mv.as_dict()}
            return body, EXIT_FAIL, lines
    rep = check(S, thL).as_dict()
    body["report"] = rep
    # i_S θ_L must give back L itself
    back = is_zero(thL.theta0 - L.L, n=n)
    body["i_S theta_L - L"] = back.as_dict()
    body["passed"] = rep["passed"] and rep["route"] == "dJ-closed" and back.is_zero
    lines += _report_lines(rep)
    return body, EXIT_PASS if body["passed"] else EXIT_FAIL, lines


def cmd_geodesics(prob: Problem, args) -> tuple:
    if prob.integrator is None:
        raise InputError("missing integrator block", prob.path)
    it = prob.integrator
    n = prob.n
    L = prob.lagrangian() if prob.L is not None else None
    if prob.G is not None:
        S = prob.semispray()
        G_source = S
    elif L is not None:
        if _symbolic_allowed(n, args):
            try:
                S = euler_lagrange_semispray(L)
            except SingularMetricError as exc:
                body = {"passed": False, "witness": {"component": "det g", "expression": str(exc.det)}}
                return body, EXIT_FAIL, [str(exc)]
            G_source = S
        else:
            S = None
            G_source = numeric_semispray(L)
    else:
        raise InputError("need G or L to integrate", prob.path)
    try:
        cfg = IntegratorConfig(it.t0, it.t1, it.h)
    except ValueError as exc:
        raise InputError(str(exc), f"{prob.path}:integrator") from None
    init = Point(it.t0, tuple(it.x0), tuple(it.y0))
    try:
        traj = integrate(G_source, init, cfg, n=n)
    except IntegrationDomainError as exc:
        raise InputError(f"domain error at t={exc.t}: {exc}", f"{prob.path}:integrator") from None
    except SingularMetricError as exc:
        raise InputError(f"singular metric along trajectory: {exc}", f"{prob.path}:integrator") from None
    except BlowUpError as exc:
        last = exc.last_good[0] if exc.last_good else None
        body = {"passed": False, "blow_up": {"message": str(exc), "last_good_t": last}}
        return body, EXIT_FAIL, [f"blow-up; last good t = {last}"]
    extra: Dict[str, Any] = {}
    body: Dict[str, Any] = {"samples": len(traj), "h": it.h, "method": traj.method}
    if prob.theta0 is not None and S is not None:
        rep = check(S, prob.one_form())
        if rep.passed:
            extra["f"] = first_integral_samples(rep.first_integral.evaluator, traj)
            body["first_integral_drift"] = conservation_check(rep.first_integral.evaluator, traj)
            if L is None and rep.lagrangian.symbolic:
                L = rep.lagrangian.lagrangian
        body["classification"] = rep.classification
    if L is not None and S is not None:
        extra["el_residual"] = el_residual_samples(L, traj, S)
        body["el_residual_max"] = float(max(extra["el_residual"]))
    fin = traj.final
    body["final"] = {"t": fin.t, "x": list(fin.x), "y": list(fin.y)}
    body["columns"] = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)] + list(extra)
    body["passed"] = True
    try:
        Path(args.output).write_text(traj.to_csv(extra))
    except OSError as exc:
        raise InputError(exc.strerror or "cannot write", args.output) from None
    lines = [f"{len(traj)} samples written to {args.output}", f"final x = {list(fin.x)}"]
    if "first_integral_drift" in body:
        lines.append(f"first-integral drift {body['first_integral_drift']:.3e}")
    if "el_residual_max" in body:
        lines.append(f"max EL residual {body['el_residual_max']:.3e}")
    return body, EXIT_PASS, lines


def cmd_identities(prob: Problem, args) -> tuple:
    S = prob.semispray()
    res = run_identities(S, get_settings().seed)
    body = summarize(res)
    lines = [f"{'ok  ' if r.passed else 'FAIL'} {r.verdict.kind:13s} {r.name}" for r in res]
    return body, EXIT_PASS if body["passed"] else EXIT_FAIL, lines


COMMANDS = {
    "check": cmd_check,
    "from-lagrangian": cmd_from_lagrangian,
    "geodesics": cmd_geodesics,
    "identities": cmd_identities,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="probe seed (overrides the problem file)")
    common.add_argument("--probes", type=int, help="probe count for zero tests")
    common.add_argument("--tol", type=float, help="relative tolerance for zero tests")
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--numeric-only", action="store_true", help="probe-based verdicts only, no symbolic inversion")
    p = argparse.ArgumentParser(prog=TOOL, description="Helmholtz conditions for time-dependent SODEs")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("check", "from-lagrangian", "identities"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("problem")
    sp = sub.add_parser("geodesics", parents=[common])
    sp.add_argument("problem")
    sp.add_argument("output", help="CSV output path")
    return p


def _settings_for(prob: Problem, args) -> ProbeSettings:
    base = ProbeSettings()
    seed = args.seed if args.seed is not None else (prob.seed if prob.seed is not None else base.seed)
    probes = args.probes if args.probes is not None else (prob.probes if prob.probes is not None else base.probes)
    tol = args.tol if args.tol is not None else (prob.tol if prob.tol is not None else base.tol)
    if seed < 0:
        raise InputError("--seed must be non-negative")
    if probes < 1:
        raise InputError("--probes must be positive")
    if not tol > 0:
        raise InputError("--tol must be positive")
    return ProbeSettings(probes=probes, tol=tol, seed=seed, numeric_only=bool(args.numeric_only))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    old = get_settings()
    try:
        prob = load_problem(args.problem)
        settings = _settings_for(prob, args)
        set_settings(settings)
        body, code, lines = COMMANDS[args.command](prob, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OracleMismatchError as exc:
        print(f"internal cross-check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    finally:
        set_settings(old)
    doc = document(args.command, prob, settings, body, code)
    for line in lines:
        print(line)
    print("PASS" if code == EXIT_PASS else "FAIL")
    if args.json:
        text = dumps(doc)
        if args.json == "-":
            sys.stdout.write(text)
        else:
            try:
                Path(args.json).write_text(text)
            except OSError as exc:
                print(f"error: {args.json}: {exc.strerror}", file=sys.stderr)
                return EXIT_INPUT
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
