"""Command line front end: analyze | simulate | verify | random.

Exit codes: 0 all checks pass, 1 a verification check failed, 2 input or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import ConfigError, SimulationConfig, SimulationError
from .graph import AssumptionError, GraphError, RandomGraphParams, load_graph, random_leader_graph
from .incidence import matrix_csv
from .lyapunov import LyapunovError
from .pipeline import analyze, default_x0, parse_alpha, parse_q, run
from .spectral import SpectralError, TolerancePolicy

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _load(path: str):
    try:
        return load_graph(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except GraphError as exc:
        report = getattr(exc, "report", None)
        if report is not None:
            sys.stderr.write(_dumps(report.to_dict()))
        raise InputError(str(exc)) from exc


def _parse_x0(text, n: int) -> np.ndarray:
    if text is None:
        return default_x0(n)
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise InputError(f"--x0 is not a comma separated list of numbers: {text!r}") from exc
    if x0.size != n:
        raise InputError(f"--x0 has {x0.size} entries but the graph has {n} nodes")
    return x0


def _policy(args) -> TolerancePolicy:
    return TolerancePolicy(rank_rtol=args.rtol)


def _prepare_run(args, record_every: int):
    g = _load(args.graph)
    a = analyze(g, _policy(args))
    if a.assumption is None:
        raise InputError(a.assumption_error)
    x0 = _parse_x0(args.x0, g.n)
    try:
        Q = parse_q(args.q, g.m)
        alphas = parse_alpha(args.alpha, a.zes.xi) if a.zes.xi else np.zeros(0)
        cfg = SimulationConfig(x0, k1=args.k1, t_final=args.t, dt=args.dt, record_every=record_every)
        cfg.n_steps
    except (ValueError, ConfigError) as exc:
        raise InputError(str(exc)) from exc
    return a, cfg, Q, alphas


def _config_echo(args, cfg: SimulationConfig, policy: TolerancePolicy) -> dict:
    return {"k1": cfg.k1, "q": args.q, "alpha": args.alpha, "x0": cfg.x0.tolist(), "dt": cfg.dt,
            "t_final": cfg.t_final, "record_every": cfg.record_every, "tol": args.tol,
            "tolerance_policy": policy.to_dict()}


def cmd_analyze(args) -> int:
    g = _load(args.graph)
    a = analyze(g, _policy(args))
    doc = a.to_dict()
    if args.matrices:
        out = Path(args.matrices)
        out.mkdir(parents=True, exist_ok=True)
        for name, mat, prefix in [("Es", a.inc.Es, "e"), ("EsIn", a.inc.EsIn, "e"),
                                  ("Ls", a.inc.Ls, "v"), ("Le", a.inc.Le, "e")]:
            (out / f"{name}.csv").write_text(matrix_csv(mat, prefix), encoding="utf-8", newline="\n")
        doc["matrices_written"] = [str(out / f"{n}.csv") for n in ("Es", "EsIn", "Ls", "Le")]
    text = _dumps(doc)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    a, cfg, Q, alphas = _prepare_run(args, args.record_every)
    res = run(a, cfg, Q, alphas, args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "trajectory": out / "trajectory.csv",
        "verdict": out / "verdict.json",
        "certificate": out / "certificate.json",
        "summary": out / "summary.json",
        "manifest": out / "manifest.json",
    }
    summary = {"diagnostics": res.trajectory.summary(), "verdict": res.verdict.to_dict(),
               "certificate": res.certificate.to_dict(include_matrix=False),
               "invariants": {k: {"value": v, "tol": t} for k, (v, t) in res.invariants.items()},
               "failures": res.failures()}
    files["trajectory"].write_text(res.trajectory.to_csv(), encoding="utf-8", newline="\n")
    files["verdict"].write_text(_dumps(res.verdict.to_dict()), encoding="utf-8", newline="\n")
    files["certificate"].write_text(_dumps(res.certificate.to_dict()), encoding="utf-8", newline="\n")
    files["summary"].write_text(_dumps(summary), encoding="utf-8", newline="\n")
    manifest = {"command": "simulate", "inputs": [args.graph], "config": _config_echo(args, cfg, a.policy),
                "tool_version": __version__, "outputs": [str(p) for p in files.values()]}
    files["manifest"].write_text(_dumps(manifest), encoding="utf-8", newline="\n")
    sys.stdout.write(_dumps(summary))
    return EXIT_OK if res.verdict.overall_pass else EXIT_FAIL


def cmd_verify(args) -> int:
    # every step recorded so the Lyapunov rate can be checked by finite differences
    a, cfg, Q, alphas = _prepare_run(args, 1)
    res = run(a, cfg, Q, alphas, args.tol)
    failures = res.failures()
    doc = {"graph": args.graph, "class": a.behavior.value, "theorem_item": a.theorem_item,
           "gamma": a.zes.gamma, "xi": a.zes.xi, "pass": not failures, "failures": failures,
           "null_space_relation": a.report.to_dict()["null_space_relation"]}
    sys.stdout.write(_dumps(doc))
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_random(args) -> int:
    params = RandomGraphParams(n=args.n, l1=args.roots, l2sb=args.sb_sccs, l2sub=args.sub_sccs,
                               scc_size=args.scc_size, density=args.density, neg_prob=args.neg_prob,
                               force_sb=args.sb)
    try:
        g = random_leader_graph(params, args.seed)
    except GraphError as exc:
        raise InputError(str(exc)) from exc
    sys.stdout.write(g.to_json())
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x0", help="comma separated initial states (default: 3.5,4,-2,-6.5,5.5,-10.5,3.5,12,5.5 "
                                "cycled to the node count)")
    p.add_argument("--k1", type=float, default=4.0, help="control gain (default: 4)")
    p.add_argument("--t", type=float, default=10.0, help="final time (default: 10)")
    p.add_argument("--dt", type=float, default=1e-3, help="RK4 step (default: 1e-3)")
    p.add_argument("--q", default="identity", help="Q matrix: identity | diag:<csv> (default: identity)")
    p.add_argument("--alpha", default="1", help="alphas: scalar or one per zero eigenvalue (default: 1)")
    p.add_argument("--tol", type=float, default=1e-6, help="objective check tolerance (default: 1e-6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signedcon", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--rtol", type=float, default=1e-9, help="relative rank tolerance (default: 1e-9)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structure, ranks, multiplicities and predicted behavior")
    p.add_argument("graph")
    p.add_argument("-o", "--output", help="write the analysis JSON here instead of stdout")
    p.add_argument("--matrices", help="directory for Es/EsIn/Ls/Le CSV exports")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulate and write trajectory CSV plus JSON reports")
    p.add_argument("graph")
    _add_run_flags(p)
    p.add_argument("--record-every", type=int, default=10, help="CSV subsampling factor (default: 10)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run every check; exit 0 only if all pass")
    p.add_argument("graph")
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="emit a random graph with the requested leader groups")
    p.add_argument("--n", type=int, required=True, help="node count")
    p.add_argument("--roots", type=int, default=1, help="root nodes (default: 1)")
    p.add_argument("--sb-sccs", type=int, default=0, help="balanced rooted SCCs (default: 0)")
    p.add_argument("--sub-sccs", type=int, default=0, help="unbalanced rooted SCCs (default: 0)")
    p.add_argument("--scc-size", type=int, default=3, help="nodes per rooted SCC (default: 3)")
    p.add_argument("--density", type=float, default=0.3, help="extra edge probability (default: 0.3)")
    p.add_argument("--neg-prob", type=float, default=0.3, help="antagonistic edge probability (default: 0.3)")
    p.add_argument("--sb", action="store_true", help="force a structurally balanced graph")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, AssumptionError, LyapunovError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (SpectralError, SimulationError) as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
