"""Command-line interface.

Subcommands: gen, tune, solve, baseline, exact, sweep. Every flag can also be
set through an environment variable named SQOA_<FLAG> (dashes become
underscores), with explicit flags taking precedence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import ansatz, encoding, engine
from .errors import SqoaError, ValidationError
from .graph import generate_regular_graph, greedy_coloring, read_graph, write_graph
from .runner import (
    RunConfig,
    resolve_c_opt,
    rows_to_csv,
    run_baseline,
    run_sqoa,
    sweep,
)
from .seeding import derive_seed


def _env_name(flag: str) -> str:
    return "SQOA_" + flag.lstrip("-").upper().replace("-", "_")


def _add(parser, flag, *, type=str, default=None, help="", action=None, choices=None):
    """add_argument with an SQOA_* environment fallback for the default."""
    env = os.environ.get(_env_name(flag))
    if action == "store_true":
        default = bool(env) if env is not None else False
        parser.add_argument(flag, action="store_true", default=default, help=help)
        return
    if env is not None:
        default = type(env)
    parser.add_argument(flag, type=type, default=default, help=help, choices=choices)


def _int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _str_list(text: str):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _load_transfer(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if "params" not in data:
        raise ValidationError(f"transfer file {path} has no 'params' field")
    return data


def _transfer_params(args) -> tuple:
    if getattr(args, "theta", None):
        values = [float(tok) for tok in args.theta.split(",")]
        if len(values) != 4:
            raise ValidationError("--theta needs four comma-separated angles")
        return tuple(values)
    if getattr(args, "params", None):
        data = _load_transfer(args.params)
        p = data["params"]
        return (p["gamma_slope"], p["gamma_int"], p["beta_slope"], p["beta_int"])
    raise ValidationError("need --params FILE or --theta 'gs,gi,bs,bi'")


def _instance_args(sub):
    _add(sub, "--instance", help="edge-list file (overrides generation flags)")
    _add(sub, "--n", type=int, help="vertex count for a generated instance")
    _add(sub, "--degree", type=int, default=3, help="regular degree (default 3)")
    _add(sub, "--instance-seed", type=int, default=0, help="generation seed")


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqoa",
        description="Sampling-based quantum optimization for MaxCut on packed relaxed Hamiltonians",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate random regular instances as edge-list files")
    _add(gen, "--n", type=int, help="vertex count")
    _add(gen, "--degree", type=int, default=3)
    _add(gen, "--count", type=int, default=1, help="number of instances")
    _add(gen, "--seed", type=int, default=0, help="master seed; instance i uses a derived seed")
    _add(gen, "--outdir", default=".", help="directory for the edge-list files")

    tune = subs.add_parser("tune", help="fit the four schedule parameters on one instance")
    _instance_args(tune)
    _add(tune, "--mixer", default="X", choices=["X", "Y", "Z"])
    _add(tune, "--p", type=int, default=6)
    _add(tune, "--budget", type=int, default=300)
    _add(tune, "--seed", type=int, default=0)
    _add(tune, "--expm-tol", type=float, default=1e-8)
    _add(tune, "--k", type=int, default=3)
    _add(tune, "--out", help="transfer JSON path (stdout if omitted)")

    solve = subs.add_parser("solve", help="non-variational solve with transferred parameters")
    _instance_args(solve)
    _add(solve, "--params", help="transfer JSON from `tune`")
    _add(solve, "--theta", help="inline parameters 'gs,gi,bs,bi' instead of --params")
    _add(solve, "--mixer", default="X", choices=["X", "Y", "Z"])
    _add(solve, "--p", type=int, default=6)
    _add(solve, "--r", type=int, default=512)
    _add(solve, "--shots", type=int, default=1_000_000)
    _add(solve, "--k", type=int, default=3)
    _add(solve, "--master-seed", type=int, default=0)
    _add(solve, "--oracle-mode", default="auto", choices=["auto", "certified", "best_found"])
    _add(solve, "--expm-tol", type=float, default=1e-10)
    _add(solve, "--eig-tol", type=float, default=1e-9)
    _add(solve, "--exact-probabilities", action="store_true",
         help="rank basis states by exact probability instead of sampling (ablation)")
    _add(solve, "--timings", action="store_true", help="record wall-clock stage timings")
    _add(solve, "--dump-dir", help="write debug dumps (state, subspace spectrum) here")
    _add(solve, "--out", help="record JSON path (stdout if omitted)")

    base = subs.add_parser("baseline", help="random-init or fine-tuned variational baseline")
    _instance_args(base)
    _add(base, "--method", default="random", choices=["random", "finetune"])
    _add(base, "--params", help="transfer JSON (required for finetune)")
    _add(base, "--theta", help="inline start parameters for finetune")
    _add(base, "--mixer", default="X", choices=["X", "Y", "Z"])
    _add(base, "--p", type=int, default=6)
    _add(base, "--budget", type=int, default=500)
    _add(base, "--k", type=int, default=3)
    _add(base, "--master-seed", type=int, default=0)
    _add(base, "--oracle-mode", default="auto", choices=["auto", "certified", "best_found"])
    _add(base, "--out", help="result JSON path (stdout if omitted)")

    exact = subs.add_parser("exact", help="classical oracles: relaxed ground energy and best cut")
    _instance_args(exact)
    _add(exact, "--k", type=int, default=3)
    _add(exact, "--oracle-mode", default="auto", choices=["auto", "certified", "best_found"])
    _add(exact, "--seed", type=int, default=0)
    _add(exact, "--eig-tol", type=float, default=1e-9)
    _add(exact, "--out", help="JSON path (stdout if omitted)")

    sw = subs.add_parser("sweep", help="grid benchmark; one CSV row per cell sample plus aggregates")
    _add(sw, "--n", type=_int_list, help="comma-separated vertex counts")
    _add(sw, "--p", type=_int_list, help="comma-separated layer counts")
    _add(sw, "--r", type=_int_list, help="comma-separated subspace sizes")
    _add(sw, "--mixer", type=_str_list, default=["X"], help="comma-separated mixers")
    _add(sw, "--instances", type=int, default=1, help="fresh instances per cell")
    _add(sw, "--degree", type=int, default=3)
    _add(sw, "--shots", type=int, default=1_000_000)
    _add(sw, "--k", type=int, default=3)
    _add(sw, "--master-seed", type=int, default=0)
    _add(sw, "--params", help="transfer JSON from `tune`")
    _add(sw, "--theta", help="inline parameters 'gs,gi,bs,bi'")
    _add(sw, "--oracle-mode", default="auto", choices=["auto", "certified", "best_found"])
    _add(sw, "--workers", type=int, default=1)
    _add(sw, "--exact-probabilities", action="store_true")
    _add(sw, "--timings", action="store_true")
    _add(sw, "--out", help="CSV path (stdout if omitted)")
    return parser


def _cmd_gen(args) -> int:
    if args.n is None:
        raise ValidationError("gen needs --n")
    os.makedirs(args.outdir, exist_ok=True)
    for i in range(args.count):
        seed = derive_seed(args.seed, "instance", args.n, i)
        g = generate_regular_graph(args.n, args.degree, seed)
        path = os.path.join(args.outdir, f"reg{args.degree}_n{args.n}_i{i}.txt")
        write_graph(path, g)
        meta = {
            "path": path, "n": g.n, "m": g.m, "degree": args.degree,
            "seed": seed, "connected": g.is_connected(),
        }
        sys.stdout.write(json.dumps(meta, sort_keys=True) + "\n")
    return 0


def _load_or_gen(args):
    if args.instance:
        return read_graph(args.instance), {"instance": args.instance}
    if args.n is None:
        raise ValidationError("need --instance or --n")
    g = generate_regular_graph(args.n, args.degree, args.instance_seed)
    return g, {"n": args.n, "degree": args.degree, "instance_seed": args.instance_seed}


def _cmd_tune(args) -> int:
    g, source = _load_or_gen(args)
    coloring = greedy_coloring(g)
    emap = encoding.build_encoding(g, coloring, args.k)
    h = encoding.build_relaxed_hamiltonian(g, emap)
    report = ansatz.tune_linxfer(
        h, args.mixer, args.p, budget=args.budget, seed=args.seed, expm_tol=args.expm_tol
    )
    lp = ansatz.LinxferParams(*report.best_params)
    payload = {
        "kind": "schedule-transfer",
        "mixer": args.mixer,
        "p": args.p,
        "k": args.k,
        "params": lp.as_dict(),
        "objective": report.best_objective,
        "evaluations": report.evaluations,
        "budget": args.budget,
        "seed": args.seed,
        "n_qubits": emap.n_qubits,
        "source": source,
        "trace": [{"params": list(x), "objective": v} for x, v in report.trace],
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_solve(args) -> int:
    cfg = RunConfig(
        instance_path=args.instance,
        n=args.n,
        degree=args.degree,
        instance_seed=args.instance_seed,
        mixer=args.mixer,
        p=args.p,
        r=args.r,
        shots=args.shots,
        k=args.k,
        master_seed=args.master_seed,
        oracle_mode=args.oracle_mode,
        params=_transfer_params(args),
        expm_tol=args.expm_tol,
        eig_tol=args.eig_tol,
        exact_probabilities=args.exact_probabilities,
        include_timings=args.timings,
        dump_dir=args.dump_dir,
    )
    record = run_sqoa(cfg)
    _emit(record.to_json(), args.out)
    return 0


def _cmd_baseline(args) -> int:
    cfg = RunConfig(
        instance_path=args.instance,
        n=args.n,
        degree=args.degree,
        instance_seed=args.instance_seed,
        mixer=args.mixer,
        p=args.p,
        k=args.k,
        master_seed=args.master_seed,
        oracle_mode=args.oracle_mode,
    )
    start = None
    if args.method == "finetune":
        start = ansatz.LinxferParams(*_transfer_params(args))
    result = run_baseline(cfg, args.method, args.budget, start)
    _emit(json.dumps(result, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_exact(args) -> int:
    g, source = _load_or_gen(args)
    coloring = greedy_coloring(g)
    emap = encoding.build_encoding(g, coloring, args.k)
    h = encoding.build_relaxed_hamiltonian(g, emap)
    e_min, _ = engine.lanczos_ground(h, seed=derive_seed(args.seed, "emin"), tol=args.eig_tol)
    cut_res = resolve_c_opt(g, args.oracle_mode, derive_seed(args.seed, "cut"))
    payload = {
        "source": source, "n": g.n, "m": g.m, "k": args.k, "n_qubits": emap.n_qubits,
        "e_min": e_min, "c_opt": cut_res.value, "certified": cut_res.certified,
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    for flag, value in (("--n", args.n), ("--p", args.p), ("--r", args.r)):
        if not value:
            raise ValidationError(f"sweep needs {flag}")
    rows = sweep(
        args.n, args.p, args.r, args.mixer,
        params=_transfer_params(args),
        instances=args.instances,
        master_seed=args.master_seed,
        degree=args.degree,
        shots=args.shots,
        k=args.k,
        oracle_mode=args.oracle_mode,
        exact_probabilities=args.exact_probabilities,
        include_timings=args.timings,
        workers=args.workers,
    )
    _emit(rows_to_csv(rows), args.out)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "tune": _cmd_tune,
    "solve": _cmd_solve,
    "baseline": _cmd_baseline,
    "exact": _cmd_exact,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SqoaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
