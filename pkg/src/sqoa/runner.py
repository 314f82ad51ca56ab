"""End-to-end pipeline driver and sweep orchestration.

The solve path is strictly non-variational: transferred schedule parameters
go straight into state preparation, sampling, subspace diagonalization, and
rounding. Every random stage draws its seed from the master seed through
:func:`sqoa.seeding.derive_seed`, so records and sweep tables reproduce
byte-for-byte.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import ansatz, decode, encoding, engine, qsci
from .errors import SqoaError, ValidationError
from .graph import MAX_CERTIFIED_N, Graph, best_cut, generate_regular_graph, greedy_coloring, read_graph
from .seeding import derive_seed

ORACLE_MODES = ("auto", "certified", "best_found")


@dataclass
class RunConfig:
    """Everything one solve needs; defaults follow the benchmark setup."""

    instance_path: str = None
    n: int = None
    degree: int = 3
    instance_seed: int = 0
    mixer: str = "X"
    p: int = 6
    r: int = 512
    shots: int = 1_000_000
    k: int = 3
    master_seed: int = 0
    oracle_mode: str = "auto"
    params: tuple = None  # schedule parameters (gamma_slope, gamma_int, beta_slope, beta_int)
    expm_tol: float = 1e-10
    eig_tol: float = 1e-9
    tie_threshold: float = 1e-9
    exact_probabilities: bool = False
    include_timings: bool = False
    balance_coloring: bool = True
    dump_dir: str = None  # debug dumps (lifted state, subspace spectrum)

    def validate(self):
        if self.instance_path is None and self.n is None:
            raise ValidationError("need an instance path or a generation size n")
        if self.r < 1 or self.shots < 1 or self.p < 1:
            raise ValidationError("r, shots and p must all be >= 1")
        if self.k not in (1, 2, 3):
            raise ValidationError(f"k must be 1, 2 or 3, got {self.k}")
        if self.oracle_mode not in ORACLE_MODES:
            raise ValidationError(f"oracle_mode must be one of {ORACLE_MODES}")
        if self.params is not None and len(self.params) != 4:
            raise ValidationError("params must hold the four schedule parameters")


@dataclass
class RunRecord:
    """Self-consistent summary of one solve; ratios recompute from the
    recorded numerators and denominators."""

    config: dict
    n: int
    m_edges: int
    connected: bool
    num_colors: int
    class_sizes: list
    n_qubits: int
    subspace_size: int
    subspace_shortfall: bool
    energy: float
    e_min: float
    alpha_r: float
    cut: int
    c_opt: int
    certified_c_opt: bool
    alpha_c: float
    spins: list
    solution_bits: str  # spin +1 encodes bit 0
    ties: list
    stages: list
    timings_ms: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


class _StageLog:
    def __init__(self, enabled):
        self.enabled = enabled
        self.stages = []
        self.timings = {}

    def run(self, name, fn):
        t0 = time.perf_counter()
        out = fn()
        elapsed = (time.perf_counter() - t0) * 1000.0
        self.stages.append(name)
        self.timings[name] = round(elapsed, 3) if self.enabled else 0.0
        return out


def load_instance(cfg: RunConfig) -> Graph:
    if cfg.instance_path is not None:
        return read_graph(cfg.instance_path)
    return generate_regular_graph(cfg.n, cfg.degree, cfg.instance_seed)


def resolve_c_opt(g: Graph, mode: str, seed: int):
    """Exact enumeration when feasible, annealing best-found otherwise."""
    if mode == "auto":
        mode = "certified" if g.n <= MAX_CERTIFIED_N else "best_found"
    return best_cut(g, mode, seed=seed)


def run_sqoa(cfg: RunConfig) -> RunRecord:
    """Execute the full sampling-based solve and collect metrics.

    No objective evaluations or parameter updates happen anywhere in this
    path; the recorded stage list is the evidence.
    """
    cfg.validate()
    if cfg.params is None:
        raise ValidationError("solve needs transferred schedule parameters")
    log = _StageLog(cfg.include_timings)
    master = cfg.master_seed

    g = log.run("instance", lambda: load_instance(cfg))
    coloring = log.run("coloring", lambda: greedy_coloring(g, balance=cfg.balance_coloring))
    emap = log.run("encoding", lambda: encoding.build_encoding(g, coloring, cfg.k))
    h = log.run("hamiltonian", lambda: encoding.build_relaxed_hamiltonian(g, emap))

    lp = ansatz.LinxferParams(*cfg.params)
    sched = log.run("schedule", lambda: ansatz.expand_schedule(lp, cfg.p))
    state = log.run(
        "prepare_state", lambda: ansatz.prepare_state(h, cfg.mixer, sched, tol=cfg.expm_tol)
    )

    if cfg.exact_probabilities:
        subspace = log.run("subspace", lambda: qsci.select_top_amplitudes(state, cfg.r))
    else:
        samples = log.run(
            "sampling",
            lambda: engine.sample_counts(state, cfg.shots, derive_seed(master, "sample")),
        )
        subspace = log.run("subspace", lambda: qsci.select_subspace(samples, cfg.r))

    h_eff = log.run("effective_hamiltonian", lambda: qsci.build_effective_hamiltonian(h, subspace))
    prior = np.array([state.amplitudes[engine.from_bitstring(b)] for b in subspace.basis])
    result = log.run(
        "subspace_ground",
        lambda: qsci.qsci_ground(h_eff, seed=derive_seed(master, "eig"), tol=cfg.eig_tol, prior=prior),
    )
    lifted = log.run("lift", lambda: qsci.lift_to_statevector(result, emap.n_qubits))
    rounded = log.run(
        "pauli_rounding", lambda: decode.pauli_round(lifted, emap, g, cfg.tie_threshold)
    )

    e_min, _ = log.run(
        "oracle_e_min",
        lambda: engine.lanczos_ground(h, seed=derive_seed(master, "emin"), tol=cfg.eig_tol),
    )
    cut_res = log.run(
        "oracle_c_opt", lambda: resolve_c_opt(g, cfg.oracle_mode, derive_seed(master, "cut"))
    )
    metrics = log.run(
        "metrics",
        lambda: decode.compute_metrics(
            g, h, result, emap, e_min, cut_res.value, cut_res.certified, rounded=rounded
        ),
    )

    if cfg.dump_dir is not None:
        _write_debug_dumps(cfg.dump_dir, lifted, subspace, h_eff, result)

    return RunRecord(
        config=_config_echo(cfg),
        n=g.n,
        m_edges=g.m,
        connected=g.is_connected(),
        num_colors=coloring.num_colors,
        class_sizes=coloring.class_sizes(),
        n_qubits=emap.n_qubits,
        subspace_size=subspace.r,
        subspace_shortfall=subspace.shortfall,
        energy=metrics.energy,
        e_min=metrics.e_min,
        alpha_r=metrics.alpha_r,
        cut=metrics.cut,
        c_opt=metrics.c_opt,
        certified_c_opt=metrics.certified_c_opt,
        alpha_c=metrics.alpha_c,
        spins=list(rounded.spins),
        solution_bits="".join("0" if s > 0 else "1" for s in rounded.spins),
        ties=list(rounded.ties),
        stages=list(log.stages),
        timings_ms=dict(log.timings),
    )


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    if echo["params"] is not None:
        echo["params"] = list(echo["params"])
    return echo


def _write_debug_dumps(dump_dir, lifted, subspace, h_eff, result):
    import os

    os.makedirs(dump_dir, exist_ok=True)
    with open(os.path.join(dump_dir, "state.json"), "w") as fh:
        json.dump(engine.statevector_to_json(lifted), fh, sort_keys=True)
    spectrum = np.linalg.eigvalsh(h_eff.matrix.toarray()) if h_eff.dim <= 1024 else None
    payload = {
        "basis": list(subspace.basis),
        "requested": subspace.requested,
        "shortfall": subspace.shortfall,
        "ground_energy": result.energy,
        "spectrum": None if spectrum is None else [float(x) for x in spectrum],
    }
    with open(os.path.join(dump_dir, "subspace.json"), "w") as fh:
        json.dump(payload, fh, sort_keys=True)


# ---------------------------------------------------------------------------
# baseline runs (variational, for comparison tables)
# ---------------------------------------------------------------------------

def run_baseline(
    cfg: RunConfig,
    method: str,
    budget: int,
    start: ansatz.LinxferParams = None,
) -> dict:
    """Random-initialization or fine-tuning run: optimize, then measure the
    final prepared state with the same oracles the solve path uses."""
    cfg.validate()
    if method not in ("random", "finetune"):
        raise ValidationError(f"baseline method must be 'random' or 'finetune', got {method!r}")
    g = load_instance(cfg)
    coloring = greedy_coloring(g, balance=cfg.balance_coloring)
    emap = encoding.build_encoding(g, coloring, cfg.k)
    h = encoding.build_relaxed_hamiltonian(g, emap)
    opt_seed = derive_seed(cfg.master_seed, "optimizer")
    if method == "random":
        report = ansatz.optimize_random_init(h, cfg.mixer, cfg.p, budget, opt_seed)
    else:
        if start is None:
            raise ValidationError("fine-tuning needs transferred start parameters")
        report = ansatz.fine_tune(h, cfg.mixer, cfg.p, start, budget, opt_seed)
    sched = ansatz.schedule_from_flat(report.best_params, cfg.p)
    state = ansatz.prepare_state(h, cfg.mixer, sched, tol=cfg.expm_tol)
    e_min, _ = engine.lanczos_ground(h, seed=derive_seed(cfg.master_seed, "emin"), tol=cfg.eig_tol)
    cut_res = resolve_c_opt(g, cfg.oracle_mode, derive_seed(cfg.master_seed, "cut"))
    rounded = decode.pauli_round(state, emap, g, cfg.tie_threshold)
    metrics = decode.compute_metrics(
        g, h, state, emap, e_min, cut_res.value, cut_res.certified, rounded=rounded
    )
    return {
        "method": method,
        "budget": budget,
        "evaluations": report.evaluations,
        "objective": report.best_objective,
        "schedule": list(report.best_params),
        "n": g.n,
        "n_qubits": emap.n_qubits,
        "energy": metrics.energy,
        "e_min": metrics.e_min,
        "alpha_r": metrics.alpha_r,
        "cut": metrics.cut,
        "c_opt": metrics.c_opt,
        "certified_c_opt": metrics.certified_c_opt,
        "alpha_c": metrics.alpha_c,
        "spins": list(rounded.spins),
        "solution_bits": "".join("0" if s > 0 else "1" for s in rounded.spins),
        "ties": list(rounded.ties),
    }


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "n", "seed", "mixer", "p", "r", "n_qubits", "energy", "e_min", "alpha_r",
    "cut", "c_opt", "certified", "alpha_c", "ties", "time_ms", "error",
)


def _blank_row(n, seed, mixer, p, r, error=""):
    row = {col: "" for col in SWEEP_COLUMNS}
    row.update({"n": n, "seed": seed, "mixer": mixer, "p": p, "r": r, "error": error})
    return row


def _sweep_instance(task):
    """All cells for one generated instance; a single worker unit."""
    (n, idx, ps, rs, mixers, params, base) = task
    master = base["master_seed"]
    gen_seed = derive_seed(master, "instance", n, idx)
    rows = []
    try:
        g = generate_regular_graph(n, base["degree"], gen_seed)
        coloring = greedy_coloring(g)
        emap = encoding.build_encoding(g, coloring, base["k"])
        h = encoding.build_relaxed_hamiltonian(g, emap)
        e_min, _ = engine.lanczos_ground(
            h, seed=derive_seed(master, "emin", n, idx), tol=base["eig_tol"]
        )
        cut_res = resolve_c_opt(
            g, base["oracle_mode"], derive_seed(master, "cut", n, idx)
        )
    except SqoaError as exc:
        return [
            _blank_row(n, gen_seed, mixer, p, r, error=str(exc))
            for mixer in mixers for p in ps for r in rs
        ]
    lp = ansatz.LinxferParams(*params)
    for mixer in mixers:
        for p in ps:
            t0 = time.perf_counter()
            try:
                state = ansatz.prepare_state(
                    h, mixer, ansatz.expand_schedule(lp, p), tol=base["expm_tol"]
                )
                if base["exact_probabilities"]:
                    samples = None
                else:
                    samples = engine.sample_counts(
                        state, base["shots"], derive_seed(master, "sample", n, idx, mixer, p)
                    )
            except SqoaError as exc:
                rows.extend(
                    _blank_row(n, gen_seed, mixer, p, r, error=str(exc)) for r in rs
                )
                continue
            shared_ms = (time.perf_counter() - t0) * 1000.0 / max(len(rs), 1)
            for r in rs:
                t_cell = time.perf_counter()
                try:
                    if samples is None:
                        subspace = qsci.select_top_amplitudes(state, r)
                    else:
                        subspace = qsci.select_subspace(samples, r)
                    h_eff = qsci.build_effective_hamiltonian(h, subspace)
                    prior = np.array(
                        [state.amplitudes[engine.from_bitstring(b)] for b in subspace.basis]
                    )
                    result = qsci.qsci_ground(
                        h_eff,
                        seed=derive_seed(master, "eig", n, idx, mixer, p, r),
                        tol=base["eig_tol"],
                        prior=prior,
                    )
                    lifted = qsci.lift_to_statevector(result, emap.n_qubits)
                    rounded = decode.pauli_round(lifted, emap, g, base["tie_threshold"])
                    metrics = decode.compute_metrics(
                        g, h, result, emap, e_min, cut_res.value, cut_res.certified,
                        rounded=rounded,
                    )
                except SqoaError as exc:
                    rows.append(_blank_row(n, gen_seed, mixer, p, r, error=str(exc)))
                    continue
                elapsed = shared_ms + (time.perf_counter() - t_cell) * 1000.0
                rows.append({
                    "n": n,
                    "seed": gen_seed,
                    "mixer": mixer,
                    "p": p,
                    "r": r,
                    "n_qubits": emap.n_qubits,
                    "energy": metrics.energy,
                    "e_min": metrics.e_min,
                    "alpha_r": metrics.alpha_r,
                    "cut": metrics.cut,
                    "c_opt": metrics.c_opt,
                    "certified": cut_res.certified,
                    "alpha_c": metrics.alpha_c,
                    "ties": len(rounded.ties),
                    "time_ms": round(elapsed, 3) if base["include_timings"] else 0.0,
                    "error": "",
                })
    return rows


_AGG_FIELDS = ("n_qubits", "energy", "e_min", "alpha_r", "cut", "c_opt",
               "certified", "alpha_c", "ties", "time_ms")


def _aggregate(rows):
    """Per-cell mean and standard-error rows over the clean data rows."""
    groups = {}
    for row in rows:
        if row["error"]:
            continue
        groups.setdefault((row["n"], row["mixer"], row["p"], row["r"]), []).append(row)
    agg = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        block = groups[key]
        for kind in ("mean", "sem"):
            out = _blank_row(key[0], kind, key[1], key[2], key[3])
            for col in _AGG_FIELDS:
                vals = np.array([float(r[col]) for r in block])
                if kind == "mean":
                    out[col] = float(np.mean(vals))
                else:
                    out[col] = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
            agg.append(out)
    return agg


def sweep(
    ns,
    ps,
    rs,
    mixers,
    params,
    instances: int = 1,
    master_seed: int = 0,
    degree: int = 3,
    shots: int = 1_000_000,
    k: int = 3,
    oracle_mode: str = "auto",
    expm_tol: float = 1e-10,
    eig_tol: float = 1e-9,
    tie_threshold: float = 1e-9,
    exact_probabilities: bool = False,
    include_timings: bool = False,
    workers: int = 1,
):
    """Grid evaluation of the solve pipeline; returns data rows + aggregates.

    Expensive per-instance work (generation, oracles, state preparation,
    sampling) is shared across the r axis, and sampling seeds do not depend
    on r, so subspaces are nested along it. Output order is independent of
    worker scheduling.
    """
    base = {
        "master_seed": master_seed, "degree": degree, "shots": shots, "k": k,
        "oracle_mode": oracle_mode, "expm_tol": expm_tol, "eig_tol": eig_tol,
        "tie_threshold": tie_threshold, "exact_probabilities": exact_probabilities,
        "include_timings": include_timings,
    }
    tasks = [
        (n, idx, tuple(ps), tuple(rs), tuple(mixers), tuple(params), base)
        for n in ns for idx in range(instances)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_sweep_instance, tasks))
    else:
        blocks = [_sweep_instance(task) for task in tasks]
    rows = [row for block in blocks for row in block]
    rows.sort(key=lambda r: (r["n"], r["mixer"], r["p"], r["r"], str(r["seed"])))
    return rows + _aggregate(rows)


def rows_to_csv(rows) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[col]) for col in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
