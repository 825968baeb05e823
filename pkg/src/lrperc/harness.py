"""Experiment orchestration: config resolution, parallel replica scheduling,
statistics, and CSV emission.

Outputs are a pure function of (config, seed): replicas draw from streams
derived only from their replica index, results merge commutatively, and
rows are emitted in a canonical order, so the worker count never changes a
byte of output.  Wall-clock timing is therefore reported as 0 unless the
`timing` switch is set, in which case byte-stability across runs is
forfeited by construction.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import contact, oriented, renorm, starlat
from .bondfield import BondField
from .sequences import parse_sequence, truncate
from .stats import EstimateWithCI, wilson_interval

__all__ = [
    "ExperimentConfig", "EstimateWithCI", "wilson_interval",
    "parse_config_file", "run_experiment", "emit_csv", "format_csv",
]


# -- replica scheduling --------------------------------------------------------

def _surv_g(args, seed, r):
    (params,) = args
    return 1 if oriented.explore(BondField(seed).derive_replica(r), params).survived else 0


def _surv_contact(args, seed, r):
    rates, k, box, horizon, d = args
    tl = contact.sample_timeline(seed, rates, box, horizon, d, replica=r)
    return 1 if contact.infected_at_horizon(tl, k) else 0


def _surv_star(args, seed, r):
    block, params, horizon, window = args
    fld = BondField(seed).derive_replica(r)
    return 1 if starlat.block_path_survival(fld, block, params, horizon, window) else 0


def _hprob(args, seed, r):
    params, window = args
    return 1 if starlat.h_connected(BondField(seed).derive_replica(r), 0, 0, params, window) else 0


def _siteperc(args, seed, r):
    gamma, horizon = args
    return 1 if renorm.site_perc_cone(gamma, horizon, BondField(seed).derive_replica(r)).survived else 0


def _domination(args, seed, r):
    params, max_steps = args
    state = renorm.explore_red_cluster(BondField(seed).derive_replica(r), params, max_steps)
    reds = sum(red for _, red, _ in state.examined)
    return (len(state.examined), reds)


_REPLICA_FNS = {
    "surv_g": _surv_g,
    "surv_contact": _surv_contact,
    "surv_star": _surv_star,
    "hprob": _hprob,
    "siteperc": _siteperc,
    "domination": _domination,
}


def _chunk_worker(task):
    name, args, seed, lo, hi = task
    fn = _REPLICA_FNS[name]
    return [fn(args, seed, r) for r in range(lo, hi)]


def run_replicas(name: str, args, seed: int, reps: int, threads: int = 1) -> list:
    """Per-replica records in replica order; workers are stateless, so the
    schedule cannot influence the result."""
    if reps < 1:
        raise ValueError("replica count must be >= 1")
    if threads <= 1:
        return _chunk_worker((name, args, seed, 0, reps))
    chunk = max(1, (reps + 4 * threads - 1) // (4 * threads))
    tasks = [(name, args, seed, lo, min(lo + chunk, reps))
             for lo in range(0, reps, chunk)]
    out = []
    with ProcessPoolExecutor(max_workers=threads) as ex:
        for part in ex.map(_chunk_worker, tasks):
            out.extend(part)
    return out


# -- configuration ---------------------------------------------------------------

def parse_config_file(path: str) -> dict:
    """Flat `key = value` text with `#` comments."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    reps: int = 100
    threads: int = 1
    out: str | None = None
    z: float = 1.96
    timing: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in _RUNNERS:
            raise ValueError(f"unknown experiment: {self.command!r}")
        if self.command != "gamma" and self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved(self) -> dict:
        d = {"command": self.command, "seed": self.seed, "reps": self.reps,
             "z": self.z}
        d.update(sorted(self.params.items()))
        return d

    def hash(self) -> str:
        blob = "\n".join(f"{k}={v}" for k, v in sorted(self.resolved().items()))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _int_list(text) -> list[int]:
    return [int(t) for t in str(text).split(",")]


def _float_list(text) -> list[float]:
    return [float(t) for t in str(text).split(",")]


def _need(cfg: ExperimentConfig, key: str) -> str:
    if key not in cfg.params or cfg.params[key] in (None, ""):
        raise ValueError(f"{cfg.command}: missing required parameter {key!r}")
    return cfg.params[key]


# -- runners ----------------------------------------------------------------------

def _row(cfg, model, k, horizon, window, extra, est: EstimateWithCI | None,
         value=None):
    e = dict(extra)
    e["config"] = cfg.hash()
    return {
        "experiment": cfg.command, "model": model, "k": k,
        "seed": cfg.seed, "reps": cfg.reps, "horizon": horizon, "window": window,
        "extra_params": ";".join(f"{a}={b}" for a, b in sorted(e.items())),
        "estimate": est.estimate if est else value,
        "ci_lo": est.lo if est else value,
        "ci_hi": est.hi if est else value,
    }


def _run_gamma(cfg: ExperimentConfig):
    pseq = parse_sequence(_need(cfg, "pseq"))
    qseq = parse_sequence(_need(cfg, "qseq"))
    beta = int(_need(cfg, "beta"))
    kmax = int(_need(cfg, "kmax"))
    rows = []
    for k in range(1, kmax + 1):
        params = renorm.BifurcationParams(k, beta, truncate(pseq, k), truncate(qseq, k))
        rows.append(_row(cfg, "renorm", k, "", "", {"beta": beta},
                         None, value=renorm.gamma_k(params)))
    return rows


def _run_survival(cfg: ExperimentConfig):
    d = int(cfg.params.get("dim", 2))
    pseq = parse_sequence(_need(cfg, "pseq"))
    qseq = parse_sequence(cfg.params.get("qseq") or _need(cfg, "pseq"))
    horizon = int(_need(cfg, "horizon"))
    window = int(_need(cfg, "window"))
    rows = []
    for k in _int_list(_need(cfg, "k")):
        params = oriented.ExplorationParams(d, k, horizon, window,
                                            truncate(pseq, k), truncate(qseq, k))
        recs = run_replicas("surv_g", (params,), cfg.seed, cfg.reps, cfg.threads)
        est = EstimateWithCI.from_counts(sum(recs), cfg.reps, cfg.z)
        rows.append(_row(cfg, "g", k, horizon, window, {"dim": d}, est))
    return rows


def _run_redcluster(cfg: ExperimentConfig):
    pseq = parse_sequence(_need(cfg, "pseq"))
    qseq = parse_sequence(_need(cfg, "qseq"))
    beta = int(_need(cfg, "beta"))
    steps = int(cfg.params.get("steps", 100_000))
    rows = []
    for k in _int_list(_need(cfg, "k")):
        params = renorm.BifurcationParams(k, beta, truncate(pseq, k), truncate(qseq, k))
        recs = run_replicas("domination", (params, steps), cfg.seed, cfg.reps, cfg.threads)
        trials = sum(t for t, _ in recs)
        reds = sum(s for _, s in recs)
        est = EstimateWithCI.from_counts(reds, trials, cfg.z)
        g = renorm.gamma_k(params)
        extra = {"beta": beta, "steps": steps, "gamma_k": f"{g:.6g}",
                 "pooled_trials": trials, "violation": int(est.hi < g)}
        rows.append(_row(cfg, "renorm", k, "", "", extra, est))
    return rows


def _run_siteperc(cfg: ExperimentConfig):
    horizons = _int_list(_need(cfg, "horizon"))
    gammas = _float_list(_need(cfg, "gamma"))
    # one vectorized pass, coupled across gammas and horizons
    counts = renorm.cone_survival_scan(gammas, horizons, cfg.reps, cfg.seed)
    rows = []
    for gi, gamma in enumerate(gammas):
        for hi, horizon in enumerate(sorted(horizons)):
            est = EstimateWithCI.from_counts(int(counts[gi, hi]), cfg.reps, cfg.z)
            rows.append(_row(cfg, "siteperc", "", horizon, "", {"gamma": gamma}, est))
    return rows


def _run_contact(cfg: ExperimentConfig):
    d = int(cfg.params.get("dim", 2))
    rates = parse_sequence(_need(cfg, "rates"))
    horizon = float(_need(cfg, "horizon"))
    window = int(_need(cfg, "window"))
    rows = []
    for k in _int_list(_need(cfg, "k")):
        args = (truncate(rates, k), k, window, horizon, d)
        recs = run_replicas("surv_contact", args, cfg.seed, cfg.reps, cfg.threads)
        est = EstimateWithCI.from_counts(sum(recs), cfg.reps, cfg.z)
        rows.append(_row(cfg, "contact", k, horizon, window, {"dim": d}, est))
    return rows


def _run_star(cfg: ExperimentConfig):
    eps = float(_need(cfg, "eps"))
    pseq = parse_sequence(_need(cfg, "pseq"))
    delta = float(_need(cfg, "delta"))
    horizon = int(_need(cfg, "horizon"))
    window = int(_need(cfg, "window"))
    N = starlat.choose_N(eps, delta)
    block = starlat.BlockParams(N, delta)
    rows = []
    for k in _int_list(_need(cfg, "k")):
        params = starlat.StarParams(eps, truncate(pseq, k))
        recs = run_replicas("surv_star", (block, params, horizon, window),
                            cfg.seed, cfg.reps, cfg.threads)
        est = EstimateWithCI.from_counts(sum(recs), cfg.reps, cfg.z)
        rows.append(_row(cfg, "gstar", k, horizon, window,
                         {"eps": eps, "delta": delta, "N": N}, est))
    return rows


def _run_hprob(cfg: ExperimentConfig):
    pseq = parse_sequence(_need(cfg, "pseq"))
    window = int(_need(cfg, "window"))
    rows = []
    for k in _int_list(_need(cfg, "k")):
        params = starlat.StarParams(float(cfg.params.get("eps", 0.5)), truncate(pseq, k))
        recs = run_replicas("hprob", (params, window), cfg.seed, cfg.reps, cfg.threads)
        est = EstimateWithCI.from_counts(sum(recs), cfg.reps, cfg.z)
        rows.append(_row(cfg, "gstar", k, "", window, {}, est))
    return rows


_RUNNERS = {
    "gamma": _run_gamma,
    "survival": _run_survival,
    "redcluster": _run_redcluster,
    "siteperc": _run_siteperc,
    "contact": _run_contact,
    "star": _run_star,
    "hprob": _run_hprob,
}


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Dispatch to the owning module and return the result table (row dicts)."""
    t0 = time.perf_counter()
    rows = _RUNNERS[cfg.command](cfg)
    wall = time.perf_counter() - t0 if cfg.timing else 0.0
    for row in rows:
        row["wall_seconds"] = wall
    return rows


# -- CSV ----------------------------------------------------------------------------

_COLUMNS = ["experiment", "model", "k", "seed", "reps", "horizon", "window",
            "extra_params", "estimate", "ci_lo", "ci_hi", "wall_seconds"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return "" if v is None else str(v)


def format_csv(rows) -> str:
    lines = [",".join(_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in _COLUMNS))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(format_csv(rows))
    except OSError as exc:
        raise RuntimeError(f"cannot write output file {path}: {exc}") from exc
