"""Seeded batch execution of learners, with persisted traces and aggregates.

Output layout under the run directory::

    traces/<algorithm>__seed<seed>.csv
    aggregates/<algorithm>.csv
    manifest.json

Files are written into a scratch directory next to the target and moved into
place only after every run succeeded.
"""

from __future__ import annotations

import json
import logging
import shutil
import tempfile
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import run_episode
from .config import ExperimentConfig
from .trace import AggregateResult, RegretTrace, aggregate, emit_plot_data, read_trace

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
TRACE_DIR = "traces"
AGGREGATE_DIR = "aggregates"


def run_seed(master_seed: int, algorithm: str, seed: int) -> np.random.SeedSequence:
    """Per-run entropy from (master seed, algorithm name, seed index).

    The name enters through CRC-32 so that it is stable across processes,
    unlike ``hash(str)``.
    """
    return np.random.SeedSequence([master_seed, zlib.crc32(algorithm.encode()), seed])


def trace_filename(algorithm: str, seed: int) -> str:
    return f"{algorithm}__seed{seed}.csv"


@dataclass
class ExperimentResult:
    out_dir: Path
    traces: dict[str, dict[int, RegretTrace]]
    aggregates: dict[str, AggregateResult]
    manifest: dict


def _run_one(config: ExperimentConfig, algo_index: int, seed: int) -> RegretTrace:
    algo = config.algorithms[algo_index]
    return run_episode(algo.learner_config(), config.build_environment(), config.T,
                       run_seed(config.master_seed, algo.name, seed),
                       config.kernel.build(), config.build_grid())


def run_experiment(config: ExperimentConfig, out_dir=None, threads: int = 1) -> ExperimentResult:
    """Run every (algorithm, seed) pair and persist traces, aggregates and a manifest.

    Any exception leaves the target directory untouched.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    warnings = config.admissibility_warnings()
    for w in warnings:
        log.warning(w)

    jobs = [(i, s) for i in range(len(config.algorithms)) for s in config.seeds]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: _run_one(config, *job), jobs))
    else:
        results = [_run_one(config, *job) for job in jobs]

    traces: dict[str, dict[int, RegretTrace]] = {a.name: {} for a in config.algorithms}
    for (i, s), tr in zip(jobs, results):
        traces[config.algorithms[i].name][s] = tr
    aggregates = {name: aggregate(per_seed.values()) for name, per_seed in traces.items()}

    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        (scratch / TRACE_DIR).mkdir()
        (scratch / AGGREGATE_DIR).mkdir()
        runs = []
        for name, per_seed in traces.items():
            for s, tr in per_seed.items():
                fname = trace_filename(name, s)
                tr.write(scratch / TRACE_DIR / fname)
                runs.append({"algorithm": name, "seed": s, "trace": f"{TRACE_DIR}/{fname}"})
            emit_plot_data(aggregates[name], scratch / AGGREGATE_DIR / f"{name}.csv")
        manifest = {
            "name": config.name,
            "config_sha256": config.sha256(),
            "config": config.model_dump(mode="json"),
            "admissibility_warnings": warnings,
            "runs": runs,
            "summary": {name: _summary(agg) for name, agg in aggregates.items()},
        }
        (scratch / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        _replace_dir(scratch, out)
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    return ExperimentResult(out, traces, aggregates, manifest)


def _summary(agg: AggregateResult) -> dict:
    return {"T": int(agg.t[-1]), "mean_R_T": float(agg.mean_R[-1]),
            "std_R_T": float(agg.std_R[-1]), "n_runs": agg.n_runs,
            "mean_N_T": agg.mean_N_T, "std_N_T": agg.std_N_T}


def _replace_dir(src: Path, dst: Path) -> None:
    if dst.exists():
        old = dst.with_name(f".{dst.name}.old")
        if old.exists():
            shutil.rmtree(old)
        dst.rename(old)
        src.rename(dst)
        shutil.rmtree(old)
    else:
        src.rename(dst)


def aggregate_directory(run_dir) -> dict[str, AggregateResult]:
    """Recompute and rewrite the per-algorithm aggregates from the persisted traces."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / MANIFEST).read_text())
    grouped: dict[str, list[RegretTrace]] = {}
    for run in manifest["runs"]:
        grouped.setdefault(run["algorithm"], []).append(read_trace(run_dir / run["trace"]))
    out = {}
    (run_dir / AGGREGATE_DIR).mkdir(exist_ok=True)
    for name, trs in grouped.items():
        out[name] = aggregate(trs)
        emit_plot_data(out[name], run_dir / AGGREGATE_DIR / f"{name}.csv")
    return out
