"""Per-step regret records, their CSV form, and cross-seed aggregation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class RegretTrace:
    """One run of one learner.

    ``x`` has shape (T, d) and ``y`` (T, m); ``y`` holds the observed (noisy)
    responses. ``states`` keeps whatever the environment revealed after each
    action (the opponent type in sequential games) and is not serialized.
    """

    t: np.ndarray
    window_id: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    R: np.ndarray
    N: np.ndarray
    beta: np.ndarray
    states: list = field(default_factory=list, compare=False)

    @property
    def T(self) -> int:
        return len(self.t)

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    def header(self) -> list[str]:
        return trace_header(self.d, self.m)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for k in range(self.T):
            row = [str(int(self.t[k])), str(int(self.window_id[k]))]
            row += [repr(float(v)) for v in self.x[k]]
            row += [repr(float(v)) for v in self.y[k]]
            row += [repr(float(self.r[k])), repr(float(self.R[k])),
                    str(int(self.N[k])), repr(float(self.beta[k]))]
            w.writerow(row)
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())


def trace_header(d: int, m: int) -> list[str]:
    return (["t", "window_id"] + [f"x_{i}" for i in range(d)] + [f"y_{i}" for i in range(m)]
            + ["r_t", "R_t", "N_t", "beta_t"])


def read_trace(path) -> RegretTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    d = sum(1 for h in header if h.startswith("x_"))
    m = sum(1 for h in header if h.startswith("y_"))
    if header != trace_header(d, m):
        raise ValueError(f"{path}: unexpected trace header {header}")
    a = np.array(body, dtype=float).reshape(len(body), len(header))
    return RegretTrace(
        t=a[:, 0].astype(int), window_id=a[:, 1].astype(int),
        x=a[:, 2:2 + d], y=a[:, 2 + d:2 + d + m],
        r=a[:, -4], R=a[:, -3], N=a[:, -2].astype(int), beta=a[:, -1],
    )


@dataclass
class AggregateResult:
    """Per-step mean and sample std of cumulative regret across seeds."""

    t: np.ndarray
    mean_R: np.ndarray
    std_R: np.ndarray
    n_runs: int
    mean_N_T: float
    std_N_T: float


AGGREGATE_HEADER = ["t", "mean_R", "std_R"]


def aggregate(traces) -> AggregateResult:
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to aggregate")
    T = traces[0].T
    if any(tr.T != T for tr in traces):
        raise ValueError("traces have different horizons")
    R = np.stack([tr.R for tr in traces])
    NT = np.array([tr.N[-1] for tr in traces], dtype=float)
    n = len(traces)
    ddof = 1 if n > 1 else 0
    # sort along the seed axis so the result does not depend on trace order
    R = np.sort(R, axis=0)
    NT = np.sort(NT)
    return AggregateResult(
        t=traces[0].t.copy(), mean_R=R.mean(axis=0), std_R=R.std(axis=0, ddof=ddof),
        n_runs=n, mean_N_T=float(NT.mean()), std_N_T=float(NT.std(ddof=ddof)),
    )


def emit_plot_data(agg: AggregateResult, path) -> Path:
    """Write ``t,mean_R,std_R`` rows, one per step, with round-trip float precision."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_HEADER)
    for k in range(len(agg.t)):
        w.writerow([str(int(agg.t[k])), repr(float(agg.mean_R[k])), repr(float(agg.std_R[k]))])
    path.write_text(buf.getvalue())
    return path


def read_plot_data(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != AGGREGATE_HEADER:
        raise ValueError(f"{path}: unexpected aggregate header {rows[0]}")
    a = np.array(rows[1:], dtype=float).reshape(-1, 3)
    return a[:, 0].astype(int), a[:, 1], a[:, 2]
