"""Deterministic Monte Carlo sweeps over the channel angle grid.

Each grid point parametrizes a qubit channel by alpha = sin(theta),
beta = cos(theta).  The branch outcomes and per-branch fidelities of a
point are enumerated exactly once; each trial then draws its branch from
that exact distribution with a uniform derived by hashing (seed, point,
trial).  All of a protocol's randomness lives in its measurements, so
this is distribution-identical to re-running the full evolution per
trial while staying schedule-independent and byte-reproducible.  The
full per-run sampling path is validated separately by the oracle's
sampled comparison.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidState
from .protocols import (
    SUCCESS_TOL,
    ChannelSpec,
    TargetState,
    exact_outcome_table,
    success_probability,
)

CSV_COLUMNS = (
    "theta", "alpha", "beta", "protocol", "mode", "d", "trials",
    "successes", "est_prob", "exact_prob", "mean_fidelity", "seed",
)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    alpha: float
    beta: float
    protocol: str
    mode: str
    d: int
    trials: int
    successes: int
    est_prob: float
    exact_prob: float
    mean_fidelity: float
    seed: int


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; uint64 arithmetic wraps mod 2^64 by design."""
    x = x.astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def trial_uniforms(seed: int, point_index: int, trials: int) -> np.ndarray:
    """One uniform in [0, 1) per trial, hashed from (seed, point, trial)."""
    golden = np.uint64(0x9E3779B97F4A7C15)
    seed_arr = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    point_arr = np.array([(int(point_index) + 1) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    base = _mix64(_mix64(seed_arr) + golden * point_arr)
    idx = np.arange(1, trials + 1, dtype=np.uint64)
    words = _mix64(base + golden * idx)
    return (words >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def theta_grid(theta_min: float, theta_max: float, points: int) -> np.ndarray:
    if points < 1:
        raise InvalidState("sweep grid needs at least one point")
    if theta_max < theta_min:
        raise InvalidState("theta-max must not be below theta-min")
    return np.linspace(theta_min, theta_max, points)


def sweep_rows(
    protocols: list[str],
    target: TargetState,
    grid: np.ndarray,
    trials: int,
    seed: int,
    mode: str = "repaired",
    success_tol: float = SUCCESS_TOL,
) -> list[SweepRow]:
    """One row per (protocol, grid point), sorted by (protocol, theta)."""
    if target.d != 2:
        raise InvalidState("sweeps parametrize qubit channels; the target must have d = 2")
    if trials < 1:
        raise InvalidState("sweeps need trials >= 1")
    rows = []
    for protocol in protocols:
        for k, theta in enumerate(grid):
            if protocol == "nguyen":
                channel = ChannelSpec.maximal(2)
                alpha = beta = float(1.0 / np.sqrt(2.0))
            else:
                channel = ChannelSpec.from_theta(float(theta))
                alpha, beta = float(np.sin(theta)), float(np.cos(theta))
            table = exact_outcome_table(protocol, channel, target, mode)
            probs = np.array([r.probability for r in table.rows])
            fids = np.array([r.fidelity for r in table.rows])
            cum = np.cumsum(probs)
            u = trial_uniforms(seed, k, trials) * cum[-1]
            picks = np.minimum(np.searchsorted(cum, u, side="right"), len(probs) - 1)
            ok = fids[picks] >= 1.0 - success_tol
            successes = int(ok.sum())
            rows.append(
                SweepRow(
                    theta=float(theta),
                    alpha=alpha,
                    beta=beta,
                    protocol=protocol,
                    mode=mode if protocol == "deterministic" else "-",
                    d=2,
                    trials=trials,
                    successes=successes,
                    est_prob=successes / trials,
                    exact_prob=success_probability(table, success_tol),
                    mean_fidelity=float(fids[picks].mean()),
                    seed=seed,
                )
            )
    rows.sort(key=lambda r: (r.protocol, r.theta))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_csv(rows: list[SweepRow]) -> str:
    """CSV with the fixed column schema, 12 significant digits, LF endings."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(getattr(r, col)) for col in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def write_csv(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
