"""Outcome processes over a fixed network.

Three processes: a trait-driven trend panel with no inter-node influence,
a noisy-copying (voter) chain where choices diffuse along ties, and a
genuinely contagious random-walk panel used as a positive control.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .network import SocialNetwork

__all__ = [
    "OutcomePanel",
    "latent_trend_panel",
    "voter_init",
    "voter_run",
    "contagion_panel",
    "write_panel_csv",
    "read_panel_csv",
]


@dataclass(frozen=True)
class OutcomePanel:
    """Time-major outcome table: values[t, i] is node i's outcome at slice t.

    ``times`` records what step each slice corresponds to (equal to the slice
    index except for checkpointed chains).
    """

    values: np.ndarray
    kind: Literal["continuous", "binary"]
    times: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("panel must be a 2-d (slices x nodes) array")
        if self.kind == "binary" and not np.all(np.isin(values, (0.0, 1.0))):
            raise ValueError("binary panel entries must be 0 or 1")
        if self.kind not in ("continuous", "binary"):
            raise ValueError(f"unknown panel kind {self.kind!r}")
        object.__setattr__(self, "values", values)
        times = self.times
        if times is None:
            times = np.arange(values.shape[0])
        times = np.asarray(times, dtype=np.int64)
        if times.shape != (values.shape[0],):
            raise ValueError("times must have one entry per slice")
        object.__setattr__(self, "times", times)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def num_slices(self) -> int:
        return self.values.shape[0]


def latent_trend_panel(
    traits,
    rng: np.random.Generator,
    noise_sd: float = 0.02,
    trend: float = 0.4,
    steps: int = 2,
) -> OutcomePanel:
    """Trait-driven panel with zero social influence.

    Slice 0 is the cubic baseline (x - 0.5)^3 plus noise; each later slice adds
    trend * x plus fresh noise, so nodes with larger traits drift faster. The
    default two steps give the three-slice panel the asymmetry regression
    consumes; larger ``steps`` just repeat the same increment rule.
    """
    if noise_sd <= 0:
        raise ValueError("noise_sd must be > 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = traits.x
    n = x.shape[0]
    values = np.empty((steps + 1, n))
    values[0] = (x - 0.5) ** 3 + rng.normal(0.0, noise_sd, n)
    for t in range(1, steps + 1):
        values[t] = values[t - 1] + trend * x + rng.normal(0.0, noise_sd, n)
    return OutcomePanel(values=values, kind="continuous")


def voter_init(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fair-coin initial choices, independent of anything else."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (rng.random(n) < 0.5).astype(np.uint8)


def voter_run(
    net: SocialNetwork,
    y0: np.ndarray,
    steps: int,
    flip_prob: float,
    rng: np.random.Generator,
    checkpoints: Sequence[int] | None = None,
) -> OutcomePanel:
    """Noisy copying chain on a symmetric network.

    Each step picks one node uniformly at random; if it has any neighbor it
    picks one uniformly and copies that neighbor's choice, except that with
    probability ``flip_prob`` it adopts the opposite. All other nodes keep
    their choices, and isolated nodes never change. The returned panel holds
    the configuration at each requested checkpoint step (default: step 0 and
    the final step).

    Randomness is pre-drawn per step in a fixed order (updater, neighbor
    slot, flip coin), so a run is reproducible bit for bit from the seed.
    """
    if not net.is_symmetric():
        raise ValueError("voter dynamics require a symmetric network")
    y0 = np.asarray(y0)
    if y0.size == 0:
        raise ValueError("y0 must be non-empty")
    if y0.shape != (net.n,):
        raise ValueError(f"y0 has shape {y0.shape}, expected ({net.n},)")
    if not np.all(np.isin(y0, (0, 1))):
        raise ValueError("y0 must be binary")
    if not (0.0 <= flip_prob < 0.5):
        raise ValueError("flip_prob must lie in [0, 0.5)")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if checkpoints is None:
        checkpoints = [0, steps] if steps > 0 else [0]
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if checkpoints and (checkpoints[0] < 0 or checkpoints[-1] > steps):
        raise ValueError("checkpoints must lie within [0, steps]")

    updaters = rng.integers(0, net.n, size=steps)
    neighbor_u = rng.random(steps)
    flip_u = rng.random(steps)

    neighbors = [net.out_neighbors(i) for i in range(net.n)]
    state = y0.astype(np.uint8).copy()
    recorded = []
    times = []
    pending = list(checkpoints)
    if pending and pending[0] == 0:
        recorded.append(state.copy())
        times.append(0)
        pending.pop(0)
    for t in range(steps):
        i = updaters[t]
        nbrs = neighbors[i]
        if nbrs.shape[0] > 0:
            j = nbrs[int(neighbor_u[t] * nbrs.shape[0])]
            copied = state[j]
            if flip_u[t] < flip_prob:
                copied = 1 - copied
            state[i] = copied
        if pending and t + 1 == pending[0]:
            recorded.append(state.copy())
            times.append(t + 1)
            pending.pop(0)
    return OutcomePanel(
        values=np.array(recorded, dtype=float),
        kind="binary",
        times=np.array(times),
    )


def contagion_panel(
    net: SocialNetwork,
    strength: float,
    t_steps: int,
    noise_sd: float,
    rng: np.random.Generator,
) -> OutcomePanel:
    """Random-walk panel with genuine neighbor influence (positive control).

    Slice 0 is standard normal. Each node's increment is strength times the
    mean lagged outcome of its out-neighbors plus fresh noise; nodes with no
    out-neighbors get no influence term. strength=0 gives independent random
    walks. Mean (not sum) coupling keeps the influence scale degree-free.
    """
    if t_steps < 1:
        raise ValueError("t_steps must be >= 1")
    if noise_sd <= 0:
        raise ValueError("noise_sd must be > 0")
    n = net.n
    adj = net.adjacency.astype(float)
    outdeg = adj.sum(axis=1)
    norm = np.where(outdeg > 0, outdeg, 1.0)
    row_mean = adj / norm[:, None]  # zero rows stay zero
    values = np.empty((t_steps + 1, n))
    values[0] = rng.normal(0.0, 1.0, n)
    for t in range(1, t_steps + 1):
        drift = strength * (row_mean @ values[t - 1])
        values[t] = values[t - 1] + drift + rng.normal(0.0, noise_sd, n)
    return OutcomePanel(values=values, kind="continuous")


def write_panel_csv(panel: OutcomePanel, path: str | Path) -> None:
    """Long format: one (t, node_id, y) row per observation."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node_id", "y"])
        for t_idx in range(panel.num_slices):
            t = int(panel.times[t_idx])
            for i in range(panel.n):
                writer.writerow([t, i, repr(float(panel.values[t_idx, i]))])


def read_panel_csv(path: str | Path, kind: Literal["continuous", "binary"] = "continuous") -> OutcomePanel:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    times = sorted(set(int(r[0]) for r in rows))
    t_pos = {t: k for k, t in enumerate(times)}
    n = max(int(r[1]) for r in rows) + 1
    values = np.full((len(times), n), np.nan)
    for r in rows:
        values[t_pos[int(r[0])], int(r[1])] = float(r[2])
    if np.any(np.isnan(values)):
        raise ValueError("panel file has missing (t, node) cells")
    return OutcomePanel(values=values, kind=kind, times=np.array(times))
