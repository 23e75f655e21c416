"""Trait sampling and the random-network generators driven by those traits.

Three generators: a two-stage homophilous nomination network (continuous
traits), a two-block planted partition (binary traits), and a trait-blind
Erdos-Renyi control matched on average degree.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.special import expit

from .network import SocialNetwork

__all__ = [
    "TraitAssignment",
    "sample_latent_uniform",
    "with_observed_noisy_copy",
    "pool_edge_probability",
    "nomination_weight",
    "nomination_network",
    "uniform_nomination_network",
    "planted_partition_network",
    "matched_control_network",
    "write_traits_csv",
    "read_traits_csv",
]

POOL_HOMOPHILY_SLOPE = 3.0


@dataclass(frozen=True)
class TraitAssignment:
    """Per-node latent trait vector x, optional observed trait vector z."""

    x: np.ndarray
    kind: Literal["continuous", "binary"]
    z: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.shape[0] < 1:
            raise ValueError("x must be a non-empty 1-d vector")
        if self.kind == "binary":
            if not np.all(np.isin(x, (0.0, 1.0))):
                raise ValueError("binary traits must lie in {0, 1}")
        elif self.kind == "continuous":
            if np.any(x < 0.0) or np.any(x > 1.0):
                raise ValueError("continuous traits must lie in [0, 1]")
        else:
            raise ValueError(f"unknown trait kind {self.kind!r}")
        object.__setattr__(self, "x", x)
        if self.z is not None:
            z = np.asarray(self.z, dtype=float)
            if z.shape != x.shape:
                raise ValueError("z must match x in length")
            object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.x.shape[0]


def sample_latent_uniform(n: int, rng: np.random.Generator) -> TraitAssignment:
    """n independent Uniform(0,1) latent traits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return TraitAssignment(x=rng.random(n), kind="continuous")


def with_observed_noisy_copy(
    traits: TraitAssignment, noise_sd: float, rng: np.random.Generator
) -> TraitAssignment:
    """Attach an observed trait z = x + Gaussian noise."""
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    z = traits.x + rng.normal(0.0, noise_sd, traits.n)
    return TraitAssignment(x=traits.x, kind=traits.kind, z=z)


def pool_edge_probability(x_i, x_j):
    """Chance that two nodes share a pool tie: inverse-logit of -3 |x_i - x_j|."""
    return expit(-POOL_HOMOPHILY_SLOPE * np.abs(np.asarray(x_i) - np.asarray(x_j)))


def nomination_weight(x):
    """Selection weight favoring mid-range traits: inverse-logit of -|x - 0.5|."""
    return expit(-np.abs(np.asarray(x) - 0.5))


@lru_cache(maxsize=8)
def _triu_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def _sample_pool(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    iu, ju = _triu_indices(n)
    p = pool_edge_probability(x[iu], x[ju])
    keep = rng.random(p.shape[0]) < p
    pool = np.zeros((n, n), dtype=bool)
    pool[iu[keep], ju[keep]] = True
    return pool | pool.T


def _nominate(
    log_weight_rows: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw up to ``count`` distinct nominees per row, proportional to weights.

    Uses the Gumbel top-k trick: adding Gumbel noise to log-weights and taking
    the k largest reproduces sequential weighted sampling without replacement.
    Rows with fewer finite entries than ``count`` nominate everyone available.
    """
    n = log_weight_rows.shape[0]
    scores = log_weight_rows + rng.gumbel(size=log_weight_rows.shape)
    adj = np.zeros((n, n), dtype=np.uint8)
    if count == 1:
        pick = np.argmax(scores, axis=1)
        has = np.isfinite(np.max(log_weight_rows, axis=1))
        adj[np.flatnonzero(has), pick[has]] = 1
        return adj
    order = np.argsort(-scores, axis=1)[:, :count]
    for i in range(n):
        for j in order[i]:
            if np.isfinite(log_weight_rows[i, j]):
                adj[i, j] = 1
    return adj


def nomination_network(
    traits: TraitAssignment,
    rng: np.random.Generator,
    nominations_per_node: int = 1,
    return_pool: bool = False,
):
    """Two-stage homophilous nomination network.

    Stage 1 links each unordered pair into an undirected acquaintance pool
    with probability inverse-logit(-3 |x_i - x_j|). Stage 2 has every node
    name ``nominations_per_node`` distinct pool neighbors, chosen without
    replacement with probability proportional to inverse-logit(-|x_j - 0.5|).

    Nodes whose pool is empty simply name nobody and stay in the sample;
    dropping them would select on the trait and contaminate the harness.
    """
    if traits.kind != "continuous":
        raise ValueError("nomination_network requires continuous traits")
    if nominations_per_node < 1:
        raise ValueError("nominations_per_node must be >= 1")
    x = traits.x
    pool = _sample_pool(x, rng)
    with np.errstate(divide="ignore"):
        log_w = np.where(pool, np.log(nomination_weight(x))[None, :], -np.inf)
    adj = _nominate(log_w, nominations_per_node, rng)
    net = SocialNetwork(adj)
    if return_pool:
        return net, SocialNetwork(pool.astype(np.uint8))
    return net


def uniform_nomination_network(
    n: int,
    rng: np.random.Generator,
    nominations_per_node: int = 1,
) -> SocialNetwork:
    """Trait-blind control: every node names uniformly random others.

    Matches the nomination network's out-degree (hence density) while severing
    any dependence between ties and traits.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if nominations_per_node < 1 or nominations_per_node > n - 1:
        raise ValueError("nominations_per_node out of range")
    log_w = np.zeros((n, n))
    np.fill_diagonal(log_w, -np.inf)
    return SocialNetwork(_nominate(log_w, nominations_per_node, rng))


def planted_partition_network(
    n: int,
    p_in: float,
    p_out: float,
    rng: np.random.Generator,
) -> tuple[TraitAssignment, SocialNetwork]:
    """Two equal clusters; within-cluster ties at p_in, cross ties at p_out.

    The binary trait is the cluster label, so same-trait pairs are the likelier
    ones. Returns (traits, symmetric network).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and >= 2")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise ValueError("need 0 <= p_out <= p_in <= 1")
    labels = np.zeros(n)
    labels[n // 2 :] = 1.0
    iu, ju = _triu_indices(n)
    p = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(p.shape[0]) < p
    adj = np.zeros((n, n), dtype=np.uint8)
    adj[iu[keep], ju[keep]] = 1
    adj |= adj.T
    return TraitAssignment(x=labels, kind="binary"), SocialNetwork(adj)


def matched_control_network(
    n: int,
    target_avg_degree: float,
    rng: np.random.Generator,
) -> SocialNetwork:
    """Erdos-Renyi graph whose expected mean degree matches the target.

    Ties form independently of everything, so any trait/choice association
    seen on this graph is noise.
    """
    if not (0.0 < target_avg_degree < n - 1):
        raise ValueError("target_avg_degree must be in (0, n-1)")
    p = target_avg_degree / (n - 1)
    iu, ju = _triu_indices(n)
    keep = rng.random(iu.shape[0]) < p
    adj = np.zeros((n, n), dtype=np.uint8)
    adj[iu[keep], ju[keep]] = 1
    adj |= adj.T
    return SocialNetwork(adj)


def write_traits_csv(traits: TraitAssignment, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if traits.z is None:
            writer.writerow(["node_id", "x"])
            for i, xi in enumerate(traits.x):
                writer.writerow([i, repr(float(xi))])
        else:
            writer.writerow(["node_id", "x", "z"])
            for i, (xi, zi) in enumerate(zip(traits.x, traits.z)):
                writer.writerow([i, repr(float(xi)), repr(float(zi))])


def read_traits_csv(path: str | Path, kind: Literal["continuous", "binary"] = "continuous") -> TraitAssignment:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    has_z = "z" in header
    body.sort(key=lambda r: int(r[0]))
    x = np.array([float(r[1]) for r in body])
    z = np.array([float(r[2]) for r in body]) if has_z else None
    return TraitAssignment(x=x, kind=kind, z=z)
