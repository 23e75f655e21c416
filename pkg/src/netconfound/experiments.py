"""Monte Carlo experiment harnesses.

Four pieces: the directional-exposure (asymmetry) replication study, the
choice-diffusion study with its trait-blind control, the random-halves
influence test, and the closed-form spurious standardized coefficient.

Every harness derives one independent substream per replication from the
master seed, so aggregate output is identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import OutcomePanel, contagion_panel, latent_trend_panel, voter_init, voter_run
from .inference import (
    DesignMatrix,
    SingularDesignError,
    build_asymmetry_design,
    contrast,
    logistic_irls,
    ols,
)
from .network import SocialNetwork
from .population import (
    matched_control_network,
    nomination_network,
    planted_partition_network,
    sample_latent_uniform,
    uniform_nomination_network,
)

__all__ = [
    "AsymmetryConfig",
    "AsymmetrySummary",
    "run_asymmetry_experiment",
    "VoterConfig",
    "VoterSummary",
    "VoterCheckpointRecord",
    "run_voter_experiment",
    "HalvesConfig",
    "HalvesResult",
    "run_halves_test",
    "run_halves_experiment",
    "halves_design",
    "spurious_coefficient",
    "replication_rng",
]

Z_95 = 1.959963984540054


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible substream for one replication."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _map_indexed(fn: Callable[[int], object], count: int, workers: int) -> list:
    """fn(0..count-1), optionally across processes; result order is by index."""
    if workers <= 1 or count <= 1:
        return [fn(r) for r in range(count)]
    chunk = max(1, math.ceil(count / (workers * 4)))
    spans = [(lo, min(lo + chunk, count)) for lo in range(0, count, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_span, [(fn, lo, hi) for lo, hi in spans])
        out: list = []
        for part in parts:
            out.extend(part)
    return out


def _run_span(args) -> list:
    fn, lo, hi = args
    return [fn(r) for r in range(lo, hi)]


# ---------------------------------------------------------------------------
# Directional-exposure (asymmetry) experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymmetryConfig:
    """Settings for the directional-exposure replication study.

    network="nomination" is the homophilous two-stage generator;
    network="uniform" swaps in a trait-blind generator of matched out-degree,
    which is the null harness used to show the asymmetry comes from homophily.
    """

    seed: int
    n: int = 400
    replications: int = 5000
    noise_sd: float = 0.02
    trend: float = 0.4
    nominations_per_node: int = 1
    network: str = "nomination"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be > 0")
        if self.nominations_per_node < 1:
            raise ValueError("nominations_per_node must be >= 1")
        if self.network not in ("nomination", "uniform"):
            raise ValueError("network must be 'nomination' or 'uniform'")


@dataclass(frozen=True)
class AsymmetrySummary:
    config: AsymmetryConfig
    coefficients: np.ndarray  # rows: surviving replications; cols: 6 coefficients
    normalized_diff: np.ndarray
    excluded: int

    @property
    def frac_named_negative(self) -> float:
        return float(np.mean(self.coefficients[:, 2] < 0.0))

    @property
    def frac_diff_positive(self) -> float:
        return float(np.mean(self.normalized_diff > 0.0))

    @property
    def mean_named(self) -> float:
        return float(np.mean(self.coefficients[:, 2]))

    @property
    def mean_namer(self) -> float:
        return float(np.mean(self.coefficients[:, 3]))

    @property
    def mean_mutual_sum(self) -> float:
        return float(np.mean(self.coefficients[:, 2] + self.coefficients[:, 3]))

    def to_json_dict(self) -> dict:
        return {
            "experiment": "asymmetry",
            "config": asdict(self.config),
            "replications_used": int(self.coefficients.shape[0]),
            "excluded_replications": int(self.excluded),
            "fractions": {
                "named_exposure_t1_negative": self.frac_named_negative,
                "normalized_diff_positive": self.frac_diff_positive,
            },
            "means": {
                "named_exposure_t1": self.mean_named,
                "namer_exposure_t1": self.mean_namer,
                "mutual_sum": self.mean_mutual_sum,
            },
        }


_DIFF_CONTRAST = np.array([0.0, 0.0, 1.0, -1.0, 0.0, 0.0])


def _asymmetry_replication(cfg: AsymmetryConfig, index: int):
    rng = replication_rng(cfg.seed, index)
    traits = sample_latent_uniform(cfg.n, rng)
    if cfg.network == "nomination":
        net = nomination_network(traits, rng, cfg.nominations_per_node)
    else:
        net = uniform_nomination_network(cfg.n, rng, cfg.nominations_per_node)
    panel = latent_trend_panel(traits, rng, noise_sd=cfg.noise_sd, trend=cfg.trend)
    design, response = build_asymmetry_design(net, panel)
    try:
        fit = ols(design, response)
    except SingularDesignError:
        return None
    diff = contrast(fit, _DIFF_CONTRAST)
    return (*fit.coefficients, diff.statistic)


def run_asymmetry_experiment(cfg: AsymmetryConfig, workers: int = 1) -> AsymmetrySummary:
    """Fresh traits, network, and panel per replication; aggregate the fits.

    Records every coefficient vector plus the (named - namer) exposure
    contrast normalized by its standard error. Replications with singular
    designs are dropped and counted.
    """
    results = _map_indexed(
        _AsymmetryTask(cfg), cfg.replications, workers
    )
    rows = [r for r in results if r is not None]
    excluded = len(results) - len(rows)
    data = np.array(rows, dtype=float).reshape(len(rows), 7)
    return AsymmetrySummary(
        config=cfg,
        coefficients=data[:, :6],
        normalized_diff=data[:, 6],
        excluded=excluded,
    )


class _AsymmetryTask:
    """Picklable callable wrapping the per-replication function."""

    def __init__(self, cfg: AsymmetryConfig):
        self.cfg = cfg

    def __call__(self, index: int):
        return _asymmetry_replication(self.cfg, index)


# ---------------------------------------------------------------------------
# Choice-diffusion (voter) experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VoterConfig:
    seed: int
    n: int = 200
    replications: int = 1
    p_in: float = 0.10
    p_out: float = 0.01
    steps: int = 3000
    checkpoint_stride: int = 50
    flip_prob: float = 0.01

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be >= 1")
        if not (0.0 <= self.flip_prob < 0.5):
            raise ValueError("flip_prob must lie in [0, 0.5)")


@dataclass(frozen=True)
class VoterCheckpointRecord:
    replication: int
    arm: str
    step: int
    slope: float
    se: float
    z: float
    ci_low: float
    ci_high: float
    separated: bool


@dataclass(frozen=True)
class VoterReplicate:
    index: int
    traits_x: np.ndarray
    homophilous_net: SocialNetwork
    control_net: SocialNetwork
    homophilous_panel: OutcomePanel
    control_panel: OutcomePanel
    records: list[VoterCheckpointRecord]


@dataclass(frozen=True)
class VoterSummary:
    config: VoterConfig
    replicates: list[VoterReplicate]

    def records(self) -> list[VoterCheckpointRecord]:
        return [rec for rep in self.replicates for rec in rep.records]

    def _arm_abs_slopes(self, arm: str) -> list[float]:
        return [
            abs(rec.slope)
            for rec in self.records()
            if rec.arm == arm and rec.step > 0 and not rec.separated
        ]

    @property
    def mean_abs_slope_homophilous(self) -> float:
        vals = self._arm_abs_slopes("homophilous")
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def mean_abs_slope_control(self) -> float:
        vals = self._arm_abs_slopes("control")
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def slope_ratio(self) -> float:
        ctl = self.mean_abs_slope_control
        return self.mean_abs_slope_homophilous / ctl if ctl > 0 else float("inf")

    @property
    def frac_homophilous_significant(self) -> float:
        hits = []
        for rep in self.replicates:
            hit = any(
                abs(rec.z) >= Z_95
                for rec in rep.records
                if rec.arm == "homophilous" and rec.step > 0 and not rec.separated
            )
            hits.append(hit)
        return float(np.mean(hits))

    @property
    def frac_initial_nonsignificant(self) -> float:
        vals = []
        for rep in self.replicates:
            t0 = [r for r in rep.records if r.arm == "homophilous" and r.step == 0]
            if t0:
                vals.append(abs(t0[0].z) < Z_95)
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def separated_checkpoints(self) -> int:
        return sum(1 for rec in self.records() if rec.separated)

    def to_json_dict(self) -> dict:
        return {
            "experiment": "voter",
            "config": asdict(self.config),
            "replications": len(self.replicates),
            "mean_abs_slope_homophilous": self.mean_abs_slope_homophilous,
            "mean_abs_slope_control": self.mean_abs_slope_control,
            "slope_ratio": self.slope_ratio,
            "frac_homophilous_significant": self.frac_homophilous_significant,
            "frac_initial_nonsignificant": self.frac_initial_nonsignificant,
            "separated_checkpoints": self.separated_checkpoints,
        }


def _fit_choice_on_trait(
    traits_x: np.ndarray, choices: np.ndarray
) -> tuple[float, float, float, bool]:
    design = DesignMatrix(
        values=np.column_stack([np.ones(traits_x.shape[0]), traits_x]),
        columns=("intercept", "trait"),
    )
    fit = logistic_irls(design, choices)
    return (
        float(fit.coefficients[1]),
        float(fit.standard_errors[1]),
        float(fit.statistics[1]),
        bool(fit.separated),
    )


def _voter_replication(cfg: VoterConfig, index: int) -> VoterReplicate:
    root = np.random.SeedSequence(cfg.seed, spawn_key=(index,))
    rng_net, rng_ctl, rng_init, rng_dyn_h, rng_dyn_c = (
        np.random.default_rng(s) for s in root.spawn(5)
    )
    traits, hom_net = planted_partition_network(cfg.n, cfg.p_in, cfg.p_out, rng_net)
    mean_degree = float(hom_net.out_degree().mean())
    if mean_degree > 0:
        ctl_net = matched_control_network(cfg.n, mean_degree, rng_ctl)
    else:
        ctl_net = SocialNetwork(np.zeros((cfg.n, cfg.n), dtype=np.uint8))
    y0 = voter_init(cfg.n, rng_init)
    checkpoints = sorted(set(range(0, cfg.steps + 1, cfg.checkpoint_stride)) | {cfg.steps})
    hom_panel = voter_run(hom_net, y0, cfg.steps, cfg.flip_prob, rng_dyn_h, checkpoints)
    ctl_panel = voter_run(ctl_net, y0, cfg.steps, cfg.flip_prob, rng_dyn_c, checkpoints)

    records = []
    for arm, panel in (("homophilous", hom_panel), ("control", ctl_panel)):
        for k in range(panel.num_slices):
            slope, se, z, separated = _fit_choice_on_trait(traits.x, panel.values[k])
            records.append(
                VoterCheckpointRecord(
                    replication=index,
                    arm=arm,
                    step=int(panel.times[k]),
                    slope=slope,
                    se=se,
                    z=z,
                    ci_low=slope - Z_95 * se,
                    ci_high=slope + Z_95 * se,
                    separated=separated,
                )
            )
    return VoterReplicate(
        index=index,
        traits_x=traits.x,
        homophilous_net=hom_net,
        control_net=ctl_net,
        homophilous_panel=hom_panel,
        control_panel=ctl_panel,
        records=records,
    )


class _VoterTask:
    def __init__(self, cfg: VoterConfig):
        self.cfg = cfg

    def __call__(self, index: int) -> VoterReplicate:
        return _voter_replication(self.cfg, index)


def run_voter_experiment(cfg: VoterConfig, workers: int = 1) -> VoterSummary:
    """Paired diffusion runs: homophilous clusters vs a degree-matched blind graph.

    Both arms share the traits and the fair-coin initial choices of their
    replication; only tie formation differs. At every checkpoint the current
    choices are regressed on the trait (logistic, intercept + slope);
    separation-flagged checkpoints are recorded but left out of aggregates.
    """
    replicates = _map_indexed(_VoterTask(cfg), cfg.replications, workers)
    return VoterSummary(config=cfg, replicates=list(replicates))


# ---------------------------------------------------------------------------
# Random-halves influence test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalvesResult:
    mean_coefficient: float
    coefficient_sd: float
    p_value: float
    reject: bool
    repetitions: int
    permutations: int
    per_repetition: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def _random_partition(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fair random bipartition mask; redraws degenerate splits (< 3 per side)."""
    while True:
        mask = rng.random(n) < 0.5
        size = int(mask.sum())
        if 3 <= size <= n - 3:
            return mask


def _halves_summaries(
    panel: OutcomePanel, first_half: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step lagged other-half means and first-half mean innovations.

    Entry k pairs the second half's mean outcome at slice k with the first
    half's mean outcome change from slice k to k+1.
    """
    values = panel.values
    lagged_other = values[:-1, ~first_half].mean(axis=1)
    own = values[:, first_half].mean(axis=1)
    own_innovation = np.diff(own)
    return lagged_other, own_innovation


def _slope(s: np.ndarray, d: np.ndarray) -> float:
    sc = s - s.mean()
    denom = float(sc @ sc)
    if denom <= 0.0:
        return 0.0
    return float(sc @ (d - d.mean())) / denom


def halves_design(
    panel: OutcomePanel, first_half: np.ndarray
) -> tuple[DesignMatrix, np.ndarray]:
    """Stacked node-level design for one partition of the halves test.

    Rows are (node in first half, step); the response is the node's outcome
    change and the only predictors are an intercept and the other half's
    lagged mean. The node's previous value is controlled by differencing
    (unit coefficient) rather than by an estimated lag coefficient: an
    estimated linear lag term is misspecified whenever traits move outcomes
    nonlinearly, and its time-varying bias leaks into any regressor that is
    constant within a time slice. Nothing network-derived enters the design.
    """
    first_half = np.asarray(first_half, dtype=bool)
    if first_half.shape != (panel.n,):
        raise ValueError("partition mask must have one entry per node")
    t_count = panel.num_slices - 1
    lagged_other, _ = _halves_summaries(panel, first_half)
    own = panel.values[:, first_half]
    n1 = int(first_half.sum())
    response = np.concatenate([own[k + 1] - own[k] for k in range(t_count)])
    s_col = np.concatenate([np.full(n1, lagged_other[k]) for k in range(t_count)])
    design = DesignMatrix(
        values=np.column_stack([np.ones(response.shape[0]), s_col]),
        columns=("intercept", "other_half_lagged_mean"),
    )
    return design, response


def run_halves_test(
    panel: OutcomePanel,
    rng: np.random.Generator,
    repetitions: int = 40,
    permutations: int = 199,
) -> HalvesResult:
    """Detect cross-node influence without ever looking at the network.

    Each repetition splits the nodes into two random halves and regresses the
    first half's outcome changes on the second half's lagged mean (intercept
    included; own past controlled by differencing). The per-repetition
    coefficients are averaged into the observed statistic.

    The null distribution re-computes the aggregate after permuting the time
    alignment of the lagged summary series, with one shared permutation per
    null draw applied to every repetition. Under any process whose
    per-node outcome changes are exchangeable across time and independent
    across halves, the observed and permuted aggregates are exchangeable, so
    the test is calibrated; genuine influence breaks the time alignment and
    inflates only the observed statistic. Two-sided p-value at level 5%.
    """
    if panel.num_slices < 2:
        raise ValueError("panel needs at least 2 time slices")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")

    t_count = panel.num_slices - 1
    pairs = []
    for _ in range(repetitions):
        mask = _random_partition(panel.n, rng)
        pairs.append(_halves_summaries(panel, mask))

    observed_each = np.array([_slope(s, d) for s, d in pairs])
    observed = float(observed_each.mean())

    perms = np.array([rng.permutation(t_count) for _ in range(permutations)])
    null_stats = np.empty(permutations)
    for b in range(permutations):
        order = perms[b]
        null_stats[b] = float(
            np.mean([_slope(s[order], d) for s, d in pairs])
        )
    exceed = int(np.sum(np.abs(null_stats) >= abs(observed)))
    p_value = (1.0 + exceed) / (permutations + 1.0)
    sd = float(np.std(observed_each, ddof=1)) if repetitions > 1 else 0.0
    return HalvesResult(
        mean_coefficient=observed,
        coefficient_sd=sd,
        p_value=float(p_value),
        reject=bool(p_value <= 0.05),
        repetitions=repetitions,
        permutations=permutations,
        per_repetition=observed_each,
    )


@dataclass(frozen=True)
class HalvesConfig:
    """Panel source plus test settings for the halves-test CLI harness."""

    seed: int
    process: str = "contagion"
    n: int = 200
    strength: float = 0.0
    t_steps: int = 20
    noise_sd: float = 1.0
    avg_degree: float = 8.0
    trend: float = 0.4
    trend_noise_sd: float = 0.02
    repetitions: int = 40
    permutations: int = 199

    def __post_init__(self):
        if self.process not in ("contagion", "latent_trend"):
            raise ValueError("process must be 'contagion' or 'latent_trend'")
        if self.n < 6:
            raise ValueError("n must be >= 6")
        if self.t_steps < 1:
            raise ValueError("t_steps must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")


def run_halves_experiment(cfg: HalvesConfig) -> tuple[HalvesResult, OutcomePanel]:
    """Generate the configured panel, then run the halves test on it."""
    root = np.random.SeedSequence(cfg.seed, spawn_key=(0,))
    rng_panel, rng_test = (np.random.default_rng(s) for s in root.spawn(2))
    if cfg.process == "contagion":
        net = matched_control_network(cfg.n, cfg.avg_degree, rng_panel)
        panel = contagion_panel(net, cfg.strength, cfg.t_steps, cfg.noise_sd, rng_panel)
    else:
        traits = sample_latent_uniform(cfg.n, rng_panel)
        panel = latent_trend_panel(
            traits, rng_panel, noise_sd=cfg.trend_noise_sd, trend=cfg.trend, steps=cfg.t_steps
        )
    result = run_halves_test(
        panel, rng_test, repetitions=cfg.repetitions, permutations=cfg.permutations
    )
    return result, panel


# ---------------------------------------------------------------------------
# Spurious standardized coefficient
# ---------------------------------------------------------------------------


def spurious_coefficient(rho_jy: float, rho_xx: float, rho_xy: float) -> float:
    """Standardized sender-on-receiver slope implied by homophily alone.

    In the linear-Gaussian dyad where the sender's lagged outcome loads on the
    sender's trait (rho_jy), the two traits correlate given the tie (rho_xx),
    and the receiver's outcome loads on the receiver's trait (rho_xy), the
    regression of receiver-now on sender-before has standardized coefficient
    rho_jy * rho_xx * rho_xy with no influence at all.
    """
    for name, value in (("rho_jy", rho_jy), ("rho_xx", rho_xx), ("rho_xy", rho_xy)):
        if not (-1.0 <= value <= 1.0):
            raise ValueError(f"{name} must lie in [-1, 1], got {value}")
    return float(rho_jy * rho_xx * rho_xy)
