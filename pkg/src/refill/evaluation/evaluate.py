from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np

from refill.elimination.cost import fill_in_cost
from refill.elimination.state import Ordering
from refill.environment.features import AdjacencyMode
from refill.environment.fill_env import EnvConfig, FillInEnv
from refill.errors import ConfigurationError, ContractViolationError
from refill.evaluation.report import ComparisonReport, ReportRow
from refill.graph_io.generators import make_rng
from refill.heuristics.greedy import best_of_restarts, mdh_order, mfillh_order
from refill.logging import get_logger
from refill.policy.gcn import PolicyParams, forward, sample_action

if TYPE_CHECKING:
    from refill.elimination.graph import Graph

logger = get_logger("refill.evaluation")


@dataclass(frozen=True)
class EvalConfig:
    """How policy orderings and baselines are produced for a report."""

    samples: int = 25
    greedy: bool = True
    restarts: int = 64
    seed: int = 0
    workers: int = 1
    masking_enabled: bool = True
    adjacency_mode: AdjacencyMode = "current"

    def __post_init__(self) -> None:
        if self.samples < 0 or self.restarts < 0:
            msg = "samples and restarts must be nonnegative"
            raise ConfigurationError(msg)
        if self.samples == 0 and not self.greedy:
            msg = "Need at least one sampled or greedy rollout"
            raise ConfigurationError(msg)
        if self.workers < 1:
            msg = f"workers must be >= 1, got {self.workers}"
            raise ConfigurationError(msg)

    @property
    def rollouts(self) -> int:
        return self.samples + int(self.greedy)

    def echo(self) -> dict[str, object]:
        return asdict(self)


def policy_rollout(
    params: PolicyParams,
    env: FillInEnv,
    rng: np.random.Generator,
    *,
    greedy: bool = False,
) -> Ordering:
    """Play one episode with the policy and return the realized ordering."""
    obs = env.reset()
    while True:
        action, _ = sample_action(forward(params, obs), rng, greedy=greedy)
        result = env.step(action)
        if result.episode is not None:
            return result.episode.ordering
        obs = result.observation


def best_policy_ordering(
    params: PolicyParams, graph: "Graph", cfg: EvalConfig, seed: int
) -> Ordering:
    """Best of ``cfg.samples`` sampled episodes plus one greedy episode."""
    env = FillInEnv(
        EnvConfig(
            graphs=(graph,),
            masking_enabled=cfg.masking_enabled,
            seed=seed,
            adjacency_mode=cfg.adjacency_mode,
        )
    )
    rng = make_rng(seed)
    best: Ordering | None = None
    runs = [False] * cfg.samples + ([True] if cfg.greedy else [])
    for greedy in runs:
        ordering = policy_rollout(params, env, rng, greedy=greedy)
        if best is None or ordering.fill_cost < best.fill_cost:
            best = ordering
    if best is None:
        msg = "No policy rollouts were run"
        raise ConfigurationError(msg)
    return best


def evaluate_instance(
    params: PolicyParams,
    name: str,
    graph: "Graph",
    cfg: EvalConfig,
    seed: int,
) -> tuple[ReportRow, Ordering]:
    """Policy and baseline fills for one instance.

    Raises:
        ContractViolationError: If a reported fill does not re-score.
    """
    ordering = best_policy_ordering(params, graph, cfg, seed)
    rescored = fill_in_cost(graph, ordering.pi)
    if rescored != ordering.fill_cost:
        msg = f"{name}: policy fill {ordering.fill_cost} re-scores to {rescored}"
        logger.error(msg)
        raise ContractViolationError(msg)
    row = ReportRow(
        name=name,
        vertices=graph.n,
        edges=graph.m,
        refill_fill=ordering.fill_cost,
        mdh_fill=best_of_restarts(graph, "mdh", cfg.restarts, seed).fill_cost,
        mfillh_fill=best_of_restarts(graph, "mfillh", cfg.restarts, seed).fill_cost,
        mdh_lowest_id_fill=mdh_order(graph).fill_cost,
        mfillh_lowest_id_fill=mfillh_order(graph).fill_cost,
        samples=cfg.rollouts,
        restarts=cfg.restarts,
    )
    logger.info(
        f"{name}: refill={row.refill_fill} mdh={row.mdh_fill} "
        f"mfillh={row.mfillh_fill} gap_best={row.gap_best:.2%}"
    )
    return row, ordering


def instance_seeds(seed: int, count: int) -> list[int]:
    """Per-instance seeds, independent of worker count and instance order."""
    return [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(seed).spawn(count)
    ]


def evaluate_instances(
    params: PolicyParams,
    instances: Sequence[tuple[str, "Graph"]],
    cfg: EvalConfig,
) -> tuple[ComparisonReport, list[Ordering]]:
    """Evaluate every instance; rows are ordered by instance index."""
    seeds = instance_seeds(cfg.seed, len(instances))
    jobs = [(name, graph, s) for (name, graph), s in zip(instances, seeds, strict=True)]

    def run(job: tuple[str, "Graph", int]) -> tuple[ReportRow, Ordering]:
        name, graph, seed = job
        return evaluate_instance(params, name, graph, cfg, seed)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    report = ComparisonReport(
        rows=tuple(row for row, _ in results), config=cfg.echo()
    )
    return report, [ordering for _, ordering in results]
