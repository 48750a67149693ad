"""Desk-scale training runs; select with ``pytest -m slow``.

``REFILL_ACCEPTANCE_TIMESTEPS`` shrinks the training budget for a quick look;
the pass thresholds stay the same at any scale.
"""

import os

import pytest

from refill.evaluation import (
    EvalConfig,
    GeneralizationConfig,
    best_policy_ordering,
    run_generalization,
)
from refill.graph_io import gen_grid
from refill.heuristics import best_of_restarts
from refill.training import TrainResult, train, train_config

pytestmark = [pytest.mark.slow, pytest.mark.integration]

TIMESTEPS = int(os.environ.get("REFILL_ACCEPTANCE_TIMESTEPS", "100000"))
SEEDS = (0, 1, 2)
GRID6_TARGET_FILL = 69


def grid6_run(seed: int, *, action_masking: bool = True) -> TrainResult:
    overrides = {"total_timesteps": TIMESTEPS, "seed": seed, "action_masking": action_masking}
    return train(train_config("grid6", overrides), [gen_grid(6, 6)])


@pytest.fixture(scope="module")
def masked_runs() -> dict[int, TrainResult]:
    return {seed: grid6_run(seed) for seed in SEEDS}


@pytest.fixture(scope="module")
def unmasked_runs() -> dict[int, TrainResult]:
    return {seed: grid6_run(seed, action_masking=False) for seed in SEEDS}


class TestGridTraining:
    def test_grid6_matches_restarted_baselines(
        self, masked_runs: dict[int, TrainResult], record_property
    ) -> None:
        grid = gen_grid(6, 6)
        baseline = min(
            best_of_restarts(grid, "mdh", 64, seed=0).fill_cost,
            best_of_restarts(grid, "mfillh", 64, seed=0).fill_cost,
        )
        best_fills = {}
        for seed, result in masked_runs.items():
            sampled = best_policy_ordering(
                result.params, grid, EvalConfig(samples=25, restarts=0), seed
            )
            best_fills[seed] = min(result.best_orderings[0].fill_cost, sampled.fill_cost)
        record_property("grid6_best_fills", best_fills)
        record_property("grid6_target_fill", GRID6_TARGET_FILL)
        record_property("grid6_baseline_fill", baseline)

        assert sum(fill <= baseline for fill in best_fills.values()) >= 2

    def test_masking_ablation(
        self,
        masked_runs: dict[int, TrainResult],
        unmasked_runs: dict[int, TrainResult],
    ) -> None:
        wins = [
            masked_runs[seed].best_orderings[0].fill_cost
            <= unmasked_runs[seed].best_orderings[0].fill_cost
            for seed in SEEDS
        ]
        assert sum(wins) >= 2


class TestGeneralization:
    def test_fresh_gnp_graphs_beat_mdh_on_average(self, record_property) -> None:
        train_cfg = train_config("gnp", {"total_timesteps": TIMESTEPS, "seed": 0})
        gen_cfg = GeneralizationConfig(n=20, p=0.2, train_graphs=10, eval_graphs=50, seed=0)
        _, report = run_generalization(train_cfg, gen_cfg, EvalConfig(samples=25))
        summary = report.summary()
        record_property("gnp_summary", summary)

        assert len(report.rows) == 50
        assert summary["mean_refill_fill"] <= summary["mean_mdh_fill"]
