import math
from pathlib import Path

import numpy as np
import pytest

from refill.elimination import Graph, fill_in_cost
from refill.environment import EnvConfig, FillInEnv
from refill.errors import ConfigurationError
from refill.evaluation import (
    ComparisonReport,
    EvalConfig,
    GeneralizationConfig,
    ReportRow,
    best_policy_ordering,
    evaluate_instance,
    evaluate_instances,
    improvement,
    instance_seeds,
    policy_rollout,
    read_report,
    rows_from_csv,
    run_generalization,
    sample_graph_sets,
)
from refill.graph_io import gen_grid, gen_path
from refill.policy import PolicyParams
from refill.training import TrainConfig, TrainingOutputs


def make_row(name: str = "g", refill: int = 8, mdh: int = 10, mfillh: int = 9) -> ReportRow:
    return ReportRow(
        name=name,
        vertices=9,
        edges=12,
        refill_fill=refill,
        mdh_fill=mdh,
        mfillh_fill=mfillh,
        mdh_lowest_id_fill=mdh + 1,
        mfillh_lowest_id_fill=mfillh,
        samples=26,
        restarts=64,
    )


@pytest.fixture
def params() -> PolicyParams:
    return PolicyParams.initialize(8, (), seed=0)


class TestImprovement:
    @pytest.mark.parametrize(
        ("baseline", "fill", "expected"),
        [(10, 8, 0.2), (10, 12, -0.2), (37, 37, 0.0), (0, 0, 0.0)],
    )
    def test_values(self, baseline: int, fill: int, expected: float) -> None:
        assert improvement(baseline, fill) == pytest.approx(expected)

    def test_zero_baseline_with_fill(self) -> None:
        assert improvement(0, 3) == -math.inf


class TestReportRow:
    def test_gaps(self) -> None:
        row = make_row()
        assert row.gap_mdh == pytest.approx(0.2)
        assert row.gap_mfillh == pytest.approx(1 / 9)
        assert row.gap_best == pytest.approx(1 / 9)

    def test_gap_best_uses_smaller_baseline(self) -> None:
        assert make_row(refill=5, mdh=4, mfillh=6).gap_best == pytest.approx(-0.25)


class TestComparisonReport:
    def test_csv_round_trip(self, tmp_path: Path) -> None:
        report = ComparisonReport(
            rows=(make_row("a"), make_row("b", refill=10)), config={"seed": 3}
        )
        path = report.write_csv(tmp_path / "report.csv")
        assert path.read_text(encoding="utf-8").startswith("# seed=3\nname,V,E,")
        records = read_report(path)
        assert float(records[0]["gap_mdh"]) == pytest.approx(0.2)
        assert rows_from_csv(records) == list(report.rows)

    def test_mean_gaps(self) -> None:
        report = ComparisonReport(rows=(make_row(refill=8), make_row(refill=10)))
        assert report.mean_gaps()["gap_mdh"] == pytest.approx(0.1)

    def test_zero_baseline_row_left_out_of_means(self) -> None:
        report = ComparisonReport(
            rows=(make_row(refill=0, mdh=3, mfillh=3), make_row(refill=1, mdh=0, mfillh=2))
        )
        means = report.mean_gaps()
        assert means["gap_mdh"] == pytest.approx(1.0)
        assert math.isfinite(means["gap_best"])
        assert report.excluded_gaps() == {"gap_mdh": 1, "gap_mfillh": 0, "gap_best": 1}
        assert "left out of the means: gap_mdh=1" in report.format_table()

    def test_mean_fills(self) -> None:
        report = ComparisonReport(rows=(make_row(refill=8), make_row(refill=10, mdh=12)))
        assert report.mean_fills() == {
            "mean_refill_fill": 9.0,
            "mean_mdh_fill": 11.0,
            "mean_mfillh_fill": 9.0,
        }
        assert "9.0" in report.format_table()

    def test_summary_trails_csv(self, tmp_path: Path) -> None:
        report = ComparisonReport(rows=(make_row(refill=0, mdh=0, mfillh=4),))
        text = report.write_csv(tmp_path / "report.csv").read_text(encoding="utf-8")
        assert "# mean_refill_fill=0.0\n" in text
        assert "# mean_mdh_fill=0.0\n" in text
        assert "# excluded_gap_best=0\n" in text
        assert len(read_report(tmp_path / "report.csv")) == 1

    def test_empty_report(self) -> None:
        report = ComparisonReport(rows=())
        assert report.mean_gaps() == {"gap_mdh": 0.0, "gap_mfillh": 0.0, "gap_best": 0.0}
        assert report.mean_fills()["mean_refill_fill"] == 0.0
        assert "policy samples per instance" in report.format_table()

    def test_table_discloses_budgets(self) -> None:
        table = ComparisonReport(rows=(make_row("grid5"),)).format_table()
        assert "grid5" in table
        assert "20.0%" in table
        assert "policy samples per instance: [26]; baseline restarts: [64]" in table


class TestEvalConfig:
    def test_rollouts(self) -> None:
        assert EvalConfig(samples=25, greedy=True).rollouts == 26
        assert EvalConfig(samples=4, greedy=False).rollouts == 4

    def test_needs_a_rollout(self) -> None:
        with pytest.raises(ConfigurationError):
            EvalConfig(samples=0, greedy=False)

    def test_rejects_negative(self) -> None:
        with pytest.raises(ConfigurationError):
            EvalConfig(restarts=-1)


class TestPolicyRollout:
    def test_two_vertex_path_greedy(self, params: PolicyParams) -> None:
        env = FillInEnv(EnvConfig(graphs=(gen_path(2),)))
        ordering = policy_rollout(params, env, np.random.default_rng(0), greedy=True)
        assert ordering.fill_cost == 0
        assert sorted(ordering.pi) == [0, 1]

    def test_greedy_is_deterministic(self, params: PolicyParams, grid5: Graph) -> None:
        cfg = EvalConfig(samples=0, greedy=True)
        assert best_policy_ordering(params, grid5, cfg, 1) == best_policy_ordering(
            params, grid5, cfg, 2
        )

    def test_best_of_samples_rescores(self, params: PolicyParams, grid5: Graph) -> None:
        ordering = best_policy_ordering(params, grid5, EvalConfig(samples=5), 0)
        assert fill_in_cost(grid5, ordering.pi) == ordering.fill_cost


class TestEvaluateInstances:
    def test_single_instance(self, params: PolicyParams, figure_graph: Graph) -> None:
        row, ordering = evaluate_instance(
            params, "figure", figure_graph, EvalConfig(samples=3, restarts=4), seed=0
        )
        assert row.refill_fill == ordering.fill_cost == 0
        assert row.mdh_fill == 0
        assert row.mfillh_fill == 0
        assert row.gap_best == 0.0
        assert row.samples == 4
        assert (row.vertices, row.edges) == (5, 4)

    def test_rows_in_instance_order(self, params: PolicyParams) -> None:
        instances = [(f"g{i}", gen_grid(2, i + 2)) for i in range(4)]
        report, orderings = evaluate_instances(
            params, instances, EvalConfig(samples=2, restarts=2)
        )
        assert [row.name for row in report.rows] == ["g0", "g1", "g2", "g3"]
        assert [len(o) for o in orderings] == [4, 6, 8, 10]
        assert report.config["samples"] == 2

    def test_workers_do_not_change_results(self, params: PolicyParams) -> None:
        instances = [(f"g{i}", gen_grid(3, i + 2)) for i in range(4)]
        serial = evaluate_instances(params, instances, EvalConfig(samples=3, restarts=3))
        threaded = evaluate_instances(
            params, instances, EvalConfig(samples=3, restarts=3, workers=3)
        )
        assert serial[0].rows == threaded[0].rows
        assert serial[1] == threaded[1]

    def test_instance_seeds_independent_of_count(self) -> None:
        assert instance_seeds(5, 3) == instance_seeds(5, 6)[:3]


class TestGeneralization:
    def test_graph_sets(self) -> None:
        cfg = GeneralizationConfig(n=12, p=0.3, train_graphs=3, eval_graphs=5, seed=1)
        train_graphs, eval_graphs = sample_graph_sets(cfg)
        assert len(train_graphs) == 3
        assert len(eval_graphs) == 5
        assert all(g.n == 12 for g in train_graphs + eval_graphs)
        assert sample_graph_sets(cfg) == (train_graphs, eval_graphs)

    def test_invalid(self) -> None:
        with pytest.raises(ConfigurationError):
            GeneralizationConfig(p=1.2)

    def test_small_run(self, tmp_path: Path) -> None:
        train_cfg = TrainConfig(
            total_timesteps=32,
            parallel_envs=2,
            rollout_length=8,
            node_dim=4,
            minibatch_size=8,
            epochs_per_update=1,
        )
        gen_cfg = GeneralizationConfig(n=8, p=0.4, train_graphs=2, eval_graphs=3)
        outputs = TrainingOutputs.from_output_file(tmp_path / "gnp")
        result, report = run_generalization(
            train_cfg, gen_cfg, EvalConfig(samples=2, restarts=2), outputs
        )
        assert len(result.log.records) == 2
        assert [row.name for row in report.rows] == ["gnp-0", "gnp-1", "gnp-2"]
        assert report.config["n"] == 8
        assert report.config["masking_enabled"] is True
        assert outputs.checkpoint.exists()
