from pathlib import Path

import numpy as np
import pytest

from refill.elimination import Graph, fill_in_cost
from refill.environment import EnvConfig, VectorEnv
from refill.errors import ConfigurationError, NonFiniteLossError
from refill.graph_io import gen_grid, gen_path, read_ordering
from refill.policy import LossTerms, PolicyParams, load_checkpoint
from refill.policy.optimizer import Adam
from refill.training import (
    LOG_COLUMNS,
    PRESETS,
    SEED_ENV_VAR,
    RolloutBuffer,
    TrainConfig,
    Trainer,
    TrainingLogWriter,
    TrainingOutputs,
    UpdateRecord,
    collect_rollouts,
    compute_gae,
    default_seed,
    env_graph_indices,
    ppo_update,
    read_training_log,
    train,
    train_config,
)
from refill.training import ppo as ppo_module


def tiny_config(**overrides) -> TrainConfig:
    values: dict[str, object] = {
        "total_timesteps": 32,
        "parallel_envs": 2,
        "rollout_length": 8,
        "node_dim": 4,
        "minibatch_size": 8,
        "epochs_per_update": 2,
        "learning_rate": 1e-3,
    }
    values.update(overrides)
    return TrainConfig(**values)  # type: ignore[arg-type]


def single_env_buffer(
    rewards: list[float],
    values: list[float],
    dones: list[bool],
    last_value: float,
) -> RolloutBuffer:
    steps = len(rewards)
    return RolloutBuffer(
        observations=[],
        actions=np.zeros((steps, 1), dtype=np.int64),
        log_probs=np.zeros((steps, 1)),
        rewards=np.array(rewards, dtype=np.float64)[:, None],
        values=np.array(values, dtype=np.float64)[:, None],
        dones=np.array(dones)[:, None],
        last_values=np.array([last_value]),
    )


class TestComputeGae:
    def test_zero_lambda_is_td_error(self) -> None:
        buffer = single_env_buffer([-1.0, -2.0], [0.5, 0.25], [False, False], 1.0)
        advantages, returns = compute_gae(buffer, gamma=0.9, gae_lambda=0.0)
        np.testing.assert_allclose(
            advantages[:, 0], [-1.0 + 0.9 * 0.25 - 0.5, -2.0 + 0.9 * 1.0 - 0.25]
        )
        np.testing.assert_allclose(returns, advantages + buffer.values)

    def test_undiscounted_with_zero_values_sums_rewards(self) -> None:
        buffer = single_env_buffer([-1.0, -2.0, -3.0], [0.0] * 3, [False, False, True], 0.0)
        advantages, _ = compute_gae(buffer, gamma=1.0, gae_lambda=1.0)
        np.testing.assert_allclose(advantages[:, 0], [-6.0, -5.0, -3.0])

    def test_half_discount(self) -> None:
        buffer = single_env_buffer([-1.0, -2.0, 0.0], [0.5, 0.25, 1.0], [False] * 3, 2.0)
        advantages, returns = compute_gae(buffer, gamma=0.5, gae_lambda=0.5)
        np.testing.assert_allclose(advantages[:, 0], [-1.8125, -1.75, 0.0])
        np.testing.assert_allclose(returns[:, 0], [-1.3125, -1.5, 1.0])

    def test_episode_end_stops_recursion(self) -> None:
        buffer = single_env_buffer([-1.0, -2.0, -3.0], [0.0] * 3, [False, True, False], 5.0)
        advantages, _ = compute_gae(buffer, gamma=1.0, gae_lambda=1.0)
        np.testing.assert_allclose(advantages[:, 0], [-3.0, -2.0, 2.0])


class TestCollectRollouts:
    def test_buffer_shape(self, grid5: Graph) -> None:
        venv = VectorEnv([EnvConfig(graphs=(grid5,), seed=i) for i in range(5)])
        params = PolicyParams.initialize(4, (), seed=0)
        buffer = collect_rollouts(params, venv, 64, np.random.default_rng(0))
        assert buffer.size == 320
        assert buffer.actions.shape == (64, 5)
        assert len(buffer.flat_observations()) == 320
        assert np.all(buffer.log_probs <= 0.0)
        assert np.all(np.isfinite(buffer.log_probs))
        assert buffer.dones.sum() == len(buffer.episodes) == 10

    def test_actions_respect_mask(self, figure_graph: Graph) -> None:
        venv = VectorEnv([EnvConfig(graphs=(figure_graph,))] * 2)
        params = PolicyParams.initialize(4, (), seed=0)
        buffer = collect_rollouts(params, venv, 15, np.random.default_rng(1))
        for t, row in enumerate(buffer.observations):
            for e, obs in enumerate(row):
                assert obs.action_mask[buffer.actions[t, e]]

    def test_episode_rewards_match_fill(self, grid5: Graph) -> None:
        venv = VectorEnv([EnvConfig(graphs=(grid5,))])
        params = PolicyParams.initialize(4, (), seed=0)
        buffer = collect_rollouts(params, venv, 25, np.random.default_rng(2))
        (episode,) = buffer.episodes
        assert -buffer.rewards.sum() == episode.record.fill
        assert fill_in_cost(grid5, episode.record.ordering.pi) == episode.record.fill


class TestPpoUpdate:
    def _buffer(self, cfg: TrainConfig, graph: Graph, params: PolicyParams):
        venv = VectorEnv(
            [EnvConfig(graphs=(graph,), seed=i) for i in range(cfg.parallel_envs)]
        )
        return collect_rollouts(params, venv, cfg.steps_per_env, np.random.default_rng(0))

    def test_zero_signal_leaves_params(self, grid5: Graph) -> None:
        cfg = tiny_config(value_coef=0.0, ent_coef=0.0, minibatch_size=3)
        params = PolicyParams.initialize(cfg.node_dim, (), seed=0)
        before = params.copy()
        buffer = self._buffer(cfg, grid5, params)
        zeros = np.zeros_like(buffer.rewards)
        ppo_update(
            params, Adam(params, 1e-2), buffer, zeros, zeros, cfg, np.random.default_rng(0)
        )
        for name, tensor in params.tensors.items():
            assert np.array_equal(tensor, before.tensors[name])

    def test_single_on_policy_step(self, grid5: Graph) -> None:
        cfg = tiny_config(epochs_per_update=1, minibatch_size=16)
        params = PolicyParams.initialize(cfg.node_dim, (), seed=0)
        buffer = self._buffer(cfg, grid5, params)
        advantages, returns = compute_gae(buffer, cfg.gamma, cfg.gae_lambda)
        stats = ppo_update(
            params, Adam(params, 1e-3), buffer, advantages, returns, cfg,
            np.random.default_rng(0),
        )
        assert stats.policy_loss == pytest.approx(0.0, abs=1e-9)
        assert stats.approx_kl == pytest.approx(0.0, abs=1e-12)
        assert stats.clip_fraction == 0.0
        assert stats.entropy > 0.0

    def test_non_finite_loss(self, grid5: Graph, monkeypatch) -> None:
        cfg = tiny_config()
        params = PolicyParams.initialize(cfg.node_dim, (), seed=0)
        buffer = self._buffer(cfg, grid5, params)

        def broken(params, batch, spec):
            return LossTerms(total=float("nan")), params.zeros_like()

        monkeypatch.setattr(ppo_module, "backward", broken)
        zeros = np.zeros_like(buffer.rewards)
        with pytest.raises(NonFiniteLossError) as excinfo:
            ppo_update(
                params, Adam(params, 1e-3), buffer, zeros, zeros, cfg,
                np.random.default_rng(0),
            )
        assert excinfo.value.diagnostics["epoch"] == 0
        assert "grad_norm" in excinfo.value.diagnostics


class TestTrainConfig:
    def test_default_rollout(self) -> None:
        cfg = TrainConfig()
        assert cfg.steps_per_env == 410
        assert cfg.batch_size == 2050
        assert cfg.num_updates == 244
        assert TrainConfig(parallel_envs=35).steps_per_env == 59

    def test_collects_every_problem(self) -> None:
        with pytest.raises(ConfigurationError) as excinfo:
            TrainConfig(learning_rate=0.0, parallel_envs=0)
        message = str(excinfo.value)
        assert "learning_rate" in message
        assert "parallel_envs" in message

    def test_rejects_budget_below_one_rollout(self) -> None:
        with pytest.raises(ConfigurationError, match="below one rollout"):
            TrainConfig(total_timesteps=100)

    def test_partial_rollout_rounds_up(self) -> None:
        cfg = TrainConfig(total_timesteps=100, parallel_envs=3, rollout_length=16)
        assert cfg.num_updates == 3
        assert cfg.num_updates * cfg.batch_size >= cfg.total_timesteps

    def test_zero_budget_allowed(self) -> None:
        assert TrainConfig(total_timesteps=0).num_updates == 0

    def test_echo(self) -> None:
        echo = TrainConfig(policy_sizes=(16, 16)).echo()
        assert echo["policy_sizes"] == [16, 16]
        assert echo["rollout_length"] == 410
        assert echo["action_masking"] is True

    @pytest.mark.parametrize("field", ["gamma", "clip_epsilon"])
    def test_rejects_out_of_range(self, field: str) -> None:
        with pytest.raises(ConfigurationError):
            TrainConfig(**{field: 1.5})


class TestPresets:
    def test_grid_rows(self) -> None:
        assert train_config("grid5").learning_rate == 1e-4
        assert train_config("grid8").learning_rate == 5e-5
        assert train_config("grid10").node_dim == 8

    def test_ablation_disables_masking(self) -> None:
        cfg = train_config("ablation-pace100")
        assert cfg.action_masking is False
        assert cfg.policy_sizes == (16, 16)
        assert cfg.parallel_envs == 10

    def test_gnp(self) -> None:
        cfg = train_config("gnp")
        assert (cfg.parallel_envs, cfg.node_dim, cfg.ent_coef) == (35, 16, 0.01)

    def test_override_wins(self) -> None:
        cfg = train_config("grid6", {"learning_rate": 3e-4, "total_timesteps": 0})
        assert cfg.learning_rate == 3e-4
        assert cfg.node_dim == 32

    def test_every_preset_is_valid(self) -> None:
        for name in PRESETS:
            assert train_config(name).total_timesteps == 500_000

    def test_unknown_preset(self) -> None:
        with pytest.raises(ConfigurationError, match="Unknown preset"):
            train_config("grid11")

    def test_unknown_option(self) -> None:
        with pytest.raises(ConfigurationError, match="warmup"):
            train_config(None, {"warmup": 3})


class TestDefaultSeed:
    def test_unset(self, monkeypatch) -> None:
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        assert default_seed() == 0

    def test_from_environment(self, monkeypatch) -> None:
        monkeypatch.setenv(SEED_ENV_VAR, "17")
        assert default_seed() == 17

    def test_invalid(self, monkeypatch) -> None:
        monkeypatch.setenv(SEED_ENV_VAR, "abc")
        with pytest.raises(ConfigurationError):
            default_seed()


class TestTrainingLogWriter:
    def test_header_and_rows(self, tmp_path: Path) -> None:
        writer = TrainingLogWriter(tmp_path / "run.log.csv")
        writer.start({"seed": 3, "node_dim": 4})
        writer.append(UpdateRecord(16, None, None, 0.5, 1.25, 1.0))
        writer.append(UpdateRecord(32, 2.5, 2, -0.1, 0.75, 0.9))

        lines = writer.get_file_path().read_text(encoding="utf-8").splitlines()
        assert lines[:3] == ["# seed=3", "# node_dim=4", ",".join(LOG_COLUMNS)]
        assert lines[3] == "16,,,0.5,1.25,1.0"

        rows = read_training_log(writer.get_file_path())
        assert [row["timesteps"] for row in rows] == ["16", "32"]
        assert rows[1]["best_fill"] == "2"

    def test_start_truncates(self, tmp_path: Path) -> None:
        writer = TrainingLogWriter(tmp_path / "run.log.csv")
        writer.start({})
        writer.append(UpdateRecord(1, 1.0, 1, 0.0, 0.0, 0.0))
        writer.start({})
        assert read_training_log(writer.get_file_path()) == []

    def test_unwritable(self, tmp_path: Path) -> None:
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        writer = TrainingLogWriter(blocker / "run.log.csv")
        with pytest.raises(OSError, match="Failed to write"):
            writer.start({})
        assert writer.last_error_msg is not None


class TestEnvGraphIndices:
    def test_more_envs_than_graphs(self) -> None:
        assert env_graph_indices(3, 5) == [[0], [1], [2], [0], [1]]

    def test_fewer_envs_than_graphs(self) -> None:
        assert env_graph_indices(7, 3) == [[0, 3, 6], [1, 4], [2, 5]]


class TestTrainingOutputs:
    def test_paths(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "grid6")
        assert outputs.checkpoint.name == "grid6.policy.json"
        assert outputs.log.name == "grid6.log.csv"
        assert outputs.ordering_path(0, 1).name == "grid6.order"
        assert outputs.ordering_path(2, 3).name == "grid6.2.order"


class TestTrain:
    def test_deterministic_outputs(self, tmp_path: Path) -> None:
        graph = gen_grid(3, 3)
        first = TrainingOutputs.from_output_file(tmp_path / "a")
        second = TrainingOutputs.from_output_file(tmp_path / "b")
        train(tiny_config(seed=5), [graph], first)
        train(tiny_config(seed=5), [graph], second)
        assert first.log.read_bytes() == second.log.read_bytes()
        assert first.checkpoint.read_bytes() == second.checkpoint.read_bytes()
        assert first.ordering_path(0, 1).read_text(
            encoding="utf-8"
        ) == second.ordering_path(0, 1).read_text(encoding="utf-8")

    def test_log_rows_per_update(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "run")
        result = train(tiny_config(), [gen_grid(3, 3)], outputs)
        rows = read_training_log(outputs.log)
        assert [int(row["timesteps"]) for row in rows] == [16, 32]
        assert len(result.log.records) == 2
        params, config = load_checkpoint(outputs.checkpoint)
        assert params.node_dim == 4
        assert config["seed"] == 0

    def test_consumes_whole_budget(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "run")
        train(tiny_config(total_timesteps=40), [gen_grid(3, 3)], outputs)
        rows = read_training_log(outputs.log)
        assert [int(row["timesteps"]) for row in rows] == [16, 32, 48]

    def test_zero_budget(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "run")
        result = train(tiny_config(total_timesteps=0), [gen_path(4)], outputs)
        assert result.log.records == []
        assert result.log.best_fill is None
        assert read_training_log(outputs.log) == []
        assert outputs.checkpoint.exists()
        assert not outputs.ordering_path(0, 1).exists()

    def test_masked_path_has_zero_fill(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "p3")
        result = train(tiny_config(), [gen_path(3)], outputs, [("a", "b", "c")])
        assert result.log.best_fill == 0
        assert result.best_orderings[0].fill_cost == 0
        order, fill = read_ordering(outputs.ordering_path(0, 1), ("a", "b", "c"))
        assert fill == 0
        assert sorted(order) == [0, 1, 2]

    def test_multiple_graphs(self, tmp_path: Path) -> None:
        outputs = TrainingOutputs.from_output_file(tmp_path / "pair")
        result = train(tiny_config(), [gen_path(4), gen_grid(2, 3)], outputs)
        assert set(result.best_orderings) == {0, 1}
        assert outputs.ordering_path(0, 2).exists()
        assert outputs.ordering_path(1, 2).exists()

    def test_best_orderings_rescore(self) -> None:
        graph = gen_grid(3, 3)
        result = train(tiny_config(), [graph])
        ordering = result.best_orderings[0]
        assert fill_in_cost(graph, ordering.pi) == ordering.fill_cost
        assert result.log.best_fill == ordering.fill_cost

    def test_needs_graphs(self) -> None:
        with pytest.raises(ConfigurationError):
            Trainer(tiny_config(), [])

    def test_without_masking(self) -> None:
        result = train(tiny_config(action_masking=False), [gen_grid(3, 3)])
        assert result.log.records[-1].timesteps == 32
