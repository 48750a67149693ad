"""Command-line entry point: ``refill <command> ...``.

Exit codes: 0 success, 1 unexpected error, 2 usage or configuration error,
3 parse or schema error, 4 contract violation, 5 instance too large,
6 non-finite training loss.
"""

import argparse
from collections.abc import Sequence
import logging as logging_module
from pathlib import Path
import sys

import numpy as np

from refill.elimination.cost import fill_in_cost
from refill.elimination.state import Ordering
from refill.errors import ConfigurationError, ContractViolationError, RefillError
from refill.evaluation.evaluate import EvalConfig, best_policy_ordering, evaluate_instances
from refill.evaluation.generalization import GeneralizationConfig, run_generalization
from refill.graph_io.generators import (
    gen_complete,
    gen_cycle,
    gen_gnp,
    gen_grid,
    gen_path,
    gen_star,
)
from refill.graph_io.loaders import LoadedGraph, load_graph, save_graph
from refill.graph_io.ordering_file import write_ordering
from refill.heuristics.greedy import (
    best_of_restarts,
    greedy_rollout,
    mdh_order,
    mfillh_order,
    random_rule,
)
from refill.heuristics.tie_break import TieBreak
from refill.logging import (
    get_default_log_dir,
    get_logger,
    set_console_level,
    setup_logging,
)
from refill.oracle.exact import DEFAULT_LIMIT_N, exact_min_fill
from refill.policy.checkpoint import load_checkpoint
from refill.training.config import PRESETS, default_seed, train_config
from refill.training.ppo import TrainingOutputs, train

logger = get_logger("refill")

TRAIN_FLAGS = (
    "total_timesteps",
    "learning_rate",
    "parallel_envs",
    "node_dim",
    "policy_sizes",
    "ent_coef",
    "action_masking",
    "clip_epsilon",
    "gamma",
    "gae_lambda",
    "rollout_length",
    "epochs_per_update",
    "minibatch_size",
    "value_coef",
    "max_grad_norm",
    "workers",
)


def _emit(text: str) -> None:
    sys.stdout.write(text + "\n")


def _verified(loaded: LoadedGraph, ordering: Ordering) -> Ordering:
    rescored = fill_in_cost(loaded.graph, ordering.pi)
    if rescored != ordering.fill_cost:
        msg = f"Ordering claims fill {ordering.fill_cost} but re-scores to {rescored}"
        logger.error(msg)
        raise ContractViolationError(msg)
    return ordering


def _report_ordering(
    loaded: LoadedGraph,
    ordering: Ordering,
    output: Path | None,
    header: dict[str, object],
) -> None:
    ordering = _verified(loaded, ordering)
    if output is not None:
        write_ordering(output, loaded.graph, ordering, loaded.labels, header)
        _emit(f"fill={ordering.fill_cost} written to {output}")
    else:
        _emit(f"fill={ordering.fill_cost}")
        _emit(" ".join(loaded.labels[v] for v in ordering.pi))


def _checkpoint_expectations(args: argparse.Namespace) -> dict[str, object]:
    expected: dict[str, object] = {}
    if getattr(args, "adjacency", None) is not None:
        expected["adjacency_mode"] = args.adjacency
    if getattr(args, "action_masking", None) is not None:
        expected["action_masking"] = bool(args.action_masking)
    return expected


def _eval_config(args: argparse.Namespace, stored: dict[str, object]) -> EvalConfig:
    masking = (
        bool(args.action_masking)
        if args.action_masking is not None
        else bool(stored.get("action_masking", True))
    )
    adjacency = args.adjacency or str(stored.get("adjacency_mode", "current"))
    return EvalConfig(
        samples=args.samples,
        greedy=args.greedy,
        restarts=args.restarts,
        seed=args.seed,
        workers=args.workers,
        masking_enabled=masking,
        adjacency_mode=adjacency,  # type: ignore[arg-type]
    )


def cmd_order(args: argparse.Namespace) -> int:
    loaded = load_graph(args.input, args.format)
    graph = loaded.graph
    header: dict[str, object] = {"method": args.method, "seed": args.seed}
    if args.method in {"mdh", "mfillh"}:
        header |= {"restarts": args.restarts, "tie_break": args.tie_break}
        if args.tie_break == "random" and args.restarts == 0:
            run = mdh_order if args.method == "mdh" else mfillh_order
            ordering = run(graph, TieBreak.random(args.seed))
        else:
            ordering = best_of_restarts(graph, args.method, args.restarts, args.seed)
    elif args.method == "random":
        header |= {"restarts": args.restarts, "masked": args.masked}
        seeds = np.random.SeedSequence(args.seed).spawn(args.restarts + 1)
        ordering = min(
            (
                greedy_rollout(
                    random_rule(int(s.generate_state(1)[0]), masked=args.masked), graph
                )
                for s in seeds
            ),
            key=lambda o: o.fill_cost,
        )
    else:
        if args.checkpoint is None:
            msg = "--method policy requires --checkpoint"
            raise ConfigurationError(msg)
        params, stored = load_checkpoint(args.checkpoint, _checkpoint_expectations(args))
        cfg = _eval_config(args, stored)
        header |= {"checkpoint": args.checkpoint, "samples": cfg.rollouts}
        ordering = best_policy_ordering(params, graph, cfg, args.seed)
    _report_ordering(loaded, ordering, args.output, header)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    loaded = load_graph(args.input, args.format)
    ordering, _ = exact_min_fill(loaded.graph, args.limit)
    header: dict[str, object] = {"method": "exact", "limit": args.limit, "seed": args.seed}
    _report_ordering(loaded, ordering, args.output, header)
    return 0


def _train_overrides(args: argparse.Namespace) -> dict[str, object]:
    overrides: dict[str, object] = {
        flag: getattr(args, flag)
        for flag in TRAIN_FLAGS
        if getattr(args, flag, None) is not None
    }
    if "action_masking" in overrides:
        overrides["action_masking"] = bool(overrides["action_masking"])
    if "policy_sizes" in overrides:
        overrides["policy_sizes"] = tuple(overrides["policy_sizes"])  # type: ignore[arg-type]
    if args.adjacency is not None:
        overrides["adjacency_mode"] = args.adjacency
    overrides["seed"] = args.seed
    return overrides


def cmd_train(args: argparse.Namespace) -> int:
    cfg = train_config(args.preset, _train_overrides(args))
    loaded = [load_graph(path, args.format) for path in args.inputs]
    output_file = args.output_file or Path(args.inputs[0]).with_suffix(".refill")
    outputs = TrainingOutputs.from_output_file(output_file)
    result = train(cfg, [g.graph for g in loaded], outputs, [g.labels for g in loaded])
    for index, ordering in result.best_orderings.items():
        _verified(loaded[index], ordering)
        _emit(f"{args.inputs[index]}: best fill={ordering.fill_cost}")
    _emit(f"checkpoint: {outputs.checkpoint}")
    _emit(f"log: {outputs.log}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    params, stored = load_checkpoint(args.checkpoint, _checkpoint_expectations(args))
    cfg = _eval_config(args, stored)
    loaded = [load_graph(path, args.format) for path in args.instances]
    names = [Path(path).name for path in args.instances]
    report, orderings = evaluate_instances(
        params, [(name, g.graph) for name, g in zip(names, loaded, strict=True)], cfg
    )
    for name, instance, ordering in zip(names, loaded, orderings, strict=True):
        _verified(instance, ordering)
        if args.orderings_dir is not None:
            write_ordering(
                Path(args.orderings_dir) / f"{name}.order",
                instance.graph,
                ordering,
                instance.labels,
                cfg.echo() | {"checkpoint": args.checkpoint},
            )
    if args.report is not None:
        report.write_csv(args.report)
    _emit(report.format_table())
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "grid":
        graph = gen_grid(args.rows, args.cols)
        header: dict[str, object] = {"kind": kind, "rows": args.rows, "cols": args.cols}
    elif kind == "gnp":
        graph = gen_gnp(args.n, args.p, args.seed)
        header = {"kind": kind, "n": args.n, "p": args.p, "seed": args.seed}
    else:
        makers = {"path": gen_path, "cycle": gen_cycle, "complete": gen_complete, "star": gen_star}
        graph = makers[kind](args.n)
        header = {"kind": kind, "n": args.n}
    save_graph(graph, args.output, header=header)
    _emit(f"V={graph.n} E={graph.m} written to {args.output}")
    return 0


def cmd_gnp(args: argparse.Namespace) -> int:
    overrides = _train_overrides(args)
    cfg = train_config(args.preset or "gnp", overrides | {"parallel_envs": args.train_graphs})
    gen_cfg = GeneralizationConfig(
        n=args.n,
        p=args.p,
        train_graphs=args.train_graphs,
        eval_graphs=args.eval_graphs,
        seed=args.seed,
    )
    eval_cfg = EvalConfig(
        samples=args.samples,
        greedy=args.greedy,
        restarts=args.restarts,
        seed=args.seed,
        workers=args.workers or 1,
    )
    outputs = (
        TrainingOutputs.from_output_file(args.output_file) if args.output_file else None
    )
    _, report = run_generalization(cfg, gen_cfg, eval_cfg, outputs)
    if args.report is not None:
        report.write_csv(args.report)
    _emit(report.format_table())
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=["auto", "edgelist", "matrix-pattern"],
        default="auto",
        help="Input graph format (default: sniff the header)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Random seed (default: $REFILL_SEED or 0)",
    )


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, default=25, help="Sampled policy rollouts")
    parser.add_argument(
        "--greedy",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Add one greedy rollout (default: on)",
    )
    parser.add_argument("--restarts", type=int, default=64, help="Baseline restarts")
    parser.add_argument("--workers", type=int, default=1, help="Instance worker threads")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--total_timesteps", type=int)
    parser.add_argument("--learning_rate", type=float)
    parser.add_argument("--parallel_envs", type=int)
    parser.add_argument("--node_dim", type=int)
    parser.add_argument("--policy_sizes", type=int, nargs="*")
    parser.add_argument("--ent_coef", type=float)
    parser.add_argument("--clip_epsilon", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--gae_lambda", type=float)
    parser.add_argument("--rollout_length", type=int)
    parser.add_argument("--epochs_per_update", type=int)
    parser.add_argument("--minibatch_size", type=int)
    parser.add_argument("--value_coef", type=float)
    parser.add_argument("--max_grad_norm", type=float)
    parser.add_argument("--workers", type=int, help="Environment worker threads")
    parser.add_argument(
        "--output_file",
        default=None,
        help="Output stem; writes <stem>.policy.json, <stem>.log.csv, <stem>.order",
    )


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--action_masking", type=int, choices=[0, 1], default=None)
    parser.add_argument("--adjacency", choices=["current", "original"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refill",
        description="Low-fill elimination orderings: heuristics, exact oracle and a learned policy.",
    )
    parser.add_argument(
        "--log-dir",
        type=Path,
        nargs="?",
        const=get_default_log_dir(),
        default=None,
        help="Also log to daily files here (bare flag: ~/.logs/refill)",
    )
    parser.add_argument("--debug", action="store_true", help="Verbose console logging")
    sub = parser.add_subparsers(dest="command", required=True)

    order = sub.add_parser("order", help="Order one graph with a heuristic or a policy")
    order.add_argument("input")
    order.add_argument(
        "--method", choices=["mdh", "mfillh", "random", "policy"], default="mdh"
    )
    order.add_argument("--tie-break", choices=["lowest-id", "random"], default="lowest-id")
    order.add_argument("--masked", action="store_true", help="Random over the candidate mask")
    order.add_argument("--checkpoint", default=None)
    order.add_argument("--output", "-o", type=Path, default=None)
    _add_common(order)
    _add_policy_flags(order)
    _add_model_flags(order)
    order.set_defaults(handler=cmd_order, restarts=0)

    oracle = sub.add_parser("oracle", help="Exact minimum fill for small graphs")
    oracle.add_argument("input")
    oracle.add_argument("--limit", type=int, default=DEFAULT_LIMIT_N)
    oracle.add_argument("--output", "-o", type=Path, default=None)
    _add_common(oracle)
    oracle.set_defaults(handler=cmd_oracle)

    train_p = sub.add_parser("train", help="Train a policy with masked PPO")
    train_p.add_argument("inputs", nargs="+")
    _add_common(train_p)
    _add_train_flags(train_p)
    _add_model_flags(train_p)
    train_p.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser("eval", help="Compare a trained policy with the heuristics")
    evaluate.add_argument("checkpoint")
    evaluate.add_argument("instances", nargs="+")
    evaluate.add_argument("--report", type=Path, default=None, help="CSV report path")
    evaluate.add_argument("--orderings-dir", type=Path, default=None)
    _add_common(evaluate)
    _add_policy_flags(evaluate)
    _add_model_flags(evaluate)
    evaluate.set_defaults(handler=cmd_eval)

    generate = sub.add_parser("generate", help="Write a generated instance")
    generate.add_argument(
        "kind", choices=["grid", "gnp", "path", "cycle", "complete", "star"]
    )
    generate.add_argument("--rows", type=int, default=5)
    generate.add_argument("--cols", type=int, default=5)
    generate.add_argument("-n", type=int, default=10)
    generate.add_argument("-p", type=float, default=0.2)
    generate.add_argument("--output", "-o", type=Path, required=True)
    _add_common(generate)
    generate.set_defaults(handler=cmd_generate)

    gnp = sub.add_parser("gnp", help="Train on G(n, p) samples and evaluate on fresh ones")
    gnp.add_argument("-n", type=int, default=50)
    gnp.add_argument("-p", type=float, default=0.2)
    gnp.add_argument("--train-graphs", type=int, default=35)
    gnp.add_argument("--eval-graphs", type=int, default=200)
    gnp.add_argument("--samples", type=int, default=25)
    gnp.add_argument(
        "--greedy", action=argparse.BooleanOptionalAction, default=True
    )
    gnp.add_argument("--restarts", type=int, default=64)
    gnp.add_argument("--report", type=Path, default=None)
    _add_common(gnp)
    _add_train_flags(gnp)
    _add_model_flags(gnp)
    gnp.set_defaults(handler=cmd_gnp)

    return parser


def configure_logging(log_dir: Path | None, *, debug_mode: bool) -> None:
    setup_logging(log_dir)
    if debug_mode:
        set_console_level(logging_module.DEBUG)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_dir, debug_mode=args.debug)
    try:
        if args.seed is None:
            args.seed = default_seed()
        return int(args.handler(args))
    except RefillError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1

