"""Policy checkpoints as plain JSON.

Floats are written with their shortest round-trip representation and keys in
a fixed order, so two runs with equal weights produce byte-identical files.
"""

from collections.abc import Mapping
import json
from pathlib import Path

import numpy as np

from refill.errors import CheckpointError
from refill.logging import get_logger
from refill.policy.gcn import PolicyParams, expected_shapes

logger = get_logger("refill.policy")

CHECKPOINT_FORMAT = "refill-policy"
CHECKPOINT_VERSION = 1


def checkpoint_payload(
    params: PolicyParams, config: Mapping[str, object] | None = None
) -> dict[str, object]:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "architecture": {
            "feature_dim": params.feature_dim,
            "node_dim": params.node_dim,
            "policy_sizes": list(params.policy_sizes),
        },
        "config": dict(config or {}),
        "tensors": {
            name: {"shape": list(t.shape), "data": t.ravel().tolist()}
            for name, t in params.tensors.items()
        },
    }


def save_checkpoint(
    path: Path | str,
    params: PolicyParams,
    config: Mapping[str, object] | None = None,
) -> Path:
    """Write ``params`` and the configuration echo ``config`` to ``path``.

    Raises:
        OSError: If the file cannot be written.
    """
    file_path = Path(path)
    text = json.dumps(checkpoint_payload(params, config), indent=1, ensure_ascii=False)
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        error_msg = f"Failed to write checkpoint {file_path}: {e}"
        logger.error(error_msg)
        raise OSError(error_msg) from e
    logger.debug(f"Saved checkpoint to {file_path}")
    return file_path


def _fail(msg: str) -> CheckpointError:
    logger.error(msg)
    return CheckpointError(msg)


def load_checkpoint(
    path: Path | str,
    expected: Mapping[str, object] | None = None,
) -> tuple[PolicyParams, dict[str, object]]:
    """Read a checkpoint back.

    Args:
        path: Checkpoint file.
        expected: Configuration keys that must match the stored echo, e.g.
            ``{"adjacency_mode": "current", "action_masking": True}``.

    Returns:
        The parameters and the stored configuration echo.

    Raises:
        CheckpointError: On a malformed file, a format or version mismatch,
            or a configuration mismatch with ``expected``.
    """
    file_path = Path(path)
    try:
        payload = json.loads(file_path.read_text(encoding="utf-8"))
    except OSError as e:
        raise _fail(f"Cannot read checkpoint {file_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise _fail(f"Checkpoint {file_path} is not valid JSON: {e}") from e

    if not isinstance(payload, dict):
        raise _fail(f"Checkpoint {file_path} is not a JSON object")
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise _fail(f"Checkpoint {file_path} has format {payload.get('format')!r}")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise _fail(
            f"Checkpoint {file_path} has version {payload.get('version')!r}, "
            f"expected {CHECKPOINT_VERSION}"
        )

    try:
        arch = payload["architecture"]
        node_dim = int(arch["node_dim"])
        policy_sizes = tuple(int(s) for s in arch["policy_sizes"])
        feature_dim = int(arch["feature_dim"])
        shapes = expected_shapes(node_dim, policy_sizes, feature_dim)
        tensors = {
            name: np.asarray(
                payload["tensors"][name]["data"], dtype=np.float64
            ).reshape(shape)
            for name, shape in shapes.items()
        }
        params = PolicyParams(node_dim, policy_sizes, tensors, feature_dim)
    except (KeyError, TypeError, ValueError) as e:
        raise _fail(f"Checkpoint {file_path} is malformed: {e}") from e

    config = dict(payload.get("config", {}))
    for key, value in (expected or {}).items():
        if key in config and config[key] != value:
            raise _fail(
                f"Checkpoint {file_path} was trained with {key}={config[key]!r}, "
                f"requested {key}={value!r}"
            )
    logger.debug(f"Loaded checkpoint {file_path} (node_dim={node_dim})")
    return params, config

