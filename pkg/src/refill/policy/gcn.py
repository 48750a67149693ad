"""Two-layer average-aggregation GCN policy with exact gradients.

Every node gets ``H2 = tanh(Â tanh(Â X W1) W2)`` with ``Â = D̃⁻¹(A + I)`` (the
mean over a node and its neighbors). A linear head scores each node; a masked
softmax over the scores is the action distribution. The state value is an MLP
applied to the mean embedding of the remaining nodes. The GCN trunk is shared
by both heads.

Graphs of equal size are processed as stacked ``(B, n, ...)`` arrays.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from refill.environment.features import FEATURE_DIM, Observation
from refill.errors import ConfigurationError, ContractViolationError
from refill.graph_io.generators import make_rng

if TYPE_CHECKING:
    from numpy.typing import NDArray

Tensors = dict[str, "NDArray[np.float64]"]


def expected_shapes(
    node_dim: int, policy_sizes: Sequence[int], feature_dim: int = FEATURE_DIM
) -> dict[str, tuple[int, ...]]:
    """Names and shapes of every parameter tensor, in canonical order."""
    shapes: dict[str, tuple[int, ...]] = {
        "gcn.w1": (feature_dim, node_dim),
        "gcn.w2": (node_dim, node_dim),
        "score.w": (node_dim,),
        "score.b": (1,),
    }
    widths = [node_dim, *policy_sizes]
    for k, (fan_in, fan_out) in enumerate(zip(widths, widths[1:], strict=False)):
        shapes[f"value.w{k}"] = (fan_in, fan_out)
        shapes[f"value.b{k}"] = (fan_out,)
    last = len(policy_sizes)
    shapes[f"value.w{last}"] = (widths[-1], 1)
    shapes[f"value.b{last}"] = (1,)
    return shapes


def _orthogonal(
    rng: np.random.Generator, rows: int, cols: int, gain: float
) -> "NDArray[np.float64]":
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q *= np.where(np.diag(r) < 0, -1.0, 1.0)
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


@dataclass
class PolicyParams:
    """Weights of the GCN trunk, the node-score head and the value MLP."""

    node_dim: int
    policy_sizes: tuple[int, ...]
    tensors: Tensors
    feature_dim: int = FEATURE_DIM

    def __post_init__(self) -> None:
        self.policy_sizes = tuple(int(s) for s in self.policy_sizes)
        if self.node_dim < 1 or any(s < 1 for s in self.policy_sizes):
            msg = f"Invalid sizes node_dim={self.node_dim}, policy_sizes={self.policy_sizes}"
            raise ConfigurationError(msg)
        shapes = expected_shapes(self.node_dim, self.policy_sizes, self.feature_dim)
        if list(shapes) != list(self.tensors):
            msg = f"Tensor names {list(self.tensors)} do not match {list(shapes)}"
            raise ConfigurationError(msg)
        for name, shape in shapes.items():
            tensor = self.tensors[name]
            if tensor.shape != shape:
                msg = f"Tensor {name} has shape {tensor.shape}, expected {shape}"
                raise ConfigurationError(msg)
            if not np.all(np.isfinite(tensor)):
                msg = f"Tensor {name} has non-finite entries"
                raise ConfigurationError(msg)

    @classmethod
    def initialize(
        cls, node_dim: int, policy_sizes: Sequence[int], seed: int
    ) -> "PolicyParams":
        """Orthogonal weights (small gain on the score head), zero biases."""
        rng = make_rng(seed)
        tensors: Tensors = {}
        for name, shape in expected_shapes(node_dim, policy_sizes).items():
            if ".b" in name:
                tensors[name] = np.zeros(shape)
            elif name == "score.w":
                tensors[name] = _orthogonal(rng, node_dim, 1, 0.01)[:, 0]
            else:
                tensors[name] = _orthogonal(rng, shape[0], shape[1], 1.0)
        return cls(node_dim, tuple(policy_sizes), tensors)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            self.node_dim,
            self.policy_sizes,
            {name: t.copy() for name, t in self.tensors.items()},
            self.feature_dim,
        )

    def zeros_like(self) -> Tensors:
        return {name: np.zeros_like(t) for name, t in self.tensors.items()}


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """Observations of ``B`` same-size graphs stacked along a leading axis."""

    features: "NDArray[np.float64]"
    adjacency: "NDArray[np.bool_]"
    mask: "NDArray[np.bool_]"
    alive: "NDArray[np.bool_]"

    @classmethod
    def stack(cls, observations: Sequence[Observation]) -> "GraphBatch":
        sizes = {obs.n for obs in observations}
        if len(sizes) != 1:
            msg = f"Cannot stack graphs of different sizes {sorted(sizes)}"
            raise ConfigurationError(msg)
        return cls(
            features=np.stack([obs.features for obs in observations]),
            adjacency=np.stack([obs.adjacency for obs in observations]),
            mask=np.stack([obs.action_mask for obs in observations]),
            alive=~np.stack([obs.eliminated for obs in observations]),
        )

    @property
    def size(self) -> int:
        return int(self.features.shape[0])


@dataclass(frozen=True, eq=False)
class PolicyOutput:
    logits: "NDArray[np.float64]"
    masked_log_probs: "NDArray[np.float64]"
    value: float

    @property
    def probabilities(self) -> "NDArray[np.float64]":
        return np.exp(self.masked_log_probs)


@dataclass
class _Trace:
    a_hat: "NDArray[np.float64]"
    ax: "NDArray[np.float64]"
    h1: "NDArray[np.float64]"
    ah1: "NDArray[np.float64]"
    h2: "NDArray[np.float64]"
    pool_weights: "NDArray[np.float64]"
    activations: list["NDArray[np.float64]"]
    logits: "NDArray[np.float64]"
    log_probs: "NDArray[np.float64]"
    values: "NDArray[np.float64]"


def masked_log_softmax(
    logits: "NDArray[np.float64]", mask: "NDArray[np.bool_]"
) -> "NDArray[np.float64]":
    """Log-softmax over allowed entries; ``-inf`` elsewhere (rows with none allowed are all ``-inf``)."""
    has_action = mask.any(axis=-1, keepdims=True)
    usable = mask | ~has_action
    shifted = np.where(usable, logits, -np.inf)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return np.where(mask, shifted - log_norm, -np.inf)


def masked_entropy(
    log_probs: "NDArray[np.float64]", mask: "NDArray[np.bool_]"
) -> "NDArray[np.float64]":
    safe = np.where(mask, log_probs, 0.0)
    return -(np.exp(log_probs) * safe).sum(axis=-1)


def _check_batch(params: PolicyParams, batch: GraphBatch) -> None:
    b, n, f = batch.features.shape
    if f != params.feature_dim or batch.adjacency.shape != (b, n, n):
        msg = (
            f"Batch shapes features={batch.features.shape}, "
            f"adjacency={batch.adjacency.shape} do not fit feature_dim={params.feature_dim}"
        )
        raise ConfigurationError(msg)


def _forward(params: PolicyParams, batch: GraphBatch) -> _Trace:
    _check_batch(params, batch)
    t = params.tensors
    n = batch.features.shape[1]
    a_hat = batch.adjacency.astype(np.float64) + np.eye(n)
    a_hat /= a_hat.sum(axis=-1, keepdims=True)

    ax = a_hat @ batch.features
    h1 = np.tanh(ax @ t["gcn.w1"])
    ah1 = a_hat @ h1
    h2 = np.tanh(ah1 @ t["gcn.w2"])
    logits = h2 @ t["score.w"] + t["score.b"][0]

    alive = batch.alive.astype(np.float64)
    pool_weights = alive / np.maximum(alive.sum(axis=1, keepdims=True), 1.0)
    hidden = np.einsum("bn,bnd->bd", pool_weights, h2)
    activations = [hidden]
    depth = len(params.policy_sizes)
    for k in range(depth):
        hidden = np.tanh(hidden @ t[f"value.w{k}"] + t[f"value.b{k}"])
        activations.append(hidden)
    values = (hidden @ t[f"value.w{depth}"])[:, 0] + t[f"value.b{depth}"][0]

    return _Trace(
        a_hat=a_hat,
        ax=ax,
        h1=h1,
        ah1=ah1,
        h2=h2,
        pool_weights=pool_weights,
        activations=activations,
        logits=logits,
        log_probs=masked_log_softmax(logits, batch.mask),
        values=values,
    )


def forward_batch(
    params: PolicyParams, batch: GraphBatch
) -> tuple["NDArray[np.float64]", "NDArray[np.float64]", "NDArray[np.float64]"]:
    """Return ``(logits, masked_log_probs, values)`` for a stacked batch."""
    trace = _forward(params, batch)
    return trace.logits, trace.log_probs, trace.values


def forward(params: PolicyParams, obs: Observation) -> PolicyOutput:
    trace = _forward(params, GraphBatch.stack([obs]))
    return PolicyOutput(
        logits=trace.logits[0],
        masked_log_probs=trace.log_probs[0],
        value=float(trace.values[0]),
    )


def sample_action(
    out: PolicyOutput, rng: np.random.Generator, *, greedy: bool = False
) -> tuple[int, float]:
    """Draw an action from the masked distribution (or take its argmax).

    Greedy ties go to the lowest vertex id.

    Raises:
        ContractViolationError: If every action is masked.
    """
    log_probs = out.masked_log_probs
    allowed = np.flatnonzero(np.isfinite(log_probs))
    if allowed.size == 0:
        msg = "Cannot sample: every action is masked"
        raise ContractViolationError(msg)
    if greedy:
        action = int(np.argmax(log_probs))
        return action, float(log_probs[action])
    cumulative = np.cumsum(np.exp(log_probs[allowed]))
    pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    action = int(allowed[min(pick, allowed.size - 1)])
    return action, float(log_probs[action])


def backward_trace(
    params: PolicyParams,
    trace: _Trace,
    d_logits: "NDArray[np.float64]",
    d_values: "NDArray[np.float64]",
    grads: Tensors,
) -> None:
    """Accumulate parameter gradients into ``grads`` given output gradients."""
    t = params.tensors
    depth = len(params.policy_sizes)
    acts = trace.activations

    grads[f"value.w{depth}"] += acts[depth].T @ d_values[:, None]
    grads[f"value.b{depth}"] += d_values.sum()
    d_hidden = d_values[:, None] * t[f"value.w{depth}"][:, 0]
    for k in reversed(range(depth)):
        d_pre = d_hidden * (1.0 - acts[k + 1] ** 2)
        grads[f"value.w{k}"] += acts[k].T @ d_pre
        grads[f"value.b{k}"] += d_pre.sum(axis=0)
        d_hidden = d_pre @ t[f"value.w{k}"].T

    grads["score.w"] += np.einsum("bnd,bn->d", trace.h2, d_logits)
    grads["score.b"] += d_logits.sum()
    d_h2 = d_logits[:, :, None] * t["score.w"]
    d_h2 += trace.pool_weights[:, :, None] * d_hidden[:, None, :]

    d_z2 = d_h2 * (1.0 - trace.h2**2)
    grads["gcn.w2"] += np.einsum("bni,bnj->ij", trace.ah1, d_z2)
    d_h1 = np.swapaxes(trace.a_hat, 1, 2) @ (d_z2 @ t["gcn.w2"].T)
    d_z1 = d_h1 * (1.0 - trace.h1**2)
    grads["gcn.w1"] += np.einsum("bni,bnj->ij", trace.ax, d_z1)


@dataclass(frozen=True)
class LossSpec:
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    ent_coef: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.clip_epsilon < 1.0:
            msg = f"clip_epsilon must lie in (0, 1), got {self.clip_epsilon}"
            raise ConfigurationError(msg)
        if self.value_coef < 0 or self.ent_coef < 0:
            msg = "Loss coefficients must be nonnegative"
            raise ConfigurationError(msg)


@dataclass(frozen=True, eq=False)
class SampleGroup:
    """Same-size transitions of a minibatch."""

    graphs: GraphBatch
    actions: "NDArray[np.int64]"
    old_log_probs: "NDArray[np.float64]"
    advantages: "NDArray[np.float64]"
    returns: "NDArray[np.float64]"


@dataclass(frozen=True, eq=False)
class PPOBatch:
    groups: tuple[SampleGroup, ...]

    @property
    def size(self) -> int:
        return sum(group.graphs.size for group in self.groups)


@dataclass
class LossTerms:
    """Minibatch means of the loss components and update diagnostics."""

    total: float = 0.0
    policy_loss: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    approx_kl: float = 0.0
    clip_fraction: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "total": self.total,
            "policy_loss": self.policy_loss,
            "value_loss": self.value_loss,
            "entropy": self.entropy,
            "approx_kl": self.approx_kl,
            "clip_fraction": self.clip_fraction,
        }


def _group_terms(
    params: PolicyParams,
    group: SampleGroup,
    spec: LossSpec,
    scale: float,
    grads: Tensors | None,
) -> "NDArray[np.float64]":
    trace = _forward(params, group.graphs)
    rows = np.arange(group.graphs.size)
    chosen = trace.log_probs[rows, group.actions]
    ratio = np.exp(chosen - group.old_log_probs)
    clipped = np.clip(ratio, 1.0 - spec.clip_epsilon, 1.0 + spec.clip_epsilon)
    surrogate = ratio * group.advantages
    unclipped = surrogate <= clipped * group.advantages
    objective = np.minimum(surrogate, clipped * group.advantages)
    entropy = masked_entropy(trace.log_probs, group.graphs.mask)
    value_error = trace.values - group.returns

    if grads is not None:
        probs = np.exp(trace.log_probs)
        safe_log_probs = np.where(group.graphs.mask, trace.log_probs, 0.0)
        one_hot = np.zeros_like(probs)
        one_hot[rows, group.actions] = 1.0
        d_chosen = -scale * np.where(unclipped, surrogate, 0.0)
        d_logits = d_chosen[:, None] * (one_hot - probs)
        d_logits += spec.ent_coef * scale * probs * (safe_log_probs + entropy[:, None])
        d_values = spec.value_coef * scale * 2.0 * value_error
        backward_trace(params, trace, d_logits, d_values, grads)

    return np.array([
        -objective.sum(),
        (value_error**2).sum(),
        entropy.sum(),
        (group.old_log_probs - chosen).sum(),
        float(np.count_nonzero(np.abs(ratio - 1.0) > spec.clip_epsilon)),
    ])


def _loss(
    params: PolicyParams, batch: PPOBatch, spec: LossSpec, grads: Tensors | None
) -> LossTerms:
    size = batch.size
    if size == 0:
        return LossTerms()
    scale = 1.0 / size
    sums = sum(
        (_group_terms(params, group, spec, scale, grads) for group in batch.groups),
        start=np.zeros(5),
    )
    policy_loss, value_loss, entropy, approx_kl, clip_fraction = sums * scale
    return LossTerms(
        total=float(policy_loss + spec.value_coef * value_loss - spec.ent_coef * entropy),
        policy_loss=float(policy_loss),
        value_loss=float(value_loss),
        entropy=float(entropy),
        approx_kl=float(approx_kl),
        clip_fraction=float(clip_fraction),
    )


def ppo_loss(params: PolicyParams, batch: PPOBatch, spec: LossSpec) -> LossTerms:
    """PPO loss: clipped surrogate + value_coef·MSE − ent_coef·entropy."""
    return _loss(params, batch, spec, None)


def backward(
    params: PolicyParams, batch: PPOBatch, spec: LossSpec
) -> tuple[LossTerms, Tensors]:
    """Loss terms and the exact gradient of ``total`` for every parameter tensor."""
    grads = params.zeros_like()
    terms = _loss(params, batch, spec, grads)
    return terms, grads
