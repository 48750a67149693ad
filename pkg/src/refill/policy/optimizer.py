import numpy as np

from refill.errors import ConfigurationError
from refill.policy.gcn import PolicyParams, Tensors


def global_norm(grads: Tensors) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_grad_norm(grads: Tensors, max_norm: float) -> float:
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns:
        The norm before clipping.
    """
    norm = global_norm(grads)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


class Adam:
    """Adam with bias correction, updating ``PolicyParams`` tensors in place."""

    def __init__(  # type: ignore[reportMissingSuperCall]
        self,
        params: PolicyParams,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        if learning_rate <= 0:
            msg = f"learning_rate must be positive, got {learning_rate}"
            raise ConfigurationError(msg)
        self._params = params
        self.learning_rate = learning_rate
        self._beta1 = beta1
        self._beta2 = beta2
        self._eps = eps
        self._step = 0
        self._m = params.zeros_like()
        self._v = params.zeros_like()

    @property
    def step_count(self) -> int:
        return self._step

    def step(self, grads: Tensors) -> None:
        self._step += 1
        correction1 = 1.0 - self._beta1**self._step
        correction2 = 1.0 - self._beta2**self._step
        for name, tensor in self._params.tensors.items():
            g = grads[name]
            m = self._m[name]
            v = self._v[name]
            m *= self._beta1
            m += (1.0 - self._beta1) * g
            v *= self._beta2
            v += (1.0 - self._beta2) * g * g
            tensor -= (
                self.learning_rate
                * (m / correction1)
                / (np.sqrt(v / correction2) + self._eps)
            )
