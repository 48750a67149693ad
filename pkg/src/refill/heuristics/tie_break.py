from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from refill.errors import ConfigurationError

TieBreakMode = Literal["lowest-id", "random"]

Picker = Callable[[Sequence[int]], int]


@dataclass(frozen=True)
class TieBreak:
    """How a greedy rule chooses among equally good vertices.

    ``lowest-id`` is deterministic; ``random`` draws from a PCG64 stream seeded
    with ``seed`` so it is deterministic given the seed.
    """

    mode: TieBreakMode = "lowest-id"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in {"lowest-id", "random"}:
            msg = f"Unknown tie-break mode: {self.mode!r}"
            raise ConfigurationError(msg)
        if self.mode == "random" and self.seed is None:
            msg = "Random tie-breaking needs a seed"
            raise ConfigurationError(msg)

    @classmethod
    def lowest_id(cls) -> "TieBreak":
        return cls("lowest-id")

    @classmethod
    def random(cls, seed: int) -> "TieBreak":
        return cls("random", seed)

    def make_picker(self) -> Picker:
        """Return a fresh picker; random pickers restart their stream on each call."""
        if self.mode == "lowest-id":
            return min

        rng = np.random.default_rng(self.seed)

        def pick(tied: Sequence[int]) -> int:
            return tied[int(rng.integers(len(tied)))]

        return pick
