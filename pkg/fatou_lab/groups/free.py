from typing import Sequence

from fatou_lab.core.constants import FREE_SYMBOLS
from fatou_lab.core.schemas import GroupSpec
from fatou_lab.groups.base import GroupBackend, Word


class FreeGroup(GroupBackend):
    """Free group F_k on a free basis; canonical words are freely reduced"""

    def __init__(self, spec: GroupSpec):
        if spec.rank > len(FREE_SYMBOLS):
            raise ValueError(f"rank {spec.rank} exceeds the {len(FREE_SYMBOLS)} available symbols")
        super().__init__(spec, list(FREE_SYMBOLS[: spec.rank]))
        self.rank = spec.rank

    @property
    def name(self) -> str:
        return f"free:{self.rank}"

    @property
    def is_tree(self) -> bool:
        return True

    def normalize(self, raw: Sequence[int]) -> Word:
        self.check_letters(raw)
        return tuple(self.free_reduce(raw))

    def multiply(self, x: Word, y: Word) -> Word:
        # x and y are already reduced: only the seam can cancel
        inv = self.inverse_letter
        i = 0
        n = min(len(x), len(y))
        while i < n and x[len(x) - 1 - i] == inv[y[i]]:
            i += 1
        return x[: len(x) - i] + y[i:]

    def inverse(self, x: Word) -> Word:
        inv = self.inverse_letter
        return tuple(inv[letter] for letter in reversed(x))

    def growth_estimate(self, radius: int) -> int:
        if radius <= 0:
            return 1
        z = 2 * self.rank
        return 1 + z * ((z - 1) ** radius - 1) // (z - 2)
