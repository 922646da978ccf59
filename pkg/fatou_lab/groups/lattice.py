from math import comb
from typing import List, Sequence, Tuple

from fatou_lab.core.constants import FREE_SYMBOLS
from fatou_lab.core.schemas import GroupSpec
from fatou_lab.groups.base import GroupBackend, Word


class Lattice(GroupBackend):
    """
    Z^d with the standard basis. Negative control: Z^d is not hyperbolic for
    d >= 2 and is elementary for d = 1.

    Canonical words are sorted letter multisets, i.e. integer vectors.
    """

    def __init__(self, spec: GroupSpec):
        self.dimension = spec.dimension
        super().__init__(spec, list(FREE_SYMBOLS[: self.dimension]))

    @property
    def name(self) -> str:
        return f"lattice:{self.dimension}"

    @property
    def non_hyperbolic(self) -> bool:
        return self.dimension >= 2

    @property
    def elementary(self) -> bool:
        return self.dimension == 1

    def vector(self, x: Sequence[int]) -> Tuple[int, ...]:
        v = [0] * self.dimension
        for letter in x:
            v[letter // 2] += 1 if letter % 2 == 0 else -1
        return tuple(v)

    def from_vector(self, v: Sequence[int]) -> Word:
        word: List[int] = []
        for i, c in enumerate(v):
            word += [2 * i if c > 0 else 2 * i + 1] * abs(c)
        return tuple(word)

    def normalize(self, raw: Sequence[int]) -> Word:
        self.check_letters(raw)
        return self.from_vector(self.vector(raw))

    def growth_estimate(self, radius: int) -> int:
        d = self.dimension
        return sum(2 ** k * comb(d, k) * comb(radius, k) for k in range(min(d, radius) + 1))
