from typing import List, Sequence, Tuple

from fatou_lab.core.constants import FREE_SYMBOLS
from fatou_lab.core.schemas import GroupSpec
from fatou_lab.groups.base import GroupBackend, Word


class FreeProductCyclic(GroupBackend):
    """
    Free product Z_n1 * Z_n2 * ... of cyclic groups.

    Canonical words alternate syllables g^k with k reduced mod n and written
    with the shorter of g^k and g'^(n-k) (g^k on ties), which is geodesic.
    """

    def __init__(self, spec: GroupSpec):
        self.orders: Tuple[int, ...] = tuple(spec.orders)
        if len(self.orders) > len(FREE_SYMBOLS):
            raise ValueError("too many cyclic factors")
        super().__init__(spec, list(FREE_SYMBOLS[: len(self.orders)]),
                         involutions=[n == 2 for n in self.orders])
        self._positive = [self.symbols.index(n) for n in self.generator_names]

    @property
    def name(self) -> str:
        return "fpc:" + ",".join(str(n) for n in self.orders)

    @property
    def elementary(self) -> bool:
        # Z2 * Z2 is the infinite dihedral group
        return self.orders == (2, 2)

    def _exponent(self, letter: int) -> int:
        return 1 if self._positive[self.generator_of[letter]] == letter else -1

    def normalize(self, raw: Sequence[int]) -> Word:
        self.check_letters(raw)
        # syllable stack of [generator, exponent mod order]
        syllables: List[List[int]] = []
        for letter in raw:
            g = self.generator_of[letter]
            n = self.orders[g]
            if syllables and syllables[-1][0] == g:
                syllables[-1][1] = (syllables[-1][1] + self._exponent(letter)) % n
                if syllables[-1][1] == 0:
                    syllables.pop()
            else:
                syllables.append([g, self._exponent(letter) % n])
        word: List[int] = []
        for g, k in syllables:
            n = self.orders[g]
            positive = self._positive[g]
            if 2 * k <= n:
                word += [positive] * k
            else:
                word += [self.inverse_letter[positive]] * (n - k)
        return tuple(word)

    def growth_estimate(self, radius: int) -> int:
        z = len(self.symbols)
        return 1 + sum(z * (z - 1) ** (n - 1) for n in range(1, radius + 1))
