"""
C'(1/6) small cancellation groups.

The word problem is solved by Dehn's algorithm. Canonical words are shortlex
geodesics, found through an atlas grown breadth-first from the identity and
bucketed by the exponent-sum invariants of the presentation.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, List, Sequence, Set, Tuple

import structlog

from fatou_lab.core.exceptions import BudgetExceeded, SmallCancellationViolation
from fatou_lab.core.schemas import GroupSpec
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)


class SmallCancellationGroup(GroupBackend):

    def __init__(self, spec: GroupSpec, element_budget: int = 250_000):
        super().__init__(spec, list(spec.generators))
        self.element_budget = element_budget
        self.relators: List[Word] = []
        for text in spec.relators:
            r = self._cyclically_reduce(self.free_reduce(self.parse_word(text)))
            if not r:
                raise SmallCancellationViolation(f"Relator '{text}' is trivial in the free group")
            self.relators.append(tuple(r))
        self.symmetrized: List[Word] = self._symmetrize(self.relators)
        self._check_small_cancellation()
        self._dehn_table, self._dehn_lengths = self._build_dehn_table()
        self._invariant_generators = self._exponent_invariants()

        # Atlas of canonical words, by sphere
        self._layers: List[List[Word]] = [[()]]
        self._buckets: Dict[Tuple[int, Tuple[int, ...]], List[Word]] = defaultdict(list)
        self._buckets[(0, self._key(()))].append(())
        self._known: Set[Word] = {()}
        self._step: Dict[Tuple[Word, int], Word] = {}

        logger.info("Small cancellation group ready",
                    group=self.name, relators=len(self.relators),
                    symmetrized=len(self.symmetrized))

    @property
    def name(self) -> str:
        return self.spec.label

    @property
    def elementary(self) -> bool:
        return len(self.generator_names) < 2

    # ========== PRESENTATION ==========

    def _cyclically_reduce(self, w: List[int]) -> List[int]:
        inv = self.inverse_letter
        while len(w) >= 2 and w[0] == inv[w[-1]]:
            w = w[1:-1]
        return w

    def _symmetrize(self, relators: List[Word]) -> List[Word]:
        inv = self.inverse_letter
        out: Set[Word] = set()
        for r in relators:
            r_inv = tuple(inv[letter] for letter in reversed(r))
            for word in (r, r_inv):
                for i in range(len(word)):
                    out.add(word[i:] + word[:i])
        return sorted(out)

    def _check_small_cancellation(self) -> None:
        """Every piece must be shorter than a sixth of each relator containing it"""
        rs = self.symmetrized
        for i, u in enumerate(rs):
            for v in rs[i + 1:]:
                p = 0
                while p < min(len(u), len(v)) and u[p] == v[p]:
                    p += 1
                if 6 * p >= len(u) or 6 * p >= len(v):
                    raise SmallCancellationViolation(
                        f"Piece '{self.format_word(u[:p])}' of length {p} violates C'(1/6) "
                        f"for relators of length {len(u)} and {len(v)}")

    def _build_dehn_table(self) -> Tuple[Dict[Word, Word], List[int]]:
        inv = self.inverse_letter
        table: Dict[Word, Word] = {}
        for r in self.symmetrized:
            n = len(r)
            for k in range(n // 2 + 1, n + 1):
                replacement = tuple(inv[letter] for letter in reversed(r[k:]))
                prefix = r[:k]
                if prefix not in table or len(replacement) < len(table[prefix]):
                    table[prefix] = replacement
        lengths = sorted({len(k) for k in table}, reverse=True)
        return table, lengths

    def _exponent_invariants(self) -> List[int]:
        """Generators whose exponent sum vanishes on every relator give homomorphisms to Z"""
        invariant = []
        for g in range(len(self.generator_names)):
            if all(self._exponent_sum(r, g) == 0 for r in self.relators):
                invariant.append(g)
        return invariant

    def _exponent_sum(self, w: Sequence[int], g: int) -> int:
        total = 0
        for letter in w:
            if self.generator_of[letter] == g:
                total += 1 if letter % 2 == 0 else -1
        return total

    def _key(self, w: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self._exponent_sum(w, g) for g in self._invariant_generators)

    # ========== WORD PROBLEM ==========

    def dehn_reduce(self, raw: Sequence[int]) -> Tuple[int, ...]:
        """Dehn's algorithm: replace any subword longer than half a relator by the shorter complement"""
        w = self.free_reduce(raw)
        changed = True
        while changed:
            changed = False
            for i in range(len(w)):
                for k in self._dehn_lengths:
                    if i + k > len(w):
                        continue
                    sub = tuple(w[i:i + k])
                    replacement = self._dehn_table.get(sub)
                    if replacement is not None:
                        w = self.free_reduce(w[:i] + list(replacement) + w[i + k:])
                        changed = True
                        break
                if changed:
                    break
        return tuple(w)

    def is_identity(self, raw: Sequence[int]) -> bool:
        return not self.dehn_reduce(raw)

    def equal(self, u: Sequence[int], v: Sequence[int]) -> bool:
        inv = self.inverse_letter
        return self.is_identity([inv[letter] for letter in reversed(u)] + list(v))

    # ========== ATLAS ==========

    @property
    def atlas_radius(self) -> int:
        return len(self._layers) - 1

    @property
    def atlas_size(self) -> int:
        return len(self._known)

    def _find(self, candidate: Sequence[int], layers: Sequence[int]) -> Word | None:
        key = self._key(candidate)
        for n in layers:
            for v in self._buckets.get((n, key), ()):
                if self.equal(v, candidate):
                    return v
        return None

    def extend_atlas(self, radius: int) -> None:
        """Grow the atlas sphere by sphere up to the given radius"""
        while self.atlas_radius < radius:
            n = self.atlas_radius
            layer: List[Word] = []
            for u in self._layers[n]:
                for z in self.letters:
                    if (u, z) in self._step:
                        continue
                    candidate = tuple(self.free_reduce(u + (z,)))
                    found = self._find(candidate, (n - 1, n, n + 1) if n > 0 else (0, 1))
                    if found is None:
                        found = u + (z,)
                        layer.append(found)
                        self._known.add(found)
                        self._buckets[(n + 1, self._key(found))].append(found)
                        if len(self._known) > self.element_budget:
                            raise BudgetExceeded(
                                f"Atlas of {self.name} exceeds {self.element_budget} elements at radius {n + 1}")
                    self._step[(u, z)] = found
                    self._step[(found, self.inverse_letter[z])] = u
            self._layers.append(layer)
            logger.debug("Atlas extended", group=self.name, radius=n + 1, sphere=len(layer))

    def normalize(self, raw: Sequence[int]) -> Word:
        self.check_letters(raw)
        reduced = self.dehn_reduce(raw)
        if reduced in self._known:
            return reduced
        self.extend_atlas(len(reduced))
        x: Word = ()
        for z in reduced:
            x = self._neighbor(x, z)
        return x

    def _neighbor(self, x: Word, z: int) -> Word:
        step = self._step.get((x, z))
        if step is None:
            self.extend_atlas(len(x) + 1)
            step = self._step[(x, z)]
        return step

    def multiply(self, x: Word, y: Word) -> Word:
        if x in self._known and y in self._known:
            for z in y:
                x = self._neighbor(x, z)
            return x
        return self.normalize(x + y)

    def growth_estimate(self, radius: int) -> int:
        if radius <= self.atlas_radius:
            return sum(len(layer) for layer in self._layers[: radius + 1])
        z = len(self.symbols)
        return 1 + sum(z * (z - 1) ** (n - 1) for n in range(1, radius + 1))
