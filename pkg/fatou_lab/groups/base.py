from __future__ import annotations

import re
import warnings
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Dict, List, Sequence, Set, Tuple

import structlog

from fatou_lab.core.constants import IDENTITY_SYMBOL, INVERSE_MARK, NOT_WITHIN_LIMIT, Unbounded
from fatou_lab.core.exceptions import ConfigurationError, NonHyperbolicWarning, UnknownGenerator
from fatou_lab.core.schemas import GroupSpec

# A group element in canonical form: letter indices into the backend's generating set
Word = Tuple[int, ...]

IDENTITY: Word = ()

logger = structlog.get_logger(__name__)

_SEPARATORS = re.compile(r"[\s·*.]+")


class GroupBackend(ABC):
    """
    Abstract base class for all group backends.

    Every backend keeps canonical words geodesic, so the word length of a
    canonical word is its distance to the identity.
    """

    def __init__(self, spec: GroupSpec, names: Sequence[str], involutions: Sequence[bool] = ()):
        self.spec = spec
        self.generator_names: List[str] = list(names)
        symbols: List[str] = []
        inverse: List[int] = []
        generator_of: List[int] = []
        involutions = list(involutions) or [False] * len(names)
        for i, name in enumerate(names):
            if name == IDENTITY_SYMBOL:
                raise ConfigurationError(f"'{IDENTITY_SYMBOL}' is reserved for the identity")
            if involutions[i]:
                inverse.append(len(symbols))
                symbols.append(name)
                generator_of.append(i)
            else:
                inverse += [len(symbols) + 1, len(symbols)]
                symbols += [name, f"{name}{INVERSE_MARK}"]
                generator_of += [i, i]
        # Z, ordered: a, a', b, b', ... (the lexicographic order on letters)
        self.symbols: List[str] = symbols
        self.inverse_letter: List[int] = inverse
        self.generator_of: List[int] = generator_of
        self._symbol_index: Dict[str, int] = {s: i for i, s in enumerate(symbols)}
        self._token = re.compile(
            "(" + "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True)) + ")"
            + f"({re.escape(INVERSE_MARK)}?)" + r"(?:\^(-?\d+))?"
        )

    @property
    @abstractmethod
    def name(self) -> str:
        """Backend name"""
        pass

    @abstractmethod
    def normalize(self, raw: Sequence[int]) -> Word:
        """Canonical normal form of a letter sequence"""
        pass

    @abstractmethod
    def growth_estimate(self, radius: int) -> int:
        """Upper estimate of |B(o, radius)|"""
        pass

    @property
    def non_hyperbolic(self) -> bool:
        return False

    @property
    def elementary(self) -> bool:
        return False

    @property
    def is_tree(self) -> bool:
        """Cayley graph is a tree (free groups on a free basis)"""
        return False

    @property
    def has_boundary(self) -> bool:
        return not (self.non_hyperbolic or self.elementary)

    @property
    def letters(self) -> range:
        return range(len(self.symbols))

    @property
    def identity(self) -> Word:
        return IDENTITY

    # ========== GROUP OPERATIONS ==========

    def check_letters(self, raw: Sequence[int]) -> None:
        n = len(self.symbols)
        for letter in raw:
            if not 0 <= letter < n:
                raise UnknownGenerator(f"Letter index {letter} is not in the generating set of {self.name}")

    def multiply(self, x: Word, y: Word) -> Word:
        return self.normalize(x + y)

    def inverse(self, x: Word) -> Word:
        inv = self.inverse_letter
        return self.normalize(tuple(inv[letter] for letter in reversed(x)))

    def neighbors(self, x: Word) -> Set[Word]:
        return {self.multiply(x, (z,)) for z in self.letters}

    def length(self, x: Word) -> int:
        return len(x)

    def distance(self, x: Word, y: Word, limit: int | None = None) -> int | Unbounded:
        d = len(self.multiply(self.inverse(x), y))
        if limit is not None and d > limit:
            return NOT_WITHIN_LIMIT
        return d

    def free_reduce(self, raw: Sequence[int]) -> List[int]:
        inv = self.inverse_letter
        stack: List[int] = []
        for letter in raw:
            if stack and stack[-1] == inv[letter]:
                stack.pop()
            else:
                stack.append(letter)
        return stack

    # ========== TEXT ==========

    def parse_word(self, text: str) -> Tuple[int, ...]:
        """Parse symbols with primed inverses and optional ^k exponents; 'e' is the identity"""
        text = text.strip()
        if text in ("", IDENTITY_SYMBOL):
            return ()
        letters: List[int] = []
        pos = 0
        compact = _SEPARATORS.sub("", text)
        while pos < len(compact):
            if compact[pos] == IDENTITY_SYMBOL and not self._token.match(compact, pos):
                pos += 1
                continue
            match = self._token.match(compact, pos)
            if match is None:
                raise UnknownGenerator(f"Unknown generator at '{compact[pos:]}' for {self.name}")
            name, primed, exponent = match.groups()
            power = int(exponent) if exponent is not None else 1
            letter = self._symbol_index[name]
            if primed:
                letter = self.inverse_letter[letter]
            if power < 0:
                letter, power = self.inverse_letter[letter], -power
            letters += [letter] * power
            pos = match.end()
        return tuple(letters)

    def word(self, text: str) -> Word:
        return self.normalize(self.parse_word(text))

    @cached_property
    def _compact_format(self) -> bool:
        return all(len(n) == 1 for n in self.generator_names)

    def format_word(self, x: Sequence[int]) -> str:
        if not x:
            return IDENTITY_SYMBOL
        sep = "" if self._compact_format else " "
        return sep.join(self.symbols[letter] for letter in x)

    # ========== HYPERBOLICITY ==========

    def require_boundary(self, operation: str) -> bool:
        """Warn when a hyperbolicity-dependent operation receives a negative-control group"""
        if self.has_boundary:
            return True
        reason = "non-hyperbolic" if self.non_hyperbolic else "elementary"
        logger.warning("Hyperbolicity-dependent operation on a negative-control group",
                       operation=operation, group=self.name, reason=reason)
        warnings.warn(f"{operation} called on {reason} group {self.name}",
                      NonHyperbolicWarning, stacklevel=3)
        return False

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"
