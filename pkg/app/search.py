"""
String search backends used by the scanner.

Four interchangeable ways to find every (possibly overlapping) occurrence
of byte patterns in a buffer:

- brute force: checks every alignment, kept as the oracle for the others
- Knuth-Morris-Pratt: prefix-function table, never re-reads a text byte
- Boyer-Moore: bad-character + good-suffix shifts, compares right to left
- Aho-Corasick: goto/failure/output automaton, one pass for all patterns

All backends report occurrence start offsets sorted by (offset, pattern id).
"""

import logging
from abc import ABC, abstractmethod
from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from operator import attrgetter

from app.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

ALPHABET_SIZE = 256


class Backend(str, Enum):
    BRUTE = "brute"
    KMP = "kmp"
    BM = "bm"
    AC = "ac"


@dataclass(frozen=True)
class Pattern:
    id: str
    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) < 1:
            raise InvalidArgumentError(f"pattern {self.id!r} is empty")


@dataclass(frozen=True)
class Occurrence:
    pattern_id: str
    offset: int


_occurrence_order = attrgetter("offset", "pattern_id")


def sort_occurrences(occurrences: list[Occurrence]) -> list[Occurrence]:
    occurrences.sort(key=_occurrence_order)
    return occurrences


class CountingText:
    """Byte sequence wrapper that counts every text byte read through it."""

    def __init__(self, data: bytes):
        self._data = data
        self.reads = 0

    def __len__(self) -> int:
        return len(self._data)

    def __getitem__(self, index):
        value = self._data[index]
        self.reads += len(value) if isinstance(index, slice) else 1
        return value

    def __iter__(self) -> Iterator[int]:
        for byte in self._data:
            self.reads += 1
            yield byte


# Brute force


def brute_force_find_all(pattern: Pattern, text: Sequence[int]) -> list[Occurrence]:
    data = pattern.data
    m = len(data)
    return [
        Occurrence(pattern.id, i)
        for i in range(len(text) - m + 1)
        if text[i : i + m] == data
    ]


# Knuth-Morris-Pratt


@dataclass(frozen=True)
class KmpTable:
    pattern: Pattern
    prefix_function: tuple[int, ...]


def kmp_build(pattern: Pattern) -> KmpTable:
    data = pattern.data
    prefix = [0] * len(data)
    k = 0
    for i in range(1, len(data)):
        while k and data[i] != data[k]:
            k = prefix[k - 1]
        if data[i] == data[k]:
            k += 1
        prefix[i] = k
    return KmpTable(pattern=pattern, prefix_function=tuple(prefix))


def kmp_find_all(table: KmpTable, text: Sequence[int]) -> list[Occurrence]:
    data = table.pattern.data
    prefix = table.prefix_function
    m = len(data)
    pid = table.pattern.id
    found: list[Occurrence] = []
    k = 0
    for pos, byte in enumerate(text):
        while k and byte != data[k]:
            k = prefix[k - 1]
        if byte == data[k]:
            k += 1
            if k == m:
                found.append(Occurrence(pid, pos - m + 1))
                k = prefix[k - 1]
    return found


# Boyer-Moore


def _suffixes(data: bytes) -> list[int]:
    # suff[i] = length of the longest common suffix of data[:i+1] and data
    m = len(data)
    suff = [0] * m
    suff[m - 1] = m
    g = m - 1
    f = 0
    for i in range(m - 2, -1, -1):
        if i > g and suff[i + m - 1 - f] < i - g:
            suff[i] = suff[i + m - 1 - f]
        else:
            if i < g:
                g = i
            f = i
            while g >= 0 and data[g] == data[g + m - 1 - f]:
                g -= 1
            suff[i] = f - g
    return suff


def _good_suffix_shifts(data: bytes) -> list[int]:
    m = len(data)
    suff = _suffixes(data)
    shifts = [m] * m
    j = 0
    for i in range(m - 1, -1, -1):
        if suff[i] == i + 1:
            while j < m - 1 - i:
                if shifts[j] == m:
                    shifts[j] = m - 1 - i
                j += 1
    for i in range(m - 1):
        shifts[m - 1 - suff[i]] = m - 1 - i
    return shifts


@dataclass(frozen=True)
class BmTables:
    """
    Boyer-Moore shift tables.

    bad_character_shift holds the distance from each byte's last occurrence
    (excluding the final position) to the pattern end; bytes missing from
    the map shift the full pattern length. good_suffix_shift[j] is the
    shift after a mismatch at pattern position j; index 0 doubles as the
    shift after a full match.
    """

    pattern: Pattern
    bad_character_shift: dict[int, int]
    good_suffix_shift: tuple[int, ...]
    bad_character_row: tuple[int, ...] = field(repr=False, compare=False)

    def shift_for(self, byte: int) -> int:
        return self.bad_character_row[byte]


def bm_build(pattern: Pattern) -> BmTables:
    data = pattern.data
    m = len(data)
    bad = {data[i]: m - 1 - i for i in range(m - 1)}
    row = tuple(bad.get(byte, m) for byte in range(ALPHABET_SIZE))
    return BmTables(
        pattern=pattern,
        bad_character_shift=bad,
        good_suffix_shift=tuple(_good_suffix_shifts(data)),
        bad_character_row=row,
    )


def bm_find_all(tables: BmTables, text: Sequence[int]) -> list[Occurrence]:
    data = tables.pattern.data
    pid = tables.pattern.id
    m = len(data)
    n = len(text)
    good = tables.good_suffix_shift
    bad = tables.bad_character_row
    match_shift = good[0]
    found: list[Occurrence] = []

    j = 0
    while j <= n - m:
        i = m - 1
        while i >= 0:
            byte = text[j + i]
            if byte != data[i]:
                break
            i -= 1
        if i < 0:
            found.append(Occurrence(pid, j))
            j += match_shift
        else:
            j += max(good[i], bad[byte] - m + 1 + i)
    return found


# Aho-Corasick


@dataclass(frozen=True)
class Automaton:
    """
    Pattern matching machine.

    goto_fn[state] maps a byte to the next state in the keyword trie
    (state 0 is the root; the root's missing transitions loop back to 0).
    failure_fn[0] is unused. output_fn[state] holds every pattern id that
    ends at that state, including ids inherited along the failure chain.
    """

    goto_fn: tuple[dict[int, int], ...]
    failure_fn: tuple[int, ...]
    output_fn: tuple[frozenset[str], ...]
    pattern_lengths: dict[str, int]
    root_row: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def state_count(self) -> int:
        return len(self.goto_fn)

    def walk(self, data: bytes) -> int | None:
        """Follow goto transitions only, returning None if the trie has no such path."""
        state = 0
        for byte in data:
            nxt = self.goto_fn[state].get(byte)
            if nxt is None:
                return None
            state = nxt
        return state


def ac_build(patterns: Sequence[Pattern]) -> Automaton:
    if not patterns:
        raise InvalidArgumentError("Aho-Corasick needs at least one pattern")

    goto: list[dict[int, int]] = [{}]
    outputs: list[set[str]] = [set()]
    lengths: dict[str, int] = {}

    for pattern in patterns:
        if lengths.get(pattern.id, len(pattern.data)) != len(pattern.data):
            raise InvalidArgumentError(f"pattern id {pattern.id!r} used for different lengths")
        lengths[pattern.id] = len(pattern.data)
        state = 0
        for byte in pattern.data:
            nxt = goto[state].get(byte)
            if nxt is None:
                nxt = len(goto)
                goto.append({})
                outputs.append(set())
                goto[state][byte] = nxt
            state = nxt
        outputs[state].add(pattern.id)

    failure = [0] * len(goto)
    queue: deque[int] = deque()
    for child in goto[0].values():
        queue.append(child)

    while queue:
        current = queue.popleft()
        for byte, child in goto[current].items():
            queue.append(child)
            fallback = failure[current]
            while fallback and byte not in goto[fallback]:
                fallback = failure[fallback]
            failure[child] = goto[fallback].get(byte, 0)
            outputs[child] |= outputs[failure[child]]

    root_row = tuple(goto[0].get(byte, 0) for byte in range(ALPHABET_SIZE))
    automaton = Automaton(
        goto_fn=tuple(goto),
        failure_fn=tuple(failure),
        output_fn=tuple(frozenset(out) for out in outputs),
        pattern_lengths=lengths,
        root_row=root_row,
    )
    logger.debug("Built automaton: %d patterns, %d states", len(patterns), automaton.state_count)
    return automaton


def ac_find_all(automaton: Automaton, text: Sequence[int]) -> list[Occurrence]:
    goto = automaton.goto_fn
    failure = automaton.failure_fn
    outputs = automaton.output_fn
    lengths = automaton.pattern_lengths
    root_row = automaton.root_row
    found: list[Occurrence] = []

    state = 0
    for end, byte in enumerate(text):
        while state:
            nxt = goto[state].get(byte)
            if nxt is not None:
                state = nxt
                break
            state = failure[state]
        else:
            state = root_row[byte]
        out = outputs[state]
        if out:
            for pid in out:
                found.append(Occurrence(pid, end - lengths[pid] + 1))
    return sort_occurrences(found)


# Uniform multi-pattern entry point for the scanner


class Matcher(ABC):
    """Finds every occurrence of a fixed pattern list in a buffer."""

    def __init__(self, patterns: Sequence[Pattern]):
        if not patterns:
            raise InvalidArgumentError("at least one pattern is required")
        self.patterns = tuple(patterns)

    @abstractmethod
    def find_all(self, text: Sequence[int]) -> list[Occurrence]: ...


def _no_tables(pattern: Pattern) -> Pattern:
    return pattern


_SINGLE_PATTERN_BACKENDS = {
    Backend.BRUTE: (_no_tables, brute_force_find_all),
    Backend.KMP: (kmp_build, kmp_find_all),
    Backend.BM: (bm_build, bm_find_all),
}


class PerPatternMatcher(Matcher):
    """Runs a single-pattern backend once per pattern over the whole buffer."""

    def __init__(self, backend: Backend, patterns: Sequence[Pattern]):
        super().__init__(patterns)
        self.backend = backend
        build, _ = _SINGLE_PATTERN_BACKENDS[backend]
        self._compiled = [build(pattern) for pattern in self.patterns]

    def find_all(self, text: Sequence[int]) -> list[Occurrence]:
        _, search = _SINGLE_PATTERN_BACKENDS[self.backend]
        found: list[Occurrence] = []
        for compiled in self._compiled:
            found.extend(search(compiled, text))
        return sort_occurrences(found)


class AhoCorasickMatcher(Matcher):
    """Single pass over the buffer for all patterns at once."""

    def __init__(self, patterns: Sequence[Pattern]):
        super().__init__(patterns)
        self.automaton = ac_build(self.patterns)

    def find_all(self, text: Sequence[int]) -> list[Occurrence]:
        return ac_find_all(self.automaton, text)


def build_matcher(backend: Backend | str, patterns: Sequence[Pattern]) -> Matcher:
    backend = Backend(backend)
    if backend is Backend.AC:
        return AhoCorasickMatcher(patterns)
    return PerPatternMatcher(backend, patterns)
