"""
Parallel signature scan over overlapping chunks.

The image is cut into chunks whose payloads tile it exactly. Each chunk is
read together with an overlap of (longest signature component - 1) bytes
so that a header or footer straddling a boundary is still seen whole, but
a worker only reports occurrences that *start* inside its own payload.
Every occurrence is therefore reported exactly once, and because chunks
are merged in index order the result is identical for any worker count or
chunk size.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Literal

from app.errors import InvalidArgumentError, InvariantViolation
from app.image import ImageSource
from app.search import Backend, Matcher, Pattern, build_matcher
from app.signatures import SignatureSet

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 1024 * 1024


class Role(str, Enum):
    HEADER = "header"
    FOOTER = "footer"


@dataclass(frozen=True)
class MatchEvent:
    signature_id: str
    role: Role
    offset: int

    @property
    def sort_key(self) -> tuple[int, str, str]:
        return (self.offset, self.signature_id, self.role.value)


@dataclass(frozen=True)
class MatchSet:
    """Scan result, sorted by offset then signature id then role."""

    events: tuple[MatchEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def offsets(self, signature_id: str, role: Role) -> list[int]:
        return [e.offset for e in self.events if e.signature_id == signature_id and e.role is role]

    def serialize(self) -> str:
        return "".join(f"{e.offset} {e.signature_id} {e.role.value}\n" for e in self.events)


@dataclass(frozen=True)
class ChunkSpec:
    index: int
    start: int
    payload_length: int
    overlap_length: int

    @property
    def payload_end(self) -> int:
        return self.start + self.payload_length

    @property
    def window_length(self) -> int:
        return self.payload_length + self.overlap_length


def plan_chunks(image_length: int, chunk_size: int, max_component_length: int) -> list[ChunkSpec]:
    """Tile [0, image_length) into payloads of chunk_size with boundary overlap."""
    if chunk_size < max(max_component_length, 1):
        raise InvalidArgumentError(
            f"chunk size {chunk_size} is smaller than the longest signature component "
            f"({max_component_length} bytes)"
        )
    if image_length < 0:
        raise InvalidArgumentError(f"negative image length {image_length}")

    overlap = max(max_component_length - 1, 0)
    chunks: list[ChunkSpec] = []
    for index, start in enumerate(range(0, image_length, chunk_size)):
        payload = min(chunk_size, image_length - start)
        remaining = image_length - (start + payload)
        chunks.append(ChunkSpec(index, start, payload, min(overlap, remaining)))
    return chunks


def signature_patterns(signatures: SignatureSet) -> tuple[list[Pattern], dict[str, tuple[str, Role]]]:
    """Flatten a signature set into search patterns and a pattern id -> (signature, role) map."""
    patterns: list[Pattern] = []
    roles: dict[str, tuple[str, Role]] = {}
    for sig in signatures:
        components = [(Role.HEADER, sig.header)]
        if sig.footer is not None:
            components.append((Role.FOOTER, sig.footer))
        for role, data in components:
            pattern_id = f"{sig.id}/{role.value}"
            patterns.append(Pattern(pattern_id, data))
            roles[pattern_id] = (sig.id, role)
    return patterns, roles


def scan_chunk(
    image: ImageSource,
    matcher: Matcher,
    roles: dict[str, tuple[str, Role]],
    chunk: ChunkSpec,
) -> list[MatchEvent]:
    window = image.read(chunk.start, chunk.window_length)
    events = [
        MatchEvent(*roles[occ.pattern_id], chunk.start + occ.offset)
        for occ in matcher.find_all(window)
        if occ.offset < chunk.payload_length
    ]
    events.sort(key=lambda e: e.sort_key)
    logger.debug("Chunk %d [%d, %d): %d event(s)", chunk.index, chunk.start, chunk.payload_end, len(events))
    return events


# Per-process state for the process pool; set once by the initializer
_worker_context: tuple[ImageSource, Matcher, dict[str, tuple[str, Role]]] | None = None


def _init_worker(image: ImageSource, matcher: Matcher, roles: dict[str, tuple[str, Role]]) -> None:
    global _worker_context
    _worker_context = (image, matcher, roles)


def _scan_chunk_in_worker(chunk: ChunkSpec) -> list[MatchEvent]:
    if _worker_context is None:
        raise RuntimeError("Worker not initialized")
    image, matcher, roles = _worker_context
    return scan_chunk(image, matcher, roles, chunk)


def merge_chunk_results(results: list[list[MatchEvent]]) -> MatchSet:
    """Concatenate per-chunk events in chunk order and verify global order."""
    events = [event for chunk_events in results for event in chunk_events]
    for previous, current in zip(events, events[1:]):
        if previous.sort_key >= current.sort_key:
            raise InvariantViolation(
                f"merged events out of order at offset {current.offset}: {previous} then {current}"
            )
    return MatchSet(tuple(events))


def scan(
    image: ImageSource,
    signatures: SignatureSet,
    backend: Backend | str = Backend.AC,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    executor: Literal["process", "thread"] = "process",
) -> MatchSet:
    """Find every header and footer occurrence of every signature in the image."""
    if workers < 1:
        raise InvalidArgumentError(f"worker count must be at least 1, got {workers}")
    backend = Backend(backend)
    chunks = plan_chunks(image.length, chunk_size, signatures.max_component_length)
    if not chunks or len(signatures) == 0:
        return MatchSet()

    patterns, roles = signature_patterns(signatures)
    matcher = build_matcher(backend, patterns)
    workers = min(workers, len(chunks))

    logger.info(
        "Scanning %s (%d bytes): backend=%s patterns=%d chunks=%d workers=%d",
        image.name, image.length, backend.value, len(patterns), len(chunks), workers,
    )
    started = time.perf_counter()

    if workers == 1:
        results = [scan_chunk(image, matcher, roles, chunk) for chunk in chunks]
    elif executor == "thread":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(partial(scan_chunk, image, matcher, roles), chunks))
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(image, matcher, roles),
        ) as pool:
            batch = max(1, len(chunks) // (workers * 4))
            results = list(pool.map(_scan_chunk_in_worker, chunks, chunksize=batch))

    match_set = merge_chunk_results(results)
    logger.info("Scan found %d event(s) in %.3fs", len(match_set), time.perf_counter() - started)
    return match_set
