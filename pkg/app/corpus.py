"""
Synthetic disk images with known contents.

Images are produced by Python's `random.Random` (MT19937) seeded with the
caller's seed, so a (seed, arguments) pair always yields the same bytes.
Planted files are contiguous: header, random body, footer. Bodies and the
filler between files are sanitized, meaning every accidental occurrence
of any header or footer in the signature set is rewritten byte by byte
until none remain. Adversarial images then inject bare headers and
footers into the filler to exercise false positives and the max-size
fallback.
"""

import hashlib
import logging
import random
from bisect import bisect_right
from pathlib import Path

from app.config import settings
from app.errors import ImageMismatchError, InvalidArgumentError, PackingError, SanitizationError
from app.models import CarveManifest, Decoy, EvaluationReport, GroundTruth, TruthRecord
from app.signatures import Signature, SignatureSet

logger = logging.getLogger(__name__)

OLE_MARK_OFFSET = 28
OLE_MARK = b"\xfe\xff"


class _Protected:
    """Sorted, disjoint byte intervals that sanitization must not touch."""

    def __init__(self, spans: list[tuple[int, int]]):
        spans = sorted(spans)
        self._starts = [s for s, _ in spans]
        self._ends = [e for _, e in spans]

    def __contains__(self, position: int) -> bool:
        i = bisect_right(self._starts, position) - 1
        return i >= 0 and position < self._ends[i]


def _find_offending(
    image: bytearray,
    components: list[bytes],
    allowed: set[tuple[int, bytes]],
    lo: int,
    hi: int,
) -> list[tuple[int, int]]:
    """Spans of component occurrences starting in [lo, hi) that were not planted."""
    spans = []
    for data in components:
        pos = image.find(data, lo)
        while pos != -1 and pos < hi:
            if (pos, data) not in allowed:
                spans.append((pos, pos + len(data)))
            pos = image.find(data, pos + 1)
    return spans


def _sanitize(
    image: bytearray,
    signatures: SignatureSet,
    allowed: set[tuple[int, bytes]],
    protected: _Protected,
    rng: random.Random,
    max_rounds: int,
) -> int:
    components = sorted({sig.header for sig in signatures} | {sig.footer for sig in signatures if sig.footer})
    longest = signatures.max_component_length
    dirty = sorted(set(_find_offending(image, components, allowed, 0, len(image))))
    repaired = 0

    for _ in range(max_rounds):
        if not dirty:
            return repaired
        windows = []
        for start, end in dirty:
            free = [p for p in range(start, end) if p not in protected]
            if not free:
                raise SanitizationError(f"occurrence at [{start}, {end}) lies entirely in planted bytes")
            for p in free:
                image[p] = rng.randrange(256)
            repaired += 1
            windows.append((max(0, start - longest + 1), end))
        dirty = sorted(
            {span for lo, hi in windows for span in _find_offending(image, components, allowed, lo, hi)}
        )

    if dirty:
        raise SanitizationError(f"{len(dirty)} stray signature(s) left after {max_rounds} rounds")
    return repaired


def _size_bounds(sig: Signature, size_range: tuple[int, int]) -> tuple[int, int]:
    low = max(size_range[0], len(sig.header) + sig.footer_length)
    if sig.validator == "ole":
        low = max(low, OLE_MARK_OFFSET + len(OLE_MARK))
    high = min(size_range[1], sig.max_file_size)
    if low > high:
        raise PackingError(f"{sig.id}: no file size fits range {size_range}")
    return low, high


def generate_image(
    signatures: SignatureSet,
    file_count: int,
    size_range: tuple[int, int],
    image_length: int,
    seed: int,
    adversarial: bool = False,
    min_gap: int = 1,
    sanitize_rounds: int | None = None,
) -> tuple[bytes, GroundTruth]:
    """Build an image with `file_count` planted files and its ground truth."""
    min_size, max_size = size_range
    if file_count < 0 or image_length < 0 or min_gap < 0:
        raise InvalidArgumentError("file count, image length and gap must be non-negative")
    if not 1 <= min_size <= max_size:
        raise InvalidArgumentError(f"invalid size range {size_range}")
    if file_count and len(signatures) == 0:
        raise InvalidArgumentError("cannot plant files without signatures")
    needed = file_count * max_size + max(file_count - 1, 0) * min_gap
    if needed > image_length:
        raise PackingError(
            f"{file_count} files of up to {max_size} bytes need {needed} bytes, image has {image_length}"
        )

    rng = random.Random(seed)
    chosen = [rng.choice(signatures.signatures) for _ in range(file_count)]
    sizes = [rng.randint(*_size_bounds(sig, size_range)) for sig in chosen]

    slack = image_length - sum(sizes) - max(file_count - 1, 0) * min_gap
    cuts = sorted(rng.randint(0, slack) for _ in range(file_count))

    image = bytearray(rng.randbytes(image_length))
    planted: list[TruthRecord] = []
    allowed: set[tuple[int, bytes]] = set()
    protected: list[tuple[int, int]] = []
    used = 0
    for i, (sig, size) in enumerate(zip(chosen, sizes)):
        start = cuts[i] + used + i * min_gap
        end = start + size
        used += size

        image[start : start + len(sig.header)] = sig.header
        allowed.add((start, sig.header))
        protected.append((start, start + len(sig.header)))
        if sig.footer is not None:
            image[end - len(sig.footer) : end] = sig.footer
            allowed.add((end - len(sig.footer), sig.footer))
            protected.append((end - len(sig.footer), end))
        if sig.validator == "ole":
            mark = start + OLE_MARK_OFFSET
            image[mark : mark + len(OLE_MARK)] = OLE_MARK
            protected.append((mark, mark + len(OLE_MARK)))
        planted.append(TruthRecord(signature_id=sig.id, start=start, end=end))

    if len(signatures):
        repaired = _sanitize(
            image, signatures, allowed, _Protected(protected), rng,
            sanitize_rounds or settings.sanitize_rounds,
        )
        logger.debug("Sanitization rewrote %d stray occurrence(s)", repaired)

    decoys = _inject_decoys(image, signatures, planted, rng) if adversarial and len(signatures) else []

    truth = GroundTruth(
        image_length=image_length,
        seed=seed,
        digest=hashlib.sha256(image).hexdigest(),
        filler="adversarial" if adversarial else "sanitized",
        planted=planted,
        decoys=decoys,
    )
    logger.info("Generated %d-byte image with %d planted file(s), %d decoy(s)", image_length, len(planted), len(decoys))
    return bytes(image), truth


def _inject_decoys(
    image: bytearray,
    signatures: SignatureSet,
    planted: list[TruthRecord],
    rng: random.Random,
) -> list[Decoy]:
    """Drop bare headers and footers into filler gaps, one byte clear of anything else."""
    gaps: list[tuple[int, int]] = []
    cursor = 0
    for record in planted:
        gaps.append((cursor, record.start))
        cursor = record.end
    gaps.append((cursor, len(image)))

    decoys: list[Decoy] = []
    for _ in range(max(1, len(planted) // 4)):
        sig = rng.choice(signatures.signatures)
        role = "footer" if sig.footer is not None and rng.random() < 0.5 else "header"
        data = sig.footer if role == "footer" else sig.header
        roomy = [i for i, (lo, hi) in enumerate(gaps) if hi - lo >= len(data) + 2]
        if not roomy:
            break
        index = rng.choice(roomy)
        lo, hi = gaps[index]
        offset = rng.randint(lo + 1, hi - len(data) - 1)
        image[offset : offset + len(data)] = data
        gaps[index : index + 1] = [(lo, offset), (offset + len(data), hi)]
        decoys.append(Decoy(signature_id=sig.id, role=role, offset=offset))
    decoys.sort(key=lambda d: (d.offset, d.signature_id))
    return decoys


def evaluate(ground_truth: GroundTruth, manifest: CarveManifest) -> EvaluationReport:
    """Score extracted regions against planted files."""
    header = manifest.header
    if header.length != ground_truth.image_length or (
        ground_truth.digest and header.digest != ground_truth.digest
    ):
        raise ImageMismatchError(
            f"manifest describes {header.path} ({header.length} bytes, {header.digest[:12]}...), "
            f"truth describes a {ground_truth.image_length}-byte image ({ground_truth.digest[:12]}...)"
        )

    planted = {(r.signature_id, r.start, r.end) for r in ground_truth.planted}
    planted_starts = {(r.signature_id, r.start) for r in ground_truth.planted}
    carved = manifest.extracted

    exact = 0
    partial = 0
    for record in carved:
        if (record.signature_id, record.start, record.end) in planted:
            exact += 1
        elif (record.signature_id, record.start) in planted_starts:
            partial += 1

    # 0/0 counts as perfect: no claims made, none wrong
    precision = exact / len(carved) if carved else 1.0
    recall = exact / len(planted) if planted else 1.0
    return EvaluationReport(
        precision=precision,
        recall=recall,
        exact=exact,
        partial=partial,
        carved=len(carved),
        planted=len(planted),
    )


def write_truth(truth: GroundTruth, path: str | Path) -> Path:
    """Header line (everything but the planted list), then one record per planted file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [truth.model_dump_json(exclude={"planted"})]
    lines.extend(record.model_dump_json() for record in truth.planted)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_truth(path: str | Path) -> GroundTruth:
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise InvalidArgumentError(f"ground truth {path} is empty")
    truth = GroundTruth.model_validate_json(lines[0])
    truth.planted = [TruthRecord.model_validate_json(line) for line in lines[1:]]
    return truth
