"""
End-to-end drivers shared by the command line and the HTTP API.

carve_image runs scan -> pair -> validate -> extract -> manifest.
run_bench times scan + pair over a grid of configurations and refuses to
report if any two configurations disagree on the match set.
"""

import logging
import statistics
import time
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from app.carver import extract, pair_matches, validate_region, write_manifest
from app.config import default_workers, settings
from app.errors import InvalidArgumentError, InvariantViolation, ManifestExistsError
from app.image import image_digest, open_image
from app.models import BenchRatio, BenchReport, BenchRow, CarveManifest, ManifestHeader
from app.scanner import scan, signature_patterns
from app.search import Backend
from app.signatures import resolve_signatures

logger = logging.getLogger(__name__)


@dataclass
class CarveOutcome:
    manifest: CarveManifest
    manifest_path: Path
    match_count: int


def carve_image(
    image_path: str | Path,
    signatures: str | None = None,
    algorithm: str | None = None,
    workers: int | None = None,
    chunk_size: int | None = None,
    output_dir: str | Path | None = None,
    manifest_path: str | Path | None = None,
    extract_failed: bool = False,
    force: bool = False,
    executor: str | None = None,
) -> CarveOutcome:
    """Carve one image; unset arguments fall back to settings."""
    signature_set, label = resolve_signatures(signatures or settings.signatures)
    output_dir = Path(output_dir or settings.output_dir)
    manifest_path = Path(manifest_path) if manifest_path else output_dir / settings.manifest_name
    if manifest_path.exists() and not force:
        raise ManifestExistsError(f"manifest {manifest_path} already exists (use --force to overwrite)")

    with open_image(image_path) as image:
        matches = scan(
            image,
            signature_set,
            backend=algorithm or settings.algorithm,
            workers=default_workers() if workers is None else workers,
            chunk_size=settings.chunk_size if chunk_size is None else chunk_size,
            executor=executor or settings.executor,
        )
        regions = pair_matches(matches, signature_set, image.length)
        regions = [validate_region(region, image, signature_set) for region in regions]
        header = ManifestHeader(
            path=str(image_path),
            length=image.length,
            digest=image_digest(image),
            signature_set=label,
        )
        manifest = extract(regions, image, signature_set, output_dir, header, extract_failed=extract_failed)

    write_manifest(manifest, manifest_path, force=force)
    logger.info("Wrote manifest with %d region(s) to %s", len(manifest.records), manifest_path)
    return CarveOutcome(manifest=manifest, manifest_path=manifest_path, match_count=len(matches))


def run_bench(
    image_path: str | Path,
    algorithms: Sequence[str],
    thread_counts: Sequence[int],
    chunk_sizes: Sequence[int],
    repeat: int = 3,
    signatures: str | None = None,
    signature_counts: Sequence[int] | None = None,
    executor: str | None = None,
) -> BenchReport:
    """Time every (signature count, algorithm, workers, chunk size) combination."""
    if repeat < 1:
        raise InvalidArgumentError("repeat must be at least 1")
    signature_set, _ = resolve_signatures(signatures or settings.signatures)
    counts = list(signature_counts or [len(signature_set)])
    for count in counts:
        if not 1 <= count <= len(signature_set):
            raise InvalidArgumentError(f"signature count {count} outside 1..{len(signature_set)}")

    rows: list[BenchRow] = []
    pattern_counts: dict[int, int] = {}
    with open_image(image_path) as image:
        for count in counts:
            subset = signature_set.subset(signature_set.ids[:count])
            pattern_counts[count] = len(signature_patterns(subset)[0])
            reference: str | None = None
            for algorithm in algorithms:
                for workers in thread_counts:
                    for chunk_size in chunk_sizes:
                        durations = []
                        for _ in range(repeat):
                            started = time.perf_counter()
                            matches = scan(
                                image, subset, backend=algorithm, workers=workers,
                                chunk_size=chunk_size, executor=executor or settings.executor,
                            )
                            regions = pair_matches(matches, subset, image.length)
                            durations.append(time.perf_counter() - started)

                        serialized = matches.serialize()
                        if reference is None:
                            reference = serialized
                        elif serialized != reference:
                            raise InvariantViolation(
                                f"match set for {algorithm}/{workers} workers/{chunk_size} bytes "
                                f"differs from the first configuration"
                            )

                        duration = statistics.median(durations)
                        rows.append(
                            BenchRow(
                                algorithm=Backend(algorithm).value,
                                workers=workers,
                                chunk_size=chunk_size,
                                signature_count=count,
                                image_bytes=image.length,
                                duration_seconds=duration,
                                throughput_mb_s=image.length / 1e6 / duration if duration > 0 else 0.0,
                                match_count=len(matches),
                                region_count=len(regions),
                            )
                        )
                        logger.info(
                            "bench %s workers=%d chunk=%d sigs=%d: %.3fs (%.2f MB/s)",
                            algorithm, workers, chunk_size, count, duration, rows[-1].throughput_mb_s,
                        )

        report = BenchReport(image=str(image_path), image_length=image.length, repeat=repeat, rows=rows)

    report.ratios = _ac_versus_bm(rows, pattern_counts)
    return report


def _ac_versus_bm(rows: list[BenchRow], pattern_counts: dict[int, int]) -> list[BenchRatio]:
    by_config = {(r.algorithm, r.workers, r.chunk_size, r.signature_count): r for r in rows}
    ratios = []
    for (algorithm, workers, chunk_size, count), ac_row in by_config.items():
        if algorithm != Backend.AC.value:
            continue
        bm_row = by_config.get((Backend.BM.value, workers, chunk_size, count))
        if bm_row is None:
            continue
        ratios.append(
            BenchRatio(
                workers=workers,
                chunk_size=chunk_size,
                signature_count=count,
                pattern_count=pattern_counts[count],
                ac_seconds=ac_row.duration_seconds,
                bm_seconds=bm_row.duration_seconds,
                ac_over_bm=ac_row.duration_seconds / bm_row.duration_seconds if bm_row.duration_seconds else 0.0,
            )
        )
    return ratios
