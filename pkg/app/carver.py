"""
Header/footer carving.

Every header event becomes exactly one candidate region. A header is
closed by the nearest footer of the same type that starts after the
header bytes and keeps the region within the type's max file size;
failing that, the region runs for max file size, clipped at the image
end and at the next header of the same type. Footers may close several
headers (embedded thumbnails share their parent's footer).
"""

import hashlib
import logging
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from app.config import settings
from app.errors import ManifestExistsError
from app.image import ImageSource
from app.models import CarveManifest, ManifestHeader, ManifestRecord
from app.scanner import MatchSet, Role
from app.signatures import SignatureSet

logger = logging.getLogger(__name__)


class CarveMethod(str, Enum):
    HEADER_FOOTER = "header_footer"
    HEADER_MAX_SIZE = "header_max_size"


class Validation(str, Enum):
    NOT_APPLICABLE = "not_applicable"
    PASSED = "passed"
    FAILED = "failed"


@dataclass(frozen=True)
class CarveRegion:
    signature_id: str
    start: int
    end: int  # exclusive
    method: CarveMethod
    validation: Validation = Validation.NOT_APPLICABLE

    @property
    def length(self) -> int:
        return self.end - self.start


def _region_order(region: CarveRegion) -> tuple[int, str, int]:
    return (region.start, region.signature_id, region.end)


def pair_matches(matches: MatchSet, signatures: SignatureSet, image_length: int) -> list[CarveRegion]:
    """Turn header/footer events into one carve region per header."""
    headers: dict[str, list[int]] = defaultdict(list)
    footers: dict[str, list[int]] = defaultdict(list)
    for event in matches:
        (headers if event.role is Role.HEADER else footers)[event.signature_id].append(event.offset)

    regions: list[CarveRegion] = []
    for sig in signatures:
        sig_headers = headers.get(sig.id, [])
        sig_footers = footers.get(sig.id, [])
        header_len = len(sig.header)

        for index, start in enumerate(sig_headers):
            nearest = bisect_left(sig_footers, start + header_len)
            if nearest < len(sig_footers):
                end = sig_footers[nearest] + sig.footer_length
                if end - start <= sig.max_file_size:
                    regions.append(CarveRegion(sig.id, start, end, CarveMethod.HEADER_FOOTER))
                    continue

            length = min(sig.max_file_size, image_length - start)
            if index + 1 < len(sig_headers):
                length = min(length, sig_headers[index + 1] - start)
            length = max(length, header_len)
            regions.append(CarveRegion(sig.id, start, start + length, CarveMethod.HEADER_MAX_SIZE))

    regions.sort(key=_region_order)
    logger.debug("Paired %d event(s) into %d region(s)", len(matches), len(regions))
    return regions


def validate_region(
    region: CarveRegion,
    image: ImageSource,
    signatures: SignatureSet,
    window: int | None = None,
) -> CarveRegion:
    """Apply the signature's deep validator to the region's leading bytes."""
    sig = signatures.get(region.signature_id)
    if sig.validator is None:
        return replace(region, validation=Validation.NOT_APPLICABLE)

    size = min(window or settings.validation_window, region.length)
    verdict = sig.validate(image.read(region.start, size))
    if not verdict:
        logger.debug("Region %s@%d failed %s validation", sig.id, region.start, sig.validator)
    return replace(region, validation=Validation.PASSED if verdict else Validation.FAILED)


def output_name(region: CarveRegion, extension: str) -> str:
    return f"{region.start:012d}.{extension}"


def extract(
    regions: list[CarveRegion],
    image: ImageSource,
    signatures: SignatureSet,
    output_dir: str | Path,
    header: ManifestHeader,
    extract_failed: bool = False,
) -> CarveManifest:
    """Write one file per region (failed regions only on request) and build the manifest."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    records: list[ManifestRecord] = []
    used_names: set[str] = set()
    for region in sorted(regions, key=_region_order):
        sig = signatures.get(region.signature_id)
        data = image.read(region.start, region.length)
        digest = hashlib.sha256(data).hexdigest()

        output_file = None
        if region.validation is not Validation.FAILED or extract_failed:
            output_file = output_name(region, sig.extension)
            if output_file in used_names:
                output_file = f"{region.start:012d}-{sig.id}.{sig.extension}"
                logger.warning("Output name collision at offset %d, writing %s", region.start, output_file)
            used_names.add(output_file)
            (output_dir / output_file).write_bytes(data)

        records.append(
            ManifestRecord(
                signature_id=region.signature_id,
                start=region.start,
                end=region.end,
                length=region.length,
                method=region.method.value,
                validation=region.validation.value,
                output_file=output_file,
                digest=digest,
            )
        )

    logger.info(
        "Extracted %d of %d region(s) to %s",
        sum(1 for r in records if r.output_file), len(records), output_dir,
    )
    return CarveManifest(header=header, records=records)


def write_manifest(manifest: CarveManifest, path: str | Path, force: bool = False) -> Path:
    """Write the manifest as JSON lines: image header first, then one record per region."""
    path = Path(path)
    if path.exists() and not force:
        raise ManifestExistsError(f"manifest {path} already exists (use --force to overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [manifest.header.model_dump_json()]
    lines.extend(record.model_dump_json() for record in manifest.records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> CarveManifest:
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"manifest {path} is empty")
    return CarveManifest(
        header=ManifestHeader.model_validate_json(lines[0]),
        records=[ManifestRecord.model_validate_json(line) for line in lines[1:]],
    )
