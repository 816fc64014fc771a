"""Tests for synthetic image generation and evaluation."""

import hashlib
import json

import pytest

from app.carver import pair_matches
from app.corpus import evaluate, generate_image, read_truth, write_truth
from app.errors import ImageMismatchError, PackingError
from app.image import BufferSource
from app.models import CarveManifest, GroundTruth, ManifestHeader, ManifestRecord, TruthRecord
from app.scanner import Role, scan
from app.signatures import builtin_paper_set


def planted_keys(truth):
    return {(r.signature_id, r.start, r.end) for r in truth.planted}


def manifest_for(truth, regions, extracted=True):
    header = ManifestHeader(path="img.raw", length=truth.image_length, digest=truth.digest, signature_set="paper")
    records = [
        ManifestRecord(
            signature_id=sig,
            start=start,
            end=end,
            length=end - start,
            method="header_footer",
            validation="not_applicable",
            output_file=f"{start:012d}.bin" if extracted else None,
            digest="0" * 64,
        )
        for sig, start, end in regions
    ]
    return CarveManifest(header=header, records=records)


def fifty_planted():
    planted = [TruthRecord(signature_id="jpeg", start=i * 100, end=i * 100 + 50) for i in range(50)]
    return GroundTruth(image_length=10_000, seed=1, digest="ab" * 32, planted=planted)


class TestGenerateImage:
    """Test planting, sanitization and determinism."""

    def test_single_small_jpeg(self, paper_set):
        jpeg_only = paper_set.subset(["jpeg"])

        image, truth = generate_image(jpeg_only, 1, (6, 6), 16, seed=3)

        assert len(image) == 16
        assert len(truth.planted) == 1
        record = truth.planted[0]
        assert record.signature_id == "jpeg"
        assert record.end - record.start == 6
        planted = image[record.start : record.end]
        assert planted[:2] == b"\xff\xd8"
        assert planted[-2:] == b"\xff\xd9"

    def test_no_files_is_all_filler(self, paper_set):
        image, truth = generate_image(paper_set, 0, (10, 100), 4096, seed=1)

        assert len(image) == 4096
        assert truth.planted == []
        assert len(scan(BufferSource(image), paper_set)) == 0

    def test_same_seed_is_bit_identical(self, footered_set):
        first, first_truth = generate_image(footered_set, 50, (512, 8192), 1024 * 1024, seed=42)
        second, second_truth = generate_image(footered_set, 50, (512, 8192), 1024 * 1024, seed=42)

        assert first == second
        assert first_truth == second_truth

    def test_different_seed_differs(self, footered_set):
        first, _ = generate_image(footered_set, 5, (64, 256), 8192, seed=1)
        second, _ = generate_image(footered_set, 5, (64, 256), 8192, seed=2)

        assert first != second

    def test_planted_files_are_disjoint_and_sorted(self, canonical_set):
        _, truth = generate_image(canonical_set, 40, (30, 600), 64 * 1024, seed=8)

        for previous, current in zip(truth.planted, truth.planted[1:]):
            assert previous.end < current.start

    def test_only_planted_components_remain(self, footered_set):
        """Scanning a sanitized image finds exactly the planted headers and footers."""
        image, truth = generate_image(footered_set, 30, (16, 2048), 128 * 1024, seed=13)

        found = {(e.signature_id, e.role, e.offset) for e in scan(BufferSource(image), footered_set)}

        expected = set()
        for record in truth.planted:
            footer = footered_set.get(record.signature_id).footer
            expected.add((record.signature_id, Role.HEADER, record.start))
            expected.add((record.signature_id, Role.FOOTER, record.end - len(footer)))
        assert found == expected

    def test_scan_and_pair_recover_planted_files(self, footered_set):
        image, truth = generate_image(footered_set, 50, (64, 4096), 512 * 1024, seed=21)

        regions = pair_matches(scan(BufferSource(image), footered_set), footered_set, len(image))

        assert {(r.signature_id, r.start, r.end) for r in regions} == planted_keys(truth)

    def test_ole_mark_planted_for_doc(self, canonical_set):
        doc_only = canonical_set.subset(["doc"])

        image, truth = generate_image(doc_only, 4, (16, 200), 4096, seed=4)

        for record in truth.planted:
            assert record.end - record.start >= 30
            assert image[record.start + 28 : record.start + 30] == b"\xfe\xff"
            assert doc_only.get("doc").validate(image[record.start : record.end]) is True

    def test_digest_recorded(self, paper_set):
        image, truth = generate_image(paper_set, 2, (10, 20), 200, seed=0)

        assert truth.digest == hashlib.sha256(image).hexdigest()
        assert truth.seed == 0
        assert truth.filler == "sanitized"

    def test_cannot_pack(self, canonical_set):
        with pytest.raises(PackingError):
            generate_image(canonical_set, 1000, (512, 65536), 1024, seed=0)

    def test_no_size_fits_signature(self):
        tiny = builtin_paper_set(max_file_size=100)

        with pytest.raises(PackingError):
            generate_image(tiny, 1, (512, 1024), 4096, seed=0)


class TestAdversarial:
    def test_decoys_injected_into_filler(self, footered_set):
        image, truth = generate_image(footered_set, 20, (64, 512), 64 * 1024, seed=6, adversarial=True)

        assert truth.filler == "adversarial"
        assert len(truth.decoys) == 5
        for decoy in truth.decoys:
            sig = footered_set.get(decoy.signature_id)
            data = sig.header if decoy.role == "header" else sig.footer
            assert image[decoy.offset : decoy.offset + len(data)] == data
            for record in truth.planted:
                assert not record.start <= decoy.offset < record.end

    def test_decoys_are_deterministic(self, footered_set):
        first = generate_image(footered_set, 8, (64, 512), 16 * 1024, seed=9, adversarial=True)
        second = generate_image(footered_set, 8, (64, 512), 16 * 1024, seed=9, adversarial=True)

        assert first == second

    def test_decoy_headers_become_extra_regions(self, footered_set):
        image, truth = generate_image(footered_set, 20, (64, 512), 64 * 1024, seed=6, adversarial=True)

        regions = pair_matches(scan(BufferSource(image), footered_set), footered_set, len(image))

        carved = {(r.signature_id, r.start, r.end) for r in regions}
        header_decoys = [d for d in truth.decoys if d.role == "header"]
        assert planted_keys(truth) <= carved
        assert len(carved) == len(truth.planted) + len(header_decoys)


class TestEvaluate:
    """Test precision and recall arithmetic."""

    def test_perfect_carve(self):
        truth = fifty_planted()
        manifest = manifest_for(truth, planted_keys(truth))

        report = evaluate(truth, manifest)

        assert report.precision == 1.0
        assert report.recall == 1.0
        assert report.exact == 50

    def test_nothing_carved(self):
        truth = fifty_planted()

        report = evaluate(truth, manifest_for(truth, []))

        assert report.recall == 0.0
        assert report.precision == 1.0

    def test_spurious_regions(self):
        truth = fifty_planted()
        spurious = [("gif", 9000 + i * 10, 9005 + i * 10) for i in range(5)]

        report = evaluate(truth, manifest_for(truth, sorted(planted_keys(truth)) + spurious))

        assert report.precision == pytest.approx(50 / 55)
        assert report.recall == 1.0
        assert report.carved == 55

    def test_partial_counts_right_start_wrong_end(self):
        truth = fifty_planted()
        regions = [("jpeg", 0, 70)] + [("jpeg", r.start, r.end) for r in truth.planted[1:]]

        report = evaluate(truth, manifest_for(truth, regions))

        assert report.exact == 49
        assert report.partial == 1
        assert report.recall == pytest.approx(49 / 50)

    def test_unextracted_records_not_counted(self):
        truth = fifty_planted()

        report = evaluate(truth, manifest_for(truth, planted_keys(truth), extracted=False))

        assert report.carved == 0
        assert report.recall == 0.0

    def test_empty_truth_and_empty_manifest(self):
        truth = GroundTruth(image_length=10, seed=0)

        report = evaluate(truth, manifest_for(truth, []))

        assert (report.precision, report.recall) == (1.0, 1.0)

    def test_identity_mismatch(self):
        truth = fifty_planted()
        manifest = manifest_for(truth, [])
        manifest.header.length = 9_999

        with pytest.raises(ImageMismatchError):
            evaluate(truth, manifest)

    def test_digest_mismatch(self):
        truth = fifty_planted()
        manifest = manifest_for(truth, [])
        manifest.header.digest = "cd" * 32

        with pytest.raises(ImageMismatchError):
            evaluate(truth, manifest)

    def test_summary_line(self):
        truth = fifty_planted()
        report = evaluate(truth, manifest_for(truth, planted_keys(truth)))

        assert report.summary() == "precision=1.000 recall=1.000 exact=50 partial=0"


class TestTruthFile:
    def test_round_trip(self, footered_set, tmp_path):
        _, truth = generate_image(footered_set, 6, (64, 512), 8192, seed=2, adversarial=True)

        path = write_truth(truth, tmp_path / "truth.jsonl")

        assert read_truth(path) == truth

    def test_layout(self, footered_set, tmp_path):
        _, truth = generate_image(footered_set, 3, (64, 512), 8192, seed=2)

        lines = write_truth(truth, tmp_path / "truth.jsonl").read_text().splitlines()

        header = json.loads(lines[0])
        assert set(header) == {"image_length", "seed", "digest", "filler", "decoys"}
        assert [json.loads(line) for line in lines[1:]] == [r.model_dump() for r in truth.planted]
