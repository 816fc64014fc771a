"""Tests for image byte sources."""

import hashlib
import pickle

import pytest

from app.errors import ScanError
from app.image import BufferSource, MmapSource, StreamSource, image_digest, open_image


class TestOpenImage:
    def test_regular_file_is_memory_mapped(self, image_file):
        path = image_file(b"\xff\xd8\x00\x00\xff\xd9")

        with open_image(path) as image:
            assert isinstance(image, MmapSource)
            assert image.length == 6
            assert image.read(4, 2) == b"\xff\xd9"

    def test_empty_file_uses_streamed_reads(self, image_file):
        with open_image(image_file(b"")) as image:
            assert isinstance(image, StreamSource)
            assert image.length == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            open_image(tmp_path / "missing.raw")


class TestReads:
    @pytest.mark.parametrize("source_type", [MmapSource, StreamSource])
    def test_file_sources_read_exact_ranges(self, image_file, source_type):
        data = bytes(range(256)) * 4
        image = source_type(image_file(data))

        assert image.read(0, 10) == data[:10]
        assert image.read(1000, 24) == data[1000:]
        image.close()

    def test_read_past_end_raises_scan_error(self):
        with pytest.raises(ScanError) as exc_info:
            BufferSource(bytes(10)).read(8, 4)

        assert exc_info.value.start == 8
        assert exc_info.value.end == 12

    def test_negative_offset_rejected(self):
        with pytest.raises(ScanError):
            BufferSource(bytes(10)).read(-1, 2)

    def test_file_source_survives_pickling(self, image_file):
        image = MmapSource(image_file(b"abcdef"))
        image.read(0, 1)

        clone = pickle.loads(pickle.dumps(image))

        assert clone.read(2, 3) == b"cde"
        image.close()
        clone.close()


class TestDigest:
    def test_matches_hashlib(self, image_file):
        data = bytes(range(256)) * 5000

        with open_image(image_file(data)) as image:
            assert image_digest(image) == hashlib.sha256(data).hexdigest()

    def test_empty_image(self):
        assert image_digest(BufferSource(b"")) == hashlib.sha256(b"").hexdigest()
