"""
Random-access byte sources for disk images.

The scanner only ever asks for `read(offset, size)`, so in-memory buffers,
memory-mapped image files and seek/read access to raw devices share one
code path. File-backed sources reopen themselves lazily, which keeps them
picklable for process pools.
"""

import hashlib
import logging
import mmap
import os
import threading
from abc import ABC, abstractmethod
from pathlib import Path

from app.errors import ScanError

logger = logging.getLogger(__name__)

DIGEST_BLOCK = 1024 * 1024


class ImageSource(ABC):
    """A read-only, random-access view of an image."""

    name: str

    @property
    @abstractmethod
    def length(self) -> int: ...

    @abstractmethod
    def _read(self, offset: int, size: int) -> bytes: ...

    def read(self, offset: int, size: int) -> bytes:
        """Read exactly `size` bytes at `offset`, raising ScanError otherwise."""
        end = offset + size
        if offset < 0 or size < 0 or end > self.length:
            raise ScanError(offset, end, f"outside image of {self.length} bytes")
        try:
            data = self._read(offset, size)
        except (OSError, ValueError) as e:
            raise ScanError(offset, end, str(e)) from e
        if len(data) != size:
            raise ScanError(offset, end, f"short read of {len(data)} bytes")
        return data

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class BufferSource(ImageSource):
    def __init__(self, data: bytes, name: str = "<memory>"):
        self._data = bytes(data)
        self.name = name

    @property
    def length(self) -> int:
        return len(self._data)

    def _read(self, offset: int, size: int) -> bytes:
        return self._data[offset : offset + size]


class _FileSource(ImageSource):
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.name = str(self.path)
        self._length = _probe_length(self.path)

    @property
    def length(self) -> int:
        return self._length

    def __getstate__(self):
        return {"path": self.path, "name": self.name, "_length": self._length}

    def __setstate__(self, state) -> None:
        self.__dict__.update(state)


class MmapSource(_FileSource):
    """Memory-mapped image file."""

    _handle = None
    _map = None

    def _ensure_open(self) -> mmap.mmap:
        if self._map is None:
            self._handle = open(self.path, "rb")
            self._map = mmap.mmap(self._handle.fileno(), 0, access=mmap.ACCESS_READ)
        return self._map

    def _read(self, offset: int, size: int) -> bytes:
        return self._ensure_open()[offset : offset + size]

    def close(self) -> None:
        if self._map is not None:
            self._map.close()
            self._map = None
        if self._handle is not None:
            self._handle.close()
            self._handle = None


class StreamSource(_FileSource):
    """Seek/read access, for raw devices and files that cannot be mapped."""

    _handle = None

    def __init__(self, path: str | Path):
        super().__init__(path)
        self._lock = threading.Lock()

    def __setstate__(self, state) -> None:
        super().__setstate__(state)
        self._lock = threading.Lock()

    def _read(self, offset: int, size: int) -> bytes:
        with self._lock:
            if self._handle is None:
                self._handle = open(self.path, "rb")
            self._handle.seek(offset)
            return self._handle.read(size)

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def _probe_length(path: Path) -> int:
    # Block devices report st_size 0, so seek to the end instead
    with open(path, "rb") as handle:
        return handle.seek(0, os.SEEK_END)


def open_image(path: str | Path) -> ImageSource:
    """Open an image file, memory-mapping it when the platform allows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")

    if path.is_file() and path.stat().st_size > 0:
        source = MmapSource(path)
        try:
            source._ensure_open()
            return source
        except (OSError, ValueError) as e:
            logger.debug("mmap of %s failed (%s), falling back to streamed reads", path, e)
            source.close()
    return StreamSource(path)


def image_digest(source: ImageSource) -> str:
    """SHA-256 of the whole image, read in blocks."""
    hasher = hashlib.sha256()
    offset = 0
    while offset < source.length:
        size = min(DIGEST_BLOCK, source.length - offset)
        hasher.update(source.read(offset, size))
        offset += size
    return hasher.hexdigest()
