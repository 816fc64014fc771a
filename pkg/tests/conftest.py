"""Pytest configuration and shared fixtures."""

import pytest

from app.signatures import builtin_canonical_set, builtin_paper_set


@pytest.fixture
def paper_set():
    """The five-entry built-in set with 10 MiB max sizes."""
    return builtin_paper_set()


@pytest.fixture
def canonical_set():
    return builtin_canonical_set()


@pytest.fixture
def footered_set(canonical_set):
    """Canonical signatures that carry a footer, so carving is exact."""
    return canonical_set.subset(["jpeg", "gif", "zip", "pdf"])


@pytest.fixture
def image_file(tmp_path):
    """Write bytes to a temporary image file and return its path."""
    def _write(data: bytes, name: str = "image.raw"):
        path = tmp_path / name
        path.write_bytes(data)
        return path
    return _write
