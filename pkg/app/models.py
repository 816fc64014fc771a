from typing import Literal

from pydantic import BaseModel, Field


class ManifestHeader(BaseModel):
    """Identity of the carved image, first line of a manifest."""
    path: str
    length: int = Field(description="Image length in bytes")
    digest: str = Field(description="SHA-256 of the whole image (64 hex chars)")
    signature_set: str = Field(description="paper, canonical, or the custom config path")


class ManifestRecord(BaseModel):
    """One carved region. Field order is the on-disk key order."""
    signature_id: str
    start: int
    end: int
    length: int
    method: Literal["header_footer", "header_max_size"]
    validation: Literal["not_applicable", "passed", "failed"]
    output_file: str | None = Field(default=None, description="Null when the region was not extracted")
    digest: str = Field(description="SHA-256 of the region bytes (64 hex chars)")


class CarveManifest(BaseModel):
    header: ManifestHeader
    records: list[ManifestRecord] = Field(default_factory=list)

    @property
    def extracted(self) -> list[ManifestRecord]:
        return [r for r in self.records if r.output_file is not None]


class TruthRecord(BaseModel):
    signature_id: str
    start: int
    end: int


class Decoy(BaseModel):
    """A bare header or footer injected into filler by adversarial generation."""
    signature_id: str
    role: Literal["header", "footer"]
    offset: int


class GroundTruth(BaseModel):
    image_length: int
    seed: int
    digest: str = ""
    filler: Literal["sanitized", "adversarial"] = "sanitized"
    planted: list[TruthRecord] = Field(default_factory=list)
    decoys: list[Decoy] = Field(default_factory=list)


class EvaluationReport(BaseModel):
    precision: float
    recall: float
    exact: int = Field(description="Carved regions matching a planted file exactly")
    partial: int = Field(description="Right signature and start, wrong end")
    carved: int
    planted: int

    def summary(self) -> str:
        return (
            f"precision={self.precision:.3f} recall={self.recall:.3f} "
            f"exact={self.exact} partial={self.partial}"
        )


class BenchRow(BaseModel):
    algorithm: str
    workers: int
    chunk_size: int
    signature_count: int
    image_bytes: int
    duration_seconds: float = Field(description="Median scan+pair wall clock")
    throughput_mb_s: float
    match_count: int
    region_count: int


class BenchRatio(BaseModel):
    """Single-pass automaton time against one Boyer-Moore pass per pattern."""
    workers: int
    chunk_size: int
    signature_count: int
    pattern_count: int
    ac_seconds: float
    bm_seconds: float
    ac_over_bm: float


class BenchReport(BaseModel):
    image: str
    image_length: int
    repeat: int
    rows: list[BenchRow] = Field(default_factory=list)
    ratios: list[BenchRatio] = Field(default_factory=list)
