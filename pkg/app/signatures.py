"""
File-type signatures: the built-in sets, the line-oriented config format,
and deep structural validators.

Config format, one signature per line, seven whitespace-separated fields:

    id  name  header  footer  max_size_bytes  extension  validator

Header and footer are byte literals where printable characters stand for
themselves and `\\xNN` encodes any byte (`\\\\` is a literal backslash).
A footer of `-` means the type has no footer; a validator of `-` means
none. Lines starting with `#` are comments.
"""

import logging
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

from app.config import settings
from app.errors import SignatureParseError, SignatureValidationError

logger = logging.getLogger(__name__)

FIELD_COUNT = 7
ABSENT = "-"


def ole_validator(first_bytes: bytes) -> bool:
    """
    Check the OLE compound document byte-order mark.

    The 29th and 30th bytes of an Office file header must be FE and FF,
    i.e. 0-based offsets 28 and 29.
    """
    if len(first_bytes) < 30:
        return False
    return first_bytes[28] == 0xFE and first_bytes[29] == 0xFF


VALIDATORS: dict[str, Callable[[bytes], bool]] = {
    "ole": ole_validator,
}


@dataclass(frozen=True)
class Signature:
    """One file type's identity."""

    id: str
    name: str
    header: bytes
    footer: bytes | None
    max_file_size: int
    extension: str
    validator: str | None = None

    def __post_init__(self) -> None:
        if not self.id or any(c.isspace() for c in self.id):
            raise SignatureValidationError(f"invalid signature id {self.id!r}")
        for label, value in (("name", self.name), ("extension", self.extension)):
            if not value or any(c.isspace() for c in value):
                raise SignatureValidationError(f"{self.id}: invalid {label} {value!r}")
        if len(self.header) < 1:
            raise SignatureValidationError(f"{self.id}: header must not be empty")
        if self.footer is not None and len(self.footer) < 1:
            raise SignatureValidationError(f"{self.id}: footer must not be empty when present")
        minimum = len(self.header) + self.footer_length
        if self.max_file_size < minimum:
            raise SignatureValidationError(
                f"{self.id}: max_file_size {self.max_file_size} is below header+footer length {minimum}"
            )
        if self.validator is not None and self.validator not in VALIDATORS:
            raise SignatureValidationError(f"{self.id}: unknown validator {self.validator!r}")

    @property
    def footer_length(self) -> int:
        return len(self.footer) if self.footer is not None else 0

    def validate(self, first_bytes: bytes) -> bool | None:
        """Run the deep validator, or return None if this type has none."""
        if self.validator is None:
            return None
        return VALIDATORS[self.validator](first_bytes)


@dataclass(frozen=True)
class SignatureSet:
    """An ordered, immutable collection of signatures with unique ids."""

    signatures: tuple[Signature, ...]
    max_component_length: int = field(init=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for sig in self.signatures:
            if sig.id in seen:
                raise SignatureValidationError(f"duplicate signature id {sig.id!r}")
            seen.add(sig.id)
        longest = max(
            (max(len(sig.header), sig.footer_length) for sig in self.signatures),
            default=0,
        )
        object.__setattr__(self, "max_component_length", longest)

    def __iter__(self) -> Iterator[Signature]:
        return iter(self.signatures)

    def __len__(self) -> int:
        return len(self.signatures)

    @property
    def ids(self) -> list[str]:
        return [sig.id for sig in self.signatures]

    def get(self, signature_id: str) -> Signature:
        for sig in self.signatures:
            if sig.id == signature_id:
                return sig
        raise KeyError(signature_id)

    def subset(self, ids: Iterable[str]) -> "SignatureSet":
        """Return a set holding only the given ids, in this set's order."""
        wanted = set(ids)
        unknown = wanted - set(self.ids)
        if unknown:
            raise SignatureValidationError(f"unknown signature id(s): {', '.join(sorted(unknown))}")
        return SignatureSet(tuple(sig for sig in self.signatures if sig.id in wanted))


def _paper_entries(max_size: int) -> list[Signature]:
    return [
        Signature("jpeg", "JPEG", b"\xff\xd8", b"\xff\xd9", max_size, "jpg"),
        Signature("gif", "GIF", b"\x47\x49\x61", b"\x00\x3b", max_size, "gif"),
        Signature("zip", "ZIP", b"PK\x03\x04", b"\x3c\xac", max_size, "zip"),
        Signature("pdf", "PDF", b"%PDF", b"%EOF", max_size, "pdf"),
        Signature("pst", "PST", b"!BDN", None, max_size, "pst"),
    ]


def builtin_paper_set(max_file_size: int | None = None) -> SignatureSet:
    """The five header/footer pairs transcribed from the reference carving table, odd GIF and ZIP values included."""
    return SignatureSet(tuple(_paper_entries(max_file_size or settings.max_file_size)))


def builtin_canonical_set(max_file_size: int | None = None) -> SignatureSet:
    """
    Same rows as builtin_paper_set() with corrected GIF and ZIP magic numbers, plus an OLE
    `doc` entry validated by its byte-order mark.
    """
    max_size = max_file_size or settings.max_file_size
    corrected = {
        "gif": Signature("gif", "GIF", b"GIF8", b"\x00\x3b", max_size, "gif"),
        "zip": Signature("zip", "ZIP", b"PK\x03\x04", b"PK\x05\x06", max_size, "zip"),
    }
    entries = [corrected.get(sig.id, sig) for sig in _paper_entries(max_size)]
    entries.append(
        Signature(
            "doc",
            "DOC",
            b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1",
            None,
            max_size,
            "doc",
            validator="ole",
        )
    )
    return SignatureSet(tuple(entries))


def _decode_bytes(token: str, line_number: int) -> bytes:
    out = bytearray()
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "\\":
            nxt = token[i + 1 : i + 2]
            if nxt == "\\":
                out.append(0x5C)
                i += 2
                continue
            if nxt in ("x", "X"):
                digits = token[i + 2 : i + 4]
                try:
                    if len(digits) != 2:
                        raise ValueError
                    out.append(int(digits, 16))
                except ValueError:
                    raise SignatureParseError(line_number, f"bad hex escape in {token!r}") from None
                i += 4
                continue
            raise SignatureParseError(line_number, f"unknown escape in {token!r}")
        code = ord(ch)
        if code > 0xFF:
            raise SignatureParseError(line_number, f"non 8-bit character in {token!r}")
        out.append(code)
        i += 1
    return bytes(out)


def _encode_bytes(data: bytes) -> str:
    # A lone "-" would read back as "absent"
    if data == b"-":
        return "\\x2d"
    parts = []
    for byte in data:
        if 0x21 <= byte <= 0x7E and byte != 0x5C:
            parts.append(chr(byte))
        else:
            parts.append(f"\\x{byte:02x}")
    return "".join(parts)


def load_signatures(text: str | bytes) -> SignatureSet:
    """Parse a signature config document."""
    if isinstance(text, bytes):
        text = text.decode("latin-1")

    entries: list[Signature] = []
    for line_number, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != FIELD_COUNT:
            raise SignatureParseError(
                line_number, f"expected {FIELD_COUNT} fields, found {len(fields)}"
            )
        sig_id, name, header_tok, footer_tok, size_tok, extension, validator_tok = fields

        try:
            max_size = int(size_tok)
        except ValueError:
            raise SignatureParseError(line_number, f"max size {size_tok!r} is not an integer") from None
        if max_size <= 0:
            raise SignatureParseError(line_number, "max size must be positive")

        header = _decode_bytes(header_tok, line_number)
        footer = None if footer_tok == ABSENT else _decode_bytes(footer_tok, line_number)
        validator = None if validator_tok == ABSENT else validator_tok

        try:
            entries.append(
                Signature(sig_id, name, header, footer, max_size, extension, validator)
            )
        except SignatureValidationError as e:
            raise SignatureValidationError(f"line {line_number}: {e}") from e

    signature_set = SignatureSet(tuple(entries))
    logger.debug("Loaded %d signature(s)", len(signature_set))
    return signature_set


def dump_signatures(signature_set: SignatureSet) -> str:
    """Serialize a signature set to the config format (inverse of load_signatures)."""
    lines = ["# id name header footer max_size_bytes extension validator"]
    for sig in signature_set:
        footer = ABSENT if sig.footer is None else _encode_bytes(sig.footer)
        lines.append(
            " ".join(
                [
                    sig.id,
                    sig.name,
                    _encode_bytes(sig.header),
                    footer,
                    str(sig.max_file_size),
                    sig.extension,
                    sig.validator or ABSENT,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def resolve_signatures(name: str) -> tuple[SignatureSet, str]:
    """Turn `paper`, `canonical`, or a config path into a set and its label."""
    if name == "paper":
        return builtin_paper_set(), "paper"
    if name == "canonical":
        return builtin_canonical_set(), "canonical"
    path = Path(name)
    return load_signatures(path.read_bytes()), str(path)
