"""Containers shared by the input parsers."""

import io
from dataclasses import dataclass, field
from typing import List


@dataclass(frozen=True)
class RecordError:
    """A record that was skipped: 1-based record index, source line, reason."""

    index: int
    line: int
    message: str
    source: str = ""


@dataclass
class ParseResult:
    records: List = field(default_factory=list)
    errors: List[RecordError] = field(default_factory=list)
    source: str = ""

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def read_text(stream, encoding="utf-8-sig"):
    """Return the text of bytes, str, or a binary/text file object."""
    if isinstance(stream, bytes):
        return stream.decode(encoding)
    if isinstance(stream, str):
        return stream
    data = stream.read()
    if isinstance(data, bytes):
        return data.decode(encoding)
    return data


def as_binary(stream):
    """Wrap bytes in a file object; pass file objects through."""
    if isinstance(stream, bytes):
        return io.BytesIO(stream)
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream
