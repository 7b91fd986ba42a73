# Input format parsers.
#
# One module per format; each returns a ParseResult holding the records that
# parsed cleanly plus the record-level errors that were skipped.

from .results import ParseResult, RecordError
from .wos import parse_wos_file, parse_wos_tagged, serialize_wos_tagged
from .nsf import parse_nsf_awards, parse_nsf_file

__all__ = [
    "ParseResult",
    "RecordError",
    "parse_nsf_awards",
    "parse_nsf_file",
    "parse_wos_file",
    "parse_wos_tagged",
    "serialize_wos_tagged",
]
