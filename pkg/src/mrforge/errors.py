"""Error types shared across the toolkit.

Every error carries a coarse category so the CLI and the HTTP service can
map failures to exit codes / status payloads uniformly:

  io     -- a file could not be read or written
  format -- an input file exists but its content is malformed or unusable
  config -- the request itself is invalid (bad fractions, unknown metric, ...)
"""


class ToolkitError(Exception):
    category = "config"


class IoError(ToolkitError):
    category = "io"


class FormatError(ToolkitError):
    category = "format"


class ConfigError(ToolkitError):
    category = "config"


class LexiconConflict(FormatError):
    """Same surface form registered under two different attribute types."""

    def __init__(self, form: str, existing: str, new: str):
        super().__init__(
            f"lexicon entry {form!r} already registered as {existing}, refusing {new}"
        )
        self.form = form
        self.existing = existing
        self.new = new


class NoExtractableValues(FormatError):
    """Sentence yields no lexicon values; callers drop the sentence."""
