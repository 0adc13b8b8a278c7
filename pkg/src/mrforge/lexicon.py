"""Attribute lexicons: load, query, and expand with noun compounds.

A lexicon maps a normalized surface form ("chicken wrap") to one of seven
attribute types. Entries come from seed files (one form per line) and from
compound expansion during extraction, where a noun compound whose head is a
known value is registered as a new value itself.

Normalization is lowercase with hyphens/underscores unified to single
spaces, so "chicken-wrap", "chicken_wrap" and "Chicken  Wrap" share one key.
Keys stay space-separated and human-editable; underscores appear only when a
value is rendered inside a meaning representation.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, FormatError, IoError, LexiconConflict

SEED_FILE = "seed-file"
COMPOUND_EXPANSION = "compound-expansion"


class AttributeType(str, Enum):
    FOOD = "food"
    CUISINE = "cuisine"
    SERVICE = "service"
    STAFF = "staff"
    AMBIANCE = "ambiance"
    PRICE = "price"
    RESTAURANT_TYPE = "restaurant_type"

    @property
    def mr_name(self) -> str:
        """Name used inside serialized MRs ("attr=restaurant")."""
        return "restaurant" if self is AttributeType.RESTAURANT_TYPE else self.value

    @property
    def placeholder(self) -> str:
        """Delexicalization token, e.g. [FOOD]."""
        name = "RESTAURANT" if self is AttributeType.RESTAURANT_TYPE else self.name
        return f"[{name}]"

    @classmethod
    def from_string(cls, name: str) -> "AttributeType":
        key = name.strip().lower()
        if key == "restaurant":
            return cls.RESTAURANT_TYPE
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown attribute type {name!r}") from None


def normalize_form(form: str) -> str:
    """Lowercase, unify -/_ to spaces, collapse whitespace. Idempotent."""
    return " ".join(form.lower().replace("-", " ").replace("_", " ").split())


class AttributeLexicon:
    """Immutable-after-build mapping of surface forms to attribute types.

    Compound expansion is the single mutation path and happens during the
    extraction pass; reads are safe to share across threads afterwards.
    """

    def __init__(self) -> None:
        self._entries: dict[str, AttributeType] = {}
        self._provenance: dict[str, str] = {}
        self._max_tokens = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, form: str) -> bool:
        return normalize_form(form) in self._entries

    @property
    def max_tokens(self) -> int:
        """Token length of the longest entry (bounds span scans)."""
        return self._max_tokens

    def add(self, form: str, attr: AttributeType, provenance: str = SEED_FILE) -> str:
        key = normalize_form(form)
        if not key:
            raise FormatError("empty lexicon entry")
        existing = self._entries.get(key)
        if existing is not None:
            if existing is not attr:
                raise LexiconConflict(key, existing.value, attr.value)
            return key
        self._entries[key] = attr
        self._provenance[key] = provenance
        self._max_tokens = max(self._max_tokens, len(key.split()))
        return key

    def lookup(self, phrase: Sequence[str]) -> AttributeType | None:
        """Type of the normalized join of ``phrase`` tokens, or None.

        Exact-match on the full phrase; scanning longer spans before shorter
        ones (so "ham steak" beats "steak") is the caller's job, see
        :meth:`match_at` and the extractor's suffix search.
        """
        if not phrase:
            raise ConfigError("lookup of empty phrase")
        return self._entries.get(normalize_form(" ".join(phrase)))

    def match_at(self, tokens: Sequence[str], start: int) -> tuple[AttributeType, int] | None:
        """Longest entry matching ``tokens[start:start+n]``; returns (type, n)."""
        limit = min(self._max_tokens, len(tokens) - start)
        for n in range(limit, 0, -1):
            attr = self._entries.get(normalize_form(" ".join(tokens[start : start + n])))
            if attr is not None:
                return attr, n
        return None

    def record_compound(self, compound: Sequence[str], attr: AttributeType) -> str:
        """Register a compound span as a value of ``attr``. Idempotent.

        The compound's head (last token) must not already carry a different
        type; a head absent from the lexicon is fine (the caller may have
        matched a longer suffix).
        """
        if len(compound) > 1:
            head_type = self.type_of(compound[-1])
            if head_type is not None and head_type is not attr:
                raise LexiconConflict(
                    normalize_form(compound[-1]), head_type.value, attr.value
                )
        return self.add(" ".join(compound), attr, provenance=COMPOUND_EXPANSION)

    def type_of(self, form: str) -> AttributeType | None:
        return self._entries.get(normalize_form(form))

    def provenance_of(self, form: str) -> str | None:
        return self._provenance.get(normalize_form(form))

    def entries(self) -> Iterable[tuple[str, AttributeType, str]]:
        for key, attr in self._entries.items():
            yield key, attr, self._provenance[key]

    def forms_for(self, attr: AttributeType) -> list[str]:
        return sorted(k for k, a in self._entries.items() if a is attr)


def load_lexicons(paths: Mapping[AttributeType | str, str | Path]) -> AttributeLexicon:
    """Build a lexicon from per-type text files.

    Each file is UTF-8, one surface form per line; blank lines and lines
    starting with ``#`` are skipped. Loading is order-independent across
    files of distinct types: a form may appear under one type only.
    """
    lex = AttributeLexicon()
    for attr_key in sorted(paths, key=str):
        attr = attr_key if isinstance(attr_key, AttributeType) else AttributeType.from_string(str(attr_key))
        path = Path(paths[attr_key])
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read lexicon file {path}: {exc}") from exc
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lex.add(line, attr, provenance=SEED_FILE)
    return lex


def load_manifest(path: str | Path) -> AttributeLexicon:
    """Load a lexicon from a JSON manifest mapping attribute type -> file.

    Relative paths in the manifest resolve against the manifest's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read lexicon manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"lexicon manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"lexicon manifest {path} must be a JSON object")
    paths = {
        AttributeType.from_string(key): (path.parent / value)
        for key, value in raw.items()
    }
    return load_lexicons(paths)


def write_lexicon_dir(lex: AttributeLexicon, out_dir: str | Path) -> Path:
    """Write per-type entry files plus manifest.json; returns manifest path.

    Used to persist the compound-expanded lexicon after a build so later
    evaluation runs delexicalize with the same value inventory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, str] = {}
    for attr in AttributeType:
        forms = lex.forms_for(attr)
        fname = f"{attr.value}.txt"
        body = "".join(f"{form}\n" for form in forms)
        (out / fname).write_text(body, encoding="utf-8", newline="\n")
        manifest[attr.value] = fname
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    return manifest_path


def bundled_lexicon_manifest() -> Path:
    """Path of the seed lexicons shipped with the package."""
    return Path(__file__).parent / "data" / "lexicons" / "manifest.json"
