"""CoNLL-U ingestion, sentence filtering, and sampling.

Sentences arrive dependency-parsed in CoNLL-U (10 tab-separated columns,
blank-line separated). Review metadata (star rating, ids) comes either from
``# key = value`` comment lines inside each block or from a JSON-lines
sidecar keyed by review_id.
"""

from __future__ import annotations

import io
import json
import random
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

from .errors import ConfigError, FormatError, IoError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PUNCT = "PUNCT"
# Root POS tags that count as clausal; anything else marks a likely fragment
# when no upstream fragment flag is available.
CLAUSAL_ROOT_UPOS = frozenset({"VERB", "AUX", "ADJ"})

DEFAULT_ANCHORS = frozenset({"meat", "beef", "chicken", "crab", "steak"})


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[Token, ...]
    review_id: str
    business_id: str
    stars: int
    is_fragment: bool | None = None
    sent_id: str | None = None

    def __post_init__(self):
        if not self.tokens:
            raise FormatError(f"sentence {self.sent_id or self.review_id}: no tokens")
        n = len(self.tokens)
        for pos, tok in enumerate(self.tokens, start=1):
            if tok.index != pos:
                raise FormatError(
                    f"sentence {self.sent_id or self.review_id}: token indices not contiguous at {tok.index}"
                )
            if not 0 <= tok.head <= n or tok.head == tok.index:
                raise FormatError(
                    f"sentence {self.sent_id or self.review_id}: bad head {tok.head} for token {tok.index}"
                )
            if not tok.deprel:
                raise FormatError(
                    f"sentence {self.sent_id or self.review_id}: empty deprel on token {tok.index}"
                )
        if self.stars not in (1, 2, 3, 4, 5):
            raise FormatError(
                f"sentence {self.sent_id or self.review_id}: stars must be 1-5, got {self.stars}"
            )

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def words(self) -> list[Token]:
        return [t for t in self.tokens if t.upos != PUNCT]

    @property
    def word_count(self) -> int:
        return len(self.words())

    def root(self) -> Token:
        for tok in self.tokens:
            if tok.head == 0:
                return tok
        return self.tokens[0]

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


def _parse_bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "y")


def read_metadata(path: str | Path) -> dict[str, dict]:
    """Read the review-metadata JSONL sidecar, keyed by review_id."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read metadata file {path}: {exc}") from exc
    records: dict[str, dict] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        rid = rec.get("review_id")
        if not rid:
            raise FormatError(f"{path}:{lineno}: metadata record without review_id")
        records[str(rid)] = rec
    return records


def read_conllu(
    source: TextIO | str | Path,
    metadata: Mapping[str, Mapping] | None = None,
) -> Iterator[ParsedSentence]:
    """Yield one ParsedSentence per CoNLL-U block.

    Multiword-token ranges ("1-2") and empty nodes ("1.1") are skipped.
    Column 4 -> upos, column 7 -> head, column 8 -> deprel. Star ratings
    come from ``# stars = N`` comments or, failing that, the metadata
    record matching the block's review_id.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            stream: TextIO = io.StringIO(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read CoNLL-U file {path}: {exc}") from exc
        name = str(path)
    else:
        stream = source
        name = getattr(source, "name", "<stream>")

    comments: dict[str, str] = {}
    tokens: list[Token] = []
    ordinal = 0

    def flush(lineno: int) -> ParsedSentence | None:
        nonlocal comments, tokens, ordinal
        if not tokens and not comments:
            return None
        ordinal += 1
        review_id = comments.get("review_id", "")
        meta = (metadata or {}).get(review_id, {})
        business_id = comments.get("business_id") or str(meta.get("business_id", ""))
        sent_id = comments.get("sent_id") or f"{name}#{ordinal}"
        stars_raw = comments.get("stars")
        if stars_raw is None and "stars" in meta:
            stars_raw = str(meta["stars"])
        if stars_raw is None:
            raise FormatError(f"{name}: sentence {sent_id}: missing stars rating")
        try:
            stars = int(stars_raw)
        except ValueError:
            raise FormatError(
                f"{name}: sentence {sent_id}: non-integer stars {stars_raw!r}"
            ) from None
        fragment_raw = comments.get("fragment")
        if fragment_raw is None and "is_fragment" in meta:
            fragment_raw = str(meta["is_fragment"])
        is_fragment = _parse_bool(fragment_raw) if fragment_raw is not None else None
        sent = ParsedSentence(
            tokens=tuple(tokens),
            review_id=review_id,
            business_id=business_id,
            stars=stars,
            is_fragment=is_fragment,
            sent_id=sent_id,
        )
        comments = {}
        tokens = []
        return sent

    lineno = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            sent = flush(lineno)
            if sent is not None:
                yield sent
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                comments[key.strip()] = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise FormatError(f"{name}:{lineno}: expected 10 columns, got {len(cols)}")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword-token range / empty node
        try:
            index = int(tok_id)
            head = int(cols[6])
        except ValueError:
            raise FormatError(f"{name}:{lineno}: non-integer token id or head") from None
        tokens.append(
            Token(
                index=index,
                surface=cols[1],
                lemma=cols[2],
                upos=cols[3],
                head=head,
                deprel=cols[7],
            )
        )
    sent = flush(lineno + 1)
    if sent is not None:
        yield sent


def to_conllu_lines(sentence: ParsedSentence) -> list[str]:
    """Re-serialize the retained token fields as CoNLL-U lines."""
    lines = []
    if sentence.sent_id:
        lines.append(f"# sent_id = {sentence.sent_id}")
    if sentence.review_id:
        lines.append(f"# review_id = {sentence.review_id}")
    if sentence.business_id:
        lines.append(f"# business_id = {sentence.business_id}")
    lines.append(f"# stars = {sentence.stars}")
    if sentence.is_fragment is not None:
        lines.append(f"# fragment = {str(sentence.is_fragment).lower()}")
    for t in sentence.tokens:
        lines.append(
            "\t".join(
                (str(t.index), t.surface, t.lemma, t.upos, "_", "_", str(t.head), t.deprel, "_", "_")
            )
        )
    lines.append("")
    return lines


@dataclass(frozen=True)
class FilterPolicy:
    """Sentence-selection rules applied before extraction."""

    min_len: int = 4
    max_len: int = 30
    anchor_values: frozenset[str] = DEFAULT_ANCHORS
    drop_fragments: bool = True

    def __post_init__(self):
        if not 0 < self.min_len <= self.max_len:
            raise ConfigError(
                f"filter bounds must satisfy 0 < min_len <= max_len, got {self.min_len}..{self.max_len}"
            )

    @classmethod
    def from_mapping(cls, data: Mapping) -> "FilterPolicy":
        kwargs = {}
        if "min_len" in data:
            kwargs["min_len"] = int(data["min_len"])
        if "max_len" in data:
            kwargs["max_len"] = int(data["max_len"])
        if "anchor_values" in data:
            anchors = data["anchor_values"]
            if isinstance(anchors, str):
                anchors = [a.strip() for a in anchors.split(",") if a.strip()]
            kwargs["anchor_values"] = frozenset(a.lower() for a in anchors)
        if "drop_fragments" in data:
            kwargs["drop_fragments"] = bool(data["drop_fragments"])
        return cls(**kwargs)

    @classmethod
    def from_toml(cls, path: str | Path) -> "FilterPolicy":
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise IoError(f"cannot read filter config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise FormatError(f"filter config {path} is not valid TOML: {exc}") from exc
        section = data.get("filter", data)
        return cls.from_mapping(section)


def is_fragment(sentence: ParsedSentence) -> bool:
    """Upstream flag when present, else a clausal-root heuristic."""
    if sentence.is_fragment is not None:
        return sentence.is_fragment
    return sentence.root().upos not in CLAUSAL_ROOT_UPOS


def _mentions_anchor(sentence: ParsedSentence, anchors: frozenset[str]) -> bool:
    surfaces = [t.surface.lower() for t in sentence.tokens]
    for surf in surfaces:
        if surf in anchors:
            return True
        if surf.endswith("s") and surf[:-1] in anchors:
            return True
    multi = [a.split() for a in anchors if " " in a]
    for parts in multi:
        n = len(parts)
        for i in range(len(surfaces) - n + 1):
            if surfaces[i : i + n] == parts:
                return True
    return False


def passes_filter(
    sentence: ParsedSentence, policy: FilterPolicy | None = None
) -> tuple[bool, str | None]:
    """Apply the selection rules; returns (passed, first failing reason)."""
    policy = policy or FilterPolicy()
    wc = sentence.word_count
    if wc < policy.min_len:
        return False, "too-short"
    if wc > policy.max_len:
        return False, "too-long"
    if not _mentions_anchor(sentence, policy.anchor_values):
        return False, "no-anchor"
    if policy.drop_fragments and is_fragment(sentence):
        return False, "fragment"
    return True, None


def sample_sentences(
    pool: Sequence[ParsedSentence], n: int, seed: int
) -> list[ParsedSentence]:
    """Uniform sample without replacement, preserving pool order."""
    if n > len(pool):
        raise ConfigError(f"cannot sample {n} sentences from a pool of {len(pool)}")
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(pool)), n))
    return [pool[i] for i in chosen]
