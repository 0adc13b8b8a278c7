"""Assemble, serialize, split, and profile MR/reference corpora."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .conllu import FilterPolicy, ParsedSentence, passes_filter
from .errors import ConfigError, FormatError, IoError, NoExtractableValues
from .extract import (
    NO_ADJ,
    LenBin,
    MeaningRepresentation,
    MrTuple,
    Sentiment,
    Variant,
    build_mr,
)
from .lexicon import AttributeLexicon, AttributeType
from . import metrics as _metrics


@dataclass(frozen=True)
class CorpusInstance:
    id: str
    mr: MeaningRepresentation
    reference: str
    review_id: str
    business_id: str
    stars: int

    @property
    def variant(self) -> Variant:
        return self.mr.variant


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.8
    dev_frac: float = 0.1
    test_frac: float = 0.1
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.dev_frac, self.test_frac)
        if any(not 0 < f < 1 for f in fracs):
            raise ConfigError(f"split fractions must lie in (0,1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {sum(fracs)!r}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SplitSpec":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"split spec needs three comma-separated fractions, got {text!r}")
        try:
            train, dev, test = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"split spec has non-numeric fraction: {text!r}") from None
        return cls(train_frac=train, dev_frac=dev, test_frac=test, seed=seed)


@dataclass(frozen=True)
class CorpusStats:
    size: int
    vocab_size: int
    n_adjectives: int
    entropy: float
    avg_ref_len: float
    pct_contrast: float
    pct_aggregation: float
    mr_len_histogram: dict[int, int] = field(hash=False)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "vocab_size": self.vocab_size,
            "n_adjectives": self.n_adjectives,
            "entropy": self.entropy,
            "avg_ref_len": self.avg_ref_len,
            "pct_contrast": self.pct_contrast,
            "pct_aggregation": self.pct_aggregation,
            "mr_len_histogram": {str(k): v for k, v in sorted(self.mr_len_histogram.items())},
        }


# --- MR serialization -------------------------------------------------------

def _bool_text(value: bool) -> str:
    return "true" if value else "false"


def serialize_mr(mr: MeaningRepresentation) -> str:
    """Canonical single-line text form of an MR.

    Tuples are comma-joined ``(attr=A, val=V, adj=J, mention=M)`` with
    fields beyond the variant omitted; the sentence-level block follows as
    ``+[...]`` for the sentiment and style variants. Byte-stable across
    runs for identical MRs.
    """
    parts = []
    for t in mr.tuples:
        fields = [f"attr={t.attr.mr_name}", f"val={t.value}"]
        if mr.variant.has_adjectives:
            fields.append(f"adj={t.adj}")
        if mr.variant is Variant.STYLE:
            fields.append(f"mention={t.mention}")
        parts.append("(" + ", ".join(fields) + ")")
    text = ", ".join(parts)
    if mr.variant is Variant.SENT:
        text += f" +[sentiment={mr.sentiment.label}]"
    elif mr.variant is Variant.STYLE:
        text += (
            f" +[sentiment={mr.sentiment.label}, len={mr.len_bin.value}"
            f", first_person={_bool_text(mr.first_person)}"
            f", exclamation={_bool_text(mr.exclamation)}]"
        )
    return text


_TUPLE_RE = re.compile(r"\(([^()]*)\)")
_STYLE_RE = re.compile(r"\+\[([^\[\]]*)\]\s*$")


def _parse_fields(body: str, where: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for part in body.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FormatError(f"malformed {where} field {part!r}")
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def parse_mr_text(text: str) -> MeaningRepresentation:
    """Inverse of serialize_mr (reference is not part of the text form)."""
    style_match = _STYLE_RE.search(text)
    style_fields = _parse_fields(style_match.group(1), "style") if style_match else None
    tuple_body = text[: style_match.start()] if style_match else text
    raw_tuples = _TUPLE_RE.findall(tuple_body)
    if not raw_tuples:
        raise FormatError(f"no tuples in MR text {text!r}")
    parsed = [_parse_fields(body, "tuple") for body in raw_tuples]
    first = parsed[0]
    if style_fields is not None and "len" in style_fields:
        variant = Variant.STYLE
    elif style_fields is not None:
        variant = Variant.SENT
    elif "adj" in first:
        variant = Variant.ADJ
    else:
        variant = Variant.BASE
    tuples = []
    for fields in parsed:
        if "attr" not in fields or "val" not in fields:
            raise FormatError(f"tuple missing attr/val in MR text {text!r}")
        if variant.has_adjectives and "adj" not in fields:
            raise FormatError(f"tuple missing adj in {variant.value} MR {text!r}")
        if variant is Variant.STYLE and "mention" not in fields:
            raise FormatError(f"tuple missing mention in style MR {text!r}")
        tuples.append(
            MrTuple(
                attr=AttributeType.from_string(fields["attr"]),
                value=fields["val"],
                adj=fields.get("adj") if variant.has_adjectives else None,
                mention=int(fields["mention"]) if variant is Variant.STYLE else None,
            )
        )
    kwargs: dict = {}
    if variant is Variant.SENT:
        kwargs["sentiment"] = Sentiment.from_label(style_fields["sentiment"])
    elif variant is Variant.STYLE:
        for key in ("sentiment", "len", "first_person", "exclamation"):
            if key not in style_fields:
                raise FormatError(f"style block missing {key} in MR text {text!r}")
        kwargs = {
            "sentiment": Sentiment.from_label(style_fields["sentiment"]),
            "len_bin": LenBin(style_fields["len"]),
            "first_person": style_fields["first_person"] == "true",
            "exclamation": style_fields["exclamation"] == "true",
        }
    return MeaningRepresentation(variant=variant, tuples=tuple(tuples), **kwargs)


def mr_to_dict(mr: MeaningRepresentation) -> dict:
    """Machine-readable form carrying the same content as the text form."""
    tuples = []
    for t in mr.tuples:
        entry: dict = {"attr": t.attr.mr_name, "val": t.value}
        if mr.variant.has_adjectives:
            entry["adj"] = t.adj
        if mr.variant is Variant.STYLE:
            entry["mention"] = t.mention
        tuples.append(entry)
    out: dict = {"variant": mr.variant.value, "tuples": tuples}
    if mr.variant is Variant.SENT:
        out["style"] = {"sentiment": mr.sentiment.label}
    elif mr.variant is Variant.STYLE:
        out["style"] = {
            "sentiment": mr.sentiment.label,
            "len": mr.len_bin.value,
            "first_person": mr.first_person,
            "exclamation": mr.exclamation,
        }
    return out


def mr_from_dict(data: Mapping, reference: str = "") -> MeaningRepresentation:
    variant = Variant(data["variant"])
    tuples = tuple(
        MrTuple(
            attr=AttributeType.from_string(t["attr"]),
            value=t["val"],
            adj=t.get("adj") if variant.has_adjectives else None,
            mention=t.get("mention") if variant is Variant.STYLE else None,
        )
        for t in data["tuples"]
    )
    kwargs: dict = {}
    style = data.get("style") or {}
    if variant is Variant.SENT:
        kwargs["sentiment"] = Sentiment.from_label(style["sentiment"])
    elif variant is Variant.STYLE:
        kwargs = {
            "sentiment": Sentiment.from_label(style["sentiment"]),
            "len_bin": LenBin(style["len"]),
            "first_person": bool(style["first_person"]),
            "exclamation": bool(style["exclamation"]),
        }
    return MeaningRepresentation(
        variant=variant, tuples=tuples, reference=reference, **kwargs
    )


# --- corpus assembly --------------------------------------------------------

def instance_id(review_id: str, business_id: str, reference: str, salt: int = 0) -> str:
    basis = f"{review_id}|{business_id}|{reference}|{salt}"
    return hashlib.sha1(basis.encode("utf-8")).hexdigest()[:16]


def build_instances(
    sentences: Iterable[ParsedSentence],
    lexicon: AttributeLexicon,
    variants: Sequence[Variant],
    policy: FilterPolicy | None = None,
) -> dict[Variant, list[CorpusInstance]]:
    """Filter sentences and build one instance per (sentence, variant).

    Instances for all variants share ids, so cross-variant corpora stay
    aligned. Sentences failing the filter or yielding no values drop out.
    """
    policy = policy or FilterPolicy()
    out: dict[Variant, list[CorpusInstance]] = {v: [] for v in variants}
    seen_ids: dict[str, int] = {}
    for sent in sentences:
        ok, _reason = passes_filter(sent, policy)
        if not ok:
            continue
        reference = sent.text()
        base_id = instance_id(sent.review_id, sent.business_id, reference)
        salt = seen_ids.get(base_id, 0)
        seen_ids[base_id] = salt + 1
        iid = base_id if salt == 0 else instance_id(
            sent.review_id, sent.business_id, reference, salt
        )
        try:
            mrs = {v: build_mr(sent, lexicon, v) for v in variants}
        except NoExtractableValues:
            continue
        for v in variants:
            out[v].append(
                CorpusInstance(
                    id=iid,
                    mr=mrs[v],
                    reference=reference,
                    review_id=sent.review_id,
                    business_id=sent.business_id,
                    stars=sent.stars,
                )
            )
    return out


# --- splitting and overlap --------------------------------------------------

def _allocate(n: int, fracs: Sequence[float]) -> list[int]:
    """Largest-remainder allocation; sizes sum to n, each within +-1 of f*n."""
    exact = [f * n for f in fracs]
    sizes = [int(x) for x in exact]
    remainder = n - sum(sizes)
    order = sorted(range(len(fracs)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in range(remainder):
        sizes[order[i % len(order)]] += 1
    return sizes


def split_corpus(
    instances: Sequence[CorpusInstance], spec: SplitSpec
) -> tuple[list[CorpusInstance], list[CorpusInstance], list[CorpusInstance]]:
    """Deterministic, exhaustive, disjoint 3-way split.

    Instances are ranked by a seed-keyed hash of their id (stable across
    runs and platforms), cut at the exact fraction boundaries, and each
    split restored to input order.
    """
    if not instances:
        raise ConfigError("cannot split an empty corpus")
    spec_fracs = (spec.train_frac, spec.dev_frac, spec.test_frac)
    sizes = _allocate(len(instances), spec_fracs)

    def rank(pair: tuple[int, CorpusInstance]) -> str:
        _, inst = pair
        return hashlib.sha256(f"{spec.seed}:{inst.id}".encode("utf-8")).hexdigest()

    ordered = sorted(enumerate(instances), key=rank)
    cuts = (sizes[0], sizes[0] + sizes[1])
    buckets = (ordered[: cuts[0]], ordered[cuts[0] : cuts[1]], ordered[cuts[1] :])
    train, dev, test = (
        [inst for _, inst in sorted(bucket, key=lambda p: p[0])] for bucket in buckets
    )
    return train, dev, test


def overlap_report(
    train: Sequence[CorpusInstance], test: Sequence[CorpusInstance]
) -> tuple[float, float]:
    """(pct of test MRs seen in train, pct of test MR+reference pairs)."""
    variants = {i.variant for i in train} | {i.variant for i in test}
    if len(variants) > 1:
        raise ConfigError(f"overlap requires a single variant, got {sorted(v.value for v in variants)}")
    if not test:
        raise ConfigError("empty test split")
    train_mrs = {serialize_mr(i.mr) for i in train}
    train_pairs = {(serialize_mr(i.mr), i.reference.lower()) for i in train}
    mr_hits = sum(1 for i in test if serialize_mr(i.mr) in train_mrs)
    pair_hits = sum(
        1 for i in test if (serialize_mr(i.mr), i.reference.lower()) in train_pairs
    )
    return 100.0 * mr_hits / len(test), 100.0 * pair_hits / len(test)


# --- statistics -------------------------------------------------------------

def corpus_stats(instances: Sequence[CorpusInstance]) -> CorpusStats:
    if not instances:
        raise ConfigError("cannot profile an empty corpus")
    references = [i.reference.lower() for i in instances]
    vocab = set()
    total_len = 0
    contrast = 0
    aggregation = 0
    histogram: dict[int, int] = {}
    adjectives = set()
    for inst, ref in zip(instances, references):
        tokens = ref.split()
        vocab.update(tokens)
        total_len += len(tokens)
        has_contrast, has_aggregation = _metrics.detect_discourse(ref)
        contrast += has_contrast
        aggregation += has_aggregation
        n = len(inst.mr.tuples)
        histogram[n] = histogram.get(n, 0) + 1
        for t in inst.mr.tuples:
            if t.adj is not None and t.adj != NO_ADJ:
                adjectives.add(t.adj)
    try:
        ent = _metrics.entropy(references)
    except FormatError:
        ent = 0.0
    n = len(instances)
    return CorpusStats(
        size=n,
        vocab_size=len(vocab),
        n_adjectives=len(adjectives),
        entropy=ent,
        avg_ref_len=total_len / n,
        pct_contrast=100.0 * contrast / n,
        pct_aggregation=100.0 * aggregation / n,
        mr_len_histogram=histogram,
    )


def render_stats_table(stats: CorpusStats, title: str = "corpus") -> str:
    rows = [
        ("Size", f"{stats.size}"),
        ("Vocab", f"{stats.vocab_size}"),
        ("# Adjs", f"{stats.n_adjectives}"),
        ("Entropy", f"{stats.entropy:.2f}"),
        ("RefLen", f"{stats.avg_ref_len:.2f}"),
        ("% Refs w/ Contrast", f"{stats.pct_contrast:.2f}%"),
        ("% Refs w/ Aggreg.", f"{stats.pct_aggregation:.2f}%"),
    ]
    width = max(len(label) for label, _ in rows)
    lines = [f"[{title}]"]
    lines += [f"{label.ljust(width)}  {value}" for label, value in rows]
    hist = ", ".join(f"{k}:{v}" for k, v in sorted(stats.mr_len_histogram.items()))
    lines.append(f"{'MR len histogram'.ljust(width)}  {hist}")
    return "\n".join(lines)


# --- JSONL store ------------------------------------------------------------

def instance_to_record(inst: CorpusInstance) -> dict:
    return {
        "id": inst.id,
        "variant": inst.variant.value,
        "mr": mr_to_dict(inst.mr),
        "mr_text": serialize_mr(inst.mr),
        "reference": inst.reference,
        "review_id": inst.review_id,
        "business_id": inst.business_id,
        "stars": inst.stars,
    }


def instance_from_record(record: Mapping) -> CorpusInstance:
    mr = mr_from_dict(record["mr"], reference=record["reference"])
    return CorpusInstance(
        id=record["id"],
        mr=mr,
        reference=record["reference"],
        review_id=record.get("review_id", ""),
        business_id=record.get("business_id", ""),
        stars=int(record.get("stars", 3)),
    )


def write_corpus(path: str | Path, instances: Iterable[CorpusInstance]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for inst in instances:
                fh.write(json.dumps(instance_to_record(inst), ensure_ascii=False))
                fh.write("\n")
                count += 1
    except OSError as exc:
        raise IoError(f"cannot write corpus file {path}: {exc}") from exc
    return count


def read_corpus(path: str | Path) -> list[CorpusInstance]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read corpus file {path}: {exc}") from exc
    instances = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            instances.append(instance_from_record(record))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
    return instances


def iter_corpus(path: str | Path) -> Iterator[CorpusInstance]:
    yield from read_corpus(path)
