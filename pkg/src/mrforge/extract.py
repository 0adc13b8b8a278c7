"""Turn a parsed sentence into relational tuples plus style features.

The pipeline walks every noun, resolves its compound span against the
attribute lexicons (expanding the lexicon with newly seen compounds), pins
one adjective per value from amod / copular-nsubj / compound links, numbers
repeat mentions, and reads sentence-level style off the token stream and the
review's star rating.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum, IntEnum

from .conllu import ParsedSentence, Token
from .errors import NoExtractableValues
from .lexicon import AttributeLexicon, AttributeType

NO_ADJ = "no_adj"

NOUN_UPOS = frozenset({"NOUN", "PROPN"})
SKIPPABLE_IN_SPAN = frozenset({"CCONJ", "PUNCT"})
FIRST_PERSON_TOKENS = frozenset({"i", "we", "me", "us", "my", "our", "mine", "ours"})


class Variant(str, Enum):
    BASE = "base"
    ADJ = "adj"
    SENT = "sent"
    STYLE = "style"

    @property
    def label(self) -> str:
        return "base" if self is Variant.BASE else f"+{self.value}"

    @property
    def has_adjectives(self) -> bool:
        return self is not Variant.BASE

    @property
    def has_sentiment(self) -> bool:
        return self in (Variant.SENT, Variant.STYLE)


class Sentiment(IntEnum):
    NEGATIVE = 1
    NEUTRAL = 2
    POSITIVE = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Sentiment":
        return cls[label.strip().upper()]

    @classmethod
    def from_stars(cls, stars: int) -> "Sentiment":
        if stars <= 2:
            return cls.NEGATIVE
        if stars == 3:
            return cls.NEUTRAL
        return cls.POSITIVE


class LenBin(str, Enum):
    SHORT = "short"
    MEDIUM = "medium"
    LONG = "long"

    @classmethod
    def from_word_count(cls, wc: int) -> "LenBin":
        # Boundaries overlap in common usage; we partition as <=10 / 11-20 / >=21.
        if wc <= 10:
            return cls.SHORT
        if wc <= 20:
            return cls.MEDIUM
        return cls.LONG


@dataclass(frozen=True)
class StyleFeatures:
    sentiment: Sentiment
    len_bin: LenBin
    first_person: bool
    exclamation: bool


@dataclass(frozen=True)
class MrTuple:
    """One (attribute, value, adjective, mention) relation.

    ``adj``/``mention`` are None when the MR variant does not expose them;
    ``adj`` is the NO_ADJ marker when exposed but absent.
    """

    attr: AttributeType
    value: str
    adj: str | None = None
    mention: int | None = None


@dataclass(frozen=True)
class MeaningRepresentation:
    variant: Variant
    tuples: tuple[MrTuple, ...]
    reference: str = ""
    sentiment: Sentiment | None = None
    len_bin: LenBin | None = None
    first_person: bool | None = None
    exclamation: bool | None = None

    def content_equal(self, other: "MeaningRepresentation") -> bool:
        """Equality ignoring the reference text."""
        return replace(self, reference="") == replace(other, reference="")


@dataclass(frozen=True)
class ValueMatch:
    """A lexicon value located in the sentence."""

    attr: AttributeType
    value: str
    start: int
    end: int
    head_index: int
    member_indices: tuple[int, ...]


def _norm_token(surface: str) -> str:
    return surface.lower().replace("-", "_")


def compound_member_indices(sentence: ParsedSentence, head: Token) -> list[int]:
    """Noun-compound chain of ``head``, contiguous up to cc/punct gaps.

    Collects NOUN/PROPN tokens linked to the head through ``compound``
    relations (transitively), then keeps the run reachable from the head
    where only coordination and punctuation may intervene — "beef and
    chicken kebabs" keeps beef+chicken+kebabs while dropping "and".
    """
    members = {head.index}
    grew = True
    while grew:
        grew = False
        for tok in sentence.tokens:
            if (
                tok.deprel == "compound"
                and tok.head in members
                and tok.index not in members
                and tok.upos in NOUN_UPOS
            ):
                members.add(tok.index)
                grew = True
    kept = [head.index]
    i = head.index - 1
    while i >= 1:
        if i in members:
            kept.append(i)
            i -= 1
        elif sentence.token(i).upos in SKIPPABLE_IN_SPAN:
            i -= 1
        else:
            break
    i = head.index + 1
    while i <= len(sentence.tokens) and i in members:
        kept.append(i)
        i += 1
    return sorted(kept)


def extract_values(sentence: ParsedSentence, lexicon: AttributeLexicon) -> list[ValueMatch]:
    """All lexicon values in the sentence, longest span wins on overlap.

    For each noun the compound span is looked up longest-suffix-first, so an
    unknown compound whose head (or tail) is a known value still resolves;
    the full compound is then recorded back into the lexicon.
    """
    candidates: list[ValueMatch] = []
    for tok in sentence.tokens:
        if tok.upos not in NOUN_UPOS:
            continue
        member_idx = compound_member_indices(sentence, tok)
        surfaces = [sentence.token(i).surface for i in member_idx]
        attr = None
        for k in range(len(surfaces)):
            attr = lexicon.lookup(surfaces[k:])
            if attr is not None:
                break
        if attr is None:
            continue
        if len(member_idx) > 1:
            lexicon.record_compound(surfaces, attr)
        value = "_".join(_norm_token(s) for s in surfaces)
        candidates.append(
            ValueMatch(
                attr=attr,
                value=value,
                start=member_idx[0],
                end=member_idx[-1],
                head_index=tok.index,
                member_indices=tuple(member_idx),
            )
        )
    chosen: list[ValueMatch] = []
    occupied: list[tuple[int, int]] = []
    for cand in sorted(candidates, key=lambda m: (-(m.end - m.start), m.start)):
        if any(not (cand.end < s or cand.start > e) for s, e in occupied):
            continue
        chosen.append(cand)
        occupied.append((cand.start, cand.end))
    chosen.sort(key=lambda m: m.start)
    return chosen


def extract_adjectives(
    sentence: ParsedSentence, values: list[ValueMatch]
) -> dict[int, str]:
    """One adjective per value span, keyed by the span's head index.

    Candidates for a head noun h: amod dependents of h; an ADJ governing h
    through nsubj (copular predicate — restricted to base-degree forms,
    surface == lemma, so "was better" does not yield an adjective); ADJ
    tokens compound-linked to h. Nearest candidate to h wins, leftmost on
    ties; NO_ADJ otherwise.
    """
    result: dict[int, str] = {}
    for match in values:
        head = sentence.token(match.head_index)
        candidates: list[Token] = []
        for tok in sentence.tokens:
            if tok.head == head.index and tok.deprel == "amod":
                candidates.append(tok)
            elif tok.head == head.index and tok.deprel == "compound" and tok.upos == "ADJ":
                candidates.append(tok)
        if head.deprel == "nsubj" and head.head != 0:
            governor = sentence.token(head.head)
            if governor.upos == "ADJ" and governor.surface.lower() == governor.lemma.lower():
                candidates.append(governor)
        if candidates:
            best = min(candidates, key=lambda t: (abs(t.index - head.index), t.index))
            result[match.head_index] = _norm_token(best.surface)
        else:
            result[match.head_index] = NO_ADJ
    return result


def assign_mentions(
    entries: list[tuple[AttributeType, str, str]]
) -> list[MrTuple]:
    """Number repeat (attr, value) occurrences 1..k in sentence order."""
    seen: dict[tuple[AttributeType, str], int] = {}
    tuples = []
    for attr, value, adj in entries:
        key = (attr, value)
        seen[key] = seen.get(key, 0) + 1
        tuples.append(MrTuple(attr=attr, value=value, adj=adj, mention=seen[key]))
    return tuples


def style_features(sentence: ParsedSentence) -> StyleFeatures:
    """Sentence-level style block: star-binned sentiment, length bin,
    first-person pronoun presence, exclamation presence."""
    first_person = any(
        t.surface.lower() in FIRST_PERSON_TOKENS for t in sentence.tokens
    )
    exclamation = any(t.surface == "!" for t in sentence.tokens)
    return StyleFeatures(
        sentiment=Sentiment.from_stars(sentence.stars),
        len_bin=LenBin.from_word_count(sentence.word_count),
        first_person=first_person,
        exclamation=exclamation,
    )


def project_mr(
    full: list[MrTuple], style: StyleFeatures, variant: Variant, reference: str
) -> MeaningRepresentation:
    """Project fully annotated tuples + style down to one variant level."""
    if variant is Variant.BASE:
        tuples = tuple(replace(t, adj=None, mention=None) for t in full)
        return MeaningRepresentation(variant=variant, tuples=tuples, reference=reference)
    if variant is Variant.ADJ:
        tuples = tuple(replace(t, mention=None) for t in full)
        return MeaningRepresentation(variant=variant, tuples=tuples, reference=reference)
    if variant is Variant.SENT:
        tuples = tuple(replace(t, mention=None) for t in full)
        return MeaningRepresentation(
            variant=variant, tuples=tuples, reference=reference, sentiment=style.sentiment
        )
    return MeaningRepresentation(
        variant=variant,
        tuples=tuple(full),
        reference=reference,
        sentiment=style.sentiment,
        len_bin=style.len_bin,
        first_person=style.first_person,
        exclamation=style.exclamation,
    )


def build_mr(
    sentence: ParsedSentence, lexicon: AttributeLexicon, variant: Variant
) -> MeaningRepresentation:
    """Full extraction for one sentence at the requested variant level.

    Raises NoExtractableValues when no lexicon value occurs; the caller
    drops the sentence.
    """
    values = extract_values(sentence, lexicon)
    if not values:
        raise NoExtractableValues(
            f"sentence {sentence.sent_id or sentence.review_id}: no lexicon values"
        )
    adjectives = extract_adjectives(sentence, values)
    full = assign_mentions(
        [(m.attr, m.value, adjectives[m.head_index]) for m in values]
    )
    style = style_features(sentence)
    return project_mr(full, style, variant, sentence.text())
