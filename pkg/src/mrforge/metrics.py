"""Evaluation metrics: slot error rate, diversity, MT overlap, templates.

All metrics operate on lowercased whitespace tokens; slot matching expands
underscores/hyphens to spaces so lexicon-born values line up with natural
text. Nothing here requires external resources.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ConfigError, FormatError
from .extract import FIRST_PERSON_TOKENS, NO_ADJ, MeaningRepresentation, Variant
from .lexicon import AttributeLexicon

_WORD_RE = re.compile(r"[a-z0-9']+")
# Characters stripped from token edges when matching lexicon spans; square
# brackets stay attached so placeholders never re-match as entries.
_EDGE_PUNCT = ".,!?;:\"'()"


def _match_tokens(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower().replace("-", " ").replace("_", " "))


# Coordination tokens are transparent inside a value span: extraction joins
# coordinated compounds ("beef and chicken kebabs" -> beef_chicken_kebabs),
# so matching must skip them too or a value could miss its own reference.
_COORD_TOKENS = frozenset({"and", "or"})


def _match_len(needle: Sequence[str], haystack: Sequence[str], start: int) -> int:
    """Tokens consumed by a match of ``needle`` at ``start``, else 0."""
    i = start
    for pos, want in enumerate(needle):
        if pos > 0:
            while i < len(haystack) and haystack[i] in _COORD_TOKENS and haystack[i] != want:
                i += 1
        if i >= len(haystack) or haystack[i] != want:
            return 0
        i += 1
    return i - start


def _count_span(needle: Sequence[str], haystack: Sequence[str]) -> int:
    """Non-overlapping occurrences of a token span."""
    if not needle:
        return 0
    count = 0
    i = 0
    while i < len(haystack):
        consumed = _match_len(needle, haystack, i)
        if consumed:
            count += 1
            i += consumed
        else:
            i += 1
    return count


# --- semantic error rate ----------------------------------------------------

@dataclass(frozen=True)
class SerBreakdown:
    deletions: int
    repetitions: int
    slots: int

    @property
    def ser(self) -> float:
        return (self.deletions + self.repetitions) / self.slots


def ser(
    mr: MeaningRepresentation, output: str, lexicon: AttributeLexicon | None = None
) -> SerBreakdown:
    """Deletions + repetitions over slots for one MR/output pair.

    A value with maximum mention k must appear at least k times (shortfall
    counts as deletions); occurrences beyond k are repetitions. Adjective
    slots (for variants that carry them, skipping NO_ADJ) count as realized
    when the adjective tokens appear. Matching is exact token spans after
    lowercasing and underscore/hyphen expansion; the lexicon parameter is
    accepted for interface symmetry but unused by exact matching.
    """
    del lexicon
    if not mr.tuples:
        raise FormatError("cannot score an empty MR")
    tokens = _match_tokens(output)
    required: dict[tuple, int] = {}
    for t in mr.tuples:
        key = (t.attr, t.value)
        needed = t.mention if t.mention is not None else required.get(key, 0) + 1
        required[key] = max(required.get(key, 0), needed)
    deletions = 0
    repetitions = 0
    for (_attr, value), k in required.items():
        occurrences = _count_span(value.split("_"), tokens)
        deletions += max(0, k - occurrences)
        repetitions += max(0, occurrences - k)
    adj_slots = 0
    if mr.variant.has_adjectives:
        for t in mr.tuples:
            if t.adj is None or t.adj == NO_ADJ:
                continue
            adj_slots += 1
            if _count_span(t.adj.split("_"), tokens) == 0:
                deletions += 1
    return SerBreakdown(
        deletions=deletions, repetitions=repetitions, slots=len(mr.tuples) + adj_slots
    )


@dataclass(frozen=True)
class SerSummary:
    avg_ser: float
    deletions: int
    repetitions: int
    slots: int
    count: int


def average_ser(
    mrs: Sequence[MeaningRepresentation], outputs: Sequence[str]
) -> SerSummary:
    """Per-instance SER averaged across the outputs."""
    if len(mrs) != len(outputs):
        raise ConfigError(f"{len(mrs)} MRs vs {len(outputs)} outputs")
    if not mrs:
        raise ConfigError("nothing to score")
    breakdowns = [ser(mr, out) for mr, out in zip(mrs, outputs)]
    return SerSummary(
        avg_ser=sum(b.ser for b in breakdowns) / len(breakdowns),
        deletions=sum(b.deletions for b in breakdowns),
        repetitions=sum(b.repetitions for b in breakdowns),
        slots=sum(b.slots for b in breakdowns),
        count=len(breakdowns),
    )


# --- diversity --------------------------------------------------------------

def entropy(texts: Iterable[str]) -> float:
    """Shannon entropy (bits) of the trigram distribution.

    Trigrams are consecutive word triples within each text, lowercased;
    nothing spans text boundaries.
    """
    counts: Counter = Counter()
    for text in texts:
        toks = text.lower().split()
        for i in range(len(toks) - 2):
            counts[(toks[i], toks[i + 1], toks[i + 2])] += 1
    total = sum(counts.values())
    if total == 0:
        raise FormatError("no trigrams: every text is shorter than 3 words")
    return -sum((f / total) * math.log2(f / total) for f in counts.values())


# --- MT overlap metrics -----------------------------------------------------

def _check_aligned(hypotheses: Sequence[str], references: Sequence[str]) -> None:
    if not hypotheses or not references:
        raise ConfigError("empty hypothesis or reference list")
    if len(hypotheses) != len(references):
        raise ConfigError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def bleu(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level BLEU-4 with brevity penalty, single reference each."""
    _check_aligned(hypotheses, references)
    clipped = [0] * 4
    totals = [0] * 4
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h = hyp.lower().split()
        r = ref.lower().split()
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, 5):
            h_counts = _ngrams(h, n)
            r_counts = _ngrams(r, n)
            totals[n - 1] += sum(h_counts.values())
            clipped[n - 1] += sum(min(c, r_counts[g]) for g, c in h_counts.items())
    if hyp_len == 0 or any(t == 0 for t in totals) or any(c == 0 for c in clipped):
        return 0.0
    log_precision = sum(math.log(c / t) for c, t in zip(clipped, totals)) / 4
    brevity = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return brevity * math.exp(log_precision)


def nist(hypotheses: Sequence[str], references: Sequence[str], max_n: int = 5) -> float:
    """Corpus-level NIST with information-weighted n-gram precision.

    Information weights come from the reference corpus itself:
    info(w1..wn) = log2(count(w1..w_{n-1}) / count(w1..wn)), with the
    total reference word count as the unigram numerator. Matched hyp
    n-grams are clipped at reference counts. Brevity factor is
    exp(beta * ln^2(min(1, Lhyp/Lref))) with beta fixed so the factor is
    0.5 at a 2/3 length ratio.
    """
    _check_aligned(hypotheses, references)
    ref_tokens = [ref.lower().split() for ref in references]
    hyp_tokens = [hyp.lower().split() for hyp in hypotheses]
    ref_counts: list[Counter] = [Counter() for _ in range(max_n + 1)]
    total_ref_words = 0
    for toks in ref_tokens:
        total_ref_words += len(toks)
        for n in range(1, max_n + 1):
            ref_counts[n].update(_ngrams(toks, n))

    def info(gram: tuple) -> float:
        n = len(gram)
        denom = ref_counts[n][gram]
        numer = total_ref_words if n == 1 else ref_counts[n - 1][gram[:-1]]
        if denom == 0 or numer == 0:
            return 0.0
        return math.log2(numer / denom)

    score = 0.0
    for n in range(1, max_n + 1):
        gained = 0.0
        attempted = 0
        for h, r in zip(hyp_tokens, ref_tokens):
            h_counts = _ngrams(h, n)
            r_seg = _ngrams(r, n)
            attempted += sum(h_counts.values())
            for gram, count in h_counts.items():
                matched = min(count, r_seg[gram])
                if matched:
                    gained += matched * info(gram)
        if attempted:
            score += gained / attempted
    hyp_len = sum(len(t) for t in hyp_tokens)
    ref_len = sum(len(t) for t in ref_tokens)
    if hyp_len == 0 or ref_len == 0:
        return 0.0
    beta = math.log(0.5) / math.log(1.5) ** 2
    ratio = min(1.0, hyp_len / ref_len)
    return score * math.exp(beta * math.log(ratio) ** 2)


# --- delexicalization and templates ----------------------------------------

_PLACEHOLDER_RE = re.compile(r"\[[A-Z]+\]")


def delexicalize(text: str, lexicon: AttributeLexicon) -> str:
    """Replace lexicon value spans with attribute placeholders.

    Longest span wins at each position; everything else (adjectives,
    punctuation, casing folded to lower) is preserved. Placeholders are not
    lexicon entries and survive re-delexicalization unchanged, so the
    operation is idempotent.
    """
    raw = text.split()
    tokens = [t if _PLACEHOLDER_RE.search(t) else t.lower() for t in raw]
    cores = [t.strip(_EDGE_PUNCT) for t in tokens]
    out = []
    i = 0
    limit = max(lexicon.max_tokens, 1)
    while i < len(tokens):
        hit = None
        for n in range(min(limit, len(tokens) - i), 0, -1):
            window = cores[i : i + n]
            if any(not c for c in window):
                continue
            attr = lexicon.type_of(" ".join(window))
            if attr is not None:
                hit = (attr, n)
                break
        if hit is None:
            out.append(tokens[i])
            i += 1
            continue
        attr, n = hit
        first, last = tokens[i], tokens[i + n - 1]
        prefix = first[: len(first) - len(first.lstrip(_EDGE_PUNCT))]
        suffix = last[len(last.rstrip(_EDGE_PUNCT)) :]
        out.append(prefix + attr.placeholder + suffix)
        i += n
    return " ".join(out)


@dataclass(frozen=True)
class Template:
    pattern: str
    count: int
    rank: int


def template_ranks(texts: Sequence[str], lexicon: AttributeLexicon) -> list[Template]:
    """Distinct delexicalized patterns ranked by descending count.

    Ties break lexicographically; the list length is the unique-template
    count.
    """
    if not texts:
        raise ConfigError("no texts to mine templates from")
    counts = Counter(delexicalize(text, lexicon) for text in texts)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        Template(pattern=pattern, count=count, rank=i + 1)
        for i, (pattern, count) in enumerate(ranked)
    ]


# --- discourse markers ------------------------------------------------------

DEFAULT_CONTRAST_MARKERS = ("but", "although", "though", "however", "yet", "whereas", "while")
DEFAULT_AGGREGATION_MARKERS = ("both", "also", "too", "as_well", "in_addition")


def _marker_grams(markers: Iterable[str]) -> list[tuple[str, ...]]:
    return [tuple(m.lower().replace("_", " ").split()) for m in markers]


def detect_discourse(
    text: str,
    contrast_markers: Iterable[str] | None = None,
    aggregation_markers: Iterable[str] | None = None,
) -> tuple[bool, bool]:
    """(has_contrast, has_aggregation) by token-level marker membership."""
    words = re.findall(r"[a-z']+", text.lower())

    def any_gram(grams: list[tuple[str, ...]]) -> bool:
        for gram in grams:
            n = len(gram)
            if n == 0:
                continue
            for i in range(len(words) - n + 1):
                if tuple(words[i : i + n]) == gram:
                    return True
        return False

    contrast = _marker_grams(contrast_markers or DEFAULT_CONTRAST_MARKERS)
    aggregation = _marker_grams(aggregation_markers or DEFAULT_AGGREGATION_MARKERS)
    return any_gram(contrast), any_gram(aggregation)


# --- style-target compliance ------------------------------------------------

@dataclass(frozen=True)
class StyleHitReport:
    first_person_hit_rate: float | None
    exclamation_hit_rate: float | None
    avg_len_by_bin: dict[str, float] = field(hash=False, default_factory=dict)


def _is_first_person(text: str) -> bool:
    return any(w in FIRST_PERSON_TOKENS for w in re.findall(r"[a-z']+", text.lower()))


def _word_count(text: str) -> int:
    return sum(1 for tok in text.split() if any(ch.isalnum() for ch in tok))


def style_hits(
    mrs: Sequence[MeaningRepresentation], outputs: Sequence[str]
) -> StyleHitReport:
    """Compliance with first-person / exclamation / length targets.

    Hit rates are measured over the instances whose MR requests the
    feature (None when nothing requests it); average lengths group all
    outputs by their targeted bin.
    """
    if len(mrs) != len(outputs):
        raise ConfigError(f"{len(mrs)} MRs vs {len(outputs)} outputs")
    bad = [mr.variant.value for mr in mrs if mr.variant is not Variant.STYLE]
    if bad:
        raise ConfigError(f"style_hits needs style-variant MRs, got {bad[0]}")
    fp_targeted = fp_hits = excl_targeted = excl_hits = 0
    by_bin: dict[str, list[int]] = {}
    for mr, out in zip(mrs, outputs):
        if mr.first_person:
            fp_targeted += 1
            fp_hits += _is_first_person(out)
        if mr.exclamation:
            excl_targeted += 1
            excl_hits += "!" in out
        by_bin.setdefault(mr.len_bin.value, []).append(_word_count(out))
    return StyleHitReport(
        first_person_hit_rate=(fp_hits / fp_targeted) if fp_targeted else None,
        exclamation_hit_rate=(excl_hits / excl_targeted) if excl_targeted else None,
        avg_len_by_bin={b: sum(v) / len(v) for b, v in sorted(by_bin.items())},
    )
