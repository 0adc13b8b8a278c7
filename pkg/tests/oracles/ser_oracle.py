"""Brute-force slot counter used to cross-check the SER implementation.

Counts realizations with regular expressions over a normalized token
string instead of token-list scanning, and tallies D/R/N with explicit
loops. Mirrors the documented matching contract: lowercase, underscores
and hyphens expand to spaces, coordination tokens (and/or) are transparent
inside a multi-token value span, adjective slots need one occurrence.
"""

from __future__ import annotations

import re
from fractions import Fraction


def _normalize(text: str) -> str:
    words = re.findall(r"[a-z0-9']+", text.lower().replace("-", " ").replace("_", " "))
    return " ".join(words)


def _span_pattern(tokens: list[str]) -> re.Pattern:
    body = r" (?:(?:and|or) )*".join(re.escape(tok) for tok in tokens)
    return re.compile(r"(?:^|(?<= ))" + body + r"(?= |$)")


def oracle_ser(mr, output: str):
    """(deletions, repetitions, slots, ser as Fraction)."""
    text = _normalize(output)
    required: dict[tuple, int] = {}
    for t in mr.tuples:
        key = (t.attr.value, t.value)
        if t.mention is not None:
            required[key] = max(required.get(key, 0), t.mention)
        else:
            required[key] = required.get(key, 0) + 1
    deletions = 0
    repetitions = 0
    for (_attr, value), needed in required.items():
        found = len(_span_pattern(value.split("_")).findall(text))
        if found < needed:
            deletions += needed - found
        elif found > needed:
            repetitions += found - needed
    slots = len(mr.tuples)
    if mr.variant.value != "base":
        for t in mr.tuples:
            if t.adj is None or t.adj == "no_adj":
                continue
            slots += 1
            if not _span_pattern(t.adj.split("_")).search(text):
                deletions += 1
    return deletions, repetitions, slots, Fraction(deletions + repetitions, slots)
