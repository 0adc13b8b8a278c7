"""Plain-loop trigram entropy used to cross-check the implementation."""

from __future__ import annotations

import math


def oracle_entropy(texts) -> float:
    counts: dict[tuple, int] = {}
    total = 0
    for text in texts:
        words = text.lower().split()
        for i in range(len(words) - 2):
            key = (words[i], words[i + 1], words[i + 2])
            counts[key] = counts.get(key, 0) + 1
            total += 1
    if total == 0:
        raise ValueError("no trigrams")
    result = 0.0
    for count in counts.values():
        p = count / total
        result -= p * math.log(p, 2)
    return result
