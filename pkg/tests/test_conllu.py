import io
import math
import random

import pytest

from mrforge import FilterPolicy, ParsedSentence, Token, passes_filter, read_conllu, read_metadata, sample_sentences
from mrforge.conllu import is_fragment, to_conllu_lines
from mrforge.errors import ConfigError, FormatError


def make_sentence(words, stars=4, review_id="r1", is_frag=None, root_upos="VERB"):
    """Flat synthetic parse: first word is the root, rest attach to it."""
    tokens = []
    for i, (surface, upos) in enumerate(words, start=1):
        head = 0 if i == 1 else 1
        deprel = "root" if i == 1 else ("punct" if upos == "PUNCT" else "dep")
        upos = root_upos if i == 1 and upos == "ROOT" else upos
        tokens.append(Token(i, surface, surface.lower(), upos, head, deprel))
    return ParsedSentence(
        tokens=tuple(tokens),
        review_id=review_id,
        business_id="b1",
        stars=stars,
        is_fragment=is_frag,
    )


# --- reader ------------------------------------------------------------------

def test_read_table2(table2_sentences):
    assert len(table2_sentences) == 4
    first = table2_sentences[0]
    assert len(first.tokens) == 12
    assert first.stars == 5
    assert first.review_id == "rv-0001"
    assert first.token(3).surface == "chimichanga"
    assert first.token(2).deprel == "compound"
    assert first.token(2).head == 3


def test_read_empty_stream():
    assert list(read_conllu(io.StringIO(""))) == []


def test_read_missing_stars_errors():
    block = "# sent_id = s9\n# review_id = rvX\n1\tGood\tgood\tADJ\t_\t_\t0\troot\t_\t_\n"
    with pytest.raises(FormatError, match="s9"):
        list(read_conllu(io.StringIO(block)))


def test_read_metadata_join(fixtures_dir):
    meta = read_metadata(fixtures_dir / "meta.jsonl")
    sents = list(read_conllu(fixtures_dir / "nometa.conllu", metadata=meta))
    assert len(sents) == 1
    assert sents[0].stars == 5
    assert sents[0].business_id == "biz-001"


def test_read_bad_column_count():
    block = "# stars = 4\n1\tGood\tgood\tADJ\t0\troot\n"
    with pytest.raises(FormatError, match="columns"):
        list(read_conllu(io.StringIO(block)))


def test_read_non_integer_head():
    block = "# stars = 4\n1\tGood\tgood\tADJ\t_\t_\tX\troot\t_\t_\n"
    with pytest.raises(FormatError):
        list(read_conllu(io.StringIO(block)))


def test_read_skips_ranges_and_empty_nodes():
    block = (
        "# stars = 4\n"
        "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tdo\tdo\tAUX\t_\t_\t2\taux\t_\t_\n"
        "2\teat\teat\tVERB\t_\t_\t0\troot\t_\t_\n"
        "2.1\tghost\tghost\tNOUN\t_\t_\t_\t_\t_\t_\n"
    )
    (sent,) = read_conllu(io.StringIO(block))
    assert [t.surface for t in sent.tokens] == ["do", "eat"]


def test_reserialization_lossless(table2_sentences):
    for sent in table2_sentences:
        text = "\n".join(to_conllu_lines(sent)) + "\n"
        (again,) = read_conllu(io.StringIO(text))
        assert [
            (t.index, t.surface, t.upos, t.head, t.deprel) for t in again.tokens
        ] == [(t.index, t.surface, t.upos, t.head, t.deprel) for t in sent.tokens]
        assert again.stars == sent.stars


def test_sentence_invariants():
    with pytest.raises(FormatError):
        ParsedSentence(tokens=(), review_id="r", business_id="b", stars=3)
    tok = Token(1, "hi", "hi", "INTJ", 1, "root")  # head == own index
    with pytest.raises(FormatError):
        ParsedSentence(tokens=(tok,), review_id="r", business_id="b", stars=3)
    ok = Token(1, "hi", "hi", "INTJ", 0, "root")
    with pytest.raises(FormatError):
        ParsedSentence(tokens=(ok,), review_id="r", business_id="b", stars=6)


# --- filters -----------------------------------------------------------------

def test_filter_accepts_showcase_sentence(table2_sentences):
    ok, reason = passes_filter(table2_sentences[0], FilterPolicy())
    assert ok and reason is None


def test_filter_too_short():
    sent = make_sentence([("Great", "ADJ"), ("chicken", "NOUN"), ("!", "PUNCT")])
    ok, reason = passes_filter(sent, FilterPolicy())
    assert (ok, reason) == (False, "too-short")


def test_filter_no_anchor():
    words = [("We", "PRON")] + [(f"w{i}", "NOUN") for i in range(14)]
    words[0] = ("enjoyed", "VERB")
    sent = make_sentence(words)
    ok, reason = passes_filter(sent, FilterPolicy())
    assert (ok, reason) == (False, "no-anchor")


def test_filter_too_long():
    words = [("ate", "VERB")] + [("chicken", "NOUN")] * 31
    sent = make_sentence(words)
    ok, reason = passes_filter(sent, FilterPolicy())
    assert (ok, reason) == (False, "too-long")


def test_filter_fragment_heuristic():
    sent = make_sentence(
        [("chicken", "ROOT"), ("and", "CCONJ"), ("more", "ADJ"), ("chicken", "NOUN")],
        root_upos="NOUN",
    )
    assert is_fragment(sent)
    ok, reason = passes_filter(sent, FilterPolicy())
    assert (ok, reason) == (False, "fragment")
    ok, reason = passes_filter(sent, FilterPolicy(drop_fragments=False))
    assert ok


def test_filter_fragment_flag_overrides_heuristic():
    sent = make_sentence(
        [("chicken", "ROOT"), ("and", "CCONJ"), ("more", "ADJ"), ("chicken", "NOUN")],
        root_upos="NOUN",
        is_frag=False,
    )
    assert not is_fragment(sent)
    ok, _ = passes_filter(sent, FilterPolicy())
    assert ok


def test_filter_anchor_plural_fallback():
    sent = make_sentence(
        [("loved", "VERB"), ("the", "DET"), ("juicy", "ADJ"), ("steaks", "NOUN")]
    )
    ok, _ = passes_filter(sent, FilterPolicy())
    assert ok


def test_filter_is_pure(table2_sentences):
    policy = FilterPolicy()
    for sent in table2_sentences:
        assert passes_filter(sent, policy) == passes_filter(sent, policy)


def test_filter_policy_validation():
    with pytest.raises(ConfigError):
        FilterPolicy(min_len=0)
    with pytest.raises(ConfigError):
        FilterPolicy(min_len=10, max_len=5)


def test_filter_policy_from_toml(tmp_path):
    cfg = tmp_path / "filter.toml"
    cfg.write_text(
        '[filter]\nmin_len = 5\nmax_len = 25\nanchor_values = ["pork", "tofu"]\ndrop_fragments = false\n'
    )
    policy = FilterPolicy.from_toml(cfg)
    assert policy.min_len == 5
    assert policy.max_len == 25
    assert policy.anchor_values == frozenset({"pork", "tofu"})
    assert policy.drop_fragments is False


# --- sampling ----------------------------------------------------------------

def pool_of(n):
    return [
        make_sentence([("ate", "VERB"), ("chicken", "NOUN")], review_id=f"r{i}")
        for i in range(n)
    ]


def test_sample_whole_pool():
    pool = pool_of(10)
    assert sample_sentences(pool, 10, seed=1) == pool


def test_sample_deterministic():
    pool = pool_of(100)
    assert sample_sentences(pool, 30, seed=42) == sample_sentences(pool, 30, seed=42)


def test_sample_preserves_order():
    pool = pool_of(500)
    sample = sample_sentences(pool, 100, seed=3)
    positions = [pool.index(s) for s in sample]
    assert positions == sorted(positions)


def test_sample_rejects_oversize():
    with pytest.raises(ConfigError):
        sample_sentences(pool_of(5), 6, seed=0)


def test_sample_seeds_differ():
    pool = pool_of(10_000)
    a = sample_sentences(pool, 1000, seed=1)
    b = sample_sentences(pool, 1000, seed=2)
    assert a != b


def test_sample_inclusion_frequencies_unbiased():
    # Monte-Carlo check: per-element inclusion over many seeds should sit
    # near n/pool. A few 3-sigma outliers are expected at this sample count,
    # so require 99% inside 3 sigma and everything inside 4.5 sigma.
    pool_size, n, seeds = 2000, 200, 200
    pool = list(range(pool_size))
    counts = [0] * pool_size
    for seed in range(seeds):
        rng = random.Random(seed)
        for idx in rng.sample(range(pool_size), n):
            counts[idx] += 1
    p = n / pool_size
    sigma = math.sqrt(seeds * p * (1 - p))
    inside3 = sum(1 for c in counts if abs(c - seeds * p) <= 3 * sigma)
    assert inside3 / pool_size >= 0.99
    assert all(abs(c - seeds * p) <= 4.5 * sigma for c in counts)
