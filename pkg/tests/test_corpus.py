import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mrforge import (
    AttributeType,
    CorpusInstance,
    LenBin,
    MeaningRepresentation,
    MrTuple,
    Sentiment,
    SplitSpec,
    Variant,
    build_mr,
    corpus_stats,
    overlap_report,
    parse_mr_text,
    read_corpus,
    serialize_mr,
    split_corpus,
    write_corpus,
)
from mrforge.corpus import instance_to_record, mr_from_dict, mr_to_dict, _allocate
from mrforge.errors import ConfigError
from mrforge.extract import NO_ADJ, StyleFeatures, assign_mentions, project_mr

WORDS = ["beef", "rice", "sauce", "waiter", "salad", "soup", "crab", "steak", "gyro"]
ADJS = [NO_ADJ, "good", "dry", "spicy", "tender", "fresh", "bland"]


def random_mr(rng: random.Random, variant: Variant, reference: str = "") -> MeaningRepresentation:
    n = rng.randint(1, 6)
    entries = []
    for _ in range(n):
        attr = rng.choice([AttributeType.FOOD, AttributeType.STAFF, AttributeType.PRICE])
        if rng.random() < 0.25:
            value = "_".join(rng.sample(WORDS, 2))
        else:
            value = rng.choice(WORDS)
        entries.append((attr, value, rng.choice(ADJS)))
    style = StyleFeatures(
        sentiment=Sentiment(rng.randint(1, 3)),
        len_bin=rng.choice(list(LenBin)),
        first_person=rng.random() < 0.5,
        exclamation=rng.random() < 0.2,
    )
    return project_mr(assign_mentions(entries), style, variant, reference)


def mk_instance(i: int, mr: MeaningRepresentation, reference: str) -> CorpusInstance:
    return CorpusInstance(
        id=f"inst-{i:06d}",
        mr=mr,
        reference=reference,
        review_id=f"rv{i}",
        business_id=f"b{i % 7}",
        stars=3,
    )


def synthetic_corpus(n: int, variant: Variant = Variant.STYLE, seed: int = 5) -> list[CorpusInstance]:
    rng = random.Random(seed)
    out = []
    for i in range(n):
        ref = " ".join(rng.choices(WORDS + ["the", "was", "and", "very"], k=rng.randint(4, 12)))
        out.append(mk_instance(i, random_mr(rng, variant, ref), ref))
    return out


# --- serialization -----------------------------------------------------------

def test_serialize_showcase_style(table2_sentences, seed_lexicon):
    mr = build_mr(table2_sentences[0], seed_lexicon, Variant.STYLE)
    assert serialize_mr(mr) == (
        "(attr=food, val=chicken_chimichanga, adj=tasty, mention=1), "
        "(attr=food, val=beef, adj=no_adj, mention=1) "
        "+[sentiment=positive, len=medium, first_person=false, exclamation=true]"
    )


def test_serialize_base_projection(table2_sentences, seed_lexicon):
    mr = build_mr(table2_sentences[0], seed_lexicon, Variant.BASE)
    assert serialize_mr(mr) == "(attr=food, val=chicken_chimichanga), (attr=food, val=beef)"


def test_serialize_sent_block(table2_sentences, seed_lexicon):
    mr = build_mr(table2_sentences[1], seed_lexicon, Variant.SENT)
    assert serialize_mr(mr).endswith(" +[sentiment=neutral]")


def test_serialize_deterministic(table2_sentences, seed_lexicon):
    mr = build_mr(table2_sentences[2], seed_lexicon, Variant.STYLE)
    assert serialize_mr(mr) == serialize_mr(mr)


def test_round_trip_randomized():
    rng = random.Random(99)
    for i in range(1000):
        variant = rng.choice(list(Variant))
        mr = random_mr(rng, variant)
        parsed = parse_mr_text(serialize_mr(mr))
        assert parsed.content_equal(mr), serialize_mr(mr)


def test_round_trip_json():
    rng = random.Random(7)
    for _ in range(300):
        mr = random_mr(rng, rng.choice(list(Variant)), reference="some ref text")
        assert mr_from_dict(mr_to_dict(mr), reference="some ref text") == mr


def test_parse_rejects_malformed():
    from mrforge.errors import FormatError

    with pytest.raises(FormatError):
        parse_mr_text("no tuples here")
    with pytest.raises(FormatError):
        parse_mr_text("(attr=food)")


def test_restaurant_attr_round_trips():
    mr = MeaningRepresentation(
        variant=Variant.BASE,
        tuples=(MrTuple(attr=AttributeType.RESTAURANT_TYPE, value="buffet"),),
    )
    text = serialize_mr(mr)
    assert "attr=restaurant," in text
    assert parse_mr_text(text).tuples[0].attr is AttributeType.RESTAURANT_TYPE


# --- splitting ---------------------------------------------------------------

def test_split_ten_instances():
    corpus = synthetic_corpus(10)
    train, dev, test = split_corpus(corpus, SplitSpec(seed=1))
    assert (len(train), len(dev), len(test)) == (8, 1, 1)


def test_split_deterministic():
    corpus = synthetic_corpus(200)
    a = split_corpus(corpus, SplitSpec(seed=3))
    b = split_corpus(corpus, SplitSpec(seed=3))
    assert [[i.id for i in part] for part in a] == [[i.id for i in part] for part in b]


def test_split_partition_properties():
    corpus = synthetic_corpus(157)
    train, dev, test = split_corpus(corpus, SplitSpec(seed=11))
    ids = [i.id for i in train] + [i.id for i in dev] + [i.id for i in test]
    assert sorted(ids) == sorted(i.id for i in corpus)
    assert len(set(ids)) == len(ids)


@given(st.integers(min_value=3, max_value=4000), st.integers(min_value=0, max_value=50))
@settings(max_examples=40, deadline=None)
def test_split_sizes_within_one(n, seed):
    sizes = _allocate(n, (0.8, 0.1, 0.1))
    assert sum(sizes) == n
    for size, frac in zip(sizes, (0.8, 0.1, 0.1)):
        assert abs(size - frac * n) <= 1, (n, sizes)
    del seed


def test_split_validation():
    with pytest.raises(ConfigError):
        SplitSpec(train_frac=1.0, dev_frac=0.0, test_frac=0.0)
    with pytest.raises(ConfigError):
        SplitSpec(train_frac=0.5, dev_frac=0.2, test_frac=0.2)
    with pytest.raises(ConfigError):
        SplitSpec.parse("0.8,0.2")
    spec = SplitSpec.parse("0.7, 0.2, 0.1", seed=4)
    assert spec.train_frac == 0.7 and spec.seed == 4


def test_split_empty_corpus_rejected():
    with pytest.raises(ConfigError):
        split_corpus([], SplitSpec())


# --- overlap -----------------------------------------------------------------

def test_overlap_disjoint():
    train = synthetic_corpus(40, seed=1)
    test = synthetic_corpus(40, seed=2)
    test = [
        CorpusInstance(
            id=f"t{i}", mr=inst.mr, reference=inst.reference + " extra",
            review_id=inst.review_id, business_id=inst.business_id, stars=inst.stars,
        )
        for i, inst in enumerate(test)
    ]
    train_mrs = {serialize_mr(i.mr) for i in train}
    test = [t for t in test if serialize_mr(t.mr) not in train_mrs]
    pct_mr, pct_pair = overlap_report(train, test)
    assert (pct_mr, pct_pair) == (0.0, 0.0)


def test_overlap_subset():
    corpus = synthetic_corpus(50)
    pct_mr, pct_pair = overlap_report(corpus, corpus[:10])
    assert (pct_mr, pct_pair) == (100.0, 100.0)


def test_overlap_constructed_14_percent():
    test = synthetic_corpus(100, seed=21)
    train = synthetic_corpus(300, seed=22)
    train_mrs = {serialize_mr(i.mr) for i in train}
    test = [t for t in test if serialize_mr(t.mr) not in train_mrs]
    while len(test) < 100:  # top up with unseen MRs
        extra = synthetic_corpus(200, seed=23 + len(test))
        test += [t for t in extra if serialize_mr(t.mr) not in train_mrs][: 100 - len(test)]
    test = test[:100]
    # plant 14 test MRs in train: 5 as exact pairs, 9 with fresh references
    planted = []
    for k, inst in enumerate(test[:14]):
        ref = inst.reference if k < 5 else inst.reference + " tail"
        planted.append(
            CorpusInstance(
                id=f"plant{k}", mr=inst.mr, reference=ref,
                review_id="rvp", business_id="bp", stars=3,
            )
        )
    pct_mr, pct_pair = overlap_report(train + planted, test)
    assert pct_mr == pytest.approx(14.0)
    assert pct_pair == pytest.approx(5.0)
    assert pct_pair <= pct_mr


def test_overlap_variant_mismatch():
    with pytest.raises(ConfigError):
        overlap_report(synthetic_corpus(5, Variant.BASE), synthetic_corpus(5, Variant.STYLE))


# --- statistics --------------------------------------------------------------

def single_ref_corpus(text: str, n: int = 1):
    rng = random.Random(0)
    return [mk_instance(i, random_mr(rng, Variant.BASE, text), text) for i in range(n)]


def test_stats_single_reference():
    stats = corpus_stats(single_ref_corpus("a b c"))
    assert stats.size == 1
    assert stats.vocab_size == 3
    assert stats.entropy == 0.0
    assert stats.avg_ref_len == 3.0


def test_stats_duplicate_references_entropy_unchanged():
    one = corpus_stats(single_ref_corpus("a b c d"))
    two = corpus_stats(single_ref_corpus("a b c d", n=2))
    assert two.vocab_size == one.vocab_size == 4
    assert two.entropy == pytest.approx(one.entropy)
    # "a b c d" holds two equiprobable trigrams -> exactly 1 bit
    assert one.entropy == pytest.approx(1.0)


def test_stats_histogram_sums_to_size():
    corpus = synthetic_corpus(173)
    stats = corpus_stats(corpus)
    assert sum(stats.mr_len_histogram.values()) == stats.size == 173
    assert 0 <= stats.pct_contrast <= 100
    assert 0 <= stats.pct_aggregation <= 100


def test_stats_showcase_histogram(table2_sentences, seed_lexicon):
    instances = [
        mk_instance(i, build_mr(s, seed_lexicon, Variant.STYLE), s.text())
        for i, s in enumerate(table2_sentences)
    ]
    stats = corpus_stats(instances)
    assert stats.mr_len_histogram == {2: 2, 3: 1, 4: 1}


def test_stats_entropy_matches_brute_force():
    corpus = synthetic_corpus(100, seed=31)
    # independent oracle: dict-of-counts over explicit loops
    counts = {}
    total = 0
    for inst in corpus:
        toks = inst.reference.lower().split()
        for i in range(len(toks) - 2):
            key = " ".join(toks[i : i + 3])
            counts[key] = counts.get(key, 0) + 1
            total += 1
    expected = 0.0
    for c in counts.values():
        p = c / total
        expected -= p * math.log2(p)
    assert corpus_stats(corpus).entropy == pytest.approx(expected, abs=1e-9)


# --- JSONL store -------------------------------------------------------------

def test_write_read_round_trip(tmp_path):
    corpus = synthetic_corpus(25)
    path = tmp_path / "corpus.jsonl"
    assert write_corpus(path, corpus) == 25
    assert read_corpus(path) == corpus


def test_record_key_order(tmp_path):
    corpus = synthetic_corpus(1)
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, corpus)
    record = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert list(record) == [
        "id", "variant", "mr", "mr_text", "reference", "review_id", "business_id", "stars",
    ]
    assert record["mr_text"] == serialize_mr(corpus[0].mr)


def test_instance_record_parses_mr_text(tmp_path):
    corpus = synthetic_corpus(10)
    for inst in corpus:
        record = instance_to_record(inst)
        assert parse_mr_text(record["mr_text"]).content_equal(inst.mr)
