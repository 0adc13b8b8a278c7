"""Acceptance suite: one test per gate criterion, each printing a verdict
line (run with ``pytest -s tests/test_acceptance.py`` to see them)."""

import json
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from mrforge import (
    AttributeType,
    LenBin,
    MeaningRepresentation,
    MrTuple,
    Sentiment,
    SplitSpec,
    Variant,
    bleu,
    build_mr,
    entropy,
    nist,
    parse_mr_text,
    read_conllu,
    ser,
    serialize_mr,
    template_ranks,
    write_corpus,
)
from mrforge.corpus import CorpusInstance, _allocate, overlap_report
from mrforge.extract import NO_ADJ
from mrforge.lexicon import bundled_lexicon_manifest, load_manifest
from mrforge.service import ops
from mrforge.service.schemas import BuildRequest, EvalRequest

from oracles.entropy_oracle import oracle_entropy
from oracles.ser_oracle import oracle_ser
from test_corpus import random_mr, synthetic_corpus
from test_metrics import GOLDEN_BLEU, GOLDEN_NIST, GOLDEN_PAIRS, mr_of


@contextmanager
def verdict(name):
    try:
        yield
    except BaseException:
        print(f"\n[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"\n[ACCEPTANCE] {name}: PASS")


EXPECTED_SHOWCASE_MRS = [
    "(attr=food, val=chicken_chimichanga, adj=tasty, mention=1), "
    "(attr=food, val=beef, adj=no_adj, mention=1) "
    "+[sentiment=positive, len=medium, first_person=false, exclamation=true]",
    "(attr=food, val=chicken_wrap, adj=no_adj, mention=1), "
    "(attr=service, val=service, adj=slow, mention=1) "
    "+[sentiment=neutral, len=medium, first_person=true, exclamation=false]",
    "(attr=food, val=chicken, adj=bland, mention=1), "
    "(attr=food, val=chicken, adj=spicy, mention=2), "
    "(attr=food, val=chicken, adj=seasoned, mention=3) "
    "+[sentiment=neutral, len=medium, first_person=true, exclamation=false]",
    "(attr=food, val=beef_chicken_kebabs, adj=succulent, mention=1), "
    "(attr=food, val=rice, adj=buttered, mention=1), "
    "(attr=food, val=tomatoes, adj=broiled, mention=1), "
    "(attr=food, val=onions, adj=raw, mention=1) "
    "+[sentiment=positive, len=medium, first_person=false, exclamation=false]",
]


def test_showcase_extraction_fidelity():
    # Published-deviation notes: hyphen/underscore rendering is unified to
    # underscores, and the fourth sentence (18 words) bins as medium under
    # the documented length rule.
    with verdict("table2-extraction-fidelity"):
        started = time.perf_counter()
        lexicon = load_manifest(bundled_lexicon_manifest())
        sentences = list(read_conllu(Path("tests/fixtures/table2.conllu")))
        produced = [
            serialize_mr(build_mr(s, lexicon, Variant.STYLE)) for s in sentences
        ]
        elapsed = time.perf_counter() - started
        assert produced == EXPECTED_SHOWCASE_MRS
        assert elapsed < 1.0, f"extraction took {elapsed:.3f}s"


def test_ser_formula():
    with verdict("ser-formula"):
        mr4 = mr_of([("beef", NO_ADJ), ("rice", NO_ADJ), ("soup", NO_ADJ), ("crab", NO_ADJ)])
        assert ser(mr4, "beef rice soup crab").ser == 0.0
        assert ser(mr4, "beef rice soup").ser == 0.25
        mr5 = mr_of(
            [("beef", "tender"), ("rice", "buttered"), ("soup", NO_ADJ)],
            variant=Variant.ADJ,
        )
        got = ser(mr5, "tender beef with rice and soup , more beef .")
        assert (got.deletions, got.repetitions, got.slots) == (1, 1, 5)
        assert got.ser == pytest.approx(0.4)

        rng = random.Random(20_000)
        values = ["beef", "rice", "soup", "crab", "waiter", "gyro_salad", "chicken_wrap"]
        adjs = [NO_ADJ, "good", "dry", "tender", "spicy", "fresh"]
        fillers = ["the", "was", "and", "with", ",", ".", "very"]
        for _ in range(1000):
            variant = rng.choice(list(Variant))
            entries = [
                (rng.choice(values), rng.choice(adjs)) for _ in range(rng.randint(1, 5))
            ]
            mr = mr_of(entries, variant=variant)
            words = []
            for value, adj in entries:
                for _ in range(rng.choice([0, 1, 1, 1, 2])):
                    words.extend(value.replace("_", " ").split())
                if adj != NO_ADJ and rng.random() < 0.7:
                    words.append(adj)
                words.append(rng.choice(fillers))
            output = " ".join(words) or "nothing"
            got = ser(mr, output)
            d, r, n, exact = oracle_ser(mr, output)
            assert (got.deletions, got.repetitions, got.slots) == (d, r, n)
            assert got.ser == (d + r) / n


def test_ser_magnitude_replay(tmp_path):
    # 1000 MRs x 10 slots; 900 of them lose exactly one slot -> 900 deleted
    # slots over 10,000 = 9.0%, average per-MR SER exactly 0.090.
    with verdict("ser-magnitude-replay"):
        rng = random.Random(404)
        pool = [
            "beef", "rice", "soup", "crab", "steak", "salad", "bacon", "eggs",
            "tofu", "ribs", "pasta", "pizza", "wings", "fries", "toast", "flan",
        ]
        adj_pool = [
            "tender", "dry", "spicy", "fresh", "bland", "crispy", "juicy",
            "salty", "sweet", "smoky", "zesty", "rich", "hot", "cold", "thick",
        ]
        instances = []
        outputs = []
        for i in range(1000):
            values = rng.sample(pool, 5)
            adjs = rng.sample(adj_pool, 5)
            tuples = tuple(
                MrTuple(attr=AttributeType.FOOD, value=v, adj=a, mention=1)
                for v, a in zip(values, adjs)
            )
            mr = MeaningRepresentation(
                variant=Variant.STYLE,
                tuples=tuples,
                sentiment=Sentiment.POSITIVE,
                len_bin=LenBin.MEDIUM,
                first_person=False,
                exclamation=False,
            )
            segments = [f"the {a} {v}" for v, a in zip(values, adjs)]
            reference = " , ".join(segments) + " ."
            out_segments = list(segments)
            if i < 900:  # delete one slot: drop a value or an adjective
                k = rng.randrange(5)
                if rng.random() < 0.5:
                    out_segments[k] = f"the {adjs[k]} dish"
                else:
                    out_segments[k] = f"the {values[k]}"
            output = " , ".join(out_segments) + " ."
            mr = MeaningRepresentation(
                variant=mr.variant, tuples=mr.tuples, reference=reference,
                sentiment=mr.sentiment, len_bin=mr.len_bin,
                first_person=mr.first_person, exclamation=mr.exclamation,
            )
            instances.append(
                CorpusInstance(
                    id=f"perturb-{i:04d}", mr=mr, reference=reference,
                    review_id=f"rv{i}", business_id="b0", stars=4,
                )
            )
            outputs.append(output)
        order = list(range(1000))
        rng.shuffle(order)
        corpus_path = tmp_path / "perturbed.jsonl"
        write_corpus(corpus_path, [instances[i] for i in order])
        outputs_path = tmp_path / "outputs.txt"
        outputs_path.write_text("\n".join(outputs[i] for i in order) + "\n")
        response = ops.run_eval(
            EvalRequest(corpus=str(corpus_path), outputs=str(outputs_path), metrics=["ser"])
        )
        avg = response.metrics["ser"]["avg_ser"]
        assert abs(avg - 0.090) <= 0.005, avg
        assert response.metrics["ser"]["deletions"] == 900


def test_entropy_against_oracle():
    with verdict("entropy-oracle"):
        rng = random.Random(3030)
        vocab = [f"w{i}" for i in range(40)]
        for _ in range(100):
            texts = [
                " ".join(rng.choices(vocab, k=rng.randint(3, 18)))
                for _ in range(rng.randint(1, 60))
            ]
            assert entropy(texts) == pytest.approx(oracle_entropy(texts), abs=1e-9)
        for k in (1, 2, 4, 8, 16, 32):
            texts = [f"u{i} v{i} z{i}" for i in range(k)]
            assert entropy(texts) == math.log2(k)


def test_bleu_nist_goldens():
    with verdict("bleu-nist"):
        refs = [r for _, r in GOLDEN_PAIRS]
        hyps = [h for h, _ in GOLDEN_PAIRS]
        assert bleu(refs, refs) == pytest.approx(1.0, abs=1e-12)
        assert bleu(hyps, refs) == pytest.approx(GOLDEN_BLEU, abs=1e-4)
        assert nist(hyps, refs) == pytest.approx(GOLDEN_NIST, abs=1e-4)


def test_split_and_overlap():
    with verdict("split-overlap"):
        rng = random.Random(11)
        sizes_cases = [3, 10, 101, 1000, 294_625] + [rng.randint(3, 50_000) for _ in range(20)]
        for n in sizes_cases:
            sizes = _allocate(n, (0.8, 0.1, 0.1))
            assert sum(sizes) == n
            for size, frac in zip(sizes, (0.8, 0.1, 0.1)):
                assert abs(size - frac * n) <= 1, (n, sizes)

        from mrforge import split_corpus

        corpus = synthetic_corpus(2946, seed=8)
        train, dev, test = split_corpus(corpus, SplitSpec(seed=9))
        assert sorted(i.id for p in (train, dev, test) for i in p) == sorted(
            i.id for i in corpus
        )

        # constructed overlap: exactly 14 of 100 test MRs appear in train
        test_split = synthetic_corpus(100, seed=21)
        train_split = synthetic_corpus(300, seed=22)
        train_mrs = {serialize_mr(i.mr) for i in train_split}
        test_split = [t for t in test_split if serialize_mr(t.mr) not in train_mrs]
        k = 23
        while len(test_split) < 100:
            extra = synthetic_corpus(200, seed=k)
            k += 1
            test_split += [
                t for t in extra if serialize_mr(t.mr) not in train_mrs
            ][: 100 - len(test_split)]
        planted = [
            CorpusInstance(
                id=f"plant{j}", mr=inst.mr, reference=inst.reference + " tail",
                review_id="rvp", business_id="bp", stars=3,
            )
            for j, inst in enumerate(test_split[:14])
        ]
        pct_mr, pct_pair = overlap_report(train_split + planted, test_split)
        assert pct_mr == pytest.approx(14.0)
        assert pct_pair <= pct_mr


def test_template_mining():
    with verdict("template-mining"):
        lexicon = load_manifest(bundled_lexicon_manifest())
        texts = (
            ["i had the beef ."] * 5
            + ["the rice was good ."] * 3
            + ["we loved the soup !"] * 2
        )
        ranked = template_ranks(texts, lexicon)
        assert [(t.pattern, t.count, t.rank) for t in ranked] == [
            ("i had the [FOOD] .", 5, 1),
            ("the [FOOD] was good .", 3, 2),
            ("we loved the [FOOD] !", 2, 3),
        ]

        # randomized planting: counts, ranks, and unique totals match ground truth
        rng = random.Random(606)
        sentence_forms = [
            "i had the {} .", "the {} was great .", "we shared some {} today .",
            "my friend ordered {} again .", "no {} left for us .",
        ]
        pool = ["beef", "rice", "soup", "crab", "steak", "salad"]
        planted: dict[str, int] = {}
        corpus = []
        for form in sentence_forms:
            for count in (rng.randint(1, 9),):
                value = rng.choice(pool)
                text = form.format(value)
                corpus.extend([text] * count)
                pattern = form.format("[FOOD]").lower().replace("[food]", "[FOOD]")
                planted[pattern] = planted.get(pattern, 0) + count
        rng.shuffle(corpus)
        ranked = template_ranks(corpus, lexicon)
        assert {t.pattern: t.count for t in ranked} == planted
        assert len(ranked) == len(planted)
        counts = [t.count for t in ranked]
        assert counts == sorted(counts, reverse=True)
        assert [t.rank for t in ranked] == list(range(1, len(ranked) + 1))
        assert sum(counts) == len(corpus)


def test_round_trip_and_rebuild(tmp_path):
    with verdict("round-trip-determinism"):
        rng = random.Random(808)
        for _ in range(1000):
            mr = random_mr(rng, rng.choice(list(Variant)))
            assert parse_mr_text(serialize_mr(mr)).content_equal(mr)

        request = BuildRequest(
            lexicons=str(bundled_lexicon_manifest()),
            conllu=["tests/fixtures/table2.conllu"],
            out=str(tmp_path / "build"),
            seed=17,
        )
        ops.run_build(request)
        snapshot = {
            p.relative_to(tmp_path): p.read_bytes()
            for p in sorted((tmp_path / "build").rglob("*"))
            if p.is_file()
        }
        ops.run_build(request)
        again = {
            p.relative_to(tmp_path): p.read_bytes()
            for p in sorted((tmp_path / "build").rglob("*"))
            if p.is_file()
        }
        assert snapshot == again
        assert any(str(path).endswith("style.jsonl") for path in snapshot)
