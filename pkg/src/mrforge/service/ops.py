"""Service operations: the single implementation behind HTTP routes and CLI.

Each function takes a request model, does the file IO, and returns a
response model. Failures raise ToolkitError subclasses; the HTTP app and
the CLI translate the category into status codes / exit codes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .. import corpus as corpus_mod
from .. import metrics as metrics_mod
from ..conllu import FilterPolicy, read_conllu, read_metadata, sample_sentences
from ..errors import ConfigError, FormatError, IoError
from ..extract import Variant
from ..lexicon import load_manifest, write_lexicon_dir
from .schemas import (
    DEFAULT_METRICS,
    KNOWN_METRICS,
    BuildRequest,
    BuildResponse,
    EvalRequest,
    EvalResponse,
    OverlapRequest,
    OverlapResponse,
    SplitFiles,
    SplitRequest,
    SplitResponse,
    StatsRequest,
    StatsResponse,
    TemplateModel,
    TemplatesRequest,
    TemplatesResponse,
)

SPLIT_NAMES = ("train", "dev", "test")


def config_hash(request) -> str:
    payload = json.dumps(request.model_dump(), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _parse_variants(names: list[str]) -> list[Variant]:
    expanded: list[Variant] = []
    for name in names:
        for part in name.split(","):
            part = part.strip().lower()
            if not part:
                continue
            if part == "all":
                return list(Variant)
            try:
                expanded.append(Variant(part))
            except ValueError:
                raise ConfigError(f"unknown variant {part!r}") from None
    if not expanded:
        raise ConfigError("no variant selected")
    return list(dict.fromkeys(expanded))


def _filter_policy(req: BuildRequest) -> FilterPolicy:
    if req.filter is not None:
        data = req.filter.model_dump()
        if data.get("anchor_values") is None:
            data.pop("anchor_values", None)
        return FilterPolicy.from_mapping(data)
    if req.filter_config is not None:
        return FilterPolicy.from_toml(req.filter_config)
    return FilterPolicy()


def run_build(req: BuildRequest) -> BuildResponse:
    lexicon = load_manifest(req.lexicons)
    policy = _filter_policy(req)
    variants = _parse_variants(req.variants)
    metadata = read_metadata(req.meta) if req.meta else None
    sentences = []
    for path in req.conllu:
        sentences.extend(read_conllu(path, metadata=metadata))
    if req.sample is not None:
        sentences = sample_sentences(sentences, req.sample, req.seed)
    per_variant = corpus_mod.build_instances(sentences, lexicon, variants, policy)
    if all(not instances for instances in per_variant.values()):
        raise FormatError("no extractable sentences")
    spec = corpus_mod.SplitSpec.parse(req.split, seed=req.seed)
    out_dir = Path(req.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    files: dict[str, SplitFiles] = {}
    sizes: dict[str, dict[str, int]] = {}
    stats: dict = {}
    for variant in variants:
        instances = per_variant[variant]
        splits = dict(zip(SPLIT_NAMES, corpus_mod.split_corpus(instances, spec)))
        paths = {"all": out_dir / f"{variant.value}.jsonl"}
        corpus_mod.write_corpus(paths["all"], instances)
        for name in SPLIT_NAMES:
            paths[name] = out_dir / f"{variant.value}_{name}.jsonl"
            corpus_mod.write_corpus(paths[name], splits[name])
        files[variant.value] = SplitFiles(**{k: str(v) for k, v in paths.items()})
        sizes[variant.value] = {
            "all": len(instances), **{n: len(splits[n]) for n in SPLIT_NAMES}
        }
        stats[variant.value] = {
            "all": corpus_mod.corpus_stats(instances).to_dict(),
            **{
                n: corpus_mod.corpus_stats(splits[n]).to_dict()
                for n in SPLIT_NAMES
                if splits[n]
            },
        }
    lexicon_manifest = write_lexicon_dir(lexicon, out_dir / "lexicons")
    chash = config_hash(req)
    stats_payload = {
        "seed": req.seed,
        "config_hash": chash,
        "sizes": sizes,
        "stats": stats,
    }
    stats_file = out_dir / "stats.json"
    stats_file.write_text(
        json.dumps(stats_payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    return BuildResponse(
        files=files,
        sizes=sizes,
        lexicon_manifest=str(lexicon_manifest),
        stats_file=str(stats_file),
        stats=stats,
        seed=req.seed,
        config_hash=chash,
    )


def run_split(req: SplitRequest) -> SplitResponse:
    instances = corpus_mod.read_corpus(req.corpus)
    spec = corpus_mod.SplitSpec.parse(req.split, seed=req.seed)
    splits = dict(zip(SPLIT_NAMES, corpus_mod.split_corpus(instances, spec)))
    out_dir = Path(req.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(req.corpus).stem
    files = {}
    for name in SPLIT_NAMES:
        path = out_dir / f"{stem}_{name}.jsonl"
        corpus_mod.write_corpus(path, splits[name])
        files[name] = str(path)
    return SplitResponse(
        files=files,
        sizes={n: len(splits[n]) for n in SPLIT_NAMES},
        seed=req.seed,
        config_hash=config_hash(req),
    )


def run_overlap(req: OverlapRequest) -> OverlapResponse:
    train = corpus_mod.read_corpus(req.train)
    test = corpus_mod.read_corpus(req.test)
    pct_mrs, pct_pairs = corpus_mod.overlap_report(train, test)
    return OverlapResponse(
        pct_test_mrs_in_train=pct_mrs,
        pct_test_pairs_in_train=pct_pairs,
        config_hash=config_hash(req),
    )


def run_stats(req: StatsRequest) -> StatsResponse:
    instances = corpus_mod.read_corpus(req.corpus)
    stats = corpus_mod.corpus_stats(instances)
    return StatsResponse(
        stats=stats.to_dict(),
        table=corpus_mod.render_stats_table(stats, title=Path(req.corpus).name),
        config_hash=config_hash(req),
    )


def read_outputs(path: str | Path, instances) -> list[str]:
    """Generated outputs, aligned to the corpus.

    Plain text: one output per line, aligned by line number. JSONL with
    ``id`` and ``output`` keys: aligned by instance id.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read outputs file {path}: {exc}") from exc
    lines = text.splitlines()
    stripped = [ln for ln in lines if ln.strip()]
    first = stripped[0] if stripped else ""
    if first.lstrip().startswith("{"):
        by_id: dict[str, str] = {}
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if "id" not in rec or "output" not in rec:
                raise FormatError(f"{path}:{lineno}: record needs id and output keys")
            by_id[str(rec["id"])] = str(rec["output"])
        missing = [inst.id for inst in instances if inst.id not in by_id]
        if missing:
            raise FormatError(
                f"{path}: outputs missing for {len(missing)} corpus ids (first: {missing[0]})"
            )
        return [by_id[inst.id] for inst in instances]
    if len(stripped) != len(instances):
        raise FormatError(
            f"{path}: {len(stripped)} outputs vs {len(instances)} corpus instances"
        )
    return stripped


def run_eval(req: EvalRequest) -> EvalResponse:
    instances = corpus_mod.read_corpus(req.corpus)
    if not instances:
        raise FormatError(f"empty corpus {req.corpus}")
    outputs = read_outputs(req.outputs, instances)
    variant = instances[0].variant
    if req.metrics is None:
        wanted = list(DEFAULT_METRICS)
        if variant is Variant.STYLE:
            wanted.append("style")
        if req.lexicons:
            wanted.append("templates")
    else:
        wanted = []
        for name in req.metrics:
            wanted.extend(p.strip().lower() for p in name.split(",") if p.strip())
        unknown = [m for m in wanted if m not in KNOWN_METRICS]
        if unknown:
            raise ConfigError(f"unknown metric {unknown[0]!r} (known: {', '.join(KNOWN_METRICS)})")
    report: dict = {}
    mrs = [inst.mr for inst in instances]
    refs = [inst.reference.lower() for inst in instances]
    hyps = [out.lower() for out in outputs]
    if "ser" in wanted:
        summary = metrics_mod.average_ser(mrs, outputs)
        report["ser"] = {
            "avg_ser": summary.avg_ser,
            "deletions": summary.deletions,
            "repetitions": summary.repetitions,
            "slots": summary.slots,
            "count": summary.count,
        }
    if "bleu" in wanted:
        report["bleu"] = metrics_mod.bleu(hyps, refs)
    if "nist" in wanted:
        report["nist"] = metrics_mod.nist(hyps, refs)
    if "entropy" in wanted:
        report["entropy"] = metrics_mod.entropy(hyps)
    if "discourse" in wanted:
        flags = [metrics_mod.detect_discourse(h) for h in hyps]
        report["discourse"] = {
            "pct_contrast": 100.0 * sum(c for c, _ in flags) / len(flags),
            "pct_aggregation": 100.0 * sum(a for _, a in flags) / len(flags),
        }
    if "vocab" in wanted:
        report["vocab"] = _vocab_stats(instances, hyps)
    if "style" in wanted:
        hit = metrics_mod.style_hits(mrs, outputs)
        report["style"] = {
            "first_person_hit_rate": hit.first_person_hit_rate,
            "exclamation_hit_rate": hit.exclamation_hit_rate,
            "avg_len_by_bin": hit.avg_len_by_bin,
        }
    if "templates" in wanted:
        if not req.lexicons:
            raise ConfigError("templates metric needs --lexicons")
        lexicon = load_manifest(req.lexicons)
        ranked = metrics_mod.template_ranks(hyps, lexicon)
        report["templates"] = {
            "unique_templates": len(ranked),
            "top": [
                {"pattern": t.pattern, "count": t.count, "rank": t.rank}
                for t in ranked[: req.top_k]
            ],
        }
    return EvalResponse(
        metrics=report,
        count=len(instances),
        table=render_eval_table(report),
        config_hash=config_hash(req),
    )


def _vocab_stats(instances, hyps: list[str]) -> dict:
    from ..extract import NO_ADJ

    inventory = {
        t.adj
        for inst in instances
        for t in inst.mr.tuples
        if t.adj is not None and t.adj != NO_ADJ
    }
    vocab = set()
    total_len = 0
    adj_tokens = 0
    adjs_used = set()
    for hyp in hyps:
        tokens = hyp.split()
        vocab.update(tokens)
        total_len += len(tokens)
        for tok in tokens:
            core = tok.strip(".,!?;:\"'()")
            if core in inventory:
                adj_tokens += 1
                adjs_used.add(core)
    n = len(hyps)
    return {
        "vocab_size": len(vocab),
        "avg_len": total_len / n,
        "adj_inventory": len(inventory),
        "unique_adjs_used": len(adjs_used),
        "adjs_per_output": adj_tokens / n,
    }


def run_templates(req: TemplatesRequest) -> TemplatesResponse:
    lexicon = load_manifest(req.lexicons)
    texts = _read_template_texts(req.outputs)
    ranked = metrics_mod.template_ranks([t.lower() for t in texts], lexicon)
    return TemplatesResponse(
        unique_templates=len(ranked),
        total_texts=len(texts),
        top=[
            TemplateModel(pattern=t.pattern, count=t.count, rank=t.rank)
            for t in ranked[: req.top_k]
        ],
        config_hash=config_hash(req),
    )


def _read_template_texts(path: str | Path) -> list[str]:
    """Outputs file (lines or id/output JSONL) or corpus JSONL references."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read outputs file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: no texts")
    if lines[0].lstrip().startswith("{"):
        texts = []
        for lineno, line in enumerate(lines, start=1):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            value = rec.get("output", rec.get("reference"))
            if value is None:
                raise FormatError(f"{path}:{lineno}: record needs output or reference")
            texts.append(str(value))
        return texts
    return lines


def render_eval_table(report: dict) -> str:
    rows: list[tuple[str, str]] = []
    if "ser" in report:
        rows.append(("Avg SER", f"{report['ser']['avg_ser']:.3f}"))
    if "bleu" in report:
        rows.append(("BLEU", f"{report['bleu']:.4f}"))
    if "nist" in report:
        rows.append(("NIST", f"{report['nist']:.4f}"))
    if "entropy" in report:
        rows.append(("Entropy", f"{report['entropy']:.2f}"))
    if "vocab" in report:
        rows.append(("Vocab", f"{report['vocab']['vocab_size']}"))
        rows.append(("SentLen", f"{report['vocab']['avg_len']:.2f}"))
        rows.append(("Adj/Ref", f"{report['vocab']['adjs_per_output']:.2f}"))
    if "discourse" in report:
        rows.append(("% Contrast", f"{report['discourse']['pct_contrast']:.2f}%"))
        rows.append(("% Aggreg.", f"{report['discourse']['pct_aggregation']:.2f}%"))
    if "style" in report:
        style = report["style"]
        fp = style["first_person_hit_rate"]
        ex = style["exclamation_hit_rate"]
        rows.append(("1st-person hits", "n/a" if fp is None else f"{fp:.2%}"))
        rows.append(("Exclam. hits", "n/a" if ex is None else f"{ex:.2%}"))
        for bin_name, avg in style["avg_len_by_bin"].items():
            rows.append((f"AvgLen {bin_name}", f"{avg:.2f}"))
    if "templates" in report:
        rows.append(("Templates", f"{report['templates']['unique_templates']}"))
    if not rows:
        return "(empty report)"
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)
