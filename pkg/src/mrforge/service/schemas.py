"""Request/response models for the HTTP service and the CLI client."""

from __future__ import annotations

from pydantic import BaseModel, Field

DEFAULT_METRICS = ("ser", "bleu", "nist", "entropy", "discourse", "vocab")
KNOWN_METRICS = ("ser", "bleu", "nist", "entropy", "discourse", "vocab", "style", "templates")


class FilterPolicyModel(BaseModel):
    min_len: int = 4
    max_len: int = 30
    anchor_values: list[str] | None = None
    drop_fragments: bool = True


class BuildRequest(BaseModel):
    lexicons: str
    conllu: list[str]
    out: str
    meta: str | None = None
    variants: list[str] = Field(default_factory=lambda: ["all"])
    split: str = "0.8,0.1,0.1"
    seed: int = 0
    sample: int | None = None
    filter: FilterPolicyModel | None = None
    filter_config: str | None = None


class SplitFiles(BaseModel):
    all: str
    train: str
    dev: str
    test: str


class BuildResponse(BaseModel):
    files: dict[str, SplitFiles]
    sizes: dict[str, dict[str, int]]
    lexicon_manifest: str
    stats_file: str
    stats: dict
    seed: int
    config_hash: str


class SplitRequest(BaseModel):
    corpus: str
    out: str
    split: str = "0.8,0.1,0.1"
    seed: int = 0


class SplitResponse(BaseModel):
    files: dict[str, str]
    sizes: dict[str, int]
    seed: int
    config_hash: str


class OverlapRequest(BaseModel):
    train: str
    test: str


class OverlapResponse(BaseModel):
    pct_test_mrs_in_train: float
    pct_test_pairs_in_train: float
    config_hash: str


class StatsRequest(BaseModel):
    corpus: str


class StatsResponse(BaseModel):
    stats: dict
    table: str
    config_hash: str


class EvalRequest(BaseModel):
    corpus: str
    outputs: str
    metrics: list[str] | None = None
    lexicons: str | None = None
    top_k: int = 20


class EvalResponse(BaseModel):
    metrics: dict
    count: int
    table: str
    config_hash: str


class TemplateModel(BaseModel):
    pattern: str
    count: int
    rank: int


class TemplatesRequest(BaseModel):
    outputs: str
    lexicons: str
    top_k: int = 20


class TemplatesResponse(BaseModel):
    unique_templates: int
    total_texts: int
    top: list[TemplateModel]
    config_hash: str
