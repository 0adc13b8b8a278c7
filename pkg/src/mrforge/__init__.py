"""mrforge: build MR/reference corpora from parsed review sentences and
evaluate generator outputs for semantic fidelity and stylistic control."""

from .conllu import (
    FilterPolicy,
    ParsedSentence,
    Token,
    passes_filter,
    read_conllu,
    read_metadata,
    sample_sentences,
)
from .corpus import (
    CorpusInstance,
    CorpusStats,
    SplitSpec,
    corpus_stats,
    overlap_report,
    parse_mr_text,
    read_corpus,
    serialize_mr,
    split_corpus,
    write_corpus,
)
from .errors import ConfigError, FormatError, IoError, ToolkitError
from .extract import (
    NO_ADJ,
    LenBin,
    MeaningRepresentation,
    MrTuple,
    Sentiment,
    StyleFeatures,
    Variant,
    build_mr,
    extract_adjectives,
    extract_values,
    style_features,
)
from .lexicon import (
    AttributeLexicon,
    AttributeType,
    bundled_lexicon_manifest,
    load_lexicons,
    load_manifest,
)
from .metrics import (
    SerBreakdown,
    Template,
    bleu,
    delexicalize,
    detect_discourse,
    entropy,
    nist,
    ser,
    style_hits,
    template_ranks,
)

__version__ = "0.1.0"
