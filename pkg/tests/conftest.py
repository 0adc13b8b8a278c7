import sys
from pathlib import Path

import pytest

from mrforge import bundled_lexicon_manifest, load_manifest, read_conllu

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def seed_lexicon():
    # Fresh copy per test: compound expansion mutates the lexicon.
    return load_manifest(bundled_lexicon_manifest())


@pytest.fixture
def table2_sentences():
    return list(read_conllu(FIXTURES / "table2.conllu"))
