from pathlib import Path

import pytest

from lexopt.corpus import CorpusConfig, ingest_and_filter, table_from_counts
from lexopt.surprisal import Source, SurprisalTable

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_train_tokens() -> list[str]:
    return ingest_and_filter(
        (DATA_DIR / "fixture_train.txt").read_bytes(), CorpusConfig())


@pytest.fixture(scope="session")
def fixture_test_tokens() -> list[str]:
    return ingest_and_filter(
        (DATA_DIR / "fixture_test.txt").read_bytes(), CorpusConfig())


@pytest.fixture
def example_table() -> SurprisalTable:
    """The running example: 2 bits in ten contexts, 24 bits in one."""
    return SurprisalTable.from_values({"w": [(2.0, 10), (24.0, 1)]}, Source.EXTERNAL)


@pytest.fixture
def example_freq():
    return table_from_counts({"w": 11}, total_tokens=11)
