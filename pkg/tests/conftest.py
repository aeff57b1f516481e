import sys
import time
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
DATA = TESTS / "data"
sys.path.insert(0, str(TESTS))

from synthetic import planted_corpus  # noqa: E402

from disscore.embeddings import Hyperparameters, train  # noqa: E402

# Filled by the acceptance module, printed after the run.
ACCEPTANCE_LINES = []

PLANTED_SEED = 3


def load_golden(name):
    rows = []
    with open(DATA / name, encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            sentence, expected = line.rstrip("\n").split("\t")
            rows.append((sentence, [] if expected == "-" else expected.split()))
    return rows


_TRAINED = {}


def trained_planted_model():
    """5k-pair planted corpus model, trained once per session."""
    if "model" not in _TRAINED:
        pairs = planted_corpus(5000)
        t0 = time.perf_counter()
        model = train(pairs, Hyperparameters(seed=PLANTED_SEED), corpus_id="planted")
        _TRAINED["model"] = model
        _TRAINED["seconds"] = time.perf_counter() - t0
    return _TRAINED["model"], _TRAINED["seconds"]


@pytest.fixture(scope="session")
def planted_model():
    return trained_planted_model()[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
