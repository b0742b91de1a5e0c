import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from usagekit.similarity import deterministic_similarity, exact_match_similarity


@pytest.fixture(scope="session")
def exact_sim():
    return exact_match_similarity()


@pytest.fixture(scope="session")
def det_sim():
    return deterministic_similarity()
