import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dcquad import benchgen


@pytest.fixture(scope="session")
def benchmarks_scaled():
    return {f.name: f for f in benchgen.coconut_functions(scaled=True)}


@pytest.fixture(scope="session")
def benchmarks_raw():
    return {f.name: f for f in benchgen.coconut_functions(scaled=False)}
