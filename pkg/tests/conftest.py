import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphclf.generators import DatasetSpec, build_dataset, gen_er  # noqa: E402


@pytest.fixture(scope="session")
def tiny_dataset():
    return build_dataset(DatasetSpec(4, (32, 48), 3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_graphs(count, max_n, seed=0, min_n=2):
    r = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(r.integers(min_n, max_n + 1))
        out.append(gen_er(n, float(r.uniform(0.05, 0.6)), int(r.integers(2**32))))
    return out


@pytest.fixture(scope="session")
def small_dataset():
    """10 graphs per class: 8/1/1 per class across the splits."""
    return build_dataset(DatasetSpec(10, (24, 40), 5))


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line: acceptance(key, passed, detail)."""
    def record(key, passed, detail=""):
        ACCEPTANCE[key] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0].rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
