import io
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roughga.data import hiv_schema, load_table  # noqa: E402
from roughga.rough import InformationSystem  # noqa: E402

HEADER = "race,mothers_age,education,gravidity,parity,fathers_age,hiv_status"


def csv_table(*rows, header=HEADER, schema=None):
    text = "\n".join([header, *rows]) + "\n"
    return load_table(io.BytesIO(text.encode()), schema or hiv_schema())


def random_system(rng, n=None, m=None, bins=None):
    n = int(rng.integers(1, 201)) if n is None else n
    m = int(rng.integers(1, 7)) if m is None else m
    bins = int(rng.integers(1, 5)) if bins is None else bins
    values = rng.integers(0, bins, size=(n, m))
    decisions = rng.integers(0, 2, size=n)
    return InformationSystem.from_rows(values.tolist(), decisions.tolist())


@pytest.fixture
def schema():
    return hiv_schema()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results.values():
            terminalreporter.write_line(line)
