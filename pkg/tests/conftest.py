import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def verdict(capsys):
    """Print one pass/fail line per acceptance criterion, visible without -s."""

    def emit(criterion: int, ok: bool, detail: str, elapsed: float, limit: float | None = None) -> None:
        timely = limit is None or elapsed < limit
        status = "PASS" if ok and timely else "FAIL"
        budget = f" (limit {limit:.0f}s)" if limit is not None else ""
        with capsys.disabled():
            print(f"\ncriterion {criterion}: {status} - {detail} [{elapsed:.2f}s{budget}]")
        assert ok, detail
        assert timely, f"took {elapsed:.2f}s, limit {limit}s"

    return emit
