"""The nine acceptance criteria, one test each; every test prints a pass/fail line."""
import json
import time

import pytest

from criteria import CRITERIA

TIME_LIMITS = {1: 60, 3: 60, 4: 60, 6: 300, 7: 600}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    start = time.perf_counter()
    ok, report = CRITERIA[number]()
    elapsed = time.perf_counter() - start
    limit = TIME_LIMITS.get(number)
    in_time = limit is None or elapsed < limit
    with capsys.disabled():
        verdict = "PASS" if ok and in_time else "FAIL"
        print(f"\ncriterion {number}: {verdict} ({elapsed:.1f}s"
              + (f", limit {limit}s)" if limit else ")"))
    assert ok, json.dumps(report, sort_keys=True)[:4000]
    assert in_time, f"took {elapsed:.1f}s, limit {limit}s"
