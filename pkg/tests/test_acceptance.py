"""The fourteen acceptance criteria at their stated tolerances."""
import pytest

from conftest import record_acceptance
from spherical_gowers.harness import CRITERIA, run_criterion

SEED = 1


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number, seed=SEED)
    line = f"{res.summary()} ({res.seconds:.1f}s)"
    print(line)
    record_acceptance(line)
    failed = [r for r in res.rows if not r.passed]
    assert res.passed, f"{len(failed)} failing rows, first: {failed[:1]}"


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        print(run_criterion(n, seed=SEED).summary())
