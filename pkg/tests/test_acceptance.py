"""Acceptance gate: every criterion at its stated tolerance and runtime budget."""
import pytest

from mesonloop.acceptance import run_suite

RESULTS = {}


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("selftest")
    results = run_suite(out, echo=True)
    RESULTS.update({r.number: r for r in results})
    return RESULTS


@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(suite, number):
    res = suite[number]
    print(res.line())
    assert res.passed, f"{res.title}: {res.metrics}"
    assert res.within_budget, f"{res.title}: {res.elapsed:.2f} s exceeds {res.runtime_limit} s"
