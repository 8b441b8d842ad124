import pytest

from lowentropy.verify import SUITES, CriterionResult, VerifyReport, _run_one, run_verify


def test_suites_cover_all_criteria():
    assert SUITES["all"] == tuple(range(1, 13))


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_verify("nope")


def test_overall_is_conjunction():
    good = CriterionResult(1, "a", 0.0, 1.0, True)
    bad = CriterionResult(2, "b", 2.0, 1.0, False)
    assert VerifyReport("all", 0, (good,)).overall
    assert not VerifyReport("all", 0, (good, bad)).overall


def test_crash_is_recorded_as_failure(monkeypatch):
    from lowentropy import verify

    def boom(art, seed):
        raise RuntimeError("scenario exploded")

    monkeypatch.setitem(verify.CRITERIA, 2, boom)
    r = _run_one(2, verify._Artifacts(), 0)
    assert not r.passed and "scenario exploded" in r.detail


def test_report_orders_by_id_and_renders():
    rep = run_verify("entropy", threads=3, seed=5)
    assert [r.id for r in rep.results] == [1, 2, 3, 12]
    assert rep.to_csv().count("\r\n") == 5
    assert rep.to_text().splitlines()[-1].startswith("overall: PASS")
