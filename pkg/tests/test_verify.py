import json

import numpy as np
import pytest

from tqfi import fisher, verify
from tqfi.fisher import FisherResult, Method
from tqfi.states import UnitaryFamily, random_generator


def small(**kw):
    return verify.SuiteConfig(trials=4, **kw)


def test_zero_trials_gives_empty_report():
    assert verify.run_suite(verify.SuiteConfig(trials=0)) == []


def test_suite_is_deterministic():
    a = [r.to_dict() for r in verify.run_suite(small(seed=3))]
    b = [r.to_dict() for r in verify.run_suite(small(seed=3))]
    assert json.dumps(a) == json.dumps(b)
    assert {r["property_id"] for r in a} >= {"lemma1", "lemma4", "lemma5", "prop1_prop2"}
    assert sum(r["property_id"].startswith("lemma3.") for r in a) == 5


def test_small_suite_passes():
    reports = verify.run_suite(small(seed=11))
    assert verify.all_passed(reports), [r for r in reports if not r.passed]


def test_trial_independence():
    # trial t draws from its own stream, so a longer run extends a shorter one
    short = verify.check_lemma4(5, seed=2)
    longer = verify.check_lemma4(10, seed=2)
    assert longer.worst_slack <= short.worst_slack


def test_tally_semantics():
    t = verify._Tally("x", 0)
    t.record([(0.5, 0.0), (-1e-12, 1e-10)])
    t.record([(-1.0, 1e-10)])
    t.record([(float("nan"), 1.0)])
    rep = t.report()
    assert (rep.trials, rep.failures) == (3, 2)
    assert np.isnan(rep.worst_slack) or rep.worst_slack == -1.0


def test_lemma1_detects_violation(monkeypatch):
    real = fisher.tqfi

    def inflated(family, theta, m):
        res = real(family, theta, m)
        return FisherResult(res.value * 1.5 + 0.1, Method.CLOSED_FORM, m)

    monkeypatch.setattr(fisher, "tqfi", inflated)
    assert verify.check_lemma1(10, 5, 0).failures > 0


def test_lemma5_on_truncated_instance():
    fam = UnitaryFamily.from_matrices(np.diag([0.5, 0.3, 0.2]), random_generator(3, 4))
    rep = verify.check_lemma5(fam, 2, fisher.guarded_deltas(fam, 2))
    assert rep.passed
    prof = verify.curvature_profile(fam, 2, fisher.guarded_deltas(fam, 2))
    assert abs(prof.coefficients[0]) <= 1e-8 and abs(prof.coefficients[1]) <= 1e-8
    assert 4 * prof.coefficients[2] == pytest.approx(fisher.tqfi_closed(fam, 2).value, rel=1e-4)


def test_lemma5_guard():
    fam = UnitaryFamily.from_matrices(np.diag([0.5, 0.3, 0.2]), random_generator(3, 4))
    rep = verify.check_lemma5(fam, 2, (0.5, 0.25))
    assert rep.failures == 1


def test_config_from_dict():
    cfg = verify.SuiteConfig.from_dict({"seed": 5, "lemma4_trials": 3, "tolerances": {"lemma4.triangle": 1e-8}})
    assert cfg.count("lemma4_trials") == 3 and cfg.count("lemma1_trials") == 200
    with pytest.raises(ValueError):
        verify.SuiteConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        verify.SuiteConfig.from_dict({"tolerances": {"nope": 1.0}})


def test_report_schema():
    rep = verify.check_prop1_prop2(3, seed=1)
    assert set(rep.to_dict()) == {"property_id", "trials", "failures", "worst_slack", "degenerate_excluded", "seed"}
