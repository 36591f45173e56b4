import numpy as np
import pytest

import ngfix.fixing
from ngfix import run_property_suite


def test_trials_precondition():
    with pytest.raises(ValueError):
        run_property_suite(1, 0)
    with pytest.raises(ValueError):
        run_property_suite(1, 1, ["T9"])


def test_small_run_green():
    report = run_property_suite(seed=7, trials=25)
    assert report.all_green, report.summary()
    assert all(r.passed == 25 for r in report.results.values())


def test_same_seed_same_report():
    a = run_property_suite(seed=3, trials=5)
    b = run_property_suite(seed=3, trials=5)
    assert a.summary() == b.summary()


def test_skipping_closure_update_is_caught(monkeypatch):
    # without propagation NGFix re-fixes pairs that are already reachable
    monkeypatch.setattr(ngfix.fixing, "_propagate", lambda T, s, t: None)
    report = run_property_suite(seed=1, trials=60, properties=["T4", "T5"])
    assert not report.all_green
    bad = report.results["T4"].failures[0]
    assert "edges" in bad.message and bad.reproduction["edges"] is not None


def test_reversed_closure_update_breaks_full_recall(monkeypatch):
    def backwards(T, s, t):
        T |= np.logical_and.outer(T[:, t], T[s, :])

    monkeypatch.setattr(ngfix.fixing, "_propagate", backwards)
    report = run_property_suite(seed=1, trials=60, properties=["T5"])
    assert report.results["T5"].failed > 0
    assert "recall" in report.results["T5"].failures[0].message


def test_failures_are_shrunk(monkeypatch):
    monkeypatch.setattr(ngfix.fixing, "_propagate", lambda T, s, t: None)
    report = run_property_suite(seed=2, trials=30, properties=["T4"])
    first = report.results["T4"].failures[0]
    edges = first.reproduction["edges"]
    # well below the generator density of up to 6 out-edges per point
    assert sum(len(a) for a in edges) <= 2 * len(first.reproduction["points"])
    assert all(not f.reproduction for f in report.results["T4"].failures[1:])
