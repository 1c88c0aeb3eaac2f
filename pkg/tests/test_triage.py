import pytest

from test_baseline import make_finding, make_result
from vulnscan.rules import Severity
from vulnscan.triage import (
    TriageError,
    TriageStore,
    apply_triage,
    export_backlog,
)


@pytest.fixture
def store(tmp_path):
    return TriageStore(tmp_path / "triage.log")


class TestSetState:
    def test_persists_across_reopen(self, store):
        store.set_state("fp1", "false_positive", note="dup")
        reopened = TriageStore(store.path)
        assert reopened.records()["fp1"].state == "false_positive"

    def test_latest_wins_log_keeps_history(self, store):
        store.set_state("fp1", "confirmed")
        store.set_state("fp1", "accepted_risk", note="legacy")
        assert store.records()["fp1"].state == "accepted_risk"
        assert len(store.log_entries()) == 2

    def test_leaving_remediated_requires_note(self, store):
        store.set_state("fp1", "remediated")
        with pytest.raises(TriageError, match="note"):
            store.set_state("fp1", "confirmed")
        store.set_state("fp1", "confirmed", note="regressed")
        assert store.records()["fp1"].state == "confirmed"

    def test_unknown_state_rejected(self, store):
        with pytest.raises(TriageError):
            store.set_state("fp1", "bogus_state")

    def test_unknown_fingerprint_warns_but_records(self, store):
        record, warnings = store.set_state("ghost", "false_positive",
                                           known_fingerprints={"real"})
        assert warnings
        assert store.records()["ghost"].state == "false_positive"

    def test_replay_reproduces_store(self, store):
        store.set_state("a", "confirmed")
        store.set_state("b", "false_positive")
        store.set_state("a", "remediated", note="fixed in r2")
        replayed = {}
        for entry in store.log_entries():
            replayed[entry.fingerprint] = entry
        assert replayed == store.records()


class TestApplyTriage:
    def test_suppression_counts(self, store):
        findings = [make_finding(f"fp{i}") for i in range(5)]
        result = make_result(findings)
        store.set_state("fp1", "false_positive")
        store.set_state("fp3", "false_positive")
        view = apply_triage(result, store)
        assert view.total == 5
        assert view.open_count == 3
        assert view.suppressed_count == 2
        assert view.open_count + view.suppressed_count == view.total

    def test_empty_store_everything_open(self, store):
        result = make_result([make_finding("a"), make_finding("b")])
        view = apply_triage(result, store)
        assert view.open_count == 2
        assert set(view.states.values()) == {"unreviewed"}

    def test_all_accepted_risk(self, store):
        result = make_result([make_finding("a"), make_finding("b")])
        for fp in ("a", "b"):
            store.set_state(fp, "accepted_risk", note="legacy")
        view = apply_triage(result, store)
        assert view.open_count == 0
        assert view.total == 2

    def test_confirmed_and_remediated_stay_open(self, store):
        result = make_result([make_finding("a"), make_finding("b")])
        store.set_state("a", "confirmed")
        store.set_state("b", "remediated")
        view = apply_triage(result, store)
        assert view.open_count == 2


class TestBacklog:
    def test_severity_then_path_line_order(self, store):
        findings = [
            make_finding("m", Severity.MEDIUM, line=5),
            make_finding("c", Severity.CRITICAL, line=9),
            make_finding("l", Severity.LOW, line=1),
        ]
        view = apply_triage(make_result(findings), store)
        rows = export_backlog(view, store)
        assert [r.fingerprint for r in rows] == ["c", "m", "l"]

    def test_tie_breaks_on_path_then_line(self, store):
        import dataclasses
        a = make_finding("a1", Severity.HIGH, line=7)
        b = dataclasses.replace(make_finding("b1", Severity.HIGH, line=2), path="b.cc")
        view = apply_triage(make_result([b, a]), store)
        rows = export_backlog(view, store)
        assert [(r.path, r.line) for r in rows] == [("a.cc", 7), ("b.cc", 2)]

    def test_suppressed_absent_from_backlog_present_in_full_export(self, store):
        result = make_result([make_finding("a"), make_finding("b")])
        store.set_state("b", "false_positive", note="noise")
        view = apply_triage(result, store)
        rows = export_backlog(view, store)
        assert [r.fingerprint for r in rows] == ["a"]
        # full export keeps the suppressed finding with its state
        from vulnscan.report import render_csv
        csv_text = render_csv(result.findings, view.states)
        assert "false_positive" in csv_text
        assert csv_text.count("\n") == 3  # header + 2 findings

    def test_backlog_carries_notes(self, store):
        result = make_result([make_finding("a")])
        store.set_state("a", "confirmed", note="check input handling")
        view = apply_triage(result, store)
        (row,) = export_backlog(view, store)
        assert row.note == "check input handling"
