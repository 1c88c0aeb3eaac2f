import dataclasses
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import PAPER_SNIPPET_FILES
from vulnscan.baseline import BaselineError, diff, load_baseline, save_baseline
from vulnscan.corpus import ingest
from vulnscan.engine import Finding, ScanResult, scan
from vulnscan.rules import Severity, builtin_rules


def make_result(findings, pack_version="1.0.0", scheme=1) -> ScanResult:
    return ScanResult(
        started_at="2026-01-01T00:00:00+00:00",
        duration_seconds=0.1,
        pack_name="builtin",
        pack_version=pack_version,
        fingerprint_scheme=scheme,
        files=1,
        physical_lines=10,
        code_lines=8,
        comment_lines=1,
        blank_lines=1,
        languages={"C++": {"files": 1, "physical_lines": 10, "code_lines": 8,
                           "comment_lines": 1, "blank_lines": 1}},
        file_summaries=(),
        findings=tuple(findings),
        warnings=(),
    )


def make_finding(fp: str, severity=Severity.HIGH, line=1) -> Finding:
    return Finding(
        fingerprint=fp, rule_id="r", title="T", severity=severity, path="a.cc",
        line=line, snippet="s;", description="", occurrence_index=0,
    )


class TestRoundTrip:
    def test_save_load_round_trip(self, tmp_path, make_corpus):
        result = scan(ingest(make_corpus(PAPER_SNIPPET_FILES)), builtin_rules())
        path = tmp_path / "base.json"
        save_baseline(result, path, label="first")
        loaded = load_baseline(path)
        assert loaded.result == result
        assert loaded.label == "first"
        assert loaded.pack_version == result.pack_version

    def test_truncated_file_fails_checksum(self, tmp_path):
        path = tmp_path / "base.json"
        save_baseline(make_result([make_finding("aa")]), path)
        text = path.read_text()
        path.write_text(text.replace('"s;"', '"tampered;"'))
        with pytest.raises(BaselineError):
            load_baseline(path)

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "base.json"
        path.write_text("{not json")
        with pytest.raises(BaselineError):
            load_baseline(path)

    def test_empty_findings_baseline_is_valid(self, tmp_path):
        path = tmp_path / "base.json"
        save_baseline(make_result([]), path)
        assert load_baseline(path).result.findings == ()


class TestDiff:
    def test_identical_scans(self):
        r = make_result([make_finding("a"), make_finding("b")])
        d = diff(r, r)
        assert d.new == ()
        assert d.fixed == ()
        assert {f.fingerprint for f in d.persistent} == {"a", "b"}

    def test_set_algebra(self):
        base = make_result([make_finding("a"), make_finding("b")])
        cur = make_result([make_finding("b"), make_finding("c")])
        d = diff(base, cur)
        assert [f.fingerprint for f in d.new] == ["c"]
        assert [f.fingerprint for f in d.fixed] == ["a"]
        assert [f.fingerprint for f in d.persistent] == ["b"]

    def test_scheme_mismatch_rejected(self):
        with pytest.raises(BaselineError, match="scheme"):
            diff(make_result([], scheme=1), make_result([], scheme=2))

    def test_line_shift_stays_persistent(self, tmp_path, make_corpus):
        before = make_corpus({"a.cc": "std::memcpy(buffer, str, length);\n"}, "v1")
        after = make_corpus(
            {"a.cc": "\n\n\nstd::memcpy(buffer, str, length);\n"}, "v2")
        pack = builtin_rules()
        base = scan(ingest(before), pack)
        cur = scan(ingest(after), pack)
        d = diff(base, cur)
        assert d.new == ()
        assert d.fixed == ()
        assert len(d.persistent) == 1
        assert d.persistent[0].line == 4

    def test_severity_change_is_annotation_not_churn(self):
        base = make_result([make_finding("a", Severity.HIGH)])
        cur = make_result([make_finding("a", Severity.MEDIUM)], pack_version="2.0.0")
        d = diff(base, cur)
        assert d.new == () and d.fixed == ()
        assert d.severity_changes == (("a", Severity.HIGH, Severity.MEDIUM),)
        assert d.pack_changed

    @given(st.sets(st.text("ab", min_size=1, max_size=4), max_size=12),
           st.sets(st.text("ab", min_size=1, max_size=4), max_size=12))
    @settings(max_examples=100)
    def test_partition_laws(self, base_fps, cur_fps):
        base = make_result([make_finding(fp) for fp in sorted(base_fps)])
        cur = make_result([make_finding(fp) for fp in sorted(cur_fps)])
        d = diff(base, cur)
        new = {f.fingerprint for f in d.new}
        fixed = {f.fingerprint for f in d.fixed}
        persistent = {f.fingerprint for f in d.persistent}
        assert new | persistent == cur_fps
        assert fixed | persistent == base_fps
        assert not (new & persistent) and not (fixed & persistent) and not (new & fixed)
        assert len(d.new) + len(d.persistent) == len(cur.findings)
