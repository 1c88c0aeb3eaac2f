import re

import pytest

from conftest import PAPER_SNIPPET_FILES
from vulnscan.corpus import classify_lines, ingest
from vulnscan.engine import (
    ScanOptions,
    analyze_paired_resources,
    fingerprint,
    normalize_snippet,
    scan,
)
from vulnscan.languages import profile_for
from vulnscan.metrics import severity_histogram
from vulnscan.rules import Rule, RulePack, Severity, builtin_rules


def run_paired(code: str, rule_id: str):
    rule = builtin_rules().rule(rule_id)
    lines = code.splitlines()
    classes = classify_lines(code, profile_for("C")).classes
    return analyze_paired_resources(lines, classes, rule)


class TestPairedResources:
    BALANCED = (
        "int main() {\n"
        "    char *p = malloc(10);\n"
        "    use(p);\n"
        "    free(p);\n"
        "    return 0;\n"
        "}\n"
    )

    def test_balanced_pair_no_findings(self):
        matches, _ = run_paired(self.BALANCED, "c.malloc-no-free")
        assert matches == []
        matches, _ = run_paired(self.BALANCED, "c.double-free")
        assert matches == []

    def test_malloc_without_free(self):
        code = "int main() {\n    char *p = malloc(10);\n    use(p);\n}\n"
        matches, _ = run_paired(code, "c.malloc-no-free")
        assert matches == [(2, "missing_release")]

    def test_double_free_at_second_release(self):
        code = (
            "int main() {\n"
            "    char *p = malloc(10);\n"
            "    free(p);\n"
            "    free(p);\n"
            "}\n"
        )
        matches, _ = run_paired(code, "c.double-free")
        assert matches == [(4, "double_release")]

    def test_rebinding_resets_release_count(self):
        code = (
            "int main() {\n"
            "    char *p = malloc(10);\n"
            "    free(p);\n"
            "    p = malloc(20);\n"
            "    free(p);\n"
            "}\n"
        )
        for rule_id in ("c.malloc-no-free", "c.double-free"):
            matches, _ = run_paired(code, rule_id)
            assert matches == []

    def test_separate_functions_are_separate_scopes(self):
        code = (
            "void a() {\n    char *p = malloc(1);\n}\n"
            "void b() {\n    free(p);\n}\n"
        )
        matches, _ = run_paired(code, "c.malloc-no-free")
        assert matches == [(2, "missing_release")]

    def test_unbalanced_braces_fall_back_with_warning(self):
        code = "int main() {\n    char *p = malloc(1);\n"
        matches, warnings = run_paired(code, "c.malloc-no-free")
        assert matches == [(2, "missing_release")]
        assert warnings

    def test_commented_free_does_not_count(self):
        code = (
            "int main() {\n"
            "    char *p = malloc(10);\n"
            "    // free(p);\n"
            "}\n"
        )
        matches, _ = run_paired(code, "c.malloc-no-free")
        assert matches == [(2, "missing_release")]


class TestFingerprint:
    def test_deterministic(self):
        a = fingerprint("r", "p.cc", "int x;", 0)
        b = fingerprint("r", "p.cc", "int x;", 0)
        assert a == b

    def test_line_number_not_part_of_identity(self):
        # the signature simply has no line argument; identical tuples agree
        assert fingerprint("r", "p.cc", "x", 2) == fingerprint("r", "p.cc", "x", 2)

    def test_occurrence_index_distinguishes(self):
        assert fingerprint("r", "p.cc", "x", 0) != fingerprint("r", "p.cc", "x", 1)

    def test_normalization_collapses_whitespace(self):
        assert normalize_snippet("  a\t b  ") == "a b"


class TestScan:
    def test_paper_snippets_each_yield_one_finding(self, scan_tree):
        expectations = {
            "src/render.cc": ("cpp.unsafe-memcpy", Severity.HIGH),
            "app/Reset.cs": ("cs.hardcoded-password", Severity.MEDIUM),
            "app/Login.cs": ("cs.case-insensitive-password", Severity.MEDIUM),
            "app/Keys.cs": ("cs.insecure-sensitive-storage", Severity.MEDIUM),
        }
        result = scan_tree(PAPER_SNIPPET_FILES)
        by_path = {}
        for f in result.findings:
            by_path.setdefault(f.path, []).append(f)
        for path, (rule_id, severity) in expectations.items():
            findings = by_path[path]
            assert len(findings) == 1, f"{path}: {findings}"
            assert findings[0].rule_id == rule_id
            assert findings[0].severity is severity

    def test_memcpy_snippet_verbatim(self, scan_tree):
        result = scan_tree({"a.cc": "std::memcpy(buffer, str, length);\n"})
        (finding,) = result.findings
        assert finding.snippet == "std::memcpy(buffer, str, length);"
        assert finding.line == 1

    def test_empty_corpus(self, scan_tree):
        result = scan_tree({})
        assert result.findings == ()
        assert result.warnings == ()

    def test_findings_canonically_ordered(self, scan_tree):
        result = scan_tree({
            "z.cc": "memcpy(a, b, c);\n// TODO later\n",
            "a.cs": 'lock (x) {}\nstring pwd = "s3cret";\n',
        })
        keys = [f.sort_key() for f in result.findings]
        assert keys == sorted(keys)

    def test_one_finding_per_rule_line_pair(self, scan_tree):
        result = scan_tree({"a.cc": "memcpy(a, b, c); memcpy(d, e, f);\n"})
        assert len(result.findings) == 1

    def test_two_rules_one_line_two_findings(self, scan_tree):
        result = scan_tree({"a.cc": "memcpy(a, strcpy(b, c), n);\n"})
        assert {f.rule_id for f in result.findings} == {"cpp.unsafe-memcpy", "cpp.unsafe-strcpy"}

    def test_language_restriction(self, scan_tree):
        # memcpy text in a C# file must not trip the C++ rule
        result = scan_tree({"a.cs": "memcpy(a, b, c);\n"})
        assert result.findings == ()

    def test_suspicious_comment_only_in_comments(self, scan_tree):
        result = scan_tree({
            "a.cc": 's = "TODO not flagged";\n// TODO flagged\n',
        })
        assert len(result.findings) == 1
        assert result.findings[0].line == 2
        assert result.findings[0].rule_id == "any.suspicious-comment"

    def test_non_comment_only_skips_comment_lines(self, scan_tree):
        files = {"a.cc": "// memcpy(a, b, c);\nmemcpy(d, e, f);\n// TODO\n"}
        unrestricted = scan_tree(files)
        assert {(f.rule_id, f.line) for f in unrestricted.findings} == {
            ("cpp.unsafe-memcpy", 1), ("cpp.unsafe-memcpy", 2), ("any.suspicious-comment", 3)}
        restricted = scan_tree(files, options=ScanOptions(non_comment_only=True))
        assert {(f.rule_id, f.line) for f in restricted.findings} == {
            ("cpp.unsafe-memcpy", 2), ("any.suspicious-comment", 3)}

    def test_config_check_runs_only_on_config_files(self, scan_tree):
        files = {
            "web.config": '<compilation debug="true" targetFramework="4.8"/>\n',
            "note.cs": '// <compilation debug="true"/>\n',
        }
        result = scan_tree(files)
        hits = [f for f in result.findings if f.rule_id == "cs.debug-enabled"]
        assert [(f.path, f.line) for f in hits] == [("web.config", 1)]

    def test_determinism_across_parallelism(self, scan_tree, make_corpus):
        files = {
            f"dir{i}/f{j}.cc": "memcpy(a, b, c);\n// TODO x\nint v;\n"
            for i in range(4) for j in range(5)
        }
        root = make_corpus(files)
        inv = ingest(root)
        pack = builtin_rules()
        r1 = scan(inv, pack, ScanOptions(workers=1))
        r8 = scan(inv, pack, ScanOptions(workers=8))
        assert r1.findings == r8.findings
        assert r1.warnings == r8.warnings

    def test_histogram_sums_to_findings(self, scan_tree):
        result = scan_tree(PAPER_SNIPPET_FILES)
        hist = severity_histogram(result.findings)
        assert sum(hist.values()) == len(result.findings)

    def test_monotonicity_adding_rule_keeps_findings(self, scan_tree, make_corpus):
        root = make_corpus(PAPER_SNIPPET_FILES)
        inv = ingest(root)
        base_pack = builtin_rules()
        extra = Rule(id="x.semicolon", title="Semicolon", severity=Severity.LOW,
                     matcher="pattern", pattern=";")
        bigger = RulePack("bigger", "1", base_pack.rules + (extra,))
        base = scan(inv, base_pack)
        grown = scan(inv, bigger)
        assert set(f.fingerprint for f in base.findings) <= set(
            f.fingerprint for f in grown.findings)

    def test_snippets_reread_verbatim(self, scan_tree, make_corpus):
        root = make_corpus(PAPER_SNIPPET_FILES)
        inv = ingest(root)
        result = scan(inv, builtin_rules())
        for f in result.findings:
            on_disk = (root / f.path).read_text().splitlines()
            assert 1 <= f.line <= len(on_disk)
            assert f.snippet == on_disk[f.line - 1].strip()

    def test_pattern_rule_matches_naive_reference(self, scan_tree):
        # independent line-by-line matcher over the same fixture
        files = {
            "a.cc": "memcpy(x, y, z);\nint ok;\nstrcpy(a, b);\nmemcpy(q, r, s);\n",
        }
        result = scan_tree(files)
        for rule_id, pattern in (("cpp.unsafe-memcpy", r"\bmemcpy\s*\("),
                                 ("cpp.unsafe-strcpy", r"\bstrcpy\s*\(")):
            expected_lines = [
                i for i, line in enumerate(files["a.cc"].splitlines(), 1)
                if re.search(pattern, line)
            ]
            got_lines = [f.line for f in result.findings if f.rule_id == rule_id]
            assert got_lines == expected_lines

    def test_line_shift_preserves_fingerprint(self, scan_tree):
        original = scan_tree({"a.cc": "std::memcpy(buffer, str, length);\n"})
        shifted = scan_tree(
            {"a.cc": "\n\n\nstd::memcpy(buffer, str, length);\n"}, )
        assert original.findings[0].fingerprint == shifted.findings[0].fingerprint
        assert shifted.findings[0].line == 4

    def test_occurrence_index_disambiguates_duplicates(self, scan_tree):
        result = scan_tree({"a.cc": "memcpy(a, b, c);\nmemcpy(a, b, c);\n"})
        assert [f.occurrence_index for f in result.findings] == [0, 1]
        assert len({f.fingerprint for f in result.findings}) == 2
