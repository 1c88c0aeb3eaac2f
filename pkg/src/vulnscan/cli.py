"""Command-line surface.

Exit codes are the machine contract: 0 clean, 1 operational error,
2 policy gate tripped, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

from vulnscan import baseline as baseline_mod
from vulnscan import report
from vulnscan.baseline import BaselineError, load_baseline, save_baseline
from vulnscan.config import Config, ConfigError, load_config
from vulnscan.corpus import CorpusError, ingest
from vulnscan.engine import ScanOptions, ScanResult, scan
from vulnscan.rules import RulePackError, Severity, builtin_rules, load_rulepack, merge_packs
from vulnscan.triage import (
    TRIAGE_STATES,
    TriageError,
    TriageStore,
    apply_triage,
    export_backlog,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GATE = 2
EXIT_USAGE = 64

OUT_DIR_ENV = "VULNSCAN_OUT_DIR"
DEFAULT_TRIAGE_STORE = ".vulnscan-triage.log"


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit()


def _build_parser() -> _Parser:
    parser = _Parser(prog="vulnscan", description="Lexical security vulnerability scanner")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_scan = sub.add_parser("scan", help="ingest a codebase and run the rule packs")
    p_scan.add_argument("root", help="corpus root directory")
    p_scan.add_argument("--out", help="output directory for scan artifacts")
    p_scan.add_argument("--config", help="config file (flags take precedence)")
    p_scan.add_argument("--include", action="append", default=None, help="include glob (repeatable)")
    p_scan.add_argument("--exclude", action="append", default=None, help="exclude glob (repeatable)")
    p_scan.add_argument("--rulepack", action="append", default=None,
                        help="extra rule-pack file, merged with the built-ins (repeatable)")
    p_scan.add_argument("--no-builtin-rules", action="store_true",
                        help="run only the packs given with --rulepack")
    p_scan.add_argument("--language", action="append", default=None,
                        help="restrict the scan to a language (repeatable)")
    p_scan.add_argument("--non-comment-only", action="store_true",
                        help="pattern rules skip comment-classified lines")
    p_scan.add_argument("--density-kind", choices=["LOC", "NCLOC"], default=None)
    p_scan.add_argument("--fail-level", default=None,
                        help="exit 2 when a non-suppressed finding at or above this severity exists")
    p_scan.add_argument("--triage-store", default=None, help="triage store used for suppression")
    p_scan.add_argument("--baseline", default=None, help="also save the result as a baseline file")
    p_scan.add_argument("--label", default="baseline", help="label for --baseline")
    p_scan.add_argument("--csv", action="store_true", help="also write findings.csv")
    p_scan.add_argument("--html", action="store_true", help="also write report.html")
    p_scan.add_argument("--workers", type=int, default=None)

    p_diff = sub.add_parser("diff", help="diff a rescan against a baseline")
    p_diff.add_argument("baseline", help="baseline file (or structured scan result)")
    p_diff.add_argument("current", help="current structured scan result")
    p_diff.add_argument("--fail-on-new", action="store_true",
                        help="exit 2 when new non-suppressed findings exist")
    p_diff.add_argument("--triage-store", default=None)
    p_diff.add_argument("--out", default=None, help="write the structured diff to this file")
    p_diff.add_argument("--config", help="config file")

    p_triage = sub.add_parser("triage", help="record and export human dispositions")
    p_triage.add_argument("--store", default=None, help=f"triage store path (default {DEFAULT_TRIAGE_STORE})")
    p_triage.add_argument("--config", help="config file")
    triage_sub = p_triage.add_subparsers(dest="triage_command", required=True, parser_class=_Parser)
    t_list = triage_sub.add_parser("list", help="list current dispositions")
    t_set = triage_sub.add_parser("set", help="set the disposition of one fingerprint")
    t_set.add_argument("fingerprint")
    t_set.add_argument("state", choices=TRIAGE_STATES)
    t_set.add_argument("--note", default="")
    t_set.add_argument("--annotator", default="")
    t_set.add_argument("--result", default=None, help="scan result used to warn on unknown fingerprints")
    t_export = triage_sub.add_parser("export", help="export the prioritized backlog")
    t_export.add_argument("--format", choices=["csv", "json"], default="csv")
    t_export.add_argument("--result", required=True, help="structured scan result to export from")
    t_export.add_argument("--out", default=None, help="write to file instead of stdout")

    p_serve = sub.add_parser("serve", help="serve the review API and triage UI")
    p_serve.add_argument("--result", required=True, help="structured scan result or baseline file")
    p_serve.add_argument("--root", default=None, help="corpus root for source excerpts")
    p_serve.add_argument("--store", default=None, help="triage store path")
    p_serve.add_argument("--ui-dir", default=None, help="directory of built UI assets")
    p_serve.add_argument("--port", type=int, default=8641)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--config", help="config file")

    p_acquire = sub.add_parser("acquire", help="clone a codebase snapshot with the system git")
    p_acquire.add_argument("url")
    p_acquire.add_argument("dest")

    return parser


def _load_result_file(path: str) -> ScanResult:
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    if "checksum" in data:  # baseline envelope
        return load_baseline(path).result
    return ScanResult.from_dict(data)


def _load_packs(args) -> "RulePack":
    packs = [] if getattr(args, "no_builtin_rules", False) else [builtin_rules()]
    for path in getattr(args, "rulepack", None) or []:
        packs.append(load_rulepack(path))
    if not packs:
        raise RulePackError("no rule packs selected")
    return merge_packs(*packs)


def _config_from(args) -> Config:
    if getattr(args, "config", None):
        return load_config(args.config)
    return Config()


def cmd_scan(args) -> int:
    cfg = _config_from(args)
    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or cfg.out or "."
    include = args.include if args.include is not None else (cfg.include or None)
    exclude = args.exclude if args.exclude is not None else (cfg.exclude or None)
    density_kind = args.density_kind or cfg.density
    fail_level = args.fail_level or cfg.fail_level
    triage_store_path = args.triage_store or cfg.triage_store
    non_comment_only = args.non_comment_only or cfg.non_comment_only
    rulepacks = args.rulepack if args.rulepack is not None else (cfg.rulepacks or None)
    args.rulepack = rulepacks

    fail_severity = None
    if fail_level:
        try:
            fail_severity = Severity.parse(fail_level)
        except ValueError as exc:
            print(f"vulnscan: error: {exc}", file=sys.stderr)
            return EXIT_USAGE

    inventory = ingest(args.root, include_globs=include, exclude_globs=exclude,
                       workers=args.workers)
    pack = _load_packs(args)
    languages = tuple(args.language) if args.language else (tuple(cfg.languages) or None)
    options = ScanOptions(languages=languages, non_comment_only=non_comment_only,
                          workers=args.workers)
    result = scan(inventory, pack, options)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scan.json").write_text(report.render_structured(result), encoding="utf-8")

    store = TriageStore(triage_store_path) if triage_store_path else None
    view = apply_triage(result, store)

    if args.csv:
        (out / "findings.csv").write_text(
            report.render_csv(result.findings, view.states), encoding="utf-8")
    if args.html:
        (out / "report.html").write_text(
            report.render_html(result, density_kind=density_kind, states=view.states),
            encoding="utf-8")
    if args.baseline:
        save_baseline(result, args.baseline, label=args.label)

    print(report.render_summary(result, density_kind=density_kind))
    if store is not None:
        print(f"Triage: {view.open_count} open, {view.suppressed_count} suppressed "
              f"of {view.total} total")

    if fail_severity is not None:
        gated = [f for f in view.open_findings if f.severity <= fail_severity]
        if gated:
            print(f"FAIL: {len(gated)} non-suppressed finding(s) at severity "
                  f"{fail_severity.label} or above", file=sys.stderr)
            return EXIT_GATE
    return EXIT_OK


def cmd_diff(args) -> int:
    cfg = _config_from(args)
    base = _load_result_file(args.baseline)
    current = _load_result_file(args.current)
    result = baseline_mod.diff(base, current)

    store_path = args.triage_store or cfg.triage_store
    suppressed: set[str] = set()
    if store_path:
        store = TriageStore(store_path)
        suppressed = {fp for fp, state in store.states().items()
                      if state in ("false_positive", "accepted_risk")}
    new_open = [f for f in result.new if f.fingerprint not in suppressed]

    print(f"{len(result.new)} new, {len(result.fixed)} fixed, "
          f"{len(result.persistent)} persistent")
    if result.pack_changed:
        print("note: rule pack version changed between scans; "
              "new rules may flag previously clean code")
    if args.out:
        Path(args.out).write_text(report.render_diff_structured(result), encoding="utf-8")

    if args.fail_on_new and new_open:
        print(f"FAIL: {len(new_open)} new non-suppressed finding(s)", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def cmd_triage(args) -> int:
    cfg = _config_from(args)
    store = TriageStore(args.store or cfg.triage_store or DEFAULT_TRIAGE_STORE)

    if args.triage_command == "list":
        for fp, rec in sorted(store.records().items()):
            note = f"  # {rec.note}" if rec.note else ""
            print(f"{fp}  {rec.state}{note}")
        return EXIT_OK

    if args.triage_command == "set":
        known = None
        if args.result:
            known = {f.fingerprint for f in _load_result_file(args.result).findings}
        record, warnings = store.set_state(
            args.fingerprint, args.state, note=args.note,
            annotator=args.annotator, known_fingerprints=known)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        print(f"{record.fingerprint} -> {record.state}")
        return EXIT_OK

    # export
    result = _load_result_file(args.result)
    view = apply_triage(result, store)
    rows = export_backlog(view, store)
    if args.format == "csv":
        findings_by_fp = {f.fingerprint: f for f in result.findings}
        ordered = [findings_by_fp[r.fingerprint] for r in rows]
        text = report.render_csv(ordered, view.states)
    else:
        text = json.dumps([row.__dict__ for row in rows], sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from vulnscan.server import create_app

    cfg = _config_from(args)
    result = _load_result_file(args.result)
    store = TriageStore(args.store or cfg.triage_store or DEFAULT_TRIAGE_STORE)
    app = create_app(result, args.root, store, ui_dir=args.ui_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit:
        raise
    except OSError as exc:
        print(f"vulnscan: error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_acquire(args) -> int:
    git = shutil.which("git")
    if git is None:
        # Acquisition is the user's responsibility; a manual copy is fine.
        print("git not found; copy the codebase snapshot into place manually")
        return EXIT_OK
    proc = subprocess.run([git, "clone", "--depth", "1", args.url, args.dest])
    return EXIT_OK if proc.returncode == 0 else EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return EXIT_USAGE

    handlers = {
        "scan": cmd_scan,
        "diff": cmd_diff,
        "triage": cmd_triage,
        "serve": cmd_serve,
        "acquire": cmd_acquire,
    }
    try:
        return handlers[args.command](args)
    except _UsageExit:
        return EXIT_USAGE
    except (CorpusError, ConfigError, RulePackError, BaselineError, TriageError) as exc:
        print(f"vulnscan: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"vulnscan: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except json.JSONDecodeError as exc:
        print(f"vulnscan: error: malformed input file: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
