/** Pure view-state logic for the findings table, source panel, and
 * disposition controls. Kept DOM-free so it is unit-testable. */

import type { FindingRow } from "./api.js";

/** Severity keys in rank order, most severe first (mirrors the API). */
export const SEVERITY_ORDER = [
  "critical",
  "high",
  "medium",
  "low",
  "potential_issue",
  "standard",
  "suspicious_comment",
] as const;

export const TRIAGE_STATES = [
  "unreviewed",
  "confirmed",
  "false_positive",
  "accepted_risk",
  "remediated",
] as const;

/** States that remove a finding from the default working view. */
export const SUPPRESSED_STATES = ["false_positive", "accepted_risk"] as const;

export type SortColumn = "severity" | "title" | "location" | "state";

export interface TableView {
  /** Empty set means "all severities". */
  severities: Set<string>;
  /** Substring match on path; empty matches everything. */
  pathQuery: string;
  /** When true, suppressed findings are hidden (the default view). */
  hideSuppressed: boolean;
  sortColumn: SortColumn;
  sortAscending: boolean;
}

export function defaultView(): TableView {
  return {
    severities: new Set(),
    pathQuery: "",
    hideSuppressed: true,
    sortColumn: "severity",
    sortAscending: true,
  };
}

export function severityRank(key: string): number {
  const rank = SEVERITY_ORDER.indexOf(key as (typeof SEVERITY_ORDER)[number]);
  return rank === -1 ? SEVERITY_ORDER.length : rank;
}

export function isSuppressed(state: string): boolean {
  return (SUPPRESSED_STATES as readonly string[]).includes(state);
}

export function compareFindings(
  a: FindingRow,
  b: FindingRow,
  column: SortColumn,
): number {
  let primary = 0;
  switch (column) {
    case "severity":
      primary = severityRank(a.severity) - severityRank(b.severity);
      break;
    case "title":
      primary = a.title.localeCompare(b.title);
      break;
    case "location":
      primary = a.path.localeCompare(b.path) || a.line - b.line;
      break;
    case "state":
      primary = a.state.localeCompare(b.state);
      break;
  }
  if (primary !== 0) return primary;
  // stable canonical tie-break
  return (
    severityRank(a.severity) - severityRank(b.severity) ||
    a.path.localeCompare(b.path) ||
    a.line - b.line ||
    a.rule_id.localeCompare(b.rule_id)
  );
}

export function applyView(findings: FindingRow[], view: TableView): FindingRow[] {
  let rows = findings.filter((f) => {
    if (view.severities.size > 0 && !view.severities.has(f.severity)) return false;
    if (view.pathQuery && !f.path.includes(view.pathQuery)) return false;
    if (view.hideSuppressed && isSuppressed(f.state)) return false;
    return true;
  });
  rows = rows
    .slice()
    .sort((a, b) => compareFindings(a, b, view.sortColumn));
  if (!view.sortAscending) rows.reverse();
  return rows;
}

/** Per-severity counts over the rows currently passing the filters. */
export function severityCounts(rows: FindingRow[]): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const key of SEVERITY_ORDER) counts[key] = 0;
  for (const row of rows) counts[row.severity] = (counts[row.severity] ?? 0) + 1;
  return counts;
}

export function toggleSeverity(view: TableView, key: string): TableView {
  const severities = new Set(view.severities);
  if (severities.has(key)) severities.delete(key);
  else severities.add(key);
  return { ...view, severities };
}

export function toggleSort(view: TableView, column: SortColumn): TableView {
  if (view.sortColumn === column) {
    return { ...view, sortAscending: !view.sortAscending };
  }
  return { ...view, sortColumn: column, sortAscending: true };
}

/** accepted_risk and remediated must carry a justification note. */
export function noteRequired(state: string): boolean {
  return state === "accepted_risk" || state === "remediated";
}

export function canSubmitDisposition(state: string, note: string): boolean {
  if (!(TRIAGE_STATES as readonly string[]).includes(state)) return false;
  if (noteRequired(state) && note.trim() === "") return false;
  return true;
}

export interface OptimisticUpdate {
  rows: FindingRow[];
  rollback: FindingRow[];
}

/** Apply a disposition locally before the API confirms it; `rollback` restores
 * the previous rows if the request fails. */
export function applyDisposition(
  rows: FindingRow[],
  fingerprint: string,
  state: string,
): OptimisticUpdate {
  const rollback = rows.slice();
  const updated = rows.map((row) =>
    row.fingerprint === fingerprint ? { ...row, state } : row,
  );
  return { rows: updated, rollback };
}

/** A context of N lines on each side yields at most 2N+1 excerpt lines. */
export function excerptLength(context: number): number {
  return 2 * Math.max(0, Math.floor(context)) + 1;
}
