/** DOM rendering and event wiring. All state transitions live in state.ts;
 * this module only draws and dispatches. */

import { ApiClient, ApiError, FindingRow, ResultSummary } from "./api.js";
import {
  SEVERITY_ORDER,
  SortColumn,
  TableView,
  TRIAGE_STATES,
  applyDisposition,
  applyView,
  canSubmitDisposition,
  defaultView,
  isSuppressed,
  noteRequired,
  severityCounts,
  toggleSeverity,
  toggleSort,
} from "./state.js";

const SEVERITY_LABELS: Record<string, string> = {
  critical: "Critical",
  high: "High",
  medium: "Medium",
  low: "Low",
  potential_issue: "Potential Issue",
  standard: "Standard",
  suspicious_comment: "Suspicious Comment",
};

export class App {
  private view: TableView = defaultView();
  private findings: FindingRow[] = [];
  private counts = { total: 0, open: 0, suppressed: 0 };
  private selected: FindingRow | null = null;
  private context = 3;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <div id="banner" class="banner hidden"></div>
      <header id="summary"></header>
      <section id="chips"></section>
      <div class="layout">
        <main>
          <input id="path-filter" placeholder="filter by path" />
          <label class="show-suppressed">
            <input type="checkbox" id="show-suppressed" /> show suppressed
          </label>
          <span id="count-badge"></span>
          <table id="findings">
            <thead><tr>
              <th data-col="severity">Severity</th>
              <th data-col="title">Rule</th>
              <th data-col="location">Location</th>
              <th data-col="state">State</th>
            </tr></thead>
            <tbody></tbody>
          </table>
        </main>
        <aside id="detail"></aside>
      </div>`;
    this.wireControls();
    await this.reload();
  }

  private wireControls(): void {
    for (const th of this.root.querySelectorAll<HTMLElement>("th[data-col]")) {
      th.addEventListener("click", () => {
        this.view = toggleSort(this.view, th.dataset.col as SortColumn);
        this.renderTable();
      });
    }
    const pathInput = this.root.querySelector<HTMLInputElement>("#path-filter")!;
    pathInput.addEventListener("input", () => {
      this.view = { ...this.view, pathQuery: pathInput.value };
      this.renderTable();
    });
    const suppressed =
      this.root.querySelector<HTMLInputElement>("#show-suppressed")!;
    suppressed.addEventListener("change", () => {
      this.view = { ...this.view, hideSuppressed: !suppressed.checked };
      this.renderTable();
    });
  }

  private async reload(): Promise<void> {
    try {
      const [summary, all] = await Promise.all([
        this.api.getResult(),
        this.api.getAllFindings(),
      ]);
      this.findings = all.findings;
      this.counts = all.counts;
      this.renderSummary(summary);
      this.renderChips();
      this.renderTable();
      this.hideBanner();
    } catch (err) {
      this.showBanner(this.describeError(err));
    }
  }

  private describeError(err: unknown): string {
    if (err instanceof ApiError) {
      return err.status === 0
        ? `Cannot reach the scan API — ${err.message}`
        : `API error ${err.status}: ${err.message}`;
    }
    return String(err);
  }

  private showBanner(message: string): void {
    const banner = this.root.querySelector<HTMLElement>("#banner")!;
    banner.textContent = message;
    banner.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.root.querySelector<HTMLElement>("#banner")!.classList.add("hidden");
  }

  private renderSummary(summary: ResultSummary): void {
    const header = this.root.querySelector<HTMLElement>("#summary")!;
    const langs = summary.language_proportions
      .map((p) => `${p.language} ${p.percent}%`)
      .join(", ");
    header.innerHTML = `
      <h1>Scan review — ${esc(summary.pack_name)} ${esc(summary.pack_version)}</h1>
      <p>${summary.files} files · ${summary.physical_lines} LOC ·
         ${summary.code_lines} NCLOC · ${summary.findings} findings ·
         density ${esc(summary.density.display)} (${esc(summary.density.kind)}) ·
         ${esc(langs)}</p>`;
  }

  private renderChips(): void {
    const chips = this.root.querySelector<HTMLElement>("#chips")!;
    const byLevel = severityCounts(this.findings);
    chips.innerHTML = "";
    for (const key of SEVERITY_ORDER) {
      const chip = document.createElement("button");
      chip.className = `chip sev-${key}`;
      if (this.view.severities.has(key)) chip.classList.add("active");
      chip.textContent = `${SEVERITY_LABELS[key]} (${byLevel[key]})`;
      chip.addEventListener("click", () => {
        this.view = toggleSeverity(this.view, key);
        this.renderChips();
        this.renderTable();
      });
      chips.appendChild(chip);
    }
  }

  private renderTable(): void {
    const rows = applyView(this.findings, this.view);
    const badge = this.root.querySelector<HTMLElement>("#count-badge")!;
    badge.textContent =
      `${rows.length} shown · ${this.counts.open} open · ` +
      `${this.counts.suppressed} suppressed · ${this.counts.total} total`;
    const body = this.root.querySelector<HTMLElement>("#findings tbody")!;
    body.innerHTML = "";
    for (const row of rows) {
      const tr = document.createElement("tr");
      tr.className = isSuppressed(row.state) ? "suppressed" : "";
      tr.innerHTML = `
        <td class="sev-${esc(row.severity)}">${esc(row.severity_label)}</td>
        <td>${esc(row.title)}</td>
        <td>${esc(row.path)}:${row.line}</td>
        <td>${esc(row.state)}</td>`;
      tr.addEventListener("click", () => void this.select(row));
      body.appendChild(tr);
    }
  }

  private async select(finding: FindingRow): Promise<void> {
    this.selected = finding;
    const detail = this.root.querySelector<HTMLElement>("#detail")!;
    detail.innerHTML = `
      <h2>${esc(finding.title)}</h2>
      <p class="rule-id">${esc(finding.rule_id)} · ${esc(finding.severity_label)}</p>
      <p>${esc(finding.description)}</p>
      <label>context <input id="context" type="range" min="1" max="9"
             value="${this.context}" /></label>
      <pre id="excerpt"></pre>
      <div id="dispo"></div>
      <div id="dispo-error" class="inline-error"></div>`;
    detail
      .querySelector<HTMLInputElement>("#context")!
      .addEventListener("input", (event) => {
        this.context = Number((event.target as HTMLInputElement).value);
        void this.renderExcerpt();
      });
    this.renderDispositions();
    await this.renderExcerpt();
  }

  private async renderExcerpt(): Promise<void> {
    const finding = this.selected;
    if (!finding) return;
    const excerpt = this.root.querySelector<HTMLElement>("#excerpt")!;
    try {
      const source = await this.api.getSource(
        finding.path,
        finding.line,
        this.context,
      );
      excerpt.innerHTML = source.lines
        .map((l) => {
          const text = `${String(l.line).padStart(5)}  ${esc(l.text)}`;
          return l.marked ? `<mark>${text}</mark>` : text;
        })
        .join("\n");
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        excerpt.textContent = "file changed since scan";
      } else {
        excerpt.textContent = this.describeError(err);
      }
    }
  }

  private renderDispositions(): void {
    const finding = this.selected;
    if (!finding) return;
    const panel = this.root.querySelector<HTMLElement>("#dispo")!;
    panel.innerHTML = `
      <input id="note" placeholder="note" />
      <div id="dispo-buttons"></div>`;
    const note = panel.querySelector<HTMLInputElement>("#note")!;
    const buttons = panel.querySelector<HTMLElement>("#dispo-buttons")!;
    const refresh = () => {
      for (const button of buttons.querySelectorAll("button")) {
        button.disabled = !canSubmitDisposition(
          button.dataset.state!,
          note.value,
        );
      }
    };
    for (const state of TRIAGE_STATES) {
      const button = document.createElement("button");
      button.dataset.state = state;
      button.textContent = noteRequired(state) ? `${state} *` : state;
      button.addEventListener("click", () =>
        void this.submitDisposition(state, note.value),
      );
      buttons.appendChild(button);
    }
    note.addEventListener("input", refresh);
    refresh();
  }

  private async submitDisposition(state: string, note: string): Promise<void> {
    const finding = this.selected;
    if (!finding) return;
    const errorBox = this.root.querySelector<HTMLElement>("#dispo-error")!;
    errorBox.textContent = "";
    const update = applyDisposition(this.findings, finding.fingerprint, state);
    this.findings = update.rows;
    this.renderTable();
    try {
      await this.api.setTriage(finding.fingerprint, state, note);
      const refreshed = await this.api.getAllFindings();
      this.findings = refreshed.findings;
      this.counts = refreshed.counts;
      this.renderChips();
      this.renderTable();
    } catch (err) {
      this.findings = update.rollback;
      this.renderTable();
      const retry = err instanceof ApiError && err.status === 409;
      errorBox.textContent = this.describeError(err) + (retry ? " — retry?" : "");
    }
  }
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
