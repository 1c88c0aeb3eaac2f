import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, FindingRow } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function findingRow(fingerprint: string): FindingRow {
  return {
    fingerprint,
    rule_id: "r",
    title: "T",
    severity: "high",
    severity_label: "High",
    path: "a.cc",
    line: 1,
    snippet: "x;",
    description: "",
    state: "unreviewed",
  };
}

describe("ApiClient", () => {
  it("requests source with path, line and context parameters", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse({ schema: 1, path: "a.cc", start_line: 1, marked_line: 2, lines: [] }),
    );
    const client = new ApiClient("", fetchMock);
    await client.getSource("a.cc", 2, 5);
    const url = String(fetchMock.mock.calls[0][0]);
    expect(url).toBe("/api/source?path=a.cc&line=2&context=5");
  });

  it("posts triage with state and note", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse({ schema: 1, record: {}, warnings: [] }),
    );
    const client = new ApiClient("", fetchMock);
    await client.setTriage("abcd", "false_positive", "dup");
    const [url, init] = fetchMock.mock.calls[0];
    expect(String(url)).toBe("/api/findings/abcd/triage");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toMatchObject({
      state: "false_positive",
      note: "dup",
    });
  });

  it("surfaces API error payloads with status codes", async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValue(jsonResponse({ schema: 1, error: "store is locked" }, 409));
    const client = new ApiClient("", fetchMock);
    const attempt = client.setTriage("abcd", "confirmed");
    await expect(attempt).rejects.toMatchObject({ status: 409, message: "store is locked" });
    await expect(attempt).rejects.toBeInstanceOf(ApiError);
  });

  it("maps network failure to status 0 so the banner can render", async () => {
    const fetchMock = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    const client = new ApiClient("", fetchMock);
    await expect(client.getResult()).rejects.toMatchObject({ status: 0 });
  });

  it("collects every page of findings", async () => {
    const pageOne = {
      schema: 1,
      total: 3,
      page: 1,
      page_size: 2,
      counts: { total: 3, open: 3, suppressed: 0 },
      findings: [findingRow("a"), findingRow("b")],
    };
    const pageTwo = { ...pageOne, page: 2, findings: [findingRow("c")] };
    const fetchMock = vi
      .fn()
      .mockResolvedValueOnce(jsonResponse(pageOne))
      .mockResolvedValueOnce(jsonResponse(pageTwo));
    const client = new ApiClient("", fetchMock);
    const all = await client.getAllFindings();
    expect(all.findings.map((f) => f.fingerprint)).toEqual(["a", "b", "c"]);
    expect(all.counts.total).toBe(3);
  });
});
