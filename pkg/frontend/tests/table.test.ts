// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import { cellText, renderTable } from "../src/table.js";

describe("cellText", () => {
  it("passes strings through byte for byte", () => {
    for (const s of ["plain", "0.123456", "naïve — dash", "  padded  ", ""]) {
      expect(cellText(s)).toBe(s);
    }
  });

  it("renders integers without formatting", () => {
    expect(cellText(13085)).toBe("13085");
    expect(cellText(0)).toBe("0");
    expect(cellText(-7)).toBe("-7");
  });

  it("renders null as empty", () => {
    expect(cellText(null)).toBe("");
  });
});

describe("renderTable", () => {
  const columns = ["state", "count(m)"];
  const rows = [
    ["Michigan", 25],
    ["Oregon", 10],
    ["Ontario", 17],
  ];

  it("renders headers and cells in server order", () => {
    const handle = renderTable(columns, rows, document);
    const headers = Array.from(
      handle.element.querySelectorAll("th"),
      (th) => th.textContent,
    );
    expect(headers).toEqual(columns);
    expect(handle.matrix()).toEqual([
      ["Michigan", "25"],
      ["Oregon", "10"],
      ["Ontario", "17"],
    ]);
  });

  it("sorts by column without altering cell text", () => {
    const handle = renderTable(columns, rows, document);
    handle.sortBy(1);
    expect(handle.matrix()).toEqual([
      ["Oregon", "10"],
      ["Ontario", "17"],
      ["Michigan", "25"],
    ]);
    handle.sortBy(1);  // same header again flips the direction
    expect(handle.matrix()[0]).toEqual(["Michigan", "25"]);
    handle.sortBy(0);
    expect(handle.matrix().map((r) => r[0])).toEqual([
      "Michigan",
      "Ontario",
      "Oregon",
    ]);
  });

  it("keeps sorts stable for equal keys", () => {
    const handle = renderTable(
      ["svc", "n"],
      [
        ["b", 1],
        ["a", 1],
        ["c", 1],
      ],
      document,
    );
    handle.sortBy(1);
    expect(handle.matrix().map((r) => r[0])).toEqual(["b", "a", "c"]);
  });

  it("compares numeric columns numerically, not lexically", () => {
    const handle = renderTable(["n"], [[9], [100], [25]], document);
    handle.sortBy(0);
    expect(handle.matrix().map((r) => r[0])).toEqual(["9", "25", "100"]);
  });

  it("fires cell clicks with the rendered text", () => {
    const clicked = vi.fn();
    const handle = renderTable(columns, rows, document, clicked);
    const cell = handle.element.querySelector("td");
    cell?.dispatchEvent(new MouseEvent("click"));
    expect(clicked).toHaveBeenCalledWith("Michigan", 0);
  });

  it("renders an empty body for zero rows", () => {
    const handle = renderTable(columns, [], document);
    expect(handle.matrix()).toEqual([]);
    expect(handle.element.querySelectorAll("th").length).toBe(2);
  });
});
