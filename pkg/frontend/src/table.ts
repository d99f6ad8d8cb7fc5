/** Result-table rendering.
 *
 * Cells carry server values verbatim: strings untouched, numbers via
 * default JS formatting, never rounded or localized. Header clicks
 * reorder rows client-side; the cell content itself never changes.
 */

import type { Cell } from "./api.js";

export function cellText(value: Cell): string {
  if (value === null) return "";
  return typeof value === "string" ? value : String(value);
}

function compareCells(a: Cell, b: Cell): number {
  if (typeof a === "number" && typeof b === "number") {
    return a === b ? 0 : a < b ? -1 : 1;
  }
  const ta = cellText(a);
  const tb = cellText(b);
  return ta === tb ? 0 : ta < tb ? -1 : 1;
}

export interface TableHandle {
  element: HTMLTableElement;
  /** Current cell text by row, in display order. */
  matrix(): string[][];
  sortBy(column: number, descending?: boolean): void;
}

export function renderTable(
  columns: readonly string[],
  rows: readonly Cell[][],
  doc: Document,
  onCellClick?: (value: string, column: number) => void,
): TableHandle {
  const table = doc.createElement("table");
  table.className = "result-table";

  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  const sortState = { column: -1, descending: false };

  const tbody = doc.createElement("tbody");
  // original order preserved so repeated sorts stay deterministic
  const original = rows.map((row) => row.slice());

  function paintBody(ordered: readonly Cell[][]): void {
    tbody.textContent = "";
    for (const row of ordered) {
      const tr = doc.createElement("tr");
      row.forEach((value, columnIndex) => {
        const td = doc.createElement("td");
        td.textContent = cellText(value);
        if (onCellClick) {
          td.addEventListener("click", () =>
            onCellClick(cellText(value), columnIndex),
          );
        }
        tr.appendChild(td);
      });
      tbody.appendChild(tr);
    }
  }

  function sortBy(column: number, descending?: boolean): void {
    if (descending === undefined) {
      descending = sortState.column === column ? !sortState.descending : false;
    }
    sortState.column = column;
    sortState.descending = descending;
    const ordered = original
      .map((row, index) => ({ row, index }))
      .sort((a, b) => {
        const byCell = compareCells(a.row[column] ?? null, b.row[column] ?? null);
        const oriented = descending ? -byCell : byCell;
        return oriented !== 0 ? oriented : a.index - b.index;
      })
      .map((entry) => entry.row);
    paintBody(ordered);
  }

  columns.forEach((name, index) => {
    const th = doc.createElement("th");
    th.textContent = name;
    th.addEventListener("click", () => sortBy(index));
    headRow.appendChild(th);
  });
  thead.appendChild(headRow);
  table.appendChild(thead);
  paintBody(original);
  table.appendChild(tbody);

  return {
    element: table,
    matrix() {
      return Array.from(tbody.querySelectorAll("tr"), (tr) =>
        Array.from(tr.querySelectorAll("td"), (td) => td.textContent ?? ""),
      );
    },
    sortBy,
  };
}
