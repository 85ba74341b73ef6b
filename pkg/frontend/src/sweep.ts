import { escapeHtml, formatScore } from "./format.js";
import type { CellValue, ExperimentSpecSubset, TableData } from "./types.js";

export type CellState = "pending" | "done" | "failed";

export interface GridCell {
  state: CellState;
  value: number | null;
}

/** Template×backend macro-F1 grid that fills as experiment polling returns
 * cells. Values are service numbers verbatim; the grid only tracks fill
 * state and per-column maxima for highlighting. */
export class SweepGrid {
  readonly cells = new Map<string, GridCell>();

  constructor(
    readonly rows: string[],
    readonly cols: string[],
  ) {
    for (const row of rows) {
      for (const col of cols) {
        this.cells.set(this.key(row, col), { state: "pending", value: null });
      }
    }
  }

  private key(row: string, col: string): string {
    return `${row}${col}`;
  }

  cell(row: string, col: string): GridCell {
    const cell = this.cells.get(this.key(row, col));
    if (!cell) throw new Error(`unknown cell ${row}/${col}`);
    return cell;
  }

  applyUpdates(updates: CellValue[]): void {
    for (const update of updates) {
      const cell = this.cells.get(this.key(update.row, update.col));
      if (!cell) continue;
      cell.value = update.value;
      cell.state = update.value === null ? "failed" : "done";
    }
  }

  applyTable(table: TableData): void {
    table.rows.forEach((row, i) => {
      table.cols.forEach((col, j) => {
        this.applyUpdates([{ row, col, value: table.cells[i][j] }]);
      });
    });
  }

  filledCount(): number {
    let filled = 0;
    for (const cell of this.cells.values()) {
      if (cell.state !== "pending") filled += 1;
    }
    return filled;
  }

  isComplete(): boolean {
    return this.filledCount() === this.rows.length * this.cols.length;
  }

  /** Highest completed value in a column (the boldface of result tables). */
  columnMax(col: string): number | null {
    let best: number | null = null;
    for (const row of this.rows) {
      const cell = this.cell(row, col);
      if (cell.state === "done" && cell.value !== null) {
        if (best === null || cell.value > best) best = cell.value;
      }
    }
    return best;
  }

  render(): string {
    const header =
      "<tr><th>template</th>" +
      this.cols.map((col) => `<th>${escapeHtml(col)}</th>`).join("") +
      "</tr>";
    const maxima = new Map(this.cols.map((col) => [col, this.columnMax(col)]));
    const body = this.rows
      .map((row) => {
        const cells = this.cols
          .map((col) => {
            const cell = this.cell(row, col);
            if (cell.state === "pending") {
              return '<td class="cell pending">…</td>';
            }
            if (cell.state === "failed") {
              return '<td class="cell failed">failed</td>';
            }
            const best =
              maxima.get(col) !== null && cell.value === maxima.get(col);
            return `<td class="cell done${best ? " best" : ""}">${formatScore(cell.value as number)}</td>`;
          })
          .join("");
        return `<tr><th class="row-label">${escapeHtml(row)}</th>${cells}</tr>`;
      })
      .join("");
    return `<table class="sweep-grid">${header}${body}</table>`;
  }
}

/** Launch guardrail: an empty selection cannot be submitted. */
export function canLaunch(spec: ExperimentSpecSubset): boolean {
  return (
    spec.datasets.length > 0 &&
    spec.backends.length > 0 &&
    spec.templates.length > 0
  );
}

export interface PinnedRun {
  handle: string;
  label: string;
  grid: SweepGrid;
}

/** Side-by-side deltas of the current grid against a pinned run. */
export function renderComparison(current: SweepGrid, pinned: PinnedRun): string {
  const header =
    `<tr><th>template</th>` +
    current.cols
      .map(
        (col) =>
          `<th>${escapeHtml(col)} (now)</th><th>${escapeHtml(col)} (${escapeHtml(pinned.label)})</th><th>Δ</th>`,
      )
      .join("") +
    "</tr>";
  const body = current.rows
    .map((row) => {
      const cells = current.cols
        .map((col) => {
          const now = current.cell(row, col);
          const before = pinned.grid.cells.get(`${row}${col}`);
          const nowText = now.value === null ? "—" : formatScore(now.value);
          const beforeText =
            before?.value == null ? "—" : formatScore(before.value);
          let delta = "—";
          let deltaClass = "";
          if (now.value !== null && before?.value != null) {
            const diff = now.value - before.value;
            delta = `${diff >= 0 ? "+" : ""}${formatScore(diff)}`;
            deltaClass = diff > 0 ? " up" : diff < 0 ? " down" : "";
          }
          return (
            `<td>${nowText}</td><td>${beforeText}</td>` +
            `<td class="delta${deltaClass}">${delta}</td>`
          );
        })
        .join("");
      return `<tr><th class="row-label">${escapeHtml(row)}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="comparison">${header}${body}</table>`;
}
