/**
 * Side-by-side roster diff for change requests: the original plan next to
 * the re-optimized one, with every changed cell highlighted and a deviation
 * count summarizing how much of the old plan was disturbed.
 */

import { RosterGrid, renderGrid } from "./rosterGrid.js";

export interface GridDiff {
  /** Keys "row:day" of cells whose label differs between the two grids. */
  changedCells: Set<string>;
  /** Number of changed employee-day cells. */
  changedCount: number;
}

export class DiffShapeError extends Error {}

export function diffGrids(base: RosterGrid, next: RosterGrid): GridDiff {
  if (
    base.nDays !== next.nDays ||
    base.employees.length !== next.employees.length
  ) {
    throw new DiffShapeError(
      `grid shapes differ: ${base.employees.length}x${base.nDays} vs ` +
        `${next.employees.length}x${next.nDays}`,
    );
  }
  const changedCells = new Set<string>();
  for (let r = 0; r < base.employees.length; r++) {
    for (let d = 0; d < base.nDays; d++) {
      if (base.cells[r][d] !== next.cells[r][d]) changedCells.add(`${r}:${d}`);
    }
  }
  return { changedCells, changedCount: changedCells.size };
}

/**
 * Render the two grids side by side. `deviation` is the solver-reported
 * block-level deviation from the result payload; the cell count shown next
 * to it comes from the grids themselves.
 */
export function renderDiff(
  base: RosterGrid,
  next: RosterGrid,
  deviation: number | null,
): string {
  const diff = diffGrids(base, next);
  const devText = deviation === null ? "n/a" : `${deviation}`;
  return [
    `<div class="roster-diff">`,
    `<p class="diff-summary" data-changed="${diff.changedCount}">` +
      `${diff.changedCount} cell(s) changed; solver deviation ${devText}</p>`,
    `<div class="diff-pane" data-side="before">${renderGrid(base, diff.changedCells)}</div>`,
    `<div class="diff-pane" data-side="after">${renderGrid(next, diff.changedCells)}</div>`,
    `</div>`,
  ].join("\n");
}
