/**
 * Roster grid: parse the service's roster CSV into a week x day grid and
 * render it, with a per-employee statistics panel.
 *
 * The grid is a faithful view of the CSV — `gridToCsv` reproduces the data
 * section byte-for-byte, which the tests use to prove nothing is lost or
 * rewritten in between. Preference satisfaction is recomputed here from the
 * grid and the instance document rather than trusted from the server.
 */

import { EmployeeStatistics, InstanceDoc } from "./api.js";

export const SLOT_LABELS = ["M", "A", "N"] as const;
export const REST_LABEL = "-";
const BLOCKS_PER_DAY = 3;
const NO_PREF = -1;

export interface RosterGrid {
  /** Row labels exactly as in the CSV, e.g. "e1". */
  employees: string[];
  nDays: number;
  /** cells[e][d] is the raw CSV cell, e.g. "SW:M", "P", "SW:M+OC", "-". */
  cells: string[][];
  /** Trailing "# ..." summary lines from the CSV, without the marker. */
  comments: string[];
}

export class RosterParseError extends Error {}

export function parseRosterCsv(text: string): RosterGrid {
  const lines = text.split(/\r\n|\n/).filter((l) => l.length > 0);
  const comments = lines
    .filter((l) => l.trimStart().startsWith("#"))
    .map((l) => l.trimStart().slice(1).trim());
  const data = lines.filter((l) => !l.trimStart().startsWith("#"));
  if (data.length < 2) throw new RosterParseError("roster CSV has no data rows");
  const header = data[0].split(",");
  if (header[0] !== "employee") {
    throw new RosterParseError("first column must be 'employee'");
  }
  const nDays = header.length - 1;
  const employees: string[] = [];
  const cells: string[][] = [];
  for (const line of data.slice(1)) {
    const row = line.split(",");
    if (row.length !== nDays + 1) {
      throw new RosterParseError(
        `row '${row[0]}' has ${row.length - 1} day cells, expected ${nDays}`,
      );
    }
    employees.push(row[0]);
    cells.push(row.slice(1));
  }
  return { employees, nDays, cells, comments };
}

/** Re-emit the data section with CRLF rows, matching the server export. */
export function gridToCsv(grid: RosterGrid): string {
  const rows = [
    ["employee", ...Array.from({ length: grid.nDays }, (_, d) => `d${d + 1}`)],
    ...grid.employees.map((e, i) => [e, ...grid.cells[i]]),
  ];
  return rows.map((r) => r.join(",")).join("\r\n") + "\r\n";
}

/** Data section of a raw roster CSV document, byte-for-byte. */
export function csvDataSection(text: string): string {
  const idx = text.indexOf("#");
  return idx === -1 ? text : text.slice(0, idx);
}

/**
 * Expand one grid cell into per-block occupancy (did employee work block t?).
 * All-day duties occupy all three blocks of the day; eight-hour duties only
 * the slot named after the colon.
 */
export function cellOccupancy(cell: string, instance: InstanceDoc): boolean[] {
  const occupied = new Array<boolean>(BLOCKS_PER_DAY).fill(false);
  if (cell === REST_LABEL || cell === "") return occupied;
  const kindOf = new Map<string, string>();
  instance.shift_labels.forEach((lab, k) => kindOf.set(lab, instance.shift_kinds[k]));
  for (const part of cell.split("+")) {
    const [label, slot] = part.split(":");
    const kind = kindOf.get(label);
    if (kind === undefined) throw new RosterParseError(`unknown duty label '${label}'`);
    if (kind === "all_day") {
      occupied.fill(true);
    } else {
      const s = SLOT_LABELS.indexOf(slot as (typeof SLOT_LABELS)[number]);
      if (s === -1) throw new RosterParseError(`bad slot in cell '${part}'`);
      occupied[s] = true;
    }
  }
  return occupied;
}

/** Per-employee, per-block occupancy for the whole grid. */
export function gridOccupancy(grid: RosterGrid, instance: InstanceDoc): boolean[][] {
  return grid.cells.map((row) => {
    const blocks: boolean[] = [];
    for (const cell of row) blocks.push(...cellOccupancy(cell, instance));
    return blocks;
  });
}

export interface PreferenceSummary {
  stated: number;
  violated: number;
  /** 1 - violated/stated, or null when no preferences were stated. */
  satisfaction: number | null;
}

/**
 * Recompute preference satisfaction from the grid. A stated preference is a
 * 0/1 wish for a block; it is violated when occupancy differs from the wish.
 */
export function preferenceSatisfaction(
  grid: RosterGrid,
  instance: InstanceDoc,
): PreferenceSummary[] {
  const occ = gridOccupancy(grid, instance);
  return instance.preferences.map((prefs, e) => {
    let stated = 0;
    let violated = 0;
    prefs.forEach((wish, t) => {
      if (wish === NO_PREF) return;
      stated += 1;
      if ((occ[e][t] ? 1 : 0) !== wish) violated += 1;
    });
    return {
      stated,
      violated,
      satisfaction: stated ? 1 - violated / stated : null,
    };
  });
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const DAY_NAMES = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

/**
 * Render the grid as one HTML table per week with employees as rows.
 * Cell text is the raw CSV label so the view never diverges from the export.
 */
export function renderGrid(grid: RosterGrid, highlight?: Set<string>): string {
  const weeks = Math.ceil(grid.nDays / 7);
  const tables: string[] = [];
  for (let w = 0; w < weeks; w++) {
    const days = Array.from(
      { length: Math.min(7, grid.nDays - 7 * w) },
      (_, i) => 7 * w + i,
    );
    const head = days.map((d) => `<th>${DAY_NAMES[d % 7]} d${d + 1}</th>`).join("");
    const body = grid.employees
      .map((e, r) => {
        const tds = days
          .map((d) => {
            const key = `${r}:${d}`;
            const cls = highlight?.has(key) ? ` class="changed"` : "";
            return `<td data-cell="${key}"${cls}>${esc(grid.cells[r][d])}</td>`;
          })
          .join("");
        return `<tr><th>${esc(e)}</th>${tds}</tr>`;
      })
      .join("");
    tables.push(
      `<table class="roster-grid" data-week="${w + 1}">` +
        `<thead><tr><th>week ${w + 1}</th>${head}</tr></thead>` +
        `<tbody>${body}</tbody></table>`,
    );
  }
  return tables.join("\n");
}

/** Statistics panel fed by the result payload plus client-side recomputation. */
export function renderStatsPanel(
  stats: EmployeeStatistics[],
  recomputed: PreferenceSummary[],
): string {
  const rows = stats
    .map((s, e) => {
      const duties = Object.entries(s.shift_counts)
        .map(([k, v]) => `${esc(k)}=${v}`)
        .join(" ");
      const sat = recomputed[e]?.satisfaction;
      const satText = sat === null || sat === undefined ? "n/a" : `${(sat * 100).toFixed(1)}%`;
      return (
        `<tr><th>e${s.employee + 1}</th><td>${duties}</td>` +
        `<td>${s.rest_days}</td><td data-stat="pref-sat">${satText}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="stats-panel"><thead><tr><th>employee</th><th>duties</th>` +
    `<th>rest days</th><th>preference satisfaction</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}
