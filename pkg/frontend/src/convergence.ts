/**
 * View model for the convergence plot: incumbent objective and lower bound
 * against elapsed seconds.
 *
 * The series are stored exactly as received from the progress stream — no
 * smoothing, resampling, or clamping — so the plot cannot show a shape the
 * solver did not produce. The objective axis is log-scale because early
 * incumbents can be orders of magnitude above the final value.
 */

import { ProgressEvent, StreamEvent, isFinalState } from "./api.js";

export interface SeriesPoint {
  elapsed: number;
  incumbent: number | null;
  bound: number | null;
  gap: number | null;
}

export interface PhaseMarker {
  elapsed: number;
  phase: string;
}

export class ConvergenceViewModel {
  readonly points: SeriesPoint[] = [];
  readonly phaseMarkers: PhaseMarker[] = [];
  finalState: string | null = null;
  private lastPhase: string | null = null;

  ingest(ev: StreamEvent): void {
    if (isFinalState(ev)) {
      this.finalState = ev.final_state;
      return;
    }
    const p = ev as ProgressEvent;
    this.points.push({
      elapsed: p.elapsed_s,
      incumbent: p.incumbent,
      bound: p.bound,
      gap: p.gap,
    });
    if (p.phase !== this.lastPhase) {
      this.phaseMarkers.push({ elapsed: p.elapsed_s, phase: p.phase });
      this.lastPhase = p.phase;
    }
  }

  ingestAll(events: Iterable<StreamEvent>): void {
    for (const ev of events) this.ingest(ev);
  }

  incumbentSeries(): Array<[number, number]> {
    return this.points
      .filter((p) => p.incumbent !== null)
      .map((p) => [p.elapsed, p.incumbent as number]);
  }

  boundSeries(): Array<[number, number]> {
    return this.points
      .filter((p) => p.bound !== null)
      .map((p) => [p.elapsed, p.bound as number]);
  }

  /** Incumbent never increases, bound never decreases. */
  isMonotone(): boolean {
    let inc = Infinity;
    let bnd = -Infinity;
    for (const p of this.points) {
      if (p.incumbent !== null) {
        if (p.incumbent > inc + 1e-9) return false;
        inc = p.incumbent;
      }
      if (p.bound !== null) {
        if (p.bound < bnd - 1e-9) return false;
        bnd = p.bound;
      }
    }
    return true;
  }

  latestGap(): number | null {
    for (let i = this.points.length - 1; i >= 0; i--) {
      const g = this.points[i].gap;
      if (g !== null) return g;
    }
    return null;
  }

  /** Render an SVG line chart; pure string output so it is testable headless. */
  renderSvg(width = 640, height = 360): string {
    const inc = this.incumbentSeries();
    const bnd = this.boundSeries();
    const all = [...inc, ...bnd];
    if (all.length === 0) {
      return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"><text x="10" y="20">no data</text></svg>`;
    }
    const tMax = Math.max(...all.map(([t]) => t), 1e-9);
    const values = all.map(([, v]) => v).filter((v) => v > 0);
    // Log scale on the objective axis; non-positive values would need a
    // symlog axis, but objectives here are sums of non-negative penalties.
    const yLo = Math.log10(Math.min(...values, 1));
    const yHi = Math.log10(Math.max(...values, 1) + 1e-9);
    const span = Math.max(yHi - yLo, 1e-9);
    const px = (t: number) => (40 + (t / tMax) * (width - 60)).toFixed(2);
    const py = (v: number) =>
      (height - 30 - ((Math.log10(Math.max(v, 1e-12)) - yLo) / span) * (height - 60)).toFixed(2);
    const path = (pts: Array<[number, number]>) =>
      pts.map(([t, v], i) => `${i ? "L" : "M"}${px(t)},${py(v)}`).join(" ");
    const markers = this.phaseMarkers
      .map(
        (m) =>
          `<line x1="${px(m.elapsed)}" y1="30" x2="${px(m.elapsed)}" y2="${height - 30}" class="phase-marker" data-phase="${m.phase}"/>`,
      )
      .join("");
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" data-yscale="log">`,
      markers,
      inc.length ? `<path class="incumbent" fill="none" d="${path(inc)}"/>` : "",
      bnd.length ? `<path class="bound" fill="none" d="${path(bnd)}"/>` : "",
      `</svg>`,
    ].join("");
  }
}
