// Insight overlay model. The overlay must show exactly what the server
// reported: raw payload numbers are kept as-is and only formatted at the
// last moment, so a displayed value always equals the /insight value.

import { InsightRow } from "./types.js";

export interface OverlayCell {
  turn: number;
  seat: number;
  values: { c_up: number; c_front: number; c_down: number; d: number };
  mask: string;
  move: string;
  event: string;
}

export function toOverlay(series: InsightRow[]): OverlayCell[] {
  return series.map((row) => ({
    turn: row.turn,
    seat: row.seat,
    values: {
      c_up: row.c_up,
      c_front: row.c_front,
      c_down: row.c_down,
      d: row.d,
    },
    mask: row.mask,
    move: row.move,
    event: row.event,
  }));
}

/** Display formatting; the raw value stays on the cell model. */
export function formatConfidence(value: number): string {
  return value.toFixed(3);
}

/** Rows for one seat, in turn order, for the per-seat confidence trace. */
export function seatTrace(cells: OverlayCell[], seat: number): OverlayCell[] {
  return cells
    .filter((cell) => cell.seat === seat)
    .sort((a, b) => a.turn - b.turn);
}
