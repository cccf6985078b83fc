// Selection matching against the server's legal-move entries.
//
// The server sends shape-level entries: tens appear as concrete codes
// (their suit matters for identity), every other rank as a "<rank>?"
// placeholder meaning "any card of that rank". A concrete selection
// matches an entry when its tens equal the entry's tens exactly and its
// per-rank counts cover the placeholders.

import { LegalEntry } from "./types.js";

interface EntryShape {
  tens: string[]; // sorted concrete ten codes
  rankCounts: Map<string, number>; // non-ten rank -> required count
  size: number;
}

function entryShape(entry: LegalEntry): EntryShape {
  const tens: string[] = [];
  const rankCounts = new Map<string, number>();
  for (const code of entry.cards ?? []) {
    if (code.endsWith("?")) {
      const rank = code[0];
      rankCounts.set(rank, (rankCounts.get(rank) ?? 0) + 1);
    } else {
      tens.push(code);
    }
  }
  tens.sort();
  return { tens, rankCounts, size: (entry.cards ?? []).length };
}

function selectionShape(selection: string[]): EntryShape {
  const tens: string[] = [];
  const rankCounts = new Map<string, number>();
  for (const code of selection) {
    if (code[0] === "T") {
      tens.push(code);
    } else {
      rankCounts.set(code[0], (rankCounts.get(code[0]) ?? 0) + 1);
    }
  }
  tens.sort();
  return { tens, rankCounts, size: selection.length };
}

function covers(entry: EntryShape, sel: EntryShape, exact: boolean): boolean {
  if (exact ? sel.size !== entry.size : sel.size > entry.size) return false;
  // tens must be a (prefix-free) subset; exact needs equality
  const remaining = [...entry.tens];
  for (const ten of sel.tens) {
    const i = remaining.indexOf(ten);
    if (i < 0) return false;
    remaining.splice(i, 1);
  }
  if (exact && remaining.length > 0) return false;
  for (const [rank, count] of sel.rankCounts) {
    const need = entry.rankCounts.get(rank) ?? 0;
    if (exact ? count !== need : count > need) return false;
  }
  if (exact) {
    for (const [rank, need] of entry.rankCounts) {
      if ((sel.rankCounts.get(rank) ?? 0) !== need) return false;
    }
  }
  return true;
}

/** The legal entry exactly matched by the selection, if any. */
export function matchSelection(
  legal: LegalEntry[],
  selection: string[]
): LegalEntry | null {
  const sel = selectionShape(selection);
  for (const entry of legal) {
    if (entry.pass) continue;
    if (covers(entryShape(entry), sel, true)) return entry;
  }
  return null;
}

export function passAllowed(legal: LegalEntry[]): boolean {
  return legal.some((entry) => entry.pass === true);
}

/**
 * Cards the player may add to the current selection: those that keep it
 * a sub-multiset of at least one legal entry. With an empty selection
 * this is exactly the set of cards participating in any legal move.
 */
export function selectableCards(
  legal: LegalEntry[],
  hand: string[],
  selection: string[]
): Set<string> {
  const out = new Set<string>();
  const chosen = new Set(selection);
  for (const code of hand) {
    if (chosen.has(code)) continue;
    const sel = selectionShape([...selection, code]);
    for (const entry of legal) {
      if (entry.pass) continue;
      if (covers(entryShape(entry), sel, false)) {
        out.add(code);
        break;
      }
    }
  }
  return out;
}
