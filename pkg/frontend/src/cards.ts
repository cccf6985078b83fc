// Card codes are "<rank><suit>", e.g. "TH" = ten of hearts. Rank order
// follows play strength: 3 low, 2 high.

export const RANKS = "3456789TJQKA2";
export const SUITS = "HDCS";
const SUIT_GLYPHS: Record<string, string> = {
  H: "♥",
  D: "♦",
  C: "♣",
  S: "♠",
};

export function rankIndex(code: string): number {
  const i = RANKS.indexOf(code[0]);
  if (i < 0) throw new Error(`bad card code ${code}`);
  return i;
}

export function suitIndex(code: string): number {
  const i = SUITS.indexOf(code[1]);
  if (i < 0) throw new Error(`bad card code ${code}`);
  return i;
}

export function isValidCode(code: string): boolean {
  return (
    code.length === 2 && RANKS.includes(code[0]) && SUITS.includes(code[1])
  );
}

export function isRedSuit(code: string): boolean {
  return code[1] === "H" || code[1] === "D";
}

// the red tens decide the hidden teams; the UI marks them specially
export function isRedTen(code: string): boolean {
  return code === "TH" || code === "TD";
}

export function displayLabel(code: string): string {
  return `${code[0]}${SUIT_GLYPHS[code[1]] ?? code[1]}`;
}

export function sortHand(codes: string[]): string[] {
  return [...codes].sort(
    (a, b) => rankIndex(a) - rankIndex(b) || suitIndex(a) - suitIndex(b)
  );
}
