import { describe, expect, it } from "vitest";

import {
  displayLabel,
  isRedSuit,
  isRedTen,
  isValidCode,
  rankIndex,
  sortHand,
  suitIndex,
} from "../src/cards.js";

describe("card codes", () => {
  it("orders ranks 3 low to 2 high", () => {
    expect(rankIndex("3H")).toBe(0);
    expect(rankIndex("TH")).toBe(7);
    expect(rankIndex("2S")).toBe(12);
  });

  it("orders suits H D C S", () => {
    expect(["QH", "QD", "QC", "QS"].map(suitIndex)).toEqual([0, 1, 2, 3]);
  });

  it("validates codes", () => {
    expect(isValidCode("TH")).toBe(true);
    expect(isValidCode("1H")).toBe(false);
    expect(isValidCode("TX")).toBe(false);
    expect(isValidCode("T")).toBe(false);
  });

  it("knows the red tens", () => {
    expect(isRedTen("TH")).toBe(true);
    expect(isRedTen("TD")).toBe(true);
    expect(isRedTen("TC")).toBe(false);
    expect(isRedSuit("9D")).toBe(true);
    expect(isRedSuit("9S")).toBe(false);
  });

  it("sorts hands by rank then suit without mutating", () => {
    const hand = ["2S", "3D", "TH", "3H", "TC"];
    expect(sortHand(hand)).toEqual(["3H", "3D", "TH", "TC", "2S"]);
    expect(hand[0]).toBe("2S");
  });

  it("renders glyph labels", () => {
    expect(displayLabel("TH")).toBe("T♥");
    expect(displayLabel("AS")).toBe("A♠");
  });

  it("rejects junk", () => {
    expect(() => rankIndex("XZ")).toThrow();
  });
});
