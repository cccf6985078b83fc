import { describe, expect, it } from "vitest";

import { SseParser } from "../src/stream.js";

const frame = (revision: number) =>
  `data: {"revision": ${revision}, "seat": 1, "move": {"pass": true}, "terminal": null}\n\n`;

describe("SseParser", () => {
  it("parses complete frames", () => {
    const parser = new SseParser();
    const frames = parser.push(frame(1) + frame(2));
    expect(frames.map((f) => f.revision)).toEqual([1, 2]);
  });

  it("buffers partial chunks across pushes", () => {
    const parser = new SseParser();
    const text = frame(7);
    expect(parser.push(text.slice(0, 15))).toEqual([]);
    expect(parser.push(text.slice(15, 40))).toEqual([]);
    const frames = parser.push(text.slice(40));
    expect(frames).toHaveLength(1);
    expect(frames[0].revision).toBe(7);
  });

  it("ignores non-data lines", () => {
    const parser = new SseParser();
    const frames = parser.push(": keepalive\n\n" + frame(3));
    expect(frames.map((f) => f.revision)).toEqual([3]);
  });

  it("carries terminal payloads through", () => {
    const parser = new SseParser();
    const frames = parser.push(
      'data: {"revision": 9, "seat": 0, "move": {"category": "SOLO", "cards": ["3H"]}, "terminal": {"winners": [0, 2], "team": "Landlord"}}\n\n'
    );
    expect(frames[0].terminal?.team).toBe("Landlord");
    expect(frames[0].move.cards).toEqual(["3H"]);
  });
});
