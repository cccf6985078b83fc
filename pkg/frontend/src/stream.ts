// Server-push event stream. The service emits classic SSE frames:
//   data: {"revision": 3, "seat": 1, "move": {...}, "terminal": null}\n\n
// Parsing is kept separate from transport so tests can feed raw chunks.

import { StreamFrame } from "./types.js";

export class SseParser {
  private buffer = "";

  /** Feed a transport chunk, get every completed frame. */
  push(chunk: string): StreamFrame[] {
    this.buffer += chunk;
    const frames: StreamFrame[] = [];
    let cut: number;
    while ((cut = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      for (const line of block.split("\n")) {
        if (line.startsWith("data: ")) {
          frames.push(JSON.parse(line.slice(6)) as StreamFrame);
        }
      }
    }
    return frames;
  }
}

export interface StreamHandle {
  close(): void;
}

/** Follow a game's event stream with fetch streaming (works in browsers
 * and in node 20 without an EventSource polyfill). */
export function followStream(
  url: string,
  onFrame: (frame: StreamFrame) => void,
  fetchFn: typeof fetch = fetch
): StreamHandle {
  const controller = new AbortController();
  const parser = new SseParser();
  (async () => {
    const resp = await fetchFn(url, { signal: controller.signal });
    if (!resp.ok || !resp.body) return;
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        onFrame(frame);
      }
    }
  })().catch(() => {
    /* stream closed */
  });
  return { close: () => controller.abort() };
}
