// Thin typed client for the /v1 HTTP interface. The fetch function is
// injectable so tests can run against a stub or a live server alike.

import { GameView, InsightRow } from "./types.js";

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class GameApi {
  constructor(
    private base: string,
    private fetchFn: FetchLike = fetch as unknown as FetchLike
  ) {}

  private async request<T>(
    path: string,
    method: string,
    body?: unknown
  ): Promise<T> {
    const resp = await this.fetchFn(`${this.base}/v1${path}`, {
      method,
      headers: body ? { "content-type": "application/json" } : undefined,
      body: body ? JSON.stringify(body) : undefined,
    });
    const data = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) {
      throw new ApiError(resp.status, String(data["detail"] ?? "error"));
    }
    return data as T;
  }

  createGame(
    agents: string[],
    humanSeat: number | null,
    seed?: number
  ): Promise<{ game_id: string; seed: number }> {
    return this.request("/games", "POST", {
      agents,
      human_seat: humanSeat,
      seed,
    });
  }

  view(gameId: string): Promise<GameView> {
    return this.request(`/games/${gameId}`, "GET");
  }

  postMove(
    gameId: string,
    cards: string[] | "pass"
  ): Promise<{ accepted: boolean; revision: number }> {
    return this.request(`/games/${gameId}/moves`, "POST", { cards });
  }

  insight(gameId: string): Promise<{ series: InsightRow[] }> {
    return this.request(`/games/${gameId}/insight`, "GET");
  }

  streamUrl(gameId: string, since = 0): string {
    return `${this.base}/v1/games/${gameId}/stream?since=${since}`;
  }
}
