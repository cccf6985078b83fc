// Client-side game state. The server is the single source of truth; the
// store only mirrors the latest view, tracks the player's selection, and
// refuses to submit a move built against a stale revision.

import { GameApi } from "./api.js";
import { matchSelection, passAllowed, selectableCards } from "./legal.js";
import { GameView, LegalEntry, StreamFrame } from "./types.js";

export class StaleRevisionError extends Error {
  constructor(
    public selectedAt: number,
    public current: number
  ) {
    super(`view advanced from revision ${selectedAt} to ${current}`);
  }
}

export class GameStore {
  view: GameView | null = null;
  selection: string[] = [];
  // revision the current selection was started against
  private selectionRevision = -1;
  private listeners: (() => void)[] = [];

  constructor(
    private api: GameApi,
    public gameId: string
  ) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  async refresh(): Promise<GameView> {
    const view = await this.api.view(this.gameId);
    this.applyView(view);
    return view;
  }

  applyView(view: GameView): void {
    const advanced = this.view !== null && view.revision > this.view.revision;
    this.view = view;
    if (advanced && this.selection.length > 0) {
      // the table moved under the player's feet; drop the selection
      this.selection = [];
      this.selectionRevision = -1;
    }
    this.emit();
  }

  /** A stream frame only signals that the view is out of date. */
  noteFrame(frame: StreamFrame): boolean {
    return this.view === null || frame.revision > this.view.revision;
  }

  get legal(): LegalEntry[] {
    return this.view?.legal_moves ?? [];
  }

  get hand(): string[] {
    return this.view?.hand ?? [];
  }

  get isMyTurn(): boolean {
    return (
      this.view !== null &&
      this.view.terminal === null &&
      this.view.human_seat !== null &&
      this.view.turn === this.view.human_seat
    );
  }

  toggleCard(code: string): void {
    if (!this.view) return;
    const i = this.selection.indexOf(code);
    if (i >= 0) {
      this.selection.splice(i, 1);
      if (this.selection.length === 0) this.selectionRevision = -1;
    } else {
      if (!this.selectable().has(code)) return;
      if (this.selection.length === 0) {
        this.selectionRevision = this.view.revision;
      }
      this.selection.push(code);
    }
    this.emit();
  }

  selectable(): Set<string> {
    if (!this.isMyTurn) return new Set();
    return selectableCards(this.legal, this.hand, this.selection);
  }

  matchedEntry(): LegalEntry | null {
    if (!this.isMyTurn || this.selection.length === 0) return null;
    return matchSelection(this.legal, this.selection);
  }

  canPass(): boolean {
    return this.isMyTurn && passAllowed(this.legal);
  }

  /** Submit the selection; throws StaleRevisionError before touching the
   * network when the view advanced since the selection began. */
  async submit(): Promise<void> {
    if (!this.view) throw new Error("no view loaded");
    if (
      this.selectionRevision >= 0 &&
      this.selectionRevision !== this.view.revision
    ) {
      const err = new StaleRevisionError(
        this.selectionRevision,
        this.view.revision
      );
      this.selection = [];
      this.selectionRevision = -1;
      this.emit();
      throw err;
    }
    if (this.matchedEntry() === null) {
      throw new Error("selection is not a legal move");
    }
    await this.api.postMove(this.gameId, this.selection);
    this.selection = [];
    this.selectionRevision = -1;
    await this.refresh();
  }

  async pass(): Promise<void> {
    if (!this.canPass()) throw new Error("pass is not legal now");
    await this.api.postMove(this.gameId, "pass");
    this.selection = [];
    this.selectionRevision = -1;
    await this.refresh();
  }
}
