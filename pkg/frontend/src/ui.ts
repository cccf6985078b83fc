// DOM rendering. Everything is plain elements + CSS classes; the store
// drives re-renders and the server stays authoritative.

import { displayLabel, isRedSuit, isRedTen, sortHand } from "./cards.js";
import { OverlayCell, formatConfidence } from "./insight.js";
import { GameStore } from "./store.js";
import { GameView, MoveRepr } from "./types.js";

const SEAT_NAMES = ["south (you)", "west", "north", "east"];

export function moveText(move: MoveRepr): string {
  if (move.pass) return "pass";
  return `${move.category ?? "?"} ${(move.cards ?? []).join(" ")}`;
}

function el(
  tag: string,
  className: string,
  text?: string
): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderHand(store: GameStore, container: HTMLElement): void {
  container.textContent = "";
  const selectable = store.selectable();
  const chosen = new Set(store.selection);
  for (const code of sortHand(store.hand)) {
    const classes = ["card"];
    if (isRedSuit(code)) classes.push("red");
    if (isRedTen(code)) classes.push("red-ten");
    if (chosen.has(code)) classes.push("selected");
    // highlight exactly the cards the server's legal set allows
    if (selectable.has(code) || chosen.has(code)) classes.push("legal");
    else classes.push("dead");
    const node = el("button", classes.join(" "), displayLabel(code));
    node.setAttribute("data-card", code);
    (node as HTMLButtonElement).disabled =
      !selectable.has(code) && !chosen.has(code);
    node.addEventListener("click", () => store.toggleCard(code));
    container.appendChild(node);
  }
}

export function renderTable(view: GameView, container: HTMLElement): void {
  container.textContent = "";
  for (let seat = 0; seat < 4; seat++) {
    const row = el("div", "seat" + (view.turn === seat ? " to-act" : ""));
    row.setAttribute("data-seat", String(seat));
    row.appendChild(el("span", "seat-name", SEAT_NAMES[seat]));
    row.appendChild(
      el("span", "count", `${view.hand_counts[seat]} cards`)
    );
    if (view.lead_seat === seat && view.current_lead) {
      row.appendChild(el("span", "lead", moveText(view.current_lead)));
    }
    container.appendChild(row);
  }
  if (view.terminal) {
    container.appendChild(
      el(
        "div",
        "result",
        `${view.terminal.team} team wins (seats ${view.terminal.winners.join(
          ", "
        )})`
      )
    );
  }
}

export function renderHistory(view: GameView, container: HTMLElement): void {
  container.textContent = "";
  view.history.forEach(({ seat, move }, turn) => {
    container.appendChild(
      el("li", "entry", `t${turn} seat ${seat}: ${moveText(move)}`)
    );
  });
}

export function renderControls(store: GameStore, container: HTMLElement): void {
  container.textContent = "";
  const play = el("button", "play", "play selection") as HTMLButtonElement;
  play.disabled = store.matchedEntry() === null;
  play.addEventListener("click", () => {
    void store.submit().catch((err) => showError(String(err)));
  });
  const pass = el("button", "pass", "pass") as HTMLButtonElement;
  pass.disabled = !store.canPass();
  pass.addEventListener("click", () => {
    void store.pass().catch((err) => showError(String(err)));
  });
  container.appendChild(play);
  container.appendChild(pass);
}

export function renderOverlay(
  cells: OverlayCell[],
  container: HTMLElement
): void {
  container.textContent = "";
  for (const cell of cells) {
    const row = el("div", "insight-row");
    row.setAttribute("data-turn", String(cell.turn));
    row.setAttribute("data-seat", String(cell.seat));
    // raw payload numbers ride along for exactness checks and tooltips
    row.setAttribute("data-c-up", String(cell.values.c_up));
    row.setAttribute("data-c-front", String(cell.values.c_front));
    row.setAttribute("data-c-down", String(cell.values.c_down));
    row.setAttribute("data-d", String(cell.values.d));
    row.textContent =
      `t${cell.turn} s${cell.seat} ` +
      `c=(${formatConfidence(cell.values.c_up)}, ` +
      `${formatConfidence(cell.values.c_front)}, ` +
      `${formatConfidence(cell.values.c_down)}) ` +
      `d=${formatConfidence(cell.values.d)} mask=${cell.mask}` +
      (cell.event ? ` [${cell.event}]` : "");
    container.appendChild(row);
  }
}

function showError(message: string): void {
  const node = document.querySelector("#error");
  if (node) node.textContent = message;
}
