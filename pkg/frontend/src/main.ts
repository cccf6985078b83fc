// Entry point: create a game against three service-side agents, follow
// the event stream, and re-render on every change.

import { GameApi } from "./api.js";
import { GameStore } from "./store.js";
import { followStream } from "./stream.js";
import { toOverlay } from "./insight.js";
import {
  renderControls,
  renderHand,
  renderHistory,
  renderOverlay,
  renderTable,
} from "./ui.js";

const SERVER = (window as { REDTEN_SERVER?: string }).REDTEN_SERVER ??
  "http://127.0.0.1:8321";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const api = new GameApi(SERVER);
  const params = new URLSearchParams(location.search);
  const agents = (params.get("agents") ?? "human,idrl,idrl,idrl").split(",");
  const created = await api.createGame(agents, agents.indexOf("human"));
  const store = new GameStore(api, created.game_id);

  const render = () => {
    if (!store.view) return;
    renderTable(store.view, byId("table"));
    renderHand(store, byId("hand"));
    renderHistory(store.view, byId("history"));
    renderControls(store, byId("controls"));
  };
  store.onChange(render);
  await store.refresh();

  followStream(api.streamUrl(store.gameId), (frame) => {
    if (store.noteFrame(frame)) void store.refresh();
  });

  byId("insight-load").addEventListener("click", () => {
    void api
      .insight(store.gameId)
      .then((payload) =>
        renderOverlay(toOverlay(payload.series), byId("insight"))
      )
      .catch(() => {
        byId("insight").textContent = "insight is not exposed on this server";
      });
  });
}

void boot().catch((err) => {
  document.body.textContent = `failed to start: ${err}`;
});
