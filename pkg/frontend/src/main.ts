import { HttpApi } from "./api";
import { SessionController, type ControllerEvent } from "./state";
import {
  renderCandidateCard,
  renderHistory,
  renderMetricsPanel,
  renderSetupForm,
  renderTopK,
  toast,
} from "./dom";

// Service origin: same-origin by default, ?api=http://host:port to point
// the console somewhere else (the service allows cross-origin requests).
const params = new URLSearchParams(location.search);
const base = params.get("api") ?? "http://127.0.0.1:8000";
const api = new HttpApi(base);

const $ = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node;
};

let controller: SessionController | null = null;

function handleEvent(ev: ControllerEvent): void {
  if (ev.kind === "toast") {
    toast(ev.message);
    return;
  }
  const { view, phase } = ev;
  if (!view) {
    return;
  }
  $("setup").hidden = true;
  $("session").hidden = false;
  $("session-title").textContent =
    `${view.summary.dataset} / ${view.summary.engine} - session ${view.summary.session}`;
  const busy = phase === "awaiting-ack" || phase === "awaiting-candidate";
  $("status-line").textContent =
    phase === "complete" ? "complete" : busy ? "waiting for server..." : "your turn";
  renderCandidateCard($("candidate"), view.candidate, view.summary.engine, phase === "idle", (y) => {
    controller?.label(y).catch((err) => toast(String(err)));
  });
  renderTopK($("topk"), view.topK, view.summary.engine);
  renderMetricsPanel($("metrics"), view.metrics);
  renderHistory($("history"), view.summary.history);
  location.hash = view.summary.session; // survives reloads and restarts
}

async function boot(): Promise<void> {
  const datasets = await api.listDatasets();
  renderSetupForm($("setup"), datasets, (req) => {
    controller = new SessionController(api, handleEvent);
    controller.start(req).catch((err) => toast(String(err)));
  });
  const resume = location.hash.slice(1);
  if (resume) {
    // rejoin an existing session (e.g. after a server or page restart)
    controller = new SessionController(api, handleEvent);
    controller.attach(resume).catch(() => {
      location.hash = "";
      toast(`session ${resume} not found; starting fresh`);
    });
  }
}

boot().catch((err) => toast(`cannot reach service at ${base}: ${err}`));
