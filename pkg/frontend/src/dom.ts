import { histogramSvg, recallChartSvg } from "./chart";
import { defaultsFor, validateSetup, type SetupInput } from "./validate";
import type {
  CandidateRow,
  CreateSessionRequest,
  DatasetInfo,
  HistoryRow,
  Metrics,
} from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, v);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

const FIELDS: Array<{ name: keyof SetupInput & string; label: string }> = [
  { name: "budget", label: "budget" },
  { name: "lambda", label: "lambda (label smoothing)" },
  { name: "w0", label: "w0 (prior smoothing)" },
  { name: "pi", label: "pi (positive prior)" },
  { name: "alpha", label: "alpha (lookahead weight)" },
];

export function renderSetupForm(
  root: HTMLElement,
  datasets: DatasetInfo[],
  onCreate: (req: CreateSessionRequest) => void,
): HTMLFormElement {
  root.replaceChildren();
  const form = el("form", { class: "setup-form", novalidate: "novalidate" });

  const dsField = el("label", { class: "field" }, "dataset ");
  const select = el("select", { name: "dataset" });
  for (const d of datasets) {
    const opt = el("option", { value: d.name });
    opt.textContent = `${d.name} (${d.n} points${d.prevalence != null ? `, ${(d.prevalence * 100).toFixed(1)}% positive` : ""})`;
    select.append(opt);
  }
  dsField.append(select, el("span", { class: "field-error", "data-for": "dataset" }));
  form.append(dsField);

  const engineField = el("fieldset", { class: "engine-toggle" });
  engineField.append(el("legend", {}, "engine"));
  for (const name of ["las", "wnas"] as const) {
    const lab = el("label", {}, ` ${name === "las" ? "propagation + lookahead" : "weighted neighbors"} `);
    const radio = el("input", { type: "radio", name: "engine", value: name });
    if (name === "las") {
      (radio as HTMLInputElement).checked = true;
    }
    lab.prepend(radio);
    engineField.append(lab);
  }
  engineField.append(el("span", { class: "field-error", "data-for": "engine" }));
  form.append(engineField);

  for (const { name, label } of FIELDS) {
    const lab = el("label", { class: "field" }, `${label} `);
    lab.append(
      el("input", { name, type: "text", inputmode: "decimal" }),
      el("span", { class: "field-error", "data-for": name }),
    );
    form.append(lab);
  }
  form.append(el("button", { type: "submit", class: "create-btn" }, "start session"));

  const input = (name: string): HTMLInputElement | HTMLSelectElement =>
    form.querySelector(`[name="${name}"]`) as HTMLInputElement | HTMLSelectElement;

  const prefill = () => {
    const d = datasets.find((x) => x.name === (input("dataset") as HTMLSelectElement).value);
    const defs = defaultsFor(d);
    for (const { name } of FIELDS) {
      (input(name) as HTMLInputElement).value = defs[name];
    }
  };
  prefill();
  select.addEventListener("change", prefill);

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const engine = (form.querySelector('input[name="engine"]:checked') as HTMLInputElement | null)?.value ?? "";
    const raw: SetupInput = {
      dataset: (input("dataset") as HTMLSelectElement).value,
      engine,
      budget: (input("budget") as HTMLInputElement).value,
      lambda: (input("lambda") as HTMLInputElement).value,
      w0: (input("w0") as HTMLInputElement).value,
      pi: (input("pi") as HTMLInputElement).value,
      alpha: (input("alpha") as HTMLInputElement).value,
    };
    const { errors, request } = validateSetup(raw);
    for (const span of form.querySelectorAll<HTMLElement>(".field-error")) {
      const name = span.dataset.for as keyof SetupInput;
      span.textContent = errors[name] ?? "";
    }
    if (request) {
      onCreate(request); // only a fully valid form produces a request
    }
  });

  root.append(form);
  return form;
}

function fmt(v: number | null): string {
  return v == null ? "–" : v.toFixed(4);
}

// wnas has no lookahead term, so its IM cell/column is dropped entirely
export function renderCandidateCard(
  root: HTMLElement,
  row: CandidateRow | null,
  engine: string,
  enabled: boolean,
  onLabel: (y: 0 | 1) => void,
): void {
  root.replaceChildren();
  if (row === null) {
    root.append(el("p", { class: "session-complete" }, "session complete - budget exhausted"));
    return;
  }
  const card = el("div", { class: "candidate-card" });
  card.append(
    el("h3", {}, row.id),
    el("p", { class: "candidate-meta" }, row.meta ?? "(no metadata)"),
  );
  const scores = el("dl", { class: "candidate-scores" });
  scores.append(el("dt", {}, "f"), el("dd", { "data-score": "f" }, fmt(row.f)));
  if (engine !== "wnas") {
    scores.append(el("dt", {}, "im"), el("dd", { "data-score": "im" }, fmt(row.im)));
  }
  scores.append(el("dt", {}, "score"), el("dd", { "data-score": "score" }, fmt(row.score)));
  card.append(scores);

  const controls = el("div", { class: "label-controls" });
  const pos = el("button", { class: "btn-positive", type: "button" }, "positive");
  const neg = el("button", { class: "btn-negative", type: "button" }, "negative");
  pos.disabled = neg.disabled = !enabled;
  pos.addEventListener("click", () => onLabel(1));
  neg.addEventListener("click", () => onLabel(0));
  controls.append(pos, neg);
  card.append(controls);
  root.append(card);
}

export function renderTopK(root: HTMLElement, rows: CandidateRow[], engine: string): void {
  root.replaceChildren();
  const table = el("table", { class: "topk-table" });
  const head = el("tr");
  const cols = engine === "wnas" ? ["#", "id", "f", "score"] : ["#", "id", "f", "im", "score"];
  for (const c of cols) {
    head.append(el("th", {}, c));
  }
  table.append(head);
  rows.forEach((r, i) => {
    const tr = el("tr");
    tr.append(el("td", {}, String(i + 1)), el("td", {}, r.id), el("td", {}, fmt(r.f)));
    if (engine !== "wnas") {
      tr.append(el("td", {}, fmt(r.im)));
    }
    tr.append(el("td", {}, fmt(r.score)));
    table.append(tr);
  });
  root.append(table);
}

export function renderHistory(root: HTMLElement, rows: HistoryRow[]): void {
  root.replaceChildren();
  const list = el("ul", { class: "history-list" });
  for (const r of [...rows].reverse()) {
    list.append(
      el(
        "li",
        { class: r.label === 1 ? "hist-pos" : "hist-neg" },
        `#${r.iteration} ${r.id} -> ${r.label === 1 ? "positive" : "negative"} (f was ${r.f_at_query.toFixed(3)})`,
      ),
    );
  }
  root.append(list);
}

export function renderMetricsPanel(root: HTMLElement, m: Metrics): void {
  root.replaceChildren();
  const found = m.recall.length > 0 ? m.recall[m.recall.length - 1] : 0;
  root.append(el("p", { class: "recall-line" }, `${found} positives in ${m.iteration} of ${m.budget} queries`));
  const charts = el("div", { class: "charts" });
  charts.innerHTML = recallChartSvg(m) + histogramSvg(m.f_summary.histogram);
  root.append(charts);
}

export function toast(message: string, host: HTMLElement = document.body): void {
  const note = el("div", { class: "toast", role: "status" }, message);
  host.append(note);
  setTimeout(() => note.remove(), 4000);
}
