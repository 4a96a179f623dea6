import { radiusChart } from "./chart.js";
import type { ControllerState } from "./controller.js";
import type { Preference, RulePayload } from "./types.js";

export interface Handlers {
  onAnswer(preference: Preference): void;
  onTopK(k: number): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Array<Node | string>
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function ruleHeadline(rule: RulePayload): string {
  return `${rule.antecedent.join(", ")} ⇒ ${rule.consequent.join(", ")}`;
}

function ruleCard(rule: RulePayload, side: string): HTMLElement {
  const rows = Object.entries(rule.measures).map(([kind, value]) =>
    el("tr", {}, el("td", {}, kind), el("td", { class: "num" }, value.toFixed(3))),
  );
  const c = rule.counts;
  return el(
    "article",
    { class: "rule-card", "data-side": side },
    el("h3", {}, ruleHeadline(rule)),
    el(
      "p",
      { class: "counts" },
      `support ${c.n_xy}/${c.n} · antecedent ${c.n_x} · consequent ${c.n_y}`,
    ),
    el("table", { class: "measures" }, ...rows),
  );
}

function querySection(state: ControllerState, handlers: Handlers): HTMLElement {
  const session = state.session;
  const query = session?.query;
  if (!query) {
    return el("section", { class: "query" }, el("p", { class: "muted" }, "selecting the next query…"));
  }
  const button = (label: string, preference: Preference, cls: string) => {
    const b = el("button", { class: cls, type: "button" }, label) as HTMLButtonElement;
    b.disabled = state.busy;
    b.addEventListener("click", () => handlers.onAnswer(preference));
    return b;
  };
  return el(
    "section",
    { class: "query" },
    el(
      "p",
      { class: "meta" },
      `iteration ${query.iteration} · question radius ${query.r_max.toFixed(4)}`,
    ),
    el(
      "div",
      { class: "cards" },
      ruleCard(query.rules[0], "left"),
      ruleCard(query.rules[1], "right"),
    ),
    el(
      "div",
      { class: "answers" },
      button("Left better", 1, "answer left"),
      button("Indifferent", 0, "answer neutral"),
      button("Right better", -1, "answer right"),
    ),
  );
}

function rankingSection(state: ControllerState, handlers: Handlers): HTMLElement {
  const select = el("select", { class: "topk" }) as HTMLSelectElement;
  for (const k of [5, 10, 15]) {
    const option = el("option", { value: String(k) }, `top ${k}`) as HTMLOptionElement;
    option.selected = k === state.topK;
    select.append(option);
  }
  select.addEventListener("change", () => handlers.onTopK(Number(select.value)));
  const rows = state.ranking.map((rule, i) =>
    el(
      "tr",
      {},
      el("td", { class: "num" }, String(i + 1)),
      el("td", {}, ruleHeadline(rule)),
      el("td", { class: "num" }, (rule.score ?? 0).toFixed(4)),
    ),
  );
  return el(
    "section",
    { class: "ranking" },
    el("h2", {}, "Current ranking ", select),
    rows.length
      ? el("table", {}, el("tr", {}, el("th", {}, "#"), el("th", {}, "rule"), el("th", {}, "score")), ...rows)
      : el("p", { class: "muted" }, "no ranking yet"),
  );
}

function chartSection(state: ControllerState): HTMLElement {
  const model = radiusChart(state.stats.map((r) => ({ iteration: r.iteration, r_max: r.r_max })));
  const section = el("section", { class: "chart" }, el("h2", {}, "Question radius per iteration"));
  if (model.points.length === 0) {
    section.append(el("p", { class: "muted" }, "no answers yet"));
    return section;
  }
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${model.width} ${model.height}`);
  svg.setAttribute("width", String(model.width));
  svg.setAttribute("height", String(model.height));
  if (model.points.length > 1) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", model.polyline);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.append(line);
  }
  for (const p of model.points) {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(p.x));
    dot.setAttribute("cy", String(p.y));
    dot.setAttribute("r", "3");
    dot.append(
      Object.assign(document.createElementNS(SVG_NS, "title"), {
        textContent: `iteration ${p.iteration}: ${p.r_max.toFixed(4)}`,
      }),
    );
    svg.append(dot);
  }
  section.append(svg);
  return section;
}

function summarySection(state: ControllerState): HTMLElement {
  const session = state.session;
  if (!session) return el("section");
  if (state.phase === "failed") {
    return el(
      "section",
      { class: "summary failed" },
      el("h2", {}, "Session failed"),
      el("p", {}, session.error ?? "unknown error"),
    );
  }
  const reason: Record<string, string> = {
    resolved: "the ranking is fully determined",
    completed: "question budget spent",
    indifferent_stop: "stopped on an indifferent answer",
    infeasible: "answers became contradictory",
  };
  return el(
    "section",
    { class: "summary" },
    el("h2", {}, "Session finished"),
    el(
      "p",
      {},
      `${session.n_answers} answers · ${reason[session.status ?? ""] ?? session.status ?? "done"}`,
    ),
  );
}

export function render(root: HTMLElement, state: ControllerState, handlers: Handlers): void {
  root.replaceChildren();
  if (state.banner) root.append(el("div", { class: "banner", role: "alert" }, state.banner));
  if (state.phase === "setup") return; // the static config form stays visible
  if (state.phase === "creating") {
    root.append(el("p", { class: "muted" }, "starting session…"));
    return;
  }
  if (state.phase === "active") root.append(querySection(state, handlers));
  else root.append(summarySection(state));
  root.append(rankingSection(state, handlers), chartSection(state));
}
