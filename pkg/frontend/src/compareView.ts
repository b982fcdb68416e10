import { clear, el } from "./dom";
import type { ComparisonJson, EvaluationJson } from "./types";

export interface CompareHandlers {
  onSelect: (id: string) => void;
}

// Side-by-side candidate table in the classic decomposition-metrics layout.
// Pareto badges mirror the /compare response flags exactly; no ordering is
// imposed beyond them; choosing remains the architect's job.
export function renderCompareView(
  host: HTMLElement,
  comparison: ComparisonJson,
  selection: string | null,
  handlers: CompareHandlers,
): void {
  clear(host);
  host.append(el("p", { class: "muted" }, comparison.note));

  const grid = el("div", { class: "compare-grid" });
  for (const candidate of comparison.candidates) {
    grid.append(card(candidate, selection, handlers));
  }
  host.append(grid);
}

function card(candidate: EvaluationJson, selection: string | null, handlers: CompareHandlers): HTMLElement {
  const box = el("div", { class: "compare-card", "data-candidate": candidate.id });
  const head = el("div", { class: "compare-head" }, el("b", {}, candidate.id), el("i", {}, candidate.label));
  if (candidate.pareto_optimal) {
    box.classList.add("pareto");
    head.append(el("span", { class: "pareto-badge", "data-testid": `pareto-${candidate.id}` }, "Pareto"));
  }
  box.append(head);

  const table = el("table", { class: "metrics-table" });
  table.append(
    el(
      "tr",
      {},
      ...["MS", "CBM", "#Links", "#Classes", "#Dupl. Classes", "FEC"].map((h) => el("th", {}, h)),
    ),
  );
  for (const m of candidate.services) {
    table.append(
      el(
        "tr",
        {},
        el("td", {}, m.service),
        el("td", {}, m.cbm ?? "–"),
        el("td", {}, String(m.links)),
        el("td", {}, String(m.cla)),
        el("td", {}, String(m.dup)),
        el("td", {}, m.fec ?? "–"),
      ),
    );
  }
  box.append(table);

  box.append(
    el(
      "p",
      { class: "compare-system" },
      `internal ${candidate.system.internal_calls} / external ${candidate.system.external_calls}` +
        ` / load ${candidate.system.load} / dup ${candidate.system.duplicated_classes_total}`,
    ),
  );

  const select = el("button", { class: "select-button", "data-testid": `select-${candidate.id}` }, "Select");
  select.addEventListener("click", () => handlers.onSelect(candidate.id));
  box.append(select);
  if (selection === candidate.id) {
    box.classList.add("selected");
    box.append(el("span", { class: "selected-mark" }, "selected"));
  }
  return box;
}
