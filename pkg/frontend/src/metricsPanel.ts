import { clear, el } from "./dom";
import type { EvaluationJson, ServiceMetricsJson } from "./types";

// Every number shown here is copied verbatim from an /evaluate response;
// deltas are rendered as "previous -> current" pairs of API values, never
// computed arithmetic.

function chip(label: string, testId: string, current: string, previous?: string): HTMLElement {
  const changed = previous !== undefined && previous !== current;
  const value = changed ? `${previous} → ${current}` : current;
  return el(
    "span",
    { class: changed ? "chip chip-changed" : "chip", "data-testid": testId },
    el("small", {}, label),
    el("b", {}, value),
  );
}

function metricCell(value: string | null): string {
  return value === null ? "–" : value;
}

export function renderMetricsPanel(
  host: HTMLElement,
  evaluation: EvaluationJson,
  previous: EvaluationJson | null = null,
): void {
  clear(host);

  const sys = evaluation.system;
  const prev = previous?.system;
  host.append(
    el(
      "div",
      { class: "chips" },
      chip("internal", "system-internal", String(sys.internal_calls), prev && String(prev.internal_calls)),
      chip("external", "system-external", String(sys.external_calls), prev && String(prev.external_calls)),
      chip("load", "system-load", String(sys.load), prev && String(prev.load)),
      chip(
        "duplicated classes",
        "system-dup",
        String(sys.duplicated_classes_total),
        prev && String(prev.duplicated_classes_total),
      ),
    ),
  );

  const table = el("table", { class: "metrics-table" });
  table.append(
    el(
      "tr",
      {},
      ...["Service", "CBM", "#Links", "#Classes", "#Dupl. Classes", "FEC", "Ext. calls"].map((h) =>
        el("th", {}, h),
      ),
    ),
  );
  for (const row of evaluation.services) {
    table.append(serviceRow(row, previous?.services.find((p) => p.service === row.service)));
  }
  host.append(table);

  const notes = el("div", { class: "validation" });
  for (const error of evaluation.validation.errors) {
    notes.append(el("p", { class: "validation-error" }, error));
  }
  for (const warning of evaluation.validation.warnings) {
    notes.append(el("p", { class: "validation-warning" }, warning));
  }
  if (evaluation.unassigned_containers.length) {
    notes.append(
      el(
        "p",
        { class: "validation-warning", "data-testid": "unassigned" },
        `unassigned containers: ${evaluation.unassigned_containers.join(", ")}`,
      ),
    );
  }
  host.append(notes);
}

function serviceRow(row: ServiceMetricsJson, prev?: ServiceMetricsJson): HTMLElement {
  const cells: [string, string, string | undefined][] = [
    ["cbm", metricCell(row.cbm), prev && metricCell(prev.cbm)],
    ["links", String(row.links), prev && String(prev.links)],
    ["cla", String(row.cla), prev && String(prev.cla)],
    ["dup", String(row.dup), prev && String(prev.dup)],
    ["fec", metricCell(row.fec), prev && metricCell(prev.fec)],
    ["ext", String(row.external_call_instances), prev && String(prev.external_call_instances)],
  ];
  const tr = el("tr", { "data-service": row.service });
  const name = row.zero_class ? `${row.service} (no classes)` : row.service;
  tr.append(el("td", {}, name));
  for (const [key, current, before] of cells) {
    const changed = before !== undefined && before !== current;
    tr.append(
      el(
        "td",
        {
          class: changed ? "cell-changed" : "",
          "data-testid": `svc-${row.service}-${key}`,
        },
        changed ? `${before} → ${current}` : current,
      ),
    );
  }
  return tr;
}
