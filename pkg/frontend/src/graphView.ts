import { clear, el, svgEl } from "./dom";
import type { ClassGraphJson, CycleReportJson, ExternalEdgeJson } from "./types";

export interface GraphViewOptions {
  externalEdges?: ExternalEdgeJson[];
  onNodeClick?: (container: string) => void;
}

// Deterministic circular layout: nodes sorted by name on a ring, members of
// a strongly connected group share a color and a cycle badge, edge stroke
// width encodes call volume as 1 + ln(weight). Edges that are external
// under the active draft's last evaluation are highlighted.
export function renderGraphView(
  host: HTMLElement,
  graph: ClassGraphJson,
  cycles: CycleReportJson,
  options: GraphViewOptions = {},
): void {
  clear(host);
  const names = graph.nodes.map((n) => n.container).sort();
  if (!names.length) {
    host.append(el("p", { class: "muted" }, "no graph loaded"));
    return;
  }

  const groupOf = new Map<string, number>();
  cycles.sccs.forEach((members, index) => {
    for (const member of members) groupOf.set(member, index);
  });
  const selfLoops = new Map(cycles.self_loops.map((s) => [s.container, s.weight]));
  const external = new Set(
    (options.externalEdges ?? []).map((edge) => `${edge.source}→${edge.target}`),
  );

  const radius = Math.max(120, names.length * 22);
  const center = radius + 70;
  const size = center * 2;
  const position = new Map<string, { x: number; y: number }>();
  names.forEach((name, i) => {
    const angle = (2 * Math.PI * i) / names.length - Math.PI / 2;
    position.set(name, {
      x: center + radius * Math.cos(angle),
      y: center + radius * Math.sin(angle),
    });
  });

  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    class: "graph-svg",
    role: "img",
  });

  const sortedEdges = [...graph.edges].sort((a, b) =>
    a.source === b.source ? a.target.localeCompare(b.target) : a.source.localeCompare(b.source),
  );
  for (const edge of sortedEdges) {
    const width = (1 + Math.log(edge.weight)).toFixed(2);
    const isExternal = external.has(`${edge.source}→${edge.target}`);
    const classes = ["edge", isExternal ? "edge-external" : ""].join(" ").trim();
    if (edge.source === edge.target) {
      const p = position.get(edge.source)!;
      const loop = svgEl("circle", {
        cx: String(p.x + 16),
        cy: String(p.y - 16),
        r: "12",
        class: `${classes} edge-self`,
        "stroke-width": width,
        "data-edge": `${edge.source}->${edge.target}`,
      });
      loop.append(svgEl("title", {}, `${edge.source} → ${edge.target} (${edge.weight})`));
      svg.append(loop);
      continue;
    }
    const a = position.get(edge.source)!;
    const b = position.get(edge.target)!;
    const line = svgEl("line", {
      x1: String(a.x),
      y1: String(a.y),
      x2: String(b.x),
      y2: String(b.y),
      class: classes,
      "stroke-width": width,
      "data-edge": `${edge.source}->${edge.target}`,
    });
    line.append(svgEl("title", {}, `${edge.source} → ${edge.target} (${edge.weight})`));
    svg.append(line);
  }

  for (const name of names) {
    const p = position.get(name)!;
    const group = groupOf.get(name);
    const nodeClasses = ["node", group !== undefined ? `scc-group scc-${group % 6}` : ""]
      .join(" ")
      .trim();
    const dot = svgEl("g", { class: nodeClasses, "data-node": name });
    dot.append(
      svgEl("circle", { cx: String(p.x), cy: String(p.y), r: "16" }),
      svgEl("text", { x: String(p.x), y: String(p.y + 4), "text-anchor": "middle" }, name),
    );
    if (selfLoops.has(name)) {
      dot.append(
        svgEl(
          "text",
          { x: String(p.x), y: String(p.y - 22), "text-anchor": "middle", class: "loop-mark" },
          "↺",
        ),
      );
    }
    if (options.onNodeClick) {
      dot.addEventListener("click", () => options.onNodeClick!(name));
    }
    svg.append(dot);
  }

  host.append(svg);

  if (cycles.sccs.length) {
    const list = el("div", { class: "cycle-badges" });
    cycles.sccs.forEach((members, index) => {
      list.append(
        el(
          "span",
          { class: `cycle-badge scc-${index % 6}`, "data-scc": String(index) },
          `cycle: ${members.join(" ⇄ ")}`,
        ),
      );
    });
    for (const suggestion of cycles.suggested_breaks) {
      list.append(
        el(
          "span",
          { class: "break-hint", title: suggestion.rationale },
          `break? ${suggestion.source} → ${suggestion.target} (${suggestion.weight})`,
        ),
      );
    }
    host.append(list);
  }
}
