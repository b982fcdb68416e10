import { ApiError, api } from "./api";
import { Banner } from "./banner";
import { renderCompareView } from "./compareView";
import { clear, el } from "./dom";
import { renderGraphView } from "./graphView";
import { renderLanes } from "./lanes";
import { renderMetricsPanel } from "./metricsPanel";
import type {
  CandidateJson,
  ClassGraphJson,
  ComparisonJson,
  CycleReportJson,
  DraftJson,
  EvaluationJson,
  PathsJson,
  PatchOp,
  SelectionJson,
} from "./types";

interface Refs {
  banner: Banner;
  graph: HTMLElement;
  nodeInfo: HTMLElement;
  paths: HTMLElement;
  draftBar: HTMLElement;
  violations: HTMLElement;
  lanes: HTMLElement;
  metrics: HTMLElement;
  compare: HTMLElement;
  selectionLine: HTMLElement;
}

export class App {
  graph: ClassGraphJson = { nodes: [], edges: [] };
  cycles: CycleReportJson = { sccs: [], self_loops: [], cycles: [], truncated: false, suggested_breaks: [] };
  paths: PathsJson = { total: 0, rows: [] };
  candidates: CandidateJson[] = [];
  drafts: DraftJson[] = [];
  selection: string | null = null;

  activeDraft: DraftJson | null = null;
  lastEvaluation: EvaluationJson | null = null;
  previousEvaluation: EvaluationJson | null = null;
  comparison: ComparisonJson | null = null;

  private refs!: Refs;
  private evaluateToken = 0;

  async boot(root: HTMLElement): Promise<void> {
    clear(root);
    const bannerHost = el("div", { class: "banner-host" });
    const graphHost = el("div", { class: "graph-host", "data-testid": "graph" });
    const nodeInfo = el("div", { class: "node-info" });
    const pathsHost = el("div", { class: "paths" });
    const draftBar = el("div", { class: "draft-bar" });
    const violations = el("div", { class: "violations", "data-testid": "violations" });
    const lanesHost = el("div", { class: "lanes-host" });
    const metricsHost = el("div", { class: "metrics-host", "data-testid": "metrics" });
    const compareHost = el("div", { class: "compare-host", "data-testid": "compare" });
    const selectionLine = el("p", { class: "selection-line", "data-testid": "selection" });

    root.append(
      el("header", {}, el("h1", {}, "monoslicer workbench"), selectionLine),
      bannerHost,
      el(
        "main",
        {},
        el(
          "section",
          { class: "left" },
          el("h2", {}, "Mined call graph"),
          graphHost,
          nodeInfo,
          el("h2", {}, "Execution paths"),
          pathsHost,
        ),
        el(
          "section",
          { class: "right" },
          el("h2", {}, "Decomposition drafts"),
          draftBar,
          violations,
          lanesHost,
          el("h2", {}, "Metrics"),
          metricsHost,
          el("h2", {}, "Compare options"),
          compareHost,
        ),
      ),
    );

    this.refs = {
      banner: new Banner(bannerHost),
      graph: graphHost,
      nodeInfo,
      paths: pathsHost,
      draftBar,
      violations,
      lanes: lanesHost,
      metrics: metricsHost,
      compare: compareHost,
      selectionLine,
    };
    await this.loadAnalysis();
  }

  async loadAnalysis(): Promise<void> {
    try {
      const [graph, cycles, paths, candidates, drafts, selection] = await Promise.all([
        api.graph(),
        api.cycles(),
        api.paths(25),
        api.candidates(),
        api.drafts(),
        api.selection(),
      ]);
      this.graph = graph;
      this.cycles = cycles;
      this.paths = paths;
      this.candidates = candidates.candidates;
      this.drafts = drafts.drafts;
      this.applySelection(selection);
    } catch (err) {
      this.refs.banner.show(this.describe(err), () => void this.loadAnalysis());
      return;
    }
    this.renderGraph();
    this.renderPaths();
    this.renderDraftBar();
    void this.refreshComparison();
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) {
      const extra = err.violations.length ? ` (${err.violations.join("; ")})` : "";
      return `${err.message}${extra}`;
    }
    return String(err);
  }

  private applySelection(selection: SelectionJson): void {
    this.selection = selection.id;
    this.refs.selectionLine.textContent = this.selection
      ? `selected option: ${this.selection}`
      : "no option selected yet";
  }

  renderGraph(): void {
    renderGraphView(this.refs.graph, this.graph, this.cycles, {
      externalEdges: this.lastEvaluation?.external_edges ?? [],
      onNodeClick: (container) => this.showNodeInfo(container),
    });
  }

  showNodeInfo(container: string): void {
    const host = this.refs.nodeInfo;
    clear(host);
    host.append(el("h3", {}, container));
    const incident = this.graph.edges.filter(
      (e) => e.source === container || e.target === container,
    );
    const edges = el("ul", { class: "edge-list" });
    for (const e of incident) {
      edges.append(el("li", {}, `${e.source} → ${e.target}: ${e.weight} calls`));
    }
    host.append(el("h4", {}, "traffic"), edges);
    const involved = this.paths.rows.filter((row) =>
      row.signature.some((n) => n.container === container),
    );
    const list = el("ul", { class: "path-list" });
    for (const row of involved) {
      list.append(el("li", {}, `${row.frequency} × ${row.path.join(" → ")}`));
    }
    host.append(el("h4", {}, "paths through it"), list);
  }

  renderPaths(): void {
    const host = this.refs.paths;
    clear(host);
    const list = el("ol", { class: "path-list" });
    for (const row of this.paths.rows) {
      list.append(el("li", {}, `${row.frequency} × ${row.path.join(" → ")}`));
    }
    host.append(list);
    if (this.paths.total > this.paths.rows.length) {
      host.append(el("p", { class: "muted" }, `showing ${this.paths.rows.length} of ${this.paths.total} paths`));
    }
  }

  renderDraftBar(): void {
    const host = this.refs.draftBar;
    clear(host);
    for (const draft of this.drafts) {
      const button = el(
        "button",
        { class: this.activeDraft?.id === draft.id ? "draft-pick active" : "draft-pick" },
        `${draft.id} (${draft.label})`,
      );
      button.addEventListener("click", () => void this.openDraft(draft.id));
      host.append(button);
    }
    for (const candidate of this.candidates) {
      const button = el("button", { class: "draft-new", "data-from": candidate.id }, `+ from ${candidate.id}`);
      button.addEventListener("click", () => void this.newDraftFrom(candidate.id));
      host.append(button);
    }
    const blank = el("button", { class: "draft-new", "data-from": "" }, "+ empty draft");
    blank.addEventListener("click", () => void this.newDraftFrom(null));
    host.append(blank);
  }

  async newDraftFrom(candidateId: string | null): Promise<void> {
    try {
      const draft = candidateId
        ? await api.createDraft({ from_candidate: candidateId })
        : await api.createDraft({ label: "scratch", services: {} });
      this.drafts = [...this.drafts.filter((d) => d.id !== draft.id), draft];
      await this.activateDraft(draft);
    } catch (err) {
      this.refs.banner.show(this.describe(err));
    }
  }

  async openDraft(id: string): Promise<void> {
    try {
      await this.activateDraft(await api.draft(id));
    } catch (err) {
      this.refs.banner.show(this.describe(err));
    }
  }

  private async activateDraft(draft: DraftJson): Promise<void> {
    this.activeDraft = draft;
    this.lastEvaluation = null;
    this.previousEvaluation = null;
    this.renderDraftBar();
    this.renderLanes();
    this.queueEvaluate();
  }

  renderLanes(): void {
    if (!this.activeDraft) return;
    const containers = this.graph.nodes.map((n) => n.container);
    renderLanes(this.refs.lanes, this.activeDraft, containers, {
      onOps: (ops) => void this.applyOps(ops),
    });
  }

  async applyOps(ops: PatchOp[]): Promise<void> {
    if (!this.activeDraft) return;
    const snapshot = this.activeDraft;
    // optimistic: show the edit immediately, roll back if the server refuses
    this.activeDraft = applyOpsLocally(snapshot, ops);
    this.renderLanes();
    clear(this.refs.violations);
    try {
      this.activeDraft = await api.patchDraft(snapshot.id, ops, snapshot.version);
      this.drafts = this.drafts.map((d) => (d.id === snapshot.id ? this.activeDraft! : d));
      this.renderLanes();
      this.queueEvaluate();
    } catch (err) {
      this.activeDraft = snapshot;
      this.renderLanes();
      if (err instanceof ApiError && err.status === 409) {
        this.refs.banner.show("Draft changed elsewhere; reload it to continue.", () =>
          void this.reloadActiveDraft(),
        );
      } else if (err instanceof ApiError && err.status === 422) {
        for (const violation of err.violations.length ? err.violations : [err.message]) {
          this.refs.violations.append(el("p", { class: "validation-error" }, violation));
        }
      } else {
        this.refs.banner.show(this.describe(err));
      }
    }
  }

  async reloadActiveDraft(): Promise<void> {
    if (!this.activeDraft) return;
    try {
      await this.activateDraft(await api.draft(this.activeDraft.id));
    } catch (err) {
      this.refs.banner.show(this.describe(err));
    }
  }

  // One in-flight evaluation per draft; stale responses are dropped
  // (latest-wins), so the metrics shown always match the draft displayed.
  queueEvaluate(): void {
    if (!this.activeDraft) return;
    const token = ++this.evaluateToken;
    const draftId = this.activeDraft.id;
    api
      .evaluate(draftId)
      .then((evaluation) => {
        if (token !== this.evaluateToken || this.activeDraft?.id !== draftId) return;
        this.previousEvaluation = this.lastEvaluation;
        this.lastEvaluation = evaluation;
        renderMetricsPanel(this.refs.metrics, evaluation, this.previousEvaluation);
        this.renderGraph();
      })
      .catch((err) => {
        if (token !== this.evaluateToken) return;
        if (err instanceof ApiError && err.status === 422) {
          clear(this.refs.metrics);
          this.refs.metrics.append(
            el("p", { class: "validation-error" }, this.describe(err)),
          );
        } else {
          this.refs.banner.show(this.describe(err), () => this.queueEvaluate());
        }
      });
  }

  async refreshComparison(): Promise<void> {
    try {
      this.comparison = await api.compare();
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        clear(this.refs.compare);
        this.refs.compare.append(el("p", { class: "muted" }, "nothing to compare yet"));
        return;
      }
      this.refs.banner.show(this.describe(err), () => void this.refreshComparison());
      return;
    }
    this.renderComparison();
  }

  renderComparison(): void {
    if (!this.comparison) return;
    renderCompareView(this.refs.compare, this.comparison, this.selection, {
      onSelect: (id) => void this.select(id),
    });
  }

  async select(id: string): Promise<void> {
    try {
      await api.select(id);
      this.applySelection({ id });
      this.renderComparison();
    } catch (err) {
      this.refs.banner.show(this.describe(err));
    }
  }
}

export function applyOpsLocally(draft: DraftJson, ops: PatchOp[]): DraftJson {
  const services: Record<string, string[]> = {};
  for (const [name, members] of Object.entries(draft.services)) {
    services[name] = [...members];
  }
  const add = (service: string, container: string) => {
    const members = (services[service] ??= []);
    if (!members.includes(container)) members.push(container);
  };
  for (const op of ops) {
    if (op.op === "assign") {
      add(op.service, op.container);
    } else if (op.op === "unassign") {
      const targets = op.service ? [op.service] : Object.keys(services);
      for (const service of targets) {
        services[service] = (services[service] ?? []).filter((c) => c !== op.container);
      }
    } else if (op.op === "duplicate") {
      for (const service of op.services) add(service, op.container);
    } else if (op.op === "rename_service") {
      const members = services[op.from] ?? [];
      delete services[op.from];
      for (const c of members) add(op.to, c);
    } else {
      for (const source of op.services) {
        for (const c of services[source] ?? []) add(op.into, c);
        delete services[source];
      }
    }
  }
  return { ...draft, services };
}
