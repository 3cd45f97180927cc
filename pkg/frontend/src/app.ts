/** Browser bootstrap: wires the API client, view state, and renderers into
 * the page. All analytics arrive from the service; label edits poll the
 * per-session revision counter so collaborators' changes show up without a
 * reload. */

import { ApiClient, ApiError, LatestOnly } from "./api.js";
import { Playback } from "./playback.js";
import { ViewState } from "./state.js";
import type { ScatterDoc, SequencesResponse, StateGraphDoc } from "./types.js";
import { findAll, h, toDom, type VNode } from "./vdom.js";
import { sequenceStrip, roundSelector, scatterView, stateGraphView } from "./views/analysis.js";
import { irrPanel } from "./views/irr.js";
import { labelEditor, labelList } from "./views/labels.js";
import { mapView, musterView, timelineView } from "./views/timeline.js";

interface AnalysisParams {
  rater: string;
  metric: "jaccard" | "discrete";
  k: number;
  seed: number;
}

export class WorkbenchApp {
  readonly state = new ViewState();
  params: AnalysisParams = { rater: "", metric: "jaccard", k: 2, seed: 0 };
  conflict: string | null = null;
  author = "";
  authorFilter: string | null = null;
  playback: Playback | null = null;
  timelineZoom = 1;
  mapZoom = 1;

  private stateGraphDoc: StateGraphDoc | null = null;
  private sequenceDoc: ScatterDoc | null = null;
  private groupDoc: ScatterDoc | null = null;
  private sequencesDoc: SequencesResponse | null = null;
  private highlightedStates = new Set<string>();
  private refreshGate = new LatestOnly();
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private playbackTimer: ReturnType<typeof setInterval> | null = null;

  constructor(private api: ApiClient, private root: HTMLElement) {}

  async start(): Promise<void> {
    const { sessions } = await this.api.sessions();
    if (sessions.length === 0) {
      this.root.textContent = "no sessions in the workspace";
      return;
    }
    await this.openSession(sessions[0].session_id);
    this.pollTimer = setInterval(() => void this.pollRevision(), 2000);
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.stopPlayback();
  }

  /** Animate the brush window's right edge from its start to its end. */
  startPlayback(): void {
    const brush = this.state.brush;
    if (!brush || !this.playback || this.playbackTimer !== null) return;
    this.playback.setWindow(brush.fromMs, brush.toMs);
    this.playback.start();
    this.playbackTimer = setInterval(() => {
      const playback = this.playback!;
      playback.tick(100);
      const window = playback.window();
      this.state.setBrush(window.fromMs, Math.max(window.toMs, window.fromMs + 1));
      if (!playback.playing) this.stopPlayback();
      this.render();
    }, 100);
  }

  stopPlayback(): void {
    if (this.playbackTimer !== null) {
      clearInterval(this.playbackTimer);
      this.playbackTimer = null;
    }
    this.playback?.pause();
  }

  zoom(view: "timeline" | "map", factor: number): void {
    if (view === "timeline") {
      this.timelineZoom = Math.min(Math.max(this.timelineZoom * factor, 0.25), 16);
    } else {
      this.mapZoom = Math.min(Math.max(this.mapZoom * factor, 0.25), 16);
    }
    this.render();
  }

  async openSession(sessionId: string): Promise<void> {
    const session = await this.api.session(sessionId);
    const [{ events }, { labels }, { revision }] = await Promise.all([
      this.api.events(sessionId),
      this.api.labels(sessionId),
      this.api.revision(sessionId),
    ]);
    this.state.loadSession(session, events, labels);
    this.state.lastSeenRevision = revision;
    this.playback = new Playback(0, session.duration_ms);
    const raters = [...new Set(labels.map((l) => l.author))].sort();
    this.params.rater = raters[0] ?? "";
    await this.refreshAnalysis();
    this.render();
  }

  private async pollRevision(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const { revision } = await this.api.revision(session.session_id);
    if (revision !== this.state.lastSeenRevision) {
      this.state.lastSeenRevision = revision;
      const { labels } = await this.api.labels(session.session_id);
      this.state.labels = labels;
      this.ensureRater();
      await this.refreshAnalysis();
      this.render();
    }
  }

  /** Pick a default rater for the analysis views once labels exist. */
  private ensureRater(): void {
    if (!this.params.rater) {
      const authors = [...new Set(this.state.labels.map((l) => l.author))].sort();
      this.params.rater = authors[0] ?? "";
    }
  }

  /** Re-fetch the three analysis views; stale responses are discarded. */
  async refreshAnalysis(): Promise<void> {
    const session = this.state.session;
    if (!session || !this.params.rater) return;
    const result = await this.refreshGate.run(async () => {
      const sessionId = session.session_id;
      const round = this.state.activeRound ?? undefined;
      const stateGraph = await this.api.stateGraph(sessionId, this.params.rater,
                                                   "player", round);
      let sequenceGraph: ScatterDoc | null = null;
      let groupGraph: ScatterDoc | null = null;
      let sequences: SequencesResponse | null = null;
      try {
        sequenceGraph = await this.api.sequenceGraph(sessionId, this.params);
        groupGraph = await this.api.groupGraph(sessionId, this.params);
      } catch (err) {
        if (!(err instanceof ApiError && err.code === "degenerate_input")) throw err;
      }
      sequences = await this.api.sequences(sessionId, this.params.rater, "player",
                                           round);
      return { stateGraph, sequenceGraph, groupGraph, sequences };
    });
    if (result === null) return; // a newer refresh superseded this one
    this.stateGraphDoc = result.stateGraph;
    this.sequenceDoc = result.sequenceGraph;
    this.groupDoc = result.groupGraph;
    this.sequencesDoc = result.sequences;
  }

  async submitStagedLabel(name: string, author: string): Promise<void> {
    const session = this.state.session;
    const staged = this.state.staged;
    if (!session || !staged || !this.state.canSubmit()) return;
    this.conflict = null;
    await this.api.createLabel(session.session_id, {
      name,
      start_ms: staged.startMs,
      end_ms: staged.endMs,
      unit_ids: [...staged.unitIds].sort(),
      event_ids: [...staged.eventIds].sort(),
      author,
    });
    const { labels } = await this.api.labels(session.session_id);
    this.state.labels = labels;
    this.ensureRater();
    const { revision } = await this.api.revision(session.session_id);
    this.state.lastSeenRevision = revision;
    this.state.clearStaged();
    await this.refreshAnalysis();
    this.render();
  }

  async deleteLabel(labelId: string, revision: number): Promise<void> {
    try {
      await this.api.deleteLabel(labelId, revision);
    } catch (err) {
      if (err instanceof ApiError && err.code === "conflict") {
        this.conflict = err.message;
        this.render();
        return;
      }
      throw err;
    }
    await this.pollRevision();
  }

  async selectGroupNode(teamId: string): Promise<void> {
    // Selecting a team highlights its members in the sequence graph and
    // their trajectories in the state graph.
    const session = this.state.session;
    if (!session) return;
    this.state.selectedGroup = teamId;
    const members = session.roster
      .filter((u) => u.is_player && u.team_id === teamId)
      .map((u) => u.id);
    this.state.selectedSequenceOwners = new Set(members);
    const byOwner = new Map(
      (this.sequencesDoc?.sequences ?? []).map((s) => [s.owner.id, s]));
    this.highlightedStates = new Set(
      members.flatMap((m) => byOwner.get(m)?.elements.map((el) => el.state) ?? []));
    this.render();
  }

  selectedStrips(): VNode[] {
    const docs = this.sequencesDoc?.sequences ?? [];
    const wanted = this.state.selectedSequenceOwners;
    return docs.filter((s) => wanted.size === 0 || wanted.has(s.owner.id))
      .map((s) => sequenceStrip(s));
  }

  view(): VNode {
    const session = this.state.session;
    if (!session) return h("div", { class: "workbench empty" }, "loading…");
    const playing = this.playbackTimer !== null;
    const raters = [...new Set(this.state.labels.map((l) => l.author))].sort();
    return h("div", { class: "workbench" },
      h("header", {},
        h("h1", {}, `${session.game_title} — ${session.session_id}`),
        roundSelector(session.round_marks, this.state.activeRound),
        h("span", { class: "analysis-params" },
          h("select", { class: "rater-picker" }, raters.map((r) => h("option", {
            value: r, ...(r === this.params.rater ? { selected: "selected" } : {}),
          }, r))),
          h("select", { class: "metric-picker" },
            ["jaccard", "discrete"].map((m) => h("option", {
              value: m, ...(m === this.params.metric ? { selected: "selected" } : {}),
            }, m))),
          h("input", { class: "k-input", type: "number", min: "1",
                       value: String(this.params.k) }),
          h("input", { class: "seed-input", type: "number",
                       value: String(this.params.seed) })),
        h("span", { class: "controls" },
          h("button", { class: "playback-toggle" }, playing ? "pause" : "play"),
          h("button", { class: "playback-speed" },
            `${String(this.playback?.speed ?? 1)}×`),
          h("button", { class: "zoom-timeline-in" }, "timeline +"),
          h("button", { class: "zoom-timeline-out" }, "timeline −"),
          h("button", { class: "zoom-map-in" }, "map +"),
          h("button", { class: "zoom-map-out" }, "map −"))),
      h("main", {},
        h("section", { class: "spatial" }, musterView(this.state),
          mapView(this.state, this.mapZoom),
          timelineView(this.state, this.timelineZoom)),
        h("section", { class: "labeling" },
          labelEditor(this.state, this.conflict, this.author),
          labelList(this.state.labels, this.authorFilter,
                    this.state.selectedLabelId)),
        h("section", { class: "analysis" },
          this.stateGraphDoc
            ? stateGraphView(this.stateGraphDoc, this.highlightedStates)
            : h("div", {}, "state graph unavailable"),
          this.sequenceDoc
            ? scatterView(this.sequenceDoc, "sequence",
                          this.state.selectedSequenceOwners)
            : h("div", {}, "need two labeled players for the sequence graph"),
          this.groupDoc
            ? scatterView(this.groupDoc, "group",
                          new Set(this.state.selectedGroup ? [this.state.selectedGroup] : []))
            : h("div", {}, "need two labeled teams for the group graph"),
          h("div", { class: "strips" }, this.selectedStrips()))));
  }

  render(): void {
    const tree = this.view();
    this.attachHandlers(tree);
    this.root.replaceChildren(toDom(tree, this.root.ownerDocument));
  }

  private refetchAndRender(): void {
    void this.refreshAnalysis().then(() => this.render());
  }

  private readInput(selector: string): string {
    const el = this.root.querySelector(selector);
    return el ? (el as HTMLInputElement | HTMLSelectElement).value : "";
  }

  private attachHandlers(tree: VNode): void {
    const byClass = (cls: string) => findAll(tree, (n) => n.attrs.class === cls);
    for (const node of byClass("round-selector")) {
      node.on = { change: (ev) => {
        const value = (ev as Event & { target: HTMLSelectElement }).target.value;
        this.state.activeRound = value === "" ? null : Number(value);
        this.refetchAndRender();
      } };
    }
    for (const node of byClass("rater-picker")) {
      node.on = { change: (ev) => {
        this.params.rater = (ev as Event & { target: HTMLSelectElement }).target.value;
        this.refetchAndRender();
      } };
    }
    for (const node of byClass("metric-picker")) {
      node.on = { change: (ev) => {
        this.params.metric = (ev as Event & { target: HTMLSelectElement })
          .target.value as AnalysisParams["metric"];
        this.refetchAndRender();
      } };
    }
    for (const node of byClass("k-input")) {
      node.on = { change: (ev) => {
        this.params.k = Number((ev as Event & { target: HTMLInputElement }).target.value) || 1;
        this.refetchAndRender();
      } };
    }
    for (const node of byClass("seed-input")) {
      node.on = { change: (ev) => {
        this.params.seed = Number((ev as Event & { target: HTMLInputElement }).target.value) || 0;
        this.refetchAndRender();
      } };
    }
    for (const node of byClass("author-filter")) {
      node.on = { change: (ev) => {
        const value = (ev as Event & { target: HTMLSelectElement }).target.value;
        this.authorFilter = value === "" ? null : value;
        this.render();
      } };
    }
    for (const node of byClass("submit")) {
      if (node.attrs.disabled) continue;
      node.on = { click: () => {
        const name = this.readInput(".name-picker");
        const author = this.readInput(".author-input") || "anonymous";
        if (name) void this.submitStagedLabel(name, author);
      } };
    }
    for (const node of byClass("playback-toggle")) {
      node.on = { click: () => (this.playbackTimer ? this.stopPlayback()
                                                   : this.startPlayback()) };
    }
    for (const node of byClass("playback-speed")) {
      node.on = { click: () => { this.playback?.cycleSpeed(); this.render(); } };
    }
    for (const node of byClass("zoom-timeline-in")) {
      node.on = { click: () => this.zoom("timeline", 1.5) };
    }
    for (const node of byClass("zoom-timeline-out")) {
      node.on = { click: () => this.zoom("timeline", 1 / 1.5) };
    }
    for (const node of byClass("zoom-map-in")) {
      node.on = { click: () => this.zoom("map", 1.5) };
    }
    for (const node of byClass("zoom-map-out")) {
      node.on = { click: () => this.zoom("map", 1 / 1.5) };
    }
    for (const node of findAll(tree, (n) => n.attrs["data-owner-id"] !== undefined
                                         && n.tag === "g")) {
      const ownerId = node.attrs["data-owner-id"];
      node.on = {
        click: () => {
          if (this.groupDoc?.nodes.some((g) => g.owner.id === ownerId)) {
            void this.selectGroupNode(ownerId);
          } else {
            this.state.selectedSequenceOwners = new Set([ownerId]);
            this.render();
          }
        },
      };
    }
    for (const node of byClass("author-input")) {
      node.on = { input: (ev) => {
        this.author = (ev as Event & { target: HTMLInputElement }).target.value;
      } };
    }
    for (const node of byClass("label-delete")) {
      const labelId = node.attrs["data-label-id"];
      const revision = Number(node.attrs["data-revision"]);
      node.on = { click: (ev) => {
        (ev as Event).stopPropagation?.();
        void this.deleteLabel(labelId, revision);
      } };
    }
    for (const node of findAll(tree, (n) => n.tag === "li"
                                         && n.attrs["data-label-id"] !== undefined)) {
      const labelId = node.attrs["data-label-id"];
      node.on = {
        click: () => {
          const label = this.state.labels.find((l) => l.label_id === labelId);
          if (label) {
            this.state.selectLabel(label);
            this.render();
          }
        },
      };
    }
    for (const node of findAll(tree, (n) => n.attrs["data-event-id"] !== undefined)) {
      const eventId = node.attrs["data-event-id"];
      node.on = {
        click: () => {
          this.state.toggleEventSelection(eventId);
          this.state.stageSelection();
          this.render();
        },
      };
    }
  }
}

export async function boot(baseUrl: string, rootId = "app"): Promise<WorkbenchApp> {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`missing #${rootId} mount point`);
  const app = new WorkbenchApp(new ApiClient(baseUrl), root);
  await app.start();
  return app;
}
