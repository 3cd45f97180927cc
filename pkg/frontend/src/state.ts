/** Client-side view state: brush window, muting, staged selection,
 * selections in the linked views, and the last store revision seen.
 *
 * Pure bookkeeping only. Anything analytic (sequences, distances, layouts,
 * agreement) is fetched from the API; this module never derives numbers.
 */

import type { EventDoc, LabelDoc, SessionDetail } from "./types.js";

export interface BrushWindow {
  fromMs: number;
  toMs: number;
}

export interface StagedSelection {
  startMs: number;
  endMs: number;
  unitIds: Set<string>;
  eventIds: Set<string>;
}

export class ViewState {
  session: SessionDetail | null = null;
  events: EventDoc[] = [];
  labels: LabelDoc[] = [];
  brush: BrushWindow | null = null;
  mutedUnits = new Set<string>();
  mutedTeams = new Set<string>();
  mutedTypes = new Set<string>();
  selectedEvents = new Set<string>();
  staged: StagedSelection | null = null;
  selectedLabelId: string | null = null;
  selectedSequenceOwners = new Set<string>();
  selectedGroup: string | null = null;
  activeRound: number | null = null;
  lastSeenRevision = 0;

  loadSession(session: SessionDetail, events: EventDoc[], labels: LabelDoc[]): void {
    this.session = session;
    this.events = events;
    this.labels = labels;
    this.brush = { fromMs: 0, toMs: session.duration_ms };
    this.mutedUnits.clear();
    this.mutedTeams.clear();
    this.mutedTypes.clear();
    this.selectedEvents.clear();
    this.staged = null;
    this.selectedLabelId = null;
  }

  setBrush(fromMs: number, toMs: number): void {
    if (!this.session) return;
    const lo = Math.max(0, Math.min(fromMs, toMs));
    const hi = Math.min(this.session.duration_ms, Math.max(fromMs, toMs));
    this.brush = { fromMs: lo, toMs: hi };
  }

  toggleMute(kind: "unit" | "team" | "type", id: string): void {
    const target = kind === "unit" ? this.mutedUnits
      : kind === "team" ? this.mutedTeams : this.mutedTypes;
    if (target.has(id)) target.delete(id);
    else target.add(id);
  }

  private unitMuted(unitId: string): boolean {
    if (this.mutedUnits.has(unitId)) return true;
    const unit = this.session?.roster.find((u) => u.id === unitId);
    return unit?.team_id != null && this.mutedTeams.has(unit.team_id);
  }

  /** Events the map and timeline show: inside the brush, not muted. */
  visibleEvents(): EventDoc[] {
    const brush = this.brush;
    return this.events.filter((ev) => {
      if (brush && (ev.timestamp_ms < brush.fromMs || ev.timestamp_ms > brush.toMs)) {
        return false;
      }
      return !this.unitMuted(ev.unit_id) && !this.mutedTypes.has(ev.event_type);
    });
  }

  toggleEventSelection(eventId: string): void {
    if (this.selectedEvents.has(eventId)) this.selectedEvents.delete(eventId);
    else this.selectedEvents.add(eventId);
  }

  /** Stage the current brush + selected events as a label-to-be. Unit set
   * defaults to the selected events' units. */
  stageSelection(unitIds?: Iterable<string>): StagedSelection | null {
    if (!this.brush || !this.session) return null;
    const events = this.events.filter((ev) => this.selectedEvents.has(ev.event_id));
    const units = new Set<string>(unitIds ?? events.map((ev) => ev.unit_id));
    this.staged = {
      startMs: this.brush.fromMs,
      endMs: this.brush.toMs,
      unitIds: units,
      eventIds: new Set(events.map((ev) => ev.event_id)),
    };
    return this.staged;
  }

  /** Containment problems that must be empty before submit is enabled. */
  stagingProblems(staged: StagedSelection | null = this.staged): string[] {
    if (!this.session) return ["no session loaded"];
    if (!staged) return ["nothing staged"];
    const problems: string[] = [];
    if (staged.unitIds.size === 0) problems.push("select at least one unit");
    if (!(staged.startMs < staged.endMs)) problems.push("time window is empty");
    if (staged.startMs < 0 || staged.endMs > this.session.duration_ms) {
      problems.push("window outside session");
    }
    const byId = new Map(this.events.map((ev) => [ev.event_id, ev]));
    for (const eventId of staged.eventIds) {
      const ev = byId.get(eventId);
      if (!ev) {
        problems.push(`unknown event ${eventId}`);
        continue;
      }
      if (ev.timestamp_ms < staged.startMs || ev.timestamp_ms > staged.endMs) {
        problems.push(`event ${eventId} outside window`);
      }
      if (!staged.unitIds.has(ev.unit_id)) {
        problems.push(`event ${eventId} belongs to unselected unit ${ev.unit_id}`);
      }
    }
    return problems;
  }

  canSubmit(): boolean {
    return this.staged !== null && this.stagingProblems().length === 0;
  }

  /** Clicking a stored label re-selects its window, units, and events. */
  selectLabel(label: LabelDoc): void {
    this.selectedLabelId = label.label_id;
    this.setBrush(label.start_ms, label.end_ms);
    this.selectedEvents = new Set(label.event_ids);
    this.staged = {
      startMs: label.start_ms,
      endMs: label.end_ms,
      unitIds: new Set(label.unit_ids),
      eventIds: new Set(label.event_ids),
    };
  }

  clearStaged(): void {
    this.staged = null;
    this.selectedLabelId = null;
    this.selectedEvents.clear();
  }
}
