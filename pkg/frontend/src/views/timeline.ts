/** Timeline and map: the spatio-temporal halves of the labeling surface.
 *
 * The timeline puts event types on the y axis and time on x; the map draws
 * the same events positioned on the game map. Both show exactly the events
 * inside the brush window, minus muted units/teams/types; icon colors come
 * from the unit's roster index.
 */

import { unitColor } from "../palette.js";
import type { ViewState } from "../state.js";
import type { EventDoc } from "../types.js";
import { h, type VNode } from "../vdom.js";

const TIMELINE_WIDTH = 900;
const ROW_HEIGHT = 18;

function tooltip(ev: EventDoc): string {
  const payload = Object.entries(ev)
    .filter(([key]) => key.startsWith("payload."))
    .map(([key, value]) => `${key.slice("payload.".length)}=${String(value)}`);
  const lines = [
    `event ${ev.event_id}`,
    `unit ${ev.unit_id}`,
    `type ${ev.event_type}`,
    `t=${String(ev.timestamp_ms)}`,
    ...payload,
  ];
  return lines.join("\n");
}

export function timelineView(state: ViewState, zoom = 1): VNode {
  const session = state.session;
  if (!session || !state.brush) return h("svg", { class: "timeline", width: "0" });
  const { fromMs, toMs } = state.brush;
  const span = Math.max(1, toMs - fromMs);
  const width = TIMELINE_WIDTH * zoom;
  const types = Object.keys(session.summary.by_type).sort();
  const rosterIndex = new Map(session.roster.map((u, i) => [u.id, i]));
  const rowOf = new Map(types.map((t, i) => [t, i]));

  const icons = state.visibleEvents().map((ev) => {
    const x = ((ev.timestamp_ms - fromMs) / span) * width;
    const y = (rowOf.get(ev.event_type) ?? types.length) * ROW_HEIGHT + ROW_HEIGHT / 2;
    const selected = state.selectedEvents.has(ev.event_id);
    return h("circle", {
      class: selected ? "event selected" : "event",
      "data-event-id": ev.event_id,
      cx: x.toFixed(2),
      cy: String(y),
      r: selected ? "6" : "4",
      fill: unitColor(rosterIndex.get(ev.unit_id) ?? 0),
    }, h("title", {}, tooltip(ev)));
  });

  const rows = types.map((t, i) => h("text", {
    class: "type-row-name",
    x: "2",
    y: String(i * ROW_HEIGHT + ROW_HEIGHT - 4),
  }, t));

  return h("svg", {
    class: "timeline",
    width: String(width),
    height: String((types.length + 1) * ROW_HEIGHT),
    "data-from": String(fromMs),
    "data-to": String(toMs),
  }, rows, icons);
}

export function mapView(state: ViewState, zoom = 1): VNode {
  const session = state.session;
  if (!session) return h("svg", { class: "map", width: "0" });
  const [minX, minY, maxX, maxY] = session.map_bounds;
  const rosterIndex = new Map(session.roster.map((u, i) => [u.id, i]));
  const icons = state.visibleEvents()
    .filter((ev) => ev.x !== undefined && ev.y !== undefined)
    .map((ev) => h("circle", {
      class: "event",
      "data-event-id": ev.event_id,
      cx: String(ev.x),
      cy: String(ev.y),
      r: String(2 / zoom),
      fill: unitColor(rosterIndex.get(ev.unit_id) ?? 0),
    }, h("title", {}, tooltip(ev))));
  return h("svg", {
    class: "map",
    viewBox: `${minX} ${minY} ${(maxX - minX) / zoom} ${(maxY - minY) / zoom}`,
  }, icons);
}

/** Unit / team / type mute toggles shown next to the map. */
export function musterView(state: ViewState): VNode {
  const session = state.session;
  if (!session) return h("div", { class: "muster" });
  const teams = [...new Set(session.roster
    .filter((u) => u.team_id !== null)
    .map((u) => u.team_id as string))].sort();
  return h("div", { class: "muster" },
    h("ul", { class: "teams" }, teams.map((t) => h("li", {
      class: state.mutedTeams.has(t) ? "muted" : "",
      "data-team-id": t,
    }, t))),
    h("ul", { class: "units" }, session.roster.map((u, i) => h("li", {
      class: state.mutedUnits.has(u.id) ? "muted" : "",
      "data-unit-id": u.id,
      style: `color: ${unitColor(i)}`,
    }, u.display_name || u.id))),
    h("ul", { class: "types" },
      Object.keys(session.summary.by_type).sort().map((t) => h("li", {
        class: state.mutedTypes.has(t) ? "muted" : "",
        "data-type": t,
      }, t))));
}
