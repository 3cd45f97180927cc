/** The three linked analysis views plus the complete-sequence strip.
 *
 * Thin-client rule: every number these views DISPLAY is a value taken
 * verbatim from an API response document (visits, traversal counts, repeat
 * counts, coordinates, kappa...). Scaling for layout happens only in
 * geometry attributes, never in text.
 */

import { clusterColor } from "../palette.js";
import type { ScatterDoc, SequenceDoc, StateGraphDoc } from "../types.js";
import { h, type VNode } from "../vdom.js";

const GRAPH_SIZE = 420;

/** State graph: nodes on a circle, radius scaled by visits, directed edges
 * with width scaled by traversal count. Counts render as text verbatim. */
export function stateGraphView(doc: StateGraphDoc,
                               highlighted: Set<string> = new Set()): VNode {
  const n = doc.nodes.length;
  if (n === 0) return h("svg", { class: "state-graph", width: String(GRAPH_SIZE) });
  const center = GRAPH_SIZE / 2;
  const ring = GRAPH_SIZE * 0.38;
  const pos = new Map(doc.nodes.map((node, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    return [node.state,
            { x: center + ring * Math.cos(angle), y: center + ring * Math.sin(angle) }];
  }));
  const maxVisits = Math.max(...doc.nodes.map((node) => node.visits), 1);
  const maxCount = Math.max(...doc.edges.map((edge) => edge.count), 1);

  const edges = doc.edges.map((edge) => {
    const a = pos.get(edge.from)!;
    const b = pos.get(edge.to)!;
    const width = 0.75 + 3 * (edge.count / maxCount);
    if (edge.from === edge.to) {
      return h("circle", {
        class: "self-loop",
        "data-from": edge.from, "data-to": edge.to, "data-count": String(edge.count),
        cx: String(a.x), cy: String(a.y - 18), r: "12",
        fill: "none", "stroke-width": width.toFixed(2), stroke: "#999",
      }, h("title", {}, `${edge.from} → ${edge.to}: ${String(edge.count)}`));
    }
    return h("line", {
      class: "edge",
      "data-from": edge.from, "data-to": edge.to, "data-count": String(edge.count),
      x1: a.x.toFixed(1), y1: a.y.toFixed(1), x2: b.x.toFixed(1), y2: b.y.toFixed(1),
      stroke: "#999", "stroke-width": width.toFixed(2), "marker-end": "url(#arrow)",
    }, h("title", {}, `${edge.from} → ${edge.to}: ${String(edge.count)}`));
  });

  const nodes = doc.nodes.map((node) => {
    const p = pos.get(node.state)!;
    const r = 8 + 16 * (node.visits / maxVisits);
    const lit = highlighted.size === 0 || highlighted.has(node.state);
    return h("g", { class: lit ? "node" : "node dimmed", "data-state": node.state },
      h("circle", { cx: p.x.toFixed(1), cy: p.y.toFixed(1), r: r.toFixed(1),
                    fill: "#4e79a7", opacity: lit ? "0.9" : "0.25" }),
      h("text", { x: p.x.toFixed(1), y: (p.y - r - 4).toFixed(1), "text-anchor": "middle" },
        `${node.state} (${String(node.visits)})`));
  });

  return h("svg", { class: "state-graph", width: String(GRAPH_SIZE),
                    height: String(GRAPH_SIZE) },
    h("defs", {}, h("marker", { id: "arrow", orient: "auto" })),
    edges, nodes);
}

/** Scatter shared by the sequence graph (players) and group graph (teams).
 * Node coordinates come from the embedding; cluster id colors the node. */
export function scatterView(doc: ScatterDoc, kind: "sequence" | "group",
                            selected: Set<string> = new Set()): VNode {
  const xs = doc.nodes.map((node) => node.x);
  const ys = doc.nodes.map((node) => node.y);
  const minX = Math.min(...xs, 0), maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, 0), maxY = Math.max(...ys, 1);
  const pad = 36;
  const scaleX = (v: number) =>
    pad + ((v - minX) / Math.max(maxX - minX, 1e-9)) * (GRAPH_SIZE - 2 * pad);
  const scaleY = (v: number) =>
    pad + ((v - minY) / Math.max(maxY - minY, 1e-9)) * (GRAPH_SIZE - 2 * pad);

  const nodes = doc.nodes.map((node) => {
    const isSelected = selected.has(node.owner.id);
    return h("g", {
      class: isSelected ? "owner selected" : "owner",
      "data-owner-id": node.owner.id,
      "data-cluster": String(node.cluster),
      "data-x": String(node.x),
      "data-y": String(node.y),
    },
      h("circle", {
        cx: scaleX(node.x).toFixed(1), cy: scaleY(node.y).toFixed(1),
        r: isSelected ? "12" : "9",
        fill: clusterColor(node.cluster),
        stroke: isSelected ? "#000" : "none",
      }, h("title", {}, `${node.owner.id} · cluster ${String(node.cluster)}`
           + ` · (${String(node.x)}, ${String(node.y)})`)),
      h("text", { x: scaleX(node.x).toFixed(1), y: (scaleY(node.y) - 14).toFixed(1),
                  "text-anchor": "middle" }, node.owner.id));
  });

  const excluded = doc.excluded.length
    ? h("div", { class: "excluded" },
        "unlabeled, not shown: " + doc.excluded.map((o) => o.id).join(", "))
    : null;

  return h("div", { class: `${kind}-graph` },
    h("svg", { width: String(GRAPH_SIZE), height: String(GRAPH_SIZE) }, nodes),
    excluded);
}

/** Complete sequence of states with per-position repetition counts:
 * "Farm (3) → Roam (1)". */
export function sequenceStrip(doc: SequenceDoc): VNode {
  const parts = doc.elements.map((el) => `${el.state} (${String(el.count)})`);
  return h("div", { class: "sequence-strip", "data-owner-id": doc.owner.id },
    h("span", { class: "owner-name" }, `${doc.owner.kind} ${doc.owner.id}: `),
    h("span", { class: "states" },
      parts.length ? parts.join(" → ") : "(no labeled states)"));
}

/** Round selector; `null` means whole session. */
export function roundSelector(roundMarks: [number, number][],
                              active: number | null): VNode {
  const options = [h("option", { value: "" }, "whole session"),
    ...roundMarks.map(([index]) => h("option", {
      value: String(index),
      ...(active === index ? { selected: "selected" } : {}),
    }, `round ${String(index)}`))];
  return h("select", { class: "round-selector" }, options);
}
