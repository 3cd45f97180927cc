/** Minimal virtual-node layer.
 *
 * Views build plain trees so tests can walk and audit rendered output
 * without a browser; `toDom` realizes a tree in an actual document.
 */

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Child[];
  on?: Record<string, (event: unknown) => void>;
}

export type Child = VNode | string;

export function h(tag: string, attrs: Record<string, string> = {},
                  ...children: (Child | Child[] | null | undefined)[]): VNode {
  const flat: Child[] = [];
  for (const child of children) {
    if (child == null) continue;
    if (Array.isArray(child)) flat.push(...child.filter((c): c is Child => c != null));
    else flat.push(child);
  }
  return { tag, attrs, children: flat };
}

export function withHandlers(node: VNode, on: Record<string, (event: unknown) => void>): VNode {
  return { ...node, on };
}

export function textOf(node: Child): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join(" ");
}

export function walk(node: Child, visit: (node: Child) => void): void {
  visit(node);
  if (typeof node !== "string") node.children.forEach((c) => walk(c, visit));
}

/** All text fragments in the tree (one entry per text node). */
export function textFragments(node: Child): string[] {
  const out: string[] = [];
  walk(node, (n) => {
    if (typeof n === "string") out.push(n);
  });
  return out;
}

export function findAll(node: Child, pred: (node: VNode) => boolean): VNode[] {
  const out: VNode[] = [];
  walk(node, (n) => {
    if (typeof n !== "string" && pred(n)) out.push(n);
  });
  return out;
}

const SVG_TAGS = new Set(["svg", "g", "circle", "rect", "line", "path", "text",
                          "title", "polyline", "marker", "defs"]);

export function toDom(node: Child, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const el = SVG_TAGS.has(node.tag)
    ? doc.createElementNS("http://www.w3.org/2000/svg", node.tag)
    : doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) el.setAttribute(name, value);
  for (const [event, handler] of Object.entries(node.on ?? {})) {
    el.addEventListener(event, handler as EventListener);
  }
  for (const child of node.children) el.appendChild(toDom(child, doc));
  return el;
}
