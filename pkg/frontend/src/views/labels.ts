/** Label editor: staged-selection summary, vocabulary-limited name picker,
 * submit gated on containment, list with author filter, conflict banner. */

import type { ViewState } from "../state.js";
import type { LabelDoc, VocabularyDoc } from "../types.js";
import { h, type VNode } from "../vdom.js";

export function labelEditor(state: ViewState, conflict: string | null = null,
                            author = ""): VNode {
  const vocabulary = state.session?.vocabulary;
  const staged = state.staged;
  const problems = state.stagingProblems();
  const summary = staged
    ? `window [${String(staged.startMs)}, ${String(staged.endMs)}] · `
      + `${String(staged.unitIds.size)} unit(s) · `
      + `${String(staged.eventIds.size)} event(s)`
    : "nothing staged — brush the timeline and select events";

  return h("div", { class: "label-editor" },
    conflict ? h("div", { class: "conflict-banner" },
      `edit conflict: ${conflict} — refresh to see the latest revision`) : null,
    h("div", { class: "staged-summary" }, summary),
    problems.length && staged
      ? h("ul", { class: "problems" }, problems.map((p) => h("li", {}, p)))
      : null,
    h("select", { class: "name-picker" }, namePickerOptions(vocabulary)),
    h("input", { class: "author-input", type: "text", placeholder: "your rater id",
                 value: author }),
    h("button", {
      class: "submit",
      ...(state.canSubmit() ? {} : { disabled: "disabled" }),
    }, "save label"));
}

function namePickerOptions(vocabulary: VocabularyDoc | undefined): VNode[] {
  if (!vocabulary) return [h("option", { value: "" }, "(no vocabulary configured)")];
  return vocabulary.entries.map((entry) =>
    h("option", { value: entry.name, title: entry.description }, entry.name));
}

export function labelList(labels: LabelDoc[], authorFilter: string | null,
                          selectedId: string | null): VNode {
  const shown = authorFilter ? labels.filter((l) => l.author === authorFilter) : labels;
  const authors = [...new Set(labels.map((l) => l.author))].sort();
  return h("div", { class: "label-list" },
    h("select", { class: "author-filter" },
      [h("option", { value: "" }, "all raters"),
       ...authors.map((a) => h("option", {
         value: a, ...(a === authorFilter ? { selected: "selected" } : {}),
       }, a))]),
    h("ul", {}, shown.map((label) => h("li", {
      class: label.label_id === selectedId ? "label selected" : "label",
      "data-label-id": label.label_id,
      "data-revision": String(label.revision),
    },
      h("span", { class: "name" }, label.name),
      h("span", { class: "window" },
        ` [${String(label.start_ms)}–${String(label.end_ms)}] `),
      h("span", { class: "units" }, label.unit_ids.join(",")),
      h("span", { class: "author" }, ` by ${label.author} `),
      h("button", {
        class: "label-delete",
        "data-label-id": label.label_id,
        "data-revision": String(label.revision),
      }, "×")))));
}
