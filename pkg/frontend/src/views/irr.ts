/** Agreement panel: kappa, agreement fractions, and the confusion matrix,
 * all rendered verbatim from the API document. */

import type { IrrDoc } from "../types.js";
import { h, type VNode } from "../vdom.js";

export function irrPanel(doc: IrrDoc): VNode {
  const kappaText = doc.kappa === null ? "undefined (degenerate)" : String(doc.kappa);
  const header = h("div", { class: "irr-summary" },
    h("span", { class: "kappa" }, `kappa ${kappaText}`),
    h("span", { class: "agreement" },
      ` · observed agreement ${String(doc.percent_agreement)}`),
    h("span", { class: "expected" },
      ` · chance agreement ${String(doc.expected_agreement)}`),
    h("span", { class: "bin" }, ` · bin ${String(doc.bin_ms)} ms`),
    h("span", { class: "cells" }, ` · ${String(doc.cell_count)} cells`));

  const head = h("tr", {},
    h("th", {}, `${doc.raterA} \\ ${doc.raterB}`),
    ...doc.categories.map((c) => h("th", {}, c)));
  const rows = doc.confusion.map((row, i) => h("tr", {},
    h("th", {}, doc.categories[i]),
    ...row.map((cell) => h("td", {}, String(cell)))));

  return h("div", { class: "irr-panel" }, header,
    h("table", { class: "confusion" }, head, ...rows));
}
