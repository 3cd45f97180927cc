"""Inter-rater reliability: timeline discretization and Cohen's kappa.

Two raters' label sets are reduced to categorical assignments over
(player unit x fixed time bin) cells, then compared with percent agreement
and Cohen's kappa. The unlabeled category "∅" participates like any other:
agreeing that nothing happened is still agreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .errors import ValidationError
from .labeling import Label
from .sequence import STATE_SEPARATOR
from .telemetry import Session

UNLABELED = "∅"
DEFAULT_BIN_MS = 1000


@dataclass
class DiscretizedAssignment:
    session_id: str
    rater: str
    bin_ms: int
    bin_count: int
    units: list[str]  # player units, sorted
    cells: dict[tuple[str, int], str]  # (unit_id, bin_index) -> category

    def category_at(self, unit_id: str, bin_index: int) -> str:
        return self.cells[(unit_id, bin_index)]


def discretize(labels: Sequence[Label], session: Session, bin_ms: int = DEFAULT_BIN_MS,
               rater: str = "") -> DiscretizedAssignment:
    """Assign one category per (player unit, bin).

    A label name enters a cell's category set when its coverage exceeds half
    of the bin; the category is the canonical composite of all such names.
    When no name clears the strict-majority bar but one or more cover exactly
    half, the lexicographically smallest of those becomes the category.
    Cells with no qualifying name are "∅".
    """
    if bin_ms <= 0:
        raise ValidationError("bin_ms must be positive", bin_ms=bin_ms)
    duration = session.duration_ms
    bin_count = max(1, -(-duration // bin_ms))  # ceil division
    units = sorted(u.id for u in session.players())
    by_unit: dict[str, list[Label]] = {u: [] for u in units}
    for label in labels:
        for uid in label.unit_ids:
            if uid in by_unit:
                by_unit[uid].append(label)

    cells: dict[tuple[str, int], str] = {}
    for uid in units:
        unit_labels = by_unit[uid]
        for b in range(bin_count):
            lo = b * bin_ms
            hi = min((b + 1) * bin_ms, duration) if duration > 0 else (b + 1) * bin_ms
            cells[(uid, b)] = _bin_category(unit_labels, lo, hi)
    return DiscretizedAssignment(session_id=session.id, rater=rater, bin_ms=bin_ms,
                                 bin_count=bin_count, units=units, cells=cells)


def _bin_category(labels: list[Label], lo: int, hi: int) -> str:
    span = hi - lo
    if span <= 0:
        return UNLABELED
    coverage: dict[str, int] = {}
    for name in {l.name for l in labels}:
        intervals = sorted((max(l.start_ms, lo), min(l.end_ms, hi))
                           for l in labels if l.name == name
                           if l.start_ms < hi and l.end_ms > lo)
        covered, cursor = 0, lo
        for s, e in intervals:
            s = max(s, cursor)
            if e > s:
                covered += e - s
                cursor = e
        if covered > 0:
            coverage[name] = covered
    majority = sorted(name for name, c in coverage.items() if 2 * c > span)
    if majority:
        return STATE_SEPARATOR.join(majority)
    half = sorted(name for name, c in coverage.items() if 2 * c == span)
    if half:
        return half[0]
    return UNLABELED


@dataclass
class AgreementReport:
    kappa: Optional[float]  # None when chance agreement is total (degenerate)
    percent_agreement: float
    expected_agreement: float
    confusion: list[list[int]]
    categories: list[str]
    bin_ms: int
    cell_count: int

    @property
    def degenerate(self) -> bool:
        return self.kappa is None

    def to_doc(self) -> dict[str, Any]:
        return {
            "kappa": self.kappa,
            "degenerate": self.degenerate,
            "percent_agreement": self.percent_agreement,
            "expected_agreement": self.expected_agreement,
            "confusion": self.confusion,
            "categories": self.categories,
            "bin_ms": self.bin_ms,
            "cell_count": self.cell_count,
        }


def kappa_from_confusion(confusion: Sequence[Sequence[int]], categories: Sequence[str],
                         bin_ms: int = DEFAULT_BIN_MS) -> AgreementReport:
    """Cohen's kappa from a category x category count matrix.

    Computed in exact integer arithmetic before the final division:
    kappa = (N*trace - sum_c row_c*col_c) / (N^2 - sum_c row_c*col_c).
    """
    n_cat = len(categories)
    if len(confusion) != n_cat or any(len(row) != n_cat for row in confusion):
        raise ValidationError("confusion matrix shape must match category count")
    total = sum(sum(row) for row in confusion)
    if total == 0:
        raise ValidationError("confusion matrix must contain at least one cell")
    trace = sum(confusion[i][i] for i in range(n_cat))
    row_sums = [sum(row) for row in confusion]
    col_sums = [sum(confusion[i][j] for i in range(n_cat)) for j in range(n_cat)]
    chance = sum(r * c for r, c in zip(row_sums, col_sums))
    po = trace / total
    pe = chance / (total * total)
    if chance == total * total:
        kappa = None  # pe == 1: agreement by chance is certain
    else:
        kappa = (total * trace - chance) / (total * total - chance)
    return AgreementReport(kappa=kappa, percent_agreement=po, expected_agreement=pe,
                           confusion=[list(map(int, row)) for row in confusion],
                           categories=list(categories), bin_ms=bin_ms,
                           cell_count=total)


def cohen_kappa(a: DiscretizedAssignment, b: DiscretizedAssignment) -> AgreementReport:
    """Agreement between two raters' discretized assignments."""
    if a.bin_ms != b.bin_ms:
        raise ValidationError("assignments use different bin sizes",
                              a_bin_ms=a.bin_ms, b_bin_ms=b.bin_ms)
    if a.session_id != b.session_id:
        raise ValidationError("assignments cover different sessions")
    if set(a.cells) != set(b.cells):
        raise ValidationError("assignments cover different cell domains")
    categories = sorted({*a.cells.values(), *b.cells.values()})
    index = {cat: i for i, cat in enumerate(categories)}
    confusion = [[0] * len(categories) for _ in categories]
    for key in sorted(a.cells):
        confusion[index[a.cells[key]]][index[b.cells[key]]] += 1
    return kappa_from_confusion(confusion, categories, bin_ms=a.bin_ms)
