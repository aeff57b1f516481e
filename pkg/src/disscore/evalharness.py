"""Evaluation protocols: pairwise document wins, system-level Pearson,
segment-level Kendall tau variants and linear metric combination.

Kendall variants
----------------
Every human judgment compares two systems on one segment.  Each judgment is
classified by the human preference and the sign of the metric difference,
then counted as concordant (C), discordant (D), or excluded (-), or, for
``xties``, kept in the denominator only (T)::

                      metric agrees   metric ties   metric disagrees
    wmt12  human pref       C              D               D
           human tie        -              -               -
    wmt13  human pref       C              -               D
           human tie        -              -               -
    xties  human pref       C              T               D
           human tie        D              C               D

    tau = (C - D) / (C + D + T)

Metric ties are exact equality of segment scores.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import FormatError, InputError, UndefinedStatisticError

VARIANTS = ("wmt12", "wmt13", "xties")

CONC, DISC, EXCL, TIE = "C", "D", "-", "T"

# (variant, human_tied, metric_relation) -> outcome; metric_relation is one
# of "agree", "tie", "disagree" (for human ties, "tie" vs "differ").
DECISION_TABLE = {
    ("wmt12", False, "agree"): CONC,
    ("wmt12", False, "tie"): DISC,
    ("wmt12", False, "disagree"): DISC,
    ("wmt12", True, "tie"): EXCL,
    ("wmt12", True, "differ"): EXCL,
    ("wmt13", False, "agree"): CONC,
    ("wmt13", False, "tie"): EXCL,
    ("wmt13", False, "disagree"): DISC,
    ("wmt13", True, "tie"): EXCL,
    ("wmt13", True, "differ"): EXCL,
    ("xties", False, "agree"): CONC,
    ("xties", False, "tie"): TIE,
    ("xties", False, "disagree"): DISC,
    ("xties", True, "tie"): CONC,
    ("xties", True, "differ"): DISC,
}

# Reference fraction of LIG documents where PE scores at least MT, with the
# band a reimplemented stack is expected to land in.  Informational only.
LIG_PE_GE_MT_REFERENCE = 0.78
LIG_PE_GE_MT_TOLERANCE = 0.10


@dataclass(frozen=True)
class WinTally:
    wins_a: int
    wins_b: int
    ties: int
    epsilon: float = 1e-9
    label_a: str = "a"
    label_b: str = "b"

    @property
    def total(self) -> int:
        return self.wins_a + self.wins_b + self.ties

    def pct(self, count: int) -> float:
        return round(100.0 * count / self.total, 1) if self.total else 0.0

    @property
    def a_ge_b(self) -> int:
        return self.wins_a + self.ties

    def to_dict(self) -> dict:
        return {
            "label_a": self.label_a,
            "label_b": self.label_b,
            "wins_a": self.wins_a,
            "wins_b": self.wins_b,
            "ties": self.ties,
            "total": self.total,
            "pct_wins_a": self.pct(self.wins_a),
            "pct_wins_b": self.pct(self.wins_b),
            "pct_ties": self.pct(self.ties),
            "a_ge_b": self.a_ge_b,
            "a_ge_b_fraction": self.a_ge_b / self.total if self.total else 0.0,
        }


def tally_values(pairs: Iterable, epsilon: float = 1e-9, label_a="a", label_b="b") -> WinTally:
    """Count wins over ``(value_a, value_b)`` pairs with a tie band."""
    wa = wb = ties = 0
    for a, b in pairs:
        if abs(a - b) <= epsilon:
            ties += 1
        elif a > b:
            wa += 1
        else:
            wb += 1
    return WinTally(wa, wb, ties, epsilon, label_a, label_b)


def win_tally(docs, label_a: str, label_b: str, resources, config=None,
              epsilon: float = 1e-9) -> WinTally:
    from .scorer import ScoreConfig, detect_source, score_document

    config = config or ScoreConfig()
    values = []
    for doc in docs:
        for label in (label_a, label_b):
            if label not in doc.candidates:
                raise InputError(f"document {doc.doc_id!r} lacks candidate {label!r}")
        dets = [detect_source(s, resources) for s in doc.source]
        values.append((score_document(doc, label_a, resources, config, dets).value,
                       score_document(doc, label_b, resources, config, dets).value))
    return tally_values(values, epsilon, label_a, label_b)


def lig_reference_check(tally: WinTally) -> dict:
    frac = tally.a_ge_b / tally.total if tally.total else 0.0
    return {
        "pe_ge_mt_fraction": frac,
        "reference_fraction": LIG_PE_GE_MT_REFERENCE,
        "tolerance": LIG_PE_GE_MT_TOLERANCE,
        "within_tolerance": abs(frac - LIG_PE_GE_MT_REFERENCE) <= LIG_PE_GE_MT_TOLERANCE,
        "gating": False,
    }


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise InputError("pearson needs equal-length inputs")
    n = len(xs)
    if n < 2:
        raise UndefinedStatisticError("pearson needs at least 2 points")
    # a rounded mean can leave tiny nonzero deviations on constant input
    if min(xs) == max(xs) or min(ys) == max(ys):
        raise UndefinedStatisticError("correlation undefined for zero variance")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedStatisticError("correlation undefined for zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class Judgment:
    segment_id: str
    system_a: str
    system_b: str
    preference: str  # "a", "b" or "tie"

    def __post_init__(self):
        if self.preference not in ("a", "b", "tie"):
            raise ValueError(f"preference must be a, b or tie, not {self.preference!r}")


def classify(variant: str, preference: str, metric_a: float, metric_b: float) -> str:
    if preference == "tie":
        return DECISION_TABLE[(variant, True, "tie" if metric_a == metric_b else "differ")]
    if metric_a == metric_b:
        rel = "tie"
    elif (metric_a > metric_b) == (preference == "a"):
        rel = "agree"
    else:
        rel = "disagree"
    return DECISION_TABLE[(variant, False, rel)]


def kendall_counts(judgments: Iterable[Judgment], metric: Mapping, variant: str) -> Counter:
    """Outcome counts; ``metric`` maps ``(system, segment_id)`` to a score."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    counts = Counter()
    for j in judgments:
        try:
            ma = metric[(j.system_a, j.segment_id)]
            mb = metric[(j.system_b, j.segment_id)]
        except KeyError as exc:
            raise InputError(f"no metric score for {exc.args[0]}") from None
        counts[classify(variant, j.preference, ma, mb)] += 1
    return counts


def kendall_wmt(judgments: Iterable[Judgment], metric: Mapping, variant: str = "wmt13") -> float:
    c = kendall_counts(judgments, metric, variant)
    denom = c[CONC] + c[DISC] + c[TIE]
    if denom == 0:
        raise UndefinedStatisticError(f"no comparable pairs under {variant}")
    return (c[CONC] - c[DISC]) / denom


def kendall_per_system(judgments: Sequence[Judgment], metric: Mapping, variant: str = "wmt13") -> dict:
    """Tau restricted to the judgments involving each system."""
    systems = sorted({s for j in judgments for s in (j.system_a, j.system_b)})
    out = {}
    for s in systems:
        mine = [j for j in judgments if s in (j.system_a, j.system_b)]
        try:
            out[s] = kendall_wmt(mine, metric, variant)
        except UndefinedStatisticError:
            out[s] = None
    return out


def nonzero_segments(metric: Mapping) -> dict:
    counts = Counter()
    for (system, _), value in metric.items():
        counts[system] += value != 0
    return dict(sorted(counts.items()))


# -- files ------------------------------------------------------------------

def _rows(path, expected: Sequence[str]):
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        for lineno, row in enumerate(reader, 1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and [c.strip() for c in row] == list(expected):
                continue
            if len(row) != len(expected):
                raise FormatError(f"expected columns {','.join(expected)}", path, lineno)
            yield lineno, [c.strip() for c in row]


def read_judgments(path) -> list:
    out = []
    for lineno, (seg, a, b, pref) in _rows(path, ("segment_id", "system_a", "system_b", "preference")):
        try:
            out.append(Judgment(seg, a, b, pref))
        except ValueError as exc:
            raise FormatError(str(exc), path, lineno) from None
    return out


def read_segment_scores(path) -> dict:
    """CSV ``segment_id,system,score`` to ``{(system, segment_id): score}``."""
    out = {}
    for lineno, (seg, system, score) in _rows(path, ("segment_id", "system", "score")):
        try:
            out[(system, seg)] = float(score)
        except ValueError:
            raise FormatError(f"bad score {score!r}", path, lineno) from None
    return out


def read_system_scores(path) -> dict:
    out = {}
    for lineno, (system, score) in _rows(path, ("system", "score")):
        if system in out:
            raise FormatError(f"duplicate system {system!r}", path, lineno)
        try:
            out[system] = float(score)
        except ValueError:
            raise FormatError(f"bad score {score!r}", path, lineno) from None
    return out


def system_correlation(metric: Mapping[str, float], human: Mapping[str, float]) -> float:
    systems = sorted(metric)
    if set(systems) != set(human):
        raise InputError("metric and human scores cover different systems")
    return pearson([metric[s] for s in systems], [human[s] for s in systems])


def combine_linear(metrics: Sequence[Mapping[str, float]], weights: Sequence[float],
                   human: Optional[Mapping[str, float]] = None):
    """Weighted per-system sum; with ``human`` also its Pearson correlation."""
    if len(metrics) != len(weights):
        raise InputError("one weight per metric is required")
    if not metrics:
        raise InputError("no metrics to combine")
    systems = set(metrics[0])
    for m in metrics[1:]:
        if set(m) != systems:
            raise InputError("metric files cover different system sets")
    combined = {s: math.fsum(w * m[s] for m, w in zip(metrics, weights)) for s in sorted(systems)}
    r = system_correlation(combined, human) if human is not None else None
    return combined, r
