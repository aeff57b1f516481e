"""Explicit connective detection: scan, usage filter, sense choice, class.

The same machinery serves French source sentences and English targets;
only the lexicon, rules and mapping differ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .lexicon import (
    ConnectiveEntry,
    Lexicon,
    RelationClass,
    RelationMapping,
    default_mapping,
    is_ambiguous,
    match_key,
)
from .textmodel import Sentence

log = logging.getLogger(__name__)

LISTING_CONJUNCTIONS = {"et", "ou", "and", "or"}
NOMINAL_TAGS = {"NOUN", "PROPN", "NC", "NPP", "N", "NN", "NNS", "NNP", "NNPS"}
NOUN_PHRASE_START_TAGS = NOMINAL_TAGS | {"DET", "DT", "ADJ", "JJ", "NUM", "CD", "PRP$"}
SUBJECT_PRONOUNS = {
    "je", "j'", "tu", "il", "elle", "on", "nous", "vous", "ils", "elles", "c'", "ce", "cela",
    "i", "you", "he", "she", "it", "we", "they", "there", "this",
}


@dataclass(frozen=True)
class Candidate:
    start: int
    end: int
    entry: ConnectiveEntry


@dataclass(frozen=True)
class DetectedConnective:
    start: int
    end: int
    surface_joined: str
    sense: str
    relation_class: RelationClass
    language: str
    discourse_usage: bool = True

    @property
    def span(self):
        return (self.start, self.end)

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "surface": self.surface_joined,
            "sense": self.sense,
            "class": self.relation_class.value,
        }


@dataclass
class DetectionReport:
    warnings: list = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        log.warning(message)


def scan(sentence: Sentence, lexicon: Lexicon) -> list:
    """Longest-leftmost, non-overlapping lexicon matches."""
    if sentence.language != lexicon.language:
        raise ValueError(f"{sentence.language} sentence scanned with {lexicon.language} lexicon")
    keys = [match_key(t.lower) for t in sentence]
    found = []
    i, n = 0, len(keys)
    while i < n:
        match = None
        for entry in lexicon.index.get(keys[i], ()):
            k = len(entry.surface)
            if i + k <= n and tuple(keys[i:i + k]) == entry.surface:
                match = entry
                break
        if match is None:
            i += 1
        else:
            found.append(Candidate(i, i + len(match.surface), match))
            i += len(match.surface)
    return found


def _is_listing(sentence: Sentence, i: int) -> bool:
    toks = sentence.tokens
    if i == 0 or i + 1 >= len(toks):
        return False
    prev, nxt = toks[i - 1], toks[i + 1]
    if sentence.has_pos and prev.pos is not None and nxt.pos is not None:
        return prev.pos in NOMINAL_TAGS and nxt.pos in NOUN_PHRASE_START_TAGS
    if nxt.lower in SUBJECT_PRONOUNS:
        return False
    if prev.surface[:1].isupper() and nxt.surface[:1].isupper():
        return True
    # "X, Y and Z": a comma shortly before, not counting one directly before
    return any(t.surface == "," for t in toks[max(0, i - 4):i - 1])


def filter_discourse_usage(candidate: Candidate, sentence: Sentence) -> bool:
    """Decide whether a lexicon match is used as a discourse connective.

    With POS tags every tagged token of the match must carry one of the
    entry's admissible categories.  Coordinating conjunctions inside a
    nominal listing are rejected, and an entry's usage condition must hold.
    """
    entry = candidate.entry
    if entry.pos_categories and sentence.has_pos:
        for tok in sentence.tokens[candidate.start:candidate.end]:
            if tok.pos is not None and tok.pos not in entry.pos_categories:
                return False
    if len(entry.surface) == 1 and entry.surface[0] in LISTING_CONJUNCTIONS:
        if _is_listing(sentence, candidate.start):
            return False
    if entry.usage is not None and not entry.usage.holds(sentence, candidate.start, candidate.end):
        return False
    return True


def disambiguate(candidate: Candidate, sentence: Sentence, rules: Sequence = (),
                 mapping: Optional[RelationMapping] = None,
                 report: Optional[DetectionReport] = None) -> str:
    """Pick the sense of a candidate.

    Senses that all map to one class need no rule and the first is used.
    Otherwise the connective's rules are tried in order: the first whose
    condition holds gives ``sense_if_true``; if none does, the last rule's
    ``sense_if_false`` applies.
    """
    entry = candidate.entry
    mapping = mapping or default_mapping()
    if not is_ambiguous(entry, mapping):
        return entry.senses[0]
    applicable = [r for r in rules if r.surface == entry.surface]
    if not applicable:
        msg = f"no rule for ambiguous connective {entry.joined!r}; using {entry.senses[0]!r}"
        if report is not None:
            report.warn(msg)
        else:
            log.warning(msg)
        return entry.senses[0]
    for rule in applicable:
        if rule.condition.holds(sentence, candidate.start, candidate.end):
            return rule.sense_if_true
    return applicable[-1].sense_if_false


def detect(sentence: Sentence, lexicon: Lexicon, mapping: Optional[RelationMapping] = None,
           rules: Sequence = (), report: Optional[DetectionReport] = None) -> list:
    mapping = mapping or default_mapping()
    out = []
    for cand in scan(sentence, lexicon):
        if not filter_discourse_usage(cand, sentence):
            continue
        sense = disambiguate(cand, sentence, rules, mapping, report)
        out.append(DetectedConnective(
            cand.start, cand.end, cand.entry.joined, sense,
            mapping.map(sense), sentence.language))
    return out
