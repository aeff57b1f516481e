"""Document scoring from source connectives and candidate translations.

For each connective detected in a source sentence the English candidates
proposed by the embeddings are searched for in the translation.  The best
ranked candidate present gives the connective likelihood ``dc``; ``dr`` is 1
when the tagger assigns that English connective the same class as the source
relation.  With ``M`` source connectives in a sentence:

    additive        sum_j  dc_j / M + gamma * dr_j / M
    multiplicative  sum_j (dc_j / M) * gamma * (dr_j / M)

and a document scores the mean over all its sentences, counting sentences
without connectives as 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .detector import DetectedConnective, DetectionReport, detect
from .embeddings import BackoffChain, EmbeddingModel, translation_likelihood
from .errors import InputError, LabelError
from .lexicon import (
    Lexicon,
    RelationClass,
    RelationMapping,
    default_en_lexicon,
    default_en_rules,
    default_fr_lexicon,
    default_fr_rules,
    default_mapping,
)
from .tagger import class_of, tag
from .textmodel import ParallelDoc, Sentence

MODES = ("additive", "multiplicative")
DC_MODES = ("softmax", "raw_cosine")


@dataclass(frozen=True)
class ScoreConfig:
    gamma: float = 0.045
    combination_mode: str = "additive"
    dc_mode: str = "softmax"
    candidate_top_k: int = 20
    # False drops the per-sentence division by M
    normalize: bool = True

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        if self.candidate_top_k < 1:
            raise ValueError("candidate_top_k must be >= 1")
        if self.combination_mode not in MODES:
            raise ValueError(f"combination_mode must be one of {MODES}")
        if self.dc_mode not in DC_MODES:
            raise ValueError(f"dc_mode must be one of {DC_MODES}")

    def with_gamma(self, gamma: float) -> "ScoreConfig":
        return ScoreConfig(gamma, self.combination_mode, self.dc_mode,
                           self.candidate_top_k, self.normalize)


@dataclass
class Resources:
    fr_lexicon: Lexicon
    en_lexicon: Lexicon
    chain: BackoffChain
    mapping: RelationMapping = field(default_factory=default_mapping)
    fr_rules: Sequence = ()
    en_rules: Sequence = ()

    def __post_init__(self):
        if isinstance(self.chain, EmbeddingModel):
            self.chain = BackoffChain([self.chain])
        self.mapping.check_total(self.fr_lexicon)
        self.mapping.check_total(self.en_lexicon)

    @classmethod
    def bundled(cls, chain) -> "Resources":
        return cls(default_fr_lexicon(), default_en_lexicon(), chain, default_mapping(),
                   default_fr_rules(), default_en_rules())


@dataclass(frozen=True)
class ConnectiveScore:
    source: DetectedConnective
    matched: Optional[str]
    dc: float
    dr: int
    model_index: Optional[int]
    target_class: RelationClass = RelationClass.NOREL

    def to_dict(self) -> dict:
        return {
            "source": self.source.surface_joined,
            "sense": self.source.sense,
            "class": self.source.relation_class.value,
            "matched": self.matched,
            "target_class": self.target_class.value,
            "dc": self.dc,
            "dr": self.dr,
            "model_index": self.model_index,
        }


@dataclass(frozen=True)
class SentenceScore:
    connectives: tuple
    value: float

    @property
    def M(self) -> int:
        return len(self.connectives)

    @property
    def dc_st(self) -> int:
        return self.M

    @property
    def dr_st(self) -> int:
        return self.M

    def to_dict(self) -> dict:
        return {"M": self.M, "value": self.value,
                "connectives": [c.to_dict() for c in self.connectives]}


@dataclass(frozen=True)
class DocumentScore:
    doc_id: str
    label: str
    sentences: tuple
    value: float

    @property
    def N(self) -> int:
        return len(self.sentences)

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "label": self.label, "value": self.value, "N": self.N,
                "sentences": [s.to_dict() for s in self.sentences]}


def combine(connectives: Sequence[ConnectiveScore], config: ScoreConfig) -> float:
    m = len(connectives)
    if m == 0:
        return 0.0
    denom = m if config.normalize else 1
    total = 0.0
    for c in connectives:
        if config.combination_mode == "additive":
            total += c.dc / denom + config.gamma * c.dr / denom
        else:
            total += (c.dc / denom) * config.gamma * (c.dr / denom)
    return total


def _occurs(words: Sequence[str], surface: str) -> bool:
    needle = surface.split("_")
    k = len(needle)
    return any(words[i:i + k] == needle for i in range(len(words) - k + 1))


def match_connectives(source_detections: Sequence[DetectedConnective], en_sentence: Sentence,
                      resources: Resources, config: ScoreConfig,
                      en_detections: Optional[Sequence] = None) -> tuple:
    if en_detections is None:
        en_detections = tag(en_sentence, resources.en_lexicon, resources.en_rules,
                            resources.mapping)
    tagged = {d.surface_joined for d in en_detections}
    words = en_sentence.lowers
    scores = []
    for det in source_detections:
        tl = translation_likelihood(resources.chain, det.surface_joined,
                                    en_lexicon=resources.en_lexicon, mode=config.dc_mode)
        matched, dc, dr, target = None, 0.0, 0, RelationClass.NOREL
        for cand, p in tl.top(config.candidate_top_k):
            surface = cand[3:]
            if surface in tagged or _occurs(words, surface):
                matched, dc = surface, p
                break
        if matched is not None:
            target = class_of(en_sentence, matched, resources.en_lexicon, resources.en_rules,
                              resources.mapping, detections=en_detections)
            dr = int(target is not RelationClass.NOREL and target == det.relation_class)
        scores.append(ConnectiveScore(det, matched, dc, dr, tl.model_index, target))
    return tuple(scores)


def detect_source(fr_sentence: Sentence, resources: Resources,
                  report: Optional[DetectionReport] = None) -> list:
    return detect(fr_sentence, resources.fr_lexicon, resources.mapping, resources.fr_rules, report)


def score_sentence(fr_sentence: Sentence, en_sentence: Sentence, resources: Resources,
                   config: ScoreConfig = ScoreConfig(),
                   source_detections: Optional[Sequence] = None) -> SentenceScore:
    if source_detections is None:
        source_detections = detect_source(fr_sentence, resources)
    conns = match_connectives(source_detections, en_sentence, resources, config)
    return SentenceScore(conns, combine(conns, config))


def score_document(doc: ParallelDoc, label: str, resources: Resources,
                   config: ScoreConfig = ScoreConfig(),
                   source_detections: Optional[Sequence] = None) -> DocumentScore:
    if label not in doc.candidates:
        raise LabelError(f"document {doc.doc_id!r} has no candidate {label!r}")
    if len(doc) == 0:
        raise InputError(f"document {doc.doc_id!r} has no sentences")
    if source_detections is None:
        source_detections = [detect_source(s, resources) for s in doc.source]
    sents = tuple(
        score_sentence(fr, en, resources, config, dets)
        for fr, en, dets in zip(doc.source, doc.candidates[label], source_detections)
    )
    return DocumentScore(doc.doc_id, label, sents, sum(s.value for s in sents) / len(sents))


def rescore(doc_score: DocumentScore, config: ScoreConfig) -> float:
    """Document value under another config, reusing the matched connectives."""
    values = [combine(s.connectives, config) for s in doc_score.sentences]
    return sum(values) / len(values)


def _folds(n: int, k: int, seed: int) -> list:
    order = list(range(n))
    random.Random(seed).shuffle(order)
    return [sorted(order[i::k]) for i in range(k)]


def calibrate_gamma(docs: Sequence[ParallelDoc], grid: Sequence[float], resources: Resources,
                    config: ScoreConfig = ScoreConfig(), folds: int = 5, seed: int = 0,
                    better: str = "PE", worse: str = "MT", epsilon: float = 1e-9):
    """Grid-search gamma by k-fold cross-validation.

    The objective on a validation fold is the fraction of its documents
    where ``better`` scores at least ``worse`` (within ``epsilon``).  Folds
    are a seeded shuffle; the mean fold objective picks the grid value and
    ties go to the smaller gamma.  Returns ``(gamma, {gamma: mean})``.
    """
    grid = sorted(set(float(g) for g in grid))
    if not grid:
        raise InputError("gamma grid is empty")
    if not docs:
        raise InputError("no documents to calibrate on")
    for doc in docs:
        for label in (better, worse):
            if label not in doc.candidates:
                raise InputError(f"document {doc.doc_id!r} lacks candidate {label!r}")
    k = max(1, min(folds, len(docs)))

    scored = []
    for doc in docs:
        dets = [detect_source(s, resources) for s in doc.source]
        scored.append((score_document(doc, better, resources, config, dets),
                       score_document(doc, worse, resources, config, dets)))

    objective = {}
    for g in grid:
        cfg = config.with_gamma(g)
        wins = [rescore(b, cfg) >= rescore(w, cfg) - epsilon for b, w in scored]
        per_fold = [sum(wins[i] for i in fold) / len(fold) for fold in _folds(len(docs), k, seed)]
        objective[g] = sum(per_fold) / len(per_fold)
    best = max(grid, key=lambda g: (objective[g], -g))
    return best, objective
