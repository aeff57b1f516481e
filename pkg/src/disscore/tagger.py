"""English explicit relation tagger at the four-class level.

A lexicon-and-rules tagger: English entries list top-level classes as
senses (default first) and a rules file resolves the ambiguous ones.
Without POS tags the usage filters fall back to lexical cues, which trades
some precision for independence from a parser.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .detector import DetectionReport, detect
from .lexicon import (
    Lexicon,
    RelationClass,
    RelationMapping,
    default_en_lexicon,
    default_en_rules,
    default_mapping,
)
from .textmodel import Sentence


class Tagger:
    """Bundles the English resources so callers need not pass them around."""

    def __init__(self, lexicon: Optional[Lexicon] = None, rules: Optional[Sequence] = None,
                 mapping: Optional[RelationMapping] = None):
        self.lexicon = lexicon if lexicon is not None else default_en_lexicon()
        self.rules = list(rules) if rules is not None else default_en_rules()
        self.mapping = mapping or default_mapping()

    def tag(self, sentence: Sentence, report: Optional[DetectionReport] = None) -> list:
        return tag(sentence, self.lexicon, self.rules, self.mapping, report)

    def class_of(self, sentence: Sentence, target_surface: str) -> RelationClass:
        return class_of(sentence, target_surface, self.lexicon, self.rules, self.mapping)


def tag(sentence: Sentence, en_lexicon: Lexicon, en_rules: Sequence = (),
        mapping: Optional[RelationMapping] = None,
        report: Optional[DetectionReport] = None) -> list:
    if sentence.language != "en":
        raise ValueError("the tagger takes English sentences")
    return detect(sentence, en_lexicon, mapping, en_rules, report)


def class_of(sentence: Sentence, target_surface: str, en_lexicon: Lexicon,
             en_rules: Sequence = (), mapping: Optional[RelationMapping] = None,
             detections: Optional[Sequence] = None) -> RelationClass:
    """Class of the first tagged occurrence of ``target_surface``, else NoRel.

    ``detections`` may carry a precomputed ``tag`` result for the sentence.
    """
    if target_surface.startswith("en:"):
        target_surface = target_surface[3:]
    if detections is None:
        detections = tag(sentence, en_lexicon, en_rules, mapping)
    for det in detections:
        if det.surface_joined == target_surface:
            return det.relation_class
    return RelationClass.NOREL
