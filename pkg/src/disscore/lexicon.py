"""Connective lexicons, the relation-class mapping and disambiguation rules.

File formats (UTF-8, ``#`` comments and blank lines ignored):

lexicon
    ``surface<TAB>senses<TAB>pos_categories[<TAB>usage]`` where surface
    tokens are space separated, senses and POS tags are comma separated and
    the optional usage column is a condition that must hold for a
    candidate to count as a discourse usage.
mapping
    ``label<TAB>class``
rules
    ``surface<TAB>condition<TAB>sense_if_true<TAB>sense_if_false``

Conditions are written in a small predicate language::

    expr  := conj ('|' conj)*
    conj  := atom ('&' atom)*
    atom  := ['!'] FEATURE ['=' value ('/' value)*]

Features: ``SENTENCE_INITIAL``, ``CAPITALIZED``, ``NEXT_IS_NUM`` and the
valued ``PREV_TOKEN``, ``NEXT_TOKEN``, ``PREV_POS``, ``NEXT_POS``,
``NEXT_SUFFIX``, ``NEAR_SUFFIX`` (any of the next three tokens),
``BEFORE_TOKEN`` and ``AFTER_TOKEN`` (anywhere before / after the span).
Token values compare against lowercased tokens; POS values are exact.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import DuplicateEntryError, FormatError, MappingError


class RelationClass(str, enum.Enum):
    TEMPORAL = "Temporal"
    COMPARISON = "Comparison"
    CONTINGENCY = "Contingency"
    EXPANSION = "Expansion"
    NOREL = "NoRel"

    def __str__(self):
        return self.value


REAL_CLASSES = tuple(c for c in RelationClass if c is not RelationClass.NOREL)

# Elided forms that stand for the full form of a lexicon token.
ELISIONS = {
    "qu'": "que",
    "lorsqu'": "lorsque",
    "puisqu'": "puisque",
    "quoiqu'": "quoique",
    "jusqu'": "jusque",
}


def match_key(lower: str) -> str:
    return ELISIONS.get(lower, lower)


# -- conditions -------------------------------------------------------------

_FLAG_FEATURES = {"SENTENCE_INITIAL", "CAPITALIZED", "NEXT_IS_NUM"}
_VALUED_FEATURES = {
    "PREV_TOKEN", "NEXT_TOKEN", "PREV_POS", "NEXT_POS",
    "NEXT_SUFFIX", "NEAR_SUFFIX", "BEFORE_TOKEN", "AFTER_TOKEN",
}


def _first_word_index(sentence) -> int:
    for tok in sentence:
        if not tok.is_punct:
            return tok.index
    return 0


@dataclass(frozen=True)
class Atom:
    feature: str
    values: tuple = ()
    negated: bool = False

    def holds(self, sentence, start: int, end: int) -> bool:
        return self._test(sentence, start, end) != self.negated

    def _test(self, sentence, start, end):
        f = self.feature
        toks = sentence.tokens
        prev = toks[start - 1] if start > 0 else None
        nxt = toks[end] if end < len(toks) else None
        if f == "SENTENCE_INITIAL":
            # opening quotes and brackets do not count as a first word
            return start <= _first_word_index(sentence)
        if f == "CAPITALIZED":
            return toks[start].surface[:1].isupper()
        if f == "NEXT_IS_NUM":
            return nxt is not None and nxt.surface.isdigit()
        if f == "PREV_TOKEN":
            return prev is not None and prev.lower in self.values
        if f == "NEXT_TOKEN":
            return nxt is not None and nxt.lower in self.values
        if f == "PREV_POS":
            return prev is not None and prev.pos in self.values
        if f == "NEXT_POS":
            return nxt is not None and nxt.pos in self.values
        if f == "NEXT_SUFFIX":
            return nxt is not None and nxt.lower.endswith(self.values)
        if f == "NEAR_SUFFIX":
            return any(t.lower.endswith(self.values) for t in toks[end:end + 3])
        if f == "BEFORE_TOKEN":
            return any(t.lower in self.values for t in toks[:start])
        if f == "AFTER_TOKEN":
            return any(t.lower in self.values for t in toks[end:])
        raise AssertionError(f)

    def __str__(self):
        s = ("!" if self.negated else "") + self.feature
        return s + ("=" + "/".join(self.values) if self.values else "")


@dataclass(frozen=True)
class Condition:
    """Disjunction of conjunctions of atoms."""

    clauses: tuple
    source: str = ""

    def holds(self, sentence, start: int, end: int) -> bool:
        return any(all(a.holds(sentence, start, end) for a in clause) for clause in self.clauses)

    def __str__(self):
        return self.source or "|".join("&".join(map(str, c)) for c in self.clauses)


def parse_condition(text: str) -> Condition:
    text = text.strip()
    if not text:
        raise ValueError("empty condition")
    clauses = []
    for disjunct in text.split("|"):
        atoms = []
        for raw in disjunct.split("&"):
            raw = raw.strip()
            negated = raw.startswith("!")
            raw = raw.lstrip("!").strip()
            name, eq, value = raw.partition("=")
            name = name.strip()
            if name in _FLAG_FEATURES:
                if eq:
                    raise ValueError(f"feature {name} takes no value")
                atoms.append(Atom(name, (), negated))
            elif name in _VALUED_FEATURES:
                values = tuple(v.strip() if "POS" in name else v.strip().lower()
                               for v in value.split("/"))
                if not eq or not all(values):
                    raise ValueError(f"feature {name} needs a value")
                atoms.append(Atom(name, values, negated))
            else:
                raise ValueError(f"unknown feature {name!r}")
        clauses.append(tuple(atoms))
    return Condition(tuple(clauses), text)


# -- lexicon ----------------------------------------------------------------

@dataclass(frozen=True)
class ConnectiveEntry:
    surface: tuple
    language: str
    senses: tuple
    pos_categories: tuple = ()
    usage: Optional[Condition] = None

    def __post_init__(self):
        object.__setattr__(self, "surface", tuple(self.surface))
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "pos_categories", tuple(self.pos_categories))
        if not self.surface or not all(self.surface):
            raise ValueError("connective surface must have non-empty tokens")
        if any(t != t.lower() for t in self.surface):
            raise ValueError(f"surface {self.surface!r} is not case-folded")
        if not self.senses:
            raise ValueError(f"connective {self.joined!r} has no senses")

    @property
    def joined(self) -> str:
        return "_".join(self.surface)

    def __len__(self):
        return len(self.surface)


class Lexicon:
    """Connective inventory for one language, indexed by first token."""

    def __init__(self, language: str, entries=()):
        self.language = language
        self.entries = tuple(entries)
        seen = set()
        index = defaultdict(list)
        for e in self.entries:
            key = (e.surface, e.senses)
            if key in seen:
                raise DuplicateEntryError(f"duplicate entry {' '.join(e.surface)!r}")
            seen.add(key)
            index[e.surface[0]].append(e)
        # longest first; file order breaks ties between equal surfaces
        self.index = {k: tuple(sorted(v, key=lambda e: -len(e))) for k, v in index.items()}
        self.max_length = max((len(e) for e in self.entries), default=0)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, surface):
        return self.get(surface) is not None

    def get(self, surface) -> Optional[ConnectiveEntry]:
        if isinstance(surface, str):
            surface = tuple(surface.replace("_", " ").split())
        for e in self.index.get(surface[0], ()) if surface else ():
            if e.surface == tuple(surface):
                return e
        return None

    def senses(self) -> set:
        return {s for e in self.entries for s in e.senses}


def _open_text(path):
    return open(path, encoding="utf-8")


def _data_lines(path):
    with _open_text(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_lexicon(path, language: str) -> Lexicon:
    entries = []
    seen = {}
    for lineno, line in _data_lines(path):
        cols = line.split("\t")
        if len(cols) < 2 or len(cols) > 4:
            raise FormatError("expected 2 to 4 tab-separated columns", path, lineno)
        surface = tuple(cols[0].lower().split())
        senses = tuple(s.strip() for s in cols[1].split(",") if s.strip())
        if not surface:
            raise FormatError("empty surface", path, lineno)
        if not senses:
            raise FormatError("empty senses column", path, lineno)
        pos = tuple(p.strip() for p in cols[2].split(",") if p.strip()) if len(cols) > 2 else ()
        usage = None
        if len(cols) > 3 and cols[3].strip():
            try:
                usage = parse_condition(cols[3])
            except ValueError as exc:
                raise FormatError(f"bad usage condition: {exc}", path, lineno) from None
        if (surface, senses) in seen:
            raise DuplicateEntryError(
                f"duplicate of line {seen[(surface, senses)]}", path, lineno)
        seen[(surface, senses)] = lineno
        entries.append(ConnectiveEntry(surface, language, senses, pos, usage))
    return Lexicon(language, entries)


# -- relation mapping -------------------------------------------------------

class RelationMapping:
    """Fine-grained relation label to top-level class.

    Class names themselves always map to their own class, which lets the
    English lexicon list classes directly as senses.
    """

    def __init__(self, table=None):
        self.table = {}
        for label, cls in (table or {}).items():
            cls = RelationClass(cls)
            if cls is RelationClass.NOREL:
                raise ValueError(f"label {label!r} cannot map to NoRel")
            self.table[label] = cls

    def __call__(self, label: str) -> RelationClass:
        return self.map(label)

    def __contains__(self, label):
        try:
            self.map(label)
        except MappingError:
            return False
        return True

    def map(self, label: str) -> RelationClass:
        if label in self.table:
            return self.table[label]
        for cls in REAL_CLASSES:
            if label == cls.value:
                return cls
        raise MappingError(f"relation label {label!r} has no class mapping")

    def check_total(self, lexicon: Lexicon) -> None:
        missing = sorted(s for s in lexicon.senses() if s not in self)
        if missing:
            raise MappingError(f"unmapped relation labels in lexicon: {', '.join(missing)}")


def load_mapping(path) -> RelationMapping:
    table = {}
    for lineno, line in _data_lines(path):
        cols = line.split("\t")
        if len(cols) != 2:
            raise FormatError("expected label<TAB>class", path, lineno)
        try:
            cls = RelationClass(cols[1].strip())
        except ValueError:
            raise FormatError(f"unknown relation class {cols[1]!r}", path, lineno) from None
        if cls is RelationClass.NOREL:
            raise FormatError("NoRel is not a mapping target", path, lineno)
        table[cols[0].strip()] = cls
    return RelationMapping(table)


def map_relation(label: str, mapping: Optional[RelationMapping] = None) -> RelationClass:
    return (mapping or default_mapping()).map(label)


def is_ambiguous(entry: ConnectiveEntry, mapping: Optional[RelationMapping] = None) -> bool:
    """True when the senses of ``entry`` fall in more than one class."""
    mapping = mapping or default_mapping()
    return len({mapping.map(s) for s in entry.senses}) > 1


# -- ambiguity rules --------------------------------------------------------

@dataclass(frozen=True)
class AmbiguityRule:
    surface: tuple
    condition: Condition
    sense_if_true: str
    sense_if_false: str

    @property
    def joined(self):
        return "_".join(self.surface)


def load_rules(path, lexicon: Optional[Lexicon] = None,
               mapping: Optional[RelationMapping] = None) -> list:
    """Load disambiguation rules, validating them against ``lexicon``."""
    rules = []
    for lineno, line in _data_lines(path):
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError("expected surface, condition, sense_true, sense_false", path, lineno)
        try:
            cond = parse_condition(cols[1])
        except ValueError as exc:
            raise FormatError(f"bad condition: {exc}", path, lineno) from None
        rule = AmbiguityRule(tuple(cols[0].lower().split()), cond,
                             cols[2].strip(), cols[3].strip())
        if lexicon is not None:
            entry = lexicon.get(rule.surface)
            if entry is None:
                raise FormatError(f"rule for unknown connective {cols[0]!r}", path, lineno)
            for sense in (rule.sense_if_true, rule.sense_if_false):
                if sense not in entry.senses:
                    raise FormatError(f"sense {sense!r} not listed for {cols[0]!r}", path, lineno)
            if mapping is not None and not is_ambiguous(entry, mapping):
                raise FormatError(f"rule for unambiguous connective {cols[0]!r}", path, lineno)
        rules.append(rule)
    return rules


# -- bundled resources ------------------------------------------------------

def data_path(name: str) -> Path:
    return Path(str(resources.files("disscore") / "data" / name))


_DEFAULT_MAPPING = None


def default_mapping() -> RelationMapping:
    global _DEFAULT_MAPPING
    if _DEFAULT_MAPPING is None:
        _DEFAULT_MAPPING = load_mapping(data_path("mapping.tsv"))
    return _DEFAULT_MAPPING


def default_fr_lexicon() -> Lexicon:
    lex = load_lexicon(data_path("fr_lexicon.tsv"), "fr")
    default_mapping().check_total(lex)
    return lex


def default_en_lexicon() -> Lexicon:
    lex = load_lexicon(data_path("en_lexicon.tsv"), "en")
    default_mapping().check_total(lex)
    return lex


def default_fr_rules() -> list:
    return load_rules(data_path("fr_rules.tsv"), default_fr_lexicon(), default_mapping())


def default_en_rules() -> list:
    return load_rules(data_path("en_rules.tsv"), default_en_lexicon(), default_mapping())
