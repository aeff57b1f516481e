"""Tokens, sentences and parallel documents, plus the readers that build them."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

from .errors import AlignmentError, FormatError

LANGUAGES = ("fr", "en")

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)


@dataclass(frozen=True)
class Token:
    surface: str
    index: int
    pos: Optional[str] = None
    lower: str = field(default="", compare=True)
    sentence_initial: bool = field(default=False, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "lower", self.surface.lower())
        object.__setattr__(self, "sentence_initial", self.index == 0)

    @property
    def is_punct(self) -> bool:
        return not any(ch.isalnum() for ch in self.surface)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    language: str = "fr"

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValueError(f"token {tok.surface!r} has index {tok.index}, expected {i}")

    @classmethod
    def from_words(cls, words: Sequence[str], language: str = "fr",
                   pos: Optional[Sequence[Optional[str]]] = None) -> "Sentence":
        if pos is None:
            pos = [None] * len(words)
        if len(pos) != len(words):
            raise ValueError("words and pos differ in length")
        return cls(tuple(Token(w, i, p) for i, (w, p) in enumerate(zip(words, pos))), language)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @property
    def words(self) -> list:
        return [t.surface for t in self.tokens]

    @property
    def lowers(self) -> list:
        return [t.lower for t in self.tokens]

    @property
    def has_pos(self) -> bool:
        return any(t.pos is not None for t in self.tokens)

    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class ParallelDoc:
    """One source document with any number of sentence-aligned candidates."""

    doc_id: str
    source: tuple
    candidates: Mapping[str, tuple]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        frozen = {label: tuple(sents) for label, sents in self.candidates.items()}
        for label, sents in frozen.items():
            if len(sents) != len(self.source):
                raise AlignmentError(
                    f"candidate {label!r} has {len(sents)} sentences, "
                    f"source has {len(self.source)}")
        object.__setattr__(self, "candidates", MappingProxyType(frozen))

    @property
    def labels(self) -> list:
        return list(self.candidates)

    def __len__(self):
        return len(self.source)


# Elided French clitics (l', qu', jusqu', ...) become separate tokens, except
# in lexicalised words where the apostrophe is word-internal.
_FR_LEXICALISED = r"aujourd'hui|prud'hom\w*|presqu'[iî]le\w*|quelqu'un\w*"
_FR_TOKEN = re.compile(
    rf"(?i:{_FR_LEXICALISED})"
    r"|[^\W\d_]+'(?=\w)"
    r"|\d+(?:[.,]\d+)+"
    r"|\w+(?:-\w+)*"
    r"|\S"
)
_EN_TOKEN = re.compile(
    r"\d+(?:[.,]\d+)+"
    r"|\w+(?:['-]\w+)*"
    r"|\S"
)


def tokenize(text: str, language: str = "fr") -> Sentence:
    """Split one sentence of plain text into tokens.

    Typographic apostrophes are normalised to ``'`` so that ``l’`` and ``l'``
    look the same to the lexicon.
    """
    text = text.replace("’", "'").replace("ʼ", "'")
    pattern = _FR_TOKEN if language == "fr" else _EN_TOKEN
    return Sentence.from_words(pattern.findall(text), language)


def read_conllu(path, language: str = "fr") -> list:
    """Read a CoNLL-U file. POS comes from XPOS, falling back to UPOS."""
    path = Path(path)
    sentences = []
    words, tags = [], []

    def flush():
        if words:
            sentences.append(Sentence.from_words(words, language, tags))
            words.clear()
            tags.clear()

    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                flush()
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise FormatError(f"expected 10 tab-separated columns, found {len(cols)}",
                                  path, lineno)
            tid = cols[ID]
            # multiword ranges and empty nodes carry no syntactic word of their own
            if "-" in tid or "." in tid:
                continue
            if not tid.isdigit():
                raise FormatError(f"bad token id {tid!r}", path, lineno)
            if int(tid) != len(words) + 1:
                raise FormatError(f"token id {tid} out of sequence", path, lineno)
            pos = cols[XPOS] if cols[XPOS] != "_" else cols[UPOS]
            words.append(cols[FORM])
            tags.append(None if pos == "_" else pos)
    flush()
    return sentences


def write_conllu(sentences: Iterable[Sentence]) -> str:
    """Render sentences as CoNLL-U; POS is written to the XPOS column."""
    out = []
    for sent in sentences:
        for tok in sent:
            pos = tok.pos if tok.pos is not None else "_"
            cols = [str(tok.index + 1), tok.surface, "_", "_", pos, "_", "_", "_", "_", "_"]
            out.append("\t".join(cols))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def read_plain(path, language: str = "fr") -> list:
    with open(path, encoding="utf-8") as f:
        return [tokenize(line.rstrip("\r\n"), language) for line in f]


def read_sentences(path, language: str = "fr", fmt: str = "plain") -> list:
    if fmt == "plain":
        return read_plain(path, language)
    if fmt == "conllu":
        return read_conllu(path, language)
    raise ValueError(f"unknown format {fmt!r}")


def read_index(path) -> list:
    """Parse a ``doc_id<TAB>start<TAB>length`` document index."""
    spans = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError("expected doc_id, start, length", path, lineno)
            try:
                start, length = int(cols[1]), int(cols[2])
            except ValueError:
                raise FormatError("start and length must be integers", path, lineno) from None
            if start < 0 or length < 1:
                raise FormatError("start must be >= 0 and length >= 1", path, lineno)
            spans.append((cols[0], start, length, lineno))
    return spans


def load_parallel(source_path, candidate_paths: Mapping[str, object], fmt: str = "plain",
                  index_path=None, source_language: str = "fr",
                  target_language: str = "en") -> list:
    """Assemble sentence-aligned parallel documents.

    Without ``index_path`` each file is one document named after the source
    file's stem.
    """
    source = read_sentences(source_path, source_language, fmt)
    candidates = {}
    for label, path in candidate_paths.items():
        sents = read_sentences(path, target_language, fmt)
        if len(sents) != len(source):
            unit = "line" if fmt == "plain" else "sentence"
            raise AlignmentError(
                f"{len(sents)} {unit}s but source {source_path} has {len(source)}; "
                f"first unmatched {unit} is {min(len(sents), len(source)) + 1}",
                path, min(len(sents), len(source)) + 1)
        candidates[label] = sents

    if index_path is None:
        return [ParallelDoc(Path(source_path).stem, source, candidates)]

    docs = []
    for doc_id, start, length, lineno in read_index(index_path):
        if start + length > len(source):
            raise AlignmentError(
                f"document {doc_id!r} spans {start}..{start + length} past end ({len(source)})",
                index_path, lineno)
        docs.append(ParallelDoc(
            doc_id,
            source[start:start + length],
            {label: sents[start:start + length] for label, sents in candidates.items()},
        ))
    return docs
