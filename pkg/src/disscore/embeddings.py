"""Bilingual connective embeddings.

Training is skip-gram with negative sampling over one joint vocabulary in
which every token carries a language prefix (``fr:`` or ``en:``).  Besides
the usual monolingual windows, each token also predicts the tokens of the
other side that fall in a window around its diagonally aligned position:
source position ``i`` of ``|S|`` aligns to ``round(i * |T| / |S|)`` and the
converse holds for target tokens.  No word aligner is needed.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .detector import filter_discourse_usage, scan
from .errors import AlignmentError, FormatError, TrainingError
from .fsutil import atomic_open
from .lexicon import Lexicon
from .textmodel import Sentence

log = logging.getLogger(__name__)


def prefixed(token: str, language: str) -> str:
    prefix = language + ":"
    return token if token.startswith(prefix) else prefix + token


# -- corpus preprocessing ---------------------------------------------------

def hyphenate_sentence(sentence: Sentence, lexicon: Lexicon) -> Sentence:
    """Join every multiword connective used as a connective into one token."""
    cands = [c for c in scan(sentence, lexicon)
             if len(c.entry.surface) > 1 and filter_discourse_usage(c, sentence)]
    if not cands:
        return sentence
    words, tags = [], []
    i = 0
    for c in cands:
        for tok in sentence.tokens[i:c.start]:
            words.append(tok.surface)
            tags.append(tok.pos)
        first = sentence.tokens[c.start].surface
        joined = c.entry.joined
        if first[:1].isupper():
            joined = joined[:1].upper() + joined[1:]
        words.append(joined)
        tags.append(sentence.tokens[c.start].pos)
        i = c.end
    for tok in sentence.tokens[i:]:
        words.append(tok.surface)
        tags.append(tok.pos)
    return Sentence.from_words(words, sentence.language, tags)


def hyphenate_corpus(pairs: Iterable, fr_lexicon: Lexicon, en_lexicon: Lexicon) -> list:
    return [(hyphenate_sentence(fr, fr_lexicon), hyphenate_sentence(en, en_lexicon))
            for fr, en in pairs]


# -- model ------------------------------------------------------------------

@dataclass
class Hyperparameters:
    dimension: int = 100
    window: int = 5
    negative: int = 5
    epochs: int = 5
    sample: float = 1e-4
    alpha: float = 0.025
    min_alpha: float = 0.0001
    min_count: int = 2
    seed: int = 1
    threads: int = 1
    batch_size: int = 256

    def __post_init__(self):
        for name in ("dimension", "window", "negative", "epochs", "min_count", "threads",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.sample < 0 or self.alpha <= 0 or self.min_alpha < 0:
            raise ValueError("sample, alpha and min_alpha must be non-negative")


class EmbeddingModel:
    """Read-only token vectors for one joint bilingual space."""

    def __init__(self, tokens: Sequence[str], vectors, metadata: Optional[dict] = None):
        vectors = np.asarray(vectors, dtype=np.float64)
        tokens = list(tokens)
        if vectors.ndim != 2 or vectors.shape[0] != len(tokens):
            raise ValueError("need one vector row per token")
        if vectors.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors must be finite")
        self.tokens = tuple(tokens)
        self.vocab = {t: i for i, t in enumerate(self.tokens)}
        if len(self.vocab) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        for t in self.tokens:
            if not (t.startswith("fr:") or t.startswith("en:")):
                raise ValueError(f"token {t!r} lacks a language prefix")
        self.vectors = vectors
        self.vectors.setflags(write=False)
        norms = np.linalg.norm(vectors, axis=1)
        self._unit = vectors / np.where(norms > 0, norms, 1.0)[:, None]
        self.metadata = dict(metadata or {})

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.vectors[self.vocab[token]]

    def cosine(self, a: str, b: str) -> float:
        return float(self._unit[self.vocab[a]] @ self._unit[self.vocab[b]])

    def cosines(self, token: str, others: Sequence[str]) -> np.ndarray:
        rows = [self.vocab[o] for o in others]
        return self._unit[rows] @ self._unit[self.vocab[token]]

    def nearest(self, token: str, k: int = 10, prefix: Optional[str] = None) -> list:
        sims = self._unit @ self._unit[self.vocab[token]]
        order = sorted(range(len(self.tokens)), key=lambda i: (-sims[i], self.tokens[i]))
        out = []
        for i in order:
            t = self.tokens[i]
            if t == token or (prefix and not t.startswith(prefix)):
                continue
            out.append((t, float(sims[i])))
            if len(out) == k:
                break
        return out


class BackoffChain:
    """Ordered fallback over models; the first holding the query answers."""

    def __init__(self, models: Sequence[EmbeddingModel]):
        self.models = tuple(models)
        if not self.models:
            raise ValueError("a back-off chain needs at least one model")

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def answering(self, token: str):
        for k, model in enumerate(self.models):
            if token in model:
                return k, model
        return None, None


@dataclass(frozen=True)
class TranslationLikelihood:
    source: str
    candidates: tuple = ()
    model_index: Optional[int] = None
    mode: str = "softmax"

    @property
    def empty(self) -> bool:
        return not self.candidates

    def top(self, k: int) -> tuple:
        return self.candidates[:k]

    def probability(self, token: str) -> float:
        token = prefixed(token, "en")
        for cand, p in self.candidates:
            if cand == token:
                return p
        return 0.0


def softmax(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    e = np.exp(scores - scores.max())
    return e / e.sum()


def translation_likelihood(model_or_chain, fr_connective: str,
                           candidates: Optional[Iterable[str]] = None,
                           en_lexicon: Optional[Lexicon] = None,
                           mode: str = "softmax") -> TranslationLikelihood:
    """Rank English connectives as translations of a French one.

    Candidates default to the English lexicon's connectives (or every
    ``en:`` token when no lexicon is given) present in the answering
    model.  ``softmax`` turns cosines into probabilities; ``raw_cosine``
    reports cosines clipped to [0, 1].
    """
    if mode not in ("softmax", "raw_cosine"):
        raise ValueError(f"unknown mode {mode!r}")
    chain = model_or_chain if isinstance(model_or_chain, BackoffChain) else BackoffChain([model_or_chain])
    query = prefixed(fr_connective, "fr")
    k, model = chain.answering(query)
    if model is None:
        return TranslationLikelihood(query, (), None, mode)

    if candidates is not None:
        pool = [prefixed(c, "en") for c in candidates]
    elif en_lexicon is not None:
        pool = ["en:" + e.joined for e in en_lexicon]
    else:
        pool = [t for t in model.tokens if t.startswith("en:")]
    pool = sorted({c for c in pool if c in model})
    if not pool:
        return TranslationLikelihood(query, (), k, mode)

    cos = model.cosines(query, pool)
    if mode == "softmax":
        scores = softmax(cos)
    else:
        scores = np.clip(cos, 0.0, 1.0)
    ranked = sorted(zip(pool, scores.tolist()), key=lambda cp: (-cp[1], cp[0]))
    return TranslationLikelihood(query, tuple(ranked), k, mode)


# -- serialization ----------------------------------------------------------

def _meta_path(path) -> Path:
    return Path(str(path) + ".json")


def save_model(model: EmbeddingModel, path) -> None:
    """Plain-text vectors plus a JSON metadata sidecar at ``<path>.json``."""
    with atomic_open(path) as f:
        f.write(f"{len(model)} {model.dimension}\n")
        for tok, vec in zip(model.tokens, model.vectors):
            f.write(tok + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
    with atomic_open(_meta_path(path)) as f:
        json.dump(model.metadata, f, indent=2, sort_keys=True)
        f.write("\n")


def load_model(path) -> EmbeddingModel:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise FormatError("header must be '<vocab_size> <dimension>'", path, 1)
        size, dim = int(header[0]), int(header[1])
        if dim < 1:
            raise FormatError("dimension must be positive", path, 1)
        tokens, rows = [], []
        for lineno, line in enumerate(f, 2):
            if not line.strip():
                continue
            parts = line.rstrip("\r\n").split(" ")
            if len(parts) != dim + 1:
                raise FormatError(f"expected {dim} values, found {len(parts) - 1}", path, lineno)
            try:
                row = [float(x) for x in parts[1:]]
            except ValueError:
                raise FormatError("non-numeric vector component", path, lineno) from None
            if not all(math.isfinite(x) for x in row):
                raise FormatError("non-finite vector component", path, lineno)
            tokens.append(parts[0])
            rows.append(row)
    if len(tokens) != size:
        raise FormatError(f"header announces {size} tokens, file has {len(tokens)}", path)
    metadata = {}
    if _meta_path(path).exists():
        with open(_meta_path(path), encoding="utf-8") as f:
            metadata = json.load(f)
    try:
        return EmbeddingModel(tokens, np.array(rows, dtype=np.float64).reshape(len(rows), dim),
                              metadata)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def load_chain(paths: Sequence) -> BackoffChain:
    return BackoffChain([load_model(p) for p in paths])


# -- training ---------------------------------------------------------------

def _build_vocab(corpus, min_count):
    counts = {}
    for fr, en in corpus:
        for t in fr:
            counts[t] = counts.get(t, 0) + 1
        for t in en:
            counts[t] = counts.get(t, 0) + 1
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return kept, np.array([counts[t] for t in kept], dtype=np.float64)


def _window_pairs(ids, window):
    centers, contexts = [], []
    for d in range(1, window + 1):
        if d >= len(ids):
            break
        centers += [ids[:-d], ids[d:]]
        contexts += [ids[d:], ids[:-d]]
    return centers, contexts


def _cross_pairs(src, tgt, window):
    """Pairs from each ``src`` token to ``tgt`` tokens near its aligned position."""
    ns, nt = len(src), len(tgt)
    if ns == 0 or nt == 0:
        return [], []
    aligned = np.floor(np.arange(ns) * nt / ns + 0.5).astype(np.int64)
    aligned = np.minimum(aligned, nt - 1)
    centers, contexts = [], []
    for d in range(-window, window + 1):
        j = aligned + d
        ok = (j >= 0) & (j < nt)
        if ok.any():
            centers.append(src[ok])
            contexts.append(tgt[j[ok]])
    return centers, contexts


def _epoch_pairs(encoded, keep_prob, window, rng):
    centers, contexts = [], []
    for s_ids, t_ids in encoded:
        s = s_ids[rng.random(len(s_ids)) < keep_prob[s_ids]]
        t = t_ids[rng.random(len(t_ids)) < keep_prob[t_ids]]
        for seq in (s, t):
            c, x = _window_pairs(seq, window)
            centers += c
            contexts += x
        for a, b in ((s, t), (t, s)):
            c, x = _cross_pairs(a, b, window)
            centers += c
            contexts += x
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    centers = np.concatenate(centers)
    contexts = np.concatenate(contexts)
    order = rng.permutation(len(centers))
    return centers[order], contexts[order]


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sgd_shard(w_in, w_out, centers, contexts, cum_table, hp, lr_start, lr_end, rng):
    """Negative-sampling updates over one shard of pairs; returns summed loss."""
    total_loss = 0.0
    n = len(centers)
    for b in range(0, n, hp.batch_size):
        c = centers[b:b + hp.batch_size]
        o = contexts[b:b + hp.batch_size]
        lr = lr_start + (lr_end - lr_start) * (b / max(n, 1))
        neg = np.searchsorted(cum_table, rng.random((len(c), hp.negative)), side="right")
        v = w_in[c]
        u_pos = w_out[o]
        u_neg = w_out[neg]
        s_pos = np.einsum("bd,bd->b", v, u_pos)
        s_neg = np.einsum("bd,bkd->bk", v, u_neg)
        total_loss -= float(_log_sigmoid(s_pos).sum() + _log_sigmoid(-s_neg).sum())
        g_pos = 1.0 - 1.0 / (1.0 + np.exp(-s_pos))
        g_neg = -1.0 / (1.0 + np.exp(-s_neg))
        grad_v = g_pos[:, None] * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)
        np.add.at(w_out, o, lr * g_pos[:, None] * v)
        np.add.at(w_out, neg.ravel(), (lr * g_neg[:, :, None] * v[:, None, :]).reshape(-1, v.shape[1]))
        np.add.at(w_in, c, lr * grad_v)
    return total_loss


def train(pairs: Sequence, hyperparameters: Optional[Hyperparameters] = None,
          corpus_id: str = "", hyphenated: bool = False) -> EmbeddingModel:
    """Train joint fr/en vectors on sentence-aligned ``(fr, en)`` pairs.

    ``pairs`` hold Sentences or plain token lists.  With ``threads == 1`` the
    result is a pure function of the corpus and hyperparameters.  With more
    threads, shards of each epoch update the shared matrices concurrently
    without locking, so results vary run to run.
    """
    hp = hyperparameters or Hyperparameters()
    pairs = list(pairs)
    if not pairs:
        raise TrainingError("cannot train on an empty corpus")

    def side(sent, lang):
        if isinstance(sent, Sentence):
            if sent.language != lang:
                raise AlignmentError(f"expected a {lang} sentence, got {sent.language}")
            words = sent.lowers
        else:
            words = [w.lower() for w in sent]
        return [lang + ":" + w for w in words]

    corpus = []
    for n, pair in enumerate(pairs):
        if len(pair) != 2:
            raise AlignmentError(f"corpus item {n} is not a (fr, en) pair")
        corpus.append((side(pair[0], "fr"), side(pair[1], "en")))

    tokens, counts = _build_vocab(corpus, hp.min_count)
    if not tokens:
        raise TrainingError("no token reaches min_count")
    index = {t: i for i, t in enumerate(tokens)}
    encoded = [
        (np.array([index[t] for t in fr if t in index], dtype=np.int64),
         np.array([index[t] for t in en if t in index], dtype=np.int64))
        for fr, en in corpus
    ]

    freq = counts / counts.sum()
    if hp.sample > 0:
        keep_prob = np.minimum(1.0, (np.sqrt(freq / hp.sample) + 1.0) * hp.sample / freq)
    else:
        keep_prob = np.ones_like(freq)
    unigram = counts ** 0.75
    cum_table = np.cumsum(unigram / unigram.sum())
    cum_table[-1] = 1.0

    rng = np.random.default_rng(hp.seed)
    dim = hp.dimension
    w_in = (rng.random((len(tokens), dim)) - 0.5) / dim
    w_out = np.zeros((len(tokens), dim))

    loss_history = []
    for epoch in range(hp.epochs):
        centers, contexts = _epoch_pairs(encoded, keep_prob, hp.window, rng)
        span = hp.alpha - hp.min_alpha
        lr_start = hp.alpha - span * epoch / hp.epochs
        lr_end = hp.alpha - span * (epoch + 1) / hp.epochs
        if len(centers) == 0:
            loss_history.append(0.0)
            continue
        if hp.threads == 1:
            loss = _sgd_shard(w_in, w_out, centers, contexts, cum_table, hp, lr_start, lr_end, rng)
        else:
            bounds = np.linspace(0, len(centers), hp.threads + 1).astype(int)
            seeds = rng.spawn(hp.threads)
            with ThreadPoolExecutor(hp.threads) as pool:
                futures = [
                    pool.submit(_sgd_shard, w_in, w_out, centers[a:b], contexts[a:b],
                                cum_table, hp, lr_start, lr_end, r)
                    for (a, b), r in zip(zip(bounds[:-1], bounds[1:]), seeds)
                ]
                loss = sum(f.result() for f in futures)
        loss_history.append(loss / len(centers))
        log.info("epoch %d/%d: %d pairs, loss %.4f", epoch + 1, hp.epochs, len(centers),
                 loss_history[-1])

    metadata = {
        "hyphenated": hyphenated,
        "corpus_id": corpus_id,
        "hyperparameters": asdict(hp),
        "loss_history": loss_history,
        "sentence_pairs": len(pairs),
    }
    return EmbeddingModel(tokens, w_in, metadata)
