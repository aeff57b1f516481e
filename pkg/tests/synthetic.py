"""Synthetic parallel corpora with planted connective translations.

Each planted pair owns a topic: sentences using that pair draw most of their
filler from the topic's word list, in word-by-word parallel form on both
sides.  A connective and its partner therefore share contexts while other
connectives do not, which forces the partner to be the nearest English
connective.
"""

import numpy as np

PLANTED = [
    ("parce_que", "because"),
    ("donc", "therefore"),
    ("mais", "but"),
    ("pour_que", "so_that"),
    ("si", "if"),
    ("lorsque", "when"),
    ("cependant", "however"),
    ("ensuite", "then"),
    ("par_exemple", "for_example"),
    ("bien_que", "although"),
]


def planted_corpus(n_pairs=5000, topic_words=30, shared_words=60, seed=0, planted=PLANTED):
    rng = np.random.default_rng(seed)
    pairs = []
    for n in range(n_pairs):
        k = n % len(planted)
        fr_conn, en_conn = planted[k]
        length = int(rng.integers(6, 12))
        fr_words, en_words = [], []
        for _ in range(length):
            if rng.random() < 0.8:
                w = int(rng.integers(topic_words))
                fr_words.append(f"mot{k}x{w}")
                en_words.append(f"word{k}x{w}")
            else:
                w = int(rng.integers(shared_words))
                fr_words.append(f"commun{w}")
                en_words.append(f"common{w}")
        pos = int(rng.integers(1, length))
        fr_words.insert(pos, fr_conn)
        en_words.insert(pos, en_conn)
        pairs.append((fr_words, en_words))
    return pairs


# Staged vocabularies for the back-off chain: each French connective first
# appears in the listed chain element.
STAGED_EXPECTED = {"donc": 0, "parce_que": 1, "pour_que": 2, "afin_que": None}


def staged_chain():
    from disscore.embeddings import BackoffChain, EmbeddingModel

    en = ["en:because", "en:therefore", "en:so_that"]
    en_vecs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    stages = [
        {"fr:donc": [0.1, 0.9, 0.0]},
        {"fr:donc": [0.9, 0.1, 0.0], "fr:parce_que": [0.9, 0.0, 0.1]},
        {"fr:donc": [0.0, 0.0, 1.0], "fr:parce_que": [0.0, 1.0, 0.0],
         "fr:pour_que": [0.1, 0.0, 0.9]},
    ]
    models = []
    for stage in stages:
        toks = list(stage) + en
        models.append(EmbeddingModel(toks, list(stage.values()) + en_vecs))
    return BackoffChain(models)
