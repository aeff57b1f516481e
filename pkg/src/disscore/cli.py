"""Command line entry point.

Every flag can also be set through an environment variable named
``DISSCORE_<FLAG>`` (upper case, dashes as underscores), e.g.
``DISSCORE_GAMMA=0.1``.  Exit status is 0 on success, 1 for bad input and 2
when an internal invariant breaks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .detector import DetectionReport, detect
from .embeddings import Hyperparameters, hyphenate_corpus, load_chain, save_model, train, \
    translation_likelihood
from .errors import DisscoreError, InputError
from .evalharness import (
    VARIANTS,
    combine_linear,
    kendall_per_system,
    kendall_wmt,
    lig_reference_check,
    nonzero_segments,
    read_judgments,
    read_segment_scores,
    read_system_scores,
    system_correlation,
    tally_values,
)
from .fsutil import atomic_open
from .lexicon import data_path, load_lexicon, load_mapping, load_rules
from .scorer import Resources, ScoreConfig, calibrate_gamma, detect_source, score_document
from .textmodel import load_parallel, read_index, read_sentences

log = logging.getLogger("disscore")

ENV_PREFIX = "DISSCORE_"


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def _add_resources(p, fr=True, en=True, models=False, models_required=False):
    if fr:
        p.add_argument("--fr-lexicon", default=str(data_path("fr_lexicon.tsv")))
        p.add_argument("--fr-rules", default=str(data_path("fr_rules.tsv")))
    if en:
        p.add_argument("--en-lexicon", default=str(data_path("en_lexicon.tsv")))
        p.add_argument("--en-rules", default=str(data_path("en_rules.tsv")))
    if fr or en:
        p.add_argument("--mapping", default=str(data_path("mapping.tsv")))
    if models:
        p.add_argument("--models", nargs="+", required=models_required,
                       help="embedding models in back-off order")


def _add_corpus(p, cand=True):
    p.add_argument("--src", required=True, help="French source, one sentence per line")
    if cand:
        p.add_argument("--cand", action="append", default=[],
                       help="candidate as LABEL=PATH, or PATH paired with --label")
        p.add_argument("--label", action="append", default=[])
    p.add_argument("--format", choices=("plain", "conllu"), default="plain")
    p.add_argument("--index", help="document index: doc_id<TAB>start<TAB>length")


def _add_score_config(p):
    p.add_argument("--gamma", type=float, default=0.045)
    p.add_argument("--mode", choices=("additive", "multiplicative"), default="additive")
    p.add_argument("--dc-mode", choices=("softmax", "raw_cosine"), default="softmax")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--no-normalize", action="store_true",
                   help="do not divide connective terms by the sentence's connective count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="disscore", description="Reference-free discourse connective MT metric.")
    parser.add_argument("--version", action="store_true", help="print version as JSON and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--print-config", action="store_true")
        p.add_argument("--verbose", "-v", action="store_true")
        return p

    p = common(sub.add_parser("train", help="train bilingual connective embeddings"))
    p.add_argument("--fr", required=True)
    p.add_argument("--en", required=True)
    p.add_argument("--format", choices=("plain", "conllu"), default="plain")
    p.add_argument("--no-hyphenate", action="store_true")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negative", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--sample", type=float, default=1e-4)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--min-alpha", type=float, default=0.0001)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--corpus-id", default="")
    p.add_argument("--out", required=True)
    _add_resources(p)
    p.set_defaults(threads=1)

    for name, lang in (("detect", "fr"), ("tag", "en")):
        p = common(sub.add_parser(name, help=f"detect {lang} connectives, JSON lines out"))
        p.add_argument("--input", required=True)
        p.add_argument("--format", choices=("plain", "conllu"), default="plain")
        p.add_argument("--index")
        p.add_argument("--out", default="-")
        _add_resources(p, fr=lang == "fr", en=lang == "en")
        p.set_defaults(lang=lang)

    p = common(sub.add_parser("query", help="rank English translations of a French connective"))
    p.add_argument("--connective", required=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--dc-mode", choices=("softmax", "raw_cosine"), default="softmax")
    p.add_argument("--out", default="-")
    _add_resources(p, fr=False, models=True, models_required=True)

    p = common(sub.add_parser("score", help="score candidate translations per document"))
    _add_corpus(p)
    _add_resources(p, models=True, models_required=True)
    _add_score_config(p)
    p.add_argument("--out", default="-", help="JSON report")
    p.add_argument("--csv", help="CSV summary, one row per document and label "
                   "(default: next to --out with a .csv suffix)")

    p = common(sub.add_parser("calibrate", help="grid-search gamma by cross-validation"))
    _add_corpus(p)
    _add_resources(p, models=True, models_required=True)
    _add_score_config(p)
    p.add_argument("--grid", type=_floats, default=[0.001, 0.01, 0.045, 0.1, 0.5, 1.0, 10.0])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--better", default="PE")
    p.add_argument("--worse", default="MT")
    p.add_argument("--out", default="-")

    p = common(sub.add_parser("evaluate", help="win/tie/loss, system and segment correlations"))
    p.add_argument("--fixture", action="store_true", help="use the bundled 4-document fixture")
    p.add_argument("--src")
    p.add_argument("--cand", action="append", default=[])
    p.add_argument("--label", action="append", default=[])
    p.add_argument("--format", choices=("plain", "conllu"), default="plain")
    p.add_argument("--index")
    p.add_argument("--a", dest="label_a", default="PE")
    p.add_argument("--b", dest="label_b", default="MT")
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--lig", action="store_true",
                   help="report the PE>=MT fraction against the LIG reference point")
    p.add_argument("--judgments", help="CSV segment_id,system_a,system_b,preference")
    p.add_argument("--segment-scores", help="CSV segment_id,system,score")
    p.add_argument("--system-scores", help="CSV system,score")
    p.add_argument("--human", help="CSV system,score of human judgements")
    p.add_argument("--out", default="-")
    _add_resources(p, models=True)
    _add_score_config(p)

    p = common(sub.add_parser("combine", help="linear combination of system-level metrics"))
    p.add_argument("--metric", action="append", required=True, help="CSV system,score")
    p.add_argument("--weights", type=_floats, required=True)
    p.add_argument("--human", help="CSV system,score of human judgements")
    p.add_argument("--out", default="-")

    _apply_env(parser)
    return parser


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def _apply_env(parser):
    for sp in [parser, *_subparsers(parser).values()]:
        for action in sp._actions:
            if not action.option_strings or action.dest in ("help", "command"):
                continue
            name = ENV_PREFIX + action.option_strings[-1].lstrip("-").replace("-", "_").upper()
            if name not in os.environ:
                continue
            raw = os.environ[name]
            if isinstance(action, (argparse._StoreTrueAction,)):
                value = raw.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._AppendAction) or action.nargs in ("+", "*"):
                conv = action.type or str
                value = [conv(x) for x in raw.split(os.pathsep if os.pathsep in raw else None)]
            else:
                value = action.type(raw) if action.type else raw
            action.default = value
            action.required = False


# -- helpers ----------------------------------------------------------------

def _check_paths(*paths):
    for p in paths:
        if p is None:
            continue
        if not Path(p).is_file():
            raise InputError(f"file not found: {p}")


def _candidates(args) -> dict:
    out = {}
    labels = list(args.label)
    for item in args.cand:
        if "=" in item:
            label, path = item.split("=", 1)
        elif labels:
            label, path = labels.pop(0), item
        else:
            label, path = Path(item).stem, item
        if label in out:
            raise InputError(f"candidate label {label!r} given twice")
        out[label] = path
    return out


def _resources(args) -> Resources:
    if not args.models:
        raise InputError("--models is required")
    mapping = load_mapping(args.mapping)
    fr = load_lexicon(args.fr_lexicon, "fr")
    en = load_lexicon(args.en_lexicon, "en")
    fr_rules = load_rules(args.fr_rules, fr, mapping)
    en_rules = load_rules(args.en_rules, en, mapping)
    return Resources(fr, en, load_chain(args.models), mapping, fr_rules, en_rules)


def _score_config(args) -> ScoreConfig:
    return ScoreConfig(args.gamma, args.mode, args.dc_mode, args.top_k, not args.no_normalize)


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    return atomic_open(path)


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _pmap(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _config_dict(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("print_config",)}
    return json.loads(json.dumps(d, default=str))


# -- commands ---------------------------------------------------------------

def cmd_train(args):
    _check_paths(args.fr, args.en, args.fr_lexicon, args.en_lexicon, args.mapping)
    fr = read_sentences(args.fr, "fr", args.format)
    en = read_sentences(args.en, "en", args.format)
    if len(fr) != len(en):
        raise InputError(f"{args.fr} has {len(fr)} sentences but {args.en} has {len(en)}")
    pairs = list(zip(fr, en))
    if not args.no_hyphenate:
        pairs = hyphenate_corpus(pairs, load_lexicon(args.fr_lexicon, "fr"),
                                 load_lexicon(args.en_lexicon, "en"))
    hp = Hyperparameters(args.dim, args.window, args.negative, args.epochs, args.sample,
                         args.alpha, args.min_alpha, args.min_count, args.seed, args.threads,
                         args.batch_size)
    model = train(pairs, hp, corpus_id=args.corpus_id or Path(args.fr).stem,
                  hyphenated=not args.no_hyphenate)
    save_model(model, args.out)
    print(json.dumps({"out": args.out, "vocab": len(model), "dimension": model.dimension,
                      "loss_history": model.metadata["loss_history"]}))


def _doc_spans(n, index_path, default_id):
    if index_path is None:
        return [(default_id, 0, n)]
    return [(doc_id, start, length) for doc_id, start, length, _ in read_index(index_path)]


def cmd_detect(args):
    lang = args.lang
    lex_path = args.fr_lexicon if lang == "fr" else args.en_lexicon
    rules_path = args.fr_rules if lang == "fr" else args.en_rules
    _check_paths(args.input, args.index, lex_path, rules_path, args.mapping)
    mapping = load_mapping(args.mapping)
    lexicon = load_lexicon(lex_path, lang)
    mapping.check_total(lexicon)
    rules = load_rules(rules_path, lexicon, mapping)
    sents = read_sentences(args.input, lang, args.format)
    report = DetectionReport()

    def run(sent):
        return detect(sent, lexicon, mapping, rules, report)

    detections = _pmap(run, sents, args.threads)
    with _open_out(args.out) as f:
        for doc_id, start, length in _doc_spans(len(sents), args.index, Path(args.input).stem):
            for i in range(start, min(start + length, len(sents))):
                for det in detections[i]:
                    rec = {"doc_id": doc_id, "sent_index": i - start, **det.to_dict()}
                    f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    for w in sorted(set(report.warnings)):
        print(f"warning: {w}", file=sys.stderr)


def cmd_query(args):
    _check_paths(*args.models, args.en_lexicon)
    chain = load_chain(args.models)
    en = load_lexicon(args.en_lexicon, "en")
    tl = translation_likelihood(chain, args.connective, en_lexicon=en, mode=args.dc_mode)
    with _open_out(args.out) as f:
        f.write("rank\tcandidate\tprobability\tmodel_index\n")
        for rank, (cand, p) in enumerate(tl.top(args.top_k), 1):
            f.write(f"{rank}\t{cand[3:]}\t{p:.6f}\t{tl.model_index}\n")
    if tl.empty:
        print(f"warning: no equivalent for {args.connective!r} in any model", file=sys.stderr)


def _load_docs(args):
    cands = _candidates(args)
    if not cands:
        raise InputError("at least one --cand is required")
    _check_paths(args.src, args.index, *cands.values())
    return load_parallel(args.src, cands, args.format, args.index), list(cands)


def _check_resource_paths(args):
    _check_paths(args.fr_lexicon, args.en_lexicon, args.mapping, args.fr_rules, args.en_rules,
                 *(args.models or []))


def cmd_score(args):
    _check_resource_paths(args)
    docs, labels = _load_docs(args)
    resources = _resources(args)
    config = _score_config(args)

    def run(doc):
        dets = [detect_source(s, resources) for s in doc.source]
        return [score_document(doc, label, resources, config, dets) for label in labels]

    results = [s for per_doc in _pmap(run, docs, args.threads) for s in per_doc]
    if args.csv is None and args.out not in (None, "-"):
        args.csv = str(Path(args.out).with_suffix(".csv"))
    report = {"config": {"gamma": config.gamma, "mode": config.combination_mode,
                         "dc_mode": config.dc_mode, "top_k": config.candidate_top_k,
                         "normalize": config.normalize},
              "documents": [r.to_dict() for r in results]}
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["doc_id", "label", "value", "N", "sentences_with_connectives"])
        for r in results:
            w.writerow([r.doc_id, r.label, repr(r.value), r.N, sum(s.M > 0 for s in r.sentences)])
    with _open_out(args.out) as f:
        json.dump(report, f, indent=1, ensure_ascii=False)
        f.write("\n")
    if args.csv:
        with atomic_open(args.csv) as f:
            f.write(buf.getvalue())


def cmd_calibrate(args):
    _check_resource_paths(args)
    docs, _ = _load_docs(args)
    resources = _resources(args)
    gamma, objective = calibrate_gamma(docs, args.grid, resources, _score_config(args),
                                       args.folds, args.seed, args.better, args.worse)
    with _open_out(args.out) as f:
        json.dump({"gamma": gamma, "objective": {repr(k): v for k, v in objective.items()},
                   "folds": args.folds, "seed": args.seed}, f, indent=1)
        f.write("\n")


FIXTURE_FILES = ("fr.txt", "pe.txt", "mt.txt", "index.tsv", "model.vec")


def cmd_evaluate(args):
    if args.fixture:
        fx = data_path("fixture")
        args.src = str(fx / "fr.txt")
        args.cand = [f"PE={fx / 'pe.txt'}", f"MT={fx / 'mt.txt'}"]
        args.index = str(fx / "index.tsv")
        args.models = [str(fx / "model.vec")]
    report = {}
    if args.src:
        _check_resource_paths(args)
        docs, _ = _load_docs(args)
        resources = _resources(args)
        config = _score_config(args)

        def run(doc):
            dets = [detect_source(s, resources) for s in doc.source]
            return (score_document(doc, args.label_a, resources, config, dets).value,
                    score_document(doc, args.label_b, resources, config, dets).value)

        values = _pmap(run, docs, args.threads)
        tally = tally_values(values, args.epsilon, args.label_a, args.label_b)
        report["tally"] = tally.to_dict()
        if args.lig:
            report["lig_reference"] = lig_reference_check(tally)
    if args.judgments or args.segment_scores:
        if not (args.judgments and args.segment_scores):
            raise InputError("--judgments and --segment-scores go together")
        _check_paths(args.judgments, args.segment_scores)
        judgments = read_judgments(args.judgments)
        metric = read_segment_scores(args.segment_scores)
        report["kendall"] = {v: kendall_wmt(judgments, metric, v) for v in VARIANTS}
        report["kendall_per_system"] = {v: kendall_per_system(judgments, metric, v) for v in VARIANTS}
        report["nonzero_segments"] = nonzero_segments(metric)
    if args.system_scores or args.human:
        if not (args.system_scores and args.human):
            raise InputError("--system-scores and --human go together")
        _check_paths(args.system_scores, args.human)
        report["pearson"] = system_correlation(read_system_scores(args.system_scores),
                                               read_system_scores(args.human))
    if not report:
        raise InputError("nothing to evaluate: give --src/--cand, --fixture, "
                         "--judgments/--segment-scores or --system-scores/--human")
    with _open_out(args.out) as f:
        json.dump(report, f, indent=1, sort_keys=True)
        f.write("\n")


def cmd_combine(args):
    _check_paths(*args.metric, args.human)
    metrics = [read_system_scores(p) for p in args.metric]
    human = read_system_scores(args.human) if args.human else None
    combined, r = combine_linear(metrics, args.weights, human)
    with _open_out(args.out) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["system", "score"])
        for system, score in combined.items():
            w.writerow([system, repr(score)])
    if r is not None:
        print(json.dumps({"pearson": r}), file=sys.stderr)


COMMANDS = {
    "train": cmd_train,
    "detect": cmd_detect,
    "tag": cmd_detect,
    "query": cmd_query,
    "score": cmd_score,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
    "combine": cmd_combine,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version:
            print(json.dumps({"name": "disscore", "version": __version__}))
            return 0
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        if args.print_config:
            print(json.dumps(_config_dict(args), indent=1, sort_keys=True))
            return 0
        COMMANDS[args.command](args)
        return 0
    except (DisscoreError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
