import math
import random

import pytest
from hypothesis import given, strategies as st

from oracles import kendall_enumerate, pearson_exact
from disscore.errors import FormatError, InputError, UndefinedStatisticError
from disscore.evalharness import (
    DECISION_TABLE,
    VARIANTS,
    Judgment,
    combine_linear,
    kendall_per_system,
    kendall_wmt,
    lig_reference_check,
    nonzero_segments,
    pearson,
    read_judgments,
    read_segment_scores,
    read_system_scores,
    system_correlation,
    tally_values,
    win_tally,
)
from disscore.embeddings import load_model
from disscore.lexicon import data_path
from disscore.scorer import Resources
from disscore.textmodel import load_parallel


def test_tally_fixture():
    t = tally_values([(1, 0), (0, 1), (0.5, 0.5)])
    assert (t.wins_a, t.wins_b, t.ties, t.total) == (1, 1, 1, 3)
    assert t.pct(t.wins_a) == 33.3
    assert tally_values([(0.3, 0.3 + 1e-12)]).ties == 1


@given(st.lists(st.tuples(st.floats(0, 2), st.floats(0, 2)), max_size=30))
def test_tally_partition(pairs):
    t = tally_values(pairs)
    assert t.wins_a + t.wins_b + t.ties == t.total == len(pairs)


def _fixture():
    fx = data_path("fixture")
    docs = load_parallel(fx / "fr.txt", {"PE": fx / "pe.txt", "MT": fx / "mt.txt"},
                         index_path=fx / "index.tsv")
    return docs, Resources.bundled(load_model(fx / "model.vec"))


def test_win_tally_fixture():
    docs, res = _fixture()
    t = win_tally(docs, "PE", "MT", res)
    assert (t.wins_a, t.wins_b, t.ties) == (2, 1, 1)
    same = win_tally(docs, "PE", "PE", res)
    assert same.ties == same.total == 4
    with pytest.raises(InputError):
        win_tally(docs, "PE", "HT", res)


def test_lig_reference_is_informational():
    t = tally_values([(1, 0)] * 281 + [(0, 1)] * 80)
    check = lig_reference_check(t)
    assert check["gating"] is False
    assert check["pe_ge_mt_fraction"] == pytest.approx(281 / 361)
    assert check["within_tolerance"]


def test_pearson_examples():
    xs = [1.0, 2.0, 4.0, 7.0]
    assert pearson(xs, xs) == 1.0
    assert pearson(xs, [-x for x in xs]) == -1.0
    with pytest.raises(UndefinedStatisticError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedStatisticError):
        pearson([1], [2])
    # mean of three 0.003s rounds away from 0.003
    with pytest.raises(UndefinedStatisticError):
        pearson([0.0, 0.0, 0.001], [0.003, 0.003, 0.003])
    with pytest.raises(InputError):
        pearson([1, 2], [1])


finite = st.integers(-10**6, 10**6).map(lambda i: i / 1000)


@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=50),
       st.floats(0.1, 10), st.floats(-10, 10))
def test_pearson_properties(points, scale, shift):
    xs, ys = [p[0] for p in points], [p[1] for p in points]
    try:
        r = pearson(xs, ys)
    except UndefinedStatisticError:
        return
    assert -1 <= r <= 1
    assert r == pytest.approx(pearson(ys, xs), abs=1e-12)
    assert r == pytest.approx(pearson_exact(xs, ys), abs=1e-9)
    try:
        r2 = pearson([scale * x + shift for x in xs], ys)
    except UndefinedStatisticError:
        return
    assert r2 == pytest.approx(r, abs=1e-6)


def test_decision_table_complete():
    for v in VARIANTS:
        for rel in ("agree", "tie", "disagree"):
            assert (v, False, rel) in DECISION_TABLE
        for rel in ("tie", "differ"):
            assert (v, True, rel) in DECISION_TABLE


def tie_fixture():
    judgments = [Judgment(str(i), "A", "B", "a") for i in range(5)]
    metric = {("A", str(i)): 1.0 for i in range(5)}
    metric.update({("B", str(i)): 0.0 for i in range(4)})
    metric[("B", "4")] = 1.0
    return judgments, metric


def test_kendall_tie_fixture():
    j, m = tie_fixture()
    assert kendall_wmt(j, m, "wmt12") == pytest.approx(0.6)
    assert kendall_wmt(j, m, "wmt13") == 1.0
    assert kendall_wmt(j, m, "xties") == pytest.approx(0.8)
    assert kendall_wmt(j, m, "wmt12") < kendall_wmt(j, m, "wmt13")


def test_kendall_all_concordant():
    j = [Judgment("1", "A", "B", "a"), Judgment("2", "B", "A", "a"), Judgment("3", "A", "B", "b")]
    m = {("A", "1"): 2, ("B", "1"): 1, ("A", "2"): 0, ("B", "2"): 3, ("A", "3"): 0, ("B", "3"): 1}
    for v in VARIANTS:
        assert kendall_wmt(j, m, v) == 1.0


def test_kendall_errors():
    with pytest.raises(UndefinedStatisticError):
        kendall_wmt([Judgment("1", "A", "B", "tie")], {("A", "1"): 0, ("B", "1"): 1}, "wmt13")
    with pytest.raises(InputError):
        kendall_wmt([Judgment("1", "A", "B", "a")], {}, "wmt13")
    with pytest.raises(ValueError):
        kendall_wmt([], {}, "wmt99")
    with pytest.raises(ValueError):
        Judgment("1", "A", "B", "maybe")


def random_judgments(rng, n_segments, systems=("A", "B", "C")):
    metric = {(s, str(k)): rng.choice([0.0, 0.5, 1.0, rng.random()])
              for s in systems for k in range(n_segments)}
    judgments = []
    for k in range(n_segments):
        a, b = rng.sample(systems, 2)
        judgments.append(Judgment(str(k), a, b, rng.choice(["a", "b", "tie"])))
    return judgments, metric


@pytest.mark.parametrize("seed", range(25))
def test_kendall_matches_enumeration(seed):
    rng = random.Random(seed)
    j, m = random_judgments(rng, rng.randint(1, 50))
    for v in VARIANTS:
        expected = kendall_enumerate(j, m, v)
        if expected is None:
            with pytest.raises(UndefinedStatisticError):
                kendall_wmt(j, m, v)
        else:
            assert kendall_wmt(j, m, v) == pytest.approx(expected, abs=1e-12)


def test_kendall_per_system_and_nonzero():
    j, m = tie_fixture()
    assert kendall_per_system(j, m, "wmt13") == {"A": 1.0, "B": 1.0}
    assert nonzero_segments(m) == {"A": 5, "B": 1}


def test_combine_linear():
    m1 = {"s1": 1.0, "s2": 2.0, "s3": 4.0}
    m2 = {"s1": 3.0, "s2": 1.0, "s3": 0.0}
    combined, r = combine_linear([m1, m2], [1, 0])
    assert combined == m1 and r is None
    human = {"s1": 2.0, "s2": 3.0, "s3": 5.0}
    combined, r = combine_linear([m1, m2], [0.5, 0.5], human)
    assert combined == {"s1": 2.0, "s2": 1.5, "s3": 2.0}
    # hand computation: combined deviations (1/6, -1/3, 1/6) against human (-4/3, -1/3, 5/3)
    assert r == pytest.approx(pearson_exact([2.0, 1.5, 2.0], [2.0, 3.0, 5.0]), abs=1e-12)
    assert r == pytest.approx(1 / (2 * math.sqrt(7)), abs=1e-12)
    with pytest.raises(InputError):
        combine_linear([m1, {"s1": 1.0}], [1, 1])
    with pytest.raises(InputError):
        combine_linear([m1], [1, 2])


def test_system_correlation_needs_same_systems():
    with pytest.raises(InputError):
        system_correlation({"a": 1, "b": 2}, {"a": 1, "c": 2})


def test_csv_readers(tmp_path):
    p = tmp_path / "j.csv"
    p.write_text("segment_id,system_a,system_b,preference\n1,A,B,a\n2,A,B,tie\n")
    assert read_judgments(p)[1] == Judgment("2", "A", "B", "tie")
    p.write_text("1,A,B,maybe\n")
    with pytest.raises(FormatError) as exc:
        read_judgments(p)
    assert exc.value.line == 1
    p.write_text("segment_id,system,score\n1,A,0.5\n")
    assert read_segment_scores(p) == {("A", "1"): 0.5}
    p.write_text("system,score\nA,1\nA,2\n")
    with pytest.raises(FormatError) as exc:
        read_system_scores(p)
    assert exc.value.line == 3
    p.write_text("A,1,2\n")
    with pytest.raises(FormatError):
        read_system_scores(p)
