import pytest
from hypothesis import given, strategies as st

from disscore.detector import scan
from disscore.errors import DuplicateEntryError, FormatError, MappingError
from disscore.lexicon import (
    ConnectiveEntry,
    Lexicon,
    RelationClass,
    RelationMapping,
    default_en_lexicon,
    default_fr_lexicon,
    default_fr_rules,
    default_en_rules,
    default_mapping,
    is_ambiguous,
    load_lexicon,
    load_mapping,
    load_rules,
    map_relation,
    parse_condition,
)
from disscore.textmodel import Sentence


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_relation_class_values():
    assert [c.value for c in RelationClass] == ["Temporal", "Comparison", "Contingency", "Expansion", "NoRel"]


def test_load_lexicon_rows(tmp_path):
    p = write(tmp_path, "lex.tsv", "parce que\tcause\tCS\nmais\tcontrast,violation\tCC\n")
    lex = load_lexicon(p, "fr")
    e = lex.get("parce que")
    assert e.surface == ("parce", "que") and e.senses == ("cause",) and e.pos_categories == ("CS",)
    assert e.joined == "parce_que"
    assert lex.get("mais").senses == ("contrast", "violation")
    assert lex.get(("mais",)) is lex.get("mais")


def test_load_lexicon_empty_senses(tmp_path):
    p = write(tmp_path, "lex.tsv", "donc\tresult\nparce que\t\tCS\n")
    with pytest.raises(FormatError) as exc:
        load_lexicon(p, "fr")
    assert exc.value.line == 2


def test_load_lexicon_duplicate(tmp_path):
    p = write(tmp_path, "lex.tsv", "donc\tresult\n# c\nDonc\tresult\tADV\n")
    with pytest.raises(DuplicateEntryError) as exc:
        load_lexicon(p, "fr")
    assert exc.value.line == 3


def test_load_lexicon_bad_usage(tmp_path):
    p = write(tmp_path, "lex.tsv", "si\tcondition\tCS\tNOPE=x\n")
    with pytest.raises(FormatError):
        load_lexicon(p, "fr")


def test_entry_invariants():
    with pytest.raises(ValueError):
        ConnectiveEntry(("Mais",), "fr", ("contrast",))
    with pytest.raises(ValueError):
        ConnectiveEntry(("mais",), "fr", ())
    with pytest.raises(DuplicateEntryError):
        Lexicon("fr", [ConnectiveEntry(("a",), "fr", ("x",))] * 2)


def test_map_relation_examples():
    assert map_relation("contrast") is RelationClass.COMPARISON
    assert map_relation("violation") is RelationClass.COMPARISON
    assert map_relation("goal") is RelationClass.CONTINGENCY
    assert map_relation("result") is RelationClass.CONTINGENCY
    assert map_relation("Temporal") is RelationClass.TEMPORAL
    with pytest.raises(MappingError, match="frobnicate"):
        map_relation("frobnicate")


def test_mapping_never_norel(tmp_path):
    with pytest.raises(FormatError):
        load_mapping(write(tmp_path, "m.tsv", "cause\tNoRel\n"))
    with pytest.raises(FormatError):
        load_mapping(write(tmp_path, "m.tsv", "cause\tCausal\n"))
    assert all(c is not RelationClass.NOREL for c in default_mapping().table.values())
    assert len(default_mapping().table) == 30


def test_mapping_is_total_over_bundled_lexicons():
    m = default_mapping()
    m.check_total(default_fr_lexicon())
    m.check_total(default_en_lexicon())
    with pytest.raises(MappingError):
        RelationMapping({}).check_total(default_fr_lexicon())


def test_is_ambiguous_examples():
    lex = default_fr_lexicon()
    assert not is_ambiguous(lex.get("mais"))
    assert is_ambiguous(lex.get("aussi"))
    assert {map_relation(s) for s in lex.get("aussi").senses} == {
        RelationClass.CONTINGENCY, RelationClass.EXPANSION}
    assert not is_ambiguous(lex.get("parce que"))


def test_every_rule_targets_an_ambiguous_entry():
    for lex, rules in ((default_fr_lexicon(), default_fr_rules()),
                       (default_en_lexicon(), default_en_rules())):
        for r in rules:
            entry = lex.get(r.surface)
            assert is_ambiguous(entry)
            assert {r.sense_if_true, r.sense_if_false} <= set(entry.senses)


def test_french_rules_cover_the_cited_ambiguous_connectives():
    covered = {r.joined for r in default_fr_rules()}
    assert covered == {"après", "aussi", "alors_que", "depuis_que", "en", "tandis_que",
                       "même", "si", "tout_d'_abord"}


def test_load_rules_validation(tmp_path):
    lex = default_fr_lexicon()
    m = default_mapping()
    with pytest.raises(FormatError, match="not listed"):
        load_rules(write(tmp_path, "r.tsv", "aussi\tSENTENCE_INITIAL\tresult\tcause\n"), lex, m)
    with pytest.raises(FormatError, match="unambiguous"):
        load_rules(write(tmp_path, "r.tsv", "mais\tSENTENCE_INITIAL\tcontrast\tviolation\n"), lex, m)
    with pytest.raises(FormatError, match="unknown connective"):
        load_rules(write(tmp_path, "r.tsv", "zzz\tSENTENCE_INITIAL\ta\tb\n"), lex, m)
    with pytest.raises(FormatError):
        load_rules(write(tmp_path, "r.tsv", "aussi\tSENTENCE_INITIAL\tresult\n"), lex, m)


def test_condition_language():
    s = Sentence.from_words(["Après", "tout", ",", "il", "part", "."], "fr",
                            ["P", "ADV", "PONCT", "CLS", "V", "PONCT"])
    assert parse_condition("SENTENCE_INITIAL").holds(s, 0, 1)
    assert parse_condition("CAPITALIZED&NEXT_TOKEN=tout/rien").holds(s, 0, 1)
    assert parse_condition("!NEXT_TOKEN=rien").holds(s, 0, 1)
    assert parse_condition("NEXT_POS=CLS|PREV_TOKEN=,").holds(s, 4, 5) is False
    assert parse_condition("NEXT_POS=CLS|PREV_TOKEN=,").holds(s, 2, 3)
    assert parse_condition("NEAR_SUFFIX=rt").holds(s, 2, 3)
    assert parse_condition("BEFORE_TOKEN=après").holds(s, 4, 5)
    assert parse_condition("AFTER_TOKEN=part").holds(s, 0, 1)
    for bad in ("", "FOO", "SENTENCE_INITIAL=x", "NEXT_TOKEN"):
        with pytest.raises(ValueError):
            parse_condition(bad)


def _brute_force_longest_leftmost(keys, entries):
    """Enumerate all contiguous matches, then pick greedily leftmost-longest."""
    matches = [(i, j, e) for i in range(len(keys)) for j in range(i + 1, len(keys) + 1)
               for e in entries if tuple(keys[i:j]) == e.surface]
    out, pos = [], 0
    for i in range(len(keys)):
        if i < pos:
            continue
        here = [m for m in matches if m[0] == i]
        if here:
            best = max(here, key=lambda m: m[1] - m[0])
            out.append((best[0], best[1], best[2].surface))
            pos = best[1]
    return out


alphabet = st.sampled_from(["a", "b", "c", "d"])


@given(st.lists(st.lists(alphabet, min_size=1, max_size=3).map(tuple), min_size=1, max_size=6, unique=True),
       st.lists(alphabet, max_size=12))
def test_scan_matches_brute_force(surfaces, words):
    entries = [ConnectiveEntry(s, "fr", ("cause",)) for s in surfaces]
    lex = Lexicon("fr", entries)
    sent = Sentence.from_words(words, "fr")
    got = [(c.start, c.end, c.entry.surface) for c in scan(sent, lex)]
    assert got == _brute_force_longest_leftmost(words, entries)
    # every entry occurring anywhere is visible to the all-substring search
    found = {e.surface for e in entries
             if any(tuple(words[i:i + len(e)]) == e.surface for i in range(len(words)))}
    assert {s for _, _, s in got} <= found
