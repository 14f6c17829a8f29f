import pytest
from hypothesis import given, strategies as st

from transdictate.corpus import (
    DEFAULT_CLASSES,
    Lexicon,
    SentencePair,
    filter_pairs,
    format_bitext,
    load_bitext,
    load_lexicon,
    write_lexicon,
)
from transdictate.errors import InputError, ParseError


def _pair(nf, ne):
    return SentencePair(tuple(f"f{i}" for i in range(nf)), tuple(f"e{i}" for i in range(ne)))


def test_load_bitext_single_line(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("le chat dort .\tthe cat sleeps .\n", encoding="utf-8")
    (pair,) = load_bitext(p)
    assert len(pair.french) == 4 and len(pair.english) == 4
    assert pair.french[-1] == "."


def test_load_bitext_empty_french_side(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("\tthe cat\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_bitext(p)
    assert err.value.line == 1


def test_load_bitext_order(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("a b\tx\nc\ty z\n", encoding="utf-8")
    pairs = load_bitext(p)
    assert [x.french for x in pairs] == [("a", "b"), ("c",)]


@pytest.mark.parametrize("content,line", [
    (b"a\tx\nno tab here\n", 2),
    (b"a\tx\nb\t\n", 2),
    (b"a\tx\n\xff\xfe\tx\n", 2),
    (b"a\tb\tc\n", 1),
])
def test_load_bitext_errors_name_line(tmp_path, content, line):
    p = tmp_path / "b.txt"
    p.write_bytes(content)
    with pytest.raises(ParseError) as err:
        load_bitext(p)
    assert err.value.line == line
    assert f":{line}:" in str(err.value)


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="nope"):
        load_bitext(tmp_path / "nope")


def test_null_token_reserved():
    with pytest.raises(InputError):
        SentencePair(("a",), ("<NULL>",))


def test_filter_drops_overlong():
    assert filter_pairs([_pair(41, 10)], 40) == []


def test_filter_boundary_inclusive():
    p = _pair(40, 40)
    assert filter_pairs([p], 40) == [p]


def test_filter_empty():
    assert filter_pairs([]) == []


def test_filter_rejects_bad_bound():
    with pytest.raises(InputError):
        filter_pairs([_pair(1, 1)], 0)


def test_filter_logs_counts(caplog):
    caplog.set_level("INFO")
    filter_pairs([_pair(1, 1), _pair(50, 1)], 40)
    assert "retained 1, dropped 1" in caplog.text


lengths = st.lists(st.tuples(st.integers(1, 60), st.integers(1, 60)), max_size=20)


@given(lengths, st.integers(1, 60))
def test_filter_idempotent_and_bounded(sizes, bound):
    pairs = [_pair(a, b) for a, b in sizes]
    once = filter_pairs(pairs, bound)
    assert filter_pairs(once, bound) == once
    assert all(len(p.french) <= bound and len(p.english) <= bound for p in once)
    assert once == [p for p in pairs if p in once]  # order preserved


token = st.text(st.characters(blacklist_categories=("Zs", "Cc", "Zl", "Zp", "Cs")),
                min_size=1, max_size=5).filter(lambda t: not any(c.isspace() for c in t))
side = st.lists(token, min_size=1, max_size=6)


@given(st.lists(st.tuples(side, side.filter(lambda s: "<NULL>" not in s)), min_size=1, max_size=5))
def test_bitext_round_trip(tmp_path_factory, rows):
    text = "".join(" ".join(f) + "\t" + " ".join(e) + "\n" for f, e in rows)
    p = tmp_path_factory.mktemp("rt") / "b.txt"
    p.write_bytes(text.encode("utf-8"))
    assert format_bitext(load_bitext(p)).encode("utf-8") == p.read_bytes()


def _lexicon_file(tmp_path, body):
    p = tmp_path / "lex.tsv"
    p.write_text("#CLASSES\t" + ",".join(DEFAULT_CLASSES) + "\n" + body, encoding="utf-8")
    return p


def test_lexicon_single_class(tmp_path):
    lex = load_lexicon(_lexicon_file(tmp_path, "chevaux\tNOUN\n"))
    assert lex.entries["chevaux"] == {lex.class_id("NOUN")}
    assert lex.num_classes == 15


def test_lexicon_ambiguity(tmp_path):
    lex = load_lexicon(_lexicon_file(tmp_path, "ferme\tNOUN,VERB,ADJ\n"))
    assert len(lex.entries["ferme"]) == 3


def test_lexicon_unknown_label(tmp_path):
    with pytest.raises(ParseError) as err:
        load_lexicon(_lexicon_file(tmp_path, "a\tNOUN\nb\tXYZ\n"))
    assert err.value.line == 3


def test_lexicon_empty_class_list(tmp_path):
    with pytest.raises(ParseError):
        load_lexicon(_lexicon_file(tmp_path, "a\t\n"))


def test_lexicon_duplicates_merge(tmp_path):
    lex = load_lexicon(_lexicon_file(tmp_path, "ferme\tNOUN\nferme\tVERB\n"))
    assert lex.entries["ferme"] == {lex.class_id("NOUN"), lex.class_id("VERB")}


def test_lexicon_header_required(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("a\tNOUN\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_lexicon(p)


def test_lexicon_round_trip(tmp_path):
    lex = Lexicon(("X", "Y", "Z"), {"a": {0}, "b": {1, 2}})
    write_lexicon(lex, tmp_path / "l.tsv")
    assert load_lexicon(tmp_path / "l.tsv") == lex


def test_lexicon_needs_two_classes():
    with pytest.raises(InputError):
        Lexicon(("X",), {})
