import csv
import io
import json

import pytest

from zipfmix.corpus import (
    SUMMARY_FIELDS,
    ChapterSummary,
    FreqOfFreqTable,
    NormalizationConfig,
    analyze_chapter,
    analyze_tables,
    anchor_flags,
    format_table,
    freq_of_freq,
    load_fixture,
    normalize,
    parse_table,
    read_table,
    split_chapters,
    write_summaries,
    write_table,
)
from zipfmix.errors import EmptyInput, InvariantViolation, ParseError, PatternMismatch

TEXT = """The Project header
Some front matter here.

CHAPTER 1. Loomings.

Call me Ishmael. Some years ago--never mind how long--I thought I would sail.
The whale, the whale's tail, and the sea-sick sailor.

CHAPTER 2. The Carpet-Bag.

I stuffed a shirt or two into my old carpet-bag. Don't ask, 'tis a bag.
"""


def test_split_chapters_drops_front_matter():
    chapters = split_chapters(TEXT)
    assert [c.index for c in chapters] == [1, 2]
    assert chapters[0].title.startswith("CHAPTER 1")
    assert "front matter" not in chapters[0].text
    assert "Ishmael" in chapters[0].text and "carpet-bag" in chapters[1].text


def test_split_chapters_later_heading_wins():
    text = "CHAPTER 1 x\nCHAPTER 2 y\nCHAPTER 1 body one\nalpha\nCHAPTER 2 body two\nbeta\n"
    chapters = split_chapters(text)
    assert [c.index for c in chapters] == [1, 2]
    assert chapters[0].text.strip() == "alpha"
    assert chapters[1].text.strip() == "beta"


def test_split_chapters_custom_pattern_and_mismatch():
    chapters = split_chapters("## one\nfoo\n## two\nbar", r"^## \w+$")
    assert [c.index for c in chapters] == [1, 2]
    with pytest.raises(PatternMismatch):
        split_chapters("no headings at all")


@pytest.mark.parametrize(
    "text,expected",
    [
        ("The Whale!", ["whale"]),
        ("sea-sick -- sailors", ["sea-sick", "sailors"]),
        ("the whale's tail", ["whale", "tail"]),
        ("I don't know", ["know"]),
        ("Ahab’s leg", ["ahab", "leg"]),
        ("o'clock", ["oclock"]),
        ("numbers 42 count", ["numbers", "42", "count"]),
    ],
)
def test_normalize(text, expected):
    assert normalize(text) == expected


def test_normalize_options():
    cfg = NormalizationConfig(keep_hyphenated=False, stopword_list=frozenset(), lemmatizer=str.upper)
    assert normalize("the sea-sick", cfg) == ["THE", "SEA", "SICK"]
    cfg = NormalizationConfig(contraction_table={"yer": "you are"}, stopword_list=frozenset({"are"}))
    assert normalize("yer late", cfg) == ["you", "late"]


def test_freq_of_freq():
    table = freq_of_freq(["a", "b", "a", "c", "a", "b"])
    assert table.rows == ((1, 1), (2, 1), (3, 1))
    assert table.total_words == 3 and table.total_tokens == 6
    table = freq_of_freq(["x", "y", "z"])
    assert table.rows == ((1, 3),)
    with pytest.raises(EmptyInput):
        freq_of_freq([])


@pytest.mark.parametrize(
    "rows,rule",
    [((), "nonempty"), (((0, 1),), "values >= 1"), (((2, 1), (1, 1)), "values strictly increasing"), (((1, 0),), "counts >= 1")],
)
def test_table_invariants(rows, rule):
    with pytest.raises(InvariantViolation) as err:
        FreqOfFreqTable(rows)
    assert err.value.rule == rule


def test_fixtures():
    ch1, ch135 = load_fixture(1), load_fixture(135)
    assert ch1.total_words == 701 and len(ch1) == 12
    assert ch135.total_words == 1145 and len(ch135) == 24 and ch135.max_value == 36
    with pytest.raises(KeyError):
        load_fixture(2)


def test_table_round_trip(tmp_path):
    t = load_fixture(135)
    path = tmp_path / "t.csv"
    write_table(t, path)
    assert read_table(path) == t
    assert parse_table(format_table(t)) == t


@pytest.mark.parametrize(
    "text,line",
    [
        ("val,freq\n1,2\n", 1),
        ("value,freq\n1,2\n2,x\n", 3),
        ("value,freq\n1,2,3\n", 2),
        ("", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_table(text)
    assert err.value.line == line


def test_parse_skips_blank_lines():
    assert parse_table("value,freq\n\n1,3\n\n2,1\n").rows == ((1, 3), (2, 1))


def test_analyze_chapter_fields():
    s = analyze_chapter(load_fixture(1), index=1)
    assert s.n_words == 701 and s.min_freq == 1 and s.max_freq == 13 and s.n_distinct_freqs == 12
    assert s.alpha_hat == pytest.approx(2.733616730868145, rel=1e-12)
    assert 0 <= s.ks_p <= 1 and 0 <= s.ks_d <= 1
    assert tuple(s.as_dict()) == SUMMARY_FIELDS


def test_analyze_tables_parallel_matches_serial():
    tables = {1: load_fixture(1), 135: load_fixture(135), 7: FreqOfFreqTable(((1, 4),))}
    serial, errs = analyze_tables(tables)
    parallel, errs2 = analyze_tables(tables, jobs=2)
    assert serial == parallel
    assert [s.index for s in serial] == [1, 135]
    # an all-ones table has no finite MLE; it is reported, not fatal
    assert len(errs) == 1 and errs[0].startswith("chapter 7") and errs == errs2


def test_anchor_flags():
    base = dict(min_freq=1, max_freq=9, alpha_hat=2.0, ci_low=1.9, ci_high=2.1, ks_d=0.1, ks_p=0.5)
    ok = ChapterSummary(index=120, n_words=71, n_distinct_freqs=5, **base)
    off = ChapterSummary(index=54, n_words=1800, n_distinct_freqs=30, **base)
    other = ChapterSummary(index=3, n_words=10, n_distinct_freqs=3, **base)
    notes = anchor_flags([ok, off, other])
    assert notes == ["chapter 54: n_words=1800, published value 1883"]


def test_write_summaries_csv_and_json_agree():
    summaries, _ = analyze_tables({1: load_fixture(1), 135: load_fixture(135)})
    buf_csv, buf_json = io.StringIO(), io.StringIO()
    write_summaries(summaries, buf_csv, "csv")
    write_summaries(summaries, buf_json, "json")
    rows_csv = list(csv.DictReader(io.StringIO(buf_csv.getvalue())))
    rows_json = json.loads(buf_json.getvalue())
    assert len(rows_csv) == len(rows_json) == 2
    for rc, rj in zip(rows_csv, rows_json):
        for k, v in rj.items():
            if isinstance(v, float):
                assert float(rc[k]) == v
            else:
                assert rc[k] == str(v)


def test_end_to_end_text_pipeline():
    cfg = NormalizationConfig()
    tables = {c.index: freq_of_freq(normalize(c.text, cfg)) for c in split_chapters(TEXT)}
    assert tables[1].total_words == len(set(normalize(split_chapters(TEXT)[0].text)))
