import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emobow.corpus import (
    LabeledSet,
    OutOfRange,
    ParseStats,
    PolarityClass,
    XmlSyntaxError,
    class_distribution,
    load_labeled,
    parse_reviews,
    rating_to_class,
    read_reviews,
    review_record,
    write_ndjson,
)

SBS_BOOK = b"""<?xml version="1.0" encoding="UTF-8"?>
<book>
  <isbn>0385339097</isbn>
  <title>The Partner</title>
  <reviews>
    <review>
      <authorid>A1</authorid>
      <content>Interesting Grisham tale of a lawyer that takes millions of dollars from his firm after faking his own death.</content>
      <rating>4</rating>
    </review>
    <review>
      <content>Too <b>long</b> and dull.</content>
      <rating>1.0</rating>
    </review>
    <review>
      <content>Way too good.</content>
      <rating>6</rating>
    </review>
    <review>
      <rating>3</rating>
    </review>
  </reviews>
</book>
"""


def test_parse_grisham_snippet():
    stats = ParseStats()
    reviews = list(parse_reviews(io.BytesIO(SBS_BOOK), source="book.xml", stats=stats))
    assert reviews[0].content.startswith("Interesting Grisham tale")
    assert reviews[0].rating == 4
    assert reviews[0].polarity is PolarityClass.POSITIVE
    assert reviews[0].source_id == "book.xml#1"
    # nested markup flattened, integral float rating accepted
    assert reviews[1].content == "Too long and dull."
    assert reviews[1].rating == 1
    assert len(reviews) == 2
    assert stats.skipped == 2
    assert stats.seen == 4


def test_rating_six_is_skipped():
    xml = b"<reviews><review><content>x</content><rating>6</rating></review></reviews>"
    stats = ParseStats()
    assert list(parse_reviews(io.BytesIO(xml), stats=stats)) == []
    assert stats.skipped == 1 and stats.emitted == 0


def test_no_reviews():
    stats = ParseStats()
    assert list(parse_reviews(io.BytesIO(b"<book><title>t</title></book>"), stats=stats)) == []
    assert stats.seen == 0


def test_custom_tags():
    xml = b"<root><item><body>fine</body><stars>3</stars></item></root>"
    out = list(parse_reviews(io.BytesIO(xml), review_tag="item", content_tag="body",
                             rating_tag="stars"))
    assert [(r.content, r.rating) for r in out] == [("fine", 3)]


def test_xml_syntax_error():
    with pytest.raises(XmlSyntaxError) as err:
        list(parse_reviews(io.BytesIO(b"<book><review><content>x</review>"), source="bad.xml"))
    assert "bad.xml" in str(err.value)


@given(st.lists(st.sampled_from(["1", "2", "3", "4", "5", "0", "6", "4.0", "3.5", "x", None]),
                max_size=30))
def test_emitted_plus_skipped_equals_reviews(ratings):
    parts = []
    for r in ratings:
        rating = "" if r is None else f"<rating>{r}</rating>"
        parts.append(f"<review><content>text</content>{rating}</review>")
    xml = f"<book><reviews>{''.join(parts)}</reviews></book>".encode()
    stats = ParseStats()
    out = list(parse_reviews(io.BytesIO(xml), stats=stats))
    assert stats.emitted == len(out)
    assert stats.emitted + stats.skipped == len(ratings)
    assert all(1 <= r.rating <= 5 for r in out)


@pytest.mark.parametrize("rating,cls", [(1, PolarityClass.NEGATIVE), (2, PolarityClass.NEGATIVE),
                                        (3, PolarityClass.NEUTRAL), (4, PolarityClass.POSITIVE),
                                        (5, PolarityClass.POSITIVE)])
def test_rating_to_class(rating, cls):
    assert rating_to_class(rating) is cls


@pytest.mark.parametrize("rating", [0, 6, -1, 2.5, True])
def test_rating_out_of_range(rating):
    with pytest.raises(OutOfRange):
        rating_to_class(rating)


def test_rating_map_total_and_surjective():
    assert {rating_to_class(r) for r in range(1, 6)} == set(PolarityClass)


def test_class_distribution_scaled_proportions():
    labels = [0] * 13 + [1] * 9 + [2] * 78
    dist = class_distribution(LabeledSet(["d"] * 100, labels))
    assert dist[PolarityClass.NEGATIVE] == (13, pytest.approx(0.13))
    assert dist[PolarityClass.NEUTRAL] == (9, pytest.approx(0.09))
    assert dist[PolarityClass.POSITIVE] == (78, pytest.approx(0.78))
    assert abs(sum(p for _, p in dist.values()) - 1) < 1e-9


def test_class_distribution_single_and_empty():
    assert class_distribution(LabeledSet(["a", "b"], [1, 1]))[PolarityClass.NEUTRAL] == (2, 1.0)
    empty = class_distribution(LabeledSet([], []))
    assert all(v == (0, 0.0) for v in empty.values())


def test_labeled_set_counts_match_recount():
    ds = LabeledSet(list("abcdef"), [0, 2, 2, 1, 2, 0])
    counts = ds.class_counts
    assert sum(counts.values()) == len(ds)
    assert counts == {PolarityClass.NEGATIVE: 2, PolarityClass.NEUTRAL: 1, PolarityClass.POSITIVE: 3}
    with pytest.raises(ValueError):
        LabeledSet(["a"], [0, 1])


def test_ndjson_cache_round_trip(tmp_path):
    xml = tmp_path / "b.xml"
    xml.write_bytes(SBS_BOOK)
    path = str(tmp_path / "cache.ndjson")
    n = write_ndjson((review_record(r) for r in read_reviews(str(tmp_path))), path)
    assert n == 2
    first = json.loads(open(path).readline())
    assert set(first) == {"text", "rating", "class", "source"}
    assert first["class"] == "positive"
    ds = load_labeled(path)
    np.testing.assert_array_equal(ds.labels, [2, 0])
