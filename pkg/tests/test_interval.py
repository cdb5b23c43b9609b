import math

import pytest

from canosc.interval import INF, Bracket, bracket_min, bracket_ratio, decode_real, encode_real


def test_infinite_sentinel():
    b = Bracket.infinite()
    assert b.is_infinite and b.width == 0.0 and str(b) == "inf"


def test_empty_bracket_rejected():
    with pytest.raises(ValueError):
        Bracket(2.0, 1.0)


def test_contains_and_overlaps():
    b = Bracket(0.49, 0.51)
    assert b.contains(0.5) and not b.contains(0.52)
    assert b.contains(0.515, tol=0.01)
    assert b.overlaps(Bracket(0.45, 0.55)) and not b.overlaps(Bracket(0.52, 0.6))


def test_inflate_adds_own_width_and_relative_pad():
    b = Bracket(1.0, 1.2).inflate(0.05)
    assert b.lo == pytest.approx(1.0 - 0.2 - 0.05)
    assert b.hi == pytest.approx(1.2 + 0.2 + 0.06)
    assert Bracket(0.0, 0.1).inflate().lo == 0.0


def test_json_round_trip_with_infinity():
    b = Bracket(0.25, INF, (0.3, 0.4))
    d = b.to_json()
    assert d["hi"] == "inf" and d["inconclusive_probes"] == [0.3, 0.4]
    assert Bracket.from_json(d) == b
    assert Bracket.from_json(Bracket.infinite().to_json()).is_infinite


def test_encode_decode():
    assert encode_real(INF) == "inf" and encode_real(-INF) == "-inf" and encode_real(1.5) == 1.5
    assert decode_real("inf") == INF and decode_real(2) == 2.0


def test_bracket_min():
    m = bracket_min(Bracket(0.25, 0.26), Bracket(0.24, INF))
    assert (m.lo, m.hi) == (0.24, 0.26)
    assert bracket_min(Bracket.infinite(), Bracket(1, 2)) == Bracket(1, 2)
    assert bracket_min(Bracket.infinite(), Bracket.infinite()).is_infinite


def test_bracket_ratio():
    r = bracket_ratio(Bracket(0.249, 0.26), Bracket(0.497, 0.509))
    assert r.lo == pytest.approx(0.249 / 0.509) and r.hi == pytest.approx(0.26 / 0.497)
    assert r.contains(0.5)
    assert bracket_ratio(Bracket(1, 2), Bracket(0, 1)).hi == INF
    assert bracket_ratio(Bracket(1, 2), Bracket(1, INF)).lo == 0.0
    assert not math.isnan(bracket_ratio(Bracket.infinite(), Bracket.infinite()).hi)
