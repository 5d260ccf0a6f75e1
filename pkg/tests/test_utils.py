import pytest

from ras_scopf.core.utils import parse_id_set, round_percent, to_mw, to_pu


def test_per_unit_conversions():
    assert to_pu(155.0, 100.0) == pytest.approx(1.55)
    assert to_mw(1.55, 100.0) == pytest.approx(155.0)
    assert to_mw(to_pu(42.0, 50.0), 50.0) == pytest.approx(42.0)


def test_round_percent():
    assert round_percent(1.20372) == 120.37


def test_parse_id_set_forms():
    assert parse_id_set("1-3, 7") == frozenset({1, 2, 3, 7})
    assert parse_id_set([22, "7,18"]) == frozenset({7, 18, 22})
    assert parse_id_set(None) == frozenset()
