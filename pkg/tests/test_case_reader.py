import pytest

from ras_scopf.core.case_reader import parse_case, write_case
from ras_scopf.core.errors import CaseFormatError, NetworkValidationError

MINIMAL = """\
name tiny
base_mva 100

[buses]
1
2 40   # inline load
3

[loads]
3 25
3 5

[lines]
# id from to x rating
1 1 2 0.1 100
2 2 3 0.1 100
3 1 3 0.2 100 0

[generators]
1 1 0 100 0.01 10
2 3 0 50 0.02 20 7.5 0 1
"""


def _write(tmp_path, text, name="case.case"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_minimal_case(tmp_path):
    net = parse_case(_write(tmp_path, MINIMAL))
    assert net.name == "tiny"
    assert net.loads == {1: 0.0, 2: 40.0, 3: 30.0}
    assert not net.line(3).in_service
    assert net.radial_lines() == [1, 2]
    assert net.generator(1).cost_const == 0.0
    assert net.generator(2).cost_const == 7.5
    assert not net.prepared


@pytest.mark.parametrize(
    "text, line_no, field",
    [
        ("[buses]\n1\n[lines]\n1 1 2 abc 100\n", 4, "reactance_pu"),
        ("[buses]\n1\n2\n[lines]\n1 1 2 0.1\n", 5, "rating_mw"),
        ("[buses]\n1\n[generators]\n1 1 0 10 0 1 0 0 1 9\n", 4, "generators"),
        ("[buses]\n1\n[lines]\n1 1 2 0.1 100 maybe\n", 4, "in_service"),
        ("[nodes]\n1\n", 1, "section"),
        ("[buses\n", 1, "section"),
        ("mva 100\n", 1, "mva"),
    ],
)
def test_parse_errors_name_line_and_field(tmp_path, text, line_no, field):
    path = _write(tmp_path, text)
    with pytest.raises(CaseFormatError) as info:
        parse_case(path)
    assert info.value.line_no == line_no
    assert info.value.field == field
    assert f":{line_no}:" in str(info.value)


def test_load_on_unknown_bus(tmp_path):
    path = _write(tmp_path, "[buses]\n1\n[loads]\n2 10\n")
    with pytest.raises(NetworkValidationError, match="unknown buses"):
        parse_case(path)


def test_invalid_network_data_is_rejected(tmp_path):
    path = _write(tmp_path, "[buses]\n1\n2\n[lines]\n1 1 2 0.1 -5\n")
    with pytest.raises(NetworkValidationError, match="rating_mw"):
        parse_case(path)


def test_rts96_write_then_parse(rts96, tmp_path):
    again = parse_case(write_case(rts96, tmp_path / "copy.case"))
    assert again == rts96


def test_prepared_case_keeps_flag(rts96_prepared, tmp_path):
    again = parse_case(write_case(rts96_prepared, tmp_path / "prepared.case"))
    assert again.prepared
    for line in rts96_prepared.lines:
        assert again.line(line.id).rating_mw == pytest.approx(line.rating_mw)
    for gen in rts96_prepared.generators:
        assert again.generator(gen.id).participation == pytest.approx(gen.participation, abs=1e-15)
