"""Reader and writer for the sectioned text case format.

A case file holds ``key value`` directives followed by ``[section]`` tables
with whitespace-separated columns; ``#`` starts a comment::

    base_mva 100

    [buses]
    # id  [load_mw]
    1
    [loads]
    # bus  load_mw      (summed per bus)
    1  108
    [lines]
    # id  from  to  reactance_pu  rating_mw  [in_service]
    1  1  2  0.0139  175
    [generators]
    # id  bus  p_min_mw  p_max_mw  c2  c1  [c0]  [participation]  [in_service]
    1  1  16  20  0  130  400.6849

Optional columns may be omitted from the right.
"""

import logging
from pathlib import Path
from typing import Dict, List

from ras_scopf.core.errors import CaseFormatError, NetworkValidationError
from ras_scopf.core.network import (
    BASE_MVA,
    Bus,
    Generator,
    Line,
    Network,
    compute_radial_flags,
)

logger = logging.getLogger(__name__)

SECTIONS = ("buses", "loads", "lines", "generators")
DIRECTIVES = ("base_mva", "name", "prepared")

_LINE_FIELDS = ("id", "from", "to", "reactance_pu", "rating_mw", "in_service")
_GEN_FIELDS = (
    "id",
    "bus",
    "p_min_mw",
    "p_max_mw",
    "c2",
    "c1",
    "c0",
    "participation",
    "in_service",
)


def _number(path, line_no, field, token, kind=float):
    try:
        return kind(token)
    except ValueError:
        raise CaseFormatError(path, line_no, field, f"cannot parse {token!r} as {kind.__name__}") from None


def _flag(path, line_no, field, token):
    lowered = token.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise CaseFormatError(path, line_no, field, f"cannot parse {token!r} as a flag")


def _check_width(path, line_no, section, tokens, required, fields):
    if len(tokens) < required:
        missing = fields[len(tokens)]
        raise CaseFormatError(path, line_no, missing, f"missing column in [{section}]")
    if len(tokens) > len(fields):
        raise CaseFormatError(path, line_no, section, f"too many columns ({len(tokens)})")


def parse_case(path) -> Network:
    """
    Parses a case file into a validated Network.

    Args:
        path (str or Path): The case file.

    Returns:
        Network: The parsed network, radial flags computed from topology.

    Raises:
        CaseFormatError: On malformed records, with line and field diagnostics.
        NetworkValidationError: If the parsed data violates a Network invariant.
    """
    path = Path(path)
    base_mva = BASE_MVA
    name = path.stem
    prepared = False
    bus_ids: List[int] = []
    loads: Dict[int, float] = {}
    lines: List[Line] = []
    generators: List[Generator] = []
    section = None

    with path.open() as handle:
        for line_no, raw in enumerate(handle, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if text.startswith("["):
                if not text.endswith("]"):
                    raise CaseFormatError(path, line_no, "section", f"unterminated header {text!r}")
                section = text[1:-1].strip().lower()
                if section not in SECTIONS:
                    raise CaseFormatError(path, line_no, "section", f"unknown section {section!r}")
                continue
            tokens = text.split()

            if section is None:
                key = tokens[0].lower()
                if key not in DIRECTIVES or len(tokens) != 2:
                    raise CaseFormatError(path, line_no, key, "expected 'key value' directive")
                if key == "base_mva":
                    base_mva = _number(path, line_no, key, tokens[1])
                elif key == "name":
                    name = tokens[1]
                else:
                    prepared = _flag(path, line_no, key, tokens[1])
            elif section == "buses":
                _check_width(path, line_no, section, tokens, 1, ("id", "load_mw"))
                bus_id = _number(path, line_no, "id", tokens[0], int)
                bus_ids.append(bus_id)
                if len(tokens) == 2:
                    loads[bus_id] = loads.get(bus_id, 0.0) + _number(path, line_no, "load_mw", tokens[1])
            elif section == "loads":
                _check_width(path, line_no, section, tokens, 2, ("bus", "load_mw"))
                bus_id = _number(path, line_no, "bus", tokens[0], int)
                loads[bus_id] = loads.get(bus_id, 0.0) + _number(path, line_no, "load_mw", tokens[1])
            elif section == "lines":
                _check_width(path, line_no, section, tokens, 5, _LINE_FIELDS)
                lines.append(
                    Line(
                        id=_number(path, line_no, "id", tokens[0], int),
                        from_bus=_number(path, line_no, "from", tokens[1], int),
                        to_bus=_number(path, line_no, "to", tokens[2], int),
                        reactance_pu=_number(path, line_no, "reactance_pu", tokens[3]),
                        rating_mw=_number(path, line_no, "rating_mw", tokens[4]),
                        in_service=(
                            _flag(path, line_no, "in_service", tokens[5]) if len(tokens) > 5 else True
                        ),
                    )
                )
            else:
                _check_width(path, line_no, section, tokens, 6, _GEN_FIELDS)
                values = [
                    _number(path, line_no, field, token, int if field in ("id", "bus") else float)
                    for field, token in zip(_GEN_FIELDS[:8], tokens[:8])
                ]
                generators.append(
                    Generator(
                        id=values[0],
                        bus=values[1],
                        p_min_mw=values[2],
                        p_max_mw=values[3],
                        cost_quad=values[4],
                        cost_lin=values[5],
                        cost_const=values[6] if len(values) > 6 else 0.0,
                        participation=values[7] if len(values) > 7 else 0.0,
                        in_service=(
                            _flag(path, line_no, "in_service", tokens[8]) if len(tokens) > 8 else True
                        ),
                    )
                )

    unknown = sorted(set(loads) - set(bus_ids))
    if unknown:
        raise NetworkValidationError(f"loads reference unknown buses {unknown}")
    buses = [Bus(id=b, base_load_mw=loads.get(b, 0.0)) for b in bus_ids]
    lines = compute_radial_flags(buses, lines)
    net = Network(
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        base_mva=base_mva,
        prepared=prepared,
        name=name,
    )
    logger.info(
        "Parsed %s: %d buses, %d lines, %d generators, %.1f MW load",
        path,
        len(net.buses),
        len(net.lines),
        len(net.generators),
        net.total_load_mw,
    )
    return net


def write_case(net: Network, path) -> Path:
    """
    Writes a Network in the case format, optional columns included.

    Args:
        net (Network): The network to serialize.
        path (str or Path): Destination file.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    rows = [
        f"name {net.name}",
        f"base_mva {net.base_mva:g}",
        f"prepared {'true' if net.prepared else 'false'}",
        "",
        "[buses]",
        "# id  load_mw",
    ]
    rows += [f"{b.id} {b.base_load_mw:.10g}" for b in net.buses]
    rows += ["", "[lines]", "# id  from  to  reactance_pu  rating_mw  in_service"]
    rows += [
        f"{l.id} {l.from_bus} {l.to_bus} {l.reactance_pu:.10g} {l.rating_mw:.10g} {int(l.in_service)}"
        for l in net.lines
    ]
    rows += [
        "",
        "[generators]",
        "# id  bus  p_min_mw  p_max_mw  c2  c1  c0  participation  in_service",
    ]
    rows += [
        f"{g.id} {g.bus} {g.p_min_mw:.10g} {g.p_max_mw:.10g} {g.cost_quad:.10g} "
        f"{g.cost_lin:.10g} {g.cost_const:.10g} {g.participation:.17g} {int(g.in_service)}"
        for g in net.generators
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(rows) + "\n")
    return path
