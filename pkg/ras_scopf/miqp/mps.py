"""Free-format MPS export and import, with the QUADOBJ extension for quadratic costs.

Binary variables are written between ``'MARKER' 'INTORG'``/``'INTEND'`` lines
and carry explicit bounds. The quadratic objective follows the usual
``0.5 * x' Q x`` convention, so ``q * x**2`` is written as ``Q = 2q`` and a
cross term ``q * x * y`` as ``Q = q`` (lower triangle only). The objective
constant is written as the negated right-hand side of the objective row.
"""

import logging
from pathlib import Path

import numpy as np

from ras_scopf.core.errors import ModelError
from ras_scopf.miqp.model import MipModel, Sense, VarKind

logger = logging.getLogger(__name__)

OBJECTIVE_ROW = "obj"
_SENSE_CODE = {Sense.LE: "L", Sense.EQ: "E", Sense.GE: "G"}
_CODE_SENSE = {code: sense for sense, code in _SENSE_CODE.items()}


def _num(value: float) -> str:
    return f"{value:.17g}"


def export_mps(m: MipModel, path) -> Path:
    """
    Writes a model in free MPS format.

    Args:
        m (MipModel): A valid model.
        path (str or Path): Destination file.

    Returns:
        Path: The written file.

    Raises:
        ModelError: If the model fails validation or a name contains whitespace.
    """
    m.validate()
    path = Path(path)
    for name in [v.name for v in m.variables] + [c.name for c in m.constraints]:
        if not name or any(ch.isspace() for ch in name):
            raise ModelError(f"name {name!r} cannot be written to MPS")

    entries = {v.index: [] for v in m.variables}
    for index, coeff in sorted(m.linear_objective.items()):
        if coeff != 0.0:
            entries[index].append((OBJECTIVE_ROW, coeff))
    for con in m.constraints:
        for index, coeff in zip(con.indices, con.coeffs):
            entries[index].append((con.name, coeff))

    out = [f"NAME {m.name.replace(' ', '_')}", "ROWS", f" N  {OBJECTIVE_ROW}"]
    out += [f" {_SENSE_CODE[c.sense]}  {c.name}" for c in m.constraints]

    out.append("COLUMNS")
    in_marker = False
    markers = 0
    for var in m.variables:
        if var.is_binary != in_marker:
            tag = "INTORG" if var.is_binary else "INTEND"
            out.append(f"    MARKER{markers} 'MARKER' '{tag}'")
            markers += 1
            in_marker = var.is_binary
        rows = entries[var.index] or [(OBJECTIVE_ROW, 0.0)]
        out += [f"    {var.name} {row} {_num(coeff)}" for row, coeff in rows]
    if in_marker:
        out.append(f"    MARKER{markers} 'MARKER' 'INTEND'")

    out.append("RHS")
    if m.objective_constant != 0.0:
        out.append(f"    RHS {OBJECTIVE_ROW} {_num(-m.objective_constant)}")
    out += [f"    RHS {c.name} {_num(c.rhs)}" for c in m.constraints if c.rhs != 0.0]

    out.append("BOUNDS")
    for var in m.variables:
        out += _bound_lines(var)

    quad = m.quadratic_objective
    if quad:
        out.append("QUADOBJ")
        for (i, j), coeff in sorted(quad.items()):
            value = 2.0 * coeff if i == j else coeff
            out.append(f"    {m.variable(j).name} {m.variable(i).name} {_num(value)}")
    out.append("ENDATA")

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    logger.info("Wrote %s (%d columns, %d rows)", path, m.num_variables, len(m.constraints))
    return path


def _bound_lines(var):
    name = var.name
    if var.is_binary and var.lb == 0.0 and var.ub == 1.0:
        return [f" BV BND {name}"]
    if var.lb == var.ub:
        return [f" FX BND {name} {_num(var.lb)}"]
    if np.isneginf(var.lb) and np.isposinf(var.ub):
        return [f" FR BND {name}"]
    lines = []
    if np.isneginf(var.lb):
        lines.append(f" MI BND {name}")
    elif var.lb != 0.0 or var.is_binary:
        lines.append(f" LO BND {name} {_num(var.lb)}")
    if np.isfinite(var.ub):
        lines.append(f" UP BND {name} {_num(var.ub)}")
    return lines


def read_mps(path) -> MipModel:
    """
    Parses a free MPS file of the kind written by ``export_mps``.

    Integer-marked columns are read as binaries. RANGES sections and
    general integer bounds are not supported.

    Args:
        path (str or Path): The MPS file.

    Returns:
        MipModel: The model, variables in column order and rows in ROWS order.

    Raises:
        ModelError: On malformed or unsupported content.
    """
    path = Path(path)
    name = path.stem
    objective_row = None
    rows = {}
    columns = {}
    rhs = {}
    quad = []
    section = None
    integer = False

    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tokens = raw.split()
        if not raw[0].isspace():
            section = tokens[0].upper()
            if section == "NAME":
                name = tokens[1] if len(tokens) > 1 else name
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "QUADOBJ", "OBJSENSE"):
                raise ModelError(f"{path}:{line_no}: unsupported section {section!r}")
            continue

        if section == "ROWS":
            code, row = tokens[0].upper(), tokens[1]
            if code == "N":
                objective_row = objective_row or row
            elif code in _CODE_SENSE:
                rows[row] = {"sense": _CODE_SENSE[code], "coeffs": {}}
            else:
                raise ModelError(f"{path}:{line_no}: unknown row type {code!r}")
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'") == "MARKER":
                integer = tokens[2].strip("'") == "INTORG"
                continue
            col = columns.setdefault(
                tokens[0], {"binary": integer, "obj": 0.0, "lb": 0.0, "ub": np.inf, "rows": {}}
            )
            for row, value in zip(tokens[1::2], tokens[2::2]):
                if row == objective_row:
                    col["obj"] += float(value)
                elif row in rows:
                    col["rows"][row] = col["rows"].get(row, 0.0) + float(value)
                else:
                    raise ModelError(f"{path}:{line_no}: unknown row {row!r}")
        elif section == "RHS":
            pairs = tokens[1:] if len(tokens) % 2 == 1 else tokens
            for row, value in zip(pairs[0::2], pairs[1::2]):
                rhs[row] = float(value)
        elif section == "BOUNDS":
            code, col_name = tokens[0].upper(), tokens[2]
            if col_name not in columns:
                raise ModelError(f"{path}:{line_no}: bound on unknown column {col_name!r}")
            col = columns[col_name]
            value = float(tokens[3]) if len(tokens) > 3 else None
            if code == "BV":
                col["binary"], col["lb"], col["ub"] = True, 0.0, 1.0
            elif code == "FX":
                col["lb"] = col["ub"] = value
            elif code == "FR":
                col["lb"], col["ub"] = -np.inf, np.inf
            elif code == "MI":
                col["lb"] = -np.inf
            elif code == "PL":
                col["ub"] = np.inf
            elif code == "LO":
                col["lb"] = value
            elif code == "UP":
                col["ub"] = value
            else:
                raise ModelError(f"{path}:{line_no}: unsupported bound type {code!r}")
        elif section == "QUADOBJ":
            quad.append((tokens[0], tokens[1], float(tokens[2])))

    model = MipModel(name)
    for col_name, col in columns.items():
        kind = VarKind.BINARY if col["binary"] else VarKind.CONTINUOUS
        lb, ub = col["lb"], col["ub"]
        if kind is VarKind.BINARY and np.isposinf(ub):
            ub = 1.0
        model.add_variable(col_name, lb, ub, kind)
        if col["obj"] != 0.0:
            model.add_objective_linear(col_name, col["obj"])
    for row_name, row in rows.items():
        coeffs = {c: col["rows"][row_name] for c, col in columns.items() if row_name in col["rows"]}
        model.add_constraint(coeffs, row["sense"], rhs.get(row_name, 0.0), name=row_name)
    if objective_row in rhs:
        model.add_objective_constant(-rhs[objective_row])
    for a, b, value in quad:
        model.add_objective_quadratic(a, b, value / 2.0 if a == b else value)
    return model
