"""Mixed-integer model container: variables, linear rows, convex quadratic objective."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ras_scopf.core.errors import ModelError

logger = logging.getLogger(__name__)

PSD_TOL = 1e-9  # Smallest eigenvalue tolerated (relative to the largest) in the objective Hessian

VarRef = Union[str, int]


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Variable:
    index: int
    name: str
    kind: VarKind
    lb: float
    ub: float

    @property
    def is_binary(self) -> bool:
        return self.kind is VarKind.BINARY


@dataclass(frozen=True)
class LinearConstraint:
    index: int
    name: str
    indices: Tuple[int, ...]
    coeffs: Tuple[float, ...]
    sense: Sense
    rhs: float

    def activity(self, x: np.ndarray) -> float:
        return float(np.dot(np.asarray(self.coeffs), x[list(self.indices)])) if self.indices else 0.0

    def violation(self, x: np.ndarray) -> float:
        lhs = self.activity(x)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


class ModelArrays(NamedTuple):
    """Matrix view of a MipModel.

    The objective is ``x' S x + c' x + constant`` with ``S`` symmetric.
    """

    c: np.ndarray
    quad: sp.csr_matrix
    constant: float
    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray


class MipModel:
    """
    A minimization model with continuous and binary variables.

    Variables and constraints are addressed by name or by index. Quadratic
    objective terms are stored as ``{(i, j): q}`` with ``i <= j`` meaning
    ``q * x_i * x_j``.

    Attributes:
        name (str): Model label, written to exported files.
        objective_constant (float): Constant added to the objective.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.objective_constant = 0.0
        self._variables: List[Variable] = []
        self._var_index: Dict[str, int] = {}
        self._constraints: List[LinearConstraint] = []
        self._con_names: Dict[str, int] = {}
        self._linear: Dict[int, float] = {}
        self._quadratic: Dict[Tuple[int, int], float] = {}

    # builders

    def add_variable(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = np.inf,
        kind: VarKind = VarKind.CONTINUOUS,
    ) -> int:
        """
        Declares a variable.

        Args:
            name (str): Unique variable name.
            lb (float): Lower bound (``-inf`` for free).
            ub (float): Upper bound (``inf`` for free).
            kind (VarKind): Continuous or binary; binaries are clipped to [0, 1].

        Returns:
            int: The variable index.

        Raises:
            ModelError: On duplicate names or crossed bounds.
        """
        if name in self._var_index:
            raise ModelError(f"duplicate variable name {name!r}")
        kind = VarKind(kind)
        if kind is VarKind.BINARY:
            lb, ub = max(0.0, lb), min(1.0, ub)
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        index = len(self._variables)
        self._variables.append(Variable(index, name, kind, float(lb), float(ub)))
        self._var_index[name] = index
        return index

    def add_binary(self, name: str) -> int:
        return self.add_variable(name, 0.0, 1.0, VarKind.BINARY)

    def add_constraint(
        self,
        coeffs: Mapping[VarRef, float],
        sense: Union[Sense, str],
        rhs: float,
        name: Optional[str] = None,
    ) -> int:
        """
        Adds the row ``sum(coeffs[v] * v) <sense> rhs``.

        Repeated references to the same variable are summed; zero coefficients
        are dropped.

        Raises:
            ModelError: On unknown variables or duplicate constraint names.
        """
        name = name or f"c{len(self._constraints)}"
        if name in self._con_names:
            raise ModelError(f"duplicate constraint name {name!r}")
        merged: Dict[int, float] = {}
        for ref, value in coeffs.items():
            index = self.index(ref)
            merged[index] = merged.get(index, 0.0) + float(value)
        merged = {i: v for i, v in merged.items() if v != 0.0}
        ordered = sorted(merged)
        index = len(self._constraints)
        self._constraints.append(
            LinearConstraint(
                index=index,
                name=name,
                indices=tuple(ordered),
                coeffs=tuple(merged[i] for i in ordered),
                sense=Sense(sense),
                rhs=float(rhs),
            )
        )
        self._con_names[name] = index
        return index

    def add_objective_linear(self, ref: VarRef, coeff: float) -> None:
        index = self.index(ref)
        self._linear[index] = self._linear.get(index, 0.0) + float(coeff)

    def add_objective_quadratic(self, ref_a: VarRef, ref_b: VarRef, coeff: float) -> None:
        i, j = sorted((self.index(ref_a), self.index(ref_b)))
        self._quadratic[(i, j)] = self._quadratic.get((i, j), 0.0) + float(coeff)

    def add_objective_constant(self, value: float) -> None:
        self.objective_constant += float(value)

    def clear_quadratic_objective(self) -> None:
        self._quadratic = {}

    def set_bounds(self, ref: VarRef, lb: float, ub: float) -> None:
        var = self.variable(ref)
        if lb > ub:
            raise ModelError(f"variable {var.name!r} has lb {lb} > ub {ub}")
        self._variables[var.index] = Variable(var.index, var.name, var.kind, float(lb), float(ub))

    # lookups

    def index(self, ref: VarRef) -> int:
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self._variables):
                raise ModelError(f"unknown variable index {ref}")
            return int(ref)
        try:
            return self._var_index[ref]
        except KeyError:
            raise ModelError(f"unknown variable {ref!r}") from None

    def variable(self, ref: VarRef) -> Variable:
        return self._variables[self.index(ref)]

    def has_variable(self, name: str) -> bool:
        return name in self._var_index

    @property
    def variables(self) -> List[Variable]:
        return list(self._variables)

    @property
    def constraints(self) -> List[LinearConstraint]:
        return list(self._constraints)

    @property
    def num_variables(self) -> int:
        return len(self._variables)

    @property
    def binaries(self) -> List[int]:
        return [v.index for v in self._variables if v.is_binary]

    @property
    def linear_objective(self) -> Dict[int, float]:
        return dict(self._linear)

    @property
    def quadratic_objective(self) -> Dict[Tuple[int, int], float]:
        return {k: v for k, v in self._quadratic.items() if v != 0.0}

    @property
    def is_quadratic(self) -> bool:
        return bool(self.quadratic_objective)

    # evaluation

    def objective_value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        value = self.objective_constant
        value += sum(c * x[i] for i, c in self._linear.items())
        value += sum(q * x[i] * x[j] for (i, j), q in self._quadratic.items())
        return float(value)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for var in self._variables:
            worst = max(worst, var.lb - x[var.index], x[var.index] - var.ub)
        for con in self._constraints:
            worst = max(worst, con.violation(x))
        return float(worst)

    def max_integrality_violation(self, x: np.ndarray) -> float:
        bins = self.binaries
        if not bins:
            return 0.0
        values = np.asarray(x, dtype=float)[bins]
        return float(np.max(np.abs(values - np.round(values))))

    # conversion

    def hessian(self) -> sp.csr_matrix:
        """Symmetric S with x' S x equal to the quadratic objective terms."""
        n = self.num_variables
        rows, cols, vals = [], [], []
        for (i, j), q in self.quadratic_objective.items():
            if i == j:
                rows.append(i)
                cols.append(i)
                vals.append(q)
            else:
                rows += [i, j]
                cols += [j, i]
                vals += [q / 2.0, q / 2.0]
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def to_arrays(self) -> ModelArrays:
        n = self.num_variables
        c = np.zeros(n)
        for i, value in self._linear.items():
            c[i] = value
        ub_rows, eq_rows = [], []
        for con in self._constraints:
            if con.sense is Sense.EQ:
                eq_rows.append((con, 1.0))
            else:
                ub_rows.append((con, 1.0 if con.sense is Sense.LE else -1.0))
        return ModelArrays(
            c=c,
            quad=self.hessian(),
            constant=self.objective_constant,
            a_ub=_stack(ub_rows, n),
            b_ub=np.array([sign * con.rhs for con, sign in ub_rows]),
            a_eq=_stack(eq_rows, n),
            b_eq=np.array([con.rhs for con, _ in eq_rows]),
            lb=np.array([v.lb for v in self._variables]),
            ub=np.array([v.ub for v in self._variables]),
            binary=np.array([v.is_binary for v in self._variables], dtype=bool),
        )

    def copy(self, name: Optional[str] = None) -> "MipModel":
        clone = MipModel(name or self.name)
        clone.objective_constant = self.objective_constant
        clone._variables = list(self._variables)
        clone._var_index = dict(self._var_index)
        clone._constraints = list(self._constraints)
        clone._con_names = dict(self._con_names)
        clone._linear = dict(self._linear)
        clone._quadratic = dict(self._quadratic)
        return clone

    def validate(self) -> "MipModel":
        """
        Checks the model invariants.

        Returns:
            MipModel: ``self``, for chaining.

        Raises:
            ModelError: If a binary has bounds outside [0, 1], a coefficient is
                not finite, or the quadratic objective is not positive
                semidefinite.
        """
        for var in self._variables:
            if var.is_binary and (var.lb < 0 or var.ub > 1):
                raise ModelError(f"binary {var.name!r} must have bounds within [0, 1]")
            if np.isnan(var.lb) or np.isnan(var.ub):
                raise ModelError(f"variable {var.name!r} has NaN bounds")
        for con in self._constraints:
            if not np.all(np.isfinite(con.coeffs)) or not np.isfinite(con.rhs):
                raise ModelError(f"constraint {con.name!r} has non-finite data")
            for i in con.indices:
                if not 0 <= i < self.num_variables:
                    raise ModelError(f"constraint {con.name!r} references unknown variable {i}")
        support = sorted({i for pair in self.quadratic_objective for i in pair})
        if support:
            block = self.hessian()[support][:, support].toarray()
            eigenvalues = np.linalg.eigvalsh(block)
            scale = max(1.0, float(np.max(np.abs(eigenvalues))))
            if eigenvalues[0] < -PSD_TOL * scale:
                raise ModelError(
                    f"quadratic objective is not positive semidefinite (min eigenvalue {eigenvalues[0]:.3g})"
                )
        return self

    def __repr__(self):
        return (
            f"MipModel({self.name!r}, variables={self.num_variables}, "
            f"binaries={len(self.binaries)}, constraints={len(self._constraints)})"
        )


def _stack(rows, n) -> sp.csr_matrix:
    data, row_idx, col_idx = [], [], []
    for r, (con, sign) in enumerate(rows):
        row_idx += [r] * len(con.indices)
        col_idx += list(con.indices)
        data += [sign * c for c in con.coeffs]
    return sp.csr_matrix((data, (row_idx, col_idx)), shape=(len(rows), n))
