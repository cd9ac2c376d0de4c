#!/usr/bin/env python3
#
#  geometry.py
"""
Jerusalem-cross unit-cell parameterisation and parametric sweep enumeration.

All lengths are in millimetres.
"""
#
#  Copyright © 2024 rasdesign contributors
#
#  Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to deal
#  in the Software without restriction, including without limitation the rights
#  to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
#  copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
#  The above copyright notice and this permission notice shall be included in all
#  copies or substantial portions of the Software.
#
#  THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
#  EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
#  MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT.
#  IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
#  DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
#  OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE
#  OR OTHER DEALINGS IN THE SOFTWARE.
#

# stdlib
import math
from typing import Any, Dict, Iterable, List, Sequence, Tuple

# 3rd party
import attr

__all__ = (
		"DIMENSIONS",
		"SweepRow",
		"SweepTable",
		"TABLE_I_ROWS",
		"UnitCellGeometry",
		"axis_grid",
		"default_sweep_table",
		"derived_gap",
		"enumerate_sweep",
		"validate",
		)

#: Names of the unit-cell dimensions, in the order used for datasets and model outputs.
DIMENSIONS: Tuple[str, ...] = ('a', 'b', 'c', 'd', 't')

#: Tolerance when deciding whether a grid point still lies inside its range.
_GRID_TOLERANCE = 1e-9


@attr.frozen
class UnitCellGeometry:
	"""
	The dimensions of a Jerusalem-cross unit cell and the thickness of its grounded spacer.
	"""

	#: Unit-cell period.
	a: float = attr.field(converter=float)

	#: End-cap bar length.
	b: float = attr.field(converter=float)

	#: Strip width.
	c: float = attr.field(converter=float)

	#: Tip-to-tip length of the cross arms.
	d: float = attr.field(converter=float)

	#: Thickness of the spacer between the FSS sheet and the ground plane.
	t: float = attr.field(converter=float)

	@property
	def e(self) -> float:
		"""
		The margin between the end caps and the edge of the cell.
		"""

		return derived_gap(self)

	def as_tuple(self, with_thickness: bool = True) -> Tuple[float, ...]:
		"""
		Returns the dimensions in :data:`~.DIMENSIONS` order.

		:param with_thickness: Whether to include ``t``.
		"""

		if with_thickness:
			return (self.a, self.b, self.c, self.d, self.t)
		else:
			return (self.a, self.b, self.c, self.d)

	def to_dict(self) -> Dict[str, float]:
		"""
		Returns a dictionary representation of the geometry.
		"""

		return attr.asdict(self)


def derived_gap(geometry: UnitCellGeometry) -> float:
	"""
	Returns the end-cap to cell-edge margin ``e = (a - b) / 2``.

	:param geometry:
	"""

	return (geometry.a - geometry.b) / 2


def validate(geometry: UnitCellGeometry) -> List[str]:
	"""
	Check the feasibility constraints of a unit cell.

	:param geometry:

	:returns: The violated constraints. An empty list means the geometry is feasible.
	"""

	a, b, c, d, t = geometry.as_tuple()

	checks = [
			("b > 0", b > 0),
			("b < a", b < a),
			("c > 0", c > 0),
			("c < b", c < b),
			("d > 0", d > 0),
			("d < a", d < a),
			("t > 0", t > 0),
			]

	violations = [name for name, ok in checks if not ok]

	if not all(math.isfinite(v) for v in (a, b, c, d, t)):
		violations.append("finite dimensions")

	return violations


def _check_range(instance: "SweepRow", attribute: attr.Attribute, value: Tuple[float, float]) -> None:
	if len(value) != 2:
		raise ValueError(f"{attribute.name} must be a [min, max] pair, got {value!r}")
	if value[0] > value[1]:
		raise ValueError(f"{attribute.name}: min {value[0]} exceeds max {value[1]}")


def _float_tuple(value: Iterable[float]) -> Tuple[float, float]:
	return tuple(float(v) for v in value)  # type: ignore[return-value]


@attr.frozen
class SweepRow:
	"""
	One row of a parametric sweep: a fixed period with ranges for ``b``, ``c`` and ``d``.
	"""

	a: float = attr.field(converter=float)
	b_range: Tuple[float, float] = attr.field(converter=_float_tuple, validator=_check_range)
	c_range: Tuple[float, float] = attr.field(converter=_float_tuple, validator=_check_range)
	d_range: Tuple[float, float] = attr.field(converter=_float_tuple, validator=_check_range)

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the row.
		"""

		return {
				'a': self.a,
				"b_range": list(self.b_range),
				"c_range": list(self.c_range),
				"d_range": list(self.d_range),
				}


def _check_steps(instance: "SweepTable", attribute: attr.Attribute, value: Tuple[float, float, float]) -> None:
	if len(value) != 3:
		raise ValueError(f"steps must be (Δb, Δc, Δd), got {value!r}")
	if not all(step > 0 for step in value):
		raise ValueError(f"All sweep steps must be positive, got {value!r}")


@attr.frozen
class SweepTable:
	"""
	A parametric sweep over Jerusalem-cross geometries.
	"""

	#: The rows of the sweep.
	rows: Tuple[SweepRow, ...] = attr.field(converter=tuple)

	#: Step sizes for ``b``, ``c`` and ``d``.
	steps: Tuple[float, float, float] = attr.field(
			default=(0.15, 0.2, 0.3),
			converter=_float_tuple,  # type: ignore[misc]
			validator=_check_steps,
			)

	#: Spacer thicknesses to combine with every row.
	thicknesses: Tuple[float, ...] = attr.field(default=(2.0, ), converter=_float_tuple)  # type: ignore[misc]

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the sweep.
		"""

		return {
				"rows": [row.to_dict() for row in self.rows],
				"steps": list(self.steps),
				"thicknesses": list(self.thicknesses),
				}


#: The rows of the reference parametric sweep, periods 3.5 mm to 7.0 mm.
TABLE_I_ROWS: Tuple[SweepRow, ...] = (
		SweepRow(3.5, (1.5, 3.4), (0.25, 1.5), (1.0, 3.4)),
		SweepRow(4.0, (1.5, 3.8), (0.25, 1.4), (1.0, 3.8)),
		SweepRow(4.5, (1.5, 4.4), (0.25, 1.4), (2.0, 4.4)),
		SweepRow(5.0, (2.0, 4.8), (1.20, 1.8), (1.0, 4.8)),
		SweepRow(5.5, (2.5, 5.3), (1.70, 2.3), (1.0, 5.3)),
		SweepRow(6.0, (3.0, 5.8), (2.00, 2.8), (2.0, 5.8)),
		SweepRow(6.5, (3.0, 6.3), (2.00, 2.8), (2.0, 6.2)),
		SweepRow(7.0, (3.5, 6.9), (2.60, 3.3), (3.0, 6.8)),
		)


def default_sweep_table(thicknesses: Sequence[float] = (2.0, )) -> SweepTable:
	"""
	Returns the reference sweep with the default step sizes.

	:param thicknesses: The spacer thicknesses to sweep.
	"""

	return SweepTable(TABLE_I_ROWS, thicknesses=thicknesses)


def axis_grid(minimum: float, maximum: float, step: float) -> List[float]:
	"""
	Returns ``minimum, minimum + step, ...`` up to and including ``maximum``.

	Values are rounded to 10 decimal places so that accumulated floating point error
	does not leak into datasets.

	:param minimum:
	:param maximum:
	:param step:
	"""

	count = math.floor((maximum - minimum) / step + _GRID_TOLERANCE) + 1
	return [round(minimum + idx * step, 10) for idx in range(count)]


def enumerate_sweep(table: SweepTable) -> List[UnitCellGeometry]:
	"""
	Enumerate the feasible geometries of a sweep.

	The order is deterministic: row order, then ``b``, ``c``, ``d`` and ``t`` ascending.

	:param table:
	"""

	step_b, step_c, step_d = table.steps
	thicknesses = sorted(table.thicknesses)
	geometries = []

	for row in table.rows:
		for b in axis_grid(*row.b_range, step_b):
			for c in axis_grid(*row.c_range, step_c):
				for d in axis_grid(*row.d_range, step_d):
					for t in thicknesses:
						geometry = UnitCellGeometry(row.a, b, c, d, t)
						if not validate(geometry):
							geometries.append(geometry)

	return geometries
