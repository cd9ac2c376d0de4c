#!/usr/bin/env python3
#
#  sweep.py
"""
Parsers for the ``[sweep]``, ``[stack]`` and ``[grid]`` tables.
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
from typing import Any, Dict, List, Optional, Union

# 3rd party
from dom_toml.parser import TOML_TYPES, AbstractConfigParser, BadConfigError

# this package
from rasdesign.em_forward import FR4, OPEN_SHEET, FrequencyGrid, Layer, MaterialSpec, OpenSheet, StackSpec
from rasdesign.geometry import TABLE_I_ROWS, SweepRow, SweepTable

__all__ = ("GridParser", "StackParser", "SweepParser")

_NUMBER = (int, float)


def _number_list(parser: AbstractConfigParser, values: Any, path: List[str]) -> List[float]:
	parser.assert_type(values, list, path)

	for idx, value in enumerate(values):
		parser.assert_indexed_type(value, _NUMBER, path, idx=idx)

	return [float(v) for v in values]


def _pair(parser: AbstractConfigParser, values: Any, path: List[str]) -> List[float]:
	pair = _number_list(parser, values, path)

	if len(pair) != 2:
		raise BadConfigError(f"Invalid value for '{'.'.join(path)}': expected a [min, max] pair.")
	if pair[0] > pair[1]:
		raise BadConfigError(f"Invalid value for '{'.'.join(path)}': min {pair[0]} exceeds max {pair[1]}.")

	return pair


class SweepParser(AbstractConfigParser):
	"""
	Parser for the ``[sweep]`` table, describing a parametric sweep over unit cells.

	Omitted keys fall back to the reference sweep with steps ``(0.15, 0.2, 0.3)`` mm
	and a single 2.0 mm thickness.
	"""

	defaults = {
			"steps": [0.15, 0.2, 0.3],
			"thicknesses": [2.0],
			}
	factories = {"rows": lambda: list(TABLE_I_ROWS)}

	def parse_rows(self, config: Dict[str, TOML_TYPES]) -> List[SweepRow]:
		"""
		Parse the ``rows`` array of tables, each with keys ``a``, ``b_range``, ``c_range`` and ``d_range``.

		:param config: The unparsed TOML config for the ``[sweep]`` table.
		"""

		rows = config["rows"]
		self.assert_type(rows, list, ["sweep", "rows"])

		parsed_rows = []

		for idx, row in enumerate(rows):
			self.assert_indexed_type(row, dict, ["sweep", "rows"], idx=idx)
			prefix = ["sweep", f"rows[{idx}]"]

			for key in ('a', "b_range", "c_range", "d_range"):
				if key not in row:
					raise BadConfigError(f"'{'.'.join(prefix)}' is missing the {key!r} key.")

			self.assert_type(row['a'], _NUMBER, [*prefix, 'a'])
			parsed_rows.append(
					SweepRow(
							row['a'],
							_pair(self, row["b_range"], [*prefix, "b_range"]),
							_pair(self, row["c_range"], [*prefix, "c_range"]),
							_pair(self, row["d_range"], [*prefix, "d_range"]),
							)
					)

		return parsed_rows

	def parse_steps(self, config: Dict[str, TOML_TYPES]) -> List[float]:
		"""
		Parse the ``steps`` key, giving the step sizes ``[Δb, Δc, Δd]`` in mm.

		:param config: The unparsed TOML config for the ``[sweep]`` table.
		"""

		steps = _number_list(self, config["steps"], ["sweep", "steps"])

		if len(steps) != 3 or not all(step > 0 for step in steps):
			raise BadConfigError("Invalid value for 'sweep.steps': expected three positive step sizes.")

		return steps

	def parse_thicknesses(self, config: Dict[str, TOML_TYPES]) -> List[float]:
		"""
		Parse the ``thicknesses`` key, giving the spacer thicknesses in mm.

		:param config: The unparsed TOML config for the ``[sweep]`` table.
		"""

		thicknesses = _number_list(self, config["thicknesses"], ["sweep", "thicknesses"])

		if not thicknesses:
			raise BadConfigError("'sweep.thicknesses' must list at least one thickness.")

		for idx, thickness in enumerate(thicknesses):
			if not thickness > 0:
				raise BadConfigError(f"Invalid value for 'sweep.thicknesses[{idx}]': thicknesses must be positive.")

		return thicknesses

	@property
	def keys(self) -> List[str]:
		"""
		The keys to parse from the TOML file.
		"""

		return ["rows", "steps", "thicknesses"]

	def build(self, config: Dict[str, TOML_TYPES]) -> SweepTable:
		"""
		Parse the table and construct a :class:`~rasdesign.geometry.SweepTable`.

		:param config: The unparsed TOML config for the ``[sweep]`` table.
		"""

		parsed = self.parse(config, set_defaults=True)
		return SweepTable(parsed["rows"], steps=parsed["steps"], thicknesses=parsed["thicknesses"])


class StackParser(AbstractConfigParser):
	"""
	Parser for the ``[stack]`` table, describing the layers above the ground plane.

	.. code-block:: toml

		[stack]
		sheet_resistance = 100.0  # or "open" for no FSS sheet
		superstrate = { eps_r = 4.4, tan_delta = 0.02, thickness = 0.125 }  # or false
		spacer = { eps_r = 4.4, tan_delta = 0.02 }
	"""

	defaults = {"sheet_resistance": 100.0}
	factories = {
			"superstrate": lambda: Layer(FR4, 0.125),
			"spacer": lambda: FR4,
			}

	def _parse_material(self, table: Any, path: List[str]) -> MaterialSpec:
		self.assert_type(table, dict, path)

		if "eps_r" not in table:
			raise BadConfigError(f"'{'.'.join(path)}' is missing the 'eps_r' key.")

		self.assert_type(table["eps_r"], _NUMBER, [*path, "eps_r"])
		self.assert_type(table.get("tan_delta", 0.0), _NUMBER, [*path, "tan_delta"])

		try:
			return MaterialSpec(table["eps_r"], table.get("tan_delta", 0.0))
		except ValueError as e:
			raise BadConfigError(f"Invalid value for '{'.'.join(path)}': {e}") from e

	def parse_sheet_resistance(self, config: Dict[str, TOML_TYPES]) -> Union[float, OpenSheet]:
		"""
		Parse the ``sheet_resistance`` key, in ohms, or the string ``"open"`` for a stack without a sheet.

		:param config: The unparsed TOML config for the ``[stack]`` table.
		"""

		value = config["sheet_resistance"]

		if value == OPEN_SHEET.value:
			return OPEN_SHEET

		self.assert_type(value, _NUMBER, ["stack", "sheet_resistance"])

		if not value > 0:
			raise BadConfigError("Invalid value for 'stack.sheet_resistance': must be positive.")

		return float(value)  # type: ignore[arg-type]

	def parse_superstrate(self, config: Dict[str, TOML_TYPES]) -> Optional[Layer]:
		"""
		Parse the ``superstrate`` table, or :py:obj:`False` for no superstrate.

		:param config: The unparsed TOML config for the ``[stack]`` table.
		"""

		table = config["superstrate"]

		if table is False:
			return None

		material = self._parse_material(table, ["stack", "superstrate"])
		thickness = table.get("thickness", 0.125)  # type: ignore[union-attr]
		self.assert_type(thickness, _NUMBER, ["stack", "superstrate", "thickness"])

		if not thickness > 0:
			raise BadConfigError("Invalid value for 'stack.superstrate.thickness': must be positive.")

		return Layer(material, thickness)

	def parse_spacer(self, config: Dict[str, TOML_TYPES]) -> MaterialSpec:
		"""
		Parse the ``spacer`` table, giving the dielectric between the sheet and the ground plane.

		:param config: The unparsed TOML config for the ``[stack]`` table.
		"""

		return self._parse_material(config["spacer"], ["stack", "spacer"])

	@property
	def keys(self) -> List[str]:
		"""
		The keys to parse from the TOML file.
		"""

		return ["sheet_resistance", "superstrate", "spacer"]

	def build(self, config: Dict[str, TOML_TYPES]) -> StackSpec:
		"""
		Parse the table and construct a :class:`~rasdesign.em_forward.StackSpec`.

		:param config: The unparsed TOML config for the ``[stack]`` table.
		"""

		parsed = self.parse(config, set_defaults=True)
		return StackSpec(
				superstrate=parsed["superstrate"],
				spacer=parsed["spacer"],
				sheet_resistance=parsed["sheet_resistance"],
				)


class GridParser(AbstractConfigParser):
	"""
	Parser for the ``[grid]`` table, giving the frequency grid in GHz.
	"""

	defaults = {
			"f_start": 1.0,
			"f_stop": 30.0,
			"f_step": 0.05,
			}

	def _parse_frequency(self, config: Dict[str, TOML_TYPES], key: str) -> float:
		value = config[key]
		self.assert_type(value, _NUMBER, ["grid", key])
		return float(value)  # type: ignore[arg-type]

	def parse_f_start(self, config: Dict[str, TOML_TYPES]) -> float:
		"""
		Parse the ``f_start`` key.

		:param config: The unparsed TOML config for the ``[grid]`` table.
		"""

		return self._parse_frequency(config, "f_start")

	def parse_f_stop(self, config: Dict[str, TOML_TYPES]) -> float:
		"""
		Parse the ``f_stop`` key.

		:param config: The unparsed TOML config for the ``[grid]`` table.
		"""

		return self._parse_frequency(config, "f_stop")

	def parse_f_step(self, config: Dict[str, TOML_TYPES]) -> float:
		"""
		Parse the ``f_step`` key.

		:param config: The unparsed TOML config for the ``[grid]`` table.
		"""

		return self._parse_frequency(config, "f_step")

	@property
	def keys(self) -> List[str]:
		"""
		The keys to parse from the TOML file.
		"""

		return ["f_start", "f_stop", "f_step"]

	def build(self, config: Dict[str, TOML_TYPES]) -> FrequencyGrid:
		"""
		Parse the table and construct a :class:`~rasdesign.em_forward.FrequencyGrid`.

		:param config: The unparsed TOML config for the ``[grid]`` table.
		"""

		parsed = self.parse(config, set_defaults=True)

		try:
			return FrequencyGrid(parsed["f_start"], parsed["f_stop"], parsed["f_step"])
		except ValueError as e:
			raise BadConfigError(f"Invalid '[grid]' table: {e}") from e
