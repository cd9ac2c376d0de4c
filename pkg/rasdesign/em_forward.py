#!/usr/bin/env python3
#
#  em_forward.py
"""
Equivalent-circuit forward model for a grounded resistive Jerusalem-cross absorber.

The FSS layer is represented by a series R-L-C sheet impedance and the dielectric layers by
transmission-line ABCD matrices. The cascade is

.. code-block:: text

	superstrate · shunt(1 / Z_sheet) · spacer · PEC

and the reflection coefficient is taken at the top interface against free space.
Frequencies are in GHz and lengths in millimetres unless noted otherwise.
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
import enum
import math
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple, Union

# 3rd party
import attr
import numpy

# this package
from rasdesign.geometry import UnitCellGeometry, validate

__all__ = (
		"AIR",
		"C0",
		"DB_FLOOR",
		"EPS0",
		"ETA0",
		"FR4",
		"ForwardModelError",
		"FrequencyGrid",
		"Layer",
		"MU0",
		"MaterialSpec",
		"OPEN_SHEET",
		"OpenSheet",
		"ReflectionCurve",
		"StackSpec",
		"absorption",
		"absorption_bands",
		"layer_abcd",
		"reflection_at",
		"reflection_curve",
		"reflection_from_sheet",
		"sheet_capacitance",
		"sheet_impedance",
		"sheet_inductance",
		"to_db",
		)

#: Speed of light in mm·GHz.
C0 = 299.792458

#: Impedance of free space, in ohms.
ETA0 = 376.730313

#: Permeability of free space, in H/m.
MU0 = 4e-7 * math.pi

#: Permittivity of free space, in F/m.
EPS0 = 8.8541878128e-12

#: Reflection magnitudes are floored at this value (in dB) to keep curves finite.
DB_FLOOR = -200.0

_MAGNITUDE_FLOOR = 10**(DB_FLOOR / 20)


class ForwardModelError(ValueError):
	"""
	Raised when the circuit model is evaluated outside its domain.
	"""


class OpenSheet(enum.Enum):
	"""
	Sentinel type for a stack without an FSS layer.
	"""

	OPEN = "open"


#: Use as :attr:`StackSpec.sheet_resistance` to omit the FSS sheet entirely.
OPEN_SHEET = OpenSheet.OPEN


def _at_least_one(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not value >= 1:
		raise ValueError(f"{attribute.name} must be at least 1, got {value}")


def _non_negative(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not value >= 0:
		raise ValueError(f"{attribute.name} must be non-negative, got {value}")


def _positive(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not value > 0:
		raise ValueError(f"{attribute.name} must be positive, got {value}")


@attr.frozen
class MaterialSpec:
	"""
	A lossy dielectric.
	"""

	#: Real relative permittivity.
	eps_r: float = attr.field(converter=float, validator=_at_least_one)

	#: Loss tangent.
	tan_delta: float = attr.field(default=0.0, converter=float, validator=_non_negative)

	@property
	def complex_permittivity(self) -> complex:
		"""
		The complex relative permittivity ``eps_r · (1 - j·tan_delta)``.
		"""

		return self.eps_r * (1 - 1j * self.tan_delta)

	def to_dict(self) -> Dict[str, float]:
		"""
		Returns a dictionary representation of the material.
		"""

		return attr.asdict(self)


#: FR4 laminate.
FR4 = MaterialSpec(4.4, 0.02)

#: Free space.
AIR = MaterialSpec(1.0, 0.0)


@attr.frozen
class Layer:
	"""
	A dielectric layer of fixed thickness.
	"""

	material: MaterialSpec

	#: Thickness in mm.
	thickness: float = attr.field(converter=float, validator=_positive)

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the layer.
		"""

		return {**self.material.to_dict(), "thickness": self.thickness}


def _check_sheet_resistance(instance: Any, attribute: attr.Attribute, value: Union[float, OpenSheet]) -> None:
	if value is OPEN_SHEET:
		return
	if not (math.isfinite(value) and value > 0):
		raise ValueError(f"sheet_resistance must be positive and finite, got {value}")


def _convert_sheet_resistance(value: Union[float, str, OpenSheet]) -> Union[float, OpenSheet]:
	if value is OPEN_SHEET or value == OPEN_SHEET.value:
		return OPEN_SHEET
	return float(value)  # type: ignore[arg-type]


@attr.frozen
class StackSpec:
	"""
	The layers of the absorber above the ground plane.

	The spacer thickness is not part of the stack; it is the ``t`` dimension of each geometry.
	"""

	#: The bonding layer above the FSS sheet, or :py:obj:`None` for no superstrate.
	superstrate: Optional[Layer] = Layer(FR4, 0.125)

	#: The dielectric between the FSS sheet and the ground plane.
	spacer: MaterialSpec = FR4

	#: Effective series resistance of the FSS sheet in ohms, or :data:`~.OPEN_SHEET`.
	sheet_resistance: Union[float, OpenSheet] = attr.field(
			default=100.0,
			converter=_convert_sheet_resistance,
			validator=_check_sheet_resistance,
			)

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the stack.
		"""

		sheet_resistance = self.sheet_resistance
		return {
				"superstrate": False if self.superstrate is None else self.superstrate.to_dict(),
				"spacer": self.spacer.to_dict(),
				"sheet_resistance": OPEN_SHEET.value if sheet_resistance is OPEN_SHEET else sheet_resistance,
				}


@attr.frozen
class FrequencyGrid:
	"""
	An evenly spaced frequency grid, in GHz.
	"""

	f_start: float = attr.field(default=1.0, converter=float)
	f_stop: float = attr.field(default=30.0, converter=float)
	f_step: float = attr.field(default=0.05, converter=float)

	def __attrs_post_init__(self) -> None:
		if not self.f_start > 0:
			raise ValueError(f"f_start must be positive, got {self.f_start}")
		if not self.f_stop > self.f_start:
			raise ValueError(f"f_stop ({self.f_stop}) must exceed f_start ({self.f_start})")
		if not self.f_step > 0:
			raise ValueError(f"f_step must be positive, got {self.f_step}")

		intervals = (self.f_stop - self.f_start) / self.f_step
		if abs(intervals - round(intervals)) > 1e-9 * max(1.0, intervals):
			raise ValueError(
					f"The span {self.f_start}-{self.f_stop} GHz is not a whole number of {self.f_step} GHz steps."
					)

	@property
	def count(self) -> int:
		"""
		The number of points in the grid.
		"""

		return int(round((self.f_stop - self.f_start) / self.f_step)) + 1

	def frequencies(self) -> numpy.ndarray:
		"""
		Returns the grid points.
		"""

		return numpy.round(self.f_start + numpy.arange(self.count) * self.f_step, 10)

	def to_dict(self) -> Dict[str, float]:
		"""
		Returns a dictionary representation of the grid.
		"""

		return attr.asdict(self)


def _as_float_array(values: Any) -> numpy.ndarray:
	return numpy.asarray(values, dtype=numpy.float64)


@attr.define(eq=False)
class ReflectionCurve:
	"""
	Reflection coefficient magnitudes over a frequency grid, in dB.
	"""

	grid: FrequencyGrid
	values: numpy.ndarray = attr.field(converter=_as_float_array)

	def __attrs_post_init__(self) -> None:
		if self.values.shape != (self.grid.count, ):
			raise ValueError(
					f"Expected {self.grid.count} reflection values for the grid, got {self.values.shape[0]}"
					)

	def __eq__(self, other: object) -> bool:
		if not isinstance(other, ReflectionCurve):
			return NotImplemented
		return self.grid == other.grid and numpy.array_equal(self.values, other.values)

	@property
	def magnitudes(self) -> numpy.ndarray:
		"""
		The linear reflection magnitudes ``|Γ|``.
		"""

		return 10**(self.values / 20)

	def is_passive(self, tolerance: float = 1e-9) -> bool:
		"""
		Returns whether no value exceeds 0 dB (plus ``tolerance``).

		:param tolerance:
		"""

		return bool(numpy.all(self.values <= tolerance))


def to_db(gamma: Any) -> numpy.ndarray:
	"""
	Convert reflection coefficients to ``20·log10|Γ|``, floored at :data:`~.DB_FLOOR`.

	:param gamma: Complex reflection coefficient(s).
	"""

	magnitude = numpy.maximum(numpy.abs(gamma), _MAGNITUDE_FLOOR)
	return 20 * numpy.log10(magnitude)


def sheet_inductance(geometry: UnitCellGeometry) -> float:
	"""
	Returns the strip-grating inductance of the cross arms, in henries.

	:param geometry:

	:raises ForwardModelError: If the strip width is not strictly between zero and the period.
	"""

	a, c, d = geometry.a * 1e-3, geometry.c * 1e-3, geometry.d * 1e-3

	if not 0 < geometry.c < geometry.a:
		raise ForwardModelError(f"Strip width c={geometry.c} must lie strictly between 0 and a={geometry.a}")
	if not geometry.d > 0:
		raise ForwardModelError(f"Arm length d={geometry.d} must be positive")

	return (MU0 / (2 * math.pi)) * a * (d / a) * math.log(1 / math.sin(math.pi * c / (2 * a)))


def sheet_capacitance(geometry: UnitCellGeometry, material: MaterialSpec) -> float:
	"""
	Returns the end-cap gap capacitance, in farads.

	The effective permittivity is the mean of the material and free space.

	:param geometry:
	:param material: The dielectric surrounding the sheet.

	:raises ForwardModelError: If the end-cap gap ``a - b`` is not strictly between zero and the period.
	"""

	a, b = geometry.a * 1e-3, geometry.b * 1e-3
	gap = a - b

	if not 0 < geometry.a - geometry.b < geometry.a:
		raise ForwardModelError(
				f"End-cap gap a-b={geometry.a - geometry.b} must lie strictly between 0 and a={geometry.a}"
				)

	eps_eff = (material.eps_r + 1) / 2
	return eps_eff * (2 * EPS0 / math.pi) * a * (b / a) * math.log(1 / math.sin(math.pi * gap / (2 * a)))


def sheet_impedance(
		geometry: UnitCellGeometry,
		material: MaterialSpec,
		sheet_resistance: float,
		frequency: Any,
		) -> Any:
	"""
	Returns the series R-L-C impedance of the resistive Jerusalem-cross sheet.

	:param geometry:
	:param material: The dielectric surrounding the sheet.
	:param sheet_resistance: The series resistance, in ohms.
	:param frequency: Frequency or array of frequencies in GHz.

	:returns: A complex scalar or array matching ``frequency``.
	"""

	freqs = _as_float_array(frequency)
	if numpy.any(freqs <= 0):
		raise ForwardModelError("Frequencies must be positive")

	inductance = sheet_inductance(geometry)
	capacitance = sheet_capacitance(geometry, material)
	omega = 2 * math.pi * freqs * 1e9

	impedance = sheet_resistance + 1j * omega * inductance - 1j / (omega * capacitance)

	if freqs.ndim == 0:
		return complex(impedance)
	return numpy.asarray(impedance)


def layer_abcd(material: MaterialSpec, thickness: float, frequency: Any) -> numpy.ndarray:
	"""
	Returns the ABCD matrix of a transmission-line section.

	:param material:
	:param thickness: Thickness in mm.
	:param frequency: Frequency or array of frequencies in GHz.

	:returns: An array of shape ``(2, 2)``, or ``(n, 2, 2)`` for ``n`` frequencies.
	"""

	freqs = _as_float_array(frequency)
	root_eps = numpy.sqrt(complex(material.complex_permittivity))
	electrical_length = (2 * math.pi * freqs / C0) * root_eps * thickness
	char_impedance = ETA0 / root_eps

	cos = numpy.cos(electrical_length)
	sin = numpy.sin(electrical_length)

	matrix = numpy.empty(freqs.shape + (2, 2), dtype=numpy.complex128)
	matrix[..., 0, 0] = cos
	matrix[..., 0, 1] = 1j * char_impedance * sin
	matrix[..., 1, 0] = 1j * sin / char_impedance
	matrix[..., 1, 1] = cos
	return matrix


@lru_cache(maxsize=64)
def _fixed_sections(
		stack: StackSpec,
		spacer_thickness: float,
		frequencies: Tuple[float, ...],
		) -> Tuple[Optional[numpy.ndarray], numpy.ndarray]:
	# The superstrate and spacer sections only depend on the stack and thickness,
	# so they are shared between all geometries of a dataset.
	freqs = numpy.asarray(frequencies)

	if stack.superstrate is None:
		superstrate = None
	else:
		superstrate = layer_abcd(stack.superstrate.material, stack.superstrate.thickness, freqs)
		superstrate.flags.writeable = False

	spacer = layer_abcd(stack.spacer, spacer_thickness, freqs)
	spacer.flags.writeable = False

	return superstrate, spacer


def _cascade(
		admittance: Optional[numpy.ndarray],
		stack: StackSpec,
		spacer_thickness: float,
		freqs: numpy.ndarray,
		) -> numpy.ndarray:
	superstrate, matrix = _fixed_sections(stack, float(spacer_thickness), tuple(freqs.tolist()))

	if admittance is not None:
		shunt = numpy.zeros(freqs.shape + (2, 2), dtype=numpy.complex128)
		shunt[..., 0, 0] = 1
		shunt[..., 1, 0] = admittance
		shunt[..., 1, 1] = 1
		matrix = shunt @ matrix

	if superstrate is not None:
		matrix = superstrate @ matrix

	# PEC load: Z_in = B / D, so Γ = (B - η₀D) / (B + η₀D) without dividing by D.
	b_term = matrix[..., 0, 1]
	d_term = matrix[..., 1, 1]
	return (b_term - ETA0 * d_term) / (b_term + ETA0 * d_term)


def _sheet_admittance(geometry: UnitCellGeometry, stack: StackSpec, freqs: numpy.ndarray) -> Optional[numpy.ndarray]:
	if stack.sheet_resistance is OPEN_SHEET:
		return None

	material = stack.superstrate.material if stack.superstrate is not None else stack.spacer
	return 1 / sheet_impedance(geometry, material, stack.sheet_resistance, freqs)  # type: ignore[arg-type]


def _check_geometry(geometry: UnitCellGeometry) -> None:
	violations = validate(geometry)
	if violations:
		raise ForwardModelError(f"Infeasible geometry {geometry}: violates {', '.join(violations)}")


def reflection_at(geometry: UnitCellGeometry, stack: StackSpec, frequency: float) -> Tuple[complex, float]:
	"""
	Returns the reflection coefficient of the absorber at a single frequency.

	:param geometry:
	:param stack:
	:param frequency: Frequency in GHz.

	:returns: The complex reflection coefficient and its magnitude in dB.
	"""

	_check_geometry(geometry)

	freqs = _as_float_array([frequency])
	gamma = _cascade(_sheet_admittance(geometry, stack, freqs), stack, geometry.t, freqs)[0]
	return complex(gamma), float(to_db(gamma))


def reflection_from_sheet(
		sheet: complex,
		stack: StackSpec,
		frequency: float,
		spacer_thickness: float,
		) -> Tuple[complex, float]:
	"""
	Returns the reflection coefficient for an explicit sheet impedance.

	The stack's ``sheet_resistance`` is ignored in favour of ``sheet``.

	:param sheet: The sheet impedance in ohms.
	:param stack:
	:param frequency: Frequency in GHz.
	:param spacer_thickness: Spacer thickness in mm.

	:returns: The complex reflection coefficient and its magnitude in dB.
	"""

	if sheet == 0:
		raise ForwardModelError("A zero sheet impedance shorts the stack at the sheet plane.")
	if not spacer_thickness >= 0:
		raise ForwardModelError(f"Spacer thickness must be non-negative, got {spacer_thickness}")

	freqs = _as_float_array([frequency])
	admittance = numpy.full(freqs.shape, 1 / complex(sheet))
	gamma = _cascade(admittance, stack, spacer_thickness, freqs)[0]
	return complex(gamma), float(to_db(gamma))


def reflection_curve(geometry: UnitCellGeometry, stack: StackSpec, grid: FrequencyGrid) -> ReflectionCurve:
	"""
	Returns the reflection coefficient of the absorber over a frequency grid.

	:param geometry:
	:param stack:
	:param grid:
	"""

	_check_geometry(geometry)

	freqs = grid.frequencies()
	gamma = _cascade(_sheet_admittance(geometry, stack, freqs), stack, geometry.t, freqs)
	return ReflectionCurve(grid, to_db(gamma))


def absorption(curve: ReflectionCurve) -> numpy.ndarray:
	"""
	Returns the absorption ``1 - |Γ|²`` at each grid point.

	The ground plane blocks transmission, so all power not reflected is absorbed.

	:param curve:
	"""

	return numpy.clip(1 - curve.magnitudes**2, 0.0, 1.0)


def absorption_bands(curve: ReflectionCurve, threshold_db: float = -10.0) -> List[Tuple[float, float]]:
	"""
	Returns the frequency bands over which the reflection stays at or below ``threshold_db``.

	:param curve:
	:param threshold_db:

	:returns: ``(f_lo, f_hi)`` pairs in GHz, in ascending order.
	"""

	freqs = curve.grid.frequencies()
	below = curve.values <= threshold_db

	bands = []
	start: Optional[int] = None

	for idx, flag in enumerate(below):
		if flag and start is None:
			start = idx
		elif not flag and start is not None:
			bands.append((float(freqs[start]), float(freqs[idx - 1])))
			start = None

	if start is not None:
		bands.append((float(freqs[start]), float(freqs[-1])))

	return bands
