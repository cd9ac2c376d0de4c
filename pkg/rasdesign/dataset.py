#!/usr/bin/env python3
#
#  dataset.py
"""
Generation, persistence and splitting of (geometry, reflection curve) datasets.

Datasets are stored as a comma-separated file with the header
``a_mm,b_mm,c_mm,d_mm,t_mm,r_0001,...`` and a ``<stem>.meta.toml`` sidecar
recording the grid, stack, sweep and seed.
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
import csv
import hashlib
import math
import time
from functools import partial
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

# 3rd party
import attr
import click
import dom_toml
import numpy
from consolekit.terminal_colours import ColourTrilean, resolve_color_default
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

# this package
from rasdesign.em_forward import FrequencyGrid, ReflectionCurve, StackSpec, reflection_curve
from rasdesign.geometry import DIMENSIONS, SweepTable, UnitCellGeometry, enumerate_sweep
from rasdesign.utils import atomic_write, atomic_write_all, sample_plural

__all__ = (
		"CURVE_HEADER",
		"Dataset",
		"DatasetGenerator",
		"DatasetMetadata",
		"DatasetParseError",
		"GEOMETRY_COLUMNS",
		"PRNG_NAME",
		"Sample",
		"SplitSpec",
		"fingerprint",
		"generate",
		"load",
		"load_curve",
		"merge",
		"metadata_path",
		"quantize_curve",
		"save",
		"save_curve",
		"split",
		"thicknesses",
		)

#: Names of the geometry columns in dataset files.
GEOMETRY_COLUMNS: Tuple[str, ...] = tuple(f"{dim}_mm" for dim in DIMENSIONS)

#: Header of single-curve files.
CURVE_HEADER: Tuple[str, str] = ("f_GHz", "r_dB")

#: The pseudo-random generator used for shuffling, recorded in dataset metadata.
PRNG_NAME = "numpy.random.PCG64"


def quantize_curve(curve: ReflectionCurve) -> ReflectionCurve:
	"""
	Returns ``curve`` with its values rounded exactly as :func:`~.save` writes them (6 decimal places),
	so a saved dataset loads back equal to the one in memory.

	:param curve:
	"""

	return ReflectionCurve(curve.grid, numpy.array([float(f"{value:.6f}") for value in curve.values]))


class DatasetParseError(ValueError):
	"""
	Raised when a dataset or curve file is malformed.

	:param message:
	:param lineno: The 1-based line number of the offending line.
	:param filename:
	"""

	def __init__(self, message: str, lineno: int, filename: Optional[PathLike] = None):
		self.lineno = lineno
		self.filename = filename

		location = f"line {lineno}" if filename is None else f"{PathPlus(filename).as_posix()}, line {lineno}"
		super().__init__(f"{location}: {message}")


@attr.define(eq=False)
class Sample:
	"""
	A unit cell and its simulated reflection curve.
	"""

	geometry: UnitCellGeometry
	curve: ReflectionCurve

	def __eq__(self, other: object) -> bool:
		if not isinstance(other, Sample):
			return NotImplemented
		return self.geometry == other.geometry and self.curve == other.curve


def _generator_version() -> str:
	# this package
	from rasdesign import __version__

	return f"rasdesign {__version__}"


@attr.frozen
class DatasetMetadata:
	"""
	Describes how a dataset was produced.
	"""

	stack: StackSpec
	grid: FrequencyGrid

	#: The sweep the samples were enumerated from, or :py:obj:`None` for merged datasets.
	sweep: Optional[SweepTable] = None

	#: Seed recorded for downstream splitting.
	seed: int = 0

	generator_version: str = attr.field(factory=_generator_version)
	prng: str = PRNG_NAME

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the metadata.
		"""

		data: Dict[str, Any] = {
				"generator_version": self.generator_version,
				"seed": self.seed,
				"prng": self.prng,
				"grid": self.grid.to_dict(),
				"stack": self.stack.to_dict(),
				}

		if self.sweep is not None:
			data["sweep"] = self.sweep.to_dict()

		return data

	@classmethod
	def from_dict(cls, data: Dict[str, Any]) -> "DatasetMetadata":
		"""
		Construct metadata from the mapping written by :meth:`~.to_dict`.

		:param data:
		"""

		# this package
		from rasdesign.config import GridParser, StackParser, SweepParser

		sweep = SweepParser().build(data["sweep"]) if "sweep" in data else None

		return cls(
				stack=StackParser().build(data.get("stack", {})),
				grid=GridParser().build(data.get("grid", {})),
				sweep=sweep,
				seed=int(data.get("seed", 0)),
				generator_version=str(data.get("generator_version", _generator_version())),
				prng=str(data.get("prng", PRNG_NAME)),
				)


@attr.define(eq=False)
class Dataset:
	"""
	A sequence of samples sharing one frequency grid and stack.

	Duplicate geometries are dropped, keeping the first occurrence.
	"""

	samples: List[Sample] = attr.field(converter=list)
	metadata: DatasetMetadata

	def __attrs_post_init__(self) -> None:
		if not self.samples:
			raise ValueError("empty dataset")

		seen = set()
		unique = []

		for sample in self.samples:
			if sample.curve.grid != self.metadata.grid:
				raise ValueError(f"Sample {sample.geometry} does not use the dataset's frequency grid.")
			if sample.geometry not in seen:
				seen.add(sample.geometry)
				unique.append(sample)

		self.samples = unique

	def __len__(self) -> int:
		return len(self.samples)

	def __eq__(self, other: object) -> bool:
		if not isinstance(other, Dataset):
			return NotImplemented
		return self.metadata == other.metadata and self.samples == other.samples

	@property
	def grid(self) -> FrequencyGrid:
		"""
		The frequency grid shared by all samples.
		"""

		return self.metadata.grid

	def geometry_matrix(self) -> numpy.ndarray:
		"""
		Returns an ``n × 5`` array of ``(a, b, c, d, t)`` rows.
		"""

		return numpy.array([sample.geometry.as_tuple() for sample in self.samples], dtype=numpy.float64)

	def curve_matrix(self) -> numpy.ndarray:
		"""
		Returns an ``n × p`` array of reflection values in dB.
		"""

		return numpy.stack([sample.curve.values for sample in self.samples])

	def subset(self, indices: Iterable[int]) -> "Dataset":
		"""
		Returns a dataset holding the samples at ``indices``, in that order.

		:param indices:
		"""

		return Dataset([self.samples[idx] for idx in indices], self.metadata)


def thicknesses(dataset: Dataset) -> List[float]:
	"""
	Returns the distinct spacer thicknesses in the dataset, in ascending order.

	:param dataset:
	"""

	return sorted({sample.geometry.t for sample in dataset.samples})


def fingerprint(dataset: Dataset) -> str:
	"""
	Returns a SHA-256 digest over the dataset's geometries and curves.

	:param dataset:
	"""

	digest = hashlib.sha256()
	digest.update(numpy.ascontiguousarray(dataset.geometry_matrix(), dtype="<f8").tobytes())
	digest.update(numpy.ascontiguousarray(dataset.curve_matrix(), dtype="<f8").tobytes())
	return digest.hexdigest()


class DatasetGenerator:
	"""
	Evaluates the forward model over every geometry of a sweep.

	:param table: The parametric sweep.
	:param stack:
	:param grid:
	:param seed: Seed recorded in the metadata for downstream splitting.
	:param verbose: Whether to enable verbose output.
	:param colour: Whether to use coloured output.
	"""

	#: Number of samples between progress reports.
	report_every: int = 1000

	def __init__(
			self,
			table: SweepTable,
			stack: StackSpec,
			grid: FrequencyGrid,
			seed: int = 0,
			*,
			verbose: bool = False,
			colour: ColourTrilean = None,
			):
		self.table = table
		self.stack = stack
		self.grid = grid
		self.seed = seed

		#: Whether to enable verbose output.
		self.verbose = verbose

		#: Whether to use coloured output.
		self.colour = resolve_color_default(colour)

		self._echo = partial(click.echo, color=self.colour)

		#: Wall-clock duration of the last :meth:`generate` call, in seconds.
		self.elapsed: float = 0.0

	def _echo_if_v(self, *args, **kwargs) -> None:
		if self.verbose:
			self._echo(*args, **kwargs)

	def generate(self) -> Dataset:
		"""
		Generate the dataset.

		:raises ValueError: If the sweep yields no feasible geometry.
		"""

		start = time.perf_counter()
		geometries = enumerate_sweep(self.table)

		if not geometries:
			raise ValueError("empty dataset: the sweep yields no feasible geometry")

		self._echo_if_v(f"Simulating {len(geometries)} {sample_plural(len(geometries))}")

		samples = []
		for idx, geometry in enumerate(geometries, start=1):
			samples.append(Sample(geometry, quantize_curve(reflection_curve(geometry, self.stack, self.grid))))
			if idx % self.report_every == 0:
				self._echo_if_v(f"  {idx}/{len(geometries)}")

		metadata = DatasetMetadata(stack=self.stack, grid=self.grid, sweep=self.table, seed=self.seed)
		dataset = Dataset(samples, metadata)

		self.elapsed = time.perf_counter() - start
		return dataset


def generate(
		table: SweepTable,
		stack: StackSpec,
		grid: FrequencyGrid,
		seed: int = 0,
		) -> Dataset:
	"""
	Generate one sample per feasible geometry of ``table``.

	:param table:
	:param stack:
	:param grid:
	:param seed: Seed recorded in the metadata for downstream splitting.
	"""

	return DatasetGenerator(table, stack, grid, seed).generate()


def merge(datasets: Sequence[Dataset]) -> Dataset:
	"""
	Concatenate datasets sharing a grid and stack, dropping repeated geometries.

	:param datasets:
	"""

	if not datasets:
		raise ValueError("No datasets to merge.")

	first = datasets[0].metadata

	for other in datasets[1:]:
		if other.metadata.grid != first.grid:
			raise ValueError(f"Cannot merge datasets with different grids ({first.grid} vs {other.metadata.grid}).")
		if other.metadata.stack != first.stack:
			raise ValueError("Cannot merge datasets with different stacks.")

	if len(datasets) == 1:
		return datasets[0]

	samples = [sample for dataset in datasets for sample in dataset.samples]
	metadata = DatasetMetadata(stack=first.stack, grid=first.grid, sweep=None, seed=first.seed)
	return Dataset(samples, metadata)


@attr.frozen
class SplitSpec:
	"""
	How to partition a dataset into training and test sets.
	"""

	train_fraction: float = attr.field(default=0.8, converter=float)
	seed: int = attr.field(default=0, converter=int)

	@train_fraction.validator
	def _check_fraction(self, attribute: attr.Attribute, value: float) -> None:
		if not 0 < value < 1:
			raise ValueError(f"train_fraction must lie strictly between 0 and 1, got {value}")


def split_indices(count: int, spec: SplitSpec) -> Tuple[numpy.ndarray, numpy.ndarray]:
	"""
	Returns the shuffled train and test indices for a dataset of ``count`` samples.

	The shuffle is a seeded Fisher–Yates permutation from :data:`~.PRNG_NAME`.

	:param count:
	:param spec:
	"""

	n_train = math.floor(count * spec.train_fraction + 1e-9)

	if n_train == 0 or n_train == count:
		raise ValueError(
				f"A train fraction of {spec.train_fraction} leaves one side of a {count}-sample split empty."
				)

	order = numpy.random.default_rng(spec.seed).permutation(count)
	return order[:n_train], order[n_train:]


def split(dataset: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
	"""
	Shuffle the dataset and split it into training and test sets.

	:param dataset:
	:param spec:

	:returns: The training and test datasets.
	"""

	train_idx, test_idx = split_indices(len(dataset), spec)
	return dataset.subset(train_idx), dataset.subset(test_idx)


def metadata_path(filename: PathLike) -> PathPlus:
	"""
	Returns the path of the metadata sidecar for a dataset file.

	:param filename:
	"""

	filename = PathPlus(filename)
	return filename.with_name(f"{filename.stem}.meta.toml")


def _curve_columns(count: int) -> List[str]:
	return [f"r_{idx:04d}" for idx in range(1, count + 1)]


def save(dataset: Dataset, filename: PathLike) -> PathPlus:
	"""
	Write the dataset and its metadata sidecar.

	Geometries are written at full precision and reflection values with 6 decimal places.

	:param dataset:
	:param filename:

	:returns: The path of the dataset file.
	"""

	header = [*GEOMETRY_COLUMNS, *_curve_columns(dataset.grid.count)]
	lines = [','.join(header)]

	for sample in dataset.samples:
		geometry = [repr(value) for value in sample.geometry.as_tuple()]
		curve = [f"{value:.6f}" for value in sample.curve.values]
		lines.append(','.join(geometry + curve))

	files: Dict[PathLike, str] = {
			filename: '\n'.join(lines) + '\n',
			metadata_path(filename): dom_toml.dumps(dataset.metadata.to_dict()),
			}
	return atomic_write_all(files)[0]


def _parse_float(cell: str, lineno: int, filename: PathLike) -> float:
	try:
		value = float(cell)
	except ValueError:
		raise DatasetParseError(f"non-numeric value {cell!r}", lineno, filename) from None

	if not math.isfinite(value):
		raise DatasetParseError(f"non-finite value {cell!r}", lineno, filename)

	return value


def load(filename: PathLike) -> Dataset:
	"""
	Read a dataset written by :func:`~.save`.

	:param filename:

	:raises DatasetParseError: If the file is malformed.
	:raises FileNotFoundError: If the file or its metadata sidecar is missing.
	"""

	filename = PathPlus(filename)
	sidecar = metadata_path(filename)

	if not sidecar.is_file():
		raise FileNotFoundError(f"Metadata file {sidecar.as_posix()!r} not found.")

	metadata = DatasetMetadata.from_dict(dom_toml.load(sidecar))
	grid = metadata.grid
	expected_header = [*GEOMETRY_COLUMNS, *_curve_columns(grid.count)]
	n_geometry = len(GEOMETRY_COLUMNS)

	samples = []

	with filename.open(newline='') as fp:
		reader = csv.reader(fp)

		for row in reader:
			lineno = reader.line_num

			if lineno == 1:
				if row != expected_header:
					raise DatasetParseError(
							f"malformed header: expected {len(expected_header)} columns "
							f"({n_geometry} geometry + {grid.count} reflection)",
							lineno,
							filename,
							)
				continue

			if len(row) != len(expected_header):
				raise DatasetParseError(
						f"expected {len(expected_header)} columns, got {len(row)}",
						lineno,
						filename,
						)

			values = [_parse_float(cell, lineno, filename) for cell in row]
			geometry = UnitCellGeometry(*values[:n_geometry])
			samples.append(Sample(geometry, ReflectionCurve(grid, numpy.array(values[n_geometry:]))))

	if not samples:
		raise DatasetParseError("no samples", max(reader.line_num, 1), filename)

	return Dataset(samples, metadata)


def save_curve(curve: ReflectionCurve, filename: PathLike) -> PathPlus:
	"""
	Write a single reflection curve as ``f_GHz,r_dB`` rows.

	:param curve:
	:param filename:
	"""

	lines = [','.join(CURVE_HEADER)]
	for freq, value in zip(curve.grid.frequencies(), curve.values):
		lines.append(f"{float(freq)!r},{value:.6f}")

	return atomic_write(filename, '\n'.join(lines) + '\n')


def load_curve(filename: PathLike) -> ReflectionCurve:
	"""
	Read a single reflection curve written by :func:`~.save_curve`.

	The frequency grid is reconstructed from the first column and must be evenly spaced.

	:param filename:

	:raises DatasetParseError: If the file is malformed.
	"""

	filename = PathPlus(filename)
	freqs: List[float] = []
	values: List[float] = []

	with filename.open(newline='') as fp:
		reader = csv.reader(fp)

		for row in reader:
			lineno = reader.line_num

			if lineno == 1:
				if tuple(row) != CURVE_HEADER:
					raise DatasetParseError(f"malformed header: expected {','.join(CURVE_HEADER)!r}", lineno, filename)
				continue

			if len(row) != 2:
				raise DatasetParseError(f"expected 2 columns, got {len(row)}", lineno, filename)

			freqs.append(_parse_float(row[0], lineno, filename))
			values.append(_parse_float(row[1], lineno, filename))

	if len(freqs) < 2:
		raise DatasetParseError("a curve needs at least two points", max(len(freqs) + 1, 1), filename)

	step = round(freqs[1] - freqs[0], 10)

	try:
		grid = FrequencyGrid(freqs[0], freqs[-1], step)
	except ValueError as e:
		raise DatasetParseError(f"frequencies do not form an even grid ({e})", 2, filename) from None

	expected = grid.frequencies()
	if len(expected) != len(freqs):
		raise DatasetParseError("frequencies do not form an even grid", 2, filename)

	for idx, (freq, want) in enumerate(zip(freqs, expected)):
		if abs(freq - want) > 1e-6:
			raise DatasetParseError(f"frequency {freq} breaks the {step} GHz spacing", idx + 2, filename)

	return ReflectionCurve(grid, numpy.array(values))
