#!/usr/bin/env python3
#
#  pipeline.py
"""
Inverse design: train models mapping reflection curves to unit-cell dimensions,
predict geometries, and validate predictions by re-simulating them.

A case 1 model predicts ``(a, b, c, d)`` for one fixed spacer thickness;
a case 2 model also predicts the thickness ``t``.
"""  # noqa: D400
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
from typing import Any, Dict, List, Optional, Sequence, Tuple

# 3rd party
import attr
import dom_toml
import numpy
from consolekit.terminal_colours import ColourTrilean
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

# this package
from rasdesign.dataset import Dataset, Sample, SplitSpec, fingerprint, split, split_indices, thicknesses
from rasdesign.em_forward import (
		ForwardModelError,
		FrequencyGrid,
		ReflectionCurve,
		StackSpec,
		absorption_bands,
		reflection_curve
		)
from rasdesign.features import (
		FeatureScaler,
		PcaBasis,
		TargetScaler,
		cap_components,
		pca_fit,
		pca_transform
		)
from rasdesign.geometry import DIMENSIONS, UnitCellGeometry, validate
from rasdesign.neuralnet import (
		DEFAULT_HIDDEN_DIMS,
		INFER,
		NetworkSpec,
		NetworkState,
		Trainer,
		TrainHistory,
		TrainingConfig,
		forward
		)
from rasdesign.utils import atomic_write_all, format_row

__all__ = (
		"CASE1",
		"CASE2",
		"GridMismatchError",
		"MODEL_FORMAT_VERSION",
		"PipelineConfig",
		"Prediction",
		"SampleResult",
		"THICKNESS_RANGE",
		"TrainedModel",
		"ValidationReport",
		"band_coverage",
		"band_limits",
		"depth_study_table",
		"format_report_table",
		"hidden_dims_for_depth",
		"layer_depth_study",
		"load_model",
		"percentage_error",
		"predict_geometry",
		"round_trip_validate",
		"save_model",
		"save_report",
		"select_samples",
		"train_case1",
		"train_case2",
		)

#: Tag of models predicting ``(a, b, c, d)`` at a fixed thickness.
CASE1 = "case1"

#: Tag of models predicting ``(a, b, c, d, t)``.
CASE2 = "case2"

#: Version of the model file layout.
MODEL_FORMAT_VERSION = 1

#: Minimum separation kept between nested dimensions when clamping predictions, in mm.
_CLAMP_MARGIN = 0.01

#: Range predicted spacer thicknesses are held to, in mm.
THICKNESS_RANGE: Tuple[float, float] = (1.0, 10.0)


class GridMismatchError(ValueError):
	"""
	Raised when a curve's frequency grid differs from the grid a model was trained on.

	:param expected:
	:param actual:
	"""

	def __init__(self, expected: FrequencyGrid, actual: FrequencyGrid):
		self.expected = expected
		self.actual = actual
		super().__init__(
				f"The curve's frequency grid ({_describe_grid(actual)}) does not match "
				f"the model's grid ({_describe_grid(expected)})."
				)


def _describe_grid(grid: FrequencyGrid) -> str:
	return f"{grid.f_start}-{grid.f_stop} GHz in {grid.f_step} GHz steps, {grid.count} points"


def _hidden_tuple(values: Any) -> Tuple[int, ...]:
	return tuple(int(v) for v in values)


@attr.frozen
class PipelineConfig:
	"""
	Settings for training an inverse-design model.
	"""

	hidden_dims: Tuple[int, ...] = attr.field(default=DEFAULT_HIDDEN_DIMS, converter=_hidden_tuple)
	leaky_slope: float = 0.01
	l2_lambda: float = 1e-4
	bn_momentum: float = 0.9
	bn_epsilon: float = 1e-5

	training: TrainingConfig = TrainingConfig()

	#: Requested number of principal components; capped by the training split size.
	n_components: int = attr.field(default=300, converter=int)

	train_fraction: float = attr.field(default=0.8, converter=float)

	#: Seed of the train/test shuffle.
	seed: int = attr.field(default=0, converter=int)

	def network_spec(self, input_dim: int, output_dim: int) -> NetworkSpec:
		"""
		Returns the network architecture for the given input and output widths.

		:param input_dim:
		:param output_dim:
		"""

		return NetworkSpec(
				input_dim,
				self.hidden_dims,
				output_dim,
				leaky_slope=self.leaky_slope,
				l2_lambda=self.l2_lambda,
				bn_momentum=self.bn_momentum,
				bn_epsilon=self.bn_epsilon,
				)

	def split_spec(self) -> SplitSpec:
		"""
		Returns the train/test split settings.
		"""

		return SplitSpec(self.train_fraction, self.seed)

	def with_seed(self, seed: int) -> "PipelineConfig":
		"""
		Returns a copy using ``seed`` for both the split and the training run.

		:param seed:
		"""

		return attr.evolve(self, seed=seed, training=attr.evolve(self.training, seed=seed))

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a flat dictionary representation, in the layout of the ``[training]`` table.
		"""

		return {
				"hidden_dims": list(self.hidden_dims),
				"leaky_slope": self.leaky_slope,
				"l2_lambda": self.l2_lambda,
				"bn_momentum": self.bn_momentum,
				"bn_epsilon": self.bn_epsilon,
				"learning_rate": self.training.learning_rate,
				"beta1": self.training.beta1,
				"beta2": self.training.beta2,
				"epsilon": self.training.epsilon,
				"batch_size": self.training.batch_size,
				"max_epochs": self.training.max_epochs,
				"patience": self.training.patience,
				"n_components": self.n_components,
				"train_fraction": self.train_fraction,
				"seed": self.seed,
				}


@attr.define(eq=False)
class TrainedModel:
	"""
	Everything needed to predict a geometry from a reflection curve.
	"""

	#: Either :data:`~.CASE1` or :data:`~.CASE2`.
	case: str
	feature_scaler: FeatureScaler
	pca: PcaBasis
	target_scaler: TargetScaler
	state: NetworkState
	history: TrainHistory
	grid: FrequencyGrid
	stack: StackSpec
	config: PipelineConfig

	#: Per-output minima of the training sweep, used to clamp predictions.
	bounds_min: numpy.ndarray = attr.field(converter=numpy.asarray)

	#: Per-output maxima of the training sweep, used to clamp predictions.
	bounds_max: numpy.ndarray = attr.field(converter=numpy.asarray)

	#: Digest of the dataset the model was trained on.
	dataset_fingerprint: str

	#: The spacer thickness of a case 1 model.
	thickness: Optional[float] = None

	def __attrs_post_init__(self) -> None:
		if self.case not in {CASE1, CASE2}:
			raise ValueError(f"Unknown model case {self.case!r}")
		if self.case == CASE1 and self.thickness is None:
			raise ValueError("A case 1 model needs a thickness")
		if self.state.spec.input_dim != self.pca.n_components:
			raise ValueError("The network input width must equal the number of principal components")
		if self.state.spec.output_dim != len(self.outputs):
			raise ValueError(f"A {self.case} model has {len(self.outputs)} outputs")

	@property
	def spec(self) -> NetworkSpec:
		"""
		The network architecture.
		"""

		return self.state.spec

	@property
	def outputs(self) -> Tuple[str, ...]:
		"""
		The names of the predicted dimensions, in output order.
		"""

		return DIMENSIONS if self.case == CASE2 else DIMENSIONS[:4]


def _output_matrix(dataset: Dataset, n_outputs: int) -> numpy.ndarray:
	return dataset.geometry_matrix()[:, :n_outputs]


def _train(
		dataset: Dataset,
		case: str,
		config: PipelineConfig,
		thickness: Optional[float],
		verbose: bool,
		colour: ColourTrilean,
		) -> TrainedModel:
	n_outputs = 4 if case == CASE1 else 5
	train_ds, test_ds = split(dataset, config.split_spec())

	train_curves = train_ds.curve_matrix()
	feature_scaler = FeatureScaler.fit(train_curves)
	scaled_train = feature_scaler.apply(train_curves)

	n_components = cap_components(config.n_components, len(train_ds), scaled_train.shape[1])
	pca = pca_fit(scaled_train, n_components)

	train_x = pca_transform(pca, scaled_train)
	test_x = pca_transform(pca, feature_scaler.apply(test_ds.curve_matrix()))

	train_targets = _output_matrix(train_ds, n_outputs)
	target_scaler = TargetScaler.fit(train_targets)
	train_y = target_scaler.apply(train_targets)
	test_y = target_scaler.apply(_output_matrix(test_ds, n_outputs))

	spec = config.network_spec(n_components, n_outputs)
	trainer = Trainer(spec, config.training, verbose=verbose, colour=colour)
	state, history = trainer.fit((train_x, train_y), (test_x, test_y))

	everything = _output_matrix(dataset, n_outputs)

	return TrainedModel(
			case=case,
			feature_scaler=feature_scaler,
			pca=pca,
			target_scaler=target_scaler,
			state=state,
			history=history,
			grid=dataset.grid,
			stack=dataset.metadata.stack,
			config=config,
			bounds_min=everything.min(axis=0),
			bounds_max=everything.max(axis=0),
			dataset_fingerprint=fingerprint(dataset),
			thickness=thickness,
			)


def train_case1(
		dataset: Dataset,
		config: PipelineConfig = PipelineConfig(),
		*,
		verbose: bool = False,
		colour: ColourTrilean = None,
		) -> TrainedModel:
	"""
	Train a model predicting ``(a, b, c, d)`` from curves sharing one spacer thickness.

	:param dataset:
	:param config:
	:param verbose: Whether to report per-epoch progress.
	:param colour: Whether to use coloured output.

	:raises ValueError: If the dataset mixes thicknesses.
	"""

	found = thicknesses(dataset)

	if len(found) != 1:
		raise ValueError(
				f"A case 1 model needs a single thickness, but the dataset has {len(found)} "
				f"({', '.join(map(str, found))}). Train a case 2 model instead."
				)

	return _train(dataset, CASE1, config, found[0], verbose, colour)


def train_case2(
		dataset: Dataset,
		config: PipelineConfig = PipelineConfig(),
		*,
		verbose: bool = False,
		colour: ColourTrilean = None,
		) -> TrainedModel:
	"""
	Train a model predicting ``(a, b, c, d, t)`` from curves spanning several thicknesses.

	:param dataset:
	:param config:
	:param verbose: Whether to report per-epoch progress.
	:param colour: Whether to use coloured output.

	:raises ValueError: If the dataset has a single thickness.
	"""

	found = thicknesses(dataset)

	if len(found) < 2:
		raise ValueError(
				f"A case 2 model needs at least two thicknesses, but the dataset only has t={found[0]}. "
				"Train a case 1 model instead."
				)

	return _train(dataset, CASE2, config, None, verbose, colour)


@attr.frozen(eq=False)
class Prediction:
	"""
	A predicted geometry.
	"""

	geometry: UnitCellGeometry

	#: The network output in mm, before clamping.
	raw: Tuple[float, ...] = attr.field(converter=tuple)

	#: Names of the dimensions changed by clamping.
	clamped: Tuple[str, ...] = attr.field(default=(), converter=tuple)

	@property
	def was_clamped(self) -> bool:
		"""
		Whether any dimension was clamped.
		"""

		return bool(self.clamped)


def _clamp(model: TrainedModel, raw: numpy.ndarray) -> Tuple[UnitCellGeometry, Tuple[str, ...]]:
	values = dict(zip(model.outputs, numpy.clip(raw, model.bounds_min, model.bounds_max).tolist()))

	if model.case == CASE1:
		values['t'] = model.thickness
	else:
		values['t'] = min(max(values['t'], THICKNESS_RANGE[0]), THICKNESS_RANGE[1])

	values['b'] = min(values['b'], values['a'] - _CLAMP_MARGIN)
	values['c'] = min(values['c'], values['b'] - _CLAMP_MARGIN)
	values['d'] = min(values['d'], values['a'] - _CLAMP_MARGIN)

	geometry = UnitCellGeometry(**values)
	violations = validate(geometry)
	if violations:
		raise ForwardModelError(f"Clamped prediction {geometry} violates {', '.join(violations)}")

	clamped = tuple(name for name, value in zip(model.outputs, raw.tolist()) if getattr(geometry, name) != value)
	return geometry, clamped


def predict_geometry(model: TrainedModel, curve: ReflectionCurve) -> Prediction:
	"""
	Predict the unit cell producing ``curve``.

	Outputs are clamped to the per-dimension range of the training sweep, and then
	nested so that ``c < b < a`` and ``d < a``.
	A predicted thickness is also held within :py:data:`~.THICKNESS_RANGE`.

	:param model:
	:param curve:

	:raises GridMismatchError: If the curve's grid differs from the model's.
	"""

	if curve.grid != model.grid:
		raise GridMismatchError(model.grid, curve.grid)

	features = pca_transform(model.pca, model.feature_scaler.apply(curve.values))
	raw = model.target_scaler.invert(forward(model.state, features, INFER))[0]
	geometry, clamped = _clamp(model, raw)

	return Prediction(geometry, raw.tolist(), clamped)


def percentage_error(true_value: float, predicted_value: float) -> float:
	"""
	Returns ``100 · |predicted - true| / true``, rounded to 2 decimal places.

	:param true_value:
	:param predicted_value:

	:raises ValueError: If ``true_value`` is not positive.
	"""

	if not true_value > 0:
		raise ValueError(f"The true value must be positive, got {true_value}")

	return round(100 * abs(predicted_value - true_value) / true_value, 2)


def band_limits(curve: ReflectionCurve, tolerance: float = 0.05) -> Tuple[numpy.ndarray, numpy.ndarray]:
	"""
	Returns the lower and upper edges, in dB, of the ``±tolerance`` band in linear ``|Γ|`` around ``curve``.

	:param curve:
	:param tolerance:
	"""

	magnitudes = curve.magnitudes
	return 20 * numpy.log10((1 - tolerance) * magnitudes), 20 * numpy.log10((1 + tolerance) * magnitudes)


def band_coverage(true_curve: ReflectionCurve, other: ReflectionCurve, tolerance: float = 0.05) -> float:
	"""
	Returns the fraction of grid points where ``other`` lies within the ``±tolerance``
	band in linear ``|Γ|`` around ``true_curve``.

	:param true_curve:
	:param other:
	:param tolerance:
	"""  # noqa: D400

	if true_curve.grid != other.grid:
		raise GridMismatchError(true_curve.grid, other.grid)

	reference = true_curve.magnitudes
	inside = numpy.abs(other.magnitudes - reference) <= tolerance * reference * (1 + 1e-12)
	return float(numpy.mean(inside))


@attr.define(eq=False)
class SampleResult:
	"""
	The round-trip outcome for one sample.
	"""

	true: Sample
	prediction: Prediction

	#: Percentage error per predicted dimension.
	errors: Dict[str, float]

	#: The curve simulated from the predicted geometry, or :py:obj:`None` if simulation failed.
	roundtrip: Optional[ReflectionCurve] = None

	#: Mean squared difference between the true and round-trip curves, in dB².
	curve_mse: float = math.nan

	#: Fraction of grid points where the round-trip curve lies within the ±5% band.
	coverage: float = 0.0

	#: Why the forward simulation failed.
	failure: Optional[str] = None

	@property
	def failed(self) -> bool:
		"""
		Whether the predicted geometry could not be simulated.
		"""

		return self.failure is not None

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the result, without the curves.
		"""

		data: Dict[str, Any] = {
				"true": self.true.geometry.to_dict(),
				"predicted": self.prediction.geometry.to_dict(),
				"raw": list(self.prediction.raw),
				"clamped": list(self.prediction.clamped),
				"percentage_error": dict(self.errors),
				"true_bands": [list(band) for band in absorption_bands(self.true.curve)],
				}

		if self.failure is None:
			data["curve_mse"] = self.curve_mse
			data["coverage"] = self.coverage
			data["roundtrip_bands"] = [list(band) for band in absorption_bands(self.roundtrip)]  # type: ignore[arg-type]
		else:
			data["failure"] = self.failure

		return data


@attr.define(eq=False)
class ValidationReport:
	"""
	Round-trip results over a set of samples.
	"""

	results: List[SampleResult]

	#: The names of the predicted dimensions.
	outputs: Tuple[str, ...]

	#: Network test MSE (on scaled targets) of the kept epoch.
	test_mse: float

	#: Network test R² of the kept epoch.
	r2: float

	def __len__(self) -> int:
		return len(self.results)

	@property
	def succeeded(self) -> List[SampleResult]:
		"""
		The results whose predicted geometry was simulated.
		"""

		return [result for result in self.results if not result.failed]

	def error_quantiles(self, quantiles: Sequence[float] = (0.5, 0.9, 1.0)) -> Dict[str, List[float]]:
		"""
		Returns the requested quantiles of the percentage error of each dimension.

		:param quantiles:
		"""

		if not self.results:
			return {}

		return {
				name: numpy.quantile([r.errors[name] for r in self.results], quantiles).tolist()
				for name in self.outputs
				}

	@property
	def median_curve_mse(self) -> float:
		"""
		The median round-trip curve MSE, in dB².
		"""

		values = [result.curve_mse for result in self.succeeded]
		return float(numpy.median(values)) if values else math.nan

	@property
	def mean_coverage(self) -> float:
		"""
		The mean band coverage of the simulated samples.
		"""

		values = [result.coverage for result in self.succeeded]
		return float(numpy.mean(values)) if values else math.nan

	def coverage_rate(self, min_coverage: float = 0.8) -> float:
		"""
		Returns the fraction of samples whose round-trip curve stays inside the band
		at no fewer than ``min_coverage`` of the grid points.

		Samples that could not be simulated count as misses.

		:param min_coverage:
		"""  # noqa: D400

		if not self.results:
			return math.nan

		hits = sum(result.coverage >= min_coverage for result in self.succeeded)
		return hits / len(self.results)

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the report.
		"""

		return {
				"outputs": list(self.outputs),
				"test_mse": self.test_mse,
				"r2": self.r2,
				"median_curve_mse": self.median_curve_mse,
				"mean_coverage": self.mean_coverage,
				"coverage_rate": self.coverage_rate(),
				"failed": len(self.results) - len(self.succeeded),
				"error_quantiles": self.error_quantiles(),
				"samples": [result.to_dict() for result in self.results],
				}


def round_trip_validate(model: TrainedModel, samples: Sequence[Sample]) -> ValidationReport:
	"""
	Predict each sample's geometry, re-simulate it, and compare the curves.

	A prediction that cannot be simulated is recorded as failed rather than raising.

	:param model:
	:param samples:
	"""

	results = []

	for sample in samples:
		prediction = predict_geometry(model, sample.curve)
		errors = {
				name: percentage_error(getattr(sample.geometry, name), getattr(prediction.geometry, name))
				for name in model.outputs
				}

		try:
			roundtrip = reflection_curve(prediction.geometry, model.stack, model.grid)
		except ForwardModelError as e:
			results.append(SampleResult(sample, prediction, errors, failure=str(e)))
			continue

		results.append(
				SampleResult(
						sample,
						prediction,
						errors,
						roundtrip=roundtrip,
						curve_mse=float(numpy.mean((roundtrip.values - sample.curve.values)**2)),
						coverage=band_coverage(sample.curve, roundtrip),
						)
				)

	best = model.history.best if model.history.best_epoch else None

	return ValidationReport(
			results,
			model.outputs,
			test_mse=best.test_mse if best else math.nan,
			r2=best.r2 if best else math.nan,
			)


def select_samples(model: TrainedModel, dataset: Dataset, n: int, seed: int) -> List[Sample]:
	"""
	Draw ``n`` distinct samples for validation.

	When ``dataset`` is the one the model was trained on, samples come from its held-out split;
	otherwise any sample may be drawn.

	:param model:
	:param dataset:
	:param n:
	:param seed:
	"""

	if fingerprint(dataset) == model.dataset_fingerprint:
		_, pool = split_indices(len(dataset), model.config.split_spec())
	else:
		pool = numpy.arange(len(dataset))

	if not 1 <= n <= len(pool):
		raise ValueError(f"Cannot draw {n} samples from a pool of {len(pool)}")

	chosen = numpy.random.default_rng(seed).choice(pool, size=n, replace=False)
	return [dataset.samples[idx] for idx in chosen]


def hidden_dims_for_depth(depth: int) -> Tuple[int, ...]:
	"""
	Returns the hidden layer widths for a network of ``depth`` hidden layers.

	The first ``⌈depth / 2⌉`` layers are 112 wide and the rest 8 wide,
	so a depth of 6 gives the reference architecture.

	:param depth:
	"""

	if depth < 1:
		raise ValueError(f"depth must be at least 1, got {depth}")

	wide = math.ceil(depth / 2)
	return (112, ) * wide + (8, ) * (depth - wide)


def layer_depth_study(
		dataset: Dataset,
		depths: Sequence[int],
		config: PipelineConfig = PipelineConfig(),
		*,
		verbose: bool = False,
		colour: ColourTrilean = None,
		) -> Dict[int, TrainHistory]:
	"""
	Train one model per hidden-layer count with otherwise identical settings.

	Datasets with one thickness train case 1 models, others case 2.

	:param dataset:
	:param depths:
	:param config:
	:param verbose: Whether to report per-epoch progress.
	:param colour: Whether to use coloured output.

	:returns: The training history for each depth.
	"""

	train = train_case1 if len(thicknesses(dataset)) == 1 else train_case2
	histories = {}

	for depth in depths:
		depth_config = attr.evolve(config, hidden_dims=hidden_dims_for_depth(depth))
		histories[depth] = train(dataset, depth_config, verbose=verbose, colour=colour).history

	return histories


def depth_study_table(histories: Dict[int, TrainHistory]) -> str:
	"""
	Returns the final and best test MSE of each depth as CSV.

	:param histories:
	"""

	lines = ["depth,epochs,final_train_mse,final_test_mse,best_test_mse"]

	for depth, history in histories.items():
		last = history.records[-1]
		lines.append(f"{depth},{len(history)},{last.train_mse!r},{last.test_mse!r},{history.best.test_mse!r}")

	return '\n'.join(lines) + '\n'


def save_model(model: TrainedModel, filename: PathLike, history_file: Optional[PathLike] = None) -> PathPlus:
	"""
	Write the model to a TOML file.

	:param model:
	:param filename:
	:param history_file: If given, the training history is also written there as CSV.
		Both files are replaced together or not at all.
	"""

	# this package
	from rasdesign import __version__

	data: Dict[str, Any] = {
			"format_version": MODEL_FORMAT_VERSION,
			"generator_version": f"rasdesign {__version__}",
			"case": model.case,
			"outputs": list(model.outputs),
			"dataset_fingerprint": model.dataset_fingerprint,
			"bounds_min": model.bounds_min.tolist(),
			"bounds_max": model.bounds_max.tolist(),
			}

	if model.thickness is not None:
		data["thickness"] = model.thickness

	data["grid"] = model.grid.to_dict()
	data["stack"] = model.stack.to_dict()
	data["training"] = model.config.to_dict()
	data["network"] = model.spec.to_dict()
	data["feature_scaler"] = model.feature_scaler.to_dict()
	data["pca"] = model.pca.to_dict()
	data["target_scaler"] = model.target_scaler.to_dict()
	data["state"] = model.state.to_dict()
	data["history"] = model.history.to_dict()

	files: Dict[PathLike, str] = {filename: dom_toml.dumps(data)}
	if history_file is not None:
		files[history_file] = model.history.to_csv()

	return atomic_write_all(files)[0]


def load_model(filename: PathLike) -> TrainedModel:
	"""
	Read a model written by :func:`~.save_model`.

	:param filename:
	"""

	# this package
	from rasdesign.config import GridParser, StackParser, TrainingParser

	data = dom_toml.load(filename)

	if data.get("format_version") != MODEL_FORMAT_VERSION:
		raise ValueError(f"Unsupported model format version {data.get('format_version')!r}")

	network = data["network"]
	spec = NetworkSpec(
			network["input_dim"],
			network["hidden_dims"],
			network["output_dim"],
			leaky_slope=network["leaky_slope"],
			l2_lambda=network["l2_lambda"],
			bn_momentum=network["bn_momentum"],
			bn_epsilon=network["bn_epsilon"],
			)

	return TrainedModel(
			case=data["case"],
			feature_scaler=FeatureScaler.from_dict(data["feature_scaler"]),
			pca=PcaBasis.from_dict(data["pca"]),
			target_scaler=TargetScaler.from_dict(data["target_scaler"]),
			state=NetworkState.from_dict(spec, data["state"]),
			history=TrainHistory.from_dict(data["history"]),
			grid=GridParser().build(data["grid"]),
			stack=StackParser().build(data["stack"]),
			config=TrainingParser().build(data["training"]),
			bounds_min=data["bounds_min"],
			bounds_max=data["bounds_max"],
			dataset_fingerprint=data["dataset_fingerprint"],
			thickness=data.get("thickness"),
			)


def _curve_table(result: SampleResult) -> str:
	freqs = result.true.curve.grid.frequencies()
	lower, upper = band_limits(result.true.curve)

	lines = ["f_GHz,true_dB,roundtrip_dB,band_lo_dB,band_hi_dB"]
	for row in zip(freqs, result.true.curve.values, result.roundtrip.values, lower, upper):  # type: ignore[union-attr]
		lines.append(f"{float(row[0])!r}," + ','.join(f"{value:.6f}" for value in row[1:]))

	return '\n'.join(lines) + '\n'


def save_report(report: ValidationReport, directory: PathLike) -> List[PathPlus]:
	"""
	Write ``report.toml`` and one ``sample_<n>.csv`` curve file per simulated sample.

	:param report:
	:param directory:

	:returns: The paths written.
	"""

	directory = PathPlus(directory)
	files: Dict[PathLike, str] = {directory / "report.toml": dom_toml.dumps(report.to_dict())}

	for idx, result in enumerate(report.results, start=1):
		if not result.failed:
			files[directory / f"sample_{idx}.csv"] = _curve_table(result)

	return atomic_write_all(files)


def format_report_table(report: ValidationReport) -> str:
	"""
	Format the true and predicted dimensions and their percentage errors as a text table.

	:param report:
	"""

	widths = [6] + [8, 9, 8] * len(report.outputs)
	header = ["sample"]
	for name in report.outputs:
		header.extend([f"{name} true", f"{name} pred", f"{name} err%"])

	lines = [format_row(header, widths)]

	for idx, result in enumerate(report.results):
		label = f"({chr(ord('a') + idx)})" if idx < 26 else str(idx + 1)
		row = [label]
		for name in report.outputs:
			row.extend([
					f"{getattr(result.true.geometry, name):.2f}",
					f"{getattr(result.prediction.geometry, name):.2f}",
					f"{result.errors[name]:.2f}",
					])
		lines.append(format_row(row, widths))

	lines.append(f"Test MSE: {report.test_mse:.4f}, R²: {report.r2:.4f}")
	lines.append(
			f"Median round-trip curve MSE: {report.median_curve_mse:.3f} dB², "
			f"mean ±5% band coverage: {report.mean_coverage:.2f}, "
			f"samples with coverage ≥ 0.8: {report.coverage_rate():.0%}"
			)

	failed = len(report.results) - len(report.succeeded)
	if failed:
		lines.append(f"{failed} predicted geometries could not be simulated")

	return '\n'.join(lines)
