#!/usr/bin/env python3
#
#  neuralnet.py
"""
A dense regression network with batch normalisation, trained with Adam.

Every hidden layer is ``affine → batch-norm → Leaky ReLU``; the output layer is affine only.
Gradients are computed analytically.
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
from functools import partial
from typing import Any, Dict, Iterator, List, Optional, Tuple

# 3rd party
import attr
import click
import numpy
from consolekit.terminal_colours import ColourTrilean, resolve_color_default

__all__ = (
		"AdamState",
		"DEFAULT_HIDDEN_DIMS",
		"EpochRecord",
		"ForwardCache",
		"INFER",
		"NetworkSpec",
		"NetworkState",
		"TRAIN",
		"TrainHistory",
		"Trainer",
		"TrainingConfig",
		"TrainingDivergedError",
		"adam_step",
		"backward",
		"fit",
		"forward",
		"init",
		"leaky_relu",
		"loss",
		"mse",
		"r_squared",
		)

#: Hidden layer widths of the reference architecture.
DEFAULT_HIDDEN_DIMS: Tuple[int, ...] = (112, 112, 112, 8, 8, 8)

#: Forward mode using batch statistics.
TRAIN = "train"

#: Forward mode using running statistics.
INFER = "infer"

Arrays = Dict[str, numpy.ndarray]


class TrainingDivergedError(ArithmeticError):
	"""
	Raised when the training loss becomes non-finite.

	:param epoch: The 1-based epoch in which training diverged.
	:param value: The offending loss value.
	"""

	def __init__(self, epoch: int, value: float):
		self.epoch = epoch
		self.value = value
		super().__init__(
				f"Training diverged in epoch {epoch}: loss is {value}. "
				"Try a smaller learning rate or a larger L2 penalty."
				)


def _positive_int(instance: Any, attribute: attr.Attribute, value: int) -> None:
	if not value >= 1:
		raise ValueError(f"{attribute.name} must be at least 1, got {value}")


def _unit_open(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not 0 < value < 1:
		raise ValueError(f"{attribute.name} must lie strictly between 0 and 1, got {value}")


def _unit_half_open(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not 0 <= value < 1:
		raise ValueError(f"{attribute.name} must lie in [0, 1), got {value}")


def _positive(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not value > 0:
		raise ValueError(f"{attribute.name} must be positive, got {value}")


def _non_negative(instance: Any, attribute: attr.Attribute, value: float) -> None:
	if not value >= 0:
		raise ValueError(f"{attribute.name} must be non-negative, got {value}")


def _int_tuple(values: Any) -> Tuple[int, ...]:
	return tuple(int(v) for v in values)


def _check_hidden(instance: Any, attribute: attr.Attribute, value: Tuple[int, ...]) -> None:
	if any(width < 1 for width in value):
		raise ValueError(f"All hidden layer widths must be at least 1, got {value!r}")


@attr.frozen
class NetworkSpec:
	"""
	The architecture and regularisation of a network.
	"""

	input_dim: int = attr.field(converter=int, validator=_positive_int)
	hidden_dims: Tuple[int, ...] = attr.field(converter=_int_tuple, validator=_check_hidden)
	output_dim: int = attr.field(converter=int, validator=_positive_int)

	#: Negative-side slope of the Leaky ReLU.
	leaky_slope: float = attr.field(default=0.01, converter=float, validator=_unit_open)

	#: Weight of the ``Σ w²`` penalty.
	l2_lambda: float = attr.field(default=1e-4, converter=float, validator=_non_negative)

	#: Weight of the previous running statistics in each update.
	bn_momentum: float = attr.field(default=0.9, converter=float, validator=_unit_half_open)

	#: Added to the batch variance before normalising.
	bn_epsilon: float = attr.field(default=1e-5, converter=float, validator=_positive)

	@property
	def layer_dims(self) -> List[int]:
		"""
		The widths of every layer, input and output included.
		"""

		return [self.input_dim, *self.hidden_dims, self.output_dim]

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the spec.
		"""

		data = attr.asdict(self)
		data["hidden_dims"] = list(self.hidden_dims)
		return data


@attr.define(eq=False)
class NetworkState:
	"""
	The parameters and batch-norm running statistics of a network.

	``weights[i]`` has shape ``(fan_in, fan_out)``.
	"""

	spec: NetworkSpec
	weights: List[numpy.ndarray]
	biases: List[numpy.ndarray]
	gammas: List[numpy.ndarray]
	betas: List[numpy.ndarray]
	running_means: List[numpy.ndarray]
	running_vars: List[numpy.ndarray]

	def parameters(self) -> Arrays:
		"""
		Returns the trainable arrays keyed by name.

		The arrays are the state's own, so in-place updates modify the network.
		"""

		params: Arrays = {}

		for idx, (weight, bias) in enumerate(zip(self.weights, self.biases)):
			params[f"W{idx}"] = weight
			params[f"b{idx}"] = bias

		for idx, (gamma, beta) in enumerate(zip(self.gammas, self.betas)):
			params[f"gamma{idx}"] = gamma
			params[f"beta{idx}"] = beta

		return params

	def weight_norm(self) -> float:
		"""
		Returns ``Σ w²`` over the weight matrices.
		"""

		return float(sum(numpy.sum(weight**2) for weight in self.weights))

	def copy(self) -> "NetworkState":
		"""
		Returns a deep copy of the state.
		"""

		return NetworkState(
				self.spec,
				[w.copy() for w in self.weights],
				[b.copy() for b in self.biases],
				[g.copy() for g in self.gammas],
				[b.copy() for b in self.betas],
				[m.copy() for m in self.running_means],
				[v.copy() for v in self.running_vars],
				)

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the state, with arrays as nested lists.
		"""

		return {
				"weights": [w.tolist() for w in self.weights],
				"biases": [b.tolist() for b in self.biases],
				"gammas": [g.tolist() for g in self.gammas],
				"betas": [b.tolist() for b in self.betas],
				"running_means": [m.tolist() for m in self.running_means],
				"running_vars": [v.tolist() for v in self.running_vars],
				}

	@classmethod
	def from_dict(cls, spec: NetworkSpec, data: Dict[str, Any]) -> "NetworkState":
		"""
		Construct a state from the mapping written by :meth:`~.to_dict`.

		:param spec:
		:param data:
		"""

		def arrays(key: str) -> List[numpy.ndarray]:
			return [numpy.asarray(value, dtype=numpy.float64) for value in data[key]]

		dims = spec.layer_dims
		weights = [w.reshape(fan_in, fan_out) for w, fan_in, fan_out in zip(arrays("weights"), dims, dims[1:])]

		state = cls(
				spec,
				weights,
				arrays("biases"),
				arrays("gammas"),
				arrays("betas"),
				arrays("running_means"),
				arrays("running_vars"),
				)
		_check_shapes(state)
		return state


def _check_shapes(state: NetworkState) -> None:
	dims = state.spec.layer_dims

	if len(state.weights) != len(dims) - 1 or len(state.biases) != len(dims) - 1:
		raise ValueError(f"Expected {len(dims) - 1} affine layers")

	for idx, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
		if state.weights[idx].shape != (fan_in, fan_out) or state.biases[idx].shape != (fan_out, ):
			raise ValueError(f"Layer {idx} does not match a {fan_in} → {fan_out} affine map")

	for name in ("gammas", "betas", "running_means", "running_vars"):
		values = getattr(state, name)
		if [v.shape for v in values] != [(width, ) for width in state.spec.hidden_dims]:
			raise ValueError(f"{name} do not match the hidden layer widths")

	if any(numpy.any(v < 0) for v in state.running_vars):
		raise ValueError("Running variances must be non-negative")


def init(spec: NetworkSpec, seed: int) -> NetworkState:
	"""
	Initialise a network with He-normal weights, zero biases and identity batch-norm.

	:param spec:
	:param seed:
	"""

	rng = numpy.random.default_rng(seed)
	dims = spec.layer_dims

	weights = [
			rng.normal(0.0, math.sqrt(2 / fan_in), size=(fan_in, fan_out)) for fan_in, fan_out in zip(dims, dims[1:])
			]
	biases = [numpy.zeros(fan_out) for fan_out in dims[1:]]

	return NetworkState(
			spec,
			weights,
			biases,
			gammas=[numpy.ones(width) for width in spec.hidden_dims],
			betas=[numpy.zeros(width) for width in spec.hidden_dims],
			running_means=[numpy.zeros(width) for width in spec.hidden_dims],
			running_vars=[numpy.ones(width) for width in spec.hidden_dims],
			)


def leaky_relu(values: Any, slope: float = 0.01) -> numpy.ndarray:
	"""
	Returns ``x`` where ``x > 0`` and ``slope · x`` elsewhere.

	:param values:
	:param slope:
	"""

	values = numpy.asarray(values, dtype=numpy.float64)
	return numpy.where(values > 0, values, slope * values)


@attr.define
class ForwardCache:
	"""
	Intermediate values of a train-mode forward pass, consumed by :func:`~.backward`.
	"""

	#: The input to each affine layer.
	inputs: List[numpy.ndarray] = attr.field(factory=list)

	#: The normalised (pre-``gamma``/``beta``) values of each hidden layer.
	normalised: List[numpy.ndarray] = attr.field(factory=list)

	#: ``1 / sqrt(var + eps)`` for each hidden layer.
	inv_stds: List[numpy.ndarray] = attr.field(factory=list)

	#: The Leaky ReLU input of each hidden layer.
	pre_activations: List[numpy.ndarray] = attr.field(factory=list)

	#: The network output.
	output: Optional[numpy.ndarray] = None


def forward(
		state: NetworkState,
		features: Any,
		mode: str = INFER,
		cache: Optional[ForwardCache] = None,
		) -> numpy.ndarray:
	"""
	Evaluate the network.

	In train mode each hidden layer is normalised with the batch statistics,
	which are also folded into the running statistics.
	In infer mode the running statistics are used and the state is not modified.

	:param state:
	:param features: A ``batch × input_dim`` matrix.
	:param mode: Either :data:`~.TRAIN` or :data:`~.INFER`.
	:param cache: If given, filled with the intermediate values needed by :func:`~.backward`.

	:returns: A ``batch × output_dim`` matrix.
	"""

	spec = state.spec
	hidden = numpy.asarray(features, dtype=numpy.float64)

	if mode not in {TRAIN, INFER}:
		raise ValueError(f"Unknown mode {mode!r}")
	if hidden.ndim != 2 or hidden.shape[1] != spec.input_dim:
		raise ValueError(f"Expected a batch of width {spec.input_dim}, got shape {hidden.shape}")
	if mode == TRAIN and hidden.shape[0] < 2:
		raise ValueError("Train mode needs a batch of at least 2 samples for the batch variance")

	for idx in range(len(spec.hidden_dims)):
		affine = hidden @ state.weights[idx] + state.biases[idx]

		if mode == TRAIN:
			mean = affine.mean(axis=0)
			var = affine.var(axis=0)
			momentum = spec.bn_momentum
			state.running_means[idx] = momentum * state.running_means[idx] + (1 - momentum) * mean
			state.running_vars[idx] = momentum * state.running_vars[idx] + (1 - momentum) * var
		else:
			mean = state.running_means[idx]
			var = state.running_vars[idx]

		inv_std = 1 / numpy.sqrt(var + spec.bn_epsilon)
		normalised = (affine - mean) * inv_std
		pre_activation = state.gammas[idx] * normalised + state.betas[idx]

		if cache is not None:
			cache.inputs.append(hidden)
			cache.normalised.append(normalised)
			cache.inv_stds.append(inv_std)
			cache.pre_activations.append(pre_activation)

		hidden = leaky_relu(pre_activation, spec.leaky_slope)

	output = hidden @ state.weights[-1] + state.biases[-1]

	if cache is not None:
		cache.inputs.append(hidden)
		cache.output = output

	return output


def mse(pred: Any, target: Any) -> float:
	"""
	Returns the mean squared error over all samples and outputs.

	:param pred:
	:param target:
	"""

	pred = numpy.asarray(pred, dtype=numpy.float64)
	target = numpy.asarray(target, dtype=numpy.float64)

	if pred.shape != target.shape:
		raise ValueError(f"Shape mismatch: {pred.shape} vs {target.shape}")

	return float(numpy.mean((pred - target)**2))


def loss(pred: Any, target: Any, state: NetworkState, l2_lambda: float) -> float:
	"""
	Returns the mean squared error plus ``l2_lambda · Σ w²`` over the weight matrices.

	:param pred:
	:param target:
	:param state:
	:param l2_lambda:
	"""

	return mse(pred, target) + l2_lambda * state.weight_norm()


def backward(state: NetworkState, cache: ForwardCache, target: Any, l2_lambda: Optional[float] = None) -> Arrays:
	"""
	Returns the gradient of :func:`~.loss` with respect to every parameter.

	:param state:
	:param cache: The cache filled by a train-mode :func:`~.forward` pass on the same batch.
	:param target:
	:param l2_lambda: Defaults to the network's own penalty.

	:returns: Gradients keyed as in :meth:`NetworkState.parameters`.
	"""

	if cache.output is None:
		raise ValueError("The cache has not been filled by a forward pass")

	spec = state.spec
	if l2_lambda is None:
		l2_lambda = spec.l2_lambda

	target = numpy.asarray(target, dtype=numpy.float64)
	if target.shape != cache.output.shape:
		raise ValueError(f"Shape mismatch: {cache.output.shape} vs {target.shape}")

	batch = target.shape[0]
	grads: Arrays = {}

	upstream = 2 * (cache.output - target) / target.size
	last = len(state.weights) - 1

	grads[f"W{last}"] = cache.inputs[last].T @ upstream + 2 * l2_lambda * state.weights[last]
	grads[f"b{last}"] = upstream.sum(axis=0)
	upstream = upstream @ state.weights[last].T

	for idx in reversed(range(len(spec.hidden_dims))):
		pre_activation = cache.pre_activations[idx]
		normalised = cache.normalised[idx]

		d_pre = upstream * numpy.where(pre_activation > 0, 1.0, spec.leaky_slope)
		grads[f"gamma{idx}"] = numpy.sum(d_pre * normalised, axis=0)
		grads[f"beta{idx}"] = d_pre.sum(axis=0)

		d_norm = d_pre * state.gammas[idx]
		d_affine = (cache.inv_stds[idx] / batch) * (
				batch * d_norm - d_norm.sum(axis=0) - normalised * numpy.sum(d_norm * normalised, axis=0)
				)

		grads[f"W{idx}"] = cache.inputs[idx].T @ d_affine + 2 * l2_lambda * state.weights[idx]
		grads[f"b{idx}"] = d_affine.sum(axis=0)
		upstream = d_affine @ state.weights[idx].T

	return grads


@attr.define
class AdamState:
	"""
	Moment accumulators and hyperparameters of the Adam optimiser.

	Accumulators are created lazily, zero-filled, the first time a parameter is updated.
	"""

	learning_rate: float = attr.field(default=1e-3, converter=float, validator=_positive)
	beta1: float = attr.field(default=0.9, converter=float, validator=_unit_half_open)
	beta2: float = attr.field(default=0.999, converter=float, validator=_unit_half_open)
	epsilon: float = attr.field(default=1e-8, converter=float, validator=_positive)

	#: The number of updates applied so far.
	step: int = 0

	first_moments: Arrays = attr.field(factory=dict)
	second_moments: Arrays = attr.field(factory=dict)


def adam_step(adam: AdamState, params: Arrays, grads: Arrays) -> Arrays:
	"""
	Apply one bias-corrected Adam update to ``params`` in place.

	:param adam:
	:param params:
	:param grads:

	:returns: ``params``.
	"""

	if params.keys() != grads.keys():
		raise ValueError("Parameters and gradients must have the same keys")

	adam.step += 1
	correction1 = 1 - adam.beta1**adam.step
	correction2 = 1 - adam.beta2**adam.step

	for name, param in params.items():
		grad = grads[name]
		if grad.shape != param.shape:
			raise ValueError(f"Gradient for {name!r} has shape {grad.shape}, expected {param.shape}")

		first = adam.first_moments.setdefault(name, numpy.zeros_like(param))
		second = adam.second_moments.setdefault(name, numpy.zeros_like(param))

		first *= adam.beta1
		first += (1 - adam.beta1) * grad
		second *= adam.beta2
		second += (1 - adam.beta2) * grad**2

		param -= adam.learning_rate * (first / correction1) / (numpy.sqrt(second / correction2) + adam.epsilon)

	return params


def r_squared(pred: Any, target: Any) -> float:
	"""
	Returns the coefficient of determination, computed per output and averaged.

	:param pred:
	:param target:

	:raises ValueError: If there are fewer than two samples or an output has no variance.
	"""

	pred = numpy.asarray(pred, dtype=numpy.float64)
	target = numpy.asarray(target, dtype=numpy.float64)

	if pred.shape != target.shape:
		raise ValueError(f"Shape mismatch: {pred.shape} vs {target.shape}")
	if target.ndim == 1:
		pred, target = pred[:, numpy.newaxis], target[:, numpy.newaxis]
	if target.shape[0] < 2:
		raise ValueError("R² needs at least 2 samples")

	ss_res = numpy.sum((target - pred)**2, axis=0)
	ss_tot = numpy.sum((target - target.mean(axis=0))**2, axis=0)

	if numpy.any(ss_tot == 0):
		raise ValueError("R² is undefined for an output with zero total variance")

	return float(numpy.mean(1 - ss_res / ss_tot))


@attr.frozen
class TrainingConfig:
	"""
	Optimiser and schedule settings for :func:`~.fit`.
	"""

	learning_rate: float = attr.field(default=1e-3, converter=float, validator=_positive)
	beta1: float = attr.field(default=0.9, converter=float, validator=_unit_half_open)
	beta2: float = attr.field(default=0.999, converter=float, validator=_unit_half_open)
	epsilon: float = attr.field(default=1e-8, converter=float, validator=_positive)

	#: Mini-batch size. A trailing batch of one sample is folded into the previous batch.
	batch_size: int = attr.field(default=64, converter=int)

	max_epochs: int = attr.field(default=500, converter=int, validator=_positive_int)

	#: Epochs without a test MSE improvement before stopping.
	patience: int = attr.field(default=50, converter=int, validator=_positive_int)

	seed: int = attr.field(default=0, converter=int)

	@batch_size.validator
	def _check_batch_size(self, attribute: attr.Attribute, value: int) -> None:
		if value < 2:
			raise ValueError(f"batch_size must be at least 2, got {value}")

	def to_dict(self) -> Dict[str, Any]:  # noqa: D102
		return attr.asdict(self)


@attr.frozen
class EpochRecord:
	"""
	The metrics of one training epoch.
	"""

	epoch: int = attr.field(converter=int)
	train_mse: float = attr.field(converter=float)
	test_mse: float = attr.field(converter=float)
	r2: float = attr.field(converter=float)


@attr.define
class TrainHistory:
	"""
	Per-epoch metrics of a training run.
	"""

	records: List[EpochRecord] = attr.field(factory=list)

	#: The epoch whose state was kept, or ``0`` before training.
	best_epoch: int = 0

	#: Whether training ended before ``max_epochs``.
	stopped_early: bool = False

	def __len__(self) -> int:
		return len(self.records)

	def __iter__(self) -> Iterator[EpochRecord]:
		yield from self.records

	@property
	def best(self) -> EpochRecord:
		"""
		The record of the kept epoch.
		"""

		return self.records[self.best_epoch - 1]

	def to_dict(self) -> Dict[str, Any]:
		"""
		Returns a dictionary representation of the history, one list per column.
		"""

		return {
				"epoch": [r.epoch for r in self.records],
				"train_mse": [r.train_mse for r in self.records],
				"test_mse": [r.test_mse for r in self.records],
				"r2": [r.r2 for r in self.records],
				"best_epoch": self.best_epoch,
				"stopped_early": self.stopped_early,
				}

	@classmethod
	def from_dict(cls, data: Dict[str, Any]) -> "TrainHistory":  # noqa: D102
		records = [
				EpochRecord(int(e), float(tr), float(te), float(r2))
				for e, tr, te, r2 in zip(data["epoch"], data["train_mse"], data["test_mse"], data["r2"])
				]
		return cls(records, int(data.get("best_epoch", 0)), bool(data.get("stopped_early", False)))

	def to_csv(self) -> str:
		"""
		Returns the history as CSV with the columns ``epoch,train_mse,test_mse,r2``.
		"""

		lines = ["epoch,train_mse,test_mse,r2"]
		lines.extend(f"{r.epoch},{r.train_mse!r},{r.test_mse!r},{r.r2!r}" for r in self.records)
		return '\n'.join(lines) + '\n'


def _batches(order: numpy.ndarray, batch_size: int) -> List[numpy.ndarray]:
	batches = [order[start:start + batch_size] for start in range(0, len(order), batch_size)]

	if len(batches) > 1 and len(batches[-1]) == 1:
		last = batches.pop()
		batches[-1] = numpy.concatenate([batches[-1], last])

	return batches


def _score(pred: numpy.ndarray, target: numpy.ndarray) -> float:
	# Outputs without variance in the held-out targets are left out of R².
	varying = target.var(axis=0) > 0
	if target.shape[0] < 2 or not numpy.any(varying):
		return float("nan")
	return r_squared(pred[:, varying], target[:, varying])


class Trainer:
	"""
	Mini-batch training with early stopping on the test MSE.

	:param spec:
	:param config:
	:param verbose: Whether to enable verbose output.
	:param colour: Whether to use coloured output.
	"""

	def __init__(
			self,
			spec: NetworkSpec,
			config: TrainingConfig = TrainingConfig(),
			*,
			verbose: bool = False,
			colour: ColourTrilean = None,
			):
		self.spec = spec
		self.config = config

		#: Whether to enable verbose output.
		self.verbose = verbose

		#: Whether to use coloured output.
		self.colour = resolve_color_default(colour)

		self._echo = partial(click.echo, color=self.colour)

	def _echo_if_v(self, *args, **kwargs) -> None:
		if self.verbose:
			self._echo(*args, **kwargs)

	def fit(
			self,
			train: Tuple[Any, Any],
			test: Tuple[Any, Any],
			) -> Tuple[NetworkState, TrainHistory]:
		"""
		Train a freshly initialised network.

		:param train: The training ``(features, targets)``.
		:param test: The held-out ``(features, targets)`` used for early stopping.

		:returns: The state with the lowest test MSE, and the history of every completed epoch.

		:raises TrainingDivergedError: If the loss becomes non-finite.
		"""

		config = self.config
		train_x, train_y = (numpy.asarray(a, dtype=numpy.float64) for a in train)
		test_x, test_y = (numpy.asarray(a, dtype=numpy.float64) for a in test)

		if train_x.shape[0] < 2:
			raise ValueError("The training split needs at least 2 samples")
		if test_x.shape[0] < 1:
			raise ValueError("The test split is empty")

		state = init(self.spec, config.seed)
		adam = AdamState(config.learning_rate, config.beta1, config.beta2, config.epsilon)
		shuffle_rng = numpy.random.default_rng([config.seed, 1])

		history = TrainHistory()
		best_state = state.copy()
		best_mse = math.inf
		stale_epochs = 0

		# non-finite values are caught by the checks below
		with numpy.errstate(over="ignore", invalid="ignore", divide="ignore"):
			for epoch in range(1, config.max_epochs + 1):
				order = shuffle_rng.permutation(train_x.shape[0])

				for batch in _batches(order, config.batch_size):
					cache = ForwardCache()
					pred = forward(state, train_x[batch], TRAIN, cache)
					batch_loss = loss(pred, train_y[batch], state, self.spec.l2_lambda)

					if not math.isfinite(batch_loss):
						raise TrainingDivergedError(epoch, batch_loss)

					adam_step(adam, state.parameters(), backward(state, cache, train_y[batch]))

				train_mse = mse(forward(state, train_x), train_y)
				test_pred = forward(state, test_x)
				test_mse = mse(test_pred, test_y)

				if not math.isfinite(test_mse):
					raise TrainingDivergedError(epoch, test_mse)

				record = EpochRecord(epoch, train_mse, test_mse, _score(test_pred, test_y))
				history.records.append(record)
				self._echo_if_v(
						f"Epoch {epoch}/{config.max_epochs}: "
						f"train MSE {train_mse:.6f}, test MSE {test_mse:.6f}, R² {record.r2:.4f}"
						)

				if test_mse < best_mse:
					best_mse = test_mse
					best_state = state.copy()
					history.best_epoch = epoch
					stale_epochs = 0
				else:
					stale_epochs += 1
					if stale_epochs >= config.patience:
						history.stopped_early = epoch < config.max_epochs
						self._echo_if_v(f"Stopping early: no improvement for {stale_epochs} epochs")
						break

		return best_state, history


def fit(
		spec: NetworkSpec,
		train: Tuple[Any, Any],
		test: Tuple[Any, Any],
		config: TrainingConfig = TrainingConfig(),
		) -> Tuple[NetworkState, TrainHistory]:
	"""
	Train a network and return the state with the lowest test MSE.

	:param spec:
	:param train: The training ``(features, targets)``.
	:param test: The held-out ``(features, targets)``.
	:param config:
	"""

	return Trainer(spec, config).fit(train, test)
