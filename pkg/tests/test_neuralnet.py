# stdlib
import math
from typing import List, Tuple

# 3rd party
import numpy
import pytest
from numpy.testing import assert_allclose, assert_array_equal

# this package
from rasdesign.neuralnet import (
		DEFAULT_HIDDEN_DIMS,
		INFER,
		TRAIN,
		AdamState,
		EpochRecord,
		ForwardCache,
		NetworkSpec,
		NetworkState,
		TrainHistory,
		Trainer,
		TrainingConfig,
		TrainingDivergedError,
		_batches,
		adam_step,
		backward,
		fit,
		forward,
		init,
		leaky_relu,
		loss,
		mse,
		r_squared
		)

SMALL_SPEC = NetworkSpec(6, (5, 4), 3, l2_lambda=1e-3)


def _perturbed(state: NetworkState, seed: int) -> NetworkState:
	# Non-trivial biases and batch-norm parameters so every gradient is exercised.
	rng = numpy.random.default_rng(seed)
	state = state.copy()

	for bias in state.biases:
		bias += rng.normal(0, 0.1, size=bias.shape)
	for gamma in state.gammas:
		gamma += rng.normal(0, 0.1, size=gamma.shape)
	for beta in state.betas:
		beta += rng.normal(0, 0.1, size=beta.shape)

	return state


def _regression_data(n_samples: int, seed: int = 0) -> Tuple[numpy.ndarray, numpy.ndarray]:
	rng = numpy.random.default_rng(seed)
	features = rng.normal(size=(n_samples, 5))
	targets = features @ rng.normal(size=(5, 2)) / 2
	return features, targets


def test_init():
	spec = NetworkSpec(300, (200, ), 1)
	state = init(spec, seed=7)

	assert state.weights[0].shape == (300, 200)
	assert state.weights[1].shape == (200, 1)
	assert state.weights[0].std() == pytest.approx(math.sqrt(2 / 300), rel=0.05)
	assert state.weights[1].std() == pytest.approx(math.sqrt(2 / 200), rel=0.15)

	assert_array_equal(state.biases[0], 0.0)
	assert_array_equal(state.gammas[0], 1.0)
	assert_array_equal(state.betas[0], 0.0)
	assert_array_equal(state.running_means[0], 0.0)
	assert_array_equal(state.running_vars[0], 1.0)

	assert_array_equal(init(spec, seed=7).weights[0], state.weights[0])
	assert not numpy.array_equal(init(spec, seed=8).weights[0], state.weights[0])


def test_network_spec():
	spec = NetworkSpec(300, DEFAULT_HIDDEN_DIMS, 4)

	assert spec.layer_dims == [300, 112, 112, 112, 8, 8, 8, 4]
	assert NetworkSpec(**spec.to_dict()) == spec
	assert spec.leaky_slope == 0.01
	assert spec.l2_lambda == 1e-4


@pytest.mark.parametrize(
		"kwargs, match",
		[
				pytest.param({"leaky_slope": 0.0}, "leaky_slope must lie strictly between 0 and 1", id="slope"),
				pytest.param({"hidden_dims": (4, 0)}, "All hidden layer widths must be at least 1", id="width"),
				pytest.param({"output_dim": 0}, "output_dim must be at least 1", id="output"),
				pytest.param({"bn_momentum": 1.0}, "bn_momentum must lie in", id="momentum"),
				pytest.param({"l2_lambda": -1.0}, "l2_lambda must be non-negative", id="l2"),
				]
		)
def test_network_spec_errors(kwargs, match: str):
	arguments = {"input_dim": 6, "hidden_dims": (5, 4), "output_dim": 3, **kwargs}

	with pytest.raises(ValueError, match=match):
		NetworkSpec(**arguments)


def test_leaky_relu():
	assert_allclose(leaky_relu([-2.0, 0.0, 3.0]), [-0.02, 0.0, 3.0])
	assert_allclose(leaky_relu([-2.0, 3.0], slope=0.2), [-0.4, 3.0])


def test_zero_weights_output_bias():
	state = init(SMALL_SPEC, seed=0)
	for weight in state.weights:
		weight[...] = 0.0
	state.biases[-1][...] = [0.5, -1.0, 2.0]

	output = forward(state, numpy.random.default_rng(0).normal(size=(7, 6)))
	assert_allclose(output, numpy.tile([0.5, -1.0, 2.0], (7, 1)))


def test_constant_batch_pre_activations():
	state = init(SMALL_SPEC, seed=0)
	state.betas[0][...] = 0.3
	cache = ForwardCache()

	forward(state, numpy.ones((4, 6)), TRAIN, cache)
	assert_allclose(cache.pre_activations[0], 0.3, atol=1e-9)


def test_batch_norm_statistics():
	state = init(SMALL_SPEC, seed=0)
	features = numpy.random.default_rng(1).normal(2.0, 3.0, size=(64, 6))
	cache = ForwardCache()

	forward(state, features, TRAIN, cache)
	assert_allclose(cache.normalised[0].mean(axis=0), 0.0, atol=1e-10)
	assert_allclose(cache.normalised[0].var(axis=0), 1.0, atol=1e-3)

	for _ in range(200):
		forward(state, features, TRAIN)

	affine = features @ state.weights[0] + state.biases[0]
	assert_allclose(state.running_means[0], affine.mean(axis=0), atol=1e-6)
	assert_allclose(state.running_vars[0], affine.var(axis=0), rtol=1e-6)


def test_infer_mode_leaves_state_alone():
	state = init(SMALL_SPEC, seed=0)
	before = state.copy()

	forward(state, numpy.ones((3, 6)), INFER)
	for new, old in zip(state.running_means + state.running_vars, before.running_means + before.running_vars):
		assert_array_equal(new, old)


def test_forward_errors():
	state = init(SMALL_SPEC, seed=0)

	with pytest.raises(ValueError, match="Expected a batch of width 6"):
		forward(state, numpy.ones((3, 5)))

	with pytest.raises(ValueError, match="at least 2 samples"):
		forward(state, numpy.ones((1, 6)), TRAIN)

	with pytest.raises(ValueError, match="Unknown mode 'eval'"):
		forward(state, numpy.ones((3, 6)), "eval")


def test_mse_and_loss():
	assert mse([1.0, 2.0], [1.0, 4.0]) == 2.0
	assert mse([[0.0, 0.0]], [[3.0, 4.0]]) == 12.5

	state = init(SMALL_SPEC, seed=0)
	assert loss([1.0, 2.0], [1.0, 4.0], state, 0.5) == pytest.approx(2.0 + 0.5 * state.weight_norm())

	with pytest.raises(ValueError, match="Shape mismatch"):
		mse([1.0, 2.0], [1.0])


def test_zero_loss_gives_zero_gradients():
	state = _perturbed(init(SMALL_SPEC, seed=0), seed=1)
	cache = ForwardCache()
	output = forward(state, numpy.random.default_rng(2).normal(size=(8, 6)), TRAIN, cache)

	grads = backward(state, cache, output.copy(), l2_lambda=0.0)
	assert grads.keys() == state.parameters().keys()
	for name, grad in grads.items():
		assert_array_equal(grad, 0.0, err_msg=name)


def test_l2_gradient_is_linear():
	state = _perturbed(init(SMALL_SPEC, seed=0), seed=1)
	cache = ForwardCache()
	rng = numpy.random.default_rng(2)
	forward(state, rng.normal(size=(8, 6)), TRAIN, cache)
	target = rng.normal(size=(8, 3))

	plain = backward(state, cache, target, l2_lambda=0.0)
	penalised = backward(state, cache, target, l2_lambda=0.1)

	for idx, weight in enumerate(state.weights):
		assert_allclose(penalised[f"W{idx}"] - plain[f"W{idx}"], 0.2 * weight, atol=1e-12)
		assert_array_equal(penalised[f"b{idx}"], plain[f"b{idx}"])


def test_backward_needs_forward():
	state = init(SMALL_SPEC, seed=0)

	with pytest.raises(ValueError, match="has not been filled"):
		backward(state, ForwardCache(), numpy.zeros((2, 3)))


def _gradient_check_case(case: int) -> Tuple[NetworkState, numpy.ndarray, numpy.ndarray]:
	# Central differences are unreliable next to a Leaky ReLU kink.
	for seed in range(case * 50, case * 50 + 50):
		state = _perturbed(init(SMALL_SPEC, seed=seed), seed=seed + 10_000)
		rng = numpy.random.default_rng(seed + 20_000)
		features = rng.normal(size=(8, 6))
		target = rng.normal(size=(8, 3))

		cache = ForwardCache()
		forward(state.copy(), features, TRAIN, cache)
		if min(numpy.abs(z).min() for z in cache.pre_activations) >= 1e-4:
			return state, features, target

	raise AssertionError("No batch clear of the activation kink")


@pytest.mark.parametrize("case", range(20))
def test_gradient_check(case: int):
	state, features, target = _gradient_check_case(case)
	l2_lambda = SMALL_SPEC.l2_lambda

	cache = ForwardCache()
	forward(state.copy(), features, TRAIN, cache)
	analytic = backward(state, cache, target)

	def objective(candidate: NetworkState) -> float:
		return loss(forward(candidate, features, TRAIN), target, candidate, l2_lambda)

	step = 1e-6

	for name, param in state.parameters().items():
		numeric = numpy.zeros_like(param)

		for idx in range(param.size):
			plus = state.copy()
			plus.parameters()[name].flat[idx] += step
			minus = state.copy()
			minus.parameters()[name].flat[idx] -= step
			numeric.flat[idx] = (objective(plus) - objective(minus)) / (2 * step)

		difference = numpy.linalg.norm(analytic[name] - numeric)
		scale = numpy.linalg.norm(analytic[name]) + numpy.linalg.norm(numeric)
		assert difference <= 1e-4 * scale or difference <= 1e-8, name


def test_adam_first_step():
	adam = AdamState(learning_rate=1e-3)
	grad = numpy.array([1.0, -2.0, 0.5, 0.0])
	params = {'w': numpy.zeros(4)}

	adam_step(adam, params, {'w': grad})

	assert adam.step == 1
	assert params['w'][0] == pytest.approx(-1e-3 / (1 + 1e-8), rel=1e-12)
	assert_allclose(params['w'], -1e-3 * grad / (numpy.abs(grad) + 1e-8), rtol=1e-12)
	assert params['w'][3] == 0.0


def test_adam_errors():
	adam = AdamState()

	with pytest.raises(ValueError, match="same keys"):
		adam_step(adam, {'w': numpy.zeros(2)}, {'v': numpy.zeros(2)})

	with pytest.raises(ValueError, match="Gradient for 'w' has shape"):
		adam_step(adam, {'w': numpy.zeros(2)}, {'w': numpy.zeros(3)})


def test_r_squared():
	target = numpy.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0], [4.0, 40.0]])

	assert r_squared(target, target) == 1.0
	assert r_squared(numpy.tile(target.mean(axis=0), (4, 1)), target) == pytest.approx(0.0)
	assert r_squared(target[::-1], target) < 0
	assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 4.0]) == pytest.approx(1 - 1 / (14 / 3))


def test_r_squared_errors():
	with pytest.raises(ValueError, match="at least 2 samples"):
		r_squared([[1.0]], [[1.0]])

	with pytest.raises(ValueError, match="zero total variance"):
		r_squared([[1.0, 2.0], [1.0, 3.0]], [[1.0, 2.0], [1.0, 3.0]])


def test_batches():
	assert [len(batch) for batch in _batches(numpy.arange(9), 4)] == [4, 5]
	assert [len(batch) for batch in _batches(numpy.arange(8), 4)] == [4, 4]
	assert [len(batch) for batch in _batches(numpy.arange(10), 4)] == [4, 4, 2]
	assert sorted(numpy.concatenate(_batches(numpy.arange(9), 4))) == list(range(9))


@pytest.mark.parametrize(
		"n_samples, batch_size, sizes",
		[
				pytest.param(65, 64, [65], id="two_batches"),
				pytest.param(9, 2, [2, 2, 2, 3], id="many_batches"),
				pytest.param(13, 4, [4, 4, 5], id="three_batches"),
				]
		)
def test_batches_keep_every_index(n_samples: int, batch_size: int, sizes: List[int]):
	order = numpy.random.default_rng(0).permutation(n_samples)
	batches = _batches(order, batch_size)

	assert [len(batch) for batch in batches] == sizes
	assert_array_equal(numpy.concatenate(batches), order)


def test_training_config():
	assert TrainingConfig().learning_rate == 1e-3
	assert TrainingConfig(**TrainingConfig(batch_size=16).to_dict()) == TrainingConfig(batch_size=16)

	with pytest.raises(ValueError, match="batch_size must be at least 2"):
		TrainingConfig(batch_size=1)


def test_fit_linear_target():
	features, targets = _regression_data(400)
	spec = NetworkSpec(5, (32, 32), 2, l2_lambda=0.0)
	config = TrainingConfig(learning_rate=3e-3, batch_size=32, max_epochs=200, patience=200, seed=0)

	state, history = fit(spec, (features[:300], targets[:300]), (features[300:], targets[300:]), config)

	assert r_squared(forward(state, features[300:]), targets[300:]) >= 0.95
	assert history.best.r2 >= 0.95
	assert history.best.test_mse == min(record.test_mse for record in history)


def test_trainer_is_deterministic():
	features, targets = _regression_data(60)
	spec = NetworkSpec(5, (8, ), 2)
	config = TrainingConfig(batch_size=8, max_epochs=15, patience=3, seed=4)

	state_1, history_1 = Trainer(spec, config).fit((features[:48], targets[:48]), (features[48:], targets[48:]))
	state_2, history_2 = Trainer(spec, config).fit((features[:48], targets[:48]), (features[48:], targets[48:]))

	assert history_1 == history_2
	for weight_1, weight_2 in zip(state_1.weights, state_2.weights):
		assert_array_equal(weight_1, weight_2)

	assert 1 <= len(history_1) <= 15
	assert 1 <= history_1.best_epoch <= len(history_1)
	if history_1.stopped_early:
		assert len(history_1) == history_1.best_epoch + 3


def test_trainer_verbose(capsys):
	features, targets = _regression_data(20)
	config = TrainingConfig(batch_size=8, max_epochs=2, seed=0)

	trainer = Trainer(NetworkSpec(5, (4, ), 2), config, verbose=True)
	trainer.fit((features[:16], targets[:16]), (features[16:], targets[16:]))

	output = capsys.readouterr().out.splitlines()
	assert len(output) == 2
	assert output[0].startswith("Epoch 1/2: train MSE ")


def test_training_diverges():
	features, targets = _regression_data(40)
	config = TrainingConfig(learning_rate=1e300, batch_size=8, max_epochs=5, seed=0)

	with pytest.raises(TrainingDivergedError, match="Training diverged in epoch 1") as excinfo:
		fit(NetworkSpec(5, (8, ), 2), (features[:32], targets[:32]), (features[32:], targets[32:]), config)

	assert excinfo.value.epoch == 1
	assert not math.isfinite(excinfo.value.value)


def test_fit_errors():
	features, targets = _regression_data(10)
	spec = NetworkSpec(5, (4, ), 2)

	with pytest.raises(ValueError, match="at least 2 samples"):
		fit(spec, (features[:1], targets[:1]), (features, targets))

	with pytest.raises(ValueError, match="The test split is empty"):
		fit(spec, (features, targets), (features[:0], targets[:0]))


def test_state_round_trip():
	state = _perturbed(init(SMALL_SPEC, seed=3), seed=4)
	features = numpy.random.default_rng(5).normal(size=(4, 6))

	restored = NetworkState.from_dict(SMALL_SPEC, state.to_dict())
	assert_array_equal(forward(restored, features), forward(state, features))

	data = state.to_dict()
	data["gammas"] = data["gammas"][:1]
	with pytest.raises(ValueError, match="gammas do not match the hidden layer widths"):
		NetworkState.from_dict(SMALL_SPEC, data)


def test_history():
	history = TrainHistory([EpochRecord(1, 0.5, 0.4, 0.1), EpochRecord(2, 0.25, 0.3, 0.5)], best_epoch=2)

	assert len(history) == 2
	assert history.best.test_mse == 0.3
	assert TrainHistory.from_dict(history.to_dict()) == history
	assert history.to_csv() == "epoch,train_mse,test_mse,r2\n1,0.5,0.4,0.1\n2,0.25,0.3,0.5\n"


def test_infer_matches_train_after_convergence():
	state = _perturbed(init(SMALL_SPEC, seed=0), seed=1)
	features = numpy.random.default_rng(6).normal(size=(32, 6))

	for _ in range(300):
		train_output = forward(state, features, TRAIN)

	assert_allclose(forward(state, features, INFER), train_output, atol=1e-3)


def test_l2_penalty_shrinks_weights():
	state = init(SMALL_SPEC, seed=0)
	features = numpy.random.default_rng(7).normal(size=(8, 6))
	adam = AdamState(learning_rate=1e-3)
	norms = [state.weight_norm()]

	for _ in range(5):
		cache = ForwardCache()
		output = forward(state, features, TRAIN, cache)
		adam_step(adam, state.parameters(), backward(state, cache, output.copy(), l2_lambda=0.1))
		norms.append(state.weight_norm())

	assert all(later < earlier for earlier, later in zip(norms, norms[1:]))
