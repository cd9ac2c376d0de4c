#!/usr/bin/env python3
#
#  training.py
"""
Parser for the ``[training]`` table.
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
from typing import Dict, List, Tuple, Type, Union

# 3rd party
from dom_toml.parser import TOML_TYPES, AbstractConfigParser, BadConfigError

# this package
from rasdesign.neuralnet import DEFAULT_HIDDEN_DIMS, TrainingConfig
from rasdesign.pipeline import PipelineConfig

__all__ = ("TrainingParser", )

_defaults = PipelineConfig()


class TrainingParser(AbstractConfigParser):
	"""
	Parser for the ``[training]`` table.

	.. code-block:: toml

		[training]
		hidden_dims = [112, 112, 112, 8, 8, 8]
		learning_rate = 1e-3
		batch_size = 64
		max_epochs = 500
		patience = 50
		n_components = 300
		seed = 0

	The seed is used for both the train/test shuffle and the network initialisation.
	"""

	defaults = {
			"leaky_slope": _defaults.leaky_slope,
			"l2_lambda": _defaults.l2_lambda,
			"bn_momentum": _defaults.bn_momentum,
			"bn_epsilon": _defaults.bn_epsilon,
			"learning_rate": _defaults.training.learning_rate,
			"beta1": _defaults.training.beta1,
			"beta2": _defaults.training.beta2,
			"epsilon": _defaults.training.epsilon,
			"batch_size": _defaults.training.batch_size,
			"max_epochs": _defaults.training.max_epochs,
			"patience": _defaults.training.patience,
			"n_components": _defaults.n_components,
			"train_fraction": _defaults.train_fraction,
			"seed": _defaults.seed,
			}
	factories = {"hidden_dims": lambda: list(DEFAULT_HIDDEN_DIMS)}

	def _number(
			self,
			config: Dict[str, TOML_TYPES],
			key: str,
			kind: Union[Type[int], Type[float]],
			bounds: Tuple[float, float],
			inclusive: Tuple[bool, bool] = (False, False),
			) -> Union[int, float]:
		value = config[key]
		self.assert_type(value, int if kind is int else (int, float), ["training", key])

		low, high = bounds
		above = value >= low if inclusive[0] else value > low  # type: ignore[operator]
		below = value <= high if inclusive[1] else value < high  # type: ignore[operator]

		if not (above and below):
			lo_bracket = '[' if inclusive[0] else '('
			hi_bracket = ']' if inclusive[1] else ')'
			raise BadConfigError(
					f"Invalid value for 'training.{key}': {value} is outside {lo_bracket}{low}, {high}{hi_bracket}."
					)

		return kind(value)  # type: ignore[arg-type]

	def parse_hidden_dims(self, config: Dict[str, TOML_TYPES]) -> List[int]:
		"""
		Parse the ``hidden_dims`` key, giving the width of each hidden layer.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		widths = config["hidden_dims"]
		self.assert_type(widths, list, ["training", "hidden_dims"])

		for idx, width in enumerate(widths):  # type: ignore[arg-type]
			self.assert_indexed_type(width, int, ["training", "hidden_dims"], idx=idx)
			if width < 1:
				raise BadConfigError(f"Invalid value for 'training.hidden_dims[{idx}]': widths must be at least 1.")

		return list(widths)  # type: ignore[arg-type]

	def parse_leaky_slope(self, config: Dict[str, TOML_TYPES]) -> float:
		"""
		Parse the ``leaky_slope`` key, the negative-side slope of the Leaky ReLU.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		return self._number(config, "leaky_slope", float, (0, 1))

	def parse_l2_lambda(self, config: Dict[str, TOML_TYPES]) -> float:
		"""
		Parse the ``l2_lambda`` key, the weight of the L2 penalty.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		return self._number(config, "l2_lambda", float, (0, float("inf")), (True, False))

	def parse_bn_momentum(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "bn_momentum", float, (0, 1), (True, False))

	def parse_bn_epsilon(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "bn_epsilon", float, (0, float("inf")))

	def parse_learning_rate(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "learning_rate", float, (0, float("inf")))

	def parse_beta1(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "beta1", float, (0, 1), (True, False))

	def parse_beta2(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "beta2", float, (0, 1), (True, False))

	def parse_epsilon(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "epsilon", float, (0, float("inf")))

	def parse_batch_size(self, config: Dict[str, TOML_TYPES]) -> int:
		"""
		Parse the ``batch_size`` key. Batches need at least two samples for batch normalisation.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		return self._number(config, "batch_size", int, (2, float("inf")), (True, False))  # type: ignore[return-value]

	def parse_max_epochs(self, config: Dict[str, TOML_TYPES]) -> int:  # noqa: D102
		return self._number(config, "max_epochs", int, (1, float("inf")), (True, False))  # type: ignore[return-value]

	def parse_patience(self, config: Dict[str, TOML_TYPES]) -> int:
		"""
		Parse the ``patience`` key, the number of epochs without improvement before training stops.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		return self._number(config, "patience", int, (1, float("inf")), (True, False))  # type: ignore[return-value]

	def parse_n_components(self, config: Dict[str, TOML_TYPES]) -> int:
		"""
		Parse the ``n_components`` key, the requested number of principal components.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		return self._number(config, "n_components", int, (1, float("inf")), (True, False))  # type: ignore[return-value]

	def parse_train_fraction(self, config: Dict[str, TOML_TYPES]) -> float:  # noqa: D102
		return self._number(config, "train_fraction", float, (0, 1))

	def parse_seed(self, config: Dict[str, TOML_TYPES]) -> int:  # noqa: D102
		return self._number(config, "seed", int, (0, float("inf")), (True, False))  # type: ignore[return-value]

	@property
	def keys(self) -> List[str]:
		"""
		The keys to parse from the TOML file.
		"""

		return [
				"hidden_dims",
				"leaky_slope",
				"l2_lambda",
				"bn_momentum",
				"bn_epsilon",
				"learning_rate",
				"beta1",
				"beta2",
				"epsilon",
				"batch_size",
				"max_epochs",
				"patience",
				"n_components",
				"train_fraction",
				"seed",
				]

	def build(self, config: Dict[str, TOML_TYPES]) -> PipelineConfig:
		"""
		Parse the table and construct a :class:`~rasdesign.pipeline.PipelineConfig`.

		:param config: The unparsed TOML config for the ``[training]`` table.
		"""

		parsed = self.parse(config, set_defaults=True)

		training = TrainingConfig(
				learning_rate=parsed["learning_rate"],
				beta1=parsed["beta1"],
				beta2=parsed["beta2"],
				epsilon=parsed["epsilon"],
				batch_size=parsed["batch_size"],
				max_epochs=parsed["max_epochs"],
				patience=parsed["patience"],
				seed=parsed["seed"],
				)

		return PipelineConfig(
				hidden_dims=parsed["hidden_dims"],
				leaky_slope=parsed["leaky_slope"],
				l2_lambda=parsed["l2_lambda"],
				bn_momentum=parsed["bn_momentum"],
				bn_epsilon=parsed["bn_epsilon"],
				training=training,
				n_components=parsed["n_components"],
				train_fraction=parsed["train_fraction"],
				seed=parsed["seed"],
				)
