#!/usr/bin/env python3
#
#  features.py
"""
Transforms applied to reflection curves and target dimensions around the network.

Curves are standardised per frequency point, projected onto their principal
components, and the targets are min-max scaled to ``[0, 1]``.
All transforms are fitted on the training split only.
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
from typing import Any, Dict, Tuple

# 3rd party
import attr
import numpy

__all__ = (
		"FeatureScaler",
		"PcaBasis",
		"STD_FLOOR",
		"TargetScaler",
		"cap_components",
		"pca_fit",
		"pca_inverse",
		"pca_transform",
		)

#: Standard deviations below this are floored to it.
STD_FLOOR = 1e-12


def _as_matrix(values: Any) -> numpy.ndarray:
	matrix = numpy.asarray(values, dtype=numpy.float64)
	if matrix.ndim == 1:
		matrix = matrix[numpy.newaxis, :]
	if matrix.ndim != 2:
		raise ValueError(f"Expected a 2-dimensional array, got shape {matrix.shape}")
	return matrix


def _check_width(matrix: numpy.ndarray, width: int, what: str) -> None:
	if matrix.shape[1] != width:
		raise ValueError(f"Dimension mismatch: {what} expects {width} columns, got {matrix.shape[1]}")


def _as_vector(values: Any) -> numpy.ndarray:
	return numpy.asarray(values, dtype=numpy.float64).reshape(-1)


@attr.frozen(eq=False)
class FeatureScaler:
	"""
	Per-feature standardisation ``(x - mean) / std``.
	"""

	means: numpy.ndarray = attr.field(converter=_as_vector)
	std_devs: numpy.ndarray = attr.field(converter=_as_vector)

	#: Features whose standard deviation was floored to :data:`~.STD_FLOOR`.
	warnings: Tuple[str, ...] = attr.field(default=(), converter=tuple)

	def __attrs_post_init__(self) -> None:
		if self.means.shape != self.std_devs.shape:
			raise ValueError("means and std_devs must have the same length")
		if numpy.any(self.std_devs < STD_FLOOR):
			raise ValueError(f"std_devs must be at least {STD_FLOOR}")

	@classmethod
	def fit(cls, features: Any) -> "FeatureScaler":
		"""
		Compute the per-feature mean and (population) standard deviation.

		:param features: An ``n × p`` matrix.
		"""

		features = _as_matrix(features)
		means = features.mean(axis=0)
		std_devs = features.std(axis=0)

		flat = numpy.flatnonzero(std_devs < STD_FLOOR)
		warnings = [f"feature {idx} has zero variance; std floored to {STD_FLOOR}" for idx in flat]

		return cls(means, numpy.maximum(std_devs, STD_FLOOR), warnings)

	def apply(self, features: Any) -> numpy.ndarray:
		"""
		Standardise ``features`` with the fitted statistics.

		:param features:
		"""

		features = _as_matrix(features)
		_check_width(features, self.means.shape[0], "the feature scaler")
		return (features - self.means) / self.std_devs

	def invert(self, scaled: Any) -> numpy.ndarray:
		"""
		Undo :meth:`~.apply`.

		:param scaled:
		"""

		scaled = _as_matrix(scaled)
		_check_width(scaled, self.means.shape[0], "the feature scaler")
		return scaled * self.std_devs + self.means

	def to_dict(self) -> Dict[str, Any]:  # noqa: D102
		return {
				"means": self.means.tolist(),
				"std_devs": self.std_devs.tolist(),
				"warnings": list(self.warnings),
				}

	@classmethod
	def from_dict(cls, data: Dict[str, Any]) -> "FeatureScaler":  # noqa: D102
		return cls(data["means"], data["std_devs"], data.get("warnings", ()))


@attr.frozen(eq=False)
class TargetScaler:
	"""
	Per-dimension min-max scaling to ``[0, 1]``.
	"""

	mins: numpy.ndarray = attr.field(converter=_as_vector)
	maxs: numpy.ndarray = attr.field(converter=_as_vector)

	#: Dimensions whose training range was degenerate.
	warnings: Tuple[str, ...] = attr.field(default=(), converter=tuple)

	def __attrs_post_init__(self) -> None:
		if self.mins.shape != self.maxs.shape:
			raise ValueError("mins and maxs must have the same length")
		if not numpy.all(self.maxs > self.mins):
			raise ValueError("Every maximum must exceed its minimum")

	@classmethod
	def fit(cls, targets: Any) -> "TargetScaler":
		"""
		Record the per-dimension range of ``targets``.

		A dimension that never varies is given a unit-wide range starting at its value.

		:param targets: An ``n × m`` matrix.
		"""

		targets = _as_matrix(targets)
		mins = targets.min(axis=0)
		maxs = targets.max(axis=0)

		flat = numpy.flatnonzero(maxs <= mins)
		warnings = [f"target {idx} is constant; using a unit range" for idx in flat]
		maxs = numpy.where(maxs > mins, maxs, mins + 1.0)

		return cls(mins, maxs, warnings)

	@property
	def spans(self) -> numpy.ndarray:
		"""
		The width of each dimension's range.
		"""

		return self.maxs - self.mins

	def apply(self, targets: Any) -> numpy.ndarray:
		"""
		Scale ``targets`` to the unit interval.

		:param targets:
		"""

		targets = _as_matrix(targets)
		_check_width(targets, self.mins.shape[0], "the target scaler")
		return (targets - self.mins) / self.spans

	def invert(self, scaled: Any) -> numpy.ndarray:
		"""
		Undo :meth:`~.apply`.

		:param scaled:
		"""

		scaled = _as_matrix(scaled)
		_check_width(scaled, self.mins.shape[0], "the target scaler")
		return scaled * self.spans + self.mins

	def to_dict(self) -> Dict[str, Any]:  # noqa: D102
		return {
				"mins": self.mins.tolist(),
				"maxs": self.maxs.tolist(),
				"warnings": list(self.warnings),
				}

	@classmethod
	def from_dict(cls, data: Dict[str, Any]) -> "TargetScaler":  # noqa: D102
		return cls(data["mins"], data["maxs"], data.get("warnings", ()))


@attr.frozen(eq=False)
class PcaBasis:
	"""
	A principal-component basis.
	"""

	#: The mean of the data the basis was fitted on.
	mean: numpy.ndarray = attr.field(converter=_as_vector)

	#: ``k × p`` matrix with orthonormal rows.
	components: numpy.ndarray = attr.field(converter=_as_matrix)

	#: Variance along each component, non-increasing.
	explained_variance: numpy.ndarray = attr.field(converter=_as_vector)

	#: Total variance of the fitted data.
	total_variance: float = attr.field(converter=float)

	def __attrs_post_init__(self) -> None:
		k, p = self.components.shape
		if self.mean.shape != (p, ):
			raise ValueError(f"mean has {self.mean.shape[0]} entries but the components have {p} columns")
		if self.explained_variance.shape != (k, ):
			raise ValueError(f"Expected {k} explained variances, got {self.explained_variance.shape[0]}")

	@property
	def n_components(self) -> int:
		"""
		The number of retained components.
		"""

		return self.components.shape[0]

	@property
	def input_dim(self) -> int:
		"""
		The dimension of the data the basis projects.
		"""

		return self.components.shape[1]

	@property
	def explained_variance_ratio(self) -> numpy.ndarray:
		"""
		The fraction of the total variance explained by each component.
		"""

		if self.total_variance <= 0:
			return numpy.zeros_like(self.explained_variance)
		return self.explained_variance / self.total_variance

	def to_dict(self) -> Dict[str, Any]:  # noqa: D102
		return {
				"mean": self.mean.tolist(),
				"components": self.components.tolist(),
				"explained_variance": self.explained_variance.tolist(),
				"total_variance": self.total_variance,
				}

	@classmethod
	def from_dict(cls, data: Dict[str, Any]) -> "PcaBasis":  # noqa: D102
		return cls(data["mean"], data["components"], data["explained_variance"], data["total_variance"])


def cap_components(requested: int, n_samples: int, n_features: int) -> int:
	"""
	Returns the number of components that can be fitted, ``min(requested, n_samples - 1, n_features)``.

	:param requested:
	:param n_samples:
	:param n_features:
	"""

	return max(1, min(requested, n_samples - 1, n_features))


def pca_fit(data: Any, n_components: int) -> PcaBasis:
	"""
	Fit a principal-component basis from the eigendecomposition of the sample covariance.

	Components are ordered by descending eigenvalue, and each is signed so that its
	largest-magnitude entry is positive.

	:param data: An ``n × p`` matrix.
	:param n_components:

	:raises ValueError: If there are fewer than two samples or ``n_components`` exceeds ``min(n - 1, p)``.
	"""

	data = _as_matrix(data)
	n, p = data.shape

	if n < 2:
		raise ValueError(f"PCA needs at least 2 samples, got {n}")
	if not 1 <= n_components <= min(n - 1, p):
		raise ValueError(f"Cannot fit {n_components} components to {n} samples of {p} features")

	mean = data.mean(axis=0)
	centred = data - mean
	covariance = centred.T @ centred / (n - 1)

	eigenvalues, eigenvectors = numpy.linalg.eigh(covariance)
	order = numpy.argsort(eigenvalues)[::-1][:n_components]

	components = eigenvectors[:, order].T.copy()
	rows = numpy.arange(n_components)
	signs = numpy.sign(components[rows, numpy.argmax(numpy.abs(components), axis=1)])
	components *= signs[:, numpy.newaxis]

	explained = numpy.clip(eigenvalues[order], 0.0, None)

	return PcaBasis(mean, components, explained, float(numpy.trace(covariance)))


def pca_transform(basis: PcaBasis, data: Any) -> numpy.ndarray:
	"""
	Project ``data`` onto the basis, ``(X - mean) · componentsᵀ``.

	:param basis:
	:param data: An ``n × p`` matrix.
	"""

	data = _as_matrix(data)
	_check_width(data, basis.input_dim, "the PCA basis")
	return (data - basis.mean) @ basis.components.T


def pca_inverse(basis: PcaBasis, scores: Any) -> numpy.ndarray:
	"""
	Map component scores back to the data space, ``Z · components + mean``.

	:param basis:
	:param scores: An ``n × k`` matrix.
	"""

	scores = _as_matrix(scores)
	_check_width(scores, basis.n_components, "the inverse PCA")
	return scores @ basis.components + basis.mean
