#!/usr/bin/env python3
#
#  plotting.py
"""
Static SVG plots of validation curves and training histories.

Requires the ``plot`` extra (matplotlib).
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
import io
from typing import TYPE_CHECKING, Dict, Optional

# 3rd party
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

# this package
from rasdesign.neuralnet import TrainHistory
from rasdesign.pipeline import SampleResult, band_limits
from rasdesign.utils import atomic_write

if TYPE_CHECKING:
	# 3rd party
	from matplotlib.figure import Figure

__all__ = ("history_svg", "plot_histories", "plot_sample", "sample_svg")


def _figure() -> "Figure":
	try:
		# 3rd party
		from matplotlib.figure import Figure
	except ImportError:  # pragma: no cover
		raise ImportError("Plotting requires matplotlib. Install it with 'pip install rasdesign[plot]'.") from None

	return Figure(figsize=(7, 4))


def _to_svg(figure: "Figure") -> str:
	buffer = io.StringIO()
	figure.tight_layout()
	figure.savefig(buffer, format="svg")
	return buffer.getvalue()


def sample_svg(result: SampleResult, title: Optional[str] = None) -> str:
	"""
	Returns an SVG plot of a sample's true curve, its ±5% band and the round-trip curve.

	:param result:
	:param title:
	"""

	figure = _figure()
	axes = figure.add_subplot()

	curve = result.true.curve
	freqs = curve.grid.frequencies()
	lower, upper = band_limits(curve)

	axes.fill_between(freqs, lower, upper, color="tab:blue", alpha=0.2, label="±5% band")
	axes.plot(freqs, curve.values, color="tab:blue", label="True")

	if result.roundtrip is not None:
		axes.plot(freqs, result.roundtrip.values, color="tab:red", linestyle="--", label="Predicted")

	axes.set_xlabel("Frequency (GHz)")
	axes.set_ylabel("Reflection coefficient (dB)")
	axes.grid(True)
	axes.legend()

	if title:
		axes.set_title(title)

	return _to_svg(figure)


def history_svg(histories: Dict[int, TrainHistory]) -> str:
	"""
	Returns an SVG plot of the test MSE against epoch for each history.

	:param histories: Mapping of hidden-layer count to training history.
	"""

	figure = _figure()
	axes = figure.add_subplot()

	for depth, history in histories.items():
		axes.plot([r.epoch for r in history], [r.test_mse for r in history], label=f"{depth} hidden layers")

	axes.set_xlabel("Epoch")
	axes.set_ylabel("Test MSE")
	axes.set_yscale("log")
	axes.grid(True)
	axes.legend()

	return _to_svg(figure)


def plot_sample(result: SampleResult, filename: PathLike, title: Optional[str] = None) -> PathPlus:
	"""
	Write :func:`~.sample_svg` to ``filename``.

	:param result:
	:param filename:
	:param title:
	"""

	return atomic_write(filename, sample_svg(result, title))


def plot_histories(histories: Dict[int, TrainHistory], filename: PathLike) -> PathPlus:
	"""
	Write :func:`~.history_svg` to ``filename``.

	:param histories:
	:param filename:
	"""

	return atomic_write(filename, history_svg(histories))
