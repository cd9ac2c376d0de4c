#!/usr/bin/env python3
#
#  __main__.py
"""
Command-line interface for generating datasets, training inverse-design models and validating them.
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
import sys
from typing import Dict, Optional, Sequence

# 3rd party
import click
from consolekit import CONTEXT_SETTINGS, click_group
from consolekit.options import auto_default_option, colour_option, flag_option, version_option
from consolekit.tracebacks import handle_tracebacks

if False:  # TYPE_CHECKING:  # pylint: disable=using-constant-test
	# 3rd party
	from consolekit.terminal_colours import ColourTrilean
	from domdf_python_tools.typing import PathLike

	# this package
	from rasdesign.dataset import Dataset

__all__ = ("gen", "main", "predict", "study", "train", "validate")


def version_callback(ctx: click.Context, param: click.Option, value: int) -> None:
	"""
	Callback for displaying the package version (and optionally the Python runtime).
	"""

	# 3rd party
	from consolekit.versions import get_version_callback

	# this package
	import rasdesign

	key_dependencies = ["numpy", "dom-toml", "attrs"]
	return get_version_callback(rasdesign.__version__, "rasdesign", key_dependencies)(ctx, param, value)


@version_option(version_callback)
@flag_option(
		"-T",
		"--traceback",
		"show_traceback",
		help="Show the complete traceback on error.",
		envvar="RASDESIGN_TRACEBACK",
		)
@colour_option()
@click_group(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def main(ctx: click.Context, show_traceback: bool = False, colour: "ColourTrilean" = None) -> None:
	"""
	Inverse design of resistive Jerusalem-cross radar absorbers.
	"""

	ctx.obj = {"show_traceback": show_traceback, "colour": colour}


def _tracebacks(ctx: click.Context):  # noqa: MAN002
	# this package
	from rasdesign.utils import RasTracebackHandler

	return handle_tracebacks(ctx.obj["show_traceback"], RasTracebackHandler)


def _load_datasets(paths: Sequence[str]) -> "Dataset":
	# this package
	from rasdesign.dataset import load, merge

	return merge([load(path) for path in paths])


def _table_from(filename: Optional[str], table: str):  # noqa: MAN002
	# this package
	from rasdesign.config import default_table_path, load_config

	return load_config(filename if filename is not None else default_table_path())[table]


@flag_option("-v", "--verbose", help="Report progress.")
@auto_default_option("--seed", type=click.INT, help="Seed recorded in the dataset metadata.")
@click.option(
		"--grid",
		"grid_file",
		type=click.Path(exists=True, dir_okay=False),
		default=None,
		help="TOML file with a [grid] table.",
		)
@click.option(
		"--stack",
		"stack_file",
		type=click.Path(exists=True, dir_okay=False),
		default=None,
		help="TOML file with a [stack] table.",
		)
@click.option(
		"--t",
		"thickness",
		type=click.FloatRange(min=0, min_open=True),
		multiple=True,
		help="Spacer thickness in mm. May be given multiple times. Overrides the sweep's thicknesses.",
		)
@click.option(
		"--table",
		type=click.Path(exists=True, dir_okay=False),
		default=None,
		help="TOML file with a [sweep] table. Defaults to the bundled reference sweep.",
		)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True, help="The dataset CSV to write.")
@main.command(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def gen(
		ctx: click.Context,
		out: str,
		table: Optional[str] = None,
		thickness: Sequence[float] = (),
		stack_file: Optional[str] = None,
		grid_file: Optional[str] = None,
		seed: int = 0,
		verbose: bool = False,
		) -> None:
	"""
	Simulate every geometry of a parametric sweep and save the dataset.
	"""

	# 3rd party
	import attr

	# this package
	from rasdesign.dataset import DatasetGenerator, save
	from rasdesign.utils import sample_plural

	with _tracebacks(ctx):
		sweep = _table_from(table, "sweep")
		if thickness:
			sweep = attr.evolve(sweep, thicknesses=sorted(set(thickness)))

		generator = DatasetGenerator(
				sweep,
				_table_from(stack_file or table, "stack"),
				_table_from(grid_file or table, "grid"),
				seed,
				verbose=verbose,
				colour=ctx.obj["colour"],
				)
		dataset = generator.generate()
		written = save(dataset, out)

		click.echo(
				f"Wrote {len(dataset)} {sample_plural(len(dataset))} "
				f"({dataset.grid.count} reflection columns) to {written.as_posix()} "
				f"in {generator.elapsed:.1f} s"
				)


@flag_option("-v", "--verbose", help="Report per-epoch progress.")
@click.option("--history", type=click.Path(dir_okay=False), default=None, help="The history CSV to write.")
@click.option("--seed", type=click.INT, default=None, help="Seed for the split and the network. Overrides --config.")
@click.option(
		"--config",
		"config_file",
		type=click.Path(exists=True, dir_okay=False),
		default=None,
		help="TOML file with a [training] table.",
		)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True, help="The model file to write.")
@click.option(
		"--data",
		type=click.Path(exists=True, dir_okay=False),
		multiple=True,
		required=True,
		help="Dataset CSV. May be given multiple times; the datasets are merged.",
		)
@click.option(
		"--case",
		type=click.Choice(['1', '2']),
		required=True,
		help="1: predict a, b, c and d at a fixed thickness. 2: also predict the thickness.",
		)
@main.command(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def train(
		ctx: click.Context,
		case: str,
		data: Sequence[str],
		out: str,
		config_file: Optional[str] = None,
		seed: Optional[int] = None,
		history: Optional[str] = None,
		verbose: bool = False,
		) -> None:
	"""
	Train an inverse-design model.
	"""

	# 3rd party
	from domdf_python_tools.paths import PathPlus

	# this package
	from rasdesign.config import load_config
	from rasdesign.pipeline import save_model, train_case1, train_case2

	with _tracebacks(ctx):
		config = load_config(config_file)["training"]
		if seed is not None:
			config = config.with_seed(seed)

		dataset = _load_datasets(data)
		trainer = train_case1 if case == '1' else train_case2
		model = trainer(dataset, config, verbose=verbose, colour=ctx.obj["colour"])

		out_path = PathPlus(out)
		history_file = PathPlus(history) if history else out_path.with_name(f"{out_path.stem}.history.csv")
		model_file = save_model(model, out_path, history_file)

		best = model.history.best
		click.echo(
				f"Trained for {len(model.history)} epochs; kept epoch {best.epoch} "
				f"(test MSE {best.test_mse:.6f}, R² {best.r2:.4f})"
				)
		click.echo(f"Wrote {model_file.as_posix()} and {history_file.as_posix()}")


@click.option(
		"--curve",
		type=click.Path(exists=True, dir_okay=False),
		required=True,
		help="CSV with f_GHz,r_dB columns.",
		)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True, help="The model file.")
@main.command(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def predict(ctx: click.Context, model: str, curve: str) -> None:
	"""
	Predict the unit cell producing a reflection curve.
	"""

	# this package
	from rasdesign.dataset import load_curve
	from rasdesign.pipeline import CASE1, load_model, predict_geometry

	with _tracebacks(ctx):
		trained = load_model(model)
		prediction = predict_geometry(trained, load_curve(curve))

		for name in trained.outputs:
			click.echo(f"{name} = {getattr(prediction.geometry, name):.2f} mm")

		if trained.case == CASE1:
			click.echo(f"t = {prediction.geometry.t:.2f} mm (fixed)")

		if prediction.was_clamped:
			click.echo(f"Clamped to the training sweep: {', '.join(prediction.clamped)}")


@flag_option("--plot", help="Also write an SVG plot per sample. Requires matplotlib.")
@auto_default_option(
		"-o",
		"--out-dir",
		type=click.Path(file_okay=False),
		help="Directory for the report and curve files.",
		)
@auto_default_option("--seed", type=click.INT, help="Seed for drawing the samples.")
@auto_default_option("--n", "count", type=click.IntRange(min=1), help="The number of samples to validate.")
@click.option(
		"--data",
		type=click.Path(exists=True, dir_okay=False),
		multiple=True,
		required=True,
		help="Dataset CSV. May be given multiple times; the datasets are merged.",
		)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True, help="The model file.")
@main.command(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def validate(
		ctx: click.Context,
		model: str,
		data: Sequence[str],
		count: int = 4,
		seed: int = 0,
		out_dir: str = "validation",
		plot: bool = False,
		) -> None:
	"""
	Predict held-out samples, re-simulate the predictions and compare the curves.
	"""

	# this package
	from rasdesign.pipeline import format_report_table, load_model, round_trip_validate, save_report, select_samples

	with _tracebacks(ctx):
		trained = load_model(model)
		dataset = _load_datasets(data)
		report = round_trip_validate(trained, select_samples(trained, dataset, count, seed))
		written = save_report(report, out_dir)

		if plot:
			# this package
			from rasdesign.plotting import plot_sample

			for idx, result in enumerate(report.results, start=1):
				written.append(plot_sample(result, written[0].parent / f"sample_{idx}.svg", f"Sample {idx}"))

		click.echo(format_report_table(report))
		click.echo(f"Wrote {len(written)} files to {written[0].parent.as_posix()}")


@flag_option("-v", "--verbose", help="Report per-epoch progress.")
@flag_option("--plot", help="Also write an SVG plot of test MSE against epoch. Requires matplotlib.")
@auto_default_option(
		"-o",
		"--out-dir",
		type=click.Path(file_okay=False),
		help="Directory for the history files.",
		)
@click.option("--seed", type=click.INT, default=None, help="Seed shared by every depth. Overrides --config.")
@click.option(
		"--config",
		"config_file",
		type=click.Path(exists=True, dir_okay=False),
		default=None,
		help="TOML file with a [training] table.",
		)
@auto_default_option("--depths", type=click.STRING, help="Comma-separated hidden-layer counts.")
@click.option(
		"--data",
		type=click.Path(exists=True, dir_okay=False),
		multiple=True,
		required=True,
		help="Dataset CSV. May be given multiple times; the datasets are merged.",
		)
@main.command(context_settings=CONTEXT_SETTINGS)
@click.pass_context
def study(
		ctx: click.Context,
		data: Sequence[str],
		depths: str = "2,4,6,8",
		config_file: Optional[str] = None,
		seed: Optional[int] = None,
		out_dir: str = "study",
		plot: bool = False,
		verbose: bool = False,
		) -> None:
	"""
	Compare training histories for different numbers of hidden layers.
	"""

	# 3rd party
	from domdf_python_tools.paths import PathPlus

	# this package
	from rasdesign.config import load_config
	from rasdesign.pipeline import depth_study_table, layer_depth_study
	from rasdesign.utils import atomic_write_all, parse_int_list

	depth_list = parse_int_list(depths)

	with _tracebacks(ctx):
		config = load_config(config_file)["training"]
		if seed is not None:
			config = config.with_seed(seed)

		histories = layer_depth_study(
				_load_datasets(data),
				depth_list,
				config,
				verbose=verbose,
				colour=ctx.obj["colour"],
				)

		directory = PathPlus(out_dir)
		files: Dict[PathLike, str] = {
				directory / f"depth_{depth}.csv": history.to_csv()
				for depth, history in histories.items()
				}
		files[directory / "study.csv"] = depth_study_table(histories)
		atomic_write_all(files)

		if plot:
			# this package
			from rasdesign.plotting import plot_histories

			plot_histories(histories, directory / "study.svg")

		click.echo(depth_study_table(histories).rstrip())
		click.echo(f"Wrote {len(histories) + 1} files to {directory.as_posix()}")


if __name__ == "__main__":
	sys.exit(main())
