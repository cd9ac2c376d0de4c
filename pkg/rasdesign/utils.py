#!/usr/bin/env python3
#
#  utils.py
"""
General utilities.
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
import os
from typing import Iterable, List, Mapping, NoReturn, Sequence, Tuple

# 3rd party
import click
from consolekit.terminal_colours import Fore
from consolekit.tracebacks import TracebackHandler
from consolekit.utils import abort
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike
from domdf_python_tools.words import Plural

__all__ = (
		"RasTracebackHandler",
		"atomic_write",
		"atomic_write_all",
		"format_row",
		"parse_int_list",
		"sample_plural",
		)

#: Pluralises "sample" for progress messages.
sample_plural = Plural("sample", "samples")


class RasTracebackHandler(TracebackHandler):
	"""
	Custom :class:`consolekit.tracebacks.TracebackHandler` which turns the package's
	expected errors into one-line diagnostics.
	"""  # noqa: D400

	#: Whether to suggest the ``--traceback`` option in error messages.
	has_traceback_option: bool = True

	def format_exception(self, e: BaseException) -> NoReturn:
		"""
		Abort with the exception's class name and message.

		:param e:
		"""

		msg = [Fore.RED(f"{e.__class__.__name__}: {e}")]
		if self.has_traceback_option:
			msg.append(Fore.YELLOW("Use '--traceback' to view the full traceback."))

		raise abort('\n'.join(msg))

	def handle_BadConfigError(self, e: Exception) -> NoReturn:  # noqa: D102
		self.format_exception(e)

	def handle_ValueError(self, e: ValueError) -> NoReturn:  # noqa: D102
		self.format_exception(e)

	def handle_TypeError(self, e: TypeError) -> NoReturn:  # noqa: D102
		self.format_exception(e)

	def handle_KeyError(self, e: KeyError) -> NoReturn:  # noqa: D102
		self.format_exception(e)

	def handle_ArithmeticError(self, e: ArithmeticError) -> NoReturn:  # noqa: D102
		self.format_exception(e)


def atomic_write(filename: PathLike, text: str) -> PathPlus:
	"""
	Write ``text`` to ``filename`` via a temporary sibling file, so an interrupted write
	never leaves a partial file behind.

	:param filename:
	:param text:

	:returns: The path written to.
	"""  # noqa: D400

	return atomic_write_all({filename: text})[0]


def atomic_write_all(files: Mapping[PathLike, str]) -> List[PathPlus]:
	"""
	Write several files as one unit.

	Every file is first written to a temporary sibling.
	The targets are only replaced once all of the temporary files are complete,
	so a failure part way through leaves none of them behind.

	:param files: Mapping of filenames to their text.

	:returns: The paths written, in order.
	"""

	staged: List[Tuple[PathPlus, PathPlus]] = []

	try:
		for name, text in files.items():
			filename = PathPlus(name)
			filename.parent.maybe_make(parents=True)
			tmp_file = filename.with_name(f".{filename.name}.tmp")
			staged.append((tmp_file, filename))

			with open(tmp_file, 'w', encoding="UTF-8", newline='\n') as fp:
				fp.write(text)

		for tmp_file, filename in staged:
			os.replace(tmp_file, filename)

	except BaseException:
		for tmp_file, _ in staged:
			if tmp_file.exists():
				tmp_file.unlink()
		raise

	return [filename for _, filename in staged]


def parse_int_list(value: str) -> List[int]:
	"""
	Parse a comma-separated list of positive integers, such as ``2,4,6``.

	:param value:
	"""

	try:
		parsed = [int(part) for part in value.split(',') if part.strip()]
	except ValueError:
		raise click.BadParameter(f"Expected a comma-separated list of integers, got {value!r}")

	if not parsed or any(item < 1 for item in parsed):
		raise click.BadParameter(f"Expected a comma-separated list of positive integers, got {value!r}")

	return parsed


def format_row(cells: Iterable[object], widths: Sequence[int]) -> str:
	"""
	Right-align ``cells`` into columns of the given ``widths``.

	:param cells:
	:param widths:
	"""

	return ' '.join(str(cell).rjust(width) for cell, width in zip(cells, widths)).rstrip()
