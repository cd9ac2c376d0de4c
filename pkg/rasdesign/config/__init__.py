#!/usr/bin/env python3
#
#  __init__.py
"""
Parse ``rasdesign`` configuration files.
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
from typing import Any, Dict, Optional

# 3rd party
import dom_toml
from dom_toml.parser import BadConfigError
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

# this package
from rasdesign.config.sweep import GridParser, StackParser, SweepParser
from rasdesign.config.training import TrainingParser

__all__ = (
		"BadConfigError",
		"GridParser",
		"StackParser",
		"SweepParser",
		"TrainingParser",
		"default_table_path",
		"load_config",
		)

_TABLES = {
		"sweep": SweepParser,
		"stack": StackParser,
		"grid": GridParser,
		"training": TrainingParser,
		}


def default_table_path() -> PathPlus:
	"""
	Returns the path of the bundled reference sweep, ``table1.toml``.
	"""

	return PathPlus(__file__).parent.parent / "table1.toml"


def load_config(filename: Optional[PathLike] = None) -> Dict[str, Any]:
	"""
	Load a configuration file with any of the ``[sweep]``, ``[stack]``, ``[grid]`` and ``[training]`` tables.

	Missing tables take their defaults. Unknown top-level tables are an error.

	:param filename: The TOML file. If :py:obj:`None` every table takes its defaults.

	:returns: A mapping of table name to the constructed
		:class:`~rasdesign.geometry.SweepTable`, :class:`~rasdesign.em_forward.StackSpec`,
		:class:`~rasdesign.em_forward.FrequencyGrid` and :class:`~rasdesign.pipeline.PipelineConfig`.
	"""

	config: Dict[str, Any] = {}

	if filename is not None:
		filename = PathPlus(filename)
		config = dom_toml.load(filename)

		unknown = sorted(set(config) - set(_TABLES))
		if unknown:
			raise BadConfigError(f"Unknown table(s) in {filename.as_posix()!r}: {', '.join(unknown)}")

	parsed = {}

	for name, parser in _TABLES.items():
		table = config.get(name, {})
		if not isinstance(table, dict):
			raise TypeError(f"'{name}' must be a table, not {type(table).__name__}")
		parsed[name] = parser().build(table)

	return parsed
