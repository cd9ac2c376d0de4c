# stdlib
from typing import List

# 3rd party
import numpy
import pytest
from domdf_python_tools.paths import PathPlus
from numpy.testing import assert_allclose, assert_array_equal

# this package
from rasdesign.dataset import (
		GEOMETRY_COLUMNS,
		PRNG_NAME,
		Dataset,
		DatasetGenerator,
		DatasetMetadata,
		DatasetParseError,
		Sample,
		SplitSpec,
		fingerprint,
		generate,
		load,
		load_curve,
		merge,
		metadata_path,
		quantize_curve,
		save,
		save_curve,
		split,
		split_indices,
		thicknesses
		)
from rasdesign.em_forward import FrequencyGrid, ReflectionCurve, StackSpec, reflection_curve
from rasdesign.geometry import SweepRow, SweepTable, UnitCellGeometry, enumerate_sweep


def test_generate(small_table: SweepTable, small_dataset: Dataset, coarse_grid: FrequencyGrid):
	assert len(small_dataset) == 150
	assert small_dataset.grid == coarse_grid
	assert small_dataset.metadata.sweep == small_table
	assert small_dataset.metadata.seed == 3
	assert small_dataset.metadata.prng == PRNG_NAME
	assert small_dataset.metadata.generator_version.startswith("rasdesign ")

	assert [s.geometry for s in small_dataset.samples] == enumerate_sweep(small_table)

	sample = small_dataset.samples[42]
	assert sample.curve == quantize_curve(reflection_curve(sample.geometry, StackSpec(), coarse_grid))

	assert small_dataset.geometry_matrix().shape == (150, 5)
	assert small_dataset.curve_matrix().shape == (150, 57)
	assert thicknesses(small_dataset) == [2.0]


def test_generate_verbose(small_table: SweepTable, coarse_grid: FrequencyGrid, capsys):
	generator = DatasetGenerator(small_table, StackSpec(), coarse_grid, verbose=True)
	generator.report_every = 100
	dataset = generator.generate()

	assert len(dataset) == 150
	assert generator.elapsed > 0
	assert capsys.readouterr().out.splitlines() == ["Simulating 150 samples", "  100/150"]


def test_empty_sweep(coarse_grid: FrequencyGrid):
	table = SweepTable([SweepRow(5.0, (2.0, 2.0), (3.0, 3.0), (1.0, 1.0))])

	with pytest.raises(ValueError, match="empty dataset"):
		generate(table, StackSpec(), coarse_grid)


def test_dataset_checks(small_dataset: Dataset):
	with pytest.raises(ValueError, match="empty dataset"):
		Dataset([], small_dataset.metadata)

	other_grid = FrequencyGrid(2.0, 30.0, 1.0)
	sample = Sample(UnitCellGeometry(5.0, 3.5, 1.4, 4.0, 2.0), ReflectionCurve(other_grid, numpy.zeros(29)))
	with pytest.raises(ValueError, match="does not use the dataset's frequency grid"):
		Dataset([sample], small_dataset.metadata)


def test_duplicates_dropped(small_dataset: Dataset):
	samples = small_dataset.samples[:3]
	repeated = Dataset([samples[0], samples[1], samples[0], samples[2], samples[1]], small_dataset.metadata)

	assert repeated.samples == samples


def test_subset(small_dataset: Dataset):
	subset = small_dataset.subset([5, 1, 9])
	assert [s.geometry for s in subset.samples] == [small_dataset.samples[i].geometry for i in (5, 1, 9)]
	assert subset.metadata == small_dataset.metadata


def test_fingerprint(small_dataset: Dataset):
	digest = fingerprint(small_dataset)

	assert len(digest) == 64
	assert fingerprint(small_dataset.subset(range(len(small_dataset)))) == digest
	assert fingerprint(small_dataset.subset(range(1, len(small_dataset)))) != digest


@pytest.mark.parametrize(
		"count, fraction, expected",
		[
				pytest.param(7600, 0.8, (6080, 1520), id="reference"),
				pytest.param(5, 0.8, (4, 1), id="five"),
				pytest.param(10, 0.7, (7, 3), id="seventy"),
				pytest.param(3, 0.5, (1, 2), id="floor"),
				]
		)
def test_split_sizes(count: int, fraction: float, expected: tuple):
	train_idx, test_idx = split_indices(count, SplitSpec(fraction, seed=11))

	assert (len(train_idx), len(test_idx)) == expected
	assert sorted(numpy.concatenate([train_idx, test_idx]).tolist()) == list(range(count))


def test_split_determinism():
	first = split_indices(100, SplitSpec(0.8, seed=4))
	second = split_indices(100, SplitSpec(0.8, seed=4))
	other = split_indices(100, SplitSpec(0.8, seed=5))

	assert_array_equal(first[0], second[0])
	assert_array_equal(first[1], second[1])
	assert not numpy.array_equal(first[0], other[0])


@pytest.mark.parametrize(
		"count, fraction",
		[
				pytest.param(1, 0.8, id="single"),
				pytest.param(4, 0.1, id="empty_train"),
				pytest.param(2, 0.4, id="two"),
				]
		)
def test_split_empty_side(count: int, fraction: float):
	with pytest.raises(ValueError, match="empty"):
		split_indices(count, SplitSpec(fraction))


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.5, 1.5])
def test_split_spec_validation(fraction: float):
	with pytest.raises(ValueError, match="train_fraction must lie strictly between 0 and 1"):
		SplitSpec(fraction)


def test_split(small_dataset: Dataset):
	train, test = split(small_dataset, SplitSpec(0.8, seed=2))

	assert len(train) == 120
	assert len(test) == 30

	train_set = {s.geometry for s in train.samples}
	test_set = {s.geometry for s in test.samples}
	assert not train_set & test_set
	assert train_set | test_set == {s.geometry for s in small_dataset.samples}


def test_merge(small_table: SweepTable, coarse_grid: FrequencyGrid, small_dataset: Dataset):
	thick = generate(SweepTable(small_table.rows, small_table.steps, (4.0, )), StackSpec(), coarse_grid)

	merged = merge([small_dataset, thick])
	assert len(merged) == 300
	assert thicknesses(merged) == [2.0, 4.0]
	assert merged.metadata.sweep is None

	assert merge([small_dataset]) is small_dataset
	assert len(merge([small_dataset, small_dataset])) == 150


def test_merge_mismatch(small_table: SweepTable, small_dataset: Dataset):
	other_grid = generate(small_table, StackSpec(), FrequencyGrid(2.0, 30.0, 1.0))
	with pytest.raises(ValueError, match="different grids"):
		merge([small_dataset, other_grid])

	other_stack = generate(small_table, StackSpec(sheet_resistance=50), small_dataset.grid)
	with pytest.raises(ValueError, match="different stacks"):
		merge([small_dataset, other_stack])

	with pytest.raises(ValueError, match="No datasets"):
		merge([])


def test_metadata_round_trip(small_dataset: Dataset):
	metadata = small_dataset.metadata
	assert DatasetMetadata.from_dict(metadata.to_dict()) == metadata

	merged = DatasetMetadata(StackSpec(superstrate=None, sheet_resistance="open"), FrequencyGrid())
	assert "sweep" not in merged.to_dict()
	assert DatasetMetadata.from_dict(merged.to_dict()) == merged


def test_save_load(tmp_pathplus: PathPlus, small_dataset: Dataset):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")

	assert filename == tmp_pathplus / "ds.csv"
	assert metadata_path(filename) == tmp_pathplus / "ds.meta.toml"
	assert metadata_path(filename).is_file()

	lines = _read(filename)
	assert lines[0].split(',')[:5] == list(GEOMETRY_COLUMNS)
	assert lines[0].split(',')[5] == "r_0001"
	assert len(lines[0].split(',')) == 5 + 57
	assert len(lines) == 151

	loaded = load(filename)
	assert loaded.metadata == small_dataset.metadata
	assert_array_equal(loaded.geometry_matrix(), small_dataset.geometry_matrix())
	assert_array_equal(loaded.curve_matrix(), small_dataset.curve_matrix())
	assert loaded == small_dataset
	assert fingerprint(loaded) == fingerprint(small_dataset)

	again = save(loaded, tmp_pathplus / "again.csv")
	assert again.read_text() == filename.read_text()
	assert load(again) == loaded


def test_load_missing_sidecar(tmp_pathplus: PathPlus, small_dataset: Dataset):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")
	metadata_path(filename).unlink()

	with pytest.raises(FileNotFoundError, match="ds.meta.toml"):
		load(filename)


def _read(filename: PathPlus) -> List[str]:
	return filename.read_text().splitlines()


def _write(filename: PathPlus, lines: List[str]) -> None:
	filename.write_text('\n'.join(lines) + '\n')


def _corrupt(filename: PathPlus, lineno: int, new_line: str) -> None:
	lines = _read(filename)
	lines[lineno - 1] = new_line
	_write(filename, lines)


def test_load_wrong_column_count(tmp_pathplus: PathPlus, small_dataset: Dataset):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")
	lines = _read(filename)

	# Drop the last reflection column from every row.
	_write(filename, [line.rsplit(',', 1)[0] for line in lines])

	with pytest.raises(DatasetParseError, match="line 1: malformed header: expected 62 columns") as excinfo:
		load(filename)

	assert excinfo.value.lineno == 1


def test_load_truncated_line(tmp_pathplus: PathPlus, small_dataset: Dataset):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")
	lines = _read(filename)
	_corrupt(filename, 151, lines[150][:40])

	with pytest.raises(DatasetParseError, match="line 151: expected 62 columns, got ") as excinfo:
		load(filename)

	assert excinfo.value.lineno == 151


@pytest.mark.parametrize(
		"cell, match",
		[
				pytest.param("spam", "non-numeric value 'spam'", id="text"),
				pytest.param("nan", "non-finite value 'nan'", id="nan"),
				pytest.param("-inf", "non-finite value '-inf'", id="inf"),
				pytest.param('', "non-numeric value ''", id="blank"),
				]
		)
def test_load_bad_cell(tmp_pathplus: PathPlus, small_dataset: Dataset, cell: str, match: str):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")
	cells = _read(filename)[9].split(',')
	cells[20] = cell
	_corrupt(filename, 10, ','.join(cells))

	with pytest.raises(DatasetParseError, match=f"line 10: {match}"):
		load(filename)


def test_load_no_samples(tmp_pathplus: PathPlus, small_dataset: Dataset):
	filename = save(small_dataset, tmp_pathplus / "ds.csv")
	_write(filename, _read(filename)[:1])

	with pytest.raises(DatasetParseError, match="no samples"):
		load(filename)


def test_curve_round_trip(tmp_pathplus: PathPlus, small_dataset: Dataset):
	curve = small_dataset.samples[7].curve
	filename = save_curve(curve, tmp_pathplus / "curve.csv")

	lines = _read(filename)
	assert lines[0] == "f_GHz,r_dB"
	assert lines[1].startswith("2.0,")
	assert len(lines) == 58

	loaded = load_curve(filename)
	assert loaded.grid == curve.grid
	assert_allclose(loaded.values, curve.values, rtol=0, atol=1e-6)


@pytest.mark.parametrize(
		"content, match",
		[
				pytest.param("freq,value\n1.0,-3.0\n2.0,-4.0\n", "line 1: malformed header", id="header"),
				pytest.param("f_GHz,r_dB\n1.0,-3.0\n", "a curve needs at least two points", id="one_point"),
				pytest.param("f_GHz,r_dB\n1.0,-3.0\n2.0\n", "line 3: expected 2 columns, got 1", id="short_row"),
				pytest.param("f_GHz,r_dB\n1.0,-3.0\n2.0,spam\n", "line 3: non-numeric value 'spam'", id="text"),
				pytest.param(
						"f_GHz,r_dB\n1.0,-3.0\n1.5,-4.0\n2.2,-5.0\n2.5,-5.0\n",
						"line 4: frequency 2.2 breaks the 0.5 GHz spacing",
						id="uneven",
						),
				pytest.param(
						"f_GHz,r_dB\n1.0,-3.0\n1.5,-4.0\n2.5,-5.0\n",
						"line 2: frequencies do not form an even grid",
						id="missing_point",
						),
				]
		)
def test_load_curve_errors(tmp_pathplus: PathPlus, content: str, match: str):
	(tmp_pathplus / "curve.csv").write_text(content)

	with pytest.raises(DatasetParseError, match=match):
		load_curve(tmp_pathplus / "curve.csv")


def test_quantize_curve(coarse_grid: FrequencyGrid):
	curve = reflection_curve(UnitCellGeometry(5.0, 3.5, 1.4, 4.0, 2.0), StackSpec(), coarse_grid)
	quantized = quantize_curve(curve)

	assert_allclose(quantized.values, curve.values, rtol=0, atol=5.01e-7)
	assert quantize_curve(quantized) == quantized
	assert [f"{value:.6f}" for value in quantized.values] == [f"{value:.6f}" for value in curve.values]


def test_generated_curves_are_quantized(small_dataset: Dataset):
	for sample in small_dataset.samples[:10]:
		assert quantize_curve(sample.curve) == sample.curve
