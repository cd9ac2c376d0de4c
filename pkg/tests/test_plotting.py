# 3rd party
import pytest
from domdf_python_tools.paths import PathPlus

# this package
from rasdesign.dataset import Dataset
from rasdesign.neuralnet import EpochRecord, TrainHistory
from rasdesign.pipeline import TrainedModel, round_trip_validate
from rasdesign.plotting import history_svg, plot_histories, plot_sample, sample_svg

pytest.importorskip("matplotlib")


def test_sample_svg(small_model: TrainedModel, small_dataset: Dataset, tmp_pathplus: PathPlus):
	report = round_trip_validate(small_model, small_dataset.samples[:1])
	svg = sample_svg(report.results[0], title="Sample 1")

	assert svg.lstrip().startswith("<?xml")
	assert "</svg>" in svg

	written = plot_sample(report.results[0], tmp_pathplus / "sample_1.svg")
	assert written.read_text().rstrip().endswith("</svg>")


def test_history_svg(tmp_pathplus: PathPlus):
	histories = {
			2: TrainHistory([EpochRecord(1, 0.5, 0.4, 0.1), EpochRecord(2, 0.25, 0.3, 0.5)], best_epoch=2),
			4: TrainHistory([EpochRecord(1, 0.4, 0.35, 0.2)], best_epoch=1),
			}

	assert "</svg>" in history_svg(histories)
	assert plot_histories(histories, tmp_pathplus / "study.svg").is_file()
