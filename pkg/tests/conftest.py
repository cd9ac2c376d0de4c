# 3rd party
import dom_toml
import pytest

# this package
from rasdesign.config import GridParser, SweepParser, TrainingParser
from rasdesign.dataset import Dataset, generate
from rasdesign.em_forward import FrequencyGrid, StackSpec
from rasdesign.geometry import SweepTable
from rasdesign.pipeline import PipelineConfig, TrainedModel, train_case1
from tests.example_configs import COARSE_GRID, FAST_TRAINING, SMALL_SWEEP

pytest_plugins = ("coincidence", )


@pytest.fixture(scope="session")
def small_table() -> SweepTable:
	return SweepParser().build(dom_toml.loads(SMALL_SWEEP)["sweep"])


@pytest.fixture(scope="session")
def coarse_grid() -> FrequencyGrid:
	return GridParser().build(dom_toml.loads(COARSE_GRID)["grid"])


@pytest.fixture(scope="session")
def fast_config() -> PipelineConfig:
	return TrainingParser().build(dom_toml.loads(FAST_TRAINING)["training"])


@pytest.fixture(scope="session")
def small_dataset(small_table: SweepTable, coarse_grid: FrequencyGrid) -> Dataset:
	return generate(small_table, StackSpec(), coarse_grid, seed=3)


@pytest.fixture(scope="session")
def small_model(small_dataset: Dataset, fast_config: PipelineConfig) -> TrainedModel:
	return train_case1(small_dataset, fast_config)
