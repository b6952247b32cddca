import pytest

from yieldtrack.pipeline import build_run
from yieldtrack.scenario import EngineConfig
from yieldtrack.snapshot import create_snapshot
from yieldtrack.synth import SynthParams, generate_dataset


@pytest.fixture(scope="session")
def synth_raw_dir(tmp_path_factory):
    """Raw synthetic dataset: 60 villages, 2019-2024, with boundaries."""
    out = tmp_path_factory.mktemp("synth_raw")
    generate_dataset(out, SynthParams(n_villages=60, seed=11))
    return out


@pytest.fixture(scope="session")
def snapshot(tmp_path_factory, synth_raw_dir):
    out = tmp_path_factory.mktemp("snapshot")
    return create_snapshot(
        out,
        synth_raw_dir / "villages.csv",
        synth_raw_dir / "yields.csv",
        synth_raw_dir / "aez.csv",
        boundaries_path=synth_raw_dir / "boundaries.geojson",
    )


@pytest.fixture(scope="session")
def mean_run(snapshot):
    return build_run(snapshot.table, EngineConfig())
