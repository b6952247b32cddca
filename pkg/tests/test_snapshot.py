import pytest

from yieldtrack.errors import DataError
from yieldtrack.snapshot import create_snapshot, load_snapshot


def test_round_trip(snapshot):
    loaded = load_snapshot(snapshot.root)
    assert len(loaded.registry) == len(snapshot.registry)
    assert loaded.table.ids() == snapshot.table.ids()
    vid = snapshot.table.ids()[0]
    assert loaded.table.get(vid).points == snapshot.table.get(vid).points


def test_reingest_byte_identical(tmp_path, synth_raw_dir):
    kwargs = dict(
        villages_path=synth_raw_dir / "villages.csv",
        yields_path=synth_raw_dir / "yields.csv",
        aez_path=synth_raw_dir / "aez.csv",
    )
    a = tmp_path / "a"
    b = tmp_path / "b"
    create_snapshot(a, **kwargs)
    create_snapshot(b, **kwargs)
    for name in ("villages.csv", "aez.csv", "yields.csv", "annual.csv",
                 "quality.json", "meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_load_rejects_non_snapshot(tmp_path):
    with pytest.raises(DataError, match="meta.json"):
        load_snapshot(tmp_path)


def test_annual_table_matches_weighted_aggregation(snapshot):
    # spot check: the annual value for a two-season year is the area-weighted
    # mean of the seasonal rows stored alongside it
    import csv

    rows = {}
    with open(snapshot.root / "yields.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["village_id"], int(row["year"]))
            rows.setdefault(key, []).append(row)
    vid = snapshot.table.ids()[0]
    point = snapshot.table.get(vid).points[0]
    seasonal = rows[(vid, point.year)]
    num = sum(float(r["yield_kg_ha"]) * float(r["maize_area_ha"]) for r in seasonal)
    den = sum(float(r["maize_area_ha"]) for r in seasonal)
    assert point.value == pytest.approx(num / den, rel=1e-12)
