import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from yieldtrack.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, runner):
    """synth -> ingest once for the whole module."""
    root = tmp_path_factory.mktemp("cli")
    raw = root / "raw"
    snap = root / "snap"
    result = runner.invoke(main, [
        "synth", "--out", str(raw), "--villages", "40", "--seed", "5",
        "--pixels-per-village", "30",
    ])
    assert result.exit_code == 0, result.output
    result = runner.invoke(main, [
        "ingest",
        "--villages", str(raw / "villages.csv"),
        "--yields", str(raw / "yields.csv"),
        "--aez", str(raw / "aez.csv"),
        "--pixels", str(raw / "pixels.bin"),
        "--boundaries", str(raw / "boundaries.geojson"),
        "--out", str(snap),
    ])
    assert result.exit_code == 0, result.output
    return root


class TestSynthIngest:
    def test_snapshot_files_present(self, workdir):
        snap = workdir / "snap"
        for name in ("villages.csv", "aez.csv", "yields.csv", "annual.csv",
                     "quality.json", "meta.json", "zonal.csv",
                     "boundaries.geojson"):
            assert (snap / name).exists(), name

    def test_meta_counts(self, workdir):
        meta = json.loads((workdir / "snap" / "meta.json").read_text())
        assert meta["villages"] == 40
        assert meta["years"] == [2019, 2024]

    def test_ingest_rejects_broken_yields(self, workdir, runner, tmp_path):
        raw = workdir / "raw"
        bad = tmp_path / "bad.csv"
        text = (raw / "yields.csv").read_text().splitlines()
        text.append(text[1])  # duplicate a record
        bad.write_text("\n".join(text) + "\n")
        result = runner.invoke(main, [
            "ingest", "--villages", str(raw / "villages.csv"),
            "--yields", str(bad), "--aez", str(raw / "aez.csv"),
            "--out", str(tmp_path / "snap"),
        ])
        assert result.exit_code == 1
        assert "duplicate" in result.output


class TestTrendCommand:
    def test_writes_trend_and_trajectory(self, workdir, runner, tmp_path):
        out = tmp_path / "trend.csv"
        traj = tmp_path / "traj.csv"
        result = runner.invoke(main, [
            "trend", "--data", str(workdir / "snap"),
            "--out", str(out), "--trajectory-out", str(traj),
        ])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "village_id,slope,y2015,y2030,ratio,on_track,band,flagged"
        assert len(lines) == 41
        assert traj.read_text().splitlines()[0] == "year,national_mean,sdg_line,preliminary"

    def test_two_year_window_fails_with_message(self, runner, tmp_path):
        raw = tmp_path / "raw2"
        snap = tmp_path / "snap2"
        r = runner.invoke(main, ["synth", "--out", str(raw), "--villages", "12",
                                 "--seed", "2"])
        assert r.exit_code == 0
        r = runner.invoke(main, [
            "ingest", "--villages", str(raw / "villages.csv"),
            "--yields", str(raw / "yields.csv"), "--aez", str(raw / "aez.csv"),
            "--out", str(snap),
        ])
        assert r.exit_code == 0
        result = runner.invoke(main, [
            "trend", "--data", str(snap), "--from", "2019", "--to", "2020",
            "--out", str(tmp_path / "t.csv"),
        ])
        assert result.exit_code == 1
        assert "insufficient points" in result.output


class TestEqualityCommand:
    def test_writes_both_csvs(self, workdir, runner, tmp_path):
        means = tmp_path / "decile_means.csv"
        ratios = tmp_path / "ratios.csv"
        result = runner.invoke(main, [
            "equality", "--data", str(workdir / "snap"),
            "--means-out", str(means), "--ratios-out", str(ratios),
        ])
        assert result.exit_code == 0, result.output
        assert means.read_text().splitlines()[0] == "year,decile,mean_yield"
        assert ratios.read_text().splitlines()[0] == "year,ratio,lo,hi,preliminary"


class TestScenarioCommand:
    def test_sc2_meets_goal(self, workdir, runner, tmp_path):
        out = tmp_path / "sc2.json"
        pv = tmp_path / "sc2.csv"
        result = runner.invoke(main, [
            "scenario", "--data", str(workdir / "snap"), "--kind", "sc2",
            "--out", str(out), "--per-village", str(pv),
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["natl_progress_pct"] == pytest.approx(100.0, abs=1e-9)
        assert doc["additional_years"] == 0.0
        assert pv.read_text().splitlines()[0] == (
            "village_id,y2015,y2024,growth,y2030,ratio,on_track"
        )

    def test_stdout_json(self, workdir, runner):
        result = runner.invoke(main, [
            "scenario", "--data", str(workdir / "snap"), "--kind", "sc5",
        ])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["equality_ratio"] == 1.0

    def test_aez_cap_with_ceilings_export(self, workdir, runner, tmp_path):
        out = tmp_path / "capped.json"
        ceilings = tmp_path / "ceilings.csv"
        result = runner.invoke(main, [
            "scenario", "--data", str(workdir / "snap"), "--kind", "sc3",
            "--aez-cap", "--out", str(out), "--ceilings-out", str(ceilings),
        ])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["capped"] is True
        lines = ceilings.read_text().splitlines()
        assert lines[0] == "aez_id,ceiling_kg_ha,window_first,window_last"
        assert len(lines) == 9  # 8 zones

    def test_custom_uniform_requires_g(self, workdir, runner):
        result = runner.invoke(main, [
            "scenario", "--data", str(workdir / "snap"), "--kind", "custom-uniform",
        ])
        assert result.exit_code == 2
        assert "--g" in result.output

    def test_unknown_kind_usage_error(self, workdir, runner):
        result = runner.invoke(main, [
            "scenario", "--data", str(workdir / "snap"), "--kind", "sc9",
        ])
        assert result.exit_code == 2


class TestBootstrapCommand:
    def test_synthesized_pool(self, runner, tmp_path):
        out = tmp_path / "boot.json"
        curve = tmp_path / "curve.csv"
        result = runner.invoke(main, [
            "bootstrap", "--sigma", "700", "--pool-size", "1153",
            "--n", "1153", "--replicates", "300", "--seed", "9",
            "--out", str(out), "--curve-out", str(curve), "--tolerance", "40",
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert set(doc) >= {"n", "replicates", "mean_abs_error", "lo", "hi",
                            "stdev", "n_star"}
        assert doc["n"] == 1153
        assert curve.read_text().splitlines()[0] == "n,running_mean"

    def test_requires_exactly_one_source(self, runner):
        result = runner.invoke(main, ["bootstrap"])
        assert result.exit_code == 2
        result = runner.invoke(main, [
            "bootstrap", "--sigma", "1", "--residuals", "nope.csv",
        ])
        assert result.exit_code == 2


class TestExportMapCommand:
    def test_geojson_written(self, workdir, runner, tmp_path):
        out = tmp_path / "map.geojson"
        result = runner.invoke(main, [
            "export-map", "--data", str(workdir / "snap"), "--scenario", "sc1",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        fc = json.loads(out.read_text())
        assert fc["type"] == "FeatureCollection"
        assert len(fc["features"]) == 40

    def test_bad_breaks_usage_error(self, workdir, runner, tmp_path):
        result = runner.invoke(main, [
            "export-map", "--data", str(workdir / "snap"), "--scenario", "sc1",
            "--breaks", "2.0,1.0", "--out", str(tmp_path / "m.json"),
        ])
        assert result.exit_code == 2


class TestUsageErrors:
    def test_unknown_command(self, runner):
        assert runner.invoke(main, ["frobnicate"]).exit_code == 2

    def test_unknown_flag(self, runner):
        assert runner.invoke(main, ["synth", "--shape", "oval"]).exit_code == 2

    def test_missing_data_dir(self, runner):
        result = runner.invoke(main, ["trend", "--out", "x.csv"], env={})
        assert result.exit_code == 2


def run_full_pipeline(runner, root: Path, seed: int) -> dict[str, bytes]:
    raw = root / "raw"
    snap = root / "snap"
    art = root / "artifacts"
    art.mkdir()
    steps = [
        ["synth", "--out", str(raw), "--villages", "35", "--seed", str(seed),
         "--pixels-per-village", "25"],
        ["ingest", "--villages", str(raw / "villages.csv"),
         "--yields", str(raw / "yields.csv"), "--aez", str(raw / "aez.csv"),
         "--pixels", str(raw / "pixels.bin"),
         "--boundaries", str(raw / "boundaries.geojson"), "--out", str(snap)],
        ["trend", "--data", str(snap), "--out", str(art / "trend.csv"),
         "--trajectory-out", str(art / "traj.csv")],
        ["equality", "--data", str(snap), "--means-out", str(art / "means.csv"),
         "--ratios-out", str(art / "ratios.csv")],
        ["scenario", "--data", str(snap), "--kind", "sc1",
         "--out", str(art / "sc1.json"), "--per-village", str(art / "sc1.csv")],
        ["scenario", "--data", str(snap), "--kind", "sc2", "--aez-cap",
         "--out", str(art / "sc2capped.json")],
        ["bootstrap", "--sigma", "700", "--pool-size", "600", "--n", "600",
         "--replicates", "200", "--seed", "3", "--out", str(art / "boot.json"),
         "--curve-out", str(art / "curve.csv")],
        ["export-map", "--data", str(snap), "--scenario", "sc1",
         "--out", str(art / "map.geojson")],
    ]
    for step in steps:
        result = runner.invoke(main, step)
        assert result.exit_code == 0, f"{step}: {result.output}"
    out = {}
    for base in (raw, snap, art):
        for path in sorted(base.rglob("*")):
            if path.is_file():
                out[str(path.relative_to(root))] = path.read_bytes()
    return out


def test_pipeline_byte_identical_across_runs(runner, tmp_path):
    a = tmp_path / "run_a"
    b = tmp_path / "run_b"
    a.mkdir()
    b.mkdir()
    files_a = run_full_pipeline(runner, a, seed=17)
    files_b = run_full_pipeline(runner, b, seed=17)
    assert files_a.keys() == files_b.keys()
    for name in files_a:
        assert files_a[name] == files_b[name], f"{name} differs between runs"
