"""Batch command-line front-end for reproducible runs.

Exit codes: 0 success, 1 data error, 2 usage error. All outputs are
deterministic for fixed inputs and seeds: no timestamps, locale-independent
formatting, rows in sorted village order.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .bootstrap import (
    bootstrap_aggregate_error,
    convergence_curve,
    gaussian_residual_pool,
    load_residuals_csv,
)
from .equality import assign_cohorts, cohort_mean_series, inequality_series
from .errors import YieldTrackError
from .export import (
    export_map,
    scenario_map_rows,
    simplify_boundaries,
    write_ceiling_csv,
    write_cohort_means_csv,
    write_convergence_csv,
    write_inequality_csv,
    write_scenario_csv,
    write_trajectory_csv,
    write_trend_csv,
)
from .feasibility import compute_ceilings
from .pipeline import build_run, evaluate_scenario
from .scenario import EngineConfig, ScenarioSpec, resolve_kind
from .snapshot import create_snapshot, load_snapshot
from .synth import SynthParams, generate_dataset
from .trend import Band, national_trajectory, track_statuses

DATA_OPTION = click.option(
    "--data", "data_dir", envvar="YIELDTRACK_DATA", required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Snapshot directory (or set YIELDTRACK_DATA).",
)


def _config(band, from_year, to_year, include_preliminary, fao_baseline,
            cohort_year=2019) -> EngineConfig:
    return EngineConfig(
        band=Band(band),
        window=(from_year, to_year),
        include_preliminary=include_preliminary,
        fao_baseline=fao_baseline,
        cohort_year=cohort_year,
    )


def _parse_breaks(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise click.UsageError(f"bad --breaks value {text!r}") from None
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise click.UsageError("--breaks must be ascending, e.g. 1.0,1.5,2.0")
    return values


@click.group()
@click.version_option(version=__version__, prog_name="yieldtrack")
def main():
    """Village yield trends, inequality cohorts, and SDG 2.3 scenarios."""


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--villages", "n_villages", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--aez", "n_aez", default=8, show_default=True, type=int)
@click.option("--slope-mean", default=30.0, show_default=True, type=float)
@click.option("--slope-sd", default=55.0, show_default=True, type=float)
@click.option("--noise-sd", default=60.0, show_default=True, type=float)
@click.option("--pixels-per-village", default=0, show_default=True, type=int,
              help="Mean pixel count per village; 0 skips the pixel file.")
def synth(out_dir, n_villages, seed, n_aez, slope_mean, slope_sd, noise_sd,
          pixels_per_village):
    """Generate a synthetic raw dataset (villages, yields, AEZs, boundaries)."""
    try:
        params = SynthParams(
            n_villages=n_villages, seed=seed, n_aez=n_aez,
            slope_mean=slope_mean, slope_sd=slope_sd, noise_sd=noise_sd,
            pixels_per_village=pixels_per_village,
        )
        summary = generate_dataset(out_dir, params)
    except (YieldTrackError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.option("--villages", "villages_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--yields", "yields_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--aez", "aez_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pixels", "pixels_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--boundaries", "boundaries_path",
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def ingest(villages_path, yields_path, aez_path, pixels_path, boundaries_path,
           out_dir):
    """Validate raw inputs and build a snapshot directory."""
    try:
        snapshot = create_snapshot(
            out_dir, villages_path, yields_path, aez_path,
            pixels_path=pixels_path, boundaries_path=boundaries_path,
        )
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(
        {"snapshot": str(snapshot.root), "quality": snapshot.quality_counts},
        sort_keys=True,
    ))


@main.command()
@DATA_OPTION
@click.option("--from", "from_year", default=2019, show_default=True, type=int)
@click.option("--to", "to_year", default=2023, show_default=True, type=int)
@click.option("--include-preliminary", is_flag=True)
@click.option("--band", default="mean", show_default=True,
              type=click.Choice(["mean", "lower", "upper"]))
@click.option("--fao-baseline", default=1531.5, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--trajectory-out", type=click.Path(dir_okay=False),
              help="Also write the national trajectory CSV.")
def trend(data_dir, from_year, to_year, include_preliminary, band, fao_baseline,
          out_path, trajectory_out):
    """Fit per-village trends and export slopes, projections, and status."""
    try:
        snapshot = load_snapshot(data_dir)
        config = _config(band, from_year, to_year, include_preliminary, fao_baseline)
        run = build_run(snapshot.table, config)
        statuses = track_statuses(
            run.models, config.baseline_year, config.end_year,
            config.band, config.confidence,
        )
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            write_trend_csv(fh, run.models, statuses, config.baseline_year,
                            config.end_year, config.band, config.confidence)
        if trajectory_out:
            traj = national_trajectory(
                snapshot.table, fao_baseline,
                config.baseline_year, config.end_year,
                area_weighted=config.area_weighted_national_mean,
            )
            with open(trajectory_out, "w", newline="", encoding="utf-8") as fh:
                write_trajectory_csv(fh, traj)
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc
    excluded = run.fit_report.counts()["villages_without_trend"]
    click.echo(json.dumps(
        {"villages": run.n_villages, "excluded": excluded, "out": out_path},
        sort_keys=True,
    ))


@main.command()
@DATA_OPTION
@click.option("--cohort-year", default=2019, show_default=True, type=int)
@click.option("--means-out", required=True, type=click.Path(dir_okay=False))
@click.option("--ratios-out", required=True, type=click.Path(dir_okay=False))
def equality(data_dir, cohort_year, means_out, ratios_out):
    """Export decile-cohort mean yields and the inequality ratio series."""
    try:
        snapshot = load_snapshot(data_dir)
        values = snapshot.table.values_at(cohort_year)
        assignment = assign_cohorts(values, cohort_year)
        years = snapshot.table.years()
        series = cohort_mean_series(assignment, snapshot.table, years)
        ratios = inequality_series(assignment, snapshot.table, years)
        with open(means_out, "w", newline="", encoding="utf-8") as fh:
            write_cohort_means_csv(fh, series)
        with open(ratios_out, "w", newline="", encoding="utf-8") as fh:
            write_inequality_csv(fh, ratios)
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(
        {"cohort_year": cohort_year, "years": len(years)}, sort_keys=True
    ))


_KIND_CHOICES = [f"sc{i}" for i in range(1, 8)] + ["custom-uniform", "custom-target"]


@main.command()
@DATA_OPTION
@click.option("--kind", required=True, type=click.Choice(_KIND_CHOICES))
@click.option("--band", default="mean", show_default=True,
              type=click.Choice(["mean", "lower", "upper"]))
@click.option("--aez-cap", is_flag=True, help="Censor projections at AEZ ceilings.")
@click.option("--g", type=float, help="Uniform growth rate for custom-uniform.")
@click.option("--target", type=float, help="Common 2030 yield for custom-target.")
@click.option("--from", "from_year", default=2019, show_default=True, type=int)
@click.option("--to", "to_year", default=2023, show_default=True, type=int)
@click.option("--include-preliminary", is_flag=True)
@click.option("--fao-baseline", default=1531.5, show_default=True, type=float)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Outcome JSON path (default stdout).")
@click.option("--per-village", "per_village_path", type=click.Path(dir_okay=False))
@click.option("--ceilings-out", type=click.Path(dir_okay=False))
def scenario(data_dir, kind, band, aez_cap, g, target, from_year, to_year,
             include_preliminary, fao_baseline, out_path, per_village_path,
             ceilings_out):
    """Evaluate a policy scenario and export its outcome metrics."""
    if kind == "custom-uniform" and g is None:
        raise click.UsageError("--kind custom-uniform requires --g")
    if kind == "custom-target" and target is None:
        raise click.UsageError("--kind custom-target requires --target")
    try:
        snapshot = load_snapshot(data_dir)
        config = _config(band, from_year, to_year, include_preliminary, fao_baseline)
        spec = ScenarioSpec(
            kind=resolve_kind(kind), config=config, aez_cap=aez_cap,
            uniform_growth=g, target=target,
        )
        run = build_run(snapshot.table, config)
        outcome = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
        doc = json.dumps(outcome.to_json_dict(), sort_keys=True, indent=2) + "\n"
        if out_path:
            Path(out_path).write_text(doc, encoding="utf-8")
        else:
            click.echo(doc, nl=False)
        if per_village_path:
            with open(per_village_path, "w", newline="", encoding="utf-8") as fh:
                write_scenario_csv(fh, outcome)
        if ceilings_out:
            ceilings = compute_ceilings(snapshot.table, snapshot.registry,
                                        config.window)
            with open(ceilings_out, "w", newline="", encoding="utf-8") as fh:
                write_ceiling_csv(fh, ceilings)
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--residuals", "residuals_path",
              type=click.Path(exists=True, dir_okay=False),
              help="CSV with a residual_kg_ha column.")
@click.option("--sigma", type=float,
              help="Synthesize Gaussian(0, sigma) residuals instead.")
@click.option("--pool-size", default=1153, show_default=True, type=int)
@click.option("--n", "draw_size", default=1153, show_default=True, type=int)
@click.option("--replicates", default=2000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
@click.option("--curve-out", type=click.Path(dir_okay=False))
@click.option("--max-n", type=int, help="Curve length (default: pool size).")
@click.option("--tolerance", default=40.0, show_default=True, type=float)
def bootstrap(residuals_path, sigma, pool_size, draw_size, replicates, seed,
              out_path, curve_out, max_n, tolerance):
    """Bootstrap aggregate pixel error and running-mean convergence."""
    if (residuals_path is None) == (sigma is None):
        raise click.UsageError("provide exactly one of --residuals or --sigma")
    try:
        if residuals_path is not None:
            pool = load_residuals_csv(residuals_path)
        else:
            pool = gaussian_residual_pool(sigma, pool_size, seed)
        result = bootstrap_aggregate_error(pool, draw_size, replicates, seed)
        doc = dict(result.to_json_dict())
        if curve_out:
            curve = convergence_curve(pool, max_n, tolerance, seed)
            with open(curve_out, "w", newline="", encoding="utf-8") as fh:
                write_convergence_csv(fh, curve)
            doc["n_star"] = curve.n_star
            doc["converged"] = curve.converged
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        if out_path:
            Path(out_path).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)
    except (YieldTrackError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("export-map")
@DATA_OPTION
@click.option("--scenario", "kind", required=True, type=click.Choice(_KIND_CHOICES))
@click.option("--band", default="mean", show_default=True,
              type=click.Choice(["mean", "lower", "upper"]))
@click.option("--aez-cap", is_flag=True)
@click.option("--g", type=float)
@click.option("--target", type=float)
@click.option("--boundaries", "boundaries_path",
              type=click.Path(exists=True, dir_okay=False),
              help="GeoJSON boundaries (default: snapshot boundaries.geojson).")
@click.option("--breaks", default="1.0,1.5,2.0", show_default=True)
@click.option("--simplify", default=0.0, show_default=True, type=float,
              help="Vertex-thinning tolerance in degrees (0 keeps geometry).")
@click.option("--fao-baseline", default=1531.5, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def export_map_cmd(data_dir, kind, band, aez_cap, g, target, boundaries_path,
                   breaks, simplify, fao_baseline, out_path):
    """Export a scenario's doubling-ratio choropleth as GeoJSON."""
    break_values = _parse_breaks(breaks)
    if simplify < 0:
        raise click.UsageError("--simplify must be >= 0")
    try:
        snapshot = load_snapshot(data_dir)
        path = Path(boundaries_path) if boundaries_path else snapshot.boundaries_path()
        if path is None:
            raise click.ClickException(
                "no boundaries available: pass --boundaries or ingest with one"
            )
        with open(path, encoding="utf-8") as fh:
            boundaries = json.load(fh)
        if simplify > 0:
            boundaries = simplify_boundaries(boundaries, simplify)
        config = _config(band, 2019, 2023, False, fao_baseline)
        spec = ScenarioSpec(kind=resolve_kind(kind), config=config,
                            aez_cap=aez_cap, uniform_growth=g, target=target)
        run = build_run(snapshot.table, config)
        outcome = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
        collection = export_map(scenario_map_rows(outcome), boundaries, break_values)
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(collection, fh, sort_keys=True)
            fh.write("\n")
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(
        {"features": len(collection["features"]), "out": out_path}, sort_keys=True
    ))


@main.command()
@click.option(
    "--data", "--data-dir", "data_dir", envvar="YIELDTRACK_DATA", required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Snapshot directory (or set YIELDTRACK_DATA).",
)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--band", default="mean", show_default=True,
              type=click.Choice(["mean", "lower", "upper"]))
@click.option("--from", "from_year", default=2019, show_default=True, type=int)
@click.option("--to", "to_year", default=2023, show_default=True, type=int)
@click.option("--include-preliminary", is_flag=True)
@click.option("--fao-baseline", default=1531.5, show_default=True, type=float)
@click.option("--breaks", default="1.0,1.5,2.0", show_default=True)
@click.option("--boundaries", "boundaries_path",
              type=click.Path(exists=True, dir_okay=False))
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False),
              help="Static UI bundle to serve under /.")
def serve(data_dir, port, host, band, from_year, to_year, include_preliminary,
          fao_baseline, breaks, boundaries_path, ui_dir):
    """Serve the JSON API (and the UI bundle, when provided)."""
    import uvicorn

    from .service import build_service

    break_values = _parse_breaks(breaks)
    try:
        app = build_service(
            data_dir, band=band, fao_baseline=fao_baseline,
            window=(from_year, to_year),
            include_preliminary=include_preliminary,
            breaks=break_values, boundaries_path=boundaries_path,
            ui_dir=ui_dir,
        )
    except YieldTrackError as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
