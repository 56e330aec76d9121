"""Command line interface for the quadclimb simulation harness."""

import json
import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, TextColumn

from .config import QuadclimbSettings, RobotModel, load_settings, resolve_model, save_model
from .control import simulate_force_tracking, square_wave
from .csv_io import LogWriter
from .mapping import Hold, build_map, fuse_observation, hold_from_fit, inscribe_ellipsoid, load_map, read_point_sets, save_map
from .reporting import Reporter
from .scenarios import load_reports, load_scenario, load_stance, plan_scenario, run_scenarios, save_report, scenario_model, stance_capacity

app = typer.Typer(
    name="quadclimb",
    help="Quasi-static planning and simulation for a four-limbed free-climbing robot",
    rich_markup_mode="rich",
)
map_app = typer.Typer(help="Build, fuse and inspect sparse hold maps")
model_app = typer.Typer(help="Inspect the robot model")
app.add_typer(map_app, name="map")
app.add_typer(model_app, name="model")

console = Console()


def _setup(log_level: Optional[str] = None) -> QuadclimbSettings:
    settings = load_settings()
    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    return settings


def _model(settings: QuadclimbSettings, model_file: Optional[Path]) -> RobotModel:
    return resolve_model(settings, model_file)


@app.command()
def simulate(
    scenario_files: List[Path] = typer.Argument(..., help="Scenario JSON files"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the scenario seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory for reports"),
    fmt: str = typer.Option("json", "--format", help="Output format (json, csv)"),
    model_file: Optional[Path] = typer.Option(None, "--model", help="Robot model JSON"),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Run scenarios in parallel"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level"),
):
    """Run scenarios and report whether their expectations hold."""
    if fmt not in ["json", "csv"]:
        raise typer.BadParameter(f"Invalid format choice: {fmt}. Must be one of: json, csv")

    try:
        settings = _setup(log_level)
        model = _model(settings, model_file)
        out_dir = out or settings.output_dir
        scenarios = []
        for path in scenario_files:
            scenario = load_scenario(path)
            scenario = scenario.model_copy(update={"seed": seed if seed is not None else scenario.seed})
            scenarios.append(scenario)

        with Progress(TextColumn("{task.description}"), BarColumn(), TextColumn("{task.completed}/{task.total}"), console=console) as progress:
            task = progress.add_task("Running scenarios", total=len(scenarios))
            reports = run_scenarios(
                scenarios,
                jobs=jobs or settings.jobs,
                base_model=model,
                on_done=lambda _: progress.advance(task),
            )

        writer = LogWriter(console)
        for report in reports:
            save_report(report, out_dir)
        if fmt == "csv":
            for scenario in scenarios:
                plan, _ = plan_scenario(scenario, scenario_model(scenario, model))
                writer.write_plan(plan, out_dir / f"{scenario.name}.plan.csv")
            trace = simulate_force_tracking(model.control, square_wave(20.0, 5.0, 1.0), 3.0)
            writer.write_frame(trace, out_dir / "force_tracking.csv")

        reporter = Reporter(console)
        reporter.print_runs(reports)
    except Exception as e:
        console.print(f"[red]Simulation failed: {e}[/red]")
        raise typer.Exit(1)

    if any(r.passed is False for r in reports):
        raise typer.Exit(1)


@map_app.command("fit")
def map_fit(
    points_file: Path = typer.Argument(..., help="Hold points (JSON or x y z [label] text)"),
    out: Path = typer.Option(Path("out/map.json"), "--out", help="Map file to write"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level"),
):
    """Fit inscribed ellipsoids to segmented hold points."""
    try:
        settings = _setup(log_level)
        holds, wall = read_point_sets(points_file)
        sdm = build_map(holds, wall, solver=settings.solver)
        save_map(sdm, out)
        Reporter(console).print_map(sdm)
        console.print(f"[green]Map written to {out}[/green]")
    except Exception as e:
        console.print(f"[red]Map fit failed: {e}[/red]")
        raise typer.Exit(1)


@map_app.command("fuse")
def map_fuse(
    map_file: Path = typer.Argument(..., help="Existing map"),
    points_file: Path = typer.Argument(..., help="New observation points"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level"),
):
    """Fuse a new observation into an existing map, in place."""
    try:
        settings = _setup(log_level)
        sdm = load_map(map_file)
        holds, _ = read_point_sets(points_file)
        for hold_id, points in holds.items():
            observed: Hold = hold_from_fit(hold_id, inscribe_ellipsoid(points, solver=settings.solver), sdm.wall_normal)
            sdm = fuse_observation(sdm, observed, settings.association_radius_m)
        save_map(sdm, map_file)
        Reporter(console).print_map(sdm)
    except Exception as e:
        console.print(f"[red]Map fuse failed: {e}[/red]")
        raise typer.Exit(1)


@map_app.command("show")
def map_show(map_file: Path = typer.Argument(..., help="Map file")):
    """Print the holds of a map."""
    try:
        Reporter(console).print_map(load_map(map_file))
    except Exception as e:
        console.print(f"[red]Could not read map: {e}[/red]")
        raise typer.Exit(1)


@app.command()
def capacity(
    stance_file: Path = typer.Argument(..., help="Stance JSON"),
    model_file: Optional[Path] = typer.Option(None, "--model", help="Robot model JSON"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level"),
):
    """Largest payload a stance holds, at nominal and boosted grip."""
    try:
        settings = _setup(log_level)
        stance = load_stance(stance_file)
        result = stance_capacity(stance, _model(settings, model_file))
    except Exception as e:
        console.print(f"[red]Capacity search failed: {e}[/red]")
        raise typer.Exit(1)

    text = f"Max payload: [bold]{result.max_payload_kg:.2f} kg[/bold] at {result.nominal_preload_n:.1f} N preload"
    if result.boosted_max_payload_kg is not None:
        text += f"\nBoosted grip: {result.boosted_max_payload_kg:.2f} kg at {result.boosted_preload_n:.1f} N preload"
    console.print(Panel.fit(text, title=f"Capacity ({stance.wall_inclination_deg:g} deg)", border_style="blue"))


@app.command()
def report(run_dir: Path = typer.Argument(..., help="Directory of *.report.json files")):
    """Print the comparison table and write report.md."""
    reports = load_reports(run_dir)
    if not reports:
        console.print(f"[red]No reports found in {run_dir}[/red]")
        raise typer.Exit(1)
    reporter = Reporter(console)
    reporter.print_comparison(reports)
    reporter.generate_markdown_report(reports, run_dir / "report.md")


@model_app.command("show")
def model_show(model_file: Optional[Path] = typer.Option(None, "--model", help="Robot model JSON")):
    """Summarize the active robot model."""
    model = _model(load_settings(), model_file)
    console.print(
        Panel.fit(
            f"Configuration: {model.configuration}\n"
            f"Mass: {model.mass_kg:.1f} kg, body length {model.body_length_m:.2f} m\n"
            f"Four-bar stroke: {model.fourbar.stroke_m * 1000:.1f} mm\n"
            f"Nominal grip: {model.goat.nominal_fingertip_force_n:.0f} N\n"
            f"Geometry: {model.metadata.get('geometry', 'custom')}",
            title="Robot Model",
            border_style="blue",
        )
    )


@model_app.command("dump")
def model_dump(
    out: Path = typer.Option(Path("model.json"), "--out", help="Where to write the model"),
    configuration: str = typer.Option("climbing_6dof", "--configuration", help="walking_3dof or climbing_6dof"),
):
    """Write the default model as JSON for editing."""
    if configuration not in ["walking_3dof", "climbing_6dof"]:
        raise typer.BadParameter(f"Invalid configuration: {configuration}")
    model = resolve_model(load_settings()).with_configuration(configuration)
    save_model(model, out)
    console.print(f"[green]Model written to {out}[/green]")
    console.print_json(json.dumps({"configuration": model.configuration, "mass_kg": model.mass_kg}))


if __name__ == "__main__":
    app()
