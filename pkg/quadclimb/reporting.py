"""Console tables and the markdown comparison report."""

from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .mapping import SparseMap
from .planners import REFERENCE_TABLE, ReferenceRow
from .scenarios import Environment, RunReport

GROUND = "ground"
CLIMBING = "climbing"


def report_group(report: RunReport) -> str:
    return GROUND if Environment(report.environment).walking else CLIMBING


def _fmt(value: Optional[float], digits: int = 3) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


def _pass_cell(report: RunReport) -> str:
    if report.passed is None:
        return ""
    return "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"


class Reporter:
    """Prints run results and writes the comparison report."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def print_runs(self, reports: Sequence[RunReport]) -> None:
        table = Table(title="SCENARIO RESULTS", show_header=True, header_style="bold magenta")
        table.add_column("Scenario", style="cyan", no_wrap=True)
        table.add_column("Environment")
        table.add_column("Speed", justify="right", style="green")
        table.add_column("Norm. speed", justify="right")
        table.add_column("Payload kg", justify="right")
        table.add_column("Norm. payload", justify="right")
        table.add_column("Feasible", justify="center")
        table.add_column("Runtime s", justify="right")
        table.add_column("Result", justify="center")
        for report in reports:
            m = report.metrics
            ground = report_group(report) == GROUND
            speed = m.get("speed_m_s") if ground else m.get("speed_m_per_min")
            norm = m.get("normalized_speed_per_s") if ground else m.get("normalized_speed_per_min")
            unit, norm_unit = ("m/s", "/s") if ground else ("m/min", "/min")
            table.add_row(
                report.scenario,
                report.environment,
                f"{_fmt(speed)} {unit}" if speed is not None else "-",
                f"{_fmt(norm)} {norm_unit}" if norm is not None else "-",
                _fmt(report.payload_kg),
                _fmt(m.get("normalized_payload")),
                {1.0: "yes", 0.0: "[red]no[/red]"}.get(m.get("feasible"), "-"),
                f"{report.runtime_s:.1f}",
                _pass_cell(report),
            )
        self.console.print(table)

        failures = [r for r in reports if r.errors or any(not e.passed for e in r.expectations)]
        if failures:
            self.console.print(f"\n[red]{len(failures)} scenario(s) did not pass:[/red]")
            error_table = Table(show_header=True, header_style="bold red")
            error_table.add_column("Scenario", style="yellow")
            error_table.add_column("Problem", style="red")
            for report in failures:
                for error in report.errors:
                    error_table.add_row(report.scenario, error[:100])
                for result in report.expectations:
                    if not result.passed:
                        error_table.add_row(report.scenario, f"{result.metric} = {_fmt(result.value)} outside {result.expected}")
            self.console.print(error_table)

    def comparison_rows(self, reports: Sequence[RunReport]) -> List[List[str]]:
        """Simulated rows next to the stored reference rows, grouped ground then climbing."""
        rows: List[List[str]] = []
        for group in (GROUND, CLIMBING):
            runs = [r for r in reports if report_group(r) == group]
            if not runs:
                continue
            for report in runs:
                m = report.metrics
                ground = group == GROUND
                rows.append(
                    [
                        group,
                        report.scenario,
                        _fmt(m.get("speed_m_s") if ground else m.get("speed_m_per_min")),
                        "m/s" if ground else "m/min",
                        _fmt(m.get("normalized_speed_per_s") if ground else m.get("normalized_speed_per_min")),
                        _fmt(report.payload_kg),
                        _fmt(m.get("normalized_payload")),
                        _fmt(m.get("normalized_workload")),
                        "" if report.passed is None else ("pass" if report.passed else "fail"),
                    ]
                )
            for ref in self._references(group):
                rows.append(
                    [
                        group,
                        f"{ref.robot} (reference)",
                        _fmt(ref.speed),
                        ref.speed_unit,
                        _fmt(ref.normalized_speed),
                        _fmt(ref.payload_kg),
                        _fmt(ref.normalized_payload),
                        _fmt(ref.normalized_workload),
                        "",
                    ]
                )
        return rows

    @staticmethod
    def _references(group: str) -> List[ReferenceRow]:
        wanted = "ground" if group == GROUND else "wall"
        return [row for row in REFERENCE_TABLE if row.environment == wanted]

    def print_comparison(self, reports: Sequence[RunReport]) -> None:
        table = Table(title="PERFORMANCE COMPARISON", show_header=True, header_style="bold magenta")
        for column in ("Group", "Robot / run", "Speed", "Unit", "Norm. speed", "Payload kg", "Norm. payload", "Workload", "Result"):
            table.add_column(column)
        for row in self.comparison_rows(reports):
            table.add_row(*row)
        self.console.print(table)

    def print_map(self, sdm: SparseMap) -> None:
        table = Table(title=f"HOLD MAP ({len(sdm.holds)} holds)", show_header=True, header_style="bold magenta")
        table.add_column("Hold", style="cyan")
        table.add_column("Center m", justify="right")
        table.add_column("Semi-axes m", justify="right")
        table.add_column("Slope deg", justify="right")
        table.add_column("Obs.", justify="right")
        table.add_column("Spread m", justify="right")
        for hold_id in sorted(sdm.holds):
            hold = sdm.holds[hold_id]
            table.add_row(
                hold_id,
                ", ".join(f"{v:.3f}" for v in hold.center_m),
                ", ".join(f"{v:.3f}" for v in hold.semi_axes_m),
                f"{hold.surface_slope_deg:.1f}",
                str(hold.observations),
                f"{hold.centroid_variance_m:.4f}",
            )
        self.console.print(table)
        if sdm.planes:
            plane = sdm.planes[0]
            self.console.print(
                Panel.fit(
                    f"normal {tuple(round(v, 3) for v in plane.normal)}\noffset {plane.offset_m:.4f} m, rms {plane.rms_m:.4f} m",
                    title="Wall plane",
                    border_style="blue",
                )
            )

    def generate_markdown_report(self, reports: Sequence[RunReport], output_path: Path) -> None:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.build_markdown(reports), encoding="utf-8")
        self.console.print(f"[green]Report written to {output_path}[/green]")

    def build_markdown(self, reports: Sequence[RunReport]) -> str:
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        content = f"# Quadclimb Scenario Report\n\n**Generated:** {timestamp}\n\n## Performance Comparison\n\n"
        content += "| Group | Robot / run | Speed | Unit | Norm. speed | Payload kg | Norm. payload | Workload | Result |\n"
        content += "|---|---|---|---|---|---|---|---|---|\n"
        for row in self.comparison_rows(reports):
            content += "| " + " | ".join(cell.replace("|", "\\|") for cell in row) + " |\n"

        walking = next((r for r in REFERENCE_TABLE if r.normalized_workload is not None), None)
        if walking is not None:
            product = walking.normalized_speed * walking.normalized_payload
            content += (
                f"\nThe published walking workload is {walking.normalized_workload:.2f}; "
                f"normalized speed times normalized payload from the same row gives {product:.2f}.\n"
            )

        failing = [r for r in reports if r.passed is False]
        if failing:
            content += "\n## Failures\n\n"
            for report in failing:
                for error in report.errors:
                    content += f"- **{report.scenario}**: {error}\n"
                for result in report.expectations:
                    if not result.passed:
                        content += f"- **{report.scenario}**: {result.metric} = {_fmt(result.value)} outside {result.expected}\n"
        content += "\n---\n*Report generated by quadclimb*\n"
        return content
