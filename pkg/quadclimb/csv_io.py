"""CSV time-series logs for plans and controller runs."""

from pathlib import Path
from typing import List, Optional

import pandas as pd
from rich.console import Console

from .config import LIMB_IDS
from .planners import PhasePlan

PLAN_COLUMNS: List[str] = ["t", "phase", "body_x", "body_y", "body_z"] + [
    f"{limb}_{suffix}" for limb in LIMB_IDS for suffix in ("x", "y", "z", "contact")
]
FORCE_COLUMNS: List[str] = ["t", "f_ref", "f_meas", "offset_m", "command_m_s"]


class LogWriter:
    """Writes and reads the plot-ready CSV logs."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def write_plan(self, plan: PhasePlan, path: Path, dt: float = 0.1) -> pd.DataFrame:
        frame = plan.sample(dt)
        if frame.empty:
            frame = pd.DataFrame(columns=PLAN_COLUMNS)
        self._write(frame, path)
        return frame

    def write_frame(self, frame: pd.DataFrame, path: Path) -> None:
        self._write(frame, path)

    def read(self, path: Path, required_columns: Optional[List[str]] = None) -> pd.DataFrame:
        if not path.exists():
            raise FileNotFoundError(f"Log file not found: {path}")
        try:
            df = pd.read_csv(path, encoding="utf-8")
        except Exception as e:
            raise ValueError(f"Failed to read log file: {e}")
        if required_columns:
            self.validate_required_columns(df, required_columns)
        return df

    def validate_required_columns(self, df: pd.DataFrame, required_columns: List[str]) -> None:
        missing = [col for col in required_columns if col not in df.columns]
        if missing:
            raise ValueError(f"Missing required columns: {missing}. Available columns: {list(df.columns)}")

    def _write(self, frame: pd.DataFrame, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, encoding="utf-8")
        self.console.print(f"[green]Wrote {len(frame)} rows to {path}[/green]")
