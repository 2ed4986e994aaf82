"""File persistence for episode records, summaries and plot data."""

import json
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from core.exceptions import ConfigValidationError, NavigationError, ReplayError, to_navigation_error
from core.logging_config import get_logger
from core.models import EpisodeRecord


logger = get_logger("data_persistence")

SUMMARY_COLUMNS = ["planner", "m", "mean_rho", "std_rho", "eta", "success_rate", "mean_tplan", "std_tplan", "n"]
PLOT_METRICS = ["mean_rho", "eta", "success_rate", "mean_tplan"]
TRAJECTORY_COLUMNS = ["t", "x", "y", "heading", "reward"]


class ResultsStore:
    """
    Output directory of one sweep.

    raw.jsonl      one EpisodeRecord per line, appended as episodes finish
    summary.csv    one row per (planner, m)
    plot_<metric>.csv   metric pivoted to m rows by planner columns
    """

    RAW_FILE = "raw.jsonl"
    SUMMARY_FILE = "summary.csv"
    DETAILED_SUMMARY_FILE = "summary_detailed.csv"
    CONFIG_FILE = "config.json"

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise to_navigation_error(e) from e

    @property
    def raw_path(self) -> Path:
        return self.out_dir / self.RAW_FILE

    @property
    def summary_path(self) -> Path:
        return self.out_dir / self.SUMMARY_FILE

    def reset_raw(self):
        """Start a fresh raw file."""
        self.raw_path.write_text("")

    def append_record(self, record: EpisodeRecord):
        with open(self.raw_path, "a") as f:
            f.write(record.model_dump_json() + "\n")

    def write_records(self, records: Iterable[EpisodeRecord]) -> int:
        count = 0
        with open(self.raw_path, "w") as f:
            for record in records:
                f.write(record.model_dump_json() + "\n")
                count += 1
        logger.info(f"Wrote {count} records to {self.raw_path}")
        return count

    def read_records(self) -> List[EpisodeRecord]:
        return read_records(self.raw_path)

    def write_config(self, config: dict):
        with open(self.out_dir / self.CONFIG_FILE, "w") as f:
            json.dump(config, f, indent=2)

    def write_summary(self, summary: pd.DataFrame) -> Path:
        """
        Write summary.csv with the fixed column set and a detailed copy with
        confidence intervals and outcome rates.
        """
        missing = [c for c in SUMMARY_COLUMNS if c not in summary.columns]
        if missing:
            raise NavigationError("Summary is missing columns", {"missing": missing})
        summary[SUMMARY_COLUMNS].to_csv(self.summary_path, index=False)
        summary.to_csv(self.out_dir / self.DETAILED_SUMMARY_FILE, index=False)
        logger.info(f"Summary with {len(summary)} rows written to {self.summary_path}")
        return self.summary_path

    def write_plot_data(self, summary: pd.DataFrame, external: Optional[pd.DataFrame] = None) -> List[Path]:
        """One CSV per metric: m down the rows, one column per planner."""
        frame = summary if external is None else pd.concat([summary, external], ignore_index=True)
        paths = []
        for metric in PLOT_METRICS:
            if metric not in frame.columns:
                continue
            table = frame.pivot_table(index="m", columns="planner", values=metric, aggfunc="first")
            path = self.out_dir / f"plot_{metric}.csv"
            table.sort_index().to_csv(path)
            paths.append(path)
        return paths


def read_records(path: Union[str, Path]) -> List[EpisodeRecord]:
    """
    Parse EpisodeRecords from a JSONL file (one per line, blank lines skipped)
    or from a file holding a single, possibly indented, JSON record.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise to_navigation_error(e) from e

    stripped = text.strip()
    if stripped.startswith("{") and "\n{" not in stripped:
        try:
            return [EpisodeRecord.model_validate_json(stripped)]
        except ValueError as e:
            raise ReplayError(f"{path} is not a valid episode record", {"path": str(path), "error": str(e)}) from e

    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(EpisodeRecord.model_validate_json(line))
        except ValueError as e:
            raise ReplayError(
                f"{path}:{line_no} is not a valid episode record",
                {"path": str(path), "line": line_no, "error": str(e)}
            ) from e
    return records


def trajectory_frame(record: EpisodeRecord) -> pd.DataFrame:
    """
    Trajectory table: one row per logged step plus the final state.

    Columns t, x, y, heading, reward, then ox_i, oy_i per obstacle. The reward
    on row k is the reward received for the step leaving that state; the final
    row has none.
    """
    n_obstacles = (len(record.final_state) - 3) // 2
    obstacle_columns = [f"{axis}{i}" for i in range(n_obstacles) for axis in ("ox", "oy")]
    t_s = record.scenario.t_s
    rows = [
        [step.step * t_s] + step.state[:3] + [step.reward] + step.state[3:]
        for step in record.steps
    ]
    rows.append(
        [record.n_steps * t_s] + record.final_state[:3] + [float("nan")] + record.final_state[3:]
    )
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS + obstacle_columns)


def write_trajectory_csv(record: EpisodeRecord, path: Union[str, Path]) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(record).to_csv(path, index=False)
    return path


def load_external_summary(path: Union[str, Path]) -> pd.DataFrame:
    """Summary CSV produced by another tool (an NMPC run, say) for joint plots."""
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise to_navigation_error(e) from e
    missing = [c for c in ("planner", "m") if c not in frame.columns]
    if missing:
        raise ConfigValidationError(f"{path}: external summary lacks columns {missing}")
    frame["planner"] = frame["planner"].astype(str)
    return frame
