"""
File input and output: JSON topology, flow, budget, plan and trace files, CSV
experiment tables.
"""
import csv
import enum
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, TextIO, Type, TypeVar, Union
from pydantic import BaseModel, ValidationError
from app.core.exceptions import InputParseError
from app.schemas.common import describe_validation_error
from app.schemas.experiment import CellSummary, ComplexityRow, TrialResult
from app.schemas.files import BudgetFile, FlowFile, PlanFile, TopologyFile, TraceFile
from app.schemas.flow import FlowSet
from app.schemas.optimizer import EnergyBudget, SearchSummary
from app.schemas.reconfig import MovementTrace, ReconfigPlan
from app.schemas.topology import LabeledTree, PrefixLabel, TreeTopology

logger = logging.getLogger(__name__)

RecordT = TypeVar('RecordT', bound=BaseModel)
PathLike = Union[str, Path]

TRIAL_COLUMNS = ["n", "h_max", "seed", "algorithm", "roots_considered",
                 "traffic_initial", "traffic_final", "explored", "pruned", "ms"]
SUMMARY_COLUMNS = ["n", "h_max", "algorithm", "roots_considered", "trials",
                   "mean_traffic_initial", "mean_traffic_final", "std_traffic_final", "mean_explored"]
COMPLEXITY_COLUMNS = ["n", "greedy_evaluations", "greedy_worst_case",
                      "bnb_leaves", "bnb_explored", "oracle_leaves", "optimal_worst_case"]


def serialize_for_json(obj: Any) -> Any:
    """Recursively serialize objects to JSON-compatible types"""
    if isinstance(obj, PrefixLabel):
        return obj.render()
    elif isinstance(obj, BaseModel):
        return serialize_for_json(obj.model_dump(by_alias=True))
    elif isinstance(obj, dict):
        return {str(k): serialize_for_json(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [serialize_for_json(item) for item in obj]
    elif isinstance(obj, enum.Enum):
        return obj.value
    else:
        return obj


def read_record(path: PathLike, record_cls: Type[RecordT]) -> RecordT:
    """Load a JSON file into a record; syntax errors point at path:line:column"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return record_cls.model_validate(payload)
    except ValidationError as exc:
        raise InputParseError(f"{path}: {describe_validation_error(exc)}") from exc


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(serialize_for_json(payload), indent=2, sort_keys=False) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def load_topology(path: PathLike) -> TreeTopology:
    return read_record(path, TopologyFile).to_topology()


def load_flows(path: PathLike) -> FlowSet:
    return read_record(path, FlowFile).to_flows()


def load_budgets(path: PathLike) -> EnergyBudget:
    return read_record(path, BudgetFile).to_budget()


def load_plan_file(path: PathLike) -> PlanFile:
    return read_record(path, PlanFile)


def save_topology(path: PathLike, tree: Union[TreeTopology, LabeledTree]) -> Path:
    return write_json(path, TopologyFile.from_tree(tree).model_dump(exclude_none=True))


def save_plan(path: PathLike, plan: ReconfigPlan) -> Path:
    return write_json(path, PlanFile.from_plan(plan))


def save_trace(path: PathLike, trace: MovementTrace) -> Path:
    return write_json(path, TraceFile.from_trace(trace).model_dump(by_alias=True, exclude_none=True))


def save_summary(path: PathLike, summary: SearchSummary) -> Path:
    return write_json(path, summary)


def _number(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(round(value, 12))
    return str(value)


def trial_rows(rows: Iterable[TrialResult], timings: bool = False) -> List[List[str]]:
    table = []
    for row in rows:
        table.append([
            str(row.spec.n), str(row.spec.h_max), str(row.spec.seed), row.algorithm, str(row.roots_considered),
            _number(row.traffic_initial), _number(row.traffic_final), str(row.explored), str(row.pruned),
            _number(row.wall_time_ms) if timings else "",
        ])
    return table


def summary_rows(summaries: Iterable[CellSummary]) -> List[List[str]]:
    return [
        [str(cell.n), str(cell.h_max), cell.algorithm, str(cell.roots_considered), str(cell.trials),
         _number(cell.mean_traffic_initial), _number(cell.mean_traffic_final),
         _number(cell.std_traffic_final), _number(cell.mean_explored)]
        for cell in summaries
    ]


def complexity_rows(rows: Iterable[ComplexityRow]) -> List[List[str]]:
    return [
        [str(row.n), str(row.greedy_evaluations), str(row.greedy_worst_case), _number(row.bnb_leaves),
         _number(row.bnb_explored), _number(row.oracle_leaves), str(row.optimal_worst_case)]
        for row in rows
    ]


def emit_csv(handle: TextIO, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        emit_csv(handle, header, rows)
    logger.info(f"Wrote {path}")
    return path


def write_trials_csv(path: PathLike, rows: Iterable[TrialResult], timings: bool = False) -> Path:
    return write_csv(path, TRIAL_COLUMNS, trial_rows(rows, timings))


def write_summary_csv(path: PathLike, summaries: Iterable[CellSummary]) -> Path:
    return write_csv(path, SUMMARY_COLUMNS, summary_rows(summaries))


def write_complexity_csv(path: PathLike, rows: Iterable[ComplexityRow]) -> Path:
    return write_csv(path, COMPLEXITY_COLUMNS, complexity_rows(rows))
