import argparse
import json
import logging
from app.core.exceptions import EXIT_OK
from app.schemas.command import CommandConfig
from app.services import io_service
from app.services.reconfig_service import feasible, plan_labels
from app.services.trie_service import assign_prefix_labels

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("plan", help="Label moving nodes for a given desired topology")
    parser.add_argument("--topology", help="Initial topology JSON file")
    parser.add_argument("--desired", help="Desired topology JSON file")
    parser.add_argument("--budgets", help="Optional hop budget JSON file; adds a feasibility verdict")
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=cmd_plan, subcommand="plan")


def cmd_plan(config: CommandConfig) -> int:
    config.require("topology", "desired")
    initial = assign_prefix_labels(io_service.load_topology(config.topology))
    desired = io_service.load_topology(config.desired)
    plan = plan_labels(initial, desired)
    io_service.save_plan(config.out / "plan.json", plan)

    record = {
        "moving": plan.moving_nodes(),
        "total_move_distance": plan.total_move_distance(),
    }
    if config.budgets is not None:
        config.require("budgets")
        record["feasible"] = feasible(initial, desired, io_service.load_budgets(config.budgets))
    print(json.dumps(record))
    return EXIT_OK
