import argparse
import logging
from app.core.exceptions import EXIT_OK
from app.schemas.command import CommandConfig
from app.schemas.optimizer import Algorithm, BoundMode
from app.services import io_service
from app.services.optimizer_service import optimize
from app.services.trie_service import assign_prefix_labels

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("optimize", help="Choose the final topology for a network")
    parser.add_argument("--topology", help="Initial topology JSON file")
    parser.add_argument("--flows", help="Flow JSON file")
    parser.add_argument("--budgets", help="Hop budget JSON file")
    parser.add_argument("--algorithm", choices=[a.value for a in Algorithm])
    parser.add_argument("--bound", choices=[b.value for b in BoundMode])
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=cmd_optimize, subcommand="optimize")


def cmd_optimize(config: CommandConfig) -> int:
    """
    Writes final_topology.json, plan.json and summary.json to the output
    directory and prints the summary record.
    """
    config.require("topology", "flows", "budgets")
    topology = io_service.load_topology(config.topology)
    flows = io_service.load_flows(config.flows)
    budgets = io_service.load_budgets(config.budgets)

    initial = assign_prefix_labels(topology)
    result = optimize(initial, flows, budgets, config.algorithm, config.bound)

    io_service.save_topology(config.out / "final_topology.json", result.final)
    io_service.save_plan(config.out / "plan.json", result.plan)
    summary = result.summary()
    io_service.save_summary(config.out / "summary.json", summary)
    print(summary.model_dump_json())
    return EXIT_OK
