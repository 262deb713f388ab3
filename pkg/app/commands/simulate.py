import argparse
import logging
from app.core.exceptions import EXIT_OK, ConnectivityViolationError
from app.schemas.command import CommandConfig
from app.schemas.reconfig import MovementTrace
from app.services import io_service
from app.services.reconfig_service import simulate
from app.services.trie_service import assign_prefix_labels

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="Execute a plan step by step and audit connectivity")
    parser.add_argument("--topology", help="Initial topology JSON file")
    parser.add_argument("--plan", help="Plan JSON file")
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=cmd_simulate, subcommand="simulate")


def _print_verdicts(trace: MovementTrace) -> None:
    for step in trace.steps:
        verdict = "connected" if step.connected else "DISCONNECTED"
        relabel = f" relabel={step.relabeled_to.render()}" if step.relabeled_to else ""
        print(f"{step.index} node={step.node} {step.from_neighbor}->{step.to_neighbor} "
              f"{step.stage.value} {verdict}{relabel}")


def cmd_simulate(config: CommandConfig) -> int:
    """Exit 0 only when every snapshot stayed connected; trace.json is written either way"""
    config.require("topology", "plan")
    plan_file = io_service.load_plan_file(config.plan)
    initial = assign_prefix_labels(io_service.load_topology(config.topology), plan_file.label_first_suffix)
    plan = plan_file.to_plan(initial)
    try:
        trace = simulate(plan)
    except ConnectivityViolationError as exc:
        if exc.trace is not None:
            io_service.save_trace(config.out / "trace.json", exc.trace)
            _print_verdicts(exc.trace)
        raise
    io_service.save_trace(config.out / "trace.json", trace)
    _print_verdicts(trace)
    return EXIT_OK
