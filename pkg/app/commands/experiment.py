import argparse
import logging
import sys
from app.core.config import settings
from app.core.exceptions import EXIT_OK, InvalidParameterError
from app.schemas.command import CommandConfig
from app.schemas.optimizer import BoundMode
from app.services import io_service
from app.services.experiment_service import run_multi_root, run_sweep, summarize

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("experiment", help="Monte Carlo sweep over random instances")
    parser.add_argument("--sizes", help="Node counts, e.g. 3,4,5 or 3..7")
    parser.add_argument("--h-max", dest="h_max", help="Largest hop budgets, e.g. 1,3,10")
    parser.add_argument("--trials", type=int, help="Instances per cell")
    parser.add_argument("--algorithms", help="Comma separated: greedy,optimal,oracle")
    parser.add_argument("--roots", help="Candidate root counts; switches to the multi-root study")
    parser.add_argument("--n", type=int, help="Node count for the multi-root study")
    parser.add_argument("--bound", choices=[b.value for b in BoundMode])
    parser.add_argument("--seed", type=int, help="Base seed; trial t uses seed + t")
    parser.add_argument("--total-flow", dest="total_flow", type=float, help="Total flow in Mbps")
    parser.add_argument("--timings", action="store_true", default=None, help="Fill the ms column")
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=cmd_experiment, subcommand="experiment")


def cmd_experiment(config: CommandConfig) -> int:
    """Writes trials.csv and summary.csv; prints the summary table"""
    h_max_values = config.h_max or settings.default_h_max_values
    if config.roots:
        if config.n is None:
            raise InvalidParameterError("--roots needs --n")
        rows = []
        for h_max in h_max_values:
            rows.extend(run_multi_root(config.n, h_max, config.roots, config.trials, config.algorithms,
                                       seed=config.seed, total_flow=config.total_flow, bound=config.bound))
    else:
        sizes = config.sizes or settings.default_sizes
        rows = run_sweep(sizes, h_max_values, config.trials, config.algorithms, seed=config.seed,
                         total_flow=config.total_flow, bound=config.bound)

    summaries = summarize(rows)
    io_service.write_trials_csv(config.out / "trials.csv", rows, config.timings)
    io_service.write_summary_csv(config.out / "summary.csv", summaries)
    io_service.emit_csv(sys.stdout, io_service.SUMMARY_COLUMNS, io_service.summary_rows(summaries))
    return EXIT_OK
