"""Common info needed by every command handler"""
import os
import logging
from argparse import Namespace
from typing import Iterable, List, Optional
from modules.data import ReportWriter, Report, load_run_config
from modules.debug.errors import EXIT_CODES
from modules.debug.log_manager import setup_logging
from modules.physics.symmetry import PressureLaw
from modules.spectral.grid import PeriodicGrid, set_fft_workers

logger = logging.getLogger(__name__)


class RunInfo():
    """Class that contains all the relevant information related to a run of the command line

    Args:
        subcommand (:class:`str`): name of the subcommand
        config (:class:`dict`): merged and validated configuration
        verbosity (:class:`int`): number of -v flags
    """

    def __init__(self, subcommand: str, config: dict, verbosity: int = 0):
        self.__subcommand = subcommand
        self.__config = config
        self.__verbosity = verbosity
        self.__writer = None

    @classmethod
    def from_args(cls, args: Namespace, environ: Optional[dict] = None):
        """Builds the run info from the parsed command line.
        --seed, --threads and --out take precedence over the configuration and enter its hash

        Args:
            args (Namespace): parsed arguments
            environ (dict, optional): environment to read. Defaults to os.environ.

        Returns:
            RunInfo: the run info, with logging and FFT workers set up
        """
        config = load_run_config(args.config, environ)
        if args.seed is not None:
            config['seed'] = args.seed
        if args.threads is not None:
            config['threads'] = max(1, args.threads)
        if args.out is not None:
            config.setdefault('output', {})['dir'] = args.out
        debug = config.get('debug', {})
        setup_logging(args.verbose, debug.get('local_log', False), debug.get('log_path', os.path.join("logs", "lab.log")))
        set_fft_workers(config.get('threads', 1))
        return cls(args.subcommand, config, args.verbose)

    @property
    def subcommand(self) -> str:
        """:class:`str`: name of the subcommand"""
        return self.__subcommand

    @property
    def config(self) -> dict:
        """:class:`dict`: configuration of the run"""
        return self.__config

    @property
    def verbosity(self) -> int:
        """:class:`int`: number of -v flags"""
        return self.__verbosity

    @property
    def seed(self) -> int:
        """:class:`int`: seed of every random generator"""
        return int(self.__config.get('seed', 0))

    @property
    def threads(self) -> int:
        """:class:`int`: worker threads"""
        return int(self.__config.get('threads', 1))

    @property
    def out_dir(self) -> str:
        """:class:`str`: output directory"""
        return self.__config.get('output', {}).get('dir', "out")

    @property
    def grid(self) -> PeriodicGrid:
        """:class:`PeriodicGrid`: grid of the configuration"""
        grid = self.__config['grid']
        return PeriodicGrid(grid['dim'], grid['points'], grid['period'])

    @property
    def law(self) -> PressureLaw:
        """:class:`PressureLaw`: pressure law of the configuration"""
        return PressureLaw(self.__config['law']['gamma'])

    @property
    def suites(self) -> dict:
        """:class:`dict`: parameters of the verification suites"""
        return self.__config.get('suites', {})

    @property
    def writer(self) -> ReportWriter:
        """:class:`ReportWriter`: writer of the output directory, the manifest is written on first access"""
        if self.__writer is None:
            self.__writer = ReportWriter(self.out_dir)
            self.__writer.write_manifest(self.__subcommand, self.__config, self.seed, self.threads)
        return self.__writer

    def conclude(self, reports: Iterable[Report], name: str = "reports.jsonl") -> int:
        """Writes the reports and computes the exit code: threshold when a report failed

        Args:
            reports (Iterable[Report]): reports of the run
            name (str, optional): name of the JSON-lines file. Defaults to "reports.jsonl".

        Returns:
            int: exit code
        """
        reports: List[Report] = list(reports)
        self.writer.write_jsonl(name, reports)
        failed = [report.op for report in reports if report.passed is False]
        if failed:
            logger.warning("%d check(s) failed: %s", len(failed), ", ".join(sorted(set(failed))))
            return EXIT_CODES['threshold']
        logger.info("%d report(s) written in %s", len(reports), self.out_dir)
        return EXIT_CODES['success']
