"""Main module"""
# region imports
# libs
import sys
import argparse
from typing import Callable, Dict, List, Optional
# debug
from modules.debug import ConfigurationError, error_handler
# data
from modules.data import read_md
# handlers
from modules.handlers import SUBCOMMANDS
from modules.handlers.command_handlers import lp_verify_cmd, norm_cmd, bony_verify_cmd, commutator_suite_cmd, \
    sk_verify_cmd, solve_euler_cmd, solve_pme_cmd, tau_sweep_cmd, audit_energy_cmd
from modules.utils import RunInfo
# endregion

HANDLERS: Dict[str, Callable[[RunInfo], int]] = {
    'lp-verify': lp_verify_cmd,
    'norm': norm_cmd,
    'bony-verify': bony_verify_cmd,
    'commutator-suite': commutator_suite_cmd,
    'sk-verify': sk_verify_cmd,
    'solve-euler': solve_euler_cmd,
    'solve-pme': solve_pme_cmd,
    'tau-sweep': tau_sweep_cmd,
    'audit-energy': audit_energy_cmd,
}


class LabArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as configuration errors instead of exiting"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message, "command line")


def create_argparser() -> argparse.ArgumentParser:
    """Builds the parser of the command line

    Returns:
        argparse.ArgumentParser: the parser
    """
    parser = LabArgumentParser(prog="relaxlab",
                               description="Spectral laboratory for the relaxation limit of damped Euler flows",
                               epilog=read_md("usage"),
                               formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("subcommand", choices=list(SUBCOMMANDS), metavar="SUBCOMMAND",
                        help="one of: " + ", ".join(SUBCOMMANDS))
    parser.add_argument("--config", default=None, metavar="PATH", help="run document merged over the defaults")
    parser.add_argument("--out", default=None, metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, default=None, metavar="N", help="seed of every random generator")
    parser.add_argument("--threads", type=int, default=None, metavar="N", help="worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    return parser


def dispatch(argv: Optional[List[str]] = None, environ: Optional[dict] = None) -> int:
    """Parses the command line and runs the matching handler

    Args:
        argv (List[str], optional): arguments without the program name. Defaults to sys.argv[1:].
        environ (dict, optional): environment to read. Defaults to os.environ.

    Returns:
        int: exit code, 0 on success, 1 on operational errors, 2 when a check failed
    """
    try:
        args = create_argparser().parse_args(argv)
        info = RunInfo.from_args(args, environ)
        info.writer  # pylint: disable=pointless-statement
        return HANDLERS[args.subcommand](info)
    except Exception as exc:  # pylint: disable=broad-except
        return error_handler(exc)


def main():
    """Main function
    """
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
