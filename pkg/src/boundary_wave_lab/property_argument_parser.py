import argparse
import sys
from typing import Any
from .argument import Argument
from .argument_parse_error import ArgumentParseError


class PropertyArgumentParser(argparse.ArgumentParser):
    """
    An argument parser built from Argument properties that raises instead of exiting.

    Remarks:
        Options default to SUPPRESS, so the parsed namespace holds only the flags given
        on the command line.
    """

    def __init__(
            self,
            *args,
            **kwargs
            ) -> None:
        kwargs.setdefault('argument_default', argparse.SUPPRESS)
        kwargs.setdefault('allow_abbrev', False)
        super().__init__(*args, **kwargs)

    def error(
            self,
            message: str
            ) -> None:
        """
        Prints the usage to stderr and raises.

        Raises:
            ArgumentParseError: An error with parsing the arguments occurred.
        """
        self.print_usage(sys.stderr)
        raise ArgumentParseError(message)

    def add_argument_details(
            self,
            arg: Argument,
            default: Any = argparse.SUPPRESS
            ) -> None:
        """
        Adds one Argument property to the parser.

        Args:
            arg:
                The property.
            default:
                The value shown by help formatters; parsing never applies it.
        """
        if arg.positional:
            self.add_argument(
                arg.option,
                type=arg.type,
                choices=arg.choices,
                metavar=arg.metavar,
                help=arg.help)
        elif arg.action == 'store_true':
            self.add_argument(
                arg.option,
                dest=arg.name,
                action='store_true',
                default=default,
                help=arg.help)
        else:
            self.add_argument(
                arg.option,
                dest=arg.name,
                type=arg.type,
                choices=arg.choices,
                metavar=arg.metavar,
                default=default,
                help=arg.help)
