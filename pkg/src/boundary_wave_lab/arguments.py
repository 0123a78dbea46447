import json
from argparse import ArgumentDefaultsHelpFormatter, HelpFormatter
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Type, TypeVar
from ._inspection import get_declared_members, get_fields
from .argument import Argument
from .argument_parse_error import ArgumentParseError
from .property_argument_parser import PropertyArgumentParser


TArgument = TypeVar('TArgument', bound='Arguments')


class Arguments:
    """
    A set of Argument properties parsed from the command line and an optional JSON file.

    Remarks:
        Subclasses set their defaults in a no-argument __init__. Values are applied in
        the order defaults, --config file, explicit flags.
    """

    _default_formatter = ArgumentDefaultsHelpFormatter

    def __init__(self) -> None:
        self._config = None

    @Argument(help='JSON file whose keys are argument names or flags; explicit flags override it.',
              metavar='path')
    def config(self) -> Optional[str]:
        return self._config

    @classmethod
    def parse(
            cls: Type[TArgument],
            argv: Optional[Sequence[str]] = None
            ) -> TArgument:
        """
        Parses the arguments.

        Args:
            argv:
                The arguments without the program name; sys.argv[1:] when omitted.

        Returns:
            The parsed arguments.

        Raises:
            ArgumentParseError:
                A flag is unknown or malformed, or the configuration file is invalid.
        """
        parser = cls._create_parser()
        namespace = parser.parse_args(argv)
        given = get_fields(namespace)
        instance = cls()
        config_path = given.get('config')
        if config_path is not None:
            instance.load(config_path)
        instance._assign(given)
        return instance

    @classmethod
    def get_help(
            cls: Type[TArgument],
            formatter: Type[HelpFormatter] = _default_formatter
            ) -> str:
        defaults = cls()
        parser = PropertyArgumentParser(formatter_class=formatter)
        for arg in cls.get_arguments():
            parser.add_argument_details(arg, getattr(defaults, arg.name))
        help_text = parser.format_help()
        return help_text

    @classmethod
    def get_arguments(cls: Type[TArgument]) -> List[Argument]:
        """
        Gets the Argument properties in declaration order.
        """
        members = get_declared_members(cls, cls._is_arg)
        args = [member for _, member in members]
        return args

    def load(
            self,
            path: str
            ) -> None:
        """
        Applies the values of a JSON configuration file.

        Raises:
            ArgumentParseError:
                The file cannot be read, is not a JSON object or names an unknown argument.
        """
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, ValueError) as error:
            raise ArgumentParseError(f'cannot read the configuration file {path}.', error) from error
        if not isinstance(values, dict):
            raise ArgumentParseError(f'the configuration file {path} must hold a JSON object.')
        self.apply(values)

    def apply(
            self,
            values: Mapping[str, Any]
            ) -> None:
        """
        Assigns values keyed by argument name or flag, converting them to the argument types.

        Raises:
            ArgumentParseError:
                A key is unknown or a value does not convert.
        """
        args = self.get_arguments()
        for key, value in values.items():
            matches = [arg for arg in args if arg.matches(key)]
            if not matches:
                raise ArgumentParseError(f'unknown configuration key {key!r}.')
            arg = matches[0]
            if arg.name == 'config':
                raise ArgumentParseError('a configuration file cannot name another one.')
            setattr(self, arg.name, arg.convert(value))

    def resolved(self) -> 'OrderedDict[str, Any]':
        """
        Gets every argument value by name, in declaration order.
        """
        values = OrderedDict((arg.name, getattr(self, arg.name)) for arg in self.get_arguments())
        return values

    def _assign(
            self,
            given: Dict[str, Any]
            ) -> None:
        for arg in self.get_arguments():
            if arg.name in given:
                setattr(self, arg.name, given[arg.name])

    @classmethod
    def _create_parser(cls: Type[TArgument]) -> PropertyArgumentParser:
        parser = PropertyArgumentParser(formatter_class=cls._default_formatter)
        for arg in cls.get_arguments():
            parser.add_argument_details(arg)
        return parser

    @staticmethod
    def _is_arg(item: Any) -> bool:
        """
        Determines whether the item is an Argument property.
        """
        is_arg = isinstance(item, Argument)
        return is_arg
