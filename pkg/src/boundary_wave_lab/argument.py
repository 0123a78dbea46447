import typing
from typing import Any, Callable, List, Optional, Type
from .argument_parse_error import ArgumentParseError


class Argument:
    """
    A read/write property that is also a command-line argument.

    Remarks:
        Decorates the getter; the flag is --<name with dashes> unless given. Without a
        declared setter, assignment stores the value in self._<name>, the field the
        getter is expected to return.
    """

    _default_type = str
    _flag = '--'

    def __init__(
            self,
            help: str = None,
            type: Type = None,
            flag: str = None,
            choices: List[str] = None,
            metavar: str = None,
            positional: bool = False
            ) -> None:
        self.help = help
        self.overridden_type = type
        self.flag = flag
        self.choices = list(choices) if choices is not None else None
        self.metavar = metavar
        self.positional = positional
        self.name = None
        self.type = None
        self.optional = False
        self.action = None
        self.fget = None
        self.fset = None

    def __call__(
            self,
            wrapped: Callable
            ) -> 'Argument':
        return self.getter(wrapped)

    def __get__(
            self,
            instance: Any,
            owner: Any = None
            ) -> Any:
        if instance is None:
            return self
        if self.fget is None:
            raise AttributeError('unreadable attribute')
        return self.fget(instance)

    def __set__(
            self,
            instance: Any,
            value: Any
            ) -> None:
        if self.fset is None:
            setattr(instance, self.storage_name, value)
            return
        self.fset(instance, value)

    def getter(
            self,
            getter: Callable
            ) -> 'Argument':
        self.fget = getter
        self.name = getter.__name__
        self.type, self.optional = self._get_type(getter)
        self.action = 'store_true' if issubclass(self.type, bool) else 'store'
        self.metavar = self.metavar or (None if self.choices else self.type.__name__)
        self.__doc__ = self._get_doc(getter)
        self.help = self.help or self.__doc__
        return self

    def setter(
            self,
            setter: Callable
            ) -> 'Argument':
        self.fset = setter
        return self

    @property
    def storage_name(self) -> str:
        return '_' + self.name

    @property
    def option(self) -> str:
        """
        Gets the command-line spelling: the name for positionals, the flag otherwise.
        """
        if self.positional:
            return self.name
        option = self.flag or self._flag + self.name.replace('_', '-')
        return option

    def matches(
            self,
            key: str
            ) -> bool:
        """
        Determines whether a configuration key names this argument, by name or by flag.
        """
        key = key.lstrip('-')
        matched = key in (self.name, self.option.lstrip('-'), self.name.replace('_', '-'))
        return matched

    def convert(
            self,
            value: Any
            ) -> Any:
        """
        Converts a configuration value to the argument type.

        Raises:
            ArgumentParseError:
                The value has the wrong type or is not one of the choices.
        """
        if value is None:
            if self.optional:
                return None
            raise ArgumentParseError(f'{self.option} must not be null.')
        if issubclass(self.type, bool):
            if not isinstance(value, bool):
                raise ArgumentParseError(f'{self.option} must be true or false, got {value!r}.')
            return value
        if isinstance(value, (bool, list, dict)) or (self.type is int and isinstance(value, float)
                                                       and not value.is_integer()):
            raise ArgumentParseError(f'{self.option} expects a {self.type.__name__}, got {value!r}.')
        try:
            converted = self.type(value)
        except (TypeError, ValueError) as error:
            raise ArgumentParseError(f'{self.option} expects a {self.type.__name__}, got {value!r}.', error) from error
        if self.choices is not None and converted not in self.choices:
            raise ArgumentParseError(f'{self.option} must be one of {self.choices}, got {converted!r}.')
        return converted

    def _get_doc(
            self,
            getter: Callable
            ) -> Optional[str]:
        doc = getter.__doc__ or self.help
        stripped_doc = doc.strip() if doc else None
        return stripped_doc

    def _get_type(
            self,
            getter: Callable
            ) -> typing.Tuple[Type, bool]:
        return_type = self.overridden_type or self._get_type_from_annotation(getter)
        resolved_type, optional = self._resolve_optional_type(return_type)
        return resolved_type, optional

    def _get_type_from_annotation(
            self,
            getter: Callable
            ) -> Type:
        key = 'return'
        annotations = typing.get_type_hints(getter)
        return_type = annotations[key] if key in annotations else self._default_type
        return return_type

    @staticmethod
    def _resolve_optional_type(value: Type) -> typing.Tuple[Type, bool]:
        """
        Unwraps Optional[T] to T.
        """
        if typing.get_origin(value) is not typing.Union:
            return value, False
        members = [member for member in typing.get_args(value) if member is not type(None)]
        return members[0], True
