"""
A module used to extend enums.
"""

import enum
from ._iterables import flatten
from .errors import InvalidArgumentError


class StrEnum(str, enum.Enum):
    """
    Enum where members are also (and must be) str
    """

    @classmethod
    def has_value(
            cls,
            value: str
            ) -> bool:
        included = any(member.value == value for member in cls)
        return included

    @classmethod
    def values(cls) -> list:
        """
        Gets the text values of all members, in declaration order.
        """
        values = [member.value for member in cls]
        return values

    @classmethod
    def from_value(
            cls,
            value: str):
        """
        Gets the enum item from its text value.

        Remarks:
            Command-line choices and configuration files carry the value (e.g. 'check-h'),
            which is not always a valid member name.

        Args:
            value:
                The text value of the item to get.

        Raises:
            InvalidArgumentError:
                The value is not defined by the enum.

        Returns:
            The enum item carrying the specified value.
        """
        if isinstance(value, cls):
            return value
        if not cls.has_value(value):
            members = flatten(cls.values(), ', ')
            error = (f'The value \'{value}\' is not a valid value for \'{cls.__name__}\', '
                     f'expected values are: \'{members}\'')
            raise InvalidArgumentError(error)
        item = cls(value)
        return item

    def __str__(self):
        """
        Gets the text value of the enum.
        """
        return self.value

    def __repr__(self):
        """
        Gets the text value of the enum.
        """
        return self.value
