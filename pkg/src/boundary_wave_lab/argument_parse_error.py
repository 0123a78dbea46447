from typing import Optional
from ._exceptions import LabError


class ArgumentParseError(LabError):
    """
    The command line or the configuration file could not be turned into a valid run.
    """

    exit_status = 2

    def __init__(
            self,
            message: str,
            inner_exception: Optional[Exception] = None
            ) -> None:
        error = f'Argument error: {message}'
        super().__init__(error, inner_exception)
