"""
Root of the error hierarchy of the lab.
"""

import os
import traceback
from typing import List, Optional
from ._iterables import flatten, unwrap


class LabError(Exception):
    """
    A computation or a run of the lab failed.

    Remarks:
        Lower-level errors (a SciPy factorization, a user callback) are kept as
        inner_exception so that the command line can print the whole chain. Each
        subclass sets the exit_status that the command line returns for it.
    """

    exit_status = 1

    def __init__(
            self,
            message: str,
            inner_exception: Optional[Exception] = None
            ) -> None:
        """
        Args:
            message:
                What went wrong, phrased for the person running the lab.
            inner_exception:
                The error that caused this one, or None.
        """
        super().__init__(message)
        self._message = message
        self._inner_exception = inner_exception

    @property
    def message(self) -> str:
        return self._message

    @property
    def inner_exception(self) -> Optional[Exception]:
        return self._inner_exception

    @property
    def traceback(self) -> str:
        """
        Gets the formatted traceback of this error, for DEBUG logs.
        """
        frames = traceback.format_exception(type(self), self, self.__traceback__)
        return flatten(frames, '')

    def unwrap(self) -> List[Exception]:
        """
        Gets the chain of causes ending with this error, the root cause first.
        """
        chain = unwrap(self, _cause_of)
        return chain

    def flatten(self) -> str:
        """
        Gets one `Type: message` line per error of the chain, the root cause first.
        """
        lines = [f'{type(error).__name__}: {error}' for error in self.unwrap()]
        return flatten(lines, os.linesep)


def _cause_of(error: Exception) -> Optional[Exception]:
    # explicit inner exceptions win over implicit `raise ... from` causes
    cause = getattr(error, 'inner_exception', None)
    return cause if cause is not None else error.__cause__
