"""
Helpers for joining, unwinding and mapping sequences.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

T_Item = TypeVar('T_Item', bound=object)
T_Result = TypeVar('T_Result')


def flatten(items: Iterable[object], delimiter: str = ' ') -> str:
    """
    Joins the text of the non-empty items with the delimiter.
    """
    return delimiter.join(str(item) for item in items if item != '')


def unwrap(
        item: Optional[T_Item],
        parent_of: Callable[[T_Item], Optional[T_Item]]) -> List[T_Item]:
    """
    Follows parent_of from the item until it yields None.

    Returns:
        The visited items, the last one reached first and the item itself last.
    """
    chain: List[T_Item] = []
    while item is not None:
        chain.append(item)
        item = parent_of(item)
    chain.reverse()
    return chain


def map_async(
        items: Sequence[T_Item],
        action: Callable[[T_Item], T_Result],
        jobs: int = 1
) -> List[T_Result]:
    """
    Runs an action on each of the items on a bounded thread pool.

    Remarks:
        The first error raised by an action is re-raised once every submitted call
        has finished; results keep the order of the items.

    Args:
        items: The items to perform the action on.
        action: The action to perform on each item.
        jobs: The maximum number of concurrent calls; 1 runs sequentially in the caller.

    Returns:
        The results of the action, in the order of the items.
    """
    if jobs <= 1:
        results = [action(item) for item in items]
        return results
    with ThreadPoolExecutor(max_workers=jobs) as thread_pool:
        futures = [thread_pool.submit(action, item) for item in items]
    results = [future.result() for future in futures]
    return results


def pairwise_differences(values: Iterable[float]) -> List[float]:
    """
    Gets the differences of consecutive values.

    Args:
        values: The sequence to difference.

    Returns:
        A list one shorter than the sequence.
    """
    values = list(values)
    differences = [after - before for before, after in zip(values, values[1:])]
    return differences
