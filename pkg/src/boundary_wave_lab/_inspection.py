"""
High-level methods used for inspecting objects.
"""

from typing import Any, Callable, Dict, List, Tuple


def get_fields(
        item: object
        ) -> Dict[str, Any]:
    """
    Gets the fields of an object.

    Args:
        item:
            The item to get the fields of.

    Returns:
        The fields of the object.

    Raises:
        TypeError:
            The object does not implement the __dict__ attribute.
    """
    if not hasattr(item, '__dict__'):
        raise TypeError('object must implement the __dict__ attribute.')
    fields = vars(item)
    return fields


def get_declared_members(
        class_var: type,
        predicate: Callable[[Any], bool]
        ) -> List[Tuple[str, Any]]:
    """
    Gets the class members matching a predicate in declaration order, base classes first.

    Remarks:
        inspect.getmembers sorts by name; command-line help and resolved configurations
        keep the order in which the arguments were written. A member redeclared by a
        subclass keeps the position of its first declaration.

    Args:
        class_var:
            Class to inspect.
        predicate:
            Selects the members to return.

    Returns:
        (name, member) pairs.
    """
    members: Dict[str, Any] = {}
    for klass in reversed(class_var.__mro__):
        for name, member in vars(klass).items():
            if predicate(member):
                members[name] = member
    declared = list(members.items())
    return declared
