"""Canonical ordering and JSON-friendly rendering of element labels.

Labels are built from str, int, tuples and frozensets; anything else must
expose ``key()`` returning such a value.
"""

from __future__ import annotations


def ckey(x):
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, tuple(ckey(y) for y in x))
    if isinstance(x, frozenset):
        return (3, tuple(sorted(ckey(y) for y in x)))
    if x is None:
        return (-1,)
    k = getattr(x, "key", None)
    if k is not None:
        return (4, ckey(k()))
    raise TypeError(f"no canonical key for {type(x).__name__}")


def csorted(xs):
    return sorted(xs, key=ckey)


def render(x):
    """Plain JSON value for a label."""
    if isinstance(x, (str, int)):
        return x
    if isinstance(x, tuple):
        return [render(y) for y in x]
    if isinstance(x, frozenset):
        return [render(y) for y in csorted(x)]
    if x is None:
        return None
    k = getattr(x, "key", None)
    if k is not None:
        return render(k())
    return str(x)


def show(x) -> str:
    """Short human-readable label."""
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, tuple):
        return "(" + ",".join(show(y) for y in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(show(y) for y in csorted(x)) + "}"
    return repr(x)
