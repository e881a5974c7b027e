from typing import Iterable, List


def is_empty(col):
    return not col


def uniquify(l: list) -> list:
    """
    :param l: collection to remove duplications from
    :return: copy of l, with duplicates removed, sorted asc
    """
    return sorted(list(dict.fromkeys(l)))


def neutralize_str(s: str) -> str:
    if isinstance(s, str):
        return s.strip().lower()
    return s


def neutralize_key(s: str) -> str:
    """Config keys and CLI flags share one spelling: lower case, underscores."""
    return neutralize_str(s).lstrip("-").replace("-", "_")


def list_to_str(l: Iterable) -> str:
    return ", ".join(str(i) for i in l)


def parse_list(s, cast=float) -> List:
    """
    Parses a comma separated value ("1, 2.5,4") into a list.
    :param s: string, scalar or already-parsed list
    :param cast: element type
    """
    if isinstance(s, (list, tuple)):
        return [cast(i) for i in s]
    if not isinstance(s, str):
        return [cast(s)]
    return [cast(i) for i in s.split(",") if not is_empty(i.strip())]
