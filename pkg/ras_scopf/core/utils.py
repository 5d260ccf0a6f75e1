from typing import FrozenSet, Iterable, Union


def to_pu(mw: float, base_mva: float) -> float:
    return mw / base_mva


def to_mw(pu: float, base_mva: float) -> float:
    return pu * base_mva


def round_percent(fraction: float, digits: int = 2) -> float:
    """
    Converts a loading fraction into a percentage rounded for reports.

    Args:
        fraction (float): Loading as a fraction of the rating (1.2037 for 120.37%).
        digits (int): Decimal places kept (default: 2).

    Returns:
        float: The rounded percentage.
    """
    return round(fraction * 100.0, digits)


def parse_id_set(values: Union[str, int, Iterable]) -> FrozenSet[int]:
    """
    Parses element ids written as ints, lists or range strings.

    Accepts ``7``, ``[7, 18]``, ``"7,18,21"`` and ``"1-16"`` forms, and any
    mix of them inside a list.

    Args:
        values: The raw value from a config file or the command line.

    Returns:
        frozenset: The parsed ids.
    """
    if values is None:
        return frozenset()
    if isinstance(values, int):
        return frozenset([values])
    if isinstance(values, str):
        ids = set()
        for token in values.replace(" ", "").split(","):
            if not token:
                continue
            if "-" in token:
                start, end = token.split("-", 1)
                ids.update(range(int(start), int(end) + 1))
            else:
                ids.add(int(token))
        return frozenset(ids)
    ids = set()
    for value in values:
        ids.update(parse_id_set(value))
    return frozenset(ids)
