"""
Test statistics built from the pair of directed Q statistics.

With ``k = mn / (m + n)`` and ``v = (1/12) (1/m + 1/n)``:

=========  ==================================================================
Max        ``max(Q1, Q2)``,  ``Qr = (q_r - 1/2)^2 / v``
Weighted   ``w1 Q1 + (1 - w1) Q2``
Min        ``-min(Q1', Q2')``,  ``Qr' = (q_r - 1/2) / sqrt(v)``
Sum        ``-k (q_fg + q_gf - 1)``
Product    ``-k (q_fg q_gf - 1/4)``
=========  ==================================================================

All five vanish at ``q_fg = q_gf = 1/2``, and large values are evidence
against ``F = G``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError, InvalidQPlus
from .qstat import QPair

__all__ = [
    "Max",
    "Min",
    "WeightedAvg",
    "Sum",
    "Product",
    "StatisticKind",
    "StatisticValue",
    "evaluate_statistic",
    "statistic_values",
    "condition_cs_holds",
    "statistic_from_name",
]


@dataclass(frozen=True)
class Max:
    name = "max"


@dataclass(frozen=True)
class Min:
    name = "min"


@dataclass(frozen=True)
class WeightedAvg:
    w1: float = 0.5
    name = "weighted"

    def __post_init__(self):
        if not 0.0 < self.w1 < 1.0:
            raise InputError(f"weight w1 must lie in (0, 1), got {self.w1}")


@dataclass(frozen=True)
class Sum:
    name = "sum"


@dataclass(frozen=True)
class Product:
    name = "product"


StatisticKind = Union[Max, Min, WeightedAvg, Sum, Product]


@dataclass(frozen=True)
class StatisticValue:
    kind: StatisticKind
    value: float
    m: int
    n: int


def statistic_from_name(name: str, w1: float = 0.5) -> StatisticKind:
    key = name.strip().lower()
    table = {"max": Max, "min": Min, "sum": Sum, "product": Product}
    if key in table:
        return table[key]()
    if key in ("weighted", "weightedavg", "weighted_avg"):
        return WeightedAvg(w1)
    raise InputError(f"unknown statistic {name!r}; choose max, min, weighted, sum or product")


def statistic_values(q_fg, q_gf, m: int, n: int, kind: StatisticKind) -> np.ndarray:
    """Vectorized statistic over arrays of (q_fg, q_gf) for fixed sizes m, n."""
    q1 = np.asarray(q_fg, dtype=float)
    q2 = np.asarray(q_gf, dtype=float)
    if isinstance(kind, Sum):
        return -(m * n / (m + n)) * (q1 + q2 - 1.0)
    if isinstance(kind, Product):
        return -(m * n / (m + n)) * (q1 * q2 - 0.25)
    var = (1.0 / m + 1.0 / n) / 12.0
    if isinstance(kind, Max):
        return np.maximum((q1 - 0.5) ** 2, (q2 - 0.5) ** 2) / var
    if isinstance(kind, WeightedAvg):
        return (kind.w1 * (q1 - 0.5) ** 2 + (1.0 - kind.w1) * (q2 - 0.5) ** 2) / var
    if isinstance(kind, Min):
        return -np.minimum(q1 - 0.5, q2 - 0.5) / np.sqrt(var)
    raise TypeError(f"unsupported statistic {kind!r}")


def evaluate_statistic(q: QPair, kind: StatisticKind) -> StatisticValue:
    """Evaluate one statistic on a :class:`QPair`.

    Examples
    --------
    >>> v = evaluate_statistic(QPair(0.0, 0.0, 2, 1), Sum())
    >>> round(v.value, 6)
    0.666667
    """
    if q.m < 1 or q.n < 1:
        raise InputError(f"sample sizes must be positive, got m={q.m}, n={q.n}")
    for name, val in (("q_fg", q.q_fg), ("q_gf", q.q_gf)):
        if not 0.0 <= val <= 1.0:
            raise InputError(f"{name}={val} lies outside [0, 1]")
    value = float(statistic_values(q.q_fg, q.q_gf, q.m, q.n, kind))
    return StatisticValue(kind=kind, value=value, m=q.m, n=q.n)


def condition_cs_holds(q: QPair, q_plus: float) -> bool:
    """True when ``q_fg + q_gf <= q_plus`` (the mean-shift regime).

    In this regime the Sum and Product statistics are asymptotically more
    powerful than Max.
    """
    if not 0.0 <= q_plus < 1.0:
        raise InvalidQPlus(f"q_plus must lie in [0, 1), got {q_plus}")
    return bool(q.q_fg + q.q_gf <= q_plus)
