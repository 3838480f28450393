"""Small report records shared by the verification routines."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

# slack applied to "lhs <= rhs" comparisons so that exact equalities survive rounding
REL_SLACK = 1e-12
ABS_SLACK = 1e-14


@dataclass(frozen=True)
class InequalityCheck:
    """One evaluated inequality ``lhs <= rhs``.

    ``constant`` is the multiplicative constant used to build ``rhs`` (NaN
    when none applies) and ``margin = rhs - lhs``.
    """

    name: str
    lhs: float
    rhs: float
    constant: float = math.nan
    passed: bool = True

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def as_row(self) -> dict:
        row = asdict(self)
        row["margin"] = self.margin
        return row


def leq(name: str, lhs: float, rhs: float, constant: float = math.nan,
        atol: float = ABS_SLACK, rtol: float = REL_SLACK) -> InequalityCheck:
    ok = bool(lhs <= rhs + atol + rtol * abs(rhs))
    return InequalityCheck(name, float(lhs), float(rhs), float(constant), ok)
