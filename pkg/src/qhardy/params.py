"""Numerical policy and the result carrier used by every truncated series."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NonConvergent, ParameterError


@dataclass(frozen=True)
class QParams:
    """The lattice base ``q`` plus the truncation policy.

    Parameters
    ----------
    q : float
        Base of the lattice ``{x q^k}``, strictly inside (0, 1).
    eps_tail : float
        Relative size below which a term counts as negligible.
    k_max : int
        Largest lattice index magnitude a single tail may reach.
    n_max_product : int
        Largest number of factors an infinite product may use.
    consecutive_small : int
        Number of consecutive negligible terms required to stop.
    """

    q: float
    eps_tail: float = 1e-14
    k_max: int = 100_000
    n_max_product: int = 100_000
    consecutive_small: int = 5

    def __post_init__(self):
        if not (isinstance(self.q, (int, float)) and 0.0 < self.q < 1.0):
            raise ParameterError(f"q must lie in (0,1), got {self.q!r}")
        if not self.eps_tail > 0:
            raise ParameterError("eps_tail must be positive")
        for name in ("k_max", "n_max_product", "consecutive_small"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be >= 1")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    def with_(self, **changes) -> "QParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series or product with its error estimate."""

    value: float
    abs_error: float
    terms_used: int
    converged: bool = True

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be non-negative")

    def checked(self) -> float:
        """Return ``value``, refusing to hand out an unconverged one."""
        if not self.converged:
            raise NonConvergent("series did not converge")
        return self.value

    def __float__(self):
        return self.checked()
