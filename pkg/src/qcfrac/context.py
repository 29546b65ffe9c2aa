"""Evaluation context: base q, precision, tolerances, scalar helpers.

All values are mpmath complex numbers (``mpc``); the context's
``precision_bits`` selects the mantissa size used while evaluating.
Operations are pure: they read the context, never mutate it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import mpmath
from mpmath import mp, mpc, mpf

from .errors import ConfigError

ScalarLike = Union[int, float, complex, str, mpf, mpc, tuple, list]

# Extra mantissa bits used internally so results round cleanly at the
# requested precision.
GUARD_BITS = 12


def to_scalar(x: ScalarLike, precision_bits: int = 53) -> mpc:
    """Convert a number, string, or (re, im) pair to an mpmath complex.

    Decimal strings are parsed at the target precision so parameter
    files round-trip without double-rounding through binary floats.
    """
    with mp.workprec(precision_bits + GUARD_BITS):
        if isinstance(x, (tuple, list)):
            if len(x) != 2:
                raise ConfigError(f"complex pair must have two entries, got {x!r}")
            return mpc(mpf(x[0]), mpf(x[1]))
        if isinstance(x, str):
            return mpc(mpf(x))
        if isinstance(x, complex):
            return mpc(x.real, x.imag)
        return mpc(x)


def scalar_to_json(x: mpc, digits: int = 30):
    """Serialize a scalar as a decimal string (real) or [re, im] pair."""
    re_s = mpmath.nstr(x.real, digits)
    if x.imag == 0:
        return re_s
    return [re_s, mpmath.nstr(x.imag, digits)]


@dataclass(frozen=True)
class QContext:
    """Base q plus the precision and tolerance bundle for all evaluations.

    Attributes
    ----------
    q : mpc
        The base; must satisfy |q| < 1 strictly (q = 0 is allowed).
    series_tol : float
        Relative tail bound used to truncate infinite series/products.
    identity_tol : float
        Relative tolerance for identity checks (residuals).
    max_terms : int
        Term budget for any single series or product.
    precision_bits : int
        Mantissa size of the working arithmetic.
    """

    q: mpc
    series_tol: float = 1e-13
    identity_tol: float = 1e-8
    max_terms: int = 4000
    precision_bits: int = 53
    # consecutive small terms required before truncating
    tail_run: int = 3

    def __post_init__(self):
        object.__setattr__(self, "q", to_scalar(self.q, self.precision_bits))
        if not (abs(self.q) < 1):
            raise ConfigError(f"|q| must be < 1, got |q| = {abs(self.q)}")
        if not (0 < self.series_tol <= self.identity_tol < 1):
            raise ConfigError(
                "tolerances must satisfy 0 < series_tol <= identity_tol < 1"
            )
        if self.max_terms < 1:
            raise ConfigError("max_terms must be >= 1")
        if self.precision_bits < 24:
            raise ConfigError("precision_bits must be at least 24")

    @property
    def eps(self) -> mpf:
        """Unit roundoff of the working precision."""
        return mpf(2) ** (-self.precision_bits)

    @property
    def zero_eps(self) -> mpf:
        """Threshold below which a factor |1 - x| counts as an exact zero."""
        return mpf(2) ** (8 - self.precision_bits)

    def workprec(self):
        """Context manager raising mpmath's precision for an evaluation."""
        return mp.workprec(self.precision_bits + GUARD_BITS)

    def scalar(self, x: ScalarLike) -> mpc:
        return to_scalar(x, self.precision_bits)

    def with_precision(self, precision_bits: int, series_tol=None,
                       identity_tol=None) -> "QContext":
        """Clone at a different precision (for escalation cross-checks)."""
        return QContext(
            q=self.q,
            series_tol=self.series_tol if series_tol is None else series_tol,
            identity_tol=self.identity_tol if identity_tol is None else identity_tol,
            max_terms=self.max_terms,
            precision_bits=precision_bits,
            tail_run=self.tail_run,
        )


class Terminated(enum.Enum):
    """Why a series or product stopped."""

    exact_termination = "exact_termination"
    tolerance_met = "tolerance_met"
    max_terms_hit = "max_terms_hit"


@dataclass
class SeriesResult:
    """A computed value plus truncation diagnostics."""

    value: mpc
    terms_used: int
    tail_estimate: mpf
    terminated: Terminated

    def __complex__(self):
        return complex(self.value)


def combine_tails(*tails) -> mpf:
    """First-order accumulation of relative tail estimates of factors."""
    total = mpf(0)
    for t in tails:
        total += abs(t)
    return total
