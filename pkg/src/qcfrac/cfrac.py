"""Continued-fraction evaluation 1/(a0 - b1/(a1 - b2/(...))) by forward
convergents and bottom-up nesting, the Pincherle value from the minimal
solution, and the closed forms of Theorem 1, Corollary 2, and Corollary 3.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from mpmath import mpc, mpf

from .context import QContext, SeriesResult, combine_tails
from .errors import (
    DegenerateParameters,
    Divergent,
    NonConvergent,
    ZeroDenominator,
    ZeroPivot,
)
from .qseries import qpoch_inf_ratio, vwp_phi
from .recurrence import MassonParams, coeffs, limit_W1, limit_W2, minimal_solution


class CFMethod(enum.Enum):
    forward_convergents = "forward_convergents"
    bottom_up = "bottom_up"


class CFCoefficients:
    """Provider of the partial coefficients (a_n, b_n), n >= 0.

    b_n must be nonzero for n >= 1 on the evaluated range unless the
    fraction terminates there (a zero b_n ends the fraction exactly).
    """

    def a(self, n: int) -> mpc:
        raise NotImplementedError

    def b(self, n: int) -> mpc:
        raise NotImplementedError


class MassonCF(CFCoefficients):
    """Coefficient stream of the 10-phi-9 difference equation."""

    def __init__(self, p: MassonParams):
        self.p = p
        self._cache = {}

    def _coeffs(self, n):
        if n not in self._cache:
            self._cache[n] = coeffs(self.p, n)
        return self._cache[n]

    def a(self, n):
        return self._coeffs(n).a_n

    def b(self, n):
        return self._coeffs(n).b_n


@dataclass(frozen=True)
class Corollary3Params:
    """Reduced parameter set (a, b, c, d, e) of the 8-phi-7 limit case."""

    a: mpc
    b: mpc
    c: mpc
    d: mpc
    e: mpc
    ctx: QContext

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e"):
            object.__setattr__(self, name, self.ctx.scalar(getattr(self, name)))
        if self.b * self.c * self.d * self.e == 0:
            raise DegenerateParameters("bcde must be nonzero")

    @property
    def lower(self):
        return (self.b, self.c, self.d, self.e)


def corollary3_coeffs(p: Corollary3Params, n: int):
    """The (c_n, d_n) coefficient pair of the 8-phi-7 limit fraction."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a = p.a
        bcde = p.b * p.c * p.d * p.e
        piv = 1 - a * q ** (n + 1)
        if abs(piv) <= ctx.zero_eps * 2:
            raise DegenerateParameters("1 - a q^{n+1} vanishes")
        t1 = mpc(-1)
        for x in p.lower:
            t1 *= 1 - (a / x) * q ** (n + 1)
        t1 /= piv
        t2 = -q * (1 - q ** n) * (1 - a * q ** n) * (1 - a ** 2 * q ** (n + 1) / bcde)
        t3 = a ** 2 * q ** (2 * n + 2) / bcde
        for x in p.lower:
            t3 *= 1 - x
        t3 /= piv
        c_n = t1 + t2 + t3
        d_n = q * (1 - q ** n) * (1 - a ** 2 * q ** (n + 1) / bcde)
        for x in p.lower:
            d_n *= 1 - (a / x) * q ** n
        return c_n, d_n


class Corollary3CF(CFCoefficients):
    """Coefficient stream (c_n, d_n) of the 8-phi-7 limit fraction."""

    def __init__(self, p: Corollary3Params):
        self.p = p
        self._cache = {}

    def _pair(self, n):
        if n not in self._cache:
            self._cache[n] = corollary3_coeffs(self.p, n)
        return self._cache[n]

    def a(self, n):
        return self._pair(n)[0]

    def b(self, n):
        return self._pair(n)[1]


class TableCF(CFCoefficients):
    """User-supplied coefficient tables (or callables)."""

    def __init__(self, a, b):
        self._a = a
        self._b = b

    @staticmethod
    def _get(src, n):
        return src(n) if callable(src) else src[n]

    def a(self, n):
        return self._get(self._a, n)

    def b(self, n):
        return self._get(self._b, n)


@dataclass
class ConvergentTrace:
    """Convergent sequence of 1/(a0 - K(b_n / a_n)) with metadata."""

    depth: int
    convergents: List[mpc]
    final: mpc
    est_error: mpf
    method: CFMethod
    terminated_exactly: bool = False


def _forward(cf: CFCoefficients, depth: int, ctx: QContext) -> ConvergentTrace:
    # Euler-Wallis recurrences for value = 1/(a0 - b1/(a1 - ...)):
    # numerator and denominator both satisfy y_{n+1} = a_{n+1} y_n - b_{n+1} y_{n-1}
    q = ctx.q
    a0 = ctx.scalar(cf.a(0))
    num_prev, num = mpc(0), mpc(1)      # N_{-1}, N_0
    den_prev, den = mpc(1), a0          # D_{-1}, D_0
    convergents = []
    small_run = 0
    exact = False
    used = 0
    if abs(den) == 0:
        raise ZeroPivot(0)
    convergents.append(num / den)
    for n in range(1, depth + 1):
        an = ctx.scalar(cf.a(n))
        bn = ctx.scalar(cf.b(n))
        num, num_prev = an * num - bn * num_prev, num
        den, den_prev = an * den - bn * den_prev, den
        used = n
        if abs(den) == 0:
            raise ZeroPivot(n)
        convergents.append(num / den)
        if bn == 0:
            exact = True
            break
        diff = abs(convergents[-1] - convergents[-2])
        if diff <= ctx.series_tol * max(mpf(1), abs(convergents[-1])):
            small_run += 1
            if small_run >= 2:
                break
        else:
            small_run = 0
    final = convergents[-1]
    if exact:
        est = mpf(0)
    elif len(convergents) >= 2:
        est = abs(convergents[-1] - convergents[-2]) / max(mpf(1), abs(final))
    else:
        est = mpf("inf")
    return ConvergentTrace(depth=used, convergents=convergents, final=final,
                           est_error=est, method=CFMethod.forward_convergents,
                           terminated_exactly=exact)


def _bottom_up(cf: CFCoefficients, depth: int, ctx: QContext) -> ConvergentTrace:
    tail = mpc(0)
    for n in range(depth, 0, -1):
        den = ctx.scalar(cf.a(n)) - tail
        if abs(den) == 0:
            raise ZeroPivot(n)
        tail = ctx.scalar(cf.b(n)) / den
    den = ctx.scalar(cf.a(0)) - tail
    if abs(den) == 0:
        raise ZeroPivot(0)
    final = 1 / den
    return ConvergentTrace(depth=depth, convergents=[final], final=final,
                           est_error=mpf(0), method=CFMethod.bottom_up)


def eval_cf(cf: CFCoefficients, depth: int, ctx: QContext,
            method: CFMethod = CFMethod.forward_convergents) -> ConvergentTrace:
    """Evaluate the continued fraction truncated at ``depth``.

    Forward convergents stop early once successive convergents differ by
    less than series_tol relatively; bottom-up nests from a zero tail at
    the full depth and reports the spread against a depth-5 shallower
    re-evaluation as its error estimate.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    with ctx.workprec():
        if method == CFMethod.forward_convergents:
            trace = _forward(cf, depth, ctx)
            if (not trace.terminated_exactly and trace.depth == depth
                    and len(trace.convergents) >= 12):
                diffs = [abs(u - v) for u, v in
                         zip(trace.convergents[-11:], trace.convergents[-10:])]
                if (trace.est_error > ctx.series_tol * 100
                        and all(d2 >= d1 for d1, d2 in zip(diffs, diffs[1:]))):
                    raise NonConvergent(
                        f"convergents still oscillating at depth {depth}"
                    )
            return trace
        trace = _bottom_up(cf, depth, ctx)
        if depth > 5:
            other = _bottom_up(cf, depth - 5, ctx)
            trace.est_error = abs(trace.final - other.final) / max(
                mpf(1), abs(trace.final))
        return trace


def pincherle_value(p: MassonParams) -> mpc:
    """Continued-fraction value X0^(min) / (a_0 X0^(min) - X1^(min))."""
    ctx = p.ctx
    with ctx.workprec():
        w1 = limit_W1(p)
        w2 = limit_W2(p)
        x0 = minimal_solution(p, 0, w1, w2).value
        x1 = minimal_solution(p, 1, w1, w2).value
        a0 = coeffs(p, 0).a_n
        den = a0 * x0 - x1
        if abs(den) <= ctx.zero_eps * max(abs(a0 * x0), abs(x1), mpf(1)):
            raise DegenerateParameters("a0 X0^(min) - X1^(min) vanishes")
        return x0 / den


def _pi_factor(p: MassonParams, n: int) -> SeriesResult:
    """The Pi_n infinite-product ratio of Theorem 1 (n = 0 or 1)."""
    ctx = p.ctx
    q = ctx.q
    a, s = p.a, p.s
    nums = ([q ** 2 / a] + [q / x for x in p.lower]
            + [q ** (3 - n) / s, a * q ** (n - 1), s * q ** (2 * n - 2)]
            + [x * q ** n for x in p.lower])
    dens = ([a * q ** (2 * n), q ** (1 - n) / a]
            + [x * q / a for x in p.lower]
            + [a * q ** 2 / s, s * q ** (n - 1) / a]
            + [a * q ** n / x for x in p.lower])
    return qpoch_inf_ratio(nums, dens, ctx)


def theorem1_rhs(p: MassonParams) -> mpc:
    """Closed form of the continued-fraction value at a nonterminating
    interior point; every component is evaluated and must individually
    converge."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a, s = p.a, p.s
        den = q * (1 - s / (a * q))
        for x in p.lower:
            den *= 1 - a / x
        if abs(den) <= ctx.zero_eps * 2:
            raise ZeroDenominator("Theorem-1 prefactor denominator vanishes")
        pref = (1 - s / q) * (1 - a / q) / den

        phi_low = vwp_phi(q / a,
                          [q, q ** 2 / s] + [q / x for x in p.lower], q, ctx)
        phi_high = vwp_phi(a * q,
                           [q, a * q ** 2 / s] + [a * q / x for x in p.lower],
                           q, ctx)
        ratio = qpoch_inf_ratio(
            [q, a, a * q] + [x * s / (a * q) for x in p.lower],
            [s / q, s / a, s / (a * q)] + [a * q / x for x in p.lower],
            ctx,
        )
        w1 = limit_W1(p)
        w2 = limit_W2(p)
        if w1.value == 0:
            raise ZeroDenominator("W1 vanishes in Theorem-1 bracket")
        pi0 = _pi_factor(p, 0)
        pi1 = _pi_factor(p, 1)
        if abs(1 + pi0.value) <= ctx.zero_eps * 2:
            raise ZeroDenominator("1 + Pi_0 vanishes")
        # the 8-phi-7 ratio enters as W2/W1: expanding the minimal solution
        # at n = 0 through the Pincherle quotient gives the bracket
        # -X0^(min)/(W1 * pref2(0)) = phi_low + Pi_1 phi_high - R W2/W1,
        # which is also what the continued-fraction convergents confirm
        bracket = (phi_low.value + pi1.value * phi_high.value
                   - ratio.value * w2.value / w1.value)
        return pref * bracket / (1 + pi0.value)


TERMINATING_SLOTS = ("b", "c", "d", "e", "f")


def masson_terminating(a, b, c, d, e, q_or_ctx, N: int, which: str = "f",
                       **ctx_kwargs) -> MassonParams:
    """Build MassonParams with the selected slot set to a q^{N+1} exactly,
    so aq/x = q^{-N} and the fraction terminates at depth N+1.

    The five supplied values fill the remaining lower slots in order.
    """
    if which not in TERMINATING_SLOTS:
        raise ValueError(f"which must be one of {TERMINATING_SLOTS}")
    ctx = q_or_ctx if isinstance(q_or_ctx, QContext) else \
        QContext(q=q_or_ctx, **ctx_kwargs)
    with ctx.workprec():
        a = ctx.scalar(a)
        x = a * ctx.q ** (N + 1)
        free = [ctx.scalar(v) for v in (b, c, d, e)]
        vals = {}
        it = iter(free)
        for name in TERMINATING_SLOTS:
            vals[name] = x if name == which else next(it)
        return MassonParams(a=a, ctx=ctx, **vals)


def entry40_params(a, b, c, d, q_or_ctx, N: int, **ctx_kwargs) -> MassonParams:
    """The s = q^2 terminating family (the q-analogue of Entry 40):
    f = a q^{N+1} and e solved so that a^3 q^3/(bcdef) = q^2 exactly."""
    ctx = q_or_ctx if isinstance(q_or_ctx, QContext) else \
        QContext(q=q_or_ctx, **ctx_kwargs)
    with ctx.workprec():
        q = ctx.q
        a, b, c, d = (ctx.scalar(v) for v in (a, b, c, d))
        f = a * q ** (N + 1)
        e = a ** 3 * q ** 3 / (b * c * d * f * q ** 2)
        return MassonParams(a, b, c, d, e, f, ctx)


def corollary2_rhs(p: MassonParams, which: str, N: int) -> mpc:
    """Closed form for the terminating fraction: requires aq/x = q^{-N}
    exactly for the selected lower slot x."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a, s = p.a, p.s
        x = getattr(p, which)
        if abs(x - a * q ** (N + 1)) > ctx.zero_eps * 16 * max(abs(x), mpf(1)):
            raise DegenerateParameters(
                f"slot {which} is not a q^{{N+1}} for N={N}; "
                "use masson_terminating to construct terminating points"
            )
        den = s
        for y in p.lower:
            den *= 1 - y
        if abs(den) <= ctx.zero_eps * 2:
            raise ZeroDenominator("Corollary-2 prefactor denominator vanishes")
        phi = vwp_phi(a * q,
                      [q, a * q ** 2 / s] + [a * q / y for y in p.lower],
                      q, ctx)
        return a * q * (1 - a * q) / den * phi.value


def corollary3_bridge(p: Corollary3Params, N: int) -> mpc:
    """Renormalized terminating value that converges to corollary3_rhs.

    Sign/normalization bridge between the (a_n, b_n) stream of the
    f = a q^{N+1} family and the reduced (c_n, d_n) stream: the two are
    related by the equivalence transformation rho_n = c_n / a_n (for
    large N, a_n rho_n -> c_n and rho_n rho_{n-1} b_n -> d_n), under
    which a fraction value V maps to V / rho_0.  The returned quantity

        a_0^{(N)} * corollary2_rhs / c_0

    therefore depends only on the head coefficient c_0 and the
    equivalence invariants b_n / (a_n a_{n-1}), and converges to
    corollary3_rhs as N grows.

    Note that the limit of these terminating values is NOT the value the
    infinite (c_n, d_n) fraction converges to: the terminating solutions
    approach the dominant (not the minimal) solution of the limit
    recurrence, so eval_cf over Corollary3CF settles on a different
    number.  This function is the bridge that does recover the closed
    form.
    """
    ctx = p.ctx
    with ctx.workprec():
        mp = masson_terminating(p.a, p.b, p.c, p.d, p.e, ctx, N, which="f")
        v = corollary2_rhs(mp, which="f", N=N)
        a0 = coeffs(mp, 0).a_n
        c0, _ = corollary3_coeffs(p, 0)
        if abs(c0) == 0:
            raise ZeroDenominator("c_0 vanishes in the corollary-3 bridge")
        return a0 * v / c0


def corollary3_rhs(p: Corollary3Params) -> mpc:
    """Closed form for the (c_n, d_n) fraction: an 8-phi-7 with argument
    bcde/(a^2 q), convergent only when that argument has modulus < 1."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a = p.a
        bcde = p.b * p.c * p.d * p.e
        z = bcde / (a ** 2 * q)
        if abs(z) >= 1:
            raise Divergent(f"Corollary-3 argument |bcde/(a^2 q)| = {abs(z)} >= 1")
        den = mpc(1)
        for x in p.lower:
            den *= 1 - x
        if abs(den) <= ctx.zero_eps * 2:
            raise ZeroDenominator("Corollary-3 prefactor denominator vanishes")
        phi = vwp_phi(a * q, [q] + [a * q / x for x in p.lower], z, ctx)
        return (bcde / (a ** 2 * q ** 2)) * (1 - a * q) / den * phi.value
