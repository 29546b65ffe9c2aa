"""q-shifted factorials, basic hypergeometric series, and the
very-well-poised balanced 10-phi-9 machinery: the function phi, the
complementary pair Phi, and the three-term contiguous-relation residual.

The very-well-poised prefactor ratio is always evaluated through the
square-root-free identity (1 - a q^{2n})/(1 - a); no complex square
root of the base parameter is ever taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from mpmath import mpc, mpf

from .context import QContext, SeriesResult, Terminated, combine_tails, to_scalar
from .errors import (
    BalanceViolated,
    DegenerateParameters,
    Divergent,
    MaxTermsExceeded,
    ZeroDenominator,
)

# consecutive growing terms before a nonterminating series is declared
# divergent; generous because complementary-pair series at reciprocal
# parameter points legitimately grow before their geometric decay sets in
_DIVERGENCE_RUN = 40


def qpoch(a, ctx: QContext, n: int) -> mpc:
    """Finite q-shifted factorial: product of (1 - a q^j), j = 0..n-1."""
    if n < 0:
        raise ValueError(f"qpoch requires n >= 0, got {n}")
    with ctx.workprec():
        a = ctx.scalar(a)
        p = mpc(1)
        ak = a
        for _ in range(n):
            p *= 1 - ak
            ak *= ctx.q
        return p


def qpoch_inf(a, ctx: QContext) -> SeriesResult:
    """Infinite q-shifted factorial, truncated once the remaining factors
    are within series_tol of 1 for ctx.tail_run consecutive indices."""
    with ctx.workprec():
        a = ctx.scalar(a)
        q = ctx.q
        p = mpc(1)
        ak = a
        small_run = 0
        for j in range(1, ctx.max_terms + 1):
            f = 1 - ak
            if abs(f) <= ctx.zero_eps * (1 + abs(ak)):
                # a = q^{-m}: the whole product is exactly zero
                return SeriesResult(mpc(0), j, mpf(0), Terminated.exact_termination)
            p *= f
            ak *= q
            if abs(ak) < ctx.series_tol:
                small_run += 1
                if small_run >= ctx.tail_run:
                    absq = abs(q)
                    tail = abs(ak) / (1 - absq)
                    return SeriesResult(p, j, tail, Terminated.tolerance_met)
            else:
                small_run = 0
        raise MaxTermsExceeded(
            f"qpoch_inf({a}) did not converge within {ctx.max_terms} factors"
        )


def qpoch_multi(args: Sequence, ctx: QContext, n) -> mpc:
    """Product of q-shifted factorials over a parameter list.

    ``n`` may be a nonnegative integer or the string/float infinity,
    selecting the infinite product for every entry.
    """
    if not args:
        raise ValueError("qpoch_multi requires a nonempty parameter list")
    with ctx.workprec():
        if n == math.inf or n == "inf":
            p = mpc(1)
            for a in args:
                p *= qpoch_inf(a, ctx).value
            return p
        p = mpc(1)
        for a in args:
            p *= qpoch(a, ctx, int(n))
        return p


def qpoch_inf_ratio(nums: Sequence, dens: Sequence, ctx: QContext) -> SeriesResult:
    """prod (n_i)_inf / prod (d_j)_inf with per-factor tail budgeting.

    Raises ZeroDenominator if any denominator factor vanishes.
    """
    with ctx.workprec():
        tails = []
        p = mpc(1)
        for a in nums:
            r = qpoch_inf(a, ctx)
            p *= r.value
            tails.append(r.tail_estimate)
        for b in dens:
            r = qpoch_inf(b, ctx)
            if r.value == 0:
                raise ZeroDenominator(
                    f"infinite Pochhammer ({to_scalar(b)})_inf vanishes in a denominator"
                )
            p /= r.value
            tails.append(r.tail_estimate)
        return SeriesResult(p, 0, combine_tails(*tails), Terminated.tolerance_met)


def _sum_by_ratio(first_term, ratio_factors, ctx: QContext, label: str) -> SeriesResult:
    """Sum a series from its term-ratio factorization.

    ``ratio_factors(k)`` yields (numerator_factors, denominator_factors,
    multiplier) whose combined product is term_{k+1}/term_k. Exact
    termination (a numerator Pochhammer factor hitting zero) and
    vanishing denominators are detected per factor rather than through a
    rounded quotient; the multiplier (the series argument) carries no
    termination semantics.
    """
    t = first_term
    total = t
    small_run = 0
    growth_run = 0
    for k in range(ctx.max_terms):
        num_fs, den_fs, mult = ratio_factors(k)
        ratio = mpc(1)
        terminated = False
        for f in num_fs:
            if abs(f) <= ctx.zero_eps * 2:
                terminated = True
                break
            ratio *= f
        if terminated:
            return SeriesResult(total, k + 1, mpf(0), Terminated.exact_termination)
        for f in den_fs:
            if abs(f) <= ctx.zero_eps * 2:
                raise ZeroDenominator(
                    f"{label}: denominator factor vanishes at term {k + 1}"
                )
            ratio /= f
        ratio *= mult
        t = t * ratio
        if t == 0:
            # argument z = 0
            return SeriesResult(total, k + 1, mpf(0), Terminated.tolerance_met)
        total += t
        rel = abs(t) / max(abs(total), mpf(1) * ctx.eps)
        if rel <= ctx.series_tol:
            small_run += 1
            if small_run >= ctx.tail_run:
                r = abs(ratio)
                tail = rel * r / (1 - r) if r < 1 else rel * ctx.tail_run
                return SeriesResult(total, k + 2, tail, Terminated.tolerance_met)
        else:
            small_run = 0
        if abs(ratio) >= 1:
            growth_run += 1
            if growth_run >= _DIVERGENCE_RUN:
                raise Divergent(
                    f"{label}: term ratio magnitude >= 1 for "
                    f"{_DIVERGENCE_RUN} consecutive terms"
                )
        else:
            growth_run = 0
    raise MaxTermsExceeded(f"{label}: no convergence within {ctx.max_terms} terms")


def phi_series(nums: Sequence, dens: Sequence, z, ctx: QContext) -> SeriesResult:
    """Generic basic hypergeometric series sum_n (nums)_n / (dens, q)_n z^n.

    The implicit (q)_n factor of the standard definition is supplied
    internally; callers list only the r+1 numerator and r denominator
    parameters.
    """
    with ctx.workprec():
        a_s = [ctx.scalar(a) for a in nums]
        b_s = [ctx.scalar(b) for b in dens]
        z = ctx.scalar(z)
        q = ctx.q
        qa = [mpc(x) for x in a_s]
        qb = [mpc(x) for x in b_s]
        qpow = [mpc(q)]  # q^{k+1}

        def factors(k):
            nfs = [1 - x for x in qa]
            dfs = [1 - x for x in qb] + [1 - qpow[0]]
            for i in range(len(qa)):
                qa[i] *= q
            for i in range(len(qb)):
                qb[i] *= q
            qpow[0] *= q
            return nfs, dfs, z

        return _sum_by_ratio(mpc(1), factors, ctx, "phi_series")


def vwp_phi(a, params: Sequence, z, ctx: QContext) -> SeriesResult:
    """Very-well-poised series over a base ``a`` and free parameters.

    Evaluates sum_n [(1 - a q^{2n})/(1 - a)] (a)_n prod (p_j)_n /
    [(q)_n prod (aq/p_j)_n] z^n, which is the r+1 phi r very-well-poised
    series with the +-sqrt(a) pairs already simplified away.
    """
    with ctx.workprec():
        a = ctx.scalar(a)
        ps = [ctx.scalar(p) for p in params]
        z = ctx.scalar(z)
        q = ctx.q
        if abs(1 - a) <= ctx.zero_eps * 2:
            raise DegenerateParameters("very-well-poised base a = 1")
        dual = [a * q / p if p != 0 else None for p in ps]
        for d in dual:
            if d is None:
                raise DegenerateParameters("very-well-poised parameter equals 0")

        aq2k = [a]          # a q^{2k}
        aqk = [mpc(a)]      # a q^k
        qk1 = [mpc(q)]      # q^{k+1}
        pk = [mpc(p) for p in ps]     # p_j q^k
        dk = [mpc(d) for d in dual]   # (aq/p_j) q^k

        def factors(k):
            nfs = [1 - aq2k[0] * q * q, 1 - aqk[0]]
            nfs += [1 - x for x in pk]
            dfs = [1 - aq2k[0], 1 - qk1[0]]
            dfs += [1 - x for x in dk]
            aq2k[0] *= q * q
            aqk[0] *= q
            qk1[0] *= q
            for i in range(len(pk)):
                pk[i] *= q
                dk[i] *= q
            return nfs, dfs, z

        return _sum_by_ratio(mpc(1), factors, ctx, "vwp_phi")


# -- the 10-phi-9 layer -------------------------------------------------

PARAM_NAMES = ("b", "c", "d", "e", "f", "g", "h")


@dataclass(frozen=True)
class ParameterSet10:
    """The eight parameters (a; b,...,h) of a balanced very-well-poised
    10-phi-9, subject to b c d e f g h = a^3 q^2."""

    a: mpc
    b: mpc
    c: mpc
    d: mpc
    e: mpc
    f: mpc
    g: mpc
    h: mpc

    @classmethod
    def solve_for_h(cls, a, b, c, d, e, f, g, ctx: QContext) -> "ParameterSet10":
        """Construct with h chosen so the balance condition holds exactly."""
        with ctx.workprec():
            vals = [ctx.scalar(x) for x in (a, b, c, d, e, f, g)]
            a_, b_, c_, d_, e_, f_, g_ = vals
            denom = b_ * c_ * d_ * e_ * f_ * g_
            if denom == 0:
                raise DegenerateParameters("cannot solve for h: b..g product is 0")
            h_ = a_ ** 3 * ctx.q ** 2 / denom
            return cls(a_, b_, c_, d_, e_, f_, g_, h_)

    def validate(self, ctx: QContext) -> None:
        with ctx.workprec():
            target = self.a ** 3 * ctx.q ** 2
            prod = self.b * self.c * self.d * self.e * self.f * self.g * self.h
            scale = max(abs(target), mpf(ctx.eps))
            if abs(prod - target) > ctx.identity_tol * scale:
                raise BalanceViolated(
                    f"bcdefgh - a^3 q^2 relative deviation "
                    f"{abs(prod - target) / scale} exceeds {ctx.identity_tol}"
                )

    def others(self, distinguished: str):
        """The six non-distinguished parameters, in slot order."""
        return [getattr(self, n) for n in PARAM_NAMES if n != distinguished]

    def shifted(self, ctx: QContext, **moves) -> "ParameterSet10":
        """Multiply named parameter slots by powers of q, e.g. g=-1, h=+1."""
        with ctx.workprec():
            kw = {n: getattr(self, n) for n in ("a",) + PARAM_NAMES}
            for name, k in moves.items():
                kw[name] = kw[name] * ctx.q ** k
            return ParameterSet10(**kw)


def vwp_balanced_10_9(p: ParameterSet10, ctx: QContext) -> SeriesResult:
    """phi(a; b,...,h; q): the balanced very-well-poised 10-phi-9."""
    p.validate(ctx)
    with ctx.workprec():
        return vwp_phi(p.a, [p.b, p.c, p.d, p.e, p.f, p.g, p.h], ctx.q, ctx)


def complementary_pair(p: ParameterSet10, distinguished: str,
                       ctx: QContext) -> SeriesResult:
    """Phi^{(x)}(a; b,...,h; q): phi plus the 14-factor product ratio times
    the partner 10-phi-9 at the reflected parameter point.

    ``distinguished`` names one of the slots b..h.
    """
    if distinguished not in PARAM_NAMES:
        raise ValueError(f"distinguished must be one of {PARAM_NAMES}")
    p.validate(ctx)
    with ctx.workprec():
        a = p.a
        q = ctx.q
        beta = getattr(p, distinguished)
        gammas = p.others(distinguished)

        first = vwp_phi(a, [p.b, p.c, p.d, p.e, p.f, p.g, p.h], q, ctx)

        nums = [a * q, beta / a] + gammas + [beta * q / g_ for g_ in gammas]
        dens = ([beta ** 2 * q / a, a / beta]
                + [a * q / g_ for g_ in gammas]
                + [beta * g_ / a for g_ in gammas])
        pref = qpoch_inf_ratio(nums, dens, ctx)

        if pref.value == 0:
            # a numerator factor vanished: the partner term drops out
            return SeriesResult(first.value, first.terms_used,
                                first.tail_estimate, first.terminated)

        partner = vwp_phi(beta ** 2 / a,
                          [beta] + [beta * g_ / a for g_ in gammas], q, ctx)
        value = first.value + pref.value * partner.value
        tail = combine_tails(
            first.tail_estimate * abs(first.value),
            pref.tail_estimate * abs(pref.value * partner.value),
            partner.tail_estimate * abs(pref.value * partner.value),
        ) / max(abs(value), mpf(ctx.eps))
        return SeriesResult(value, first.terms_used + partner.terms_used,
                            tail, Terminated.tolerance_met)


def contiguous_residual(p: ParameterSet10, distinguished: str,
                        ctx: QContext) -> mpf:
    """Relative residual of the three-term contiguous relation linking
    Phi, Phi(g-, h+), and Phi(h-, g+).

    Returns |T1 - T2 - T3| / max(|T1|, |T2|, |T3|) where the T_i are the
    three products appearing in the relation.
    """
    if distinguished not in ("b", "c", "d", "e", "f"):
        raise ValueError("distinguished parameter must be one of b..f for the "
                         "contiguous relation (g and h are the shifted slots)")
    with ctx.workprec():
        a, b, c, d, e, f, g, h = (p.a, p.b, p.c, p.d, p.e, p.f, p.g, p.h)
        q = ctx.q
        if abs(g - h) <= ctx.zero_eps * (abs(g) + abs(h)):
            raise DegenerateParameters("g = h collapses the contiguous shifts")
        for name, val in (("1 - hq/g", 1 - h * q / g), ("1 - gq/h", 1 - g * q / h)):
            if abs(val) <= ctx.zero_eps * 2:
                raise DegenerateParameters(f"{name} vanishes")

        phi0 = complementary_pair(p, distinguished, ctx).value
        phi_gm_hp = complementary_pair(p.shifted(ctx, g=-1, h=+1),
                                       distinguished, ctx).value
        phi_hm_gp = complementary_pair(p.shifted(ctx, h=-1, g=+1),
                                       distinguished, ctx).value

        small = (b, c, d, e, f)
        coef1 = (g * (1 - h) * (1 - a / h) * (1 - a * q / h)
                 / (1 - h * q / g))
        for x in small:
            coef1 *= 1 - a * q / (g * x)
        coef2 = (h * (1 - g) * (1 - a / g) * (1 - a * q / g)
                 / (1 - g * q / h))
        for x in small:
            coef2 *= 1 - a * q / (h * x)
        coef3 = (a * q / h) * (1 - h / g) * (1 - g * h / (a * q))
        for x in small:
            coef3 *= 1 - x

        t1 = coef1 * (phi_gm_hp - phi0)
        t2 = coef2 * (phi_hm_gp - phi0)
        t3 = coef3 * phi0
        scale = max(abs(t1), abs(t2), abs(t3))
        if scale == 0:
            return mpf(0)
        return abs(t1 - t2 - t3) / scale
