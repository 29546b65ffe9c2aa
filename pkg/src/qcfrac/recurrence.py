"""The three-term difference equation X_{n+1} - a_n X_n + b_n X_{n-1} = 0
obtained from the contiguous relation under h = q^{-n}, g = s q^{n-1},
its explicit solutions X^(1) and X^(2), their 8-phi-7 limits W1 and W2,
and the minimal solution W2 X^(1) - W1 X^(2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from mpmath import mpc, mpf

from .context import QContext, SeriesResult, Terminated, combine_tails
from .errors import DegenerateParameters, Divergent, MinimalityLost
from .qseries import (
    ParameterSet10,
    complementary_pair,
    qpoch_inf_ratio,
    vwp_phi,
)


@dataclass(frozen=True)
class MassonParams:
    """Parameters (a, b, c, d, e, f) of the difference equation, with the
    derived s = a^3 q^3 / (b c d e f) absorbing the balance condition."""

    a: mpc
    b: mpc
    c: mpc
    d: mpc
    e: mpc
    f: mpc
    ctx: QContext
    s: mpc = field(init=False)

    def __post_init__(self):
        ctx = self.ctx
        with ctx.workprec():
            for name in ("a", "b", "c", "d", "e", "f"):
                object.__setattr__(self, name, ctx.scalar(getattr(self, name)))
            prod = self.b * self.c * self.d * self.e * self.f
            if prod == 0:
                raise DegenerateParameters("bcdef must be nonzero")
            object.__setattr__(self, "s", self.a ** 3 * ctx.q ** 3 / prod)

    @property
    def lower(self):
        return (self.b, self.c, self.d, self.e, self.f)

    def with_precision(self, precision_bits: int) -> "MassonParams":
        return MassonParams(self.a, self.b, self.c, self.d, self.e, self.f,
                            self.ctx.with_precision(precision_bits))


@dataclass
class RecurrenceCoeffs:
    """Coefficients at index n: a_n = A_n + B_n + correction,
    b_n = A_{n-1} B_n."""

    n: int
    A_n: mpc
    B_n: mpc
    a_n: mpc
    b_n: mpc


def _check_nonzero(ctx: QContext, pairs):
    for name, val in pairs:
        if abs(val) <= ctx.zero_eps * 2:
            raise DegenerateParameters(f"denominator factor {name} vanishes")


def _A(p: MassonParams, n: int) -> mpc:
    # powers of q are combined through s so that n = -1 and q = 0 are safe
    ctx = p.ctx
    q = ctx.q
    a, s = p.a, p.s
    bcdef = p.b * p.c * p.d * p.e * p.f
    s_qnm1 = a ** 3 * q ** (n + 2) / bcdef          # s q^{n-1}
    s_aq_qn = a ** 2 * q ** (n + 2) / bcdef         # (s/aq) q^n
    s_q2n = a ** 3 * q ** (2 * n + 3) / bcdef       # s q^{2n}
    s_q2nm1 = a ** 3 * q ** (2 * n + 2) / bcdef     # s q^{2n-1}
    d2, d3 = 1 - s_q2nm1, 1 - a * q ** (n + 1)
    _check_nonzero(ctx, [("1 - s q^{2n-1}", d2), ("1 - a q^{n+1}", d3)])
    if n == -1:
        # (1 - s q^{n-1}) and (1 - s q^{2n}) coincide at n = -1; cancel
        # them exactly so A_{-1} (feeding b_0) stays defined at s = q^2
        num = 1 - s_aq_qn
    else:
        d1 = 1 - s_q2n
        _check_nonzero(ctx, [("1 - s q^{2n}", d1)])
        num = (1 - s_qnm1) * (1 - s_aq_qn) / d1
    for x in p.lower:
        num *= 1 - (a / x) * q ** (n + 1)
    return num / (d2 * d3)


def _B(p: MassonParams, n: int) -> mpc:
    ctx = p.ctx
    q = ctx.q
    a, s = p.a, p.s
    bcdef = p.b * p.c * p.d * p.e * p.f
    if n == 0:
        # the numerator factor (1 - q^n) is identically zero at n = 0,
        # independent of the parameters; B_0 = 0 by continuity even when
        # the (1 - s q^{2n-2}) denominator also vanishes (s = q^2 family)
        return mpc(0)
    s_q2nm1 = a ** 3 * q ** (2 * n + 2) / bcdef     # s q^{2n-1}
    s_q2nm2 = a ** 3 * q ** (2 * n + 1) / bcdef     # s q^{2n-2}
    s_a_qnm2 = a ** 2 * q ** (n + 1) / bcdef        # (s/a) q^{n-2}
    d1, d2, d3 = 1 - s_q2nm1, 1 - s_q2nm2, 1 - s_a_qnm2
    _check_nonzero(ctx, [("1 - s q^{2n-1}", d1), ("1 - s q^{2n-2}", d2),
                         ("1 - (s/a) q^{n-2}", d3)])
    num = q * (1 - q ** n) * (1 - a * q ** n)
    for x in p.lower:
        num *= 1 - x * a ** 2 * q ** (n + 1) / bcdef   # (xs/a) q^{n-2}
    return num / (d1 * d2 * d3)


def coeffs(p: MassonParams, n: int) -> RecurrenceCoeffs:
    """Recurrence coefficients at index n >= 0 (A_{-1} is reachable via
    the same formulas and feeds b_0)."""
    if n < 0:
        raise ValueError("coeffs requires n >= 0")
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a = p.a
        bcdef = p.b * p.c * p.d * p.e * p.f
        A_n = _A(p, n)
        B_n = _B(p, n)
        s_q2n_over_aq = a ** 2 * q ** (2 * n + 2) / bcdef   # s q^{2n} / (aq)
        s_over_aq2 = a ** 2 * q / bcdef                     # s / (a q^2)
        s_a_qnm2 = a ** 2 * q ** (n + 1) / bcdef            # (s/a) q^{n-2}
        d1, d2 = 1 - a * q ** (n + 1), 1 - s_a_qnm2
        _check_nonzero(ctx, [("1 - a q^{n+1}", d1), ("1 - (s/a) q^{n-2}", d2)])
        corr = s_q2n_over_aq * (1 - s_over_aq2)
        for x in p.lower:
            corr *= 1 - x
        corr /= d1 * d2
        a_n = A_n + B_n + corr
        b_n = _A(p, n - 1) * B_n
        return RecurrenceCoeffs(n=n, A_n=A_n, B_n=B_n, a_n=a_n, b_n=b_n)


class Branch(enum.Enum):
    X1 = "X1"
    X2 = "X2"
    Xmin = "Xmin"


@dataclass
class SolutionSample:
    which: Branch
    n: int
    value: mpc
    diagnostics: SeriesResult


def solution_X1(p: MassonParams, n: int) -> SolutionSample:
    """X_n^(1): infinite-Pochhammer prefactor times the terminating
    phi(a; b,...,f, s q^{n-1}, q^{-n}; q)."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a, s = p.a, p.s
        g = s * q ** (n - 1)
        h = q ** (-n)
        pref = qpoch_inf_ratio(
            [s * q ** (2 * n - 1), a * q ** (n + 1)],
            [s * q ** (n - 1), (s / a) * q ** (n - 1)]
            + [(a / x) * q ** (n + 1) for x in p.lower],
            ctx,
        )
        phi = vwp_phi(a, list(p.lower) + [g, h], q, ctx)
        value = pref.value * phi.value
        diag = SeriesResult(value, phi.terms_used,
                            combine_tails(pref.tail_estimate, phi.tail_estimate),
                            phi.terminated)
        return SolutionSample(Branch.X1, n, value, diag)


def solution_X2(p: MassonParams, n: int) -> SolutionSample:
    """X_n^(2): the reciprocal-parameter complementary pair distinguished
    by q^{n+1}, with its own infinite-Pochhammer prefactor."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        a, s = p.a, p.s
        pref = qpoch_inf_ratio(
            [s * q ** (2 * n - 1), (s / a) * q ** n],
            [q ** (n + 1), a * q ** n]
            + [(x * s / a) * q ** (n - 1) for x in p.lower],
            ctx,
        )
        pset = ParameterSet10(
            a=q / a, b=q / p.b, c=q / p.c, d=q / p.d, e=q / p.e, f=q / p.f,
            g=q ** (2 - n) / s, h=q ** (n + 1),
        )
        phi = complementary_pair(pset, "h", ctx)
        value = pref.value * phi.value
        diag = SeriesResult(value, phi.terms_used,
                            combine_tails(pref.tail_estimate, phi.tail_estimate),
                            phi.terminated)
        return SolutionSample(Branch.X2, n, value, diag)


def limit_W1(p: MassonParams) -> SeriesResult:
    """Large-n limit of X^(1): very-well-poised 8-phi-7 with argument
    s/(aq) = a^2 q^2/(bcdef); requires |s/(aq)| < 1."""
    ctx = p.ctx
    with ctx.workprec():
        z = p.s / (p.a * ctx.q)
        if abs(z) >= 1:
            raise Divergent(f"W1 argument |s/(aq)| = {abs(z)} >= 1")
        return vwp_phi(p.a, list(p.lower), z, ctx)


def limit_W2(p: MassonParams) -> SeriesResult:
    """Large-n limit of X^(2): the reciprocal-parameter 8-phi-7 with
    argument aq^2/s = bcdef/(a^2 q); requires |aq^2/s| < 1."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        z = p.a * q ** 2 / p.s
        if abs(z) >= 1:
            raise Divergent(f"W2 argument |aq^2/s| = {abs(z)} >= 1")
        return vwp_phi(q / p.a, [q / x for x in p.lower], z, ctx)


def minimal_solution(p: MassonParams, n: int,
                     w1: SeriesResult = None, w2: SeriesResult = None) -> SolutionSample:
    """X_n^(min) = W2 X_n^(1) - W1 X_n^(2).

    Raises MinimalityLost when the combination cancels down to the
    rounding floor of the working precision, since every later use of
    the value would then be noise.
    """
    ctx = p.ctx
    with ctx.workprec():
        if w1 is None:
            w1 = limit_W1(p)
        if w2 is None:
            w2 = limit_W2(p)
        x1 = solution_X1(p, n)
        x2 = solution_X2(p, n)
        t1 = w2.value * x1.value
        t2 = w1.value * x2.value
        value = t1 - t2
        scale = max(abs(t1), abs(t2))
        if scale > 0 and abs(value) < scale * ctx.eps * 1024:
            raise MinimalityLost(
                f"X^(min) at n={n} cancels to the precision floor "
                f"({abs(value) / scale} of the term magnitude); "
                "raise precision_bits"
            )
        tail = combine_tails(w1.tail_estimate, w2.tail_estimate,
                             x1.diagnostics.tail_estimate,
                             x2.diagnostics.tail_estimate) * scale \
            / max(abs(value), mpf(ctx.eps))
        diag = SeriesResult(value,
                            x1.diagnostics.terms_used + x2.diagnostics.terms_used,
                            tail, Terminated.tolerance_met)
        return SolutionSample(Branch.Xmin, n, value, diag)


def recurrence_residual(p: MassonParams, values, n: int) -> mpf:
    """Relative residual |X_{n+1} - a_n X_n + b_n X_{n-1}| / max term,
    for any solution triple supplied as a function of the index."""
    ctx = p.ctx
    with ctx.workprec():
        cf = coeffs(p, n)
        t0 = values(n + 1)
        t1 = cf.a_n * values(n)
        t2 = cf.b_n * values(n - 1)
        scale = max(abs(t0), abs(t1), abs(t2))
        if scale == 0:
            return mpf(0)
        return abs(t0 - t1 + t2) / scale


@dataclass
class AsymptoticReport:
    """Deviation sweep of the recurrence coefficients.

    ``dev_a1`` tracks |a_n - 1| (the limit value printed in the source
    material), ``dev_a`` tracks |a_n - (1+q)| (the limit consistent with
    the coefficient formulas and the const / q^n solution pair), and
    ``dev_b`` tracks |b_n - q|.
    """

    n_max: int
    dev_a1: list
    dev_a: list
    dev_b: list
    max_dev_a1_top_quartile: mpf
    max_dev_a_top_quartile: mpf
    max_dev_b_top_quartile: mpf
    geometric_rate_a: float
    geometric_rate_b: float


def asymptotic_check(p: MassonParams, n_max: int) -> AsymptoticReport:
    """Sweep coefficients up to n_max and report deviation trends."""
    ctx = p.ctx
    with ctx.workprec():
        q = ctx.q
        dev_a1, dev_a, dev_b = [], [], []
        for n in range(n_max + 1):
            cf = coeffs(p, n)
            dev_a1.append(abs(cf.a_n - 1))
            dev_a.append(abs(cf.a_n - (1 + q)))
            dev_b.append(abs(cf.b_n - q))
        lo = (3 * (n_max + 1)) // 4
        top_a1 = max(dev_a1[lo:])
        top_a = max(dev_a[lo:])
        top_b = max(dev_b[lo:])

        def rate(devs):
            # fitted per-step geometric decay over the second half
            half = len(devs) // 2
            pairs = [(devs[i], devs[i + 1]) for i in range(half, len(devs) - 1)
                     if devs[i] > 0 and devs[i + 1] > 0]
            if not pairs:
                return 0.0
            prod = mpf(1)
            for u, v in pairs:
                prod *= v / u
            return float(prod ** (mpf(1) / len(pairs)))

        return AsymptoticReport(
            n_max=n_max, dev_a1=dev_a1, dev_a=dev_a, dev_b=dev_b,
            max_dev_a1_top_quartile=top_a1,
            max_dev_a_top_quartile=top_a,
            max_dev_b_top_quartile=top_b,
            geometric_rate_a=rate(dev_a),
            geometric_rate_b=rate(dev_b),
        )
