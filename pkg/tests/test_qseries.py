"""q-Pochhammer symbols, generic series, the very-well-poised family,
complementary pairs, and the contiguous relation."""

import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from qcfrac import (
    BalanceViolated,
    DegenerateParameters,
    ParameterSet10,
    QContext,
    Terminated,
    ZeroDenominator,
    complementary_pair,
    contiguous_residual,
    phi_series,
    qpoch,
    qpoch_inf,
    qpoch_inf_ratio,
    qpoch_multi,
    vwp_balanced_10_9,
    vwp_phi,
)

CTX = QContext(q=0.5)
HCT = QContext(q=0.5, series_tol=1e-25, identity_tol=1e-20, precision_bits=128)


# ---------------------------------------------------------------------------
# Frozen oracles


def test_qpoch_finite_oracle():
    # (0.5; 0.5)_3 = (1 - 0.5)(1 - 0.25)(1 - 0.125)
    assert abs(qpoch(0.5, CTX, 3) - mpf("0.328125")) < 1e-15


def test_qpoch_finite_oracle_2():
    ctx = QContext(q=0.25)
    ref = mpf("0.6316400562953948974609375")  # (0.3; 0.25)_5
    assert abs(qpoch(0.3, ctx, 5) - ref) < 1e-15


def test_qpoch_inf_oracle():
    ref = mpf("0.2887880950866024212788997")  # (0.5; 0.5)_inf
    res = qpoch_inf(0.5, CTX)
    assert abs(res.value - ref) < 1e-12
    assert res.terminated is Terminated.tolerance_met


def test_qpoch_multi_product():
    one = qpoch(0.5, CTX, 3) * qpoch(0.25, CTX, 3)
    assert abs(qpoch_multi([0.5, 0.25], CTX, 3) - one) < 1e-15


def test_qpoch_inf_matches_reference_library():
    rng = random.Random(7)
    for _ in range(20):
        a = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.5, 0.5))
        q = rng.uniform(0.1, 0.6)
        ctx = QContext(q=q, series_tol=1e-16)
        ref = mpmath.qp(mpmath.mpc(a), mpf(q))
        assert abs(qpoch_inf(a, ctx).value - ref) < 1e-12 * max(1, abs(ref))


# ---------------------------------------------------------------------------
# Pochhammer laws


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(min_value=-0.9, max_value=0.9),
    q=st.floats(min_value=0.05, max_value=0.7),
    n=st.integers(min_value=1, max_value=12),
)
def test_qpoch_recurrence_law(a, q, n):
    # (a; q)_{n+1} = (a; q)_n (1 - a q^n)
    ctx = QContext(q=q)
    lhs = qpoch(a, ctx, n + 1)
    rhs = qpoch(a, ctx, n) * (1 - ctx.scalar(a) * ctx.q ** n)
    assert abs(lhs - rhs) <= 1e-13 * max(1, abs(lhs))


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(min_value=-0.9, max_value=0.9),
    q=st.floats(min_value=0.05, max_value=0.7),
    n=st.integers(min_value=0, max_value=8),
    k=st.integers(min_value=0, max_value=8),
)
def test_qpoch_splitting_law(a, q, n, k):
    # (a; q)_{n+k} = (a; q)_n (a q^n; q)_k
    ctx = QContext(q=q)
    lhs = qpoch(a, ctx, n + k)
    rhs = qpoch(a, ctx, n) * qpoch(ctx.scalar(a) * ctx.q ** n, ctx, k)
    assert abs(lhs - rhs) <= 1e-13 * max(1, abs(lhs))


def test_qpoch_inf_splitting():
    # (a; q)_inf = (a; q)_n (a q^n; q)_inf
    ctx = QContext(q=0.4, series_tol=1e-16)
    a = ctx.scalar(0.37)
    lhs = qpoch_inf(a, ctx).value
    rhs = qpoch(a, ctx, 6) * qpoch_inf(a * ctx.q ** 6, ctx).value
    assert abs(lhs - rhs) < 1e-13


def test_qpoch_inf_exact_zero():
    # a = q^{-k} makes a factor vanish exactly
    ctx = QContext(q=0.5)
    res = qpoch_inf(ctx.q ** -0, ctx)  # a = 1: first factor is zero
    assert res.value == 0
    assert res.terminated is Terminated.exact_termination


def test_qpoch_inf_ratio_zero_denominator():
    ctx = QContext(q=0.5)
    with pytest.raises(ZeroDenominator):
        qpoch_inf_ratio([0.3], [1.0], ctx)


# ---------------------------------------------------------------------------
# Generic series


def test_q_binomial_theorem():
    # sum (a)_k z^k / (q)_k = (az)_inf / (z)_inf
    ctx = QContext(q=0.5, series_tol=1e-16)
    res = phi_series([0.4], [], 0.3, ctx)
    ref = mpf("1.526220267113545778549279")
    assert abs(res.value - ref) < 1e-13


def test_phi_series_exact_termination():
    ctx = QContext(q=0.5)
    res = phi_series([ctx.q ** -3, 0.2], [0.7], 0.4, ctx)
    assert res.terminated is Terminated.exact_termination
    assert res.terms_used <= 4


# ---------------------------------------------------------------------------
# Very-well-poised structure


def test_vwp_factor_square_root_free():
    """(q sqrt(a), -q sqrt(a))_n / (sqrt(a), -sqrt(a))_n = (1-a q^{2n})/(1-a),
    including complex square roots on the reference side."""
    rng = random.Random(11)
    for _ in range(50):
        q = rng.uniform(0.05, 0.7)
        a = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.6, 0.6))
        n = rng.randint(0, 30)
        ctx = QContext(q=q)
        with ctx.workprec():
            ra = mpmath.sqrt(ctx.scalar(a))
            num = qpoch_multi([ctx.q * ra, -ctx.q * ra], ctx, n)
            den = qpoch_multi([ra, -ra], ctx, n)
            lhs = num / den
            rhs = (1 - ctx.scalar(a) * ctx.q ** (2 * n)) / (1 - ctx.scalar(a))
        assert abs(lhs - rhs) <= 1e-12 * max(1, abs(rhs))


def test_vwp_phi_against_generic_series():
    """vwp_phi must agree with the generic phi built from explicit
    square-root parameter slots."""
    ctx = QContext(q=0.4, series_tol=1e-16)
    a = ctx.scalar(0.3)
    params = [0.2, 0.25, 0.35]
    z = 0.3
    with ctx.workprec():
        ra = mpmath.sqrt(a)
        nums = [ctx.q * ra, -ctx.q * ra] + params
        dens = [ra, -ra] + [a * ctx.q / ctx.scalar(x) for x in params]
        generic = phi_series([a] + nums, dens, z, ctx)
    direct = vwp_phi(a, params, z, ctx)
    assert abs(direct.value - generic.value) < 1e-12 * max(1, abs(direct.value))


def test_balance_validation():
    p = ParameterSet10.solve_for_h(0.5, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, CTX)
    p.validate(CTX)  # must not raise
    bad = ParameterSet10(p.a, p.b, p.c, p.d, p.e, p.f, p.g, p.h * 2)
    with pytest.raises(BalanceViolated):
        bad.validate(CTX)


def test_vwp_balanced_10_9_terminates_at_inverse_power():
    ctx = QContext(q=0.5, series_tol=1e-16)
    p = ParameterSet10.solve_for_h(0.5, 0.3, 0.4, 0.45, 0.5, 0.55,
                                   ctx.q ** -2, ctx)
    res = vwp_balanced_10_9(p, ctx)
    assert res.terminated is Terminated.exact_termination
    assert res.terms_used <= 3


# ---------------------------------------------------------------------------
# Complementary pair and the contiguous relation


def _sample_pset(seed, ctx):
    rng = random.Random(seed)
    vals = [rng.uniform(0.3, 0.9)] + [rng.uniform(0.2, 0.8) for _ in range(6)]
    return ParameterSet10.solve_for_h(*vals, ctx)


def test_complementary_pair_differs_from_plain_phi():
    ctx = QContext(q=0.4, series_tol=1e-16)
    p = _sample_pset(3, ctx)
    plain = vwp_balanced_10_9(p, ctx).value
    paired = complementary_pair(p, "b", ctx).value
    assert abs(paired - plain) > 1e-10  # the partner term is present


def test_contiguous_residual_small_double_precision():
    ctx = QContext(q=0.4, series_tol=1e-15, identity_tol=1e-8)
    for seed in range(6):
        p = _sample_pset(100 + seed, ctx)
        res = contiguous_residual(p, "bcdef"[seed % 5], ctx)
        assert res <= 1e-8, f"seed {seed}: residual {res}"


def test_contiguous_residual_small_high_precision():
    ctx = QContext(q=0.4, series_tol=1e-28, identity_tol=1e-20,
                   precision_bits=128)
    for seed in range(3):
        p = _sample_pset(200 + seed, ctx)
        res = contiguous_residual(p, "bcd"[seed % 3], ctx)
        assert res <= 1e-20, f"seed {seed}: residual {res}"


def test_contiguous_distinguished_slot_restricted():
    p = _sample_pset(5, CTX)
    with pytest.raises(ValueError):
        contiguous_residual(p, "g", CTX)


def test_contiguous_degenerate_g_equals_h():
    ctx = QContext(q=0.4)
    p = ParameterSet10.solve_for_h(0.5, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, ctx)
    collided = ParameterSet10(p.a, p.b, p.c, p.d, p.e, p.f, p.g, p.g)
    with pytest.raises(DegenerateParameters):
        contiguous_residual(collided, "b", ctx)
