"""Kernel primitives: contexts, q-shifted factorials, basic hypergeometric sums."""
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qortho import (DEFAULT_CONTEXT, PoleError, PrecisionContext,
                    TruncationFailure, as_qparam, basic_hypergeometric,
                    qpochhammer, qpochhammer_inf, to_decimal)

CTX = PrecisionContext.create()

# (1/2;1/2)_inf, frozen from an independent 512-bit direct product.
EULER_HALF = ("0.288788095086602421278899721929230780088911904840685784114741066"
              "18490224090684701")

qs = st.floats(min_value=0.05, max_value=0.9)
small_reals = st.floats(min_value=-2, max_value=2, allow_nan=False)


def rel(lhs, rhs):
    return abs(lhs - rhs) / max(mpmath.mpf(1), abs(lhs))


def test_context_defaults():
    assert CTX.bits == 256
    assert CTX.tol == mpmath.mpf(2) ** -200
    assert CTX.digits == 256 // 3 + 2
    d = CTX.doubled()
    assert d.bits == 512 and d.tol == CTX.tol


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext.create(bits=32)
    with pytest.raises(ValueError):
        PrecisionContext(bits=256, tol=mpmath.mpf(0))
    with pytest.raises(ValueError):
        PrecisionContext(bits=256, max_terms=0)


def test_workprec_scoped():
    before = mpmath.mp.prec
    with CTX.workprec():
        assert mpmath.mp.prec == 256
    assert mpmath.mp.prec == before


def test_as_qparam_range():
    assert as_qparam("0.5", CTX) == mpmath.mpf("0.5")
    for bad in ("0", "1", "1.5", "-0.3"):
        with pytest.raises(ValueError, match="0 < q < 1"):
            as_qparam(bad, CTX)


def test_to_decimal_rendering():
    assert to_decimal(mpmath.mpf(1), 20) == "1"
    assert to_decimal(mpmath.mpf(-1), 20) == "-1"
    assert to_decimal(mpmath.mpf(0), 20) == "0"
    assert to_decimal(mpmath.mpf("0.375"), 20) == "0.375"
    assert to_decimal(mpmath.inf, 20) == "inf"


def test_to_decimal_keeps_full_precision_outside_workprec():
    with CTX.workprec():
        v = 1 + mpmath.mpf(2) ** -200
    # Rendering after workprec exits must not round through ambient precision.
    assert to_decimal(v, CTX.digits) != "1"


def test_qpochhammer_empty_and_zero():
    assert qpochhammer(0.7, 0.5, 0, CTX) == 1
    assert qpochhammer(0, 0.5, 5, CTX) == 1


def test_qpochhammer_frozen():
    assert to_decimal(qpochhammer("0.5", "0.5", 2, CTX), 20) == "0.375"


def test_qpochhammer_rejects_negative_n():
    with pytest.raises(ValueError):
        qpochhammer(0.5, 0.5, -1, CTX)


@settings(max_examples=40, deadline=None)
@given(a=small_reals, q=qs, n=st.integers(min_value=0, max_value=50))
def test_qpochhammer_step_property(a, q, n):
    with CTX.workprec():
        a = mpmath.mpf(a)
        q = mpmath.mpf(q)
        lhs = qpochhammer(a, q, n + 1, CTX)
        rhs = qpochhammer(a, q, n, CTX) * (1 - a * q ** n)
        assert rel(lhs, rhs) < mpmath.mpf(2) ** -240


@settings(max_examples=30, deadline=None)
@given(a=small_reals, q=qs, n=st.integers(min_value=0, max_value=30))
def test_qpochhammer_matches_mpmath(a, q, n):
    with CTX.workprec():
        mine = qpochhammer(a, q, n, CTX)
        other = mpmath.qp(mpmath.mpf(a), mpmath.mpf(q), n)
        assert rel(mine, other) < mpmath.mpf(2) ** -240


def test_qpochhammer_inf_trivial_and_frozen():
    assert qpochhammer_inf(0, 0.5, CTX) == 1
    deep = PrecisionContext.create(bits=320, tol_exp=280)
    v = qpochhammer_inf("0.5", "0.5", deep)
    with deep.workprec():
        # The frozen string carries 80 digits; its own parse error dominates.
        assert rel(v, mpmath.mpf(EULER_HALF)) < mpmath.mpf(10) ** -78


@settings(max_examples=30, deadline=None)
@given(a=small_reals, q=qs)
def test_qpochhammer_inf_functional_equation(a, q):
    with CTX.workprec():
        a = mpmath.mpf(a)
        q = mpmath.mpf(q)
        lhs = qpochhammer_inf(a, q, CTX)
        rhs = (1 - a) * qpochhammer_inf(a * q, q, CTX)
        assert rel(lhs, rhs) < 4 * CTX.tol


@settings(max_examples=20, deadline=None)
@given(a=small_reals, q=qs, n=st.integers(min_value=0, max_value=20))
def test_qpochhammer_inf_splits_off_finite_part(a, q, n):
    with CTX.workprec():
        a = mpmath.mpf(a)
        q = mpmath.mpf(q)
        lhs = qpochhammer_inf(a, q, CTX)
        rhs = qpochhammer(a, q, n, CTX) * qpochhammer_inf(a * q ** n, q, CTX)
        assert rel(lhs, rhs) < 4 * CTX.tol


def test_qpochhammer_inf_matches_mpmath():
    with CTX.workprec():
        for a, q in ((0.3, 0.5), (-1.7, 0.8), (0.99, 0.3)):
            mine = qpochhammer_inf(a, q, CTX)
            other = mpmath.qp(mpmath.mpf(a), mpmath.mpf(q))
            assert rel(mine, other) < 4 * CTX.tol


def test_qpochhammer_inf_truncation_failure():
    tight = PrecisionContext.create(bits=128, tol_exp=200, max_terms=100)
    with pytest.raises(TruncationFailure, match="max_terms"):
        qpochhammer_inf("0.999", "0.999", tight)


def test_hypergeometric_trivial_cases():
    assert basic_hypergeometric([0.5], [0.25], 0.5, 0, CTX) == 1
    assert basic_hypergeometric([1.0], [0.25], 0.5, 0.5, CTX,
                                terminating_at=0) == 1


def test_hypergeometric_terminating_two_term_value():
    # 3phi2 with numerators (q^-1, -s q^2, x) at q=0.5, s=1, x=0:
    # 1 + (1-q^-1)(1+q^2) q / [(1-q)(1+q)(1-q)] = 1 - 5/3.
    q = mpmath.mpf("0.5")
    with CTX.workprec():
        v = basic_hypergeometric([1 / q, -q ** 2, 0], [q, -q], q, q, CTX,
                                 terminating_at=1)
        assert rel(v, mpmath.mpf(-2) / 3) < mpmath.mpf(2) ** -240


def test_hypergeometric_degenerate_argument_slot():
    # A numerator parameter equal to 1 kills every term past n=0.
    q = mpmath.mpf("0.5")
    v = basic_hypergeometric([1 / q, -q ** 2, 1], [q, -q], q, q, CTX,
                             terminating_at=1)
    assert v == 1


def test_hypergeometric_terminating_matches_explicit_sum():
    q = mpmath.mpf("0.7")
    N = 5
    with CTX.workprec():
        num = [q ** -N, mpmath.mpf("0.3")]
        den = [mpmath.mpf("0.4")]
        z = mpmath.mpf("0.9")
        total = mpmath.mpf(0)
        for k in range(N + 1):
            term = (qpochhammer(num[0], q, k, CTX)
                    * qpochhammer(num[1], q, k, CTX)
                    / qpochhammer(den[0], q, k, CTX)
                    / qpochhammer(q, q, k, CTX) * z ** k)
            total += term
        v = basic_hypergeometric(num, den, q, z, CTX, terminating_at=N)
        assert rel(v, total) < mpmath.mpf(2) ** -230


def test_hypergeometric_q_binomial_theorem():
    # 1phi0(a; -; q, z) = (az;q)_inf / (z;q)_inf for |z| < 1.
    with CTX.workprec():
        for a, q, z in ((0.3, 0.5, 0.6), (-1.2, 0.7, 0.25), (2.0, 0.4, -0.5)):
            a = mpmath.mpf(a)
            q = mpmath.mpf(q)
            z = mpmath.mpf(z)
            lhs = basic_hypergeometric([a], [], q, z, CTX)
            rhs = (qpochhammer_inf(a * z, q, CTX)
                   / qpochhammer_inf(z, q, CTX))
            assert rel(lhs, rhs) < 8 * CTX.tol


def test_hypergeometric_matches_mpmath_nonterminating():
    with CTX.workprec():
        q = mpmath.mpf("0.5")
        a, b, c, z = (mpmath.mpf(v) for v in ("0.3", "0.2", "0.7", "0.4"))
        mine = basic_hypergeometric([a, b], [c], q, z, CTX)
        with mpmath.workprec(300):
            other = mpmath.qhyper([a, b], [c], q, z)
        assert rel(mine, other) < 8 * CTX.tol


def test_hypergeometric_terminating_slot_validation():
    q = mpmath.mpf("0.5")
    with pytest.raises(ValueError, match="terminating"):
        basic_hypergeometric([0.3], [0.7], q, 0.5, CTX, terminating_at=4)


def test_hypergeometric_pole_error():
    q = mpmath.mpf("0.5")
    # Denominator parameter q^-2 vanishes at the k=2 factor.
    with pytest.raises(PoleError):
        basic_hypergeometric([0.3], [q ** -2], q, 0.5, CTX)


def test_hypergeometric_truncation_failure_on_growth():
    tight = PrecisionContext.create(bits=128, tol_exp=60, max_terms=50)
    with pytest.raises(TruncationFailure):
        basic_hypergeometric([0.5], [0.25], "0.9", "1.0", tight)


def test_precision_doubling_stability():
    # Every kernel example rerun at doubled bits reproduces its value.
    q = mpmath.mpf("0.5")
    cases = [
        lambda ctx: qpochhammer(0.7, q, 0, ctx),
        lambda ctx: qpochhammer(0, q, 5, ctx),
        lambda ctx: qpochhammer(q, q, 2, ctx),
        lambda ctx: qpochhammer_inf(0, q, ctx),
        lambda ctx: qpochhammer_inf(q, q, ctx),
        lambda ctx: qpochhammer_inf(-q * q, q, ctx),
        lambda ctx: basic_hypergeometric([0.5], [0.25], q, 0, ctx),
        lambda ctx: basic_hypergeometric([1 / q, -q ** 2, 0], [q, -q], q, q,
                                         ctx, terminating_at=1),
        lambda ctx: basic_hypergeometric([0.3, 0.2], [0.7], q, 0.4, ctx),
    ]
    doubled = CTX.doubled()
    with doubled.workprec():
        for case in cases:
            v1 = case(CTX)
            v2 = case(doubled)
            assert rel(v2, v1) < 4 * CTX.tol
