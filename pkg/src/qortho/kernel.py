"""Extended-precision q-series primitives.

All values are mpmath ``mpf`` reals ("QReal" below) computed at a working
precision carried by a :class:`PrecisionContext`. Infinite objects are
truncated only under a-priori tail bounds, never by watching terms shrink:
a result is returned together with the guarantee that the discarded tail is
below the context tolerance, or a :class:`TruncationFailure` is raised.

Notation used throughout the package:

    (a;q)_n   = prod_{k=0}^{n-1} (1 - a q^k)          finite q-shifted factorial
    (a;q)_inf = prod_{k>=0}     (1 - a q^k)           with 0 < q < 1
    rphi(r-1) = sum_{k>=0} [prod_i (a_i;q)_k / prod_j (b_j;q)_k] z^k / (q;q)_k

The kernel is real-valued: complex arguments are out of scope.
"""
from __future__ import annotations

import dataclasses

import mpmath
from mpmath import mp

QReal = mpmath.mpf


class KernelError(Exception):
    """Base class for kernel failures."""


class TruncationFailure(KernelError):
    """The tail bound could not be driven below tolerance within max_terms."""


class PoleError(KernelError):
    """A denominator q-shifted factorial vanished at a summed index."""


@dataclasses.dataclass(frozen=True)
class PrecisionContext:
    """Working precision, truncation tolerance and iteration budget.

    bits      -- mantissa size for every mpf operation (>= 64)
    tol       -- certified truncation tolerance, default 2^-200
    max_terms -- hard cap on product factors / series terms
    """

    bits: int = 256
    tol: QReal = mpmath.mpf(2) ** -200
    max_terms: int = 50000

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 64:
            raise ValueError("bits must be an integer >= 64 (got %r)" % (self.bits,))
        if not self.tol > 0:
            raise ValueError("tol must be positive (got %r)" % (self.tol,))
        if not isinstance(self.max_terms, int) or self.max_terms < 1:
            raise ValueError("max_terms must be an integer >= 1 (got %r)" % (self.max_terms,))

    @classmethod
    def create(cls, bits: int = 256, tol_exp: int = 200, max_terms: int = 50000) -> "PrecisionContext":
        """Build a context with tol = 2^-tol_exp."""
        return cls(bits=bits, tol=mpmath.mpf(2) ** -int(tol_exp), max_terms=max_terms)

    def workprec(self):
        """Context manager setting the mpmath working precision."""
        return mp.workprec(self.bits)

    def doubled(self) -> "PrecisionContext":
        """Same tolerance and budget at twice the working precision."""
        return PrecisionContext(bits=self.bits * 2, tol=self.tol, max_terms=self.max_terms)

    @property
    def digits(self) -> int:
        """Decimal digits used when rendering values produced under this context."""
        return self.bits // 3 + 2

    def to_real(self, value) -> QReal:
        """Convert a decimal string, int or mpf to an mpf at this precision."""
        with self.workprec():
            return mpmath.mpf(value)


DEFAULT_CONTEXT = PrecisionContext()


def as_qparam(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Validate and convert a base parameter: 0 < q < 1."""
    qv = ctx.to_real(q)
    if not (0 < qv < 1):
        raise ValueError("q must satisfy 0 < q < 1 (got q=%s)" % mpmath.nstr(qv, 8))
    return qv


def to_decimal(value, digits: int) -> str:
    """Deterministic decimal rendering; exact integers print without a fraction.

    An mpf passes through unrounded whatever the ambient precision; other
    inputs are converted with enough bits to honor the digit count.
    """
    if isinstance(value, mpmath.mpf):
        v = value
    else:
        with mp.workprec(max(mp.prec, 4 * digits + 16)):
            v = mpmath.mpf(value)
    if not mpmath.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if mpmath.isint(v):
        return str(int(v))
    return mpmath.nstr(v, digits)


def qpochhammer(a, q, n: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Finite q-shifted factorial (a;q)_n = prod_{k<n} (1 - a q^k), n >= 0."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer (got %r)" % (n,))
    with ctx.workprec():
        a = mpmath.mpf(a)
        q = mpmath.mpf(q)
        prod = mpmath.mpf(1)
        aqk = a
        for _ in range(n):
            prod *= 1 - aqk
            aqk *= q
        return prod


def qpochhammer_inf(a, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Infinite product (a;q)_inf with a certified truncation.

    Factors are multiplied until the remaining tail satisfies
    |log prod_{k>K} (1 - a q^k)| <= 1.4 |a| q^{K+1} / (1-q) <= tol/4,
    using |log(1-x)| <= (2 ln 2) |x| for |x| <= 1/2. The returned value is
    within relative tol/2 of the exact product.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        a = mpmath.mpf(a)
        one = mpmath.mpf(1)
        prod = one
        aqk = a
        c = mpmath.mpf("1.4")
        for _ in range(ctx.max_terms):
            factor = one - aqk
            if factor == 0:
                return mpmath.mpf(0)
            prod *= factor
            aqk *= q
            if abs(aqk) <= mpmath.mpf("0.5") and c * abs(aqk) / (one - q) <= ctx.tol / 4:
                return prod
        raise TruncationFailure(
            "(a;q)_inf tail bound not below tol within max_terms=%d (a=%s, q=%s)"
            % (ctx.max_terms, mpmath.nstr(a, 8), mpmath.nstr(q, 8))
        )


def basic_hypergeometric(num, den, q, z, ctx: PrecisionContext = DEFAULT_CONTEXT,
                         terminating_at: int | None = None) -> QReal:
    """Real basic hypergeometric series by term-ratio forward recurrence.

    num/den are sequences of numerator/denominator parameters. The k-th term
    obeys t_{k+1} = t_k * prod_i (1-a_i q^k) / prod_j (1-b_j q^k) * z/(1-q^{k+1}),
    so each term costs O(len(num)+len(den)) operations and no q-shifted
    factorial is recomputed from scratch.

    With terminating_at=N the sum has exactly N+1 terms and one numerator
    parameter must equal q^-N; a term becoming exactly zero (another slot
    terminating earlier) also stops the loop. Without it, summation stops when
    the term magnitude falls below tol * max(1, |partial sum|) while the terms
    are decaying; TruncationFailure is raised when max_terms is exhausted.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        nums = [mpmath.mpf(v) for v in num]
        dens = [mpmath.mpf(v) for v in den]
        z = mpmath.mpf(z)
        one = mpmath.mpf(1)

        if terminating_at is not None:
            n_stop = terminating_at
            if not isinstance(n_stop, int) or n_stop < 0:
                raise ValueError("terminating_at must be a nonnegative integer")
            target = q ** (-n_stop)
            witness = min((abs(v - target) for v in nums), default=None)
            if witness is None or witness > abs(target) * mpmath.mpf(2) ** (-(ctx.bits // 2)):
                raise ValueError(
                    "terminating_at=%d requires a numerator parameter equal to q^-%d"
                    % (n_stop, n_stop)
                )

        total = mpmath.mpf(0)
        term = one
        qk = one
        prev_mag = None
        for k in range(ctx.max_terms):
            total += term
            if terminating_at is not None and k >= terminating_at:
                return total
            ratio = z / (one - q * qk)
            for b in dens:
                f = one - b * qk
                if f == 0:
                    raise PoleError(
                        "denominator parameter %s vanishes at index %d" % (mpmath.nstr(b, 8), k)
                    )
                ratio /= f
            for a in nums:
                ratio *= one - a * qk
            term = term * ratio
            qk *= q
            if term == 0:
                return total
            if terminating_at is None:
                mag = abs(term)
                if prev_mag is not None and mag < prev_mag and mag < ctx.tol * max(one, abs(total)):
                    return total + term
                prev_mag = mag
        raise TruncationFailure(
            "series not resolved within max_terms=%d (q=%s, z=%s)"
            % (ctx.max_terms, mpmath.nstr(q, 8), mpmath.nstr(z, 8))
        )
