"""The q-orthogonal polynomial families evaluated by this package.

Three families, all real-valued for 0 < q < 1:

* q-inverse Hermite polynomials h_n(x|q), defined for x = sinh(phi) by

      h_n(sinh(phi)|q) = sum_{k=0}^n (-1)^k q^{k(k-n)} [n,k]_q e^{phi(n-2k)}

  with [n,k]_q = (q;q)_n / ((q;q)_k (q;q)_{n-k}); equivalently by the
  three-term recurrence h_{n+1} = 2x h_n - q^{-n}(1-q^n) h_{n-1}, h_0 = 1.
  h_{2k} is even and h_{2k+1} is odd; h_{2k+1}(x) = x * ht_{2k}(x) defines the
  even cofactor family ht.

* discrete q-ultraspherical polynomials
  C_n(x; s, q) = 3phi2(q^-n, -s q^{n+1}, x; sqrt(s) q, -sqrt(s) q; q, q).

* dual discrete q-ultraspherical polynomials D_n(mu; s, q), degree n in
  mu(x; s) = q^-x + s q^{x+1}, given on the grid by
  D_n = 3phi2(q^-x, s q^{x+1}, q^-n; sqrt(s) q, -sqrt(s) q; q, -q^{n+1})
  and everywhere by the recurrence

      mu D_n = -q^{-2n-1}(1 - s q^{2n+2}) D_{n+1}
               + q^{-2n-1}(1+q) D_n - q^{-2n}(1 - q^{2n}) D_{n-1}.

Series and recurrence evaluators are deliberately independent code paths so
each can serve as the other's cross-check.
"""
from __future__ import annotations

import dataclasses
import enum

import mpmath

from .kernel import (DEFAULT_CONTEXT, PrecisionContext, QReal, as_qparam,
                     basic_hypergeometric, qpochhammer)


class DegenerateCoefficient(Exception):
    """A leading recurrence coefficient vanished (s = q^{-2n-2} for some n)."""


class FamilyKind(enum.Enum):
    QINV_HERMITE = "qinv_hermite"
    DISCRETE_ULTRA = "discrete_ultra"
    DUAL_DISCRETE_ULTRA = "dual_discrete_ultra"
    EVEN_HERMITE_FACTOR = "even_hermite_factor"


@dataclasses.dataclass(frozen=True)
class FamilySpec:
    """A family selection: kind, base q, and the shape parameter s where used."""

    kind: FamilyKind
    q: QReal
    s: QReal | None = None

    def validated(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> "FamilySpec":
        q = as_qparam(self.q, ctx)
        s = None
        if self.kind in (FamilyKind.DISCRETE_ULTRA, FamilyKind.DUAL_DISCRETE_ULTRA):
            if self.s is None:
                raise ValueError("%s requires the parameter s" % self.kind.value)
            s = ctx.to_real(self.s)
            if not s > 0:
                raise ValueError("s must satisfy s > 0 (got s=%s)" % mpmath.nstr(s, 8))
            if self.kind is FamilyKind.DUAL_DISCRETE_ULTRA and not s < q ** -2:
                raise ValueError(
                    "s must satisfy 0 < s < q^-2 (got s=%s, q^-2=%s)"
                    % (mpmath.nstr(s, 8), mpmath.nstr(q ** -2, 8))
                )
        elif self.s is not None:
            s = ctx.to_real(self.s)
        return FamilySpec(self.kind, q, s)


@dataclasses.dataclass(frozen=True)
class MuPoint:
    """A point of the dual grid: label x, parameter s, and mu = q^-x + s q^{x+1}."""

    x: QReal
    s: QReal
    mu: QReal


def mu_point(x, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> MuPoint:
    q = as_qparam(q, ctx)
    with ctx.workprec():
        x = mpmath.mpf(x)
        s = mpmath.mpf(s)
        mu = q ** (-x) + s * q ** (x + 1)
    return MuPoint(x=x, s=s, mu=mu)


# ---------------------------------------------------------------------------
# q-inverse Hermite family


def _hermite_series_pass(n: int, phi, q) -> tuple[QReal, QReal]:
    """One summation pass at the ambient precision: (sum, largest |term|)."""
    e = mpmath.exp(phi)
    total = mpmath.mpf(0)
    tmax = mpmath.mpf(0)
    binom = mpmath.mpf(1)
    for k in range(n + 1):
        term = (-1) ** k * q ** (k * (k - n)) * binom * e ** (n - 2 * k)
        total += term
        tmax = max(tmax, abs(term))
        binom *= (1 - q ** (n - k)) / (1 - q ** (k + 1))
    return total, tmax


def qinv_hermite_series(n: int, phi, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """h_n(sinh(phi)|q) by the explicit series in e^phi.

    Terms reach q^(-n^2/4) e^(n|phi|) while the sum can be exponentially
    smaller (exactly 0 at phi = 0 for odd n), so when the first pass shows
    that summation roundoff may exceed tol/4 * max(1, |sum|), the sum is
    redone with enough guard bits to push the absolute error below tol/4.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        phi = mpmath.mpf(phi)
        total, tmax = _hermite_series_pass(n, phi, q)
        noise = (n + 1) * tmax * mpmath.mpf(2) ** -ctx.bits
        if noise > ctx.tol / 4 * max(mpmath.mpf(1), abs(total)):
            need = int(mpmath.ceil(mpmath.log(4 * (n + 1) * tmax / ctx.tol, 2)))
            with mpmath.mp.workprec(max(need, ctx.bits + 16)):
                total, _ = _hermite_series_pass(n, phi, q)
        return +total


def qinv_hermite_table(n_max: int, x, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[QReal]:
    """[h_0(x|q), ..., h_{n_max}(x|q)] by the three-term recurrence."""
    if not isinstance(n_max, int) or n_max < 0:
        raise ValueError("n_max must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        x = mpmath.mpf(x)
        vals = [mpmath.mpf(1)]
        prev, cur = mpmath.mpf(0), mpmath.mpf(1)
        for j in range(n_max):
            prev, cur = cur, 2 * x * cur - q ** (-j) * (1 - q ** j) * prev
            vals.append(cur)
        return vals


def qinv_hermite(n: int, x, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """h_n(x|q) by the three-term recurrence."""
    return qinv_hermite_table(n, x, q, ctx)[n]


def qinv_hermite_coeffs(n: int, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[QReal]:
    """Coefficients [c_0, ..., c_n] of h_n(x|q) = sum c_j x^j, via the recurrence.

    Exposes the parity structure (c_j = 0 for j with j != n mod 2) and the
    linear coefficient needed for the even cofactor at x = 0.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        zero = mpmath.mpf(0)
        prev = [mpmath.mpf(1)]
        if n == 0:
            return prev
        cur = [zero, mpmath.mpf(2)]
        for j in range(1, n):
            coef = q ** (-j) * (1 - q ** j)
            nxt = [zero] * (j + 2)
            for i, c in enumerate(cur):
                nxt[i + 1] += 2 * c
            for i, c in enumerate(prev):
                nxt[i] -= coef * c
            prev, cur = cur, nxt
        return cur


def even_hermite_factor(k: int, x, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """ht_{2k}(x|q) = h_{2k+1}(x|q) / x, with the removable point at x = 0.

    At x = 0 the value is the linear coefficient of h_{2k+1}, computed from
    the series as sum_j (-1)^j q^{j(j-(2k+1))} [2k+1,j]_q (2k+1-2j).
    """
    if not isinstance(k, int) or k < 0:
        raise ValueError("k must be a nonnegative integer")
    q = as_qparam(q, ctx)
    n = 2 * k + 1
    with ctx.workprec():
        x = mpmath.mpf(x)
        if x != 0:
            return qinv_hermite(n, x, q, ctx) / x
        total = mpmath.mpf(0)
        binom = mpmath.mpf(1)
        for j in range(n + 1):
            total += (-1) ** j * q ** (j * (j - n)) * binom * (n - 2 * j)
            binom *= (1 - q ** (n - j)) / (1 - q ** (j + 1))
        return total


# ---------------------------------------------------------------------------
# discrete q-ultraspherical family


def discrete_ultra(n: int, x, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """C_n(x; s, q) as a terminating 3phi2 with argument q."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        s = mpmath.mpf(s)
        if not s > 0:
            raise ValueError("s must satisfy s > 0")
        x = mpmath.mpf(x)
        rs = mpmath.sqrt(s)
        return basic_hypergeometric(
            [q ** (-n), -s * q ** (n + 1), x],
            [rs * q, -rs * q],
            q, q, ctx, terminating_at=n,
        )


# ---------------------------------------------------------------------------
# dual discrete q-ultraspherical family


def dual_ultra_series(n: int, x, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """D_n at the grid point mu(x; s) as a terminating 3phi2.

    The degree slot q^-n always terminates the sum after n+1 terms; when x is
    a nonnegative integer below n, the x slot terminates it sooner and the
    shorter cutoff drives the loop.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        s = mpmath.mpf(s)
        if not 0 < s < q ** -2:
            raise ValueError(
                "s must satisfy 0 < s < q^-2 (got s=%s, q^-2=%s)"
                % (mpmath.nstr(s, 8), mpmath.nstr(q ** -2, 8))
            )
        x = mpmath.mpf(x)
        cutoff = n
        if mpmath.isint(x) and 0 <= x < n:
            cutoff = int(x)
        rs = mpmath.sqrt(s)
        return basic_hypergeometric(
            [q ** (-x), s * q ** (x + 1), q ** (-n)],
            [rs * q, -rs * q],
            q, -q ** (n + 1), ctx, terminating_at=cutoff,
        )


def dual_ultra_table(n_max: int, mu, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[QReal]:
    """[D_0(mu), ..., D_{n_max}(mu)] by the three-term recurrence in n."""
    if not isinstance(n_max, int) or n_max < 0:
        raise ValueError("n_max must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        mu = mpmath.mpf(mu)
        s = mpmath.mpf(s)
        vals = [mpmath.mpf(1)]
        prev, cur = mpmath.mpf(0), mpmath.mpf(1)
        for j in range(n_max):
            lead = 1 - s * q ** (2 * j + 2)
            if lead == 0:
                raise DegenerateCoefficient(
                    "leading coefficient 1 - s q^{2n+2} vanishes at n=%d" % j
                )
            prev, cur = cur, (
                (q ** (-2 * j - 1) * (1 + q) - mu) * cur
                - q ** (-2 * j) * (1 - q ** (2 * j)) * prev
            ) / (q ** (-2 * j - 1) * lead)
            vals.append(cur)
        return vals


def dual_ultra(n: int, mu, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """D_n(mu; s, q) by the three-term recurrence (works off the grid)."""
    return dual_ultra_table(n, mu, s, q, ctx)[n]


def dual_ultra_coeffs(n: int, s, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list[QReal]:
    """Coefficients of D_n as a polynomial in mu, via the recurrence."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    q = as_qparam(q, ctx)
    with ctx.workprec():
        s = mpmath.mpf(s)
        zero = mpmath.mpf(0)
        prev = [mpmath.mpf(1)]
        if n == 0:
            return prev
        # D_1 = ((q^-1 (1+q) - mu) * 1) * q / (1 - s q^2)
        lead = 1 - s * q ** 2
        if lead == 0:
            raise DegenerateCoefficient("leading coefficient 1 - s q^2 vanishes")
        cur = [q ** -1 * (1 + q) * q / lead, -q / lead]
        for j in range(1, n):
            lead = 1 - s * q ** (2 * j + 2)
            if lead == 0:
                raise DegenerateCoefficient(
                    "leading coefficient 1 - s q^{2n+2} vanishes at n=%d" % j
                )
            scale = q ** (2 * j + 1) / lead
            c_mid = q ** (-2 * j - 1) * (1 + q)
            c_low = q ** (-2 * j) * (1 - q ** (2 * j))
            nxt = [zero] * (j + 2)
            for i, c in enumerate(cur):
                nxt[i] += scale * c_mid * c
                nxt[i + 1] -= scale * c
            for i, c in enumerate(prev):
                nxt[i] -= scale * c_low * c
            prev, cur = cur, nxt
        return cur


def evaluate(spec: FamilySpec, n: int, *, x=None, phi=None, mu=None,
             ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Dispatch an evaluation request for a validated FamilySpec.

    Exactly one of x / phi / mu must be given, matching the family:
    QINV_HERMITE accepts x (recurrence) or phi (series); EVEN_HERMITE_FACTOR
    accepts x; DISCRETE_ULTRA accepts x; DUAL_DISCRETE_ULTRA accepts mu
    (recurrence) or x (grid series).
    """
    spec = spec.validated(ctx)
    given = {name: v for name, v in (("x", x), ("phi", phi), ("mu", mu)) if v is not None}
    if len(given) != 1:
        raise ValueError("exactly one of x, phi, mu must be supplied (got %s)" % sorted(given))
    if spec.kind is FamilyKind.QINV_HERMITE:
        if phi is not None:
            return qinv_hermite_series(n, phi, spec.q, ctx)
        if x is not None:
            return qinv_hermite(n, x, spec.q, ctx)
        raise ValueError("qinv_hermite takes x or phi, not mu")
    if spec.kind is FamilyKind.EVEN_HERMITE_FACTOR:
        if x is None:
            raise ValueError("even_hermite_factor takes x")
        return even_hermite_factor(n, x, spec.q, ctx)
    if spec.kind is FamilyKind.DISCRETE_ULTRA:
        if x is None:
            raise ValueError("discrete_ultra takes x")
        return discrete_ultra(n, x, spec.s, spec.q, ctx)
    if spec.kind is FamilyKind.DUAL_DISCRETE_ULTRA:
        if mu is not None:
            return dual_ultra(n, mu, spec.s, spec.q, ctx)
        if x is not None:
            return dual_ultra_series(n, x, spec.s, spec.q, ctx)
        raise ValueError("dual_discrete_ultra takes mu or x")
    raise ValueError("unknown family kind %r" % (spec.kind,))
