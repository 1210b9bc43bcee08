"""Discrete orthogonality measures and certified Gram-matrix assembly.

Five measure kinds, every one a countable set of (node, weight) pairs:

* hermite_extremal(a), q <= a < 1, support m in Z:
  node (a^-1 q^-m - a q^m)/2, weight a^{4m} q^{m(2m-1)} (1 + a^2 q^{2m}) / Z(a)
  with Z(a) = (-a^2;q)_inf (-q/a^2;q)_inf (q;q)_inf.  Orthogonalizes the
  q-inverse Hermite family with diagonal q^{-n(n+1)/2} (q;q)_n.

* dual_base(s, even|odd), 0 < s < q^-2, support k >= 0: nodes mu(2k; s) resp.
  mu(2k+1; s).  The weights are stated here with the common factor
  (1 - s q) already cancelled, which keeps them finite at s = q^-1:

      even, k = 0:  1
      even, k >= 1: (1 - s q^{4k+1}) (s q^2; q)_{2k-1} / (q; q)_{2k} * q^{k(2k-1)}
      odd,  k >= 0: (1 - s q^{4k+3}) (s q^2; q)_{2k}   / (q; q)_{2k+1} * q^{k(2k+1)}

  Both orthogonalize the dual family with diagonal
  (s q^3; q^2)_inf / (q; q^2)_inf * (q^2; q^2)_n q^{-n} / (s q^2; q^2)_n.

* dual_qinv_extremal(a), support m in Z: node a^-2 q^{-2m} + a^2 q^{2m},
  weight a^{4m+1} q^{2m^2} (a^-1 q^-m + a q^m) / Z(a); orthogonalizes the
  dual family at s = q^-1 with diagonal q^{-n} (q;q)_{2n} / (q;q^2)_n^2.

* dual_q_extremal(a), support m in Z: node q (a^-2 q^{-2m} + a^2 q^{2m}),
  weight a^{4m} q^{m(2m-1)} (1 + a^2 q^{2m}) (a^-1 q^-m - a q^m)^2 / Z(a);
  orthogonalizes the dual family at s = q with diagonal
  q^{-(n+1)} (q;q)_{2n+1} / (q^3;q^2)_n^2.  This weight is manifestly
  nonnegative on all of Z; it vanishes at a single site exactly when
  a^2 q^{2m} = 1 (e.g. a = q, m = -1), which is allowed.

The three a-parametrized kinds share the normalization constant Z(a).  Its
closed form is settled by adjudicate_normalization, which compares the two
candidate third factors (-q/a^2;q)_inf and (-q/a;q)_inf against the lattice
mass; the (-q/a^2;q)_inf form wins and is the one used throughout.

Gram assembly truncates the lattice with an a-priori certificate: the
summand for degrees up to N is bounded by B(m) = w_m * A(|node_m|)^2, where
A(t) is the largest absolute-coefficient majorant of the polynomial family
up to degree N.  Because log w_m is dominated by a -2m^2 log(1/q) term while
log A(|node_m|) grows only linearly in |m|, B is eventually log-concave, so
once the first omitted term satisfies B(next)/B(last) <= 1/2 the geometric
tail bound 2*B(next) per side is valid.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import enum
import hashlib
import json
import math

import mpmath

from .families import (FamilyKind, FamilySpec, dual_ultra_coeffs,
                       dual_ultra_table, qinv_hermite_coeffs,
                       qinv_hermite_table)
from .kernel import (DEFAULT_CONTEXT, PrecisionContext, QReal,
                     TruncationFailure, as_qparam, qpochhammer,
                     qpochhammer_inf, to_decimal)


class IncompatiblePair(Exception):
    """The polynomial family and the measure do not orthogonalize each other."""


class SignViolation(Exception):
    """A weight came out negative inside the declared support."""


class MeasureKind(enum.Enum):
    HERMITE_EXTREMAL = "hermite_extremal"
    DUAL_BASE_EVEN = "dual_base_even"
    DUAL_BASE_ODD = "dual_base_odd"
    DUAL_QINV_EXTREMAL = "dual_qinv_extremal"
    DUAL_Q_EXTREMAL = "dual_q_extremal"


_A_KINDS = (MeasureKind.HERMITE_EXTREMAL, MeasureKind.DUAL_QINV_EXTREMAL,
            MeasureKind.DUAL_Q_EXTREMAL)
_BASE_KINDS = (MeasureKind.DUAL_BASE_EVEN, MeasureKind.DUAL_BASE_ODD)


def lattice_normalization(a, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Z(a) = (-a^2;q)_inf (-q/a^2;q)_inf (q;q)_inf."""
    q = as_qparam(q, ctx)
    with ctx.workprec():
        a = mpmath.mpf(a)
        return (qpochhammer_inf(-a * a, q, ctx)
                * qpochhammer_inf(-q / (a * a), q, ctx)
                * qpochhammer_inf(q, q, ctx))


@dataclasses.dataclass(frozen=True)
class DiscreteMeasure:
    kind: MeasureKind
    q: QReal
    a: QReal | None = None
    s: QReal | None = None

    @property
    def is_full_lattice(self) -> bool:
        return self.kind in _A_KINDS

    def family_s(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal | None:
        """The s value of the dual family this measure orthogonalizes."""
        if self.kind is MeasureKind.HERMITE_EXTREMAL:
            return None
        if self.kind is MeasureKind.DUAL_QINV_EXTREMAL:
            with ctx.workprec():
                return 1 / self.q
        if self.kind is MeasureKind.DUAL_Q_EXTREMAL:
            return self.q
        return self.s

    def normalization(self, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
        if self.kind in _A_KINDS:
            return lattice_normalization(self.a, self.q, ctx)
        return mpmath.mpf(1)

    def point(self, m: int, ctx: PrecisionContext = DEFAULT_CONTEXT,
              norm: QReal | None = None) -> tuple[QReal, QReal]:
        """(node, weight) at support index m.

        norm, when given, must be self.normalization(ctx); passing it avoids
        recomputing the infinite products per point.
        """
        q = self.q
        with ctx.workprec():
            if self.kind in _BASE_KINDS:
                if m < 0:
                    raise ValueError("support index must satisfy m >= 0")
                s = self.s
                if self.kind is MeasureKind.DUAL_BASE_EVEN:
                    node = q ** (-2 * m) + s * q ** (2 * m + 1)
                    if m == 0:
                        return node, mpmath.mpf(1)
                    w = ((1 - s * q ** (4 * m + 1))
                         * qpochhammer(s * q ** 2, q, 2 * m - 1, ctx)
                         / qpochhammer(q, q, 2 * m, ctx)
                         * q ** (m * (2 * m - 1)))
                else:
                    node = q ** (-2 * m - 1) + s * q ** (2 * m + 2)
                    w = ((1 - s * q ** (4 * m + 3))
                         * qpochhammer(s * q ** 2, q, 2 * m, ctx)
                         / qpochhammer(q, q, 2 * m + 1, ctx)
                         * q ** (m * (2 * m + 1)))
            else:
                a = self.a
                z = norm if norm is not None else self.normalization(ctx)
                up = a ** (-1) * q ** (-m)
                down = a * q ** m
                if self.kind is MeasureKind.HERMITE_EXTREMAL:
                    node = (up - down) / 2
                    w = a ** (4 * m) * q ** (m * (2 * m - 1)) * (1 + down * down) / z
                elif self.kind is MeasureKind.DUAL_QINV_EXTREMAL:
                    node = up * up + down * down
                    w = a ** (4 * m + 1) * q ** (2 * m * m) * (up + down) / z
                else:
                    node = (up * up + down * down) * q
                    w = (a ** (4 * m) * q ** (m * (2 * m - 1))
                         * (1 + down * down) * (up - down) ** 2 / z)
            if w < 0:
                raise SignViolation(
                    "negative weight %s at m=%d for %s"
                    % (mpmath.nstr(w, 8), m, self.kind.value))
            return node, w

    def describe(self) -> str:
        return self.kind.value


def hermite_extremal(a, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> DiscreteMeasure:
    q = as_qparam(q, ctx)
    with ctx.workprec():
        a = mpmath.mpf(a)
        if not (q <= a < 1):
            raise ValueError(
                "a must satisfy q <= a < 1 (got a=%s, q=%s)"
                % (mpmath.nstr(a, 8), mpmath.nstr(q, 8)))
    return DiscreteMeasure(MeasureKind.HERMITE_EXTREMAL, q, a=a)


def dual_base(s, q, parity: str, ctx: PrecisionContext = DEFAULT_CONTEXT) -> DiscreteMeasure:
    q = as_qparam(q, ctx)
    with ctx.workprec():
        s = mpmath.mpf(s)
        if not 0 < s < q ** -2:
            raise ValueError(
                "s must satisfy 0 < s < q^-2 (got s=%s, q^-2=%s)"
                % (mpmath.nstr(s, 8), mpmath.nstr(q ** -2, 8)))
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    kind = MeasureKind.DUAL_BASE_EVEN if parity == "even" else MeasureKind.DUAL_BASE_ODD
    return DiscreteMeasure(kind, q, s=s)


def dual_qinv_extremal(a, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> DiscreteMeasure:
    m = hermite_extremal(a, q, ctx)
    return DiscreteMeasure(MeasureKind.DUAL_QINV_EXTREMAL, m.q, a=m.a)


def dual_q_extremal(a, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> DiscreteMeasure:
    m = hermite_extremal(a, q, ctx)
    return DiscreteMeasure(MeasureKind.DUAL_Q_EXTREMAL, m.q, a=m.a)


def expected_diagonal(measure: DiscreteMeasure, n: int,
                      ctx: PrecisionContext = DEFAULT_CONTEXT) -> QReal:
    """Closed form of the (n, n) Gram entry for the measure's own family."""
    q = measure.q
    with ctx.workprec():
        if measure.kind is MeasureKind.HERMITE_EXTREMAL:
            return q ** (mpmath.mpf(-n * (n + 1)) / 2) * qpochhammer(q, q, n, ctx)
        if measure.kind in _BASE_KINDS:
            s = measure.s
            q2 = q * q
            return (qpochhammer_inf(s * q ** 3, q2, ctx)
                    / qpochhammer_inf(q, q2, ctx)
                    * qpochhammer(q2, q2, n, ctx) * q ** (-n)
                    / qpochhammer(s * q2, q2, n, ctx))
        if measure.kind is MeasureKind.DUAL_QINV_EXTREMAL:
            return (q ** (-n) * qpochhammer(q, q, 2 * n, ctx)
                    / qpochhammer(q, q * q, n, ctx) ** 2)
        # DUAL_Q_EXTREMAL
        return (q ** (-(n + 1)) * qpochhammer(q, q, 2 * n + 1, ctx)
                / qpochhammer(q ** 3, q * q, n, ctx) ** 2)


@dataclasses.dataclass
class GramReport:
    family_kind: str
    measure_kind: str
    q: QReal
    s: QReal | None
    a: QReal | None
    N: int
    bits: int
    gram: list[list[QReal]]
    expected_diag: list[QReal]
    off_diag_max: QReal
    diag_rel_err_max: QReal
    m_lo: int
    m_hi: int
    tail_bound: QReal
    node_hash: str

    def passed(self, tol) -> bool:
        return bool(self.off_diag_max < tol and self.diag_rel_err_max < tol)

    def to_json(self, digits: int) -> str:
        # Rendering is pinned to the report's own precision so output bytes
        # do not depend on the caller's ambient mpmath state.
        with mpmath.mp.workprec(self.bits):
            return self._to_json(digits)

    def _to_json(self, digits: int) -> str:
        obj = {
            "family": self.family_kind,
            "measure": self.measure_kind,
            "q": to_decimal(self.q, digits),
            "s": to_decimal(self.s, digits) if self.s is not None else None,
            "a": to_decimal(self.a, digits) if self.a is not None else None,
            "N": self.N,
            "bits": self.bits,
            "gram": [[to_decimal(v, digits) for v in row] for row in self.gram],
            "off_diag_max": to_decimal(self.off_diag_max, digits),
            "diag_rel_err_max": to_decimal(self.diag_rel_err_max, digits),
            "m_window": [self.m_lo, self.m_hi],
            "tail_bound": to_decimal(self.tail_bound, digits),
        }
        return json.dumps(obj, indent=2) + "\n"

    def to_csv(self, digits: int) -> str:
        with mpmath.mp.workprec(self.bits):
            return self._to_csv(digits)

    def _to_csv(self, digits: int) -> str:
        lines = ["n,nprime,value,expected,residual"]
        for n in range(self.N + 1):
            for np_ in range(self.N + 1):
                v = self.gram[n][np_]
                if n == np_:
                    exp = self.expected_diag[n]
                    res = abs(v - exp) / abs(exp)
                else:
                    exp = mpmath.mpf(0)
                    scale = mpmath.sqrt(abs(self.expected_diag[n]
                                            * self.expected_diag[np_]))
                    res = abs(v) / scale
                lines.append("%d,%d,%s,%s,%s" % (
                    n, np_, to_decimal(v, digits), to_decimal(exp, digits),
                    to_decimal(res, digits)))
        return "\n".join(lines) + "\n"


def _check_compatible(family: FamilySpec, measure: DiscreteMeasure,
                      ctx: PrecisionContext) -> FamilySpec:
    family = family.validated(ctx)
    with ctx.workprec():
        eps = mpmath.mpf(2) ** (8 - ctx.bits)
        if abs(family.q - measure.q) > eps * abs(measure.q):
            raise IncompatiblePair("family and measure disagree on q")
        if measure.kind is MeasureKind.HERMITE_EXTREMAL:
            if family.kind is not FamilyKind.QINV_HERMITE:
                raise IncompatiblePair(
                    "%s pairs with the q-inverse Hermite family, got %s"
                    % (measure.kind.value, family.kind.value))
            return family
        if family.kind is not FamilyKind.DUAL_DISCRETE_ULTRA:
            raise IncompatiblePair(
                "%s pairs with the dual discrete q-ultraspherical family, got %s"
                % (measure.kind.value, family.kind.value))
        want = measure.family_s(ctx)
        if abs(family.s - want) > eps * abs(want):
            raise IncompatiblePair(
                "measure %s requires family s=%s, got s=%s"
                % (measure.kind.value, mpmath.nstr(want, 8),
                   mpmath.nstr(family.s, 8)))
    return family


def _abs_coeff_majorant(family: FamilySpec, N: int, ctx: PrecisionContext):
    """A(t) >= |P_n(x)| for every n <= N and |x| <= t, via |coefficient| sums."""
    if family.kind is FamilyKind.QINV_HERMITE:
        rows = [qinv_hermite_coeffs(n, family.q, ctx) for n in range(N + 1)]
    else:
        rows = [dual_ultra_coeffs(n, family.s, family.q, ctx) for n in range(N + 1)]

    def amax(t: QReal) -> QReal:
        best = mpmath.mpf(0)
        for cs in rows:
            acc = mpmath.mpf(0)
            for c in reversed(cs):
                acc = acc * t + abs(c)
            if acc > best:
                best = acc
        return best

    return amax


def _certified_window(measure: DiscreteMeasure, amax, ctx: PrecisionContext,
                      norm: QReal) -> tuple[int, int, QReal]:
    """Pick [m_lo, m_hi] so both omitted tails are certified below tol/4."""
    target = ctx.tol / 8

    def bound(m: int) -> QReal:
        node, w = measure.point(m, ctx, norm=norm)
        return w * amax(abs(node)) ** 2

    def extend(edge: int, step: int) -> tuple[int, QReal]:
        b_edge = bound(edge)
        for _ in range(ctx.max_terms):
            b_next = bound(edge + step)
            if b_next <= target and 2 * b_next <= b_edge:
                return edge, 2 * b_next
            edge += step
            b_edge = b_next
        raise TruncationFailure(
            "tail bound %s did not reach %s within max_terms=%d (%s)"
            % (mpmath.nstr(b_edge, 8), mpmath.nstr(target, 8),
               ctx.max_terms, measure.kind.value))

    start = math.isqrt(ctx.bits) + 1
    m_hi, tail_hi = extend(start, 1)
    if measure.is_full_lattice:
        m_lo, tail_lo = extend(-start, -1)
    else:
        m_lo, tail_lo = 0, mpmath.mpf(0)
    return m_lo, m_hi, tail_hi + tail_lo


def gram_matrix(family: FamilySpec, measure: DiscreteMeasure, N: int,
                ctx: PrecisionContext = DEFAULT_CONTEXT,
                workers: int = 1) -> GramReport:
    """Gram matrix of the family under the measure, degrees 0..N.

    The lattice window carries a certified bound on the omitted tail; the
    summation order within each (n, n') pair is fixed ascending m, so the
    result is reproducible bit for bit regardless of workers.
    """
    if not isinstance(N, int) or N < 0:
        raise ValueError("N must be a nonnegative integer")
    family = _check_compatible(family, measure, ctx)
    with ctx.workprec():
        norm = measure.normalization(ctx)
        amax = _abs_coeff_majorant(family, N, ctx)
        m_lo, m_hi, tail = _certified_window(measure, amax, ctx, norm)

        nodes: list[QReal] = []
        weights: list[QReal] = []
        for m in range(m_lo, m_hi + 1):
            node, w = measure.point(m, ctx, norm=norm)
            nodes.append(node)
            weights.append(w)

        if family.kind is FamilyKind.QINV_HERMITE:
            tables = [qinv_hermite_table(N, x, family.q, ctx) for x in nodes]
        else:
            tables = [dual_ultra_table(N, x, family.s, family.q, ctx)
                      for x in nodes]

        gram = [[mpmath.mpf(0)] * (N + 1) for _ in range(N + 1)]

        def fill(pair: tuple[int, int]) -> None:
            n, np_ = pair
            total = mpmath.mpf(0)
            for i in range(len(nodes)):
                total += weights[i] * tables[i][n] * tables[i][np_]
            gram[n][np_] = total
            gram[np_][n] = total

        pairs = [(n, np_) for n in range(N + 1) for np_ in range(n, N + 1)]
        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(fill, pairs))
        else:
            for pair in pairs:
                fill(pair)

        diag = [expected_diagonal(measure, n, ctx) for n in range(N + 1)]
        off_max = mpmath.mpf(0)
        diag_err = mpmath.mpf(0)
        for n in range(N + 1):
            err = abs(gram[n][n] - diag[n]) / abs(diag[n])
            if err > diag_err:
                diag_err = err
            for np_ in range(n + 1, N + 1):
                rel = abs(gram[n][np_]) / mpmath.sqrt(abs(diag[n] * diag[np_]))
                if rel > off_max:
                    off_max = rel

        digest = hashlib.sha256(
            "|".join(to_decimal(x, 30) for x in nodes).encode()).hexdigest()[:16]

        return GramReport(
            family_kind=family.kind.value,
            measure_kind=measure.kind.value,
            q=family.q,
            s=family.s,
            a=measure.a,
            N=N,
            bits=ctx.bits,
            gram=gram,
            expected_diag=diag,
            off_diag_max=off_max,
            diag_rel_err_max=diag_err,
            m_lo=m_lo,
            m_hi=m_hi,
            tail_bound=tail,
            node_hash=digest,
        )


@dataclasses.dataclass
class NormalizationAdjudication:
    """Which closed form of Z(a) matches the actual lattice mass.

    The two candidates differ in the third infinite product:
    quadratic = (-a^2;q)_inf (-q/a^2;q)_inf (q;q)_inf,
    linear    = (-a^2;q)_inf (-q/a;q)_inf  (q;q)_inf.
    """
    measure_kind: str
    a: QReal
    q: QReal
    mass: QReal
    candidate_quadratic: QReal
    candidate_linear: QReal
    residual_quadratic: QReal
    residual_linear: QReal
    winner: str

    def to_details(self, digits: int) -> dict[str, str]:
        return {
            "candidate (-q/a^2;q)_inf residual": to_decimal(self.residual_quadratic, digits),
            "candidate (-q/a;q)_inf residual": to_decimal(self.residual_linear, digits),
            "winner": self.winner,
        }


def adjudicate_normalization(kind: MeasureKind, a, q,
                             ctx: PrecisionContext = DEFAULT_CONTEXT) -> NormalizationAdjudication:
    """Settle the Z(a) constant for an extremal dual measure empirically.

    The unnormalized lattice mass is recomputed from the weights and compared
    against candidate * (expected degree-0 diagonal) for both candidate
    closed forms; the winner is the candidate whose relative residual falls
    below ctx.tol.
    """
    if kind not in (MeasureKind.DUAL_QINV_EXTREMAL, MeasureKind.DUAL_Q_EXTREMAL):
        raise ValueError("adjudication applies to the extremal dual measures")
    if kind is MeasureKind.DUAL_QINV_EXTREMAL:
        measure = dual_qinv_extremal(a, q, ctx)
    else:
        measure = dual_q_extremal(a, q, ctx)
    q = measure.q
    with ctx.workprec():
        z_quad = lattice_normalization(measure.a, q, ctx)
        z_lin = (qpochhammer_inf(-measure.a ** 2, q, ctx)
                 * qpochhammer_inf(-q / measure.a, q, ctx)
                 * qpochhammer_inf(q, q, ctx))
        d0 = expected_diagonal(measure, 0, ctx)
        # Degree-0 Gram entry; point() divides by z_quad, so undo it.
        one = FamilySpec(FamilyKind.DUAL_DISCRETE_ULTRA, q,
                         measure.family_s(ctx))
        report = gram_matrix(one, measure, 0, ctx)
        mass = report.gram[0][0] * z_quad
        r_quad = abs(mass / (z_quad * d0) - 1)
        r_lin = abs(mass / (z_lin * d0) - 1)
        if r_quad < ctx.tol and r_quad < r_lin:
            winner = "(-q/a^2;q)_inf"
        elif r_lin < ctx.tol and r_lin < r_quad:
            winner = "(-q/a;q)_inf"
        else:
            winner = "none"
        return NormalizationAdjudication(
            measure_kind=kind.value, a=measure.a, q=q, mass=mass,
            candidate_quadratic=z_quad, candidate_linear=z_lin,
            residual_quadratic=r_quad, residual_linear=r_lin, winner=winner)
