"""Executable checks for every identity the library's families satisfy.

Each check returns an IdentityReport with the worst relative residual over
its sample grid; residuals are |LHS - RHS| / max(1, |LHS|) because the
quantities involved span many orders of magnitude.  The suite covers:

* the closed-form connections between even / odd q-inverse Hermite
  polynomials and the dual discrete q-ultraspherical family at s = q^-1 and
  s = q (checked with independent evaluators on both sides),
* the squared-argument recurrence chains those connections rest on,
* the infinite-product chain relating (q^2;q^2)_inf/(q;q^2)_inf to three
  restatements (the chain's third constant is q/2; the alternative constant
  2/q is evaluated alongside and reported for contrast),
* the equivalence of the two half-lattice orthogonality relations with the
  full-lattice extremal relation at a = q, including the vanishing
  cross-parity block,
* the real form of the parameter-inversion map between the two Hermite-type
  recurrences,
* the orthogonality of every measure kind, and the adjudication of the
  extremal normalization constant.
"""
from __future__ import annotations

import dataclasses

import mpmath

from .families import (FamilyKind, FamilySpec, dual_ultra_table,
                       qinv_hermite_coeffs, qinv_hermite_series,
                       qinv_hermite_table)
from .kernel import (DEFAULT_CONTEXT, PrecisionContext, QReal, as_qparam,
                     qpochhammer, qpochhammer_inf, to_decimal)
from .measures import (MeasureKind, adjudicate_normalization, dual_base,
                       dual_q_extremal, dual_qinv_extremal, expected_diagonal,
                       gram_matrix, hermite_extremal)

DEFAULT_PHI_GRID = ("-2", "-1", "-0.5", "0", "0.5", "1", "2")


@dataclasses.dataclass
class IdentityReport:
    identity_id: str
    grid: str
    max_residual: QReal
    passed: bool
    details: dict[str, str]

    def to_dict(self, digits: int) -> dict:
        return {
            "id": self.identity_id,
            "grid": self.grid,
            "max_residual": to_decimal(self.max_residual, digits),
            "pass": self.passed,
            "details": self.details,
        }


def _report(identity_id: str, grid: str, max_residual: QReal,
            ctx: PrecisionContext, details: dict[str, str] | None = None) -> IdentityReport:
    return IdentityReport(
        identity_id=identity_id,
        grid=grid,
        max_residual=max_residual,
        passed=bool(max_residual < ctx.tol),
        details=details or {},
    )


def _relative(lhs: QReal, rhs: QReal) -> QReal:
    return abs(lhs - rhs) / max(mpmath.mpf(1), abs(lhs))


def _phi_values(phi_grid, ctx: PrecisionContext) -> list[QReal]:
    grid = DEFAULT_PHI_GRID if phi_grid is None else phi_grid
    return [mpmath.mpf(p) for p in grid]


def check_even_connection(k_max: int, phi_grid, q,
                          ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """h_{2k}(sinh phi|q) = (-1)^k q^{-k^2} (q;q^2)_k D_k(e^{2phi}+e^{-2phi}; q^-1, q).

    The left side uses the explicit series, the right side the three-term
    recurrence of the dual family, so the two sides share no code path.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        worst = mpmath.mpf(0)
        for phi in _phi_values(phi_grid, ctx):
            y = mpmath.exp(2 * phi) + mpmath.exp(-2 * phi)
            dvals = dual_ultra_table(k_max, y, 1 / q, q, ctx)
            sign = 1
            for k in range(k_max + 1):
                lhs = qinv_hermite_series(2 * k, phi, q, ctx)
                rhs = (sign * q ** (-k * k)
                       * qpochhammer(q, q * q, k, ctx) * dvals[k])
                worst = max(worst, _relative(lhs, rhs))
                sign = -sign
        return _report(
            "even-connection",
            "k <= %d, phi in %s" % (k_max, list(DEFAULT_PHI_GRID if phi_grid is None else phi_grid)),
            worst, ctx)


def check_odd_connection(k_max: int, phi_grid, q,
                         ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """h_{2k+1}(sinh phi|q) = (-1)^k q^{-k(k+1)} (q^3;q^2)_k (2 sinh phi) D_k(q e^{2phi}+q e^{-2phi}; q, q)."""
    q = as_qparam(q, ctx)
    with ctx.workprec():
        worst = mpmath.mpf(0)
        for phi in _phi_values(phi_grid, ctx):
            y = q * (mpmath.exp(2 * phi) + mpmath.exp(-2 * phi))
            two_sinh = mpmath.exp(phi) - mpmath.exp(-phi)
            dvals = dual_ultra_table(k_max, y, q, q, ctx)
            sign = 1
            for k in range(k_max + 1):
                lhs = qinv_hermite_series(2 * k + 1, phi, q, ctx)
                rhs = (sign * q ** (-k * (k + 1))
                       * qpochhammer(q ** 3, q * q, k, ctx) * two_sinh * dvals[k])
                worst = max(worst, _relative(lhs, rhs))
                sign = -sign
        return _report(
            "odd-connection",
            "k <= %d, phi in %s" % (k_max, list(DEFAULT_PHI_GRID if phi_grid is None else phi_grid)),
            worst, ctx)


def check_recurrence_chains(k_max: int, phi_grid, q,
                            ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """The squared-argument recurrences behind the two connections.

    Even side: (e^{2phi}+e^{-2phi}) h_{2k} = h_{2k+2}
        + q^{-2k}(1+q^-1) h_{2k} + q^{-4k+1}(1-q^{2k})(1-q^{2k-1}) h_{2k-2},
    and the same recurrence for T_n = (-1)^n q^{-n^2} (q;q^2)_n D_n(y; q^-1, q).
    Odd side: q(e^{2phi}+e^{-2phi}) h_{2k+1} = q h_{2k+3}
        + q^{-2k}(1+q^-1) h_{2k+1} + q^{-4k}(1-q^{2k})(1-q^{2k+1}) h_{2k-1},
    and its mirror for Tt_n = (-1)^n q^{-n(n+1)} (q^3;q^2)_n D_n(qy; q, q),
    whose leading term carries the extra factor q.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        worst = {"even-hermite": mpmath.mpf(0), "even-dual": mpmath.mpf(0),
                 "odd-hermite": mpmath.mpf(0), "odd-dual": mpmath.mpf(0)}
        for phi in _phi_values(phi_grid, ctx):
            x = mpmath.sinh(phi)
            y = mpmath.exp(2 * phi) + mpmath.exp(-2 * phi)
            hs = qinv_hermite_table(2 * k_max + 3, x, q, ctx)
            for k in range(k_max + 1):
                lhs = y * hs[2 * k]
                rhs = hs[2 * k + 2] + q ** (-2 * k) * (1 + 1 / q) * hs[2 * k]
                if k >= 1:
                    rhs += (q ** (-4 * k + 1) * (1 - q ** (2 * k))
                            * (1 - q ** (2 * k - 1)) * hs[2 * k - 2])
                worst["even-hermite"] = max(worst["even-hermite"], _relative(lhs, rhs))

                lhs = q * y * hs[2 * k + 1]
                rhs = q * hs[2 * k + 3] + q ** (-2 * k) * (1 + 1 / q) * hs[2 * k + 1]
                if k >= 1:
                    rhs += (q ** (-4 * k) * (1 - q ** (2 * k))
                            * (1 - q ** (2 * k + 1)) * hs[2 * k - 1])
                worst["odd-hermite"] = max(worst["odd-hermite"], _relative(lhs, rhs))

            dvals = dual_ultra_table(k_max + 1, y, 1 / q, q, ctx)
            t = [(-1) ** n * q ** (-n * n) * qpochhammer(q, q * q, n, ctx) * dvals[n]
                 for n in range(k_max + 2)]
            for n in range(k_max + 1):
                lhs = y * t[n]
                rhs = t[n + 1] + q ** (-2 * n - 1) * (1 + q) * t[n]
                if n >= 1:
                    rhs += (q ** (-4 * n + 1) * (1 - q ** (2 * n))
                            * (1 - q ** (2 * n - 1)) * t[n - 1])
                worst["even-dual"] = max(worst["even-dual"], _relative(lhs, rhs))

            yq = q * y
            dvals = dual_ultra_table(k_max + 1, yq, q, q, ctx)
            t = [(-1) ** n * q ** (-n * (n + 1)) * qpochhammer(q ** 3, q * q, n, ctx) * dvals[n]
                 for n in range(k_max + 2)]
            for n in range(k_max + 1):
                lhs = yq * t[n]
                rhs = q * t[n + 1] + q ** (-2 * n - 1) * (1 + q) * t[n]
                if n >= 1:
                    rhs += (q ** (-4 * n) * (1 - q ** (2 * n))
                            * (1 - q ** (2 * n + 1)) * t[n - 1])
                worst["odd-dual"] = max(worst["odd-dual"], _relative(lhs, rhs))

        digits = ctx.digits
        return _report(
            "recurrence-chains",
            "k <= %d, phi in %s" % (k_max, list(DEFAULT_PHI_GRID if phi_grid is None else phi_grid)),
            max(worst.values()), ctx,
            {name: to_decimal(value, digits) for name, value in worst.items()})


def check_product_chain(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """(q^2;q^2)_inf/(q;q^2)_inf restated three ways.

    The chain: = (-q;q)_inf^2 (q;q)_inf
               = (1/2) (-1;q)_inf (-q;q)_inf (q;q)_inf
               = (q/2) (-q^2;q)_inf (-q^-1;q)_inf (q;q)_inf.
    The constant q/2 in the third member is forced by
    (-q^-1;q)_inf = (1+q^-1)(-1;q)_inf and (-q^2;q)_inf = (-q;q)_inf/(1+q);
    the residual against the alternative constant 2/q is reported for
    contrast.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        q2 = q * q
        base = qpochhammer_inf(q2, q2, ctx) / qpochhammer_inf(q, q2, ctx)
        euler = qpochhammer_inf(q, q, ctx)
        neg_q = qpochhammer_inf(-q, q, ctx)
        neg_one = qpochhammer_inf(mpmath.mpf(-1), q, ctx)
        neg_q2 = qpochhammer_inf(-q2, q, ctx)
        neg_qinv = qpochhammer_inf(-1 / q, q, ctx)

        squared_form = neg_q ** 2 * euler
        halved_form = neg_one * neg_q * euler / 2
        shifted = neg_q2 * neg_qinv * euler
        shifted_form = q / 2 * shifted
        shifted_alt = 2 / q * shifted

        digits = ctx.digits
        details = {
            "squared-form": to_decimal(_relative(base, squared_form), digits),
            "halved-form": to_decimal(_relative(base, halved_form), digits),
            "shifted-form-constant-q/2": to_decimal(_relative(base, shifted_form), digits),
            "shifted-form-constant-2/q": to_decimal(_relative(base, shifted_alt), digits),
            "doubling-subidentity": to_decimal(_relative(neg_one, 2 * neg_q), digits),
        }
        worst = max(_relative(base, squared_form),
                    _relative(base, halved_form),
                    _relative(base, shifted_form),
                    _relative(neg_one, 2 * neg_q))
        return _report("product-chain", "q=%s" % mpmath.nstr(q, 8), worst, ctx, details)


def check_inverted_parameter_recurrence(n_max: int, x_grid, q,
                                        ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """The base-inversion map onto the companion Hermite-type recurrence.

    Substituting x -> ix and multiplying degree n by i^-n turns the
    recurrence P_{n+1} = 2x P_n - (1 - p^n) P_{n-1} with p = q^-1 into
    h_{n+1} = 2x h_n + (1 - q^-n) h_{n-1}, which must coincide with the
    family's own recurrence because (1 - q^-n) = -q^-n (1 - q^n).  Checked
    three ways: the coefficient identity itself, the transformed recurrence
    on series-evaluated values, and the even/odd coefficient structure that
    makes the map real-valued.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        coeff_worst = mpmath.mpf(0)
        for n in range(1, n_max + 1):
            r = q ** (-n)
            coeff_worst = max(coeff_worst,
                              _relative(1 - r, -r * (1 - q ** n)))

        grid = DEFAULT_PHI_GRID if x_grid is None else x_grid
        xs = [mpmath.mpf(v) for v in grid]
        value_worst = mpmath.mpf(0)
        for x in xs:
            phi = mpmath.asinh(x)
            hs = [qinv_hermite_series(n, phi, q, ctx) for n in range(n_max + 2)]
            for n in range(1, n_max + 1):
                lhs = hs[n + 1]
                rhs = 2 * x * hs[n] + (1 - q ** (-n)) * hs[n - 1]
                value_worst = max(value_worst, _relative(lhs, rhs))

        parity_worst = mpmath.mpf(0)
        for n in range(n_max + 1):
            coeffs = qinv_hermite_coeffs(n, q, ctx)
            for j, c in enumerate(coeffs):
                if (n - j) % 2 == 1:
                    parity_worst = max(parity_worst, abs(c))

        digits = ctx.digits
        details = {
            "coefficient-transform": to_decimal(coeff_worst, digits),
            "series-values-recurrence": to_decimal(value_worst, digits),
            "parity-zeros": to_decimal(parity_worst, digits),
        }
        return _report(
            "inverted-parameter-recurrence",
            "n <= %d, x in %s" % (n_max, list(grid)),
            max(coeff_worst, value_worst, parity_worst), ctx, details)


def check_half_to_full_lattice(N: int, q,
                               ctx: PrecisionContext = DEFAULT_CONTEXT) -> IdentityReport:
    """The two half-lattice relations glue to the full extremal lattice at a = q.

    Build the full-lattice Gram S_A for h_0..h_N on the nodes
    xhat_j = (q^-j - q^j)/2 with weights u_j = (1 + q^{2j}) q^{j(2j-1)}
    (u_0 halved on the half-lattice), taking every h value from the dual
    family through the two connection formulas and every weight from the two
    base measures.  Then compare entrywise against q * Z(q) times the Gram of
    the extremal measure at a = q, whose node at index m is xhat_{m+1}.
    The cross-parity block of the extremal Gram must vanish on its own.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        fam_h = FamilySpec(FamilyKind.QINV_HERMITE, q)
        meas = hermite_extremal(q, q, ctx)
        ref = gram_matrix(fam_h, meas, N, ctx)
        phi_const = meas.normalization(ctx)
        scale_const = q * phi_const

        n_even = N // 2
        n_odd = (N - 1) // 2 if N >= 1 else -1
        base_even = dual_base(1 / q, q, "even", ctx)
        base_odd = dual_base(q, q, "odd", ctx)

        J = max(ref.m_hi + 1, -ref.m_lo + 1) + 3
        sign_even = [(-1) ** n * q ** (-n * n) * qpochhammer(q, q * q, n, ctx)
                     for n in range(n_even + 1)]
        sign_odd = [(-1) ** n * q ** (-n * (n + 1)) * qpochhammer(q ** 3, q * q, n, ctx)
                    for n in range(n_odd + 1)]

        values: list[list[QReal]] = []
        lattice_w: list[QReal] = []
        node_resid = mpmath.mpf(0)
        weight_resid = mpmath.mpf(0)
        for j in range(J + 1):
            xhat = (q ** (-j) - q ** j) / 2
            node_e, w_e = base_even.point(j, ctx)
            node_resid = max(node_resid,
                             _relative(node_e, 4 * xhat * xhat + 2))
            dvals = dual_ultra_table(n_even, node_e, 1 / q, q, ctx)
            row = [mpmath.mpf(0)] * (N + 1)
            for n in range(n_even + 1):
                row[2 * n] = sign_even[n] * dvals[n]
            if j >= 1 and n_odd >= 0:
                node_o, w_o = base_odd.point(j - 1, ctx)
                node_resid = max(node_resid, _relative(node_o, q * node_e))
                dvals = dual_ultra_table(n_odd, node_o, q, q, ctx)
                for n in range(n_odd + 1):
                    row[2 * n + 1] = sign_odd[n] * 2 * xhat * dvals[n]
            u = w_e * (2 if j == 0 else 1)
            if j >= 1:
                w_folded = w_o * (1 - q) * (1 - q * q) / (q * 4 * xhat * xhat)
                weight_resid = max(weight_resid, _relative(u, w_folded))
            values.append(row)
            lattice_w.append(u)

        entry_worst = mpmath.mpf(0)
        cross_worst = mpmath.mpf(0)
        diag_worst = mpmath.mpf(0)
        mass = (qpochhammer_inf(q * q, q * q, ctx)
                / qpochhammer_inf(q, q * q, ctx))
        for i in range(N + 1):
            for ip in range(i, N + 1):
                total = lattice_w[0] * values[0][i] * values[0][ip]
                if (i + ip) % 2 == 0:
                    for j in range(1, J + 1):
                        total += 2 * lattice_w[j] * values[j][i] * values[j][ip]
                ref_entry = scale_const * ref.gram[i][ip]
                d_i = scale_const * expected_diagonal(meas, i, ctx)
                d_ip = scale_const * expected_diagonal(meas, ip, ctx)
                scale = max(mpmath.mpf(1), mpmath.sqrt(abs(d_i * d_ip)))
                entry_worst = max(entry_worst, abs(total - ref_entry) / scale)
                if (i + ip) % 2 == 1:
                    cross_worst = max(cross_worst, abs(ref_entry) / scale)
                elif i == ip:
                    if i % 2 == 0:
                        n = i // 2
                        closed = 2 * mass * q ** (-n * (2 * n + 1)) * qpochhammer(q, q, 2 * n, ctx)
                    else:
                        n = (i - 1) // 2
                        closed = 2 * mass * q ** (-(n + 1) * (2 * n + 1)) * qpochhammer(q, q, 2 * n + 1, ctx)
                    diag_worst = max(diag_worst, _relative(total, closed))

        const_resid = _relative(2 * mass, scale_const)
        digits = ctx.digits
        details = {
            "entrywise": to_decimal(entry_worst, digits),
            "cross-parity-block": to_decimal(cross_worst, digits),
            "diagonal-closed-forms": to_decimal(diag_worst, digits),
            "node-alignment": to_decimal(node_resid, digits),
            "folded-odd-weights": to_decimal(weight_resid, digits),
            "lattice-constant": to_decimal(const_resid, digits),
        }
        worst = max(entry_worst, cross_worst, diag_worst, node_resid,
                    weight_resid, const_resid)
        return _report(
            "half-to-full-lattice",
            "degrees 0..%d, lattice |j| <= %d, q=%s" % (N, J, mpmath.nstr(q, 8)),
            worst, ctx, details)


def _gram_entry(identity_id: str, family: FamilySpec, measure, N: int,
                ctx: PrecisionContext, workers: int) -> IdentityReport:
    rep = gram_matrix(family, measure, N, ctx, workers=workers)
    digits = ctx.digits
    details = {
        "off_diag_max": to_decimal(rep.off_diag_max, digits),
        "diag_rel_err_max": to_decimal(rep.diag_rel_err_max, digits),
        "m_window": "[%d, %d]" % (rep.m_lo, rep.m_hi),
        "tail_bound": to_decimal(rep.tail_bound, digits),
    }
    grid = "N=%d, measure=%s" % (N, rep.measure_kind)
    if rep.a is not None:
        grid += ", a=%s" % mpmath.nstr(rep.a, 8)
    if rep.s is not None:
        grid += ", s=%s" % mpmath.nstr(rep.s, 8)
    return _report(identity_id, grid,
                   max(rep.off_diag_max, rep.diag_rel_err_max), ctx, details)


def _normalization_entry(identity_id: str, kind: MeasureKind, a, q,
                         ctx: PrecisionContext) -> IdentityReport:
    adj = adjudicate_normalization(kind, a, q, ctx)
    winner_res = min(adj.residual_quadratic, adj.residual_linear)
    loser_res = max(adj.residual_quadratic, adj.residual_linear)
    with ctx.workprec():
        definitive = winner_res < ctx.tol and loser_res > mpmath.sqrt(ctx.tol)
    details = adj.to_details(ctx.digits)
    details["definitive"] = "yes" if definitive else "no"
    report = _report(identity_id,
                     "a=%s, q=%s" % (mpmath.nstr(adj.a, 8), mpmath.nstr(adj.q, 8)),
                     winner_res, ctx, details)
    report.passed = bool(report.passed and definitive)
    return report


SUITE_IDS = (
    "even-connection",
    "odd-connection",
    "recurrence-chains",
    "product-chain",
    "inverted-parameter-recurrence",
    "base-even-orthogonality",
    "base-odd-orthogonality",
    "hermite-extremal-orthogonality",
    "qinv-extremal-orthogonality",
    "q-extremal-orthogonality",
    "qinv-extremal-normalization",
    "q-extremal-normalization",
    "half-to-full-lattice",
)


def run_suite(q, ctx: PrecisionContext = DEFAULT_CONTEXT, *,
              only: list[str] | None = None, k_max: int = 6,
              phi_grid=None, N: int = 8, s=None, a=None,
              workers: int = 1) -> list[IdentityReport]:
    """Run the named checks (all of SUITE_IDS by default) and collect reports.

    s defaults to 1 for the base-measure entries; a defaults to (1+q)/2 for
    the extremal entries.  A check that raises is reported as failed with
    the error text in its details rather than aborting the suite.
    """
    q = as_qparam(q, ctx)
    with ctx.workprec():
        s_val = mpmath.mpf(1) if s is None else mpmath.mpf(s)
        a_val = (1 + q) / 2 if a is None else mpmath.mpf(a)
    dual = FamilyKind.DUAL_DISCRETE_ULTRA

    def base_entry(parity: str):
        return _gram_entry(
            "base-%s-orthogonality" % parity,
            FamilySpec(dual, q, s_val), dual_base(s_val, q, parity, ctx),
            N, ctx, workers)

    thunks = {
        "even-connection": lambda: check_even_connection(k_max, phi_grid, q, ctx),
        "odd-connection": lambda: check_odd_connection(k_max, phi_grid, q, ctx),
        "recurrence-chains": lambda: check_recurrence_chains(k_max, phi_grid, q, ctx),
        "product-chain": lambda: check_product_chain(q, ctx),
        "inverted-parameter-recurrence":
            lambda: check_inverted_parameter_recurrence(10, phi_grid, q, ctx),
        "base-even-orthogonality": lambda: base_entry("even"),
        "base-odd-orthogonality": lambda: base_entry("odd"),
        "hermite-extremal-orthogonality": lambda: _gram_entry(
            "hermite-extremal-orthogonality",
            FamilySpec(FamilyKind.QINV_HERMITE, q),
            hermite_extremal(a_val, q, ctx), N, ctx, workers),
        "qinv-extremal-orthogonality": lambda: _gram_entry(
            "qinv-extremal-orthogonality",
            FamilySpec(dual, q, 1 / q), dual_qinv_extremal(a_val, q, ctx),
            N, ctx, workers),
        "q-extremal-orthogonality": lambda: _gram_entry(
            "q-extremal-orthogonality",
            FamilySpec(dual, q, q), dual_q_extremal(a_val, q, ctx),
            N, ctx, workers),
        "qinv-extremal-normalization": lambda: _normalization_entry(
            "qinv-extremal-normalization", MeasureKind.DUAL_QINV_EXTREMAL,
            a_val, q, ctx),
        "q-extremal-normalization": lambda: _normalization_entry(
            "q-extremal-normalization", MeasureKind.DUAL_Q_EXTREMAL,
            a_val, q, ctx),
        "half-to-full-lattice": lambda: check_half_to_full_lattice(N, q, ctx),
    }

    selected = list(SUITE_IDS) if only is None else list(only)
    unknown = [name for name in selected if name not in thunks]
    if unknown:
        raise ValueError("unknown identity ids: %s (known: %s)"
                         % (", ".join(unknown), ", ".join(SUITE_IDS)))
    reports = []
    for name in selected:
        try:
            reports.append(thunks[name]())
        except Exception as exc:
            reports.append(IdentityReport(
                identity_id=name,
                grid="",
                max_residual=mpmath.inf,
                passed=False,
                details={"error": "%s: %s" % (type(exc).__name__, exc)},
            ))
    return reports
