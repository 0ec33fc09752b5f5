"""Lagrangian input: momentum maps, regularity, induced Hamiltonians.

The momentum map and its extended scalar entry are direct derivative
formulas.  Closed-form inversion is supported for Lagrangians quadratic in
the velocities (linear momentum-velocity relation solved exactly); the
Euler-Lagrange residuals act as an independent oracle for the derived field
equations, using formal second-order symbols that never leave this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .coords import BundleChart
from .errors import ChartMismatchError, RegularityError
from .forms import CoordForm, base_contraction_key
from .hdw import HamiltonianModel, derive_restricted
from .symbolic import simplify


@dataclass(frozen=True)
class LagrangianModel:
    """A Lagrangian function on the velocity chart (x, y, v)."""

    chart: BundleChart
    lag: sp.Expr

    def __post_init__(self):
        object.__setattr__(self, "lag", self.chart.validate_on(self.lag, "L"))


@dataclass
class LegendreResult:
    model: LagrangianModel
    momenta: dict            # (a, nu) -> Expr in (x, y, v)
    extended: sp.Expr        # lag - v . dlag/dv
    hessian: dict            # ((a, nu), (b, eta)) -> Expr
    classification: str      # hyper-regular-closed-form | regular-local | degenerate
    inverse_velocities: dict = field(default_factory=dict)  # (a, nu) -> Expr in (x, y, p)
    induced_h: sp.Expr | None = None


def _velocity_slots(chart: BundleChart):
    return [(a, nu) for a in range(1, chart.n + 1) for nu in range(1, chart.m + 1)]


def legendre_maps(model: LagrangianModel) -> LegendreResult:
    """Momentum map, extended entry, Hessian, and regularity classification."""
    chart, lag = model.chart, model.lag
    slots = _velocity_slots(chart)
    momenta = {(a, nu): simplify(sp.diff(lag, chart.v(a, nu))) for a, nu in slots}
    extended = simplify(
        lag - sum(chart.v(a, nu) * momenta[(a, nu)] for a, nu in slots))
    hessian = {}
    for s1 in slots:
        for s2 in slots:
            hessian[(s1, s2)] = simplify(
                sp.diff(lag, chart.v(*s1), chart.v(*s2)))
    hmat = sp.Matrix([[hessian[(s1, s2)] for s2 in slots] for s1 in slots])
    det = simplify(hmat.det())
    if det == 0:
        classification = "degenerate"
    elif det.free_symbols:
        classification = "regular-local"
    else:
        classification = "hyper-regular-closed-form"
    result = LegendreResult(model, momenta, extended, hessian, classification)
    if classification == "hyper-regular-closed-form" and all(
            hessian[(s1, s2)].free_symbols == set() or
            not (hessian[(s1, s2)].free_symbols & {chart.v(*s) for s in slots})
            for s1 in slots for s2 in slots):
        result.inverse_velocities = _invert_linear(chart, momenta, slots)
    return result


def _invert_linear(chart, momenta, slots):
    """Solve p = dlag/dv for v when the relation is affine in v."""
    vsyms = [chart.v(*s) for s in slots]
    eqs = [momenta[s] - chart.p(*s) for s in slots]
    try:
        A, b = sp.linear_eq_to_matrix(eqs, vsyms)
        sol = A.LUsolve(b)
    except (sp.NonInvertibleMatrixError, sp.PolynomialError, ValueError):
        return {}
    return {s: simplify(sol[i]) for i, s in enumerate(slots)}


def hamiltonian_from_lagrangian(res: LegendreResult) -> HamiltonianModel:
    """Induced Hamiltonian h = p . V - lag(V) on the restricted chart."""
    if res.classification != "hyper-regular-closed-form" or not res.inverse_velocities:
        raise RegularityError(
            f"no closed-form inverse for classification {res.classification!r}; "
            "supply a Hamiltonian directly")
    chart = res.model.chart
    subs = {chart.v(*s): expr for s, expr in res.inverse_velocities.items()}
    h = sum(chart.p(*s) * subs[chart.v(*s)] for s in _velocity_slots(chart))
    h -= res.model.lag.subs(subs, simultaneous=True)
    return HamiltonianModel(chart, simplify(h), provenance="from-Legendre")


def second_order_symbol(a: int, nu: int, eta: int) -> sp.Symbol:
    """Formal symmetric second-derivative symbol used only by the oracle."""
    lo, hi = sorted((nu, eta))
    return sp.Symbol(f"y{a}_dd{lo}_{hi}")


def _total_derivative(chart: BundleChart, nu: int, expr) -> sp.Expr:
    """Formal total derivative along x^nu treating y, v as field functions."""
    out = sp.diff(expr, chart.x(nu))
    for a in range(1, chart.n + 1):
        out += chart.v(a, nu) * sp.diff(expr, chart.y(a))
        for eta in range(1, chart.m + 1):
            out += second_order_symbol(a, nu, eta) * sp.diff(expr, chart.v(a, eta))
    return out


def euler_lagrange(model: LagrangianModel) -> list:
    """The n Euler-Lagrange residuals over formal first/second-order symbols."""
    chart, lag = model.chart, model.lag
    out = []
    for a in range(1, chart.n + 1):
        res = -sp.diff(lag, chart.y(a))
        for nu in range(1, chart.m + 1):
            res += _total_derivative(chart, nu, sp.diff(lag, chart.v(a, nu)))
        out.append(simplify(res))
    return out


def hdw_momentum_elimination(model: LagrangianModel) -> list:
    """Trace HDW equations with momenta eliminated through the momentum map.

    Substituting p = dlag/dv into the derived field's trace constraint and
    expanding the divergence with formal total derivatives yields n residual
    expressions over the same symbols as `euler_lagrange`; structural
    equality of the two lists is the round-trip correspondence check.
    """
    res = legendre_maps(model)
    ham = hamiltonian_from_lagrangian(res)
    chart = model.chart
    subs = {chart.p(*s): res.momenta[s] for s in _velocity_slots(chart)}
    out = []
    for a in range(1, chart.n + 1):
        expr = sp.diff(ham.h, chart.y(a)).subs(subs, simultaneous=True)
        for nu in range(1, chart.m + 1):
            expr += _total_derivative(chart, nu, res.momenta[(a, nu)])
        out.append(simplify(expr))
    return out


def rank_diagnostics(chart: BundleChart, embedding: dict, h_P, samples,
                     params=None, tol_factor: float = 1e-9) -> list:
    """Kernel dimension of the contracted pullback structure at sample points.

    `embedding` maps every restricted-chart coordinate to an expression over
    the parameter symbols; `h_P` is an expression over the parameters.  At
    each sample the (m+1)-form built from the pulled-back canonical part and
    h_P is flattened to the matrix of single-vector contractions; the
    reported number is the dimension of its kernel intersected with the
    vectors vertical over the base (tolerance 1e-9 times the largest
    singular value).  The vertical restriction is what degeneracy of the
    underlying Lagrangian obstructs; without it the m=1 case would always
    report the one-dimensional evolution direction.
    """
    embedding = {sp.Symbol(str(k)) if not isinstance(k, sp.Symbol) else k:
                 sp.sympify(v) for k, v in embedding.items()}
    h_P = sp.sympify(h_P)
    if params is None:
        params = sorted({s for e in embedding.values() for s in e.free_symbols}
                        | set(h_P.free_symbols), key=lambda s: s.name)
    params = tuple(sp.Symbol(str(p)) if not isinstance(p, sp.Symbol) else p
                   for p in params)
    d = len(params)
    if d == 0:
        raise ChartMismatchError("embedding needs at least one parameter")
    missing = [c for c in chart.coords("J1") if c not in embedding]
    if missing:
        raise ChartMismatchError(
            "embedding must cover every restricted-chart coordinate; missing: "
            + ", ".join(s.name for s in missing))

    # canonical part  sum p dy ^ d^{m-1}x  pulled back, minus h_P volume
    coords = chart.coords("J1")
    index = {s: i for i, s in enumerate(coords)}
    theta = CoordForm(coords, chart.m)
    from .forms import _merge_keys
    for a in range(1, chart.n + 1):
        for nu in range(1, chart.m + 1):
            key, sign = base_contraction_key(chart, "J1", nu)
            merged = _merge_keys((index[chart.y(a)],), key)
            if merged is None:
                continue
            full_key, msign = merged
            theta.add_term(full_key, sign * msign * chart.p(a, nu))
    theta_P = theta.pullback(params, embedding)
    vol_ids = [chart.x(nu) for nu in range(1, chart.m + 1)]
    vol = CoordForm(coords, chart.m,
                    {tuple(index[s] for s in vol_ids): 1}).pullback(params, embedding)
    theta_P = theta_P + vol.scale(-h_P)
    omega_P = -theta_P.d()

    if omega_P.degree > d:
        raise ChartMismatchError(
            f"pullback degree {omega_P.degree} exceeds parameter count {d}")

    lam_terms = [(key, sp.lambdify(params, coeff, "numpy"))
                 for key, coeff in omega_P.terms.items()]
    k = omega_P.degree
    cols = {c: i for i, c in enumerate(itertools.combinations(range(d), k - 1))}
    base_jac = [[sp.lambdify(params, sp.diff(embedding[chart.x(nu)], u), "numpy")
                 for u in params] for nu in range(1, chart.m + 1)]
    out = []
    for pt in samples:
        vals = [float(v) for v in pt]
        if len(vals) != d:
            raise ChartMismatchError(
                f"sample {pt} has {len(vals)} entries, expected {d}")
        M = np.zeros((d, len(cols)))
        for key, fn in lam_terms:
            c = float(fn(*vals))
            for pos, i in enumerate(key):
                rest = key[:pos] + key[pos + 1:]
                M[i, cols[rest]] += ((-1) ** pos) * c
        # verticality rows: kernel vectors must not move the base coordinates
        B = np.array([[float(fn(*vals)) for fn in row] for row in base_jac])
        vert_dim = d - int(np.linalg.matrix_rank(B))
        K = np.hstack([M, B.T])
        if np.allclose(K, 0.0):
            out.append(vert_dim)
            continue
        svals = np.linalg.svd(K, compute_uv=False)
        rank = int(np.sum(svals > tol_factor * svals[0]))
        out.append(d - rank)
    return out
