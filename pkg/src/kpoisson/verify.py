"""Seeded identity suites and report serialization.

Each registered check returns the largest observed error over its samples;
the check passes iff that error is within its tolerance.  Every (suite, dim,
check) triple draws from its own RNG stream so that suites do not perturb each
other.
"""
from __future__ import annotations

import itertools
import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import affine, brackets, groups, lorentz, schouten
from .brackets import PolyFunction
from .groups import Frame
from .lorentz import Component, QuadraticSpace

SUITES = ("core", "groups", "brackets", "schouten", "affine")
KAPPA_SUITES = ("core", "groups", "brackets")


@dataclass(frozen=True)
class SuiteConfig:
    dims: tuple = (4, 5, 6)
    seed: int = 0
    samples: int = 100
    tol_structural: float = 1e-10
    tol_numeric: float = 1e-9
    tol_fd: float = 1e-6

    def count(self, base: int) -> int:
        """Scale a default sample count (given for samples = 100)."""
        return max(1, int(round(base * self.samples / 100)))


@dataclass(frozen=True)
class CheckResult:
    name: str
    dim: int
    max_error: float
    tolerance: float
    samples_run: int

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def to_json(self) -> dict:
        return {"name": self.name, "dim": self.dim, "max_error": float(self.max_error),
                "tolerance": float(self.tolerance), "pass": self.passed}


@dataclass
class Report:
    suite: str
    dims: list
    seed: int
    checks: list = field(default_factory=list)
    h_match: float | None = None

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    @property
    def exit_status(self) -> int:
        return 1 if self.failed else 0


@dataclass(frozen=True)
class _Check:
    suite: str
    name: str
    func: Callable
    base_samples: int
    tol: str


_REGISTRY: list[_Check] = []


def check(suite: str, name: str, samples: int = 100, tol: str = "numeric"):
    """Register ``func(dim, rng, n, cfg) -> (max_error, extra)``.

    ``tol`` names a SuiteConfig tolerance, or ``"count"`` for checks whose
    error is a number of misclassified samples (tolerance 0).
    """
    def deco(func):
        _REGISTRY.append(_Check(suite, name, func, samples, tol))
        return func
    return deco


def _tolerance(c: _Check, cfg: SuiteConfig) -> float:
    if c.tol == "count":
        return 0.0
    return {"structural": cfg.tol_structural, "numeric": cfg.tol_numeric,
            "fd": cfg.tol_fd}[c.tol]


def _rng(cfg: SuiteConfig, suite: str, dim: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence([cfg.seed, zlib.crc32(suite.encode()), dim,
                                 zlib.crc32(name.encode())])
    return np.random.default_rng(ss)


def _mink(dim: int) -> QuadraticSpace:
    return QuadraticSpace.from_signature([1] + [-1] * (dim - 1))


def _maxdiff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---------------------------------------------------------------------------
# core
# ---------------------------------------------------------------------------

@check("core", "completeness", tol="structural")
def _completeness(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        basis = lorentz.random_orthonormal_basis(sp, rng)
        x, y = rng.uniform(-1, 1, (2, dim))
        signs = [np.sign(sp.eta(v, v)) for v in basis]
        recon = sum(s * sp.eta(x, v) * v for s, v in zip(signs, basis))
        eta_xy = sum(s * sp.eta(x, v) * sp.eta(v, y) for s, v in zip(signs, basis))
        err = max(err, _maxdiff(recon, x), abs(eta_xy - sp.eta(x, y)))
    return err


@check("core", "commutator_identity", tol="structural")
def _commutator(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    L = lambda a, b: lorentz.lambda_op(sp, a, b)
    e = sp.eta
    err = 0.0
    for _ in range(n):
        x, y, z, t = rng.uniform(-1, 1, (4, dim))
        lhs = lorentz.commutator(L(x, y), L(z, t))
        rhs = e(x, t) * L(y, z) + e(y, z) * L(x, t) - e(x, z) * L(y, t) - e(y, t) * L(x, z)
        err = max(err, _maxdiff(lhs, rhs))
    return err


@check("core", "lambda_equivariance")
def _lambda_equivariance(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        g = lorentz.random_so0(sp, rng)
        x, y = rng.uniform(-1, 1, (2, dim))
        err = max(err, _maxdiff(lorentz.lambda_op(sp, g @ x, g @ y),
                                lorentz.ad(sp, g, lorentz.lambda_op(sp, x, y))))
    return err


@check("core", "k_invariance")
def _k_invariance(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        g = lorentz.random_so0(sp, rng)
        X, Y = (sp.so_matrix(c) for c in rng.uniform(-1, 1, (2, sp.so_dim)))
        k0 = lorentz.form_k(sp, X, Y)
        k1 = lorentz.form_k(sp, lorentz.ad(sp, g, X), lorentz.ad(sp, g, Y))
        phi, psi = lorentz.k_flat(sp, X), lorentz.k_flat(sp, Y)
        kt = lorentz.form_k_tilde(sp, lorentz.ad_sharp(sp, g, phi), lorentz.ad_sharp(sp, g, psi))
        # independent oracle: k(X, Y) = tr(XY) / 2
        err = max(err, abs(k1 - k0), abs(kt - k0), abs(k0 - 0.5 * np.trace(X @ Y)))
    return err


def _random_null_data(sp, rng):
    t, s = _bounded_pair(sp, rng)
    f = t - s
    r = rng.uniform(-1, 1, sp.dim)
    u = r - sp.eta(r, f) * t
    return u, f


def _bounded_pair(sp, rng):
    """Unit timelike t and unit spacelike s, orthogonal, with bounded entries."""
    g = lorentz.random_so0(sp, rng, factors=2, param_range=1.0)
    return g[:, 0], g[:, -1]


@check("core", "exp_null_vs_series")
def _exp_null(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        u, f = _random_null_data(sp, rng)
        closed = lorentz.exp_closed(sp, "null", u, f)
        err = max(err, _maxdiff(closed, lorentz.exp_series(lorentz.lambda_op(sp, u, f))))
    return err


@check("core", "exp_boost_vs_series")
def _exp_boost(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        t, s = _bounded_pair(sp, rng)
        nu = rng.uniform(-1.5, 1.5)
        closed = lorentz.exp_closed(sp, "boost", s, t, nu=nu)
        err = max(err, _maxdiff(closed, lorentz.exp_series(nu * lorentz.lambda_op(sp, s, t))))
    return err


@check("core", "exp_rotation_vs_series")
def _exp_rotation(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        g = lorentz.random_so0(sp, rng, factors=2, param_range=1.0)
        i, j = rng.choice(np.arange(1, dim), 2, replace=False)
        x, y = g[:, i], g[:, j]
        nu = rng.uniform(-math.pi, math.pi)
        closed = lorentz.exp_closed(sp, "rotation", x, y, nu=nu)
        err = max(err, _maxdiff(closed, lorentz.exp_series(nu * lorentz.lambda_op(sp, x, y))))
    return err


@check("core", "projection_identity", tol="structural")
def _projection(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    err = 0.0
    for _ in range(n):
        basis = lorentz.random_orthonormal_basis(sp, rng)
        i, j = rng.choice(dim, 2, replace=False)
        v, w = basis[i], basis[j]
        P = lorentz.projection_p(sp, v, w)
        L = lorentz.lambda_op(sp, v, w)
        sv, sw = np.sign(sp.eta(v, v)), np.sign(sp.eta(w, w))
        scale = max(1.0, float(np.max(np.abs(P))))
        err = max(err, _maxdiff(P @ P, P) / scale ** 2, _maxdiff(P, -sv * sw * L @ L) / scale ** 2)
    return err


@check("core", "component_table", tol="count")
def _components(dim, rng, n, cfg):
    sp = lorentz.make_minkowski(dim)
    bad = 0
    comps = list(Component)
    for _ in range(n):
        ca, cb = comps[rng.integers(4)], comps[rng.integers(4)]
        g = lorentz.random_orthogonal(sp, rng, ca)
        h = lorentz.random_orthogonal(sp, rng, cb)
        got_g = lorentz.classify_component(sp, g)
        got = lorentz.classify_component(sp, g @ h)
        bad += (got_g != ca) + (got != lorentz.compose_components(ca, cb))
    return bad


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

@check("groups", "subalgebra_closure", samples=1, tol="structural")
def _closure(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = max(groups.check_subalgebra(fr, groups.subalgebra_basis(fr, w)) for w in "abc")
    counts = [len(groups.subalgebra_basis(fr, w)) for w in "abc"]
    expected = [(dim - 1) * (dim - 2) // 2] * 2 + [dim - 1]
    return err if counts == expected else math.inf


@check("groups", "c_brackets", samples=1, tol="structural")
def _c_brackets(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for a, b in itertools.product(range(dim - 1), repeat=2):
        lhs = lorentz.commutator(fr.c_generator(a), fr.c_generator(b))
        rhs = (a == 0) * fr.c_generator(b) - (b == 0) * fr.c_generator(a)
        err = max(err, _maxdiff(lhs, rhs))
    return err


@check("groups", "a0_metric", samples=1, tol="structural")
def _a0_metric(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    return _maxdiff(fr.rho_gram, np.diag([1.0] + [-1.0] * (dim - 2)))


@check("groups", "gamma_roundtrip", samples=200)
def _gamma_roundtrip(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        c0, a0 = groups.random_c(fr, rng), groups.random_a(fr, rng)
        g = c0.matrix(fr) @ a0.g
        c, a = groups.factor_gamma(g, fr)
        err = max(err, _maxdiff(c.u, c0.u), abs(c.nu - c0.nu), _maxdiff(a.g, a0.g),
                  abs(a.d - a0.d), _maxdiff(c.matrix(fr) @ a.g, g))
    return err


@check("groups", "gamma_boundary", samples=20, tol="count")
def _gamma_boundary(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    sp = fr.space
    bad = 0
    for _ in range(n):
        # a quarter turn carrying s into U puts eta(f, g s) exactly on the boundary
        u = fr.u_basis[int(rng.integers(len(fr.u_basis)))]
        g = lorentz.exp_rotation(sp, u, fr.s, -math.pi / 2)
        try:
            groups.factor_gamma(g, fr)
            bad += 1
        except groups.NotInGamma:
            pass
    return bad


@check("groups", "bc_roundtrip", samples=200)
def _bc_roundtrip(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        b0, c0 = groups.random_b(fr, rng), groups.random_c(fr, rng)
        b, c = groups.factor_bc(b0 @ c0.matrix(fr), fr)
        err = max(err, _maxdiff(b, b0), _maxdiff(c.u, c0.u), abs(c.nu - c0.nu))
    return err


@check("groups", "bc_total_on_so0", samples=200)
def _bc_total(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        g = lorentz.random_so0(fr.space, rng)
        try:
            b, c = groups.factor_bc(g, fr)
        except ValueError:
            return math.inf
        err = max(err, _maxdiff(b @ c.matrix(fr), g), _maxdiff(b @ fr.t, fr.t))
    return err


@check("groups", "d_homomorphism", tol="count")
def _d_hom(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    bad = 0
    for _ in range(n):
        a1, a2 = groups.random_a(fr, rng), groups.random_a(fr, rng)
        prod = groups.AElement.from_matrix(fr, a1.g @ a2.g)
        bad += prod.d != a1.d * a2.d
    return bad


@check("groups", "section_expansion_hypothesis")
def _section_expansion_hyp(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        a = groups.random_a(fr, rng)
        psi = fr.from_rho_coords(rng.uniform(-1, 1, dim - 1))
        for alpha in range(dim - 1):
            lhs, rhs = groups.section_expansion_condition(fr, psi, a, alpha)
            err = max(err, abs(lhs - rhs))
    return err


@check("groups", "anchor_projection", tol="structural")
def _anchor_projection(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    sp = fr.space
    err = 0.0
    for _ in range(n):
        a = groups.random_a(fr, rng)
        x = fr.from_u_coords(rng.uniform(-1, 1, dim - 2)) + rng.uniform(-1, 1) * fr.t
        p = lorentz.lambda_op(sp, x, fr.f)
        Z = groups.anchor(p, a, fr)
        dec = groups.project_onto_a(lorentz.ad(sp, a.g, p), fr)
        err = max(err, _maxdiff(Z, dec.a_part), float(np.max(np.abs(Z @ fr.s))))
    return err


@check("groups", "anchor_derivative_fd", tol="fd")
def _anchor_fd(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    sp = fr.space
    err = 0.0
    for _ in range(n):
        a = groups.random_a(fr, rng)
        x, v, w = (c @ np.array(fr.s_perp_basis) for c in rng.uniform(-1, 1, (3, dim - 1)))
        p = lorentz.lambda_op(sp, x, fr.f)
        phi, psi = fr.a0_covector(v), fr.a0_covector(w)
        err = max(err, abs(groups.anchor_derivative(p, phi, psi, a, fr)
                           - groups.anchor_derivative_fd(p, phi, psi, a, fr, step=1e-5)))
    return err


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def _gen_pairs(size):
    gens = brackets.all_generators(size)
    return list(itertools.combinations(gens, 2))


@check("brackets", "match_h")
def _match_h(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    pts = [brackets.random_point(fr, rng) for _ in range(n)]
    res = brackets.match_h(fr, pts)
    return abs(res.h + 1.0), {"h": res.h}


@check("brackets", "match_h_residual")
def _match_h_residual(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    pts = [brackets.random_point(fr, rng) for _ in range(n)]
    return brackets.match_h(fr, pts).residual


@check("brackets", "match_h_negative_control", samples=20)
def _match_h_neg(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    pts = [brackets.random_point(fr, rng) for _ in range(n)]
    # the h = +1 mismatch must exceed 0.1; report the shortfall
    return max(0.0, 0.1 - brackets.match_h(fr, pts).residual_plus_one)


def _bracket_tables(fr):
    size = len(fr.rho)
    rows = []
    for x, y in _gen_pairs(size):
        fx, fy = PolyFunction.gen(x), PolyFunction.gen(y)
        s = brackets.to_matrix_chart(brackets.bracket_structural(fx, fy, fr), fr)
        z = brackets.bracket_zakrzewski(brackets.to_matrix_chart(fx, fr),
                                        brackets.to_matrix_chart(fy, fr), -1.0)
        rows.append((x, y, s, z))
    return rows


@check("brackets", "structural_vs_zakrzewski")
def _struct_vs_zak(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    rows = _bracket_tables(fr)
    err = 0.0
    for _ in range(n):
        vals = brackets.generator_values(brackets.random_point(fr, rng), fr, "matrix")
        for _, _, s, z in rows:
            err = max(err, abs(s.evaluate(vals) - z.evaluate(vals)))
    return err


@check("brackets", "geometric_vs_zakrzewski")
def _geom_vs_zak(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    size = len(fr.rho)
    alg = schouten.IsoAlgebra(_mink(size))
    b = schouten.make_bv(alg, -alg.space.basis_vector(0))
    err = 0.0
    pairs = _gen_pairs(size)
    for _ in range(n):
        pt = brackets.random_point(fr, rng)
        vals = brackets.generator_values(pt, fr, "matrix")
        ae = brackets.affine_element(pt, fr)
        for x, y in pairs:
            geo = brackets.bracket_geometric(x, y, ae, b, alg)
            zak = brackets.bracket_zakrzewski(PolyFunction.gen(x), PolyFunction.gen(y), -1.0)
            err = max(err, abs(geo - zak.evaluate(vals)))
    return err


@check("brackets", "jacobi", samples=20)
def _jacobi(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    gens = brackets.all_generators(len(fr.rho))
    br = lambda f, g: brackets.bracket_structural(f, g, fr)
    polys = []
    for _ in range(n):
        idx = rng.choice(len(gens), 3, replace=False)
        f, g, h = (PolyFunction.gen(gens[i]) for i in idx)
        polys.append(brackets.jacobiator(f, g, h, br))
    err = 0.0
    for _ in range(cfg.count(50)):
        vals = brackets.generator_values(brackets.random_point(fr, rng), fr)
        err = max(err, max(abs(p.evaluate(vals)) for p in polys))
    return err


@check("brackets", "antisymmetry_leibniz", samples=20, tol="count")
def _antisym(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    gens = brackets.all_generators(len(fr.rho))
    bad = 0
    for _ in range(n):
        f, g, h = (PolyFunction.gen(gens[i]) for i in rng.choice(len(gens), 3, replace=False))
        fg = f * g + 2.0 * h
        for br in (lambda p, q: brackets.bracket_structural(p, q, fr),
                   lambda p, q: brackets.bracket_zakrzewski(p, q, -1.0)):
            bad += not (br(fg, h) + br(h, fg)).is_zero()
            bad += br(f * g, h) != f * br(g, h) + br(f, h) * g
            bad += not br(fg, fg).is_zero()
    return bad


@check("brackets", "anchor_consistency", samples=30, tol="fd")
def _anchor_consistency(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    sp = fr.space
    err = 0.0
    for _ in range(n):
        pt = brackets.random_point(fr, rng)
        lam, phi, psi = (fr.from_rho_coords(c) for c in rng.uniform(-1, 1, (3, dim - 1)))
        bracket = brackets.bracket_structural(brackets.ktilde_function(lam, fr),
                                              brackets.ktilde_pair_function(phi, psi, fr), fr)
        lhs = brackets.eval_poly(bracket, pt, fr)
        # k~_lam = sum sgn k~_{lam rho_a} X~_{c_a}; only the anchor term survives
        rhs = 0.0
        for alpha, r in enumerate(fr.rho):
            p = lorentz.lambda_op(sp, fr.s_perp_basis[alpha], fr.f)   # c_alpha = -p
            weight = fr.rho_signs[alpha] * groups.ktilde_pair(fr, lam, r, pt.a)
            rhs -= weight * groups.anchor_derivative_fd(p, phi, psi, pt.a, fr)
        err = max(err, abs(lhs - rhs))
    return err


@check("brackets", "section_expansion")
def _section_expansion(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        phi = fr.from_rho_coords(rng.uniform(-1, 1, dim - 1))
        lhs, rhs = brackets.section_expansion_check(phi, brackets.random_point(fr, rng), fr)
        err = max(err, abs(lhs - rhs))
    return err


@check("brackets", "semidirect_associativity")
def _assoc(dim, rng, n, cfg):
    fr = Frame.standard(dim)
    err = 0.0
    for _ in range(n):
        p, q, r = (brackets.random_point(fr, rng) for _ in range(3))
        left = brackets.semidirect_compose(brackets.semidirect_compose(p, q, fr), r, fr)
        right = brackets.semidirect_compose(p, brackets.semidirect_compose(q, r, fr), fr)
        err = max(err, _maxdiff(left.phi, right.phi), _maxdiff(left.a.g, right.a.g))
    return err


# ---------------------------------------------------------------------------
# schouten
# ---------------------------------------------------------------------------

def _iso(dim):
    return schouten.IsoAlgebra(_mink(dim))


@check("schouten", "bv_bu_omega", tol="structural")
def _bv_bu(dim, rng, n, cfg):
    alg = _iso(dim)
    om = schouten.make_omega(alg)
    err = 0.0
    for _ in range(n):
        v, u = rng.uniform(-1, 1, (2, dim))
        lhs = schouten.schouten_22(alg, schouten.make_bv(alg, v), schouten.make_bv(alg, u))
        err = max(err, (lhs + alg.space.eta(v, u) * om).max_abs())
    return err


@check("schouten", "bv_x_wedge_u", tol="structural")
def _bv_xu(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        v, x, u = rng.uniform(-1, 1, (3, dim))
        lhs = schouten.schouten_22(alg, schouten.make_bv(alg, v),
                                   schouten.wedge(alg.translation(x), alg.translation(u)))
        rhs = 2.0 * schouten.wedge_vectors(alg.coords(v=u), alg.coords(v=x), alg.coords(v=v))
        err = max(err, lhs.distance(rhs))
    return err


@check("schouten", "omega_invariance", samples=50)
def _omega_inv(dim, rng, n, cfg):
    alg = _iso(dim)
    om = schouten.make_omega(alg)
    return max(schouten.adjoint_action(alg, schouten.random_ig(alg.space, rng, True), om)
               .distance(om) for _ in range(n))


@check("schouten", "self_bracket", tol="structural")
def _self_bracket(dim, rng, n, cfg):
    alg = _iso(dim)
    om = schouten.make_omega(alg)
    err = 0.0
    for _ in range(n):
        v, x = rng.uniform(-1, 1, (2, dim))
        b = schouten.make_bv(alg, v) + schouten.wedge(alg.translation(x), alg.translation(v))
        err = max(err, (schouten.schouten_22(alg, b, b) + alg.space.eta(v, v) * om).max_abs())
    return err


@check("schouten", "basis_independence", tol="structural")
def _basis_indep(dim, rng, n, cfg):
    alg = _iso(dim)
    om = schouten.make_omega(alg)
    err = 0.0
    for _ in range(n):
        v = rng.uniform(-1, 1, dim)
        E = rng.uniform(-1, 1, (dim, dim)) + 2 * np.eye(dim)
        # roundoff grows with the conditioning of the Gram matrix of E
        cond = np.linalg.cond(E) ** 2
        err = max(err, schouten.make_bv(alg, v, E).distance(schouten.make_bv(alg, v)) / cond,
                  schouten.make_omega(alg, E).distance(om) / cond)
    return err


@check("schouten", "adjoint_bv", tol="structural")
def _adjoint_bv(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        g = schouten.random_ig(alg.space, rng, True)
        v, x = rng.uniform(-1, 1, (2, dim))
        Av, Ax = g.A @ v, g.A @ x
        lhs = schouten.adjoint_action(alg, g, schouten.make_bv(alg, v))
        rhs = schouten.make_bv(alg, Av) - schouten.wedge(alg.translation(g.w), alg.translation(Av))
        lhs2 = schouten.adjoint_action(alg, g, schouten.wedge(alg.translation(x), alg.translation(v)))
        rhs2 = schouten.wedge(alg.translation(Ax), alg.translation(Av))
        scale = max(1.0, rhs.max_abs(), rhs2.max_abs())
        err = max(err, lhs.distance(rhs) / scale, lhs2.distance(rhs2) / scale)
    return err


@check("schouten", "adjoint_homomorphism", tol="structural")
def _adjoint_hom(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        g1, g2 = (schouten.random_ig(alg.space, rng, True) for _ in range(2))
        m = schouten.Multivector.from_dense(schouten._dense_wedge(*rng.uniform(-1, 1, (2, alg.dim))))
        lhs = schouten.adjoint_action(alg, g1 @ g2, m)
        rhs = schouten.adjoint_action(alg, g1, schouten.adjoint_action(alg, g2, m))
        err = max(err, lhs.distance(rhs) / max(1.0, lhs.max_abs()))
    return err


@check("schouten", "iso_jacobi", tol="structural")
def _iso_jacobi(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        p, q, r = (alg.split(c) for c in rng.uniform(-1, 1, (3, alg.dim)))
        br = schouten.iso_bracket
        tot = [br(p, br(q, r)), br(q, br(r, p)), br(r, br(p, q))]
        err = max(err, _maxdiff(sum(t.v for t in tot), 0), _maxdiff(sum(t.X for t in tot), 0))
    return err


@check("schouten", "pl_multiplicativity")
def _pl_mult(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        v, x = rng.uniform(-1, 1, (2, dim))
        b = schouten.make_bv(alg, v)
        if rng.integers(2):
            b = b + schouten.wedge(alg.translation(x), alg.translation(v))
        g, h = (schouten.random_ig(alg.space, rng) for _ in range(2))
        lhs = schouten.pl_bivector(alg, b, g @ h)
        rhs = (schouten.translate_tangent(schouten.pl_bivector(alg, b, g), right=h.matrix())
               + schouten.translate_tangent(schouten.pl_bivector(alg, b, h), left=g.matrix()))
        triv = schouten.tangent_from_trivialized(alg, schouten.pl_bivector_trivialized(alg, b, g), g)
        scale = max(1.0, float(np.max(np.abs(lhs))))
        err = max(err, _maxdiff(lhs, rhs) / scale,
                  _maxdiff(triv, schouten.pl_bivector(alg, b, g)) / scale)
    return err


@check("schouten", "compatibility_criterion", samples=20, tol="count")
def _compat_criterion(dim, rng, n, cfg):
    alg = _iso(dim)
    sp = alg.space
    probes = [schouten.random_ig(sp, rng) for _ in range(6)]
    bad = 0
    for i in range(n):
        v, u, x = rng.uniform(-1, 1, (3, dim))
        if i % 2:
            x = rng.uniform(-1, 1) * u + rng.uniform(-1, 1) * v   # coplanar: x^u^v = 0
        lhs = schouten.schouten_22(alg, schouten.make_bv(alg, v),
                                   schouten.wedge(alg.translation(x), alg.translation(u))
                                   + schouten.make_bv(alg, u))
        tri = schouten.wedge_vectors(x, u, v)
        ig_inv = all(schouten.adjoint_action(alg, g, lhs).distance(lhs) <= 1e-8 * max(1, lhs.max_abs())
                     for g in probes)
        g_inv = affine.is_g_invariant(tri, [g.A for g in probes])
        bad += ig_inv != g_inv
    return bad


# ---------------------------------------------------------------------------
# affine
# ---------------------------------------------------------------------------

def _line_pair(dim, rng, kind):
    m, w = rng.uniform(-1, 1, (2, dim))
    l = affine.Line(m, w)
    if kind == "shift":
        return l, l.shifted(rng.uniform(-3, 3)), True
    if kind == "scaled":
        return l, affine.Line(m, rng.choice([-1.0, 0.5, 2.0]) * w), False
    if kind == "new_dir":
        return l, affine.Line(m, rng.uniform(-1, 1, dim)), False
    if kind == "parallel":
        off = rng.uniform(-1, 1, dim)
        return l, affine.Line(m + off, w), False
    if kind == "near_parallel":
        # offset = lambda w + eps * perp, eps ten times the equality tolerance
        perp = rng.uniform(-1, 1, dim)
        perp -= (perp @ w) / (w @ w) * w
        perp /= np.max(np.abs(perp))
        off = rng.uniform(-2, 2) * w + 10 * affine.EQUAL_TOL * perp
        return l, affine.Line(m + off, w), False
    k = affine.Line(rng.uniform(-1, 1, dim), rng.uniform(-1, 1, dim))
    return l, k, False


@check("affine", "structures_equal_iff", samples=500, tol="count")
def _structures_equal(dim, rng, n, cfg):
    alg = _iso(dim)
    kinds = ["shift", "scaled", "new_dir", "parallel", "near_parallel", "random"]
    bad = 0
    for i in range(n):
        l, k, truth = _line_pair(dim, rng, kinds[i % len(kinds)])
        bad += affine.structures_equal(alg, l, k) != truth
    return bad


def _meeting_pair(dim, rng, kind):
    m, w, u = rng.uniform(-1, 1, (3, dim))
    l = affine.Line(m, w)
    if kind == "intersect":
        p = m + rng.uniform(-2, 2) * w
        return l, affine.Line(p - rng.uniform(-2, 2) * u, u)
    if kind == "parallel":
        return l, affine.Line(rng.uniform(-1, 1, dim), rng.uniform(-2, 2) * w)
    return l, affine.Line(rng.uniform(-1, 1, dim), u)


@check("affine", "group_compatible_iff", samples=500, tol="count")
def _group_compatible(dim, rng, n, cfg):
    sp = _mink(dim)
    kinds = ["intersect", "parallel", "skew"]
    bad = 0
    for i in range(n):
        l, k = _meeting_pair(dim, rng, kinds[i % 3])
        meets = affine.lines_meet_or_parallel(l, k)
        for orientation_only in (True, False):
            expected = True if (dim == 3 and orientation_only) else meets
            bad += affine.group_compatible(sp, l, k, orientation_only, seed=i) != expected
    return bad


@check("affine", "field_schouten", tol="structural")
def _field_schouten(dim, rng, n, cfg):
    err = 0.0
    for _ in range(n):
        m, n_, w, u = rng.uniform(-1, 1, (4, dim))
        l, k = affine.Line(m, w), affine.Line(n_, u)
        got = affine.field_schouten(affine.pi_field(l), affine.pi_field(k))
        expected = 2.0 * affine.constant_multivector_field(w, m - n_, u)
        self_br = affine.field_schouten(affine.pi_field(l), affine.pi_field(l))
        err = max(err, got.distance(expected), self_br.mv.max_abs())
    return err


@check("affine", "field_compatible_iff", samples=500, tol="count")
def _field_compat(dim, rng, n, cfg):
    bad = 0
    kinds = ["intersect", "parallel", "skew"]
    for i in range(n):
        l, k = _meeting_pair(dim, rng, kinds[i % 3])
        bad += affine.fields_compatible(l, k) != affine.lines_meet_or_parallel(l, k)
    return bad


@check("affine", "pi_field_line_only", tol="structural")
def _pi_line_only(dim, rng, n, cfg):
    err = 0.0
    for _ in range(n):
        l = affine.Line(*rng.uniform(-1, 1, (2, dim)))
        p = affine.AffinePoint(rng.uniform(-2, 2, dim))
        a = affine.pi_field(l).evaluate(p)
        b = affine.pi_field(l.shifted(rng.uniform(-3, 3))).evaluate(p)
        direct = schouten.wedge_vectors(p - l.base, l.dir)
        err = max(err, a.distance(b), a.distance(direct))
    return err


@check("affine", "poisson_action_iff", samples=250, tol="count")
def _poisson_action(dim, rng, n, cfg):
    sp = _mink(dim)
    bad = 0
    n_equal = max(1, n // 5)
    kinds = ["scaled", "new_dir", "parallel", "near_parallel", "random"]
    for i in range(n):
        if i < n_equal:
            l, k, truth = _line_pair(dim, rng, "shift")
        else:
            l, k, truth = _line_pair(dim, rng, kinds[i % len(kinds)])
            if kinds[i % len(kinds)] == "near_parallel":
                # perturb well above the action tolerance
                k = affine.Line(k.base.offset + 1e-6 * rng.uniform(-1, 1, dim), k.dir)
        bad += affine.is_poisson_action(sp, l, k, samples=64, seed=i) != truth
    return bad


@check("affine", "transfer_consistency", tol="structural")
def _transfer(dim, rng, n, cfg):
    alg = _iso(dim)
    err = 0.0
    for _ in range(n):
        l = affine.Line(*rng.uniform(-1, 1, (2, dim)))
        o1, o2 = (affine.AffinePoint(p) for p in rng.uniform(-1, 1, (2, dim)))
        via1 = affine.transferred_structure(alg, l, o1)
        rebased = schouten.adjoint_action(alg, schouten.IGElement(o1 - o2, np.eye(dim)), via1)
        err = max(err, rebased.distance(affine.transferred_structure(alg, l, o2)))
    return err


# ---------------------------------------------------------------------------
# running and reporting
# ---------------------------------------------------------------------------

def validate(which: str, cfg: SuiteConfig) -> None:
    if which != "all" and which not in SUITES:
        raise ValueError(f"unknown suite {which!r}; choose from {', '.join(SUITES + ('all',))}")
    suites = SUITES if which == "all" else (which,)
    if not cfg.dims:
        raise ValueError("no dimensions given")
    for d in cfg.dims:
        if any(s in KAPPA_SUITES for s in suites) and d < 4:
            raise ValueError(f"dimension {d} < 4 is not allowed for the kappa suites "
                             f"({', '.join(s for s in suites if s in KAPPA_SUITES)})")
        if d < 3:
            raise ValueError(f"dimension {d} < 3 is not allowed")
    if cfg.samples < 1:
        raise ValueError("samples must be positive")


def run_suite(which: str, cfg: SuiteConfig | None = None) -> Report:
    cfg = cfg or SuiteConfig()
    validate(which, cfg)
    suites = SUITES if which == "all" else (which,)
    report = Report(which, list(cfg.dims), cfg.seed)
    h_values = []
    for suite in suites:
        checks = sorted((c for c in _REGISTRY if c.suite == suite), key=lambda c: c.name)
        for dim in cfg.dims:
            for c in checks:
                n = cfg.count(c.base_samples)
                out = c.func(dim, _rng(cfg, suite, dim, c.name), n, cfg)
                extra = {}
                if isinstance(out, tuple):
                    out, extra = out
                if "h" in extra:
                    h_values.append(extra["h"])
                err = float(out) if np.isfinite(out) else math.inf
                report.checks.append(CheckResult(c.name, dim, err, _tolerance(c, cfg), n))
    if h_values:
        # worst case over dimensions
        report.h_match = max(h_values, key=lambda h: abs(h + 1.0))
    return report


def emit_report(results, fmt: str = "text") -> str:
    """Serialize a Report (or a bare list of CheckResults) as text or json."""
    if isinstance(results, Report):
        checks = results.checks
    else:
        checks = list(results)
    passed = sum(c.passed for c in checks)
    summary = {"passed": passed, "failed": len(checks) - passed}
    if fmt == "json":
        doc = {}
        if isinstance(results, Report):
            doc.update({"suite": results.suite, "dims": list(results.dims), "seed": results.seed})
        doc["checks"] = [c.to_json() for c in checks]
        doc["summary"] = summary
        if isinstance(results, Report) and results.h_match is not None:
            doc["h_match"] = results.h_match
        return json.dumps(doc, indent=2)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    width = max((len(c.name) for c in checks), default=4)
    lines = []
    for c in checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  dim={c.dim:<2d} {c.name:<{width}}  "
                     f"max_error={c.max_error:10.3e}  tol={c.tolerance:8.1e}  n={c.samples_run}")
    if isinstance(results, Report) and results.h_match is not None:
        lines.append(f"h_match = {results.h_match!r}")
    lines.append(f"passed {summary['passed']}, failed {summary['failed']}")
    return "\n".join(lines) + "\n"
