"""The frame (s, t, f, U), the subgroups A, B, C and the algebroid anchor.

Everything here lives in a Minkowski space of dimension n + 2 >= 4.  The
subalgebras are

* a = {Y : Y s = 0}, spanned by Lambda_xy with x, y in s-perp,
* b = {Y : Y t = 0},
* c = span{Lambda_xf : x in s-perp}, with f = t - s null,

and so(eta) = c + a = c + b as vector spaces.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lorentz import (
    NUMERIC_TOL,
    STRUCT_TOL,
    QuadraticSpace,
    ad,
    ad_sharp,
    commutator,
    exp_boost,
    exp_null,
    exp_rotation,
    exp_series,
    form_k_tilde,
    gram_schmidt,
    group_inverse,
    is_orthogonal,
    k_flat,
    lambda_op,
    make_minkowski,
    random_so0,
)

# |eta(f, g s)| below this means g sits on the boundary of Gamma
GAMMA_TOL = 1e-8
A_MEMBERSHIP_TOL = 1e-8


class NotInGamma(ValueError):
    """Raised when g has no factorization g = c a with c in C, a in A."""


@dataclass(frozen=True, eq=False)
class Frame:
    space: QuadraticSpace
    s: np.ndarray
    t: np.ndarray
    u_basis: tuple = field(default=())

    def __post_init__(self):
        sp = self.space
        s = np.asarray(self.s, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if sp.dim < 4:
            raise ValueError("the kappa frame needs dim >= 4")
        if not (abs(sp.eta(s, s) + 1) < STRUCT_TOL and abs(sp.eta(t, t) - 1) < STRUCT_TOL
                and abs(sp.eta(s, t)) < STRUCT_TOL):
            raise ValueError("frame needs eta(s,s) = -1, eta(t,t) = 1, eta(s,t) = 0")
        us = tuple(np.asarray(u, dtype=float) for u in self.u_basis)
        if not us:
            # complete (t, s) to an orthonormal basis and keep the U part
            seeds = [t, s] + [sp.basis_vector(i) for i in range(sp.dim)]
            basis = []
            for v in seeds:
                try:
                    basis = gram_schmidt(sp, basis + [v])
                except ValueError:
                    continue
                if len(basis) == sp.dim:
                    break
            us = tuple(basis[2:])
        if len(us) != sp.dim - 2:
            raise ValueError(f"U needs {sp.dim - 2} basis vectors, got {len(us)}")
        for i, u in enumerate(us):
            if abs(sp.eta(u, u) + 1) > STRUCT_TOL or abs(sp.eta(u, s)) > STRUCT_TOL \
                    or abs(sp.eta(u, t)) > STRUCT_TOL:
                raise ValueError("u_basis must be orthonormal (eta = -1) and orthogonal to s, t")
            for w in us[:i]:
                if abs(sp.eta(u, w)) > STRUCT_TOL:
                    raise ValueError("u_basis is not orthogonal")
        for name, v in (("s", s), ("t", t)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "u_basis", us)

    @classmethod
    def standard(cls, space: QuadraticSpace | int) -> "Frame":
        """t = e_0, s = e_{d-1}, U spanned by the remaining basis vectors."""
        if not isinstance(space, QuadraticSpace):
            space = make_minkowski(space)
        d = space.dim
        return cls(space, space.basis_vector(d - 1), space.basis_vector(0),
                   tuple(space.basis_vector(i) for i in range(1, d - 1)))

    @property
    def f(self) -> np.ndarray:
        return self.t - self.s

    @property
    def n(self) -> int:
        """dim V = n + 2."""
        return self.space.dim - 2

    @cached_property
    def s_perp_basis(self) -> tuple[np.ndarray, ...]:
        """Orthonormal basis (e_alpha) of s-perp with e_0 = t."""
        return (self.t,) + self.u_basis

    @cached_property
    def rho(self) -> np.ndarray:
        """Rows are the covectors rho_alpha = k(Lambda_{e_alpha s}) spanning a^0."""
        return np.array([k_flat(self.space, lambda_op(self.space, e, self.s))
                         for e in self.s_perp_basis])

    @cached_property
    def rho_gram(self) -> np.ndarray:
        """k~(rho_alpha, rho_beta); diag(1, -1, ..., -1)."""
        return self.rho @ self.space.k_gram_inverse @ self.rho.T

    @cached_property
    def rho_signs(self) -> np.ndarray:
        return np.rint(np.diag(self.rho_gram))

    @property
    def bold_rho(self) -> np.ndarray:
        """The distinguished time covector k(Lambda_ts)."""
        return self.rho[0]

    def c_generator(self, alpha: int) -> np.ndarray:
        """c_alpha = -Lambda_{e_alpha f}."""
        return -lambda_op(self.space, self.s_perp_basis[alpha], self.f)

    def project_u(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return sum((-self.space.eta(v, u)) * u for u in self.u_basis)

    def u_coords(self, v) -> np.ndarray:
        return np.array([-self.space.eta(v, u) for u in self.u_basis])

    def from_u_coords(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ np.array(self.u_basis)

    # -- a^0 covectors <-> vectors of s-perp --

    def a0_covector(self, v) -> np.ndarray:
        """phi = k(Lambda_{v s}) for v in s-perp."""
        return k_flat(self.space, lambda_op(self.space, v, self.s))

    def a0_vector(self, phi) -> np.ndarray:
        """Inverse of :meth:`a0_covector`."""
        c = self.rho_coords(phi)
        return c @ np.array(self.s_perp_basis)

    def rho_coords(self, phi) -> np.ndarray:
        """Coefficients of phi in the rho basis."""
        return self.rho_signs * (self.rho @ self.space.k_gram_inverse @ np.asarray(phi))

    def from_rho_coords(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.rho

    def in_a0(self, phi, tol: float = STRUCT_TOL) -> bool:
        vals = [np.asarray(phi) @ self.space.so_coords(Y) for Y in subalgebra_basis(self, "a")]
        return bool(np.max(np.abs(vals)) <= tol * max(1.0, np.max(np.abs(phi))))


# -- subalgebras ------------------------------------------------------------

def _span_residual(space: QuadraticSpace, basis, X) -> float:
    B = np.array([space.so_coords(Y) for Y in basis]).T
    x = space.so_coords(X)
    sol, *_ = np.linalg.lstsq(B, x, rcond=None)
    return float(np.max(np.abs(B @ sol - x)))


def subalgebra_basis(frame: Frame, which: str) -> list[np.ndarray]:
    """Bases of the subalgebras a, b and c."""
    sp = frame.space
    if which == "a":
        vecs = frame.s_perp_basis
        return [lambda_op(sp, x, y) for x, y in itertools.combinations(vecs, 2)]
    if which == "b":
        vecs = frame.u_basis + (frame.s,)
        return [lambda_op(sp, x, y) for x, y in itertools.combinations(vecs, 2)]
    if which == "c":
        return [lambda_op(sp, e, frame.f) for e in frame.s_perp_basis]
    raise ValueError(f"unknown subalgebra {which!r}")


def check_subalgebra(frame: Frame, basis) -> float:
    """Max residual of [X, Y] outside span(basis); also fails on dependence."""
    sp = frame.space
    B = np.array([sp.so_coords(Y) for Y in basis])
    if np.linalg.matrix_rank(B, tol=STRUCT_TOL) != len(basis):
        raise ValueError("basis is linearly dependent")
    return max((_span_residual(sp, basis, commutator(X, Y))
                for X, Y in itertools.combinations(basis, 2)), default=0.0)


@dataclass(frozen=True)
class _Decomposition:
    c_part: np.ndarray
    a_part: np.ndarray

    def __iter__(self):
        return iter((self.c_part, self.a_part))


def _ca_solver(frame: Frame) -> np.ndarray:
    cached = frame.__dict__.get("_ca_solver")
    if cached is None:
        sp = frame.space
        cols = subalgebra_basis(frame, "c") + subalgebra_basis(frame, "a")
        M = np.array([sp.so_coords(Y) for Y in cols]).T
        cached = np.linalg.inv(M)
        frame.__dict__["_ca_solver"] = cached
    return cached


def project_onto_a(X, frame: Frame) -> _Decomposition:
    """Split X = c_part + a_part along so(eta) = c + a."""
    sp = frame.space
    coeffs = _ca_solver(frame) @ sp.so_coords(X)
    nc = len(frame.s_perp_basis)
    c_basis = subalgebra_basis(frame, "c")
    a_basis = subalgebra_basis(frame, "a")
    c_part = np.tensordot(coeffs[:nc], np.array(c_basis), axes=1)
    a_part = np.tensordot(coeffs[nc:], np.array(a_basis), axes=1)
    return _Decomposition(c_part, a_part)


# -- group elements ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AElement:
    """An element of the normalizer A = {g in SO0 : g s = +-s}."""

    g: np.ndarray
    d: int

    @classmethod
    def from_matrix(cls, frame: Frame, g) -> "AElement":
        g = np.asarray(g, dtype=float)
        sp = frame.space
        if not is_orthogonal(sp, g):
            raise ValueError("matrix is not in O(eta)")
        gs = g @ frame.s
        scale = max(1.0, float(np.max(np.abs(g))))
        for d in (1, -1):
            if np.max(np.abs(gs - d * frame.s)) <= A_MEMBERSHIP_TOL * scale:
                return cls(g, d)
        raise ValueError("g does not normalize s (g s != +-s)")

    @classmethod
    def identity(cls, frame: Frame) -> "AElement":
        return cls(np.eye(frame.space.dim), 1)

    def __matmul__(self, other: "AElement") -> "AElement":
        return AElement(self.g @ other.g, self.d * other.d)

    def inverse(self, frame: Frame) -> "AElement":
        return AElement(group_inverse(frame.space, self.g), self.d)


@dataclass(frozen=True, eq=False)
class CElement:
    """exp(Lambda_uf) exp(nu Lambda_ts) with u in U (stored as a V vector)."""

    u: np.ndarray
    nu: float

    def matrix(self, frame: Frame) -> np.ndarray:
        sp = frame.space
        # Lambda_ts = -Lambda_st
        return exp_null(sp, self.u, frame.f) @ exp_boost(sp, frame.s, frame.t, -self.nu)

    def inverse(self) -> "CElement":
        return CElement(-math.exp(-self.nu) * np.asarray(self.u), -self.nu)

    @classmethod
    def identity(cls, frame: Frame) -> "CElement":
        return cls(np.zeros(frame.space.dim), 0.0)


def c_compose(c1: CElement, c2: CElement) -> CElement:
    """(u, mu)(v, nu) = (u + e^mu v, mu + nu)."""
    return CElement(np.asarray(c1.u) + math.exp(c1.nu) * np.asarray(c2.u), c1.nu + c2.nu)


def factor_gamma(g, frame: Frame) -> tuple[CElement, AElement]:
    """Factor g = c a with c in C and a in A.

    Raises :class:`NotInGamma` when eta(f, g s) vanishes.  Both factors grow
    like 1 / |eta(f, g s)| near that boundary, so accuracy degrades there.
    """
    sp = frame.space
    g = np.asarray(g, dtype=float)
    gs = g @ frame.s
    pairing = sp.eta(frame.f, gs)
    if abs(pairing) < GAMMA_TOL:
        raise NotInGamma(f"eta(f, g s) = {pairing:.3e} is on the boundary of Gamma")
    d = 1 if pairing > 0 else -1
    nu = -math.log(abs(pairing))
    u = math.exp(nu) * frame.project_u(d * gs)
    c = CElement(u, nu)
    a = c.inverse().matrix(frame) @ g
    return c, AElement.from_matrix(frame, a)


def factor_bc(g, frame: Frame) -> tuple[np.ndarray, CElement]:
    """Factor g = b c with b t = t, c in C (valid on all of SO0)."""
    sp = frame.space
    g = np.asarray(g, dtype=float)
    w = group_inverse(sp, g) @ frame.t
    pairing = sp.eta(frame.f, w)
    if pairing <= 0:
        raise ValueError(f"eta(f, g^-1 t) = {pairing:.3e} <= 0; g is not in SO0")
    nu = math.log(pairing)
    # U-part of c^{-1} t is -u
    u = -frame.project_u(w)
    c = CElement(u, nu)
    b = g @ c.inverse().matrix(frame)
    return b, c


def normalizer_flip(frame: Frame, u) -> np.ndarray:
    """exp(pi Lambda_us); maps s to -s and normalizes A~."""
    sp = frame.space
    u = np.asarray(u, dtype=float)
    if abs(sp.eta(u, u) + 1) > STRUCT_TOL or abs(sp.eta(u, frame.s)) > STRUCT_TOL \
            or abs(sp.eta(u, frame.t)) > STRUCT_TOL:
        raise ValueError("u must be a unit vector of U")
    return exp_rotation(sp, u, frame.s, math.pi)


# -- random sampling of subgroup elements -------------------------------------

def random_a(frame: Frame, rng: np.random.Generator, flip: bool | None = None) -> AElement:
    """Random element of A: closed-form factors inside s-perp, optionally flipped."""
    sp = frame.space
    g = random_so0(sp, rng, within=frame.s_perp_basis)
    if flip is None:
        flip = bool(rng.integers(2))
    if flip:
        g = g @ normalizer_flip(frame, frame.u_basis[0])
    return AElement.from_matrix(frame, g)


def random_b(frame: Frame, rng: np.random.Generator) -> np.ndarray:
    return random_so0(frame.space, rng, within=frame.u_basis + (frame.s,))


def random_c(frame: Frame, rng: np.random.Generator) -> CElement:
    coords = rng.uniform(-1, 1, frame.n)
    return CElement(frame.from_u_coords(coords), float(rng.uniform(-1.5, 1.5)))


# -- the Lie algebroid of Gamma_A --------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebroidSection:
    """Left-invariant section X_p^L with p = Lambda_xf in c."""

    p: np.ndarray

    @classmethod
    def from_vector(cls, frame: Frame, x) -> "AlgebroidSection":
        x = np.asarray(x, dtype=float)
        if abs(frame.space.eta(x, frame.s)) > STRUCT_TOL:
            raise ValueError("x must lie in s-perp")
        return cls(lambda_op(frame.space, x, frame.f))

    def vector(self, frame: Frame) -> np.ndarray:
        """x with p = Lambda_xf (Lambda_xf s = x for x in s-perp)."""
        return self.p @ frame.s


def _section_vector(frame: Frame, p) -> np.ndarray:
    if isinstance(p, AlgebroidSection):
        p = p.p
    p = np.asarray(p, dtype=float)
    x = p @ frame.s
    expected = lambda_op(frame.space, x, frame.f)
    if abs(frame.space.eta(x, frame.s)) > STRUCT_TOL \
            or np.max(np.abs(expected - p)) > STRUCT_TOL * max(1.0, np.max(np.abs(p))):
        raise ValueError("section is not of the form Lambda_xf with x in s-perp")
    return x


def anchor(p, a: AElement, frame: Frame) -> np.ndarray:
    """Z = ad(a) Lambda_xt - d(a) Lambda_(ax)t, so that the anchor of X_p^L at a is Z a."""
    sp = frame.space
    x = _section_vector(frame, p)
    return ad(sp, a.g, lambda_op(sp, x, frame.t)) - a.d * lambda_op(sp, a.g @ x, frame.t)


def ktilde_pair(frame: Frame, phi, psi, a: AElement) -> float:
    """k~_{phi psi}(a) = k~(phi, ad#(a) psi)."""
    return form_k_tilde(frame.space, phi, ad_sharp(frame.space, a.g, psi))


def _require_a0(frame: Frame, *covs):
    for c in covs:
        if not frame.in_a0(c):
            raise ValueError("covector is not in the annihilator of a")


def anchor_derivative(p, phi, psi, a: AElement, frame: Frame) -> float:
    """Closed form of the anchor of X_p^L applied to k~_{phi psi}, at a.

    With rho = k(Lambda_xs) (p = Lambda_xf) and the time covector R = k(Lambda_ts):

        k~(rho, psi) [k~(R, phi) - k~_{phi R}(a)] + k~_{phi rho}(a) [k~(R, psi) - k~_{R psi}(a)]
    """
    sp = frame.space
    _require_a0(frame, phi, psi)
    x = _section_vector(frame, p)
    rho = frame.a0_covector(x)
    R = frame.bold_rho
    kt = lambda u, v: form_k_tilde(sp, u, v)
    phi_R = ktilde_pair(frame, phi, R, a)
    phi_rho = ktilde_pair(frame, phi, rho, a)
    R_psi = ktilde_pair(frame, R, psi, a)
    return kt(rho, psi) * (kt(R, phi) - phi_R) + phi_rho * (kt(R, psi) - R_psi)


def anchor_derivative_fd(p, phi, psi, a: AElement, frame: Frame, step: float = 1e-5) -> float:
    """Central difference of t -> k~_{phi psi}(exp(t Z) a)."""
    sp = frame.space
    Z = anchor(p, a, frame)

    def value(t):
        moved = AElement(exp_series(t * Z) @ a.g, a.d)
        return ktilde_pair(frame, phi, psi, moved)

    return (value(step) - value(-step)) / (2 * step)


def section_expansion_condition(frame: Frame, psi, a: AElement, alpha: int) -> tuple[float, float]:
    """(k~(psi, ad#(a) rho_alpha), <psi, ad(a) c_alpha>)."""
    sp = frame.space
    lhs = form_k_tilde(sp, psi, ad_sharp(sp, a.g, frame.rho[alpha]))
    rhs = float(np.asarray(psi) @ sp.so_coords(ad(sp, a.g, frame.c_generator(alpha))))
    return lhs, rhs
