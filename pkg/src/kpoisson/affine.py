"""Poisson structures attached to parametrized lines in an affine quadratic space.

Affine points are offsets from one global origin O.  Vector fields on M are
written in the basis (E, e_0, ..., e_{d-1}) where E is the Euler field
centered at O, E(O + v) = v, and e_i are constant fields; the Euler field
centered at m is then E - m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lorentz import QuadraticSpace, random_so0, reflection
from .schouten import (
    IGElement,
    IsoAlgebra,
    Multivector,
    adjoint_action,
    make_bv,
    schouten_leibniz,
    wedge,
)

RANK_TOL = 1e-8
EQUAL_TOL = 1e-10
ACTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AffinePoint:
    offset: np.ndarray

    def __add__(self, v) -> "AffinePoint":
        return AffinePoint(np.asarray(self.offset) + np.asarray(v))

    def __sub__(self, other: "AffinePoint") -> np.ndarray:
        return np.asarray(self.offset) - np.asarray(other.offset)


@dataclass(frozen=True, eq=False)
class Line:
    """The parametrized line t -> base + t dir."""

    base: AffinePoint
    dir: np.ndarray

    def __post_init__(self):
        if not isinstance(self.base, AffinePoint):
            object.__setattr__(self, "base", AffinePoint(np.asarray(self.base, dtype=float)))
        d = np.asarray(self.dir, dtype=float)
        if not np.any(d):
            raise ValueError("a line needs a nonzero direction")
        if d.shape != np.shape(self.base.offset):
            raise ValueError("base and direction have different dimensions")
        object.__setattr__(self, "dir", d)

    @property
    def dim(self) -> int:
        return len(self.dir)

    def shifted(self, lam: float) -> "Line":
        return Line(self.base + lam * self.dir, self.dir)


def _vvec(v) -> Multivector:
    return Multivector.vector(v)


# -- structures on IG transferred from lines ------------------------------------

def transferred_structure(alg: IsoAlgebra, line: Line, origin: AffinePoint) -> Multivector:
    """ad_x(b_v) = b_v - x ^ v with x = base - origin: the line's structure pulled to IG at ``origin``."""
    x = line.base - origin
    return adjoint_action(alg, IGElement(x, np.eye(alg.vdim)), make_bv(alg, line.dir))


def structures_equal(alg: IsoAlgebra, l: Line, k: Line, origin: AffinePoint | None = None,
                     tol: float = EQUAL_TOL) -> bool:
    if origin is None:
        origin = AffinePoint(np.zeros(alg.vdim))
    a = transferred_structure(alg, l, origin)
    b = transferred_structure(alg, k, origin)
    return a.distance(b) <= tol


def lines_meet_or_parallel(l: Line, k: Line, tol: float = RANK_TOL) -> bool:
    """rank [u, v, x] <= 2 by singular values (x = base difference)."""
    M = np.array([k.dir, l.dir, k.base - l.base])
    sv = np.linalg.svd(M, compute_uv=False)
    scale = max(1.0, sv[0])
    return bool(sv[2] <= tol * scale)


def compatibility_trivector(l: Line, k: Line) -> Multivector:
    """x ^ u ^ v over V, x = base_k - base_l, u = dir_k, v = dir_l."""
    x = k.base - l.base
    return wedge(wedge(_vvec(x), _vvec(k.dir)), _vvec(l.dir))


def _probe_group(space: QuadraticSpace, orientation_only: bool, rng) -> list[np.ndarray]:
    from .lorentz import exp_boost, exp_rotation, gram_schmidt

    basis = gram_schmidt(space, [space.basis_vector(i) for i in range(space.dim)])
    probes = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            a, b = basis[i], basis[j]
            na, nb = space.eta(a, a), space.eta(b, b)
            if np.sign(na) == np.sign(nb):
                probes.append(exp_rotation(space, a, b, 1.0))
            else:
                s, t = (a, b) if na < 0 else (b, a)
                probes.append(exp_boost(space, s, t, 1.0))
    probes += [random_so0(space, rng) for _ in range(4)]
    if not orientation_only:
        probes.append(reflection(space, basis[-1]))
    return probes


def is_g_invariant(T: Multivector, group, tol: float = RANK_TOL) -> bool:
    """Whether a multivector over V is fixed by every matrix in ``group``."""
    dense = T.to_dense()
    scale = max(1.0, float(np.max(np.abs(dense))) if dense.size else 1.0)
    for A in group:
        if T.degree == 3:
            moved = np.einsum("ia,jb,kc,abc->ijk", A, A, A, dense)
        elif T.degree == 2:
            moved = A @ dense @ A.T
        else:
            moved = A @ dense
        if np.max(np.abs(moved - dense)) > tol * scale:
            return False
    return True


def group_compatible(space: QuadraticSpace, l: Line, k: Line, orientation_only: bool,
                     seed: int = 0) -> bool:
    """Whether Pi_l and Pi_k are compatible for G = SO0 (orientation_only) or G = O(eta).

    Decided by G-invariance of x ^ u ^ v, tested on a fixed probe set of G.
    """
    if space.dim < 3:
        raise ValueError("the affine suite needs dim V >= 3")
    T = compatibility_trivector(l, k)
    if T.max_abs() <= RANK_TOL:
        return True
    group = _probe_group(space, orientation_only, np.random.default_rng(seed))
    return is_g_invariant(T, group)


# -- bivector fields on M --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AffineVectorField:
    """p -> euler * (p - center) + constant."""

    constant: np.ndarray
    euler: bool = False
    center: AffinePoint | None = None

    def coords(self) -> np.ndarray:
        c = np.asarray(self.constant, dtype=float)
        if not self.euler:
            return np.concatenate([[0.0], c])
        m = np.zeros_like(c) if self.center is None else np.asarray(self.center.offset)
        return np.concatenate([[1.0], c - m])


def euler_field(center: AffinePoint) -> AffineVectorField:
    return AffineVectorField(np.zeros(len(center.offset)), True, center)


def constant_field(v) -> AffineVectorField:
    return AffineVectorField(np.asarray(v, dtype=float))


@dataclass(frozen=True, eq=False)
class MultivectorField:
    """Multivector field in the (E, e_0, .., e_{d-1}) basis of fields."""

    mv: Multivector

    @classmethod
    def wedge_of(cls, *fields: AffineVectorField) -> "MultivectorField":
        out = Multivector.vector(fields[0].coords())
        for f in fields[1:]:
            out = wedge(out, Multivector.vector(f.coords()))
        return cls(out)

    @property
    def degree(self) -> int:
        return self.mv.degree

    @property
    def vdim(self) -> int:
        return self.mv.dim - 1

    def __add__(self, other):
        return MultivectorField(self.mv + other.mv)

    def __sub__(self, other):
        return MultivectorField(self.mv - other.mv)

    def __mul__(self, c):
        return MultivectorField(self.mv * c)

    __rmul__ = __mul__

    def evaluate(self, point: AffinePoint) -> Multivector:
        """Value at a point as a multivector over V."""
        d = self.vdim
        # E(p) = p - O; substitute E -> sum_i p_i e_i
        S = np.zeros((d + 1, d))
        S[0] = np.asarray(point.offset)
        S[1:] = np.eye(d)
        T = self.mv.to_dense()
        for axis in range(T.ndim):
            T = np.moveaxis(np.tensordot(S.T, np.moveaxis(T, axis, 0), axes=1), 0, axis)
        return Multivector.from_dense(T)

    def is_constant(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for idx, c in self.mv.terms.items() if 0 in idx)

    def distance(self, other: "MultivectorField") -> float:
        return self.mv.distance(other.mv)


BivectorField = MultivectorField


def _field_bracket(i: int, j: int) -> dict:
    # [E, e_k] = -e_k; constants commute; [E, E] = 0
    if i == 0 and j > 0:
        return {j: -1.0}
    if j == 0 and i > 0:
        return {i: 1.0}
    return {}


def pi_field(line: Line) -> MultivectorField:
    """pi_l(m + v) = v ^ w, i.e. (Euler field at m) ^ (constant w)."""
    return MultivectorField.wedge_of(euler_field(line.base), constant_field(line.dir))


def constant_multivector_field(*vectors) -> MultivectorField:
    return MultivectorField.wedge_of(*(constant_field(v) for v in vectors))


def field_schouten(p: MultivectorField, q: MultivectorField) -> MultivectorField:
    """Schouten bracket of fields built from the Euler field and constant fields."""
    if p.mv.dim != q.mv.dim:
        raise ValueError("fields over different spaces")
    return MultivectorField(schouten_leibniz(p.mv, q.mv, _field_bracket))


def fields_compatible(l: Line, k: Line, tol: float = RANK_TOL) -> bool:
    """pi_l + pi_k is Poisson iff [pi_l, pi_k] vanishes."""
    return field_schouten(pi_field(l), pi_field(k)).mv.max_abs() <= tol


# -- the Poisson action criterion ----------------------------------------------

def _dense2(a, b) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def poisson_action_defect(l: Line, k: Line, y, v, A) -> float:
    """Max coefficient of
    (x + y + Av)^w - (Ax + Av)^Aw - (y + Av)^u + Av^Au,  x = base_k - base_l,
    w = dir_l, u = dir_k.
    """
    x = k.base - l.base
    w, u = l.dir, k.dir
    Av = A @ v
    lhs = _dense2(x + y + Av, w)
    rhs = _dense2(A @ x + Av, A @ w) + _dense2(y + Av, u) - _dense2(Av, A @ u)
    return float(np.max(np.abs(lhs - rhs)))


def is_poisson_action(space: QuadraticSpace, l: Line, k: Line, samples: int = 64,
                      seed: int = 0, tol: float = ACTION_TOL) -> bool:
    """Whether the action of (Aff(G), Pi_k) on (M, pi_l) is Poisson, by sampling (y, v, A)."""
    d = space.dim
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(l.dir))), float(np.max(np.abs(k.dir))),
                float(np.max(np.abs(k.base - l.base))))
    I = np.eye(d)
    # v = 0, A = I probes y ^ w = y ^ u along every axis
    for i in range(d):
        if poisson_action_defect(l, k, I[i], np.zeros(d), I) > tol * scale:
            return False
    for _ in range(samples):
        y, v = rng.uniform(-1, 1, (2, d))
        A = random_so0(space, rng)
        if poisson_action_defect(l, k, y, v, A) > tol * scale * max(1.0, np.max(np.abs(A))) ** 2:
            return False
    return True
