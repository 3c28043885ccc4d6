"""Sparse exterior algebra over iso(eta) = V x so(eta) and its Schouten bracket.

The basis of iso(eta) is: translations e_0 .. e_{d-1}, then Lambda_ab (a < b)
in lexicographic order.  Multivectors of degree 1..3 are stored sparsely as
{strictly increasing index tuple: coefficient}.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lorentz import QuadraticSpace, commutator, group_inverse, is_orthogonal, lambda_op

PRUNE = 1e-14
MAX_DEGREE = 3


def _perm_sign(seq) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _canonical(idx) -> tuple[int, tuple]:
    """(sign, sorted tuple), or (0, ()) when an index repeats."""
    if len(set(idx)) != len(idx):
        return 0, ()
    return _perm_sign(idx), tuple(sorted(idx))


class Multivector:
    """Homogeneous element of the exterior algebra over a basis of size ``dim``."""

    __slots__ = ("dim", "degree", "terms")

    def __init__(self, dim: int, degree: int, terms=None, prune: float = PRUNE):
        if not 1 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be 1..{MAX_DEGREE}, got {degree}")
        self.dim = dim
        self.degree = degree
        acc: dict = defaultdict(float)
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree or any(not 0 <= i < dim for i in idx):
                raise ValueError(f"bad index tuple {idx} for degree {degree}, dim {dim}")
            sign, key = _canonical(idx)
            if sign:
                acc[key] += sign * float(c)
        self.terms = {k: v for k, v in sorted(acc.items()) if abs(v) > prune}

    @classmethod
    def vector(cls, coords) -> "Multivector":
        coords = np.asarray(coords, dtype=float)
        return cls(len(coords), 1, {(i,): c for i, c in enumerate(coords)})

    @classmethod
    def basis_blade(cls, dim: int, *idx) -> "Multivector":
        return cls(dim, len(idx), {tuple(idx): 1.0})

    @classmethod
    def zero(cls, dim: int, degree: int) -> "Multivector":
        return cls(dim, degree)

    # dense antisymmetric tensors: coefficient of e_i ^ e_j (i < j) is T[i, j]
    def to_dense(self) -> np.ndarray:
        T = np.zeros((self.dim,) * self.degree)
        for idx, c in self.terms.items():
            for perm in itertools.permutations(range(self.degree)):
                T[tuple(idx[p] for p in perm)] = _perm_sign(perm) * c
        return T

    @classmethod
    def from_dense(cls, T, prune: float = PRUNE) -> "Multivector":
        T = np.asarray(T, dtype=float)
        dim, degree = T.shape[0], T.ndim
        terms = {idx: T[idx] for idx in itertools.combinations(range(dim), degree)
                 if abs(T[idx]) > prune}
        return cls(dim, degree, terms, prune)

    def _check_compatible(self, other: "Multivector"):
        if self.dim != other.dim or self.degree != other.degree:
            raise ValueError("multivectors of different shape")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check_compatible(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Multivector(self.dim, self.degree, out)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Multivector(self.dim, self.degree, {k: c * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return (self.dim, self.degree, self.terms) == (other.dim, other.degree, other.terms)

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def distance(self, other: "Multivector") -> float:
        """Largest coefficient difference."""
        return (self - other).max_abs()

    def allclose(self, other: "Multivector", tol: float) -> bool:
        return self.distance(other) <= tol

    def __repr__(self):
        body = " + ".join(f"{v:g}*e{k}" for k, v in self.terms.items()) or "0"
        return f"Multivector(deg={self.degree}, {body})"


def wedge(m1: Multivector, m2: Multivector) -> Multivector:
    if m1.dim != m2.dim:
        raise ValueError("multivectors over different bases")
    deg = m1.degree + m2.degree
    if deg > MAX_DEGREE:
        raise ValueError(f"degree {deg} exceeds {MAX_DEGREE}")
    out: dict = defaultdict(float)
    for i1, c1 in m1.terms.items():
        for i2, c2 in m2.terms.items():
            sign, key = _canonical(i1 + i2)
            if sign:
                out[key] += sign * c1 * c2
    return Multivector(m1.dim, deg, out)


def wedge_vectors(*vectors) -> Multivector:
    """Wedge of dense degree-1 coordinate vectors."""
    out = Multivector.vector(vectors[0])
    for v in vectors[1:]:
        out = wedge(out, Multivector.vector(v))
    return out


def _dense_wedge(*vectors) -> np.ndarray:
    """Antisymmetrized outer product of dense vectors (same convention as to_dense)."""
    k = len(vectors)
    T = 0.0
    for perm in itertools.permutations(range(k)):
        term = vectors[perm[0]]
        for p in perm[1:]:
            term = np.multiply.outer(term, vectors[p])
        T = T + _perm_sign(perm) * term
    return T


# -- iso(eta) --------------------------------------------------------------------

@dataclass(frozen=True)
class IsoElement:
    v: np.ndarray
    X: np.ndarray


@dataclass(frozen=True, eq=False)
class IGElement:
    """(w, A) in V x| G acting by v -> w + A v."""

    w: np.ndarray
    A: np.ndarray

    def matrix(self) -> np.ndarray:
        d = len(self.w)
        g = np.eye(d + 1)
        g[:d, :d] = self.A
        g[:d, d] = self.w
        return g

    def __matmul__(self, other: "IGElement") -> "IGElement":
        return IGElement(self.w + self.A @ other.w, self.A @ other.A)

    @classmethod
    def identity(cls, dim: int) -> "IGElement":
        return cls(np.zeros(dim), np.eye(dim))


class IsoAlgebra:
    """iso(eta) with its fixed basis and bracket."""

    def __init__(self, space: QuadraticSpace):
        self.space = space
        self.vdim = space.dim
        self.dim = space.dim + space.so_dim

    def __repr__(self):
        return f"IsoAlgebra(dim V = {self.vdim})"

    @cached_property
    def labels(self) -> list[str]:
        return [f"e{i}" for i in range(self.vdim)] + [f"L{a}{b}" for a, b in self.space.so_index]

    def coords(self, v=None, X=None) -> np.ndarray:
        out = np.zeros(self.dim)
        if v is not None:
            out[: self.vdim] = v
        if X is not None:
            out[self.vdim:] = self.space.so_coords(X)
        return out

    def split(self, coords) -> IsoElement:
        coords = np.asarray(coords, dtype=float)
        return IsoElement(coords[: self.vdim].copy(), self.space.so_matrix(coords[self.vdim:]))

    def translation(self, v) -> Multivector:
        return Multivector.vector(self.coords(v=v))

    def rotation(self, X) -> Multivector:
        return Multivector.vector(self.coords(X=X))

    def element(self, p: IsoElement) -> np.ndarray:
        return self.coords(p.v, p.X)

    @cached_property
    def structure(self) -> dict:
        """Sparse table {(i, j): {k: c}} of [E_i, E_j] for i < j."""
        table = {}
        elems = [self.split(np.eye(self.dim)[i]) for i in range(self.dim)]
        for i, j in itertools.combinations(range(self.dim), 2):
            b = self.element(iso_bracket(elems[i], elems[j]))
            nz = {k: c for k, c in enumerate(b) if abs(c) > PRUNE}
            if nz:
                table[(i, j)] = nz
        return table

    def basis_bracket(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return self.structure.get((i, j), {})
        return {k: -c for k, c in self.structure.get((j, i), {}).items()}

    @cached_property
    def basis_matrices(self) -> np.ndarray:
        """Affine (d+1)x(d+1) matrices of the basis elements."""
        d = self.vdim
        mats = np.zeros((self.dim, d + 1, d + 1))
        for i in range(d):
            mats[i, i, d] = 1.0
        mats[d:, :d, :d] = self.space.so_basis
        return mats

    def adjoint_matrix(self, g: IGElement) -> np.ndarray:
        """Matrix of ad_{(w, A)}(v, X) = (A v - A X A^{-1} w, A X A^{-1})."""
        sp = self.space
        if not is_orthogonal(sp, g.A):
            raise ValueError("linear part is not in O(eta)")
        Ainv = group_inverse(sp, g.A)
        cols = []
        for i in range(self.dim):
            p = self.split(np.eye(self.dim)[i])
            Xm = g.A @ p.X @ Ainv
            cols.append(self.coords(g.A @ p.v - Xm @ g.w, Xm))
        return np.array(cols).T


def iso_bracket(p: IsoElement, q: IsoElement) -> IsoElement:
    """[(v, A), (w, B)] = (A w - B v, [A, B])."""
    if np.shape(p.v) != np.shape(q.v):
        raise ValueError("elements of different iso algebras")
    return IsoElement(p.X @ q.v - q.X @ p.v, commutator(p.X, q.X))


def make_bv(alg: IsoAlgebra, v, basis=None) -> Multivector:
    """b_v = sum eta^{jk} e_j ^ Lambda_{v, e_k} for any basis (e_k) of V."""
    sp = alg.space
    E = np.eye(sp.dim) if basis is None else np.asarray(basis, dtype=float)
    gram = E @ sp.metric @ E.T
    ginv = np.linalg.inv(gram)
    T = np.zeros((alg.dim, alg.dim))
    for j, k in itertools.product(range(sp.dim), repeat=2):
        if ginv[j, k] == 0.0:
            continue
        T += ginv[j, k] * _dense_wedge(alg.coords(v=E[j]), alg.coords(X=lambda_op(sp, v, E[k])))
    return Multivector.from_dense(T)


def make_omega(alg: IsoAlgebra, basis=None) -> Multivector:
    """Omega = sum eta^{jk} eta^{mn} e_j ^ e_m ^ Lambda_{e_k, e_n}."""
    sp = alg.space
    E = np.eye(sp.dim) if basis is None else np.asarray(basis, dtype=float)
    ginv = np.linalg.inv(E @ sp.metric @ E.T)
    T = np.zeros((alg.dim,) * 3)
    r = range(sp.dim)
    for j, k, m, n in itertools.product(r, r, r, r):
        c = ginv[j, k] * ginv[m, n]
        if c == 0.0:
            continue
        T += c * _dense_wedge(alg.coords(v=E[j]), alg.coords(v=E[m]),
                              alg.coords(X=lambda_op(sp, E[k], E[n])))
    return Multivector.from_dense(T)


def _accumulate(out, c, *parts):
    """Add c * (wedge of parts) into out; each part is an int index or a sparse dict."""
    expanded = [[(p, 1.0)] if isinstance(p, int) else list(p.items()) for p in parts]
    for combo in itertools.product(*expanded):
        idx = tuple(i for i, _ in combo)
        sign, key = _canonical(idx)
        if not sign:
            continue
        coef = c * sign
        for _, w in combo:
            coef *= w
        out[key] += coef


def schouten_22(alg: IsoAlgebra, m1: Multivector, m2: Multivector) -> Multivector:
    """Algebraic Schouten bracket of two bivectors over iso(eta).

    [a^b, c^d] = a^[b,c]^d - a^[b,d]^c - b^[a,c]^d + b^[a,d]^c, extended bilinearly.
    """
    if m1.degree != 2 or m2.degree != 2:
        raise ValueError("schouten_22 needs two bivectors")
    out: dict = defaultdict(float)
    br = alg.basis_bracket
    for (a, b), c1 in m1.terms.items():
        for (c, d), c2 in m2.terms.items():
            k = c1 * c2
            _accumulate(out, k, a, br(b, c), d)
            _accumulate(out, -k, a, br(b, d), c)
            _accumulate(out, -k, b, br(a, c), d)
            _accumulate(out, k, b, br(a, d), c)
    return Multivector(alg.dim, 3, out)


def schouten_leibniz(m1: Multivector, m2: Multivector, basis_bracket) -> Multivector:
    """Schouten bracket from the decomposable formula

    [X1^..^Xp, Y1^..^Yq] = sum (-1)^{i+j} [Xi, Yj] ^ X1..^Xi^..Xp ^ Y1..^Yj^..Yq

    with the bracket of basis elements given by ``basis_bracket(i, j) -> {k: c}``.
    """
    deg = m1.degree + m2.degree - 1
    if deg > MAX_DEGREE:
        raise ValueError("result degree too high")
    out: dict = defaultdict(float)
    for I, c1 in m1.terms.items():
        for J, c2 in m2.terms.items():
            for i, x in enumerate(I):
                for j, y in enumerate(J):
                    b = basis_bracket(x, y)
                    if not b:
                        continue
                    sign = (-1) ** (i + j)
                    rest = I[:i] + I[i + 1:] + J[:j] + J[j + 1:]
                    _accumulate(out, sign * c1 * c2, b, *rest)
    return Multivector(m1.dim, deg, out)


def adjoint_action(alg: IsoAlgebra, g: IGElement, m: Multivector) -> Multivector:
    """ad_{(w, A)} extended to wedges."""
    M = alg.adjoint_matrix(g)
    T = m.to_dense()
    if m.degree == 1:
        T = M @ T
    elif m.degree == 2:
        T = np.einsum("ia,jb,ab->ij", M, M, T, optimize=True)
    else:
        T = np.einsum("ia,jb,kc,abc->ijk", M, M, M, T, optimize=True)
    return Multivector.from_dense(T)


def pl_bivector(alg: IsoAlgebra, b: Multivector, g: IGElement) -> np.ndarray:
    """Tangent bivector b g - g b at g, legs translated as affine matrices.

    Returned as the antisymmetric tensor T[r1, c1, r2, c2] on matrix entries,
    so that {F1, F2}(g) = T paired with the entry differentials.
    """
    if b.degree != 2:
        raise ValueError("pl_bivector needs a bivector")
    G = g.matrix()
    mats = alg.basis_matrices
    right = mats @ G
    left = G @ mats
    T = np.zeros(G.shape * 2)
    for (i, j), c in b.terms.items():
        T += c * (np.multiply.outer(right[i], right[j]) - np.multiply.outer(right[j], right[i]))
        T -= c * (np.multiply.outer(left[i], left[j]) - np.multiply.outer(left[j], left[i]))
    return T


def pl_bivector_trivialized(alg: IsoAlgebra, b: Multivector, g: IGElement) -> Multivector:
    """Right trivialization (b g - g b) g^{-1} = b - ad_g b."""
    return b - adjoint_action(alg, g, b)


def tangent_from_trivialized(alg: IsoAlgebra, r: Multivector, g: IGElement) -> np.ndarray:
    """Right-translate a bivector over iso(eta) to the tangent tensor at g."""
    G = g.matrix()
    legs = alg.basis_matrices @ G
    T = np.zeros(G.shape * 2)
    for (i, j), c in r.terms.items():
        T += c * (np.multiply.outer(legs[i], legs[j]) - np.multiply.outer(legs[j], legs[i]))
    return T


def translate_tangent(T: np.ndarray, left=None, right=None) -> np.ndarray:
    """Apply M -> left @ M @ right to both legs of a tangent bivector tensor."""
    n = T.shape[0]
    L = np.eye(n) if left is None else left
    R = np.eye(n) if right is None else right
    return np.einsum("ai,jb,ck,ld,ijkl->abcd", L, R, L, R, T, optimize=True)


def random_ig(space: QuadraticSpace, rng: np.random.Generator, reflections: bool = False) -> IGElement:
    from .lorentz import random_so0, reflection

    A = random_so0(space, rng)
    if reflections and rng.integers(2):
        A = A @ reflection(space, space.basis_vector(space.dim - 1))
    return IGElement(rng.uniform(-1, 1, space.dim), A)
