"""Quadratic spaces, the operators Lambda_xy, the forms k / k~ and O(eta).

Vectors, skew operators, group elements and covectors are plain numpy arrays.
Covectors on so(eta) are stored in the basis dual to the fixed so(eta) basis
``{Lambda_ab : a < b}`` (lexicographic, standard vectors ``e_a``).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

STRUCT_TOL = 1e-10
NUMERIC_TOL = 1e-9


class Component(str, enum.Enum):
    """Connected components of O(eta) for a Minkowski form."""

    SO0 = "SO0"
    TIME_REFL = "TimeRefl"
    SPACE_REFL = "SpaceRefl"
    SO1 = "SO1"


# (det sign, time-orientation sign) for each component
_COMPONENT_SIGNS = {
    Component.SO0: (1, 1),
    Component.TIME_REFL: (-1, -1),
    Component.SPACE_REFL: (-1, 1),
    Component.SO1: (1, -1),
}
_SIGNS_COMPONENT = {v: k for k, v in _COMPONENT_SIGNS.items()}


def compose_components(a: Component, b: Component) -> Component:
    """Klein four-group law on component tags."""
    da, ta = _COMPONENT_SIGNS[a]
    db, tb = _COMPONENT_SIGNS[b]
    return _SIGNS_COMPONENT[(da * db, ta * tb)]


@dataclass(frozen=True, eq=False)
class QuadraticSpace:
    """A real vector space with a symmetric nondegenerate form ``eta``."""

    metric: np.ndarray

    def __post_init__(self):
        m = np.array(self.metric, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"metric must be a square matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, atol=STRUCT_TOL, rtol=0):
            raise ValueError("metric is not symmetric")
        if abs(np.linalg.det(m)) <= STRUCT_TOL:
            raise ValueError("metric is degenerate")
        m.setflags(write=False)
        object.__setattr__(self, "metric", m)

    @classmethod
    def from_signature(cls, signs) -> "QuadraticSpace":
        signs = [int(x) for x in signs]
        if any(x not in (1, -1) for x in signs):
            raise ValueError("signature entries must be +1 or -1")
        return cls(np.diag(np.array(signs, dtype=float)))

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @cached_property
    def signature(self) -> tuple[int, ...]:
        if np.count_nonzero(self.metric - np.diag(np.diag(self.metric))) == 0:
            return tuple(int(np.sign(x)) for x in np.diag(self.metric))
        ev = np.linalg.eigvalsh(self.metric)
        return tuple(sorted((int(np.sign(x)) for x in ev), reverse=True))

    @cached_property
    def inverse_metric(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    def eta(self, x, y) -> float:
        return float(np.asarray(x) @ self.metric @ np.asarray(y))

    def flat(self, x) -> np.ndarray:
        """The covector eta(x) in V*."""
        return self.metric @ np.asarray(x, dtype=float)

    def basis_vector(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    # -- so(eta) in the fixed basis --------------------------------------

    @cached_property
    def so_index(self) -> tuple[tuple[int, int], ...]:
        return tuple(itertools.combinations(range(self.dim), 2))

    @property
    def so_dim(self) -> int:
        return len(self.so_index)

    @cached_property
    def so_basis(self) -> np.ndarray:
        """Array of shape (N, d, d) holding Lambda_{e_a e_b}, a < b."""
        basis = np.array([lambda_op(self, self.basis_vector(a), self.basis_vector(b))
                          for a, b in self.so_index])
        basis.setflags(write=False)
        return basis

    @cached_property
    def _so_pinv(self) -> np.ndarray:
        flat = self.so_basis.reshape(self.so_dim, -1).T
        return np.linalg.pinv(flat)

    def so_coords(self, X) -> np.ndarray:
        """Coordinates of a skew operator in the fixed so(eta) basis."""
        return self._so_pinv @ np.asarray(X, dtype=float).reshape(-1)

    def so_matrix(self, coords) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), self.so_basis, axes=1)

    @cached_property
    def k_gram(self) -> np.ndarray:
        """Gram matrix of the form k on the so(eta) basis, built from the generator formula."""
        n = self.so_dim
        K = np.empty((n, n))
        e = self.metric
        for i, (x, y) in enumerate(self.so_index):
            for j, (z, t) in enumerate(self.so_index):
                K[i, j] = e[x, t] * e[y, z] - e[x, z] * e[y, t]
        K.setflags(write=False)
        return K

    @cached_property
    def k_gram_inverse(self) -> np.ndarray:
        Kinv = np.linalg.inv(self.k_gram)
        Kinv.setflags(write=False)
        return Kinv


def make_minkowski(n_total: int) -> QuadraticSpace:
    """Minkowski space of dimension ``n_total`` with eta = diag(1, -1, ..., -1)."""
    if int(n_total) != n_total or n_total < 4:
        raise ValueError(f"Minkowski space needs dimension >= 4, got {n_total}")
    return QuadraticSpace.from_signature([1] + [-1] * (int(n_total) - 1))


def _check_vector(space: QuadraticSpace, *vs) -> None:
    for v in vs:
        if np.shape(v) != (space.dim,):
            raise ValueError(f"expected a vector of length {space.dim}, got shape {np.shape(v)}")


def lambda_op(space: QuadraticSpace, x, y) -> np.ndarray:
    """Lambda_xy = x (x) eta(y) - y (x) eta(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_vector(space, x, y)
    return np.outer(x, space.flat(y)) - np.outer(y, space.flat(x))


def is_skew(space: QuadraticSpace, X, tol: float = STRUCT_TOL) -> bool:
    X = np.asarray(X, dtype=float)
    if X.shape != (space.dim, space.dim):
        return False
    r = space.metric @ X + X.T @ space.metric
    return bool(np.max(np.abs(r)) <= tol * max(1.0, np.max(np.abs(X))))


def is_orthogonal(space: QuadraticSpace, g, tol: float = NUMERIC_TOL) -> bool:
    g = np.asarray(g, dtype=float)
    if g.shape != (space.dim, space.dim):
        return False
    r = g.T @ space.metric @ g - space.metric
    return bool(np.max(np.abs(r)) <= tol * max(1.0, np.max(np.abs(g)) ** 2))


def _require_skew(space, *Xs):
    for X in Xs:
        if not is_skew(space, X):
            raise ValueError("operator is not skew with respect to eta")


def _require_orthogonal(space, g):
    if not is_orthogonal(space, g):
        raise ValueError("matrix is not in O(eta)")


def group_inverse(space: QuadraticSpace, g) -> np.ndarray:
    """g^{-1} = eta^{-1} g^T eta for g in O(eta)."""
    return space.inverse_metric @ np.asarray(g).T @ space.metric


def commutator(X, Y) -> np.ndarray:
    return X @ Y - Y @ X


# -- the forms k and k~ -----------------------------------------------------

def form_k(space: QuadraticSpace, X, Y) -> float:
    _require_skew(space, X, Y)
    return float(space.so_coords(X) @ space.k_gram @ space.so_coords(Y))


def k_flat(space: QuadraticSpace, X) -> np.ndarray:
    """The covector k(X) = k(X, .)."""
    _require_skew(space, X)
    return space.k_gram @ space.so_coords(X)


def k_sharp(space: QuadraticSpace, phi) -> np.ndarray:
    """Inverse of :func:`k_flat`."""
    return space.so_matrix(space.k_gram_inverse @ np.asarray(phi, dtype=float))


def form_k_tilde(space: QuadraticSpace, phi, psi) -> float:
    return float(np.asarray(phi) @ space.k_gram_inverse @ np.asarray(psi))


def pairing(space: QuadraticSpace, phi, X) -> float:
    """<phi, X> for a covector phi on so(eta)."""
    return float(np.asarray(phi) @ space.so_coords(X))


def ad(space: QuadraticSpace, g, X) -> np.ndarray:
    _require_orthogonal(space, g)
    return g @ X @ group_inverse(space, g)


def adjoint_matrix(space: QuadraticSpace, g) -> np.ndarray:
    """Matrix of ad(g) acting on so(eta) coordinates."""
    _require_orthogonal(space, g)
    ginv = group_inverse(space, g)
    moved = np.einsum("ij,njk,kl->nil", g, space.so_basis, ginv)
    return space._so_pinv @ moved.reshape(space.so_dim, -1).T


def ad_sharp(space: QuadraticSpace, g, phi) -> np.ndarray:
    """Coadjoint action ad#(g) = ad(g^{-1})^*."""
    return adjoint_matrix(space, group_inverse(space, g)).T @ np.asarray(phi, dtype=float)


# -- one-parameter groups ---------------------------------------------------

def _near(a: float, b: float, tol: float = NUMERIC_TOL) -> bool:
    return abs(a - b) <= tol


def projection_p(space: QuadraticSpace, v, w) -> np.ndarray:
    """Orthogonal projection onto <v, w> for an orthonormal pair."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_vector(space, v, w)
    nv, nw = space.eta(v, v), space.eta(w, w)
    if not (_near(abs(nv), 1.0) and _near(abs(nw), 1.0) and _near(space.eta(v, w), 0.0)):
        raise ValueError("projection_p needs an orthonormal pair")
    return np.sign(nv) * np.outer(v, space.flat(v)) + np.sign(nw) * np.outer(w, space.flat(w))


def exp_null(space: QuadraticSpace, u, f) -> np.ndarray:
    """exp(Lambda_uf) for eta(u, f) = 0 = eta(f, f)."""
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    _check_vector(space, u, f)
    scale = max(1.0, float(np.max(np.abs(u))) * float(np.max(np.abs(f))))
    if not (_near(space.eta(f, f), 0.0, NUMERIC_TOL * scale)
            and _near(space.eta(u, f), 0.0, NUMERIC_TOL * scale)):
        raise ValueError("exp_null needs a null f orthogonal to u")
    return (np.eye(space.dim) + lambda_op(space, u, f)
            - 0.5 * space.eta(u, u) * np.outer(f, space.flat(f)))


def exp_boost(space: QuadraticSpace, s, t, nu: float) -> np.ndarray:
    """exp(nu Lambda_st) for eta(s, s) = -1 = -eta(t, t), eta(s, t) = 0."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    _check_vector(space, s, t)
    if not (_near(space.eta(s, s), -1.0) and _near(space.eta(t, t), 1.0)
            and _near(space.eta(s, t), 0.0)):
        raise ValueError("exp_boost needs eta(s,s) = -1, eta(t,t) = 1, eta(s,t) = 0")
    P = projection_p(space, s, t)
    return (np.eye(space.dim) - P + math.cosh(nu) * P
            + math.sinh(nu) * lambda_op(space, s, t))


def exp_rotation(space: QuadraticSpace, x, y, nu: float) -> np.ndarray:
    """exp(nu Lambda_xy) for eta(x, x) = eta(y, y) = +-1, eta(x, y) = 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_vector(space, x, y)
    nx, ny = space.eta(x, x), space.eta(y, y)
    if not (_near(abs(nx), 1.0) and _near(nx, ny) and _near(space.eta(x, y), 0.0)):
        raise ValueError("exp_rotation needs an orthonormal pair of equal sign")
    P = projection_p(space, x, y)
    return (np.eye(space.dim) - P + math.cos(nu) * P
            + math.sin(nu) * lambda_op(space, x, y))


def exp_closed(space: QuadraticSpace, kind: str, *vectors, nu: float = 1.0) -> np.ndarray:
    """Closed-form one-parameter group element.

    ``kind='null'`` takes ``(u, f)``; ``'boost'`` takes ``(s, t)`` and returns
    exp(nu Lambda_st); ``'rotation'`` takes ``(x, y)`` and returns exp(nu Lambda_xy).
    """
    if kind == "null":
        return exp_null(space, *vectors)
    if kind == "boost":
        return exp_boost(space, *vectors, nu)
    if kind == "rotation":
        return exp_rotation(space, *vectors, nu)
    raise ValueError(f"unknown one-parameter group kind {kind!r}")


def exp_series(X, tol: float = 1e-16, max_terms: int = 500) -> np.ndarray:
    """Truncated power series of the matrix exponential.

    Stops once the Frobenius norm of the next term drops below ``tol``.
    """
    X = np.asarray(X, dtype=float)
    result = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for k in range(1, max_terms):
        term = term @ X / k
        result = result + term
        if np.linalg.norm(term) < tol:
            break
    else:
        raise RuntimeError("exp_series did not converge")
    return result


# -- reflections and components ---------------------------------------------

def reflection(space: QuadraticSpace, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    _check_vector(space, v)
    n = space.eta(v, v)
    if abs(n) <= STRUCT_TOL:
        raise ValueError("cannot reflect across the orthogonal complement of a null vector")
    return np.eye(space.dim) - (2.0 / n) * np.outer(v, space.flat(v))


def classify_component(space: QuadraticSpace, g) -> Component:
    """Component of O(eta) containing g, for eta = diag(1, -1, ..., -1)."""
    g = np.asarray(g, dtype=float)
    _require_orthogonal(space, g)
    if space.signature[0] != 1 or any(x != -1 for x in space.signature[1:]):
        raise ValueError("component classification needs the canonical Minkowski form")
    det = 1 if np.linalg.det(g) > 0 else -1
    time = 1 if g[0, 0] > 0 else -1
    return _SIGNS_COMPONENT[(det, time)]


# -- sampling helpers -------------------------------------------------------

def gram_schmidt(space: QuadraticSpace, vectors) -> list[np.ndarray]:
    """eta-orthonormalize a list of vectors (raises on a null intermediate)."""
    out: list[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for e in out:
            w = w - space.eta(e, e) * space.eta(w, e) * e
        n = space.eta(w, w)
        if abs(n) < 1e-6 * max(1.0, float(w @ w)):
            raise ValueError("Gram-Schmidt hit a (nearly) null vector")
        out.append(w / math.sqrt(abs(n)))
    return out


def random_orthonormal_basis(space: QuadraticSpace, rng: np.random.Generator) -> list[np.ndarray]:
    """Columns of a random SO0 element, shuffled; entries stay moderate."""
    g = random_so0(space, rng)
    return [g[:, i].copy() for i in rng.permutation(space.dim)]


def _unit_combo(rng: np.random.Generator, block: np.ndarray, count: int) -> np.ndarray:
    """``count`` Euclidean-orthonormal random combinations of the rows of ``block``."""
    q, _ = np.linalg.qr(rng.normal(size=(len(block), count)))
    return q.T @ block


def random_plane_factor(space: QuadraticSpace, rng: np.random.Generator,
                        within=None, param_range: float = 1.5) -> np.ndarray:
    """One closed-form exponential in a random plane.

    ``within`` is an orthonormal list of vectors (default: an orthonormal
    basis of V); the plane is a rotation plane inside one sign block or a
    boost plane pairing a unit vector from each block, which keeps every
    factor's entries bounded by cosh(param_range).
    """
    if within is None:
        within = gram_schmidt(space, [space.basis_vector(i) for i in range(space.dim)])
    within = np.array(within, dtype=float)
    signs = np.array([np.sign(space.eta(v, v)) for v in within])
    pos, neg = within[signs > 0], within[signs < 0]
    kinds = []
    if len(pos) and len(neg):
        kinds.append("boost")
    if len(pos) >= 2 or len(neg) >= 2:
        kinds.append("rotation")
    if not kinds:
        return np.eye(space.dim)
    nu = rng.uniform(-param_range, param_range)
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "boost":
        (t,) = _unit_combo(rng, pos, 1)
        (s,) = _unit_combo(rng, neg, 1)
        if space.eta(t, t) < 0:
            s, t = t, s
        return exp_boost(space, s, t, nu)
    blocks = [b for b in (pos, neg) if len(b) >= 2]
    block = blocks[int(rng.integers(len(blocks)))]
    x, y = _unit_combo(rng, block, 2)
    return exp_rotation(space, x, y, nu)


def random_so0(space: QuadraticSpace, rng: np.random.Generator, factors: int = 3,
               within=None, param_range: float = 1.5) -> np.ndarray:
    """Product of ``factors`` closed-form exponentials (an element of SO0)."""
    g = np.eye(space.dim)
    for _ in range(factors):
        g = g @ random_plane_factor(space, rng, within, param_range)
    return g


def random_orthogonal(space: QuadraticSpace, rng: np.random.Generator,
                      component: Component | None = None) -> np.ndarray:
    """Random element of O(eta) in the requested (or a random) component."""
    if component is None:
        component = list(Component)[int(rng.integers(4))]
    g = random_so0(space, rng)
    t = space.basis_vector(0)
    s = space.basis_vector(space.dim - 1)
    extra = {
        Component.SO0: np.eye(space.dim),
        Component.TIME_REFL: reflection(space, t),
        Component.SPACE_REFL: reflection(space, s),
        Component.SO1: reflection(space, t) @ reflection(space, s),
    }[component]
    return g @ extra
