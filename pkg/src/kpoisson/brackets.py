"""Polynomial functions on a^0 x A and the three Poisson brackets on them.

Generators come in two kinds, indexed over the rho basis of a^0:

* ``translation`` alpha: the function k~_{rho_alpha}, or v_alpha in the
  matrix chart;
* ``matrix_element`` (alpha, beta): k~_{rho_alpha rho_beta}, or Lambda_{alpha beta}.

The two charts are related by v_a = sgn(rho_a) k~_{rho_a} and
Lambda_ab = sgn(rho_a) k~_{rho_a rho_b}; :func:`to_matrix_chart` converts.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .groups import AElement, Frame
from .lorentz import ad_sharp, form_k_tilde, is_orthogonal, make_minkowski, QuadraticSpace

PRUNE = 1e-14

TRANSLATION = "translation"
MATRIX_ELEMENT = "matrix_element"


class Generator(NamedTuple):
    kind: str
    indices: tuple

    def __repr__(self):
        if self.kind == TRANSLATION:
            return f"T{self.indices[0]}"
        return "M{}{}".format(*self.indices)


def translation(alpha: int) -> Generator:
    return Generator(TRANSLATION, (int(alpha),))


def matrix_element(alpha: int, beta: int) -> Generator:
    return Generator(MATRIX_ELEMENT, (int(alpha), int(beta)))


def all_generators(size: int) -> list[Generator]:
    """All generators for an a^0 of dimension ``size`` (= n + 1)."""
    return ([translation(a) for a in range(size)]
            + [matrix_element(a, b) for a in range(size) for b in range(size)])


class PolyFunction:
    """A real polynomial in the generators, kept in canonical sorted form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, c in (terms or {}).items():
            key = tuple(sorted(mono))
            clean[key] = clean.get(key, 0.0) + float(c)
        self.terms = {k: v for k, v in sorted(clean.items()) if abs(v) > PRUNE}

    @classmethod
    def constant(cls, c: float) -> "PolyFunction":
        return cls({(): c})

    @classmethod
    def gen(cls, g: Generator, c: float = 1.0) -> "PolyFunction":
        return cls({(g,): c})

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return PolyFunction(out)

    __radd__ = __add__

    def __neg__(self):
        return PolyFunction({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return PolyFunction({k: v * other for k, v in self.terms.items()})
        other = _as_poly(other)
        out: dict = defaultdict(float)
        for (k1, v1), (k2, v2) in itertools.product(self.terms.items(), other.terms.items()):
            out[tuple(sorted(k1 + k2))] += v1 * v2
        return PolyFunction(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyFunction):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def generators(self) -> set:
        return {g for mono in self.terms for g in mono}

    def evaluate(self, values) -> float:
        """Evaluate with ``values`` mapping Generator -> float."""
        total = 0.0
        for mono, c in self.terms.items():
            p = c
            for g in mono:
                p *= values[g]
            total += p
        return total

    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def __repr__(self):
        if not self.terms:
            return "PolyFunction(0)"
        parts = []
        for mono, c in self.terms.items():
            parts.append(f"{c:+g}" + "".join(f"*{g!r}" for g in mono))
        return "PolyFunction(" + " ".join(parts) + ")"


def _as_poly(x) -> PolyFunction:
    if isinstance(x, PolyFunction):
        return x
    if isinstance(x, Generator):
        return PolyFunction.gen(x)
    return PolyFunction.constant(float(x))


GeneratorBracket = Callable[[Generator, Generator], PolyFunction]


def leibniz_extend(f, g, gen_bracket: GeneratorBracket) -> PolyFunction:
    """Extend a bracket on generators to polynomials by bilinearity and Leibniz."""
    f, g = _as_poly(f), _as_poly(g)
    out = PolyFunction()
    cache: dict = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            for i, x in enumerate(m1):
                rest1 = m1[:i] + m1[i + 1:]
                for j, y in enumerate(m2):
                    rest2 = m2[:j] + m2[j + 1:]
                    key = (x, y)
                    if key not in cache:
                        cache[key] = gen_bracket(x, y)
                    b = cache[key]
                    if b.is_zero():
                        continue
                    out = out + b * PolyFunction({rest1 + rest2: c1 * c2})
    return out


# -- the structural bracket (k~ chart) ----------------------------------------

def _structural_generators(eta: np.ndarray) -> GeneratorBracket:
    """{k~_a, k~_b}, {k~_c, k~_{ab}} and {k~_{..}, k~_{..}} on the rho basis.

    eta is the Gram matrix k~(rho_a, rho_b), with rho_0 the time covector.
    """

    def T(a):
        return PolyFunction.gen(translation(a))

    def M(a, b):
        return PolyFunction.gen(matrix_element(a, b))

    def tm(lam, phi, psi):
        # {k~_lam, k~_{phi psi}} = k~_{lam psi}(k~_{phi R} - k~(R, phi))
        #                         + k~(lam, phi)(k~_{R psi} - k~(R, psi))
        return (M(lam, psi) * (M(phi, 0) - eta[0, phi])
                + eta[lam, phi] * (M(0, psi) - eta[0, psi]))

    def bracket(x: Generator, y: Generator) -> PolyFunction:
        if x.kind == TRANSLATION and y.kind == TRANSLATION:
            (a,), (b,) = x.indices, y.indices
            return eta[0, a] * T(b) - eta[0, b] * T(a)
        if x.kind == TRANSLATION:
            return tm(x.indices[0], *y.indices)
        if y.kind == TRANSLATION:
            return -tm(y.indices[0], *x.indices)
        return PolyFunction()

    return bracket


def bracket_structural(f, g, frame: Frame | None = None) -> PolyFunction:
    """The Poisson bracket dual to the algebroid of Gamma_A, in the k~ chart."""
    eta = _rho_gram(frame)
    return leibniz_extend(f, g, _structural_generators(eta))


def _rho_gram(frame: Frame | None) -> np.ndarray:
    if frame is None:
        raise ValueError("a frame is required")
    return np.rint(frame.rho_gram)


# -- the matrix-coordinate bracket ---------------------------------------------

def _minkowski_eta(a: int, b: int) -> float:
    if a != b:
        return 0.0
    return 1.0 if a == 0 else -1.0


def _zakrzewski_generators(h: float) -> GeneratorBracket:
    def V(a):
        return PolyFunction.gen(translation(a))

    def L(a, b):
        return PolyFunction.gen(matrix_element(a, b))

    def delta(a, b):
        return 1.0 if a == b else 0.0

    def lam_v(mu, nu, beta):
        # {Lambda_mu nu, v_beta} = h[(Lambda_mu0 - d_mu0) Lambda_beta nu + eta_mu beta (Lambda_0nu - d_0nu)]
        return h * ((L(mu, 0) - delta(mu, 0)) * L(beta, nu)
                    + _minkowski_eta(mu, beta) * (L(0, nu) - delta(0, nu)))

    def bracket(x: Generator, y: Generator) -> PolyFunction:
        if x.kind == TRANSLATION and y.kind == TRANSLATION:
            (a,), (b,) = x.indices, y.indices
            return h * (delta(b, 0) * V(a) - delta(a, 0) * V(b))
        if x.kind == MATRIX_ELEMENT and y.kind == TRANSLATION:
            return lam_v(*x.indices, y.indices[0])
        if x.kind == TRANSLATION and y.kind == MATRIX_ELEMENT:
            return -lam_v(*y.indices, x.indices[0])
        return PolyFunction()

    return bracket


def bracket_zakrzewski(f, g, h: float) -> PolyFunction:
    """Brackets of the matrix elements (Lambda, v) of the Poincare group, parameter h."""
    return leibniz_extend(f, g, _zakrzewski_generators(float(h)))


def to_matrix_chart(f, frame: Frame) -> PolyFunction:
    """Rewrite a k~-chart polynomial in (v, Lambda) coordinates."""
    signs = np.rint(frame.rho_signs)
    sub = {}
    for g in _as_poly(f).generators():
        a = g.indices[0]
        sub[g] = PolyFunction.gen(g, signs[a])   # sgn^{-1} = sgn
    return substitute(f, sub)


def to_ktilde_chart(f, frame: Frame) -> PolyFunction:
    # the substitution is an involution
    return to_matrix_chart(f, frame)


def substitute(f, sub: dict) -> PolyFunction:
    out = PolyFunction()
    for mono, c in _as_poly(f).terms.items():
        term = PolyFunction.constant(c)
        for g in mono:
            term = term * sub.get(g, PolyFunction.gen(g))
        out = out + term
    return out


# -- points ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A point (phi, a) of a^0 x A."""

    phi: np.ndarray
    a: AElement

    def check(self, frame: Frame) -> "GroupPoint":
        if not frame.in_a0(self.phi):
            raise ValueError("phi is not in a^0")
        return self


@dataclass(frozen=True, eq=False)
class AffinePoincareElement:
    """The affine matrix (Lambda, v; 0, 1) of the Poincare group P(n + 1)."""

    Lambda: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.Lambda, dtype=float)
        size = L.shape[0]
        space = make_minkowski(size) if size >= 4 else QuadraticSpace.from_signature(
            [1] + [-1] * (size - 1))
        if not is_orthogonal(space, L):
            raise ValueError("Lambda is not a Lorentz matrix")

    @property
    def size(self) -> int:
        return len(self.v)

    def matrix(self) -> np.ndarray:
        n = self.size
        g = np.eye(n + 1)
        g[:n, :n] = self.Lambda
        g[:n, n] = self.v
        return g


def semidirect_compose(p1: GroupPoint, p2: GroupPoint, frame: Frame) -> GroupPoint:
    """(phi, g)(psi, h) = (phi + ad#(g) psi, g h)."""
    phi = np.asarray(p1.phi) + ad_sharp(frame.space, p1.a.g, p2.phi)
    return GroupPoint(phi, p1.a @ p2.a)


def semidirect_inverse(p: GroupPoint, frame: Frame) -> GroupPoint:
    ainv = p.a.inverse(frame)
    return GroupPoint(-ad_sharp(frame.space, ainv.g, p.phi), ainv)


def generator_values(pt: GroupPoint, frame: Frame, chart: str = "ktilde") -> dict:
    """Values of all generators at ``pt``.

    k~_{rho_a}(phi, a) = k~(rho_a, phi), k~_{rho_a rho_b}(phi, a) = k~(rho_a, ad#(a) rho_b).
    """
    sp = frame.space
    Kinv = sp.k_gram_inverse
    rho = frame.rho
    T = rho @ Kinv @ np.asarray(pt.phi)
    moved = np.array([ad_sharp(sp, pt.a.g, r) for r in rho])
    M = rho @ Kinv @ moved.T
    if chart == "matrix":
        signs = frame.rho_signs
        T = signs * T
        M = signs[:, None] * M
    elif chart != "ktilde":
        raise ValueError(f"unknown chart {chart!r}")
    size = len(rho)
    vals = {translation(a): T[a] for a in range(size)}
    vals.update({matrix_element(a, b): M[a, b] for a in range(size) for b in range(size)})
    return vals


def eval_poly(f, pt: GroupPoint, frame: Frame, chart: str = "ktilde") -> float:
    return _as_poly(f).evaluate(generator_values(pt, frame, chart))


def affine_element(pt: GroupPoint, frame: Frame) -> AffinePoincareElement:
    """The matrix-chart image (Lambda, v) of a point of a^0 x A."""
    vals = generator_values(pt, frame, chart="matrix")
    size = len(frame.rho)
    v = np.array([vals[translation(a)] for a in range(size)])
    L = np.array([[vals[matrix_element(a, b)] for b in range(size)] for a in range(size)])
    return AffinePoincareElement(L, v)


def ktilde_function(phi, frame: Frame) -> PolyFunction:
    """k~_phi written in the translation generators."""
    c = frame.rho_signs * (frame.rho @ frame.space.k_gram_inverse @ np.asarray(phi))
    return sum((PolyFunction.gen(translation(a), c[a]) for a in range(len(c))), PolyFunction())


def ktilde_pair_function(phi, psi, frame: Frame) -> PolyFunction:
    """k~_{phi psi} written in the matrix-element generators."""
    Kinv = frame.space.k_gram_inverse
    cp = frame.rho_signs * (frame.rho @ Kinv @ np.asarray(phi))
    cq = frame.rho_signs * (frame.rho @ Kinv @ np.asarray(psi))
    out = PolyFunction()
    for a, b in itertools.product(range(len(cp)), repeat=2):
        out = out + PolyFunction.gen(matrix_element(a, b), cp[a] * cq[b])
    return out


# -- the geometric bracket ----------------------------------------------------

def _matrix_entry(gen: Generator, size: int) -> tuple[int, int]:
    # v_a sits in the last column of the affine matrix
    if gen.kind == TRANSLATION:
        return (gen.indices[0], size)
    return gen.indices


def bracket_geometric(x: Generator, y: Generator, element: AffinePoincareElement,
                      b, alg=None) -> float:
    """{x, y} at ``element`` for the Poisson-Lie bivector b g - g b of the Poincare group.

    ``b`` is a bivector over iso(eta) of dimension ``element.size``.
    """
    from .schouten import IGElement, IsoAlgebra, pl_bivector

    size = element.size
    if alg is None:
        alg = IsoAlgebra(QuadraticSpace.from_signature([1] + [-1] * (size - 1)))
    T = pl_bivector(alg, b, IGElement(np.asarray(element.v), np.asarray(element.Lambda)))
    return float(T[_matrix_entry(x, size) + _matrix_entry(y, size)])


# -- random points -------------------------------------------------------------

def random_point(frame: Frame, rng: np.random.Generator) -> GroupPoint:
    from .groups import random_a

    coords = rng.uniform(-1, 1, len(frame.rho))
    return GroupPoint(frame.from_rho_coords(coords), random_a(frame, rng))


# -- expansion of k~_phi over left-invariant sections -------------------

def section_expansion_check(phi, pt: GroupPoint, frame: Frame) -> tuple[float, float]:
    """Both sides of k~_phi = sum_a sgn(rho_a) k~_{phi rho_a} X~_{c_a} at pt.

    The right side evaluates X~_{c_a}(psi, a) = <psi, ad(a) c_a>.
    """
    from .lorentz import ad

    sp = frame.space
    psi, a = np.asarray(pt.phi), pt.a
    lhs = form_k_tilde(sp, phi, psi)
    rhs = 0.0
    for alpha, r in enumerate(frame.rho):
        k_phi_rho = form_k_tilde(sp, phi, ad_sharp(sp, a.g, r))
        x_c = float(psi @ sp.so_coords(ad(sp, a.g, frame.c_generator(alpha))))
        rhs += frame.rho_signs[alpha] * k_phi_rho * x_c
    return lhs, rhs


# -- Jacobi --------------------------------------------------------------------

def jacobiator(f, g, h, bracket: Callable[[PolyFunction, PolyFunction], PolyFunction]) -> PolyFunction:
    """{f,{g,h}} + {g,{h,f}} + {h,{f,g}}."""
    return bracket(f, bracket(g, h)) + bracket(g, bracket(h, f)) + bracket(h, bracket(f, g))


# -- h matching ---------------------------------------------------------------

class HMatch(NamedTuple):
    h: float
    residual: float
    residual_plus_one: float


def match_h(frame: Frame, points, pairs=None, abort_tol: float = 1e-8) -> HMatch:
    """Least-squares h for which the matrix-chart bracket reproduces the structural one.

    ``residual`` is the largest pointwise mismatch at the fitted h;
    ``residual_plus_one`` is the mismatch at h = +1 (a negative control).
    """
    size = len(frame.rho)
    gens = all_generators(size)
    if pairs is None:
        pairs = list(itertools.combinations(gens, 2))
    structural = []
    unit = []
    for x, y in pairs:
        s = to_matrix_chart(bracket_structural(PolyFunction.gen(x), PolyFunction.gen(y), frame),
                            frame)
        # generators carry the same label in both charts; convert the inputs too
        sx = to_matrix_chart(PolyFunction.gen(x), frame)
        sy = to_matrix_chart(PolyFunction.gen(y), frame)
        z = bracket_zakrzewski(sx, sy, 1.0)
        structural.append(s)
        unit.append(z)
    S, Z = [], []
    for pt in points:
        vals = generator_values(pt, frame, chart="matrix")
        S.extend(p.evaluate(vals) for p in structural)
        Z.extend(p.evaluate(vals) for p in unit)
    S, Z = np.array(S), np.array(Z)
    denom = float(Z @ Z)
    if denom == 0.0:
        raise RuntimeError("matrix-chart bracket vanishes on every sample; h undetermined")
    h = float(S @ Z) / denom
    residual = float(np.max(np.abs(S - h * Z)))
    if residual > abort_tol:
        raise RuntimeError(f"no h reproduces the structural bracket (residual {residual:.3e})")
    return HMatch(h, residual, float(np.max(np.abs(S - Z))))
