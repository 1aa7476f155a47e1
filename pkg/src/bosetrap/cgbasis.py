"""Correlated Gaussian basis families and their symmetrisation.

Three term families are supported, all expressed in oscillator units:

* fully correlated terms  exp(-1/2 sum_{i<j} a_ij (r_i - r_j)^2)
* pair-correlated terms   exp(-1/2 a rho_int^2 - 1/2 b (r_1 - r_2)^2)
* hyper-radial terms      exp(-1/2 a rho_int^2)

The centre of mass is removed by an orthonormal Jacobi frame; every basis
function is the internal Gaussian times the fixed centre-of-mass ground
state, which contributes an exact 3/2 to all reported energies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_FULL_ORBIT_N = 8   # factorial orbit guard for fully correlated terms


class NotPositiveDefiniteError(ValueError):
    def __init__(self, eigenvalue: float):
        super().__init__(f"internal quadratic form not positive definite "
                         f"(smallest eigenvalue {eigenvalue:.3e})")
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class InternalFrame:
    """Orthonormal internal (Jacobi) coordinates for N identical particles."""

    n_particles: int
    transform: np.ndarray   # (N-1, N), rows orthonormal and orthogonal to 1
    cm_row: np.ndarray      # normalised uniform vector, R = cm_row . r / sqrt(N)

    @property
    def n_internal(self) -> int:
        return self.n_particles - 1

    def pair_vector(self, i: int, j: int) -> np.ndarray:
        """w with r_i - r_j = w . x; |w|^2 = 2 for any pair."""
        return self.transform[:, i] - self.transform[:, j]

    def pair_vectors(self) -> np.ndarray:
        """(N(N-1)/2, N-1) array of pair vectors, pairs in lexicographic order."""
        n = self.n_particles
        return np.array([self.pair_vector(i, j)
                         for i, j in itertools.combinations(range(n), 2)])


@lru_cache(maxsize=None)
def make_frame(n_particles: int) -> InternalFrame:
    if n_particles < 2:
        raise ValueError("need at least two particles")
    n = n_particles
    u = np.zeros((n - 1, n))
    for k in range(1, n):
        u[k - 1, :k] = 1.0
        u[k - 1, k] = -k
        u[k - 1] /= math.sqrt(k * (k + 1))
    cm = np.full(n, 1.0 / math.sqrt(n))
    u.setflags(write=False)
    cm.setflags(write=False)
    return InternalFrame(n_particles=n, transform=u, cm_row=cm)


# --- term families -----------------------------------------------------------

@dataclass(frozen=True)
class FullCGTerm:
    """Pair coefficients a_ij as a symmetric NxN array with zero diagonal."""

    pair_coefficients: tuple   # nested tuple, hashable

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.pair_coefficients)

    @staticmethod
    def from_matrix(alpha: np.ndarray) -> "FullCGTerm":
        alpha = np.asarray(alpha, dtype=float)
        if not np.allclose(alpha, alpha.T) or np.any(np.diag(alpha) != 0):
            raise ValueError("pair coefficients must be symmetric with zero diagonal")
        if np.any(alpha < 0):
            raise ValueError("pair coefficients must be nonnegative")
        return FullCGTerm(tuple(map(tuple, alpha)))


@dataclass(frozen=True)
class PairCGTerm:
    """Hyper-radial strength alpha plus a correlation beta on pair (0, 1)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.alpha + 2.0 * self.beta <= 0:
            raise NotPositiveDefiniteError(min(self.alpha, self.alpha + 2 * self.beta))


@dataclass(frozen=True)
class HyperRadialTerm:
    alpha: float

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise NotPositiveDefiniteError(self.alpha)


BasisTerm = FullCGTerm | PairCGTerm | HyperRadialTerm


def internal_form(term: BasisTerm, frame: InternalFrame) -> np.ndarray:
    """(N-1)x(N-1) positive-definite matrix A of the internal exponent."""
    n1 = frame.n_internal
    if isinstance(term, HyperRadialTerm):
        return term.alpha * np.eye(n1)
    if isinstance(term, PairCGTerm):
        w = frame.pair_vector(0, 1)
        return term.alpha * np.eye(n1) + term.beta * np.outer(w, w)
    alpha = term.matrix
    if alpha.shape != (frame.n_particles,) * 2:
        raise ValueError("pair-coefficient array does not match particle count")
    lap = np.diag(alpha.sum(axis=1)) - alpha   # sum_{i<j} a_ij (r_i-r_j)^2
    a = frame.transform @ lap @ frame.transform.T
    a = 0.5 * (a + a.T)
    lo = float(np.linalg.eigvalsh(a)[0])
    if lo <= 0:
        raise NotPositiveDefiniteError(lo)
    return a


def _pair_form(alpha: float, beta: float, pair: tuple[int, int],
               frame: InternalFrame) -> np.ndarray:
    w = frame.pair_vector(*pair)
    return alpha * np.eye(frame.n_internal) + beta * np.outer(w, w)


@dataclass(frozen=True)
class SymmetrisedOrbit:
    """Weighted unsymmetrised Gaussian terms generated by particle exchange.

    ``terms`` is the full orbit; ``reduced`` is the equivalence-class list
    valid when the bra is fixed to ``canonical``, which is how symmetric
    matrix elements are assembled.  Weight sums match between the two.
    """

    source: BasisTerm
    canonical: np.ndarray                       # internal form of the bra representative
    terms: list[tuple[np.ndarray, int]]         # (internal form, weight)
    reduced: list[tuple[np.ndarray, int]]       # class representatives vs canonical bra
    provenance: list[str]

    @property
    def total_weight(self) -> int:
        return sum(w for _, w in self.terms)


def pair_class_counts(n: int) -> tuple[int, int, int]:
    """Multiplicities of ket pairs vs a fixed bra pair: same / share-one / disjoint."""
    return 1, 2 * (n - 2), (n - 2) * (n - 3) // 2


def symmetrise(term: BasisTerm, frame: InternalFrame) -> SymmetrisedOrbit:
    n = frame.n_particles
    if isinstance(term, HyperRadialTerm):
        form = internal_form(term, frame)
        one = [(form, 1)]
        return SymmetrisedOrbit(term, form, one, one, ["totally symmetric"])

    if isinstance(term, PairCGTerm):
        pairs = list(itertools.combinations(range(n), 2))
        terms = [(_pair_form(term.alpha, term.beta, p, frame), 1) for p in pairs]
        canonical = terms[0][0]
        w_same, w_share, w_disj = pair_class_counts(n)
        reduced = [(canonical, w_same)]
        prov = [f"pair {p}" for p in pairs]
        if n >= 3:
            reduced.append((_pair_form(term.alpha, term.beta, (0, 2), frame), w_share))
        if n >= 4:
            reduced.append((_pair_form(term.alpha, term.beta, (2, 3), frame), w_disj))
        return SymmetrisedOrbit(term, canonical, terms, reduced, prov)

    alpha = term.matrix
    off = alpha[~np.eye(n, dtype=bool)]
    if np.all(off == off[0]):
        # equal pair coefficients: already exchange symmetric, trivial
        # orbit at any N (same convention as the hyper-radial branch)
        form = internal_form(term, frame)
        one = [(form, 1)]
        return SymmetrisedOrbit(term, form, one, one, ["totally symmetric"])
    if n > MAX_FULL_ORBIT_N:
        raise ValueError(f"full-term orbit of {n}! permutations refused (N > "
                         f"{MAX_FULL_ORBIT_N})")
    seen: dict[tuple, int] = {}
    reps: dict[tuple, np.ndarray] = {}
    prov: dict[tuple, str] = {}
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        permuted = alpha[np.ix_(p, p)]
        key = tuple(map(tuple, permuted))
        seen[key] = seen.get(key, 0) + 1
        if key not in reps:
            reps[key] = permuted
            prov[key] = f"permutation {perm}"
    terms = [(internal_form(FullCGTerm.from_matrix(reps[k]), frame), w)
             for k, w in seen.items()]
    canonical = internal_form(term, frame)
    return SymmetrisedOrbit(term, canonical, terms, terms, list(prov.values()))
