"""Closed-form matrix elements between internal Gaussian terms.

Basis functions are exp(-1/2 x^T A x) over the (N-1) orthonormal internal
3D coordinates, in oscillator units.  With C = A + B the elements are

    overlap   (2 pi)^{3(N-1)/2} det(C)^{-3/2}
    kinetic   (3/2) overlap Tr(A C^-1 B)
    trap      (3/2) overlap Tr(C^-1)
    gaussian  V0 overlap (1 + 2 c lam)^{-3/2},      lam = w^T C^-1 w
    contact   g  overlap (2 pi lam)^{-3/2}

All element routines are batched over a stack of bra forms.  A factorised
Gauss-Hermite quadrature oracle validates the closed forms for small N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgbasis import InternalFrame, SymmetrisedOrbit


@dataclass(frozen=True)
class GaussianPairModel:
    """Gaussian pair potential in oscillator units: V0 exp(-c r^2)."""
    v0: float   # depth, units of hbar*omega
    c: float    # inverse squared range, units of 1/b_t^2


@dataclass(frozen=True)
class ContactPairModel:
    """Zero-range pseudopotential; strength = 4 pi a / b_t in oscillator units.

    Only meaningful on the uncorrelated (hyper-radial) functional space.
    """
    strength: float


PotentialModel = GaussianPairModel | ContactPairModel | None


@dataclass(frozen=True)
class ElementBlock:
    overlap: np.ndarray
    kinetic: np.ndarray
    trap: np.ndarray
    potential: np.ndarray

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.kinetic + self.trap + self.potential


def block_elements(bra_forms: np.ndarray, ket_form: np.ndarray,
                   pair_vecs: np.ndarray | None = None,
                   potential: PotentialModel = None) -> ElementBlock:
    """All operator elements between a stack of bras and one ket.

    bra_forms: (M, n, n); ket_form: (n, n); pair_vecs: (P, n) pair vectors
    entering the potential sum over all particle pairs.
    """
    bra = np.asarray(bra_forms)
    if bra.ndim == 2:
        bra = bra[None]
    n = bra.shape[-1]
    c = bra + ket_form[None]
    chol = np.linalg.cholesky(c)
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    ov = np.exp(1.5 * n * np.log(2.0 * np.pi) - 1.5 * logdet)

    cinv_b = np.linalg.solve(c, np.broadcast_to(ket_form, c.shape))
    kin = 1.5 * ov * np.einsum("mij,mji->m", bra, cinv_b)

    cinv = np.linalg.solve(c, np.broadcast_to(np.eye(n), c.shape))
    trp = 1.5 * ov * np.einsum("mii->m", cinv)

    if potential is None or pair_vecs is None:
        pot = np.zeros_like(ov)
    else:
        x = np.linalg.solve(c, np.broadcast_to(pair_vecs.T, (c.shape[0], n, len(pair_vecs))))
        lam = np.einsum("pn,mnp->mp", pair_vecs, x)
        if isinstance(potential, GaussianPairModel):
            pot = potential.v0 * ov * np.sum(
                (1.0 + 2.0 * potential.c * lam) ** -1.5, axis=-1)
        elif isinstance(potential, ContactPairModel):
            pot = potential.strength * ov * np.sum(
                (2.0 * np.pi * lam) ** -1.5, axis=-1)
        else:
            raise TypeError(f"unknown potential model {potential!r}")
    return ElementBlock(overlap=ov, kinetic=kin, trap=trp, potential=pot)


# scalar convenience wrappers ------------------------------------------------

def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(block_elements(a[None], b).overlap[0])


def kinetic(a: np.ndarray, b: np.ndarray) -> float:
    return float(block_elements(a[None], b).kinetic[0])


def trap(a: np.ndarray, b: np.ndarray) -> float:
    return float(block_elements(a[None], b).trap[0])


def gaussian_pair(a: np.ndarray, b: np.ndarray, w: np.ndarray,
                  v0: float, c: float) -> float:
    blk = block_elements(a[None], b, w[None], GaussianPairModel(v0, c))
    return float(blk.potential[0])


def contact_pair(a: np.ndarray, b: np.ndarray, w: np.ndarray,
                 strength: float) -> float:
    blk = block_elements(a[None], b, w[None], ContactPairModel(strength))
    return float(blk.potential[0])


# assembly -------------------------------------------------------------------

def symmetrised_column(bra_forms: np.ndarray, orbit: SymmetrisedOrbit,
                       pair_vecs: np.ndarray,
                       potential: PotentialModel,
                       bra_weights: np.ndarray | None = None
                       ) -> tuple[np.ndarray, np.ndarray]:
    """(H column, S column) of one symmetrised ket orbit sum.

    Against a permutation-invariant ket the whole bra orbit collapses to
    its canonical representative times the orbit's total weight, so with
    ``bra_weights`` (one total weight per bra orbit) the column equals
    the matrix elements between the full orbit sums on both sides.  The
    weights matter whenever orbits of different families (and therefore
    different orbit sizes) share one basis.
    """
    h = None
    s = None
    for form, weight in orbit.reduced:
        blk = block_elements(bra_forms, form, pair_vecs, potential)
        contrib_h = weight * blk.hamiltonian
        contrib_s = weight * blk.overlap
        h = contrib_h if h is None else h + contrib_h
        s = contrib_s if s is None else s + contrib_s
    if bra_weights is not None:
        h = h * bra_weights
        s = s * bra_weights
    return h, s


def assemble(basis: list[SymmetrisedOrbit], potential: PotentialModel,
             frame: InternalFrame, reduce_classes: bool = True
             ) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian and overlap matrices over symmetrised basis functions.

    Matrix elements are between full orbit sums (every exchange image with
    its multiplicity), so mixed-family bases assemble consistently.
    Internal energies only; the centre-of-mass ground state adds an exact
    3/2 downstream.  With reduce_classes=False the bra orbit is enumerated
    in full as well (brute force).
    """
    if isinstance(potential, ContactPairModel):
        from .cgbasis import HyperRadialTerm
        if any(not isinstance(o.source, HyperRadialTerm) for o in basis):
            raise ValueError("zero-range model requires the hyper-radial "
                             "(uncorrelated) basis family")
    k = len(basis)
    pair_vecs = frame.pair_vectors()
    h = np.empty((k, k))
    s = np.empty((k, k))
    bra_stack = np.array([o.canonical for o in basis])
    weights = np.array([float(o.total_weight) for o in basis])
    for l, orbit in enumerate(basis):
        if reduce_classes:
            hcol, scol = symmetrised_column(bra_stack[:l + 1], orbit,
                                            pair_vecs, potential,
                                            weights[:l + 1])
        else:
            # brute force: enumerate the bra orbit too
            for kk in range(l + 1):
                acc_h = 0.0
                acc_s = 0.0
                for aform, aw in basis[kk].terms:
                    for bform, bw in orbit.terms:
                        blk = block_elements(aform[None], bform, pair_vecs,
                                             potential)
                        acc_h += aw * bw * blk.hamiltonian[0]
                        acc_s += aw * bw * blk.overlap[0]
                h[kk, l] = h[l, kk] = acc_h
                s[kk, l] = s[l, kk] = acc_s
            continue
        h[: l + 1, l] = hcol
        h[l, : l + 1] = hcol
        s[: l + 1, l] = scol
        s[l, : l + 1] = scol
    if not np.all(np.isfinite(h)) or not np.all(np.isfinite(s)):
        raise FloatingPointError("non-finite matrix element in assembly")
    return h, s


# quadrature oracle ----------------------------------------------------------

def quadrature_oracle(a: np.ndarray, b: np.ndarray, kind: str,
                      w: np.ndarray | None = None, v0: float = 1.0,
                      c: float = 1.0, order: int = 40) -> float:
    """Gauss-Hermite evaluation of the defining integrals, for tests only.

    The integrand factorises over the three Cartesian directions, so an
    (N-1)-dimensional tensor-product rule per direction suffices.  Kinetic
    energy uses the first-derivative (gradient dot gradient) form, which is
    independent of the trace identity used by the closed form.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    n = a.shape[0]
    if n > 3:
        raise ValueError("quadrature oracle restricted to N <= 4 particles")
    cc = a + b
    chol = np.linalg.cholesky(cc)
    m = np.linalg.inv(chol).T           # x = m y maps C to the identity
    detfac = 1.0 / np.prod(np.diag(chol))
    t, wt = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([t] * n), indexing="ij")
    y = np.stack([g.ravel() for g in grids]) * np.sqrt(2.0)   # (n, P)
    wts = np.ones(y.shape[1])
    for g in np.meshgrid(*([wt] * n), indexing="ij"):
        wts = wts * g.ravel()
    wts = wts * 2 ** (n / 2.0) * detfac
    v = m @ y                            # points in the original coordinates

    def integral(values: np.ndarray) -> float:
        return float(np.sum(wts * values))

    j0 = integral(np.ones(v.shape[1]))
    if kind == "overlap":
        return j0 ** 3
    if kind == "trap":
        return 3.0 * j0 ** 2 * integral(0.5 * np.sum(v * v, axis=0))
    if kind == "kinetic":
        av = a @ v
        bv = b @ v
        return 1.5 * j0 ** 2 * integral(np.sum(av * bv, axis=0))
    if kind == "gaussian_pair":
        assert w is not None
        u = w @ v
        return v0 * integral(np.exp(-c * u * u)) ** 3
    raise ValueError(f"unknown oracle kind {kind!r}")
