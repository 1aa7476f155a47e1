"""Generalized symmetric eigenproblem with conditioning control.

Solves H c = E S c by canonical orthogonalisation of the overlap matrix
and classifies the spectrum: self-bound negative-energy states below the
quasi-continuum, and the BEC state as the lowest positive-energy state.
Reported energies include the exact 3/2 centre-of-mass ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

CM_ENERGY = 1.5
# states with |E| below this are classified as positive (threshold tie-break)
ZERO_ENERGY_TOL = 1e-8
DEFAULT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SpectrumResult:
    energies: np.ndarray       # ascending, hbar*omega, CM-inclusive
    coefficients: np.ndarray   # (K, n_states), columns normalised c^T S c = 1
    n_negative: int
    bec_index: int
    retained_dim: int

    @property
    def bec_energy(self) -> float:
        if self.bec_index >= len(self.energies):
            return np.nan
        return float(self.energies[self.bec_index])


def generalized_eig(h: np.ndarray, s: np.ndarray,
                    threshold: float = DEFAULT_THRESHOLD) -> SpectrumResult:
    """Canonical-orthogonalisation solve of H c = E S c.

    The basis is first rescaled to unit overlap diagonal so the relative
    eigenvalue threshold is meaningful for terms of vastly different
    spatial extent; coefficients are returned in the original convention.
    """
    h = np.asarray(h, float)
    s = np.asarray(s, float)
    if h.shape != s.shape or h.shape[0] != h.shape[1]:
        raise ValueError("H and S must be square and of equal dimension")
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(s))):
        raise ValueError("non-finite input matrix")
    diag = np.diag(s)
    if np.any(diag <= 0):
        raise ValueError("overlap diagonal must be positive")
    d = 1.0 / np.sqrt(diag)
    hn = h * d[:, None] * d[None, :]
    sn = s * d[:, None] * d[None, :]
    sval, svec = scipy.linalg.eigh(sn)
    keep = sval > threshold * sval[-1]
    if not np.any(keep):
        raise ValueError("empty retained subspace after conditioning")
    x = svec[:, keep] / np.sqrt(sval[keep])
    ht = x.T @ hn @ x
    energies, y = scipy.linalg.eigh(0.5 * (ht + ht.T))
    coeff = d[:, None] * (x @ y)
    energies = energies + CM_ENERGY
    n_negative = int(np.sum(energies < -ZERO_ENERGY_TOL))
    return SpectrumResult(
        energies=energies,
        coefficients=coeff,
        n_negative=n_negative,
        bec_index=n_negative,
        retained_dim=int(np.sum(keep)),
    )


def classify_bec(result: SpectrumResult) -> tuple[int, np.ndarray]:
    """BEC-state index plus the level spacings above it.

    The spacings should be of order hbar*omega once the quasi-continuum is
    resolved; an all-negative spectrum means the basis has not found any
    trap-scale state yet.
    """
    if result.bec_index >= len(result.energies):
        raise ValueError("no positive-energy state in the spectrum (no BEC state)")
    spacings = np.diff(result.energies[result.bec_index:])
    return result.bec_index, spacings
