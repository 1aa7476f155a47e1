"""s-wave two-body physics of the attractive Gaussian well.

Works directly in atomic units.  The radial equation for the relative
motion, u'' = 2*mu*(V(r) - E)*u with u(0) = 0, is propagated with a
fixed-step Numerov scheme.  Provides the scattering length, effective
range, bound-state census, and inverse tuning of the well depth to a
target scattering length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

# Results of the asymptotic fit at r_match in {20b, 40b, 80b} must agree
# to this relative tolerance, otherwise the integration is inconsistent.
MATCH_SWEEP_RTOL = 1e-6
# |a| beyond this multiple of the integration range is treated as a pole
# (two-body bound state exactly at threshold).
POLE_FACTOR = 1e9


class ScatteringError(RuntimeError):
    """Asymptotic matching failed to converge."""


@dataclass(frozen=True)
class GaussianPotential:
    """Attractive Gaussian well V(r) = V0 * exp(-r^2/b^2), atomic units."""

    V0: float   # depth, negative for attraction
    b: float    # range

    def __post_init__(self) -> None:
        if self.b <= 0:
            raise ValueError(f"range must be positive, got b={self.b}")

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.V0 * np.exp(-((r / self.b) ** 2))


@dataclass(frozen=True)
class ScatteringSummary:
    scattering_length: float
    effective_range: float
    n_bound: int
    bound_energies: list[float] = field(default_factory=list)
    phase_shift_samples: list[tuple[float, float]] = field(default_factory=list)

    @property
    def physical_regime(self) -> bool:
        """True when the well holds exactly one dimer and a > 0."""
        return self.n_bound == 1 and self.scattering_length > 0


def _numerov(f: np.ndarray, h: float, u0: float, u1: float) -> np.ndarray:
    """Propagate u'' = f(r) u on a uniform grid with Numerov's method."""
    n = f.size
    u = np.empty(n)
    u[0] = u0
    u[1] = u1
    g = 1.0 - (h * h / 12.0) * f
    d = 2.0 + (5.0 * h * h / 6.0) * f
    # local names for the hot loop
    uu, gg, dd = u, g, d
    for i in range(1, n - 1):
        uu[i + 1] = (dd[i] * uu[i] - gg[i - 1] * uu[i - 1]) / gg[i + 1]
    return u


def _zero_energy_solution(pot: GaussianPotential, mu: float, r_max: float,
                          step_div: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Outward zero-energy solution (r grid, u) with u(0)=0, u'(0)=1."""
    h = pot.b / step_div
    n = int(round(r_max / h))
    r = np.arange(n + 1) * h
    f = 2.0 * mu * pot(r)
    u = _numerov(f, h, 0.0, h)
    return r, u


def _fit_intercept(r: np.ndarray, u: np.ndarray, h: float) -> float:
    """Intercept a of the asymptotic line u = c*(r - a) from the last points."""
    # beyond the well u is exactly linear, so two points suffice
    slope = (u[-1] - u[-2]) / h
    if slope == 0.0:
        return math.inf
    return r[-1] - u[-1] / slope


def scattering_length(pot: GaussianPotential, mu: float,
                      step_div: int = 200) -> float:
    """Zero-energy scattering length of the Gaussian well.

    A dimer exactly at threshold gives a signed infinity, not an exception.
    """
    if pot.V0 == 0.0:
        return 0.0
    fits = []
    for mult in (20, 40, 80):
        r, u = _zero_energy_solution(pot, mu, mult * pot.b, step_div)
        fits.append(_fit_intercept(r, u, r[1] - r[0]))
    a = fits[-1]
    scale = max(abs(v) for v in fits)
    if scale > POLE_FACTOR * pot.b:
        return math.copysign(math.inf, a)
    spread = max(fits) - min(fits)
    if spread > MATCH_SWEEP_RTOL * max(scale, pot.b):
        raise ScatteringError(
            f"r_match sweep disagreement {spread:.3e} for fits {fits}")
    return a


def phase_shift(pot: GaussianPotential, mu: float, k: float,
                step_div: int = 200) -> float:
    """s-wave phase shift at relative momentum k (E = k^2/(2*mu))."""
    h = pot.b / step_div
    r_m = 20.0 * pot.b
    n = int(round((r_m + pot.b) / h))
    r = np.arange(n + 1) * h
    f = 2.0 * mu * pot(r) - k * k
    u = _numerov(f, h, 0.0, h)
    # match u = A sin(kr) + B cos(kr) at two points beyond the well
    i1 = int(round(r_m / h))
    i2 = n
    r1, r2 = r[i1], r[i2]
    m = np.array([[math.sin(k * r1), math.cos(k * r1)],
                  [math.sin(k * r2), math.cos(k * r2)]])
    A, B = np.linalg.solve(m, [u[i1], u[i2]])
    return math.atan2(B, A)


def effective_range(pot: GaussianPotential, mu: float,
                    k_window: tuple[float, ...] = (0.02, 0.04, 0.06, 0.08),
                    ) -> float:
    """Effective range from a quadratic fit of k*cot(delta) against k^2.

    The fit window k*b in (0, 0.1) stays inside the radius of convergence
    of the effective-range expansion.
    """
    a = scattering_length(pot, mu)
    if a == 0.0:
        raise ValueError("scattering length is zero; effective range undefined")
    ks = np.array(k_window) / pot.b
    kcot = np.array([k / math.tan(phase_shift(pot, mu, k)) for k in ks])
    coeffs = np.polyfit(ks**2, kcot, 1)   # kcot = -1/a + (r_e/2) k^2
    return 2.0 * coeffs[0]


def phase_shift_samples(pot: GaussianPotential, mu: float,
                        k_window: tuple[float, ...] = (0.02, 0.04, 0.06, 0.08),
                        ) -> list[tuple[float, float]]:
    return [(k / pot.b, phase_shift(pot, mu, k / pot.b)) for k in k_window]


def _count_zero_energy_nodes(pot: GaussianPotential, mu: float) -> int:
    """Bound-state count via nodes of the zero-energy solution (Levinson)."""
    r, u = _zero_energy_solution(pot, mu, 20.0 * pot.b)
    nodes = int(np.sum(np.diff(np.sign(u[1:])) != 0))
    a = _fit_intercept(r, u, r[1] - r[0])
    if a > r[-1]:   # the asymptotic line crosses zero beyond the grid
        nodes += 1
    return nodes


def bound_states(pot: GaussianPotential, mu: float,
                 step_div: int = 200) -> list[float]:
    """All negative-energy s-wave eigenvalues, ascending.

    Roots of the exponential-growth coefficient G(E) = u'(r_c) + kappa*u(r_c)
    are located by a logarithmic scan plus Brent refinement; the expected
    count comes from node counting of the zero-energy solution.
    """
    if pot.V0 == 0.0:
        return []
    n_expected = _count_zero_energy_nodes(pot, mu)
    if n_expected == 0:
        return []
    r_c = 8.0 * pot.b
    h = pot.b / step_div
    n = int(round(r_c / h))
    r = np.arange(n + 1) * h
    v2mu = 2.0 * mu * pot(r)

    def growth_coeff(E: float) -> float:
        kappa = math.sqrt(-2.0 * mu * E)
        f = v2mu - 2.0 * mu * E
        u = _numerov(f, h, 0.0, h)
        du = (u[-1] - u[-2]) / h  # upper-edge derivative, adequate for sign
        return du + kappa * u[-1]

    e_lo, e_hi = abs(pot.V0) * 1.5, 1e-22
    n_scan = 400
    for _ in range(4):
        es = -np.logspace(math.log10(e_lo), math.log10(e_hi), n_scan)
        gs = np.array([growth_coeff(e) for e in es])
        roots = []
        for i in range(n_scan - 1):
            if gs[i] == 0.0:
                roots.append(es[i])
            elif gs[i] * gs[i + 1] < 0:
                roots.append(brentq(growth_coeff, es[i], es[i + 1],
                                    xtol=1e-300, rtol=1e-14))
        if len(roots) >= n_expected:
            break
        n_scan *= 2   # shallow states need a finer scan near threshold
    energies = sorted(roots)[:n_expected] if len(roots) > n_expected else sorted(roots)
    return energies


def summarize(pot: GaussianPotential, mu: float) -> ScatteringSummary:
    a = scattering_length(pot, mu)
    r_e = effective_range(pot, mu) if a != 0.0 and math.isfinite(a) else math.nan
    energies = bound_states(pot, mu)
    return ScatteringSummary(
        scattering_length=a,
        effective_range=r_e,
        n_bound=len(energies),
        bound_energies=energies,
        phase_shift_samples=phase_shift_samples(pot, mu),
    )


def critical_depth(b: float, mu: float) -> float:
    """Depth V0 < 0 at which the first two-body bound state appears."""
    scale = 1.0 / (2.0 * mu * b * b)   # natural depth scale of the well
    lo, hi = -1e-6 * scale, -50.0 * scale
    f = lambda v: _count_zero_energy_nodes(GaussianPotential(v, b), mu)
    assert f(lo) == 0
    while f(hi) == 0:
        hi *= 4.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f(mid) == 0:
            lo = mid
        else:
            hi = mid
        if abs(hi - lo) < 1e-16 * abs(hi):
            break
    return hi


def tune_strength(b: float, target_a: float, mu: float,
                  rtol: float = 1e-8) -> GaussianPotential:
    """Find V0 < 0 with the requested scattering length and one bound state.

    Solves 1/a(V0) = 1/target_a on the branch between the first pole of
    a(V0) (dimer at threshold) and the depth where a crosses zero.
    """
    if target_a <= 0 or b <= 0:
        raise ValueError(
            f"target_a={target_a}, b={b}: only positive scattering lengths "
            "are reachable on the one-bound-state branch")
    v_c = critical_depth(b, mu)

    def inv_a(v: float) -> float:
        a = scattering_length(GaussianPotential(v, b), mu)
        return 0.0 if math.isinf(a) else 1.0 / a

    target = 1.0 / target_a
    # bracket: expand geometrically below the critical depth until 1/a
    # exceeds the target (1/a grows from 0 with increasing depth)
    lo = v_c * (1.0 + 1e-10)
    hi = lo
    for _ in range(200):
        hi = v_c + (hi - v_c) * 2.0
        val = inv_a(hi)
        if val < 0:   # overshot past a = 0 into the negative-a region
            hi = 0.5 * (hi + v_c)
            continue
        if val > target:
            break
    else:
        raise ValueError(f"target_a={target_a} unreachable on the "
                         "one-bound-state branch")
    v0 = brentq(lambda v: inv_a(v) - target, lo, hi, xtol=1e-30, rtol=1e-15)
    pot = GaussianPotential(v0, b)
    a = scattering_length(pot, mu)
    if abs(a - target_a) > rtol * target_a * 100:
        raise ScatteringError(
            f"tuning failed: requested a={target_a}, got {a}")
    return pot
