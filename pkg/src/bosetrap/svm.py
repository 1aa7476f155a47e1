"""Stochastic variational basis growth with checkpointing.

The basis is grown one symmetrised Gaussian at a time: each step draws M
candidate nonlinear parameters, scores every candidate by bordering the
(H, S) matrices and re-solving the generalized eigenproblem, and keeps the
best.  Candidates are ordered lexicographically: more discovered
negative-energy states first, then lower energy of the lowest positive
state.  The whole trajectory is deterministic for a given seed; per-trial
RNG streams are derived from (seed, step, trial) so that concurrent trial
evaluation cannot change the result.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import cgbasis, matelem
from .cgbasis import (BasisTerm, FullCGTerm, HyperRadialTerm, PairCGTerm,
                      SymmetrisedOrbit, make_frame)
from .eigensolve import SpectrumResult, generalized_eig
from .matelem import ContactPairModel, GaussianPairModel, PotentialModel

CHECKPOINT_SCHEMA = "bosetrap/checkpoint/1"
FAMILIES = ("full", "pair", "hyperradial")
MAX_RESAMPLE = 1000
MAX_NULL_STEPS = 50


@dataclass(frozen=True)
class SvmConfig:
    basis_family: str = "pair"
    k_max: int = 600
    trials: int = 50                 # competing candidates per growth step
    d_min: float = 5.045e-4          # sampled length scales, oscillator units
    d_max: float = 1.0               # default range covers b .. b_t
    beta_allow_negative: bool = True
    seed: int = 1
    energy_tol: float = 1e-4         # BEC-energy convergence window, hbar*omega
    window: int = 50
    threshold: float = 1e-12         # overlap conditioning threshold
    refine_passes: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.basis_family not in FAMILIES:
            raise ValueError(f"basis_family must be one of {FAMILIES}")
        if not (0 < self.d_min <= self.d_max):
            raise ValueError("need 0 < d_min <= d_max")
        if self.trials < 1 or self.k_max < 1:
            raise ValueError("trials and k_max must be >= 1")


@dataclass
class SvmResult:
    spectrum: SpectrumResult
    converged: bool
    history: list[tuple[float | None, int]]
    state: "SvmState"


@dataclass
class SvmState:
    config: SvmConfig
    n_particles: int
    potential: PotentialModel
    frame: cgbasis.InternalFrame
    terms: list[BasisTerm] = field(default_factory=list)
    orbits: list[SymmetrisedOrbit] = field(default_factory=list)
    history: list[tuple[float | None, int]] = field(default_factory=list)
    spectrum: SpectrumResult | None = None

    def __post_init__(self) -> None:
        n1 = self.frame.n_internal
        self.forms = np.zeros((0, n1, n1))
        self.h = np.zeros((0, 0))
        self.s = np.zeros((0, 0))
        self.pair_vecs = self.frame.pair_vectors()

    @property
    def size(self) -> int:
        return len(self.terms)

    def append(self, term: BasisTerm, orbit: SymmetrisedOrbit,
               hcol: np.ndarray, scol: np.ndarray,
               spectrum: SpectrumResult) -> None:
        k = self.size
        self.terms.append(term)
        self.orbits.append(orbit)
        self.forms = np.concatenate([self.forms, orbit.canonical[None]])
        h = np.empty((k + 1, k + 1))
        s = np.empty((k + 1, k + 1))
        h[:k, :k] = self.h
        s[:k, :k] = self.s
        h[:, k] = hcol
        h[k, :] = hcol
        s[:, k] = scol
        s[k, :] = scol
        self.h, self.s = h, s
        self.spectrum = spectrum


def trial_rng(seed: int, step: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(step, trial)))


def sample_candidate(rng: np.random.Generator, config: SvmConfig,
                     n_particles: int) -> BasisTerm:
    """Draw one basis term: widths d log-uniform in [d_min, d_max]."""
    lo, hi = math.log(config.d_min), math.log(config.d_max)

    def strength() -> float:
        return math.exp(-2.0 * rng.uniform(lo, hi))   # 1/d^2

    if config.basis_family == "hyperradial":
        return HyperRadialTerm(strength())
    if config.basis_family == "pair":
        for _ in range(MAX_RESAMPLE):
            alpha = strength()
            beta = strength()
            if config.beta_allow_negative and rng.random() < 0.5:
                beta = -beta
            if alpha + 2.0 * beta > 0:
                return PairCGTerm(alpha, beta)
        raise RuntimeError("candidate rejection loop exceeded "
                           f"{MAX_RESAMPLE} resamples")
    n = n_particles
    alpha = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            alpha[i, j] = alpha[j, i] = math.exp(-2.0 * rng.uniform(lo, hi))
    return FullCGTerm.from_matrix(alpha)


MUTATION_JITTER = 0.5   # log-scale width of local coordinate moves


def mutate_candidate(rng: np.random.Generator, config: SvmConfig,
                     term: BasisTerm, n_particles: int) -> BasisTerm:
    """Change a single nonlinear parameter of an existing term.

    Coordinate-wise moves let refinement walk a term toward structured
    parameter sets (for instance one tight pair among loose ones) that
    independent resampling of every parameter almost never produces.
    Each move either redraws the parameter from the global distribution
    (exploration) or jitters it on the log scale (local descent).
    """
    lo, hi = math.log(config.d_min), math.log(config.d_max)
    a_min, a_max = math.exp(-2.0 * hi), math.exp(-2.0 * lo)

    def moved(old: float) -> float:
        if rng.random() < 0.5:
            return math.exp(-2.0 * rng.uniform(lo, hi))
        jittered = abs(old) * math.exp(MUTATION_JITTER * rng.normal())
        return min(max(jittered, a_min), a_max)

    if isinstance(term, HyperRadialTerm):
        return HyperRadialTerm(moved(term.alpha))
    if isinstance(term, PairCGTerm):
        if rng.random() < 0.5:
            for _ in range(MAX_RESAMPLE):
                alpha = moved(term.alpha)
                if alpha + 2.0 * term.beta > 0:
                    return PairCGTerm(alpha, term.beta)
            return PairCGTerm(moved(term.alpha), abs(term.beta))
        for _ in range(MAX_RESAMPLE):
            beta = moved(abs(term.beta))
            if config.beta_allow_negative and rng.random() < 0.5:
                beta = -beta
            if term.alpha + 2.0 * beta > 0:
                return PairCGTerm(term.alpha, beta)
        return PairCGTerm(term.alpha, moved(abs(term.beta)))
    n = n_particles
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    i, j = pairs[rng.integers(len(pairs))]
    alpha = term.matrix.copy()
    alpha[i, j] = alpha[j, i] = moved(alpha[i, j])
    return FullCGTerm.from_matrix(alpha)


def objective_key(spectrum: SpectrumResult) -> tuple[int, float]:
    """Lexicographic score: discover negative states, then lower BEC energy."""
    e = spectrum.bec_energy
    return (-spectrum.n_negative, e if math.isfinite(e) else math.inf)


@dataclass
class _Trial:
    term: BasisTerm
    orbit: SymmetrisedOrbit
    hcol: np.ndarray
    scol: np.ndarray
    spectrum: SpectrumResult
    key: tuple[int, float]


def _evaluate(state: SvmState, term: BasisTerm) -> _Trial | None:
    try:
        orbit = cgbasis.symmetrise(term, state.frame)
        bras = np.concatenate([state.forms, orbit.canonical[None]])
        weights = np.array([float(o.total_weight)
                            for o in state.orbits] + [float(orbit.total_weight)])
        hcol, scol = matelem.symmetrised_column(
            bras, orbit, state.pair_vecs, state.potential, weights)
        if not (np.all(np.isfinite(hcol)) and np.all(np.isfinite(scol))
                and scol[-1] > 0):
            return None
        k = state.size
        h = np.empty((k + 1, k + 1))
        s = np.empty((k + 1, k + 1))
        h[:k, :k] = state.h
        s[:k, :k] = state.s
        h[:, k] = hcol
        h[k, :] = hcol
        s[:, k] = scol
        s[k, :] = scol
        spectrum = generalized_eig(h, s, state.config.threshold)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError,
            cgbasis.NotPositiveDefiniteError):
        return None
    return _Trial(term, orbit, hcol, scol, spectrum, objective_key(spectrum))


def grow_step(state: SvmState, step: int) -> bool:
    """One competitive growth step; returns False if all trials failed."""
    cfg = state.config
    candidates = [sample_candidate(trial_rng(cfg.seed, step, t), cfg,
                                   state.n_particles)
                  for t in range(cfg.trials)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            trials = list(pool.map(lambda c: _evaluate(state, c), candidates))
    else:
        trials = [_evaluate(state, c) for c in candidates]
    best = None
    for tr in trials:             # ties broken by lowest trial index
        if tr is not None and (best is None or tr.key < best.key):
            best = tr
    if best is None:
        state.history.append((None, state.spectrum.n_negative
                              if state.spectrum else 0))
        return False
    state.append(best.term, best.orbit, best.hcol, best.scol, best.spectrum)
    e = best.spectrum.bec_energy
    state.history.append((e if math.isfinite(e) else None,
                          best.spectrum.n_negative))
    return True


def _converged(state: SvmState) -> bool:
    cfg = state.config
    if len(state.history) < cfg.window:
        return False
    tail = state.history[-cfg.window:]
    energies = [e for e, _ in tail]
    counts = {n for _, n in tail}
    if any(e is None for e in energies) or len(counts) != 1:
        return False
    return max(energies) - min(energies) < cfg.energy_tol


def new_state(config: SvmConfig, n_particles: int,
              potential: PotentialModel) -> SvmState:
    return SvmState(config=config, n_particles=n_particles,
                    potential=potential, frame=make_frame(n_particles))


def run(config: SvmConfig, n_particles: int, potential: PotentialModel,
        checkpoint_path: str | None = None,
        resume: "SvmState | None" = None) -> SvmResult:
    """Grow the basis until the dual convergence criterion or K_max.

    Unconverged termination is a distinguished status, not an exception.
    """
    state = resume if resume is not None else new_state(
        config, n_particles, potential)
    nulls = 0
    while state.size < config.k_max:
        step = len(state.history)
        ok = grow_step(state, step)
        nulls = 0 if ok else nulls + 1
        if checkpoint_path:
            save_checkpoint(state, checkpoint_path)
        if _converged(state):
            break
        if nulls >= MAX_NULL_STEPS:
            break
    for _ in range(config.refine_passes):
        _refine_pass(state)
        if checkpoint_path:
            save_checkpoint(state, checkpoint_path)
    if state.spectrum is None:
        raise RuntimeError("no basis function was ever accepted")
    return SvmResult(spectrum=state.spectrum, converged=_converged(state),
                     history=list(state.history), state=state)


def _refine_pass(state: SvmState) -> None:
    """Try to replace each existing term by a better-scoring candidate.

    Candidates alternate between fresh samples and single-parameter
    mutations of the incumbent term, so a pass performs a stochastic
    coordinate descent over the nonlinear parameters.  Acceptance uses
    the same lexicographic objective as growth; for attractive wells
    the negative cluster tower and the BEC energy improve together.
    """
    cfg = state.config
    for i in range(state.size):
        base_key = objective_key(state.spectrum)
        step = len(state.history)
        best = None
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, step, t)
            if t % 4:
                term = mutate_candidate(rng, cfg, state.terms[i],
                                        state.n_particles)
            else:
                term = sample_candidate(rng, cfg, state.n_particles)
            try:
                orbit = cgbasis.symmetrise(term, state.frame)
                forms = state.forms.copy()
                forms[i] = orbit.canonical
                orbits = list(state.orbits)
                orbits[i] = orbit
                h, s = _replace_column(state, i, orbit, forms)
                spectrum = generalized_eig(h, s, cfg.threshold)
            except (ValueError, FloatingPointError, np.linalg.LinAlgError,
                    cgbasis.NotPositiveDefiniteError):
                continue
            key = objective_key(spectrum)
            if key < base_key and (best is None or key < best[0]):
                best = (key, term, orbit, forms, h, s, spectrum)
        if best is not None:
            _, term, orbit, forms, h, s, spectrum = best
            state.terms[i] = term
            state.orbits[i] = orbit
            state.forms = forms
            state.h, state.s = h, s
            state.spectrum = spectrum
        e = state.spectrum.bec_energy
        state.history.append((e if math.isfinite(e) else None,
                              state.spectrum.n_negative))


def _replace_column(state: SvmState, i: int, orbit: SymmetrisedOrbit,
                    forms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = state.h.copy()
    s = state.s.copy()
    weights = np.array([float(o.total_weight) for o in state.orbits])
    weights[i] = float(orbit.total_weight)
    hcol, scol = matelem.symmetrised_column(forms, orbit, state.pair_vecs,
                                            state.potential, weights)
    h[:, i] = hcol
    h[i, :] = hcol
    s[:, i] = scol
    s[i, :] = scol
    # the column covers every affected entry: (j, i) is bra j against the
    # replaced orbit i, which by exchange symmetry also equals (i, j)
    return h, s


# checkpoint serialisation ---------------------------------------------------

def term_to_dict(term: BasisTerm) -> dict:
    if isinstance(term, HyperRadialTerm):
        return {"family": "hyperradial", "alpha": term.alpha}
    if isinstance(term, PairCGTerm):
        return {"family": "pair", "alpha": term.alpha, "beta": term.beta}
    return {"family": "full",
            "pair_coefficients": [list(row) for row in term.pair_coefficients]}


def term_from_dict(d: dict) -> BasisTerm:
    fam = d["family"]
    if fam == "hyperradial":
        return HyperRadialTerm(d["alpha"])
    if fam == "pair":
        return PairCGTerm(d["alpha"], d["beta"])
    if fam == "full":
        return FullCGTerm.from_matrix(np.array(d["pair_coefficients"]))
    raise ValueError(f"unknown term family {fam!r}")


def potential_to_dict(potential: PotentialModel) -> dict:
    if potential is None:
        return {"kind": "none"}
    if isinstance(potential, GaussianPairModel):
        return {"kind": "gaussian", "v0": potential.v0, "c": potential.c}
    if isinstance(potential, ContactPairModel):
        return {"kind": "contact", "strength": potential.strength}
    raise TypeError(f"unknown potential {potential!r}")


def potential_from_dict(d: dict) -> PotentialModel:
    kind = d["kind"]
    if kind == "none":
        return None
    if kind == "gaussian":
        return GaussianPairModel(d["v0"], d["c"])
    if kind == "contact":
        return ContactPairModel(d["strength"])
    raise ValueError(f"unknown potential kind {kind!r}")


def save_checkpoint(state: SvmState, path: str) -> None:
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "config": asdict(state.config),
        "n_particles": state.n_particles,
        "potential": potential_to_dict(state.potential),
        "step": len(state.history),
        "terms": [term_to_dict(t) for t in state.terms],
        "history": [[e, n] for e, n in state.history],
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)       # atomic: never a partial checkpoint
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str) -> SvmState:
    """Rebuild optimisation state; unknown fields are tolerated."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unrecognised checkpoint schema {doc.get('schema')!r}")
    known = {f for f in SvmConfig.__dataclass_fields__}
    cfg = SvmConfig(**{k: v for k, v in doc["config"].items() if k in known})
    state = new_state(cfg, doc["n_particles"],
                      potential_from_dict(doc["potential"]))
    # replay the incremental column construction so the rebuilt matrices
    # are bitwise identical to the ones produced during growth
    for td in doc["terms"]:
        term = term_from_dict(td)
        orbit = cgbasis.symmetrise(term, state.frame)
        bras = np.concatenate([state.forms, orbit.canonical[None]])
        hcol, scol = matelem.symmetrised_column(bras, orbit, state.pair_vecs,
                                                state.potential)
        k = state.size
        h = np.empty((k + 1, k + 1))
        s = np.empty((k + 1, k + 1))
        h[:k, :k] = state.h
        s[:k, :k] = state.s
        h[:, k] = hcol
        h[k, :] = hcol
        s[:, k] = scol
        s[k, :] = scol
        spectrum = generalized_eig(h, s, cfg.threshold)
        state.append(term, orbit, hcol, scol, spectrum)
    state.history = [(e, n) for e, n in doc["history"]]
    return state
