"""Lanczos ground states: environment preparation and full-system reference.

Krylov iteration with full reorthogonalization (CGS, two passes) and
restarts: from the current Ritz vector while the residual keeps falling,
from a fresh random vector when it stagnates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CompiledHamiltonian, SpinState
from .model import SEED_CHILD_ENV_GROUND, SEED_CHILD_FULL_GROUND, ModelInstance
from .observables import correlation

_STAGNATION_FACTOR = 0.9  # residual must shrink at least this much per cycle
_MAX_FRESH_RESTARTS = 3


class ConvergenceError(RuntimeError):
    """Eigensolve ran out of budget; carries the best residual reached."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: SpinState
    residual: float
    iterations: int  # total operator applications


def lanczos_ground(terms, n_total: int, tol: float = 1e-10, max_iter: int = 500,
                   rng: np.random.Generator | None = None,
                   basis_cap: int = 200) -> GroundStateResult:
    """Lowest eigenpair of the coupling Hamiltonian over 2^n_total states.

    ``max_iter`` bounds the total number of operator applications across
    all restart cycles; ``basis_cap`` bounds the stored Krylov basis per
    cycle (memory is basis_cap * 2^n_total complex values).
    """
    if n_total < 2:
        raise ValueError("need n_total >= 2")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if rng is None:
        rng = np.random.default_rng(0)
    dim = 1 << n_total

    terms = tuple(terms)
    if not terms:
        return GroundStateResult(0.0, SpinState.basis_state(n_total, 0), 0.0, 0)

    op = CompiledHamiltonian(terms, n_total)
    start = _random_unit(rng, dim)
    best: tuple[float, float, np.ndarray] | None = None  # (residual, energy, vector)
    used = 0
    fresh = 0
    while used < max_iter:
        cap = min(basis_cap, dim, max_iter - used)
        energy, vec, mv = _lanczos_cycle(op, start, max(cap, 2), tol)
        used += mv
        resid = float(np.linalg.norm(op.apply(vec) - energy * vec))
        used += 1
        prev_best = best[0] if best is not None else np.inf
        if best is None or resid < best[0]:
            best = (resid, energy, vec)
        if resid <= tol:
            return GroundStateResult(energy, SpinState(n_total, vec), resid, used)
        if resid > _STAGNATION_FACTOR * prev_best:
            fresh += 1
            if fresh > _MAX_FRESH_RESTARTS:
                break
            start = _random_unit(rng, dim)
        else:
            start = vec
    raise ConvergenceError(
        f"no convergence to {tol:g} within {used} operator applications "
        f"(best residual {best[0]:.3e})", best[0])


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _lanczos_cycle(op: CompiledHamiltonian, start: np.ndarray, cap: int, tol: float):
    """One restart cycle; returns (ritz energy, ritz vector, matvec count)."""
    dim = start.size
    basis = np.empty((cap, dim), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []

    q = start / np.linalg.norm(start)
    basis[0] = q
    r = op.apply(q)
    mv = 1
    alphas.append(float(np.vdot(q, r).real))
    r -= alphas[0] * q

    m = 1
    while m < cap:
        for _ in range(2):  # CGS reorthogonalization, two passes
            coeff = (basis[:m] @ r.conj()).conj()  # <q_k|r> without copying the basis
            r -= basis[:m].T @ coeff
        beta = float(np.linalg.norm(r))
        if beta < 1e-13:
            break  # exact invariant subspace
        q = r / beta
        basis[m] = q
        r = op.apply(q)
        mv += 1
        alpha = float(np.vdot(q, r).real)
        r -= alpha * q + beta * basis[m - 1]
        alphas.append(alpha)
        betas.append(beta)
        m += 1
        if m % 5 == 0 or m == cap:
            theta, s = _tridiag_ground(alphas, betas)
            if np.linalg.norm(r) * abs(s[-1]) <= 0.5 * tol:
                break

    theta, s = _tridiag_ground(alphas, betas)
    vec = basis[:m].T @ s.astype(np.complex128)
    vec /= np.linalg.norm(vec)
    return float(theta), vec, mv


def _tridiag_ground(alphas, betas):
    m = len(alphas)
    t = np.zeros((m, m))
    t[np.arange(m), np.arange(m)] = alphas
    if m > 1:
        idx = np.arange(m - 1)
        t[idx, idx + 1] = betas
        t[idx + 1, idx] = betas
    vals, vecs = np.linalg.eigh(t)
    return vals[0], vecs[:, 0]


def prepare_initial_state(model: ModelInstance, tol: float = 1e-10) -> SpinState:
    """|up down> on the central pair times the environment ground state."""
    env_terms = [type(t)(t.i - 2, t.j - 2, t.axis, t.g) for t in model.env_terms]
    rng = np.random.default_rng(
        np.random.SeedSequence(model.seed, spawn_key=(SEED_CHILD_ENV_GROUND,)))
    ground = lanczos_ground(env_terms, model.n_env, tol=tol, rng=rng)
    amps = np.zeros(1 << model.n_total, dtype=np.complex128)
    # central bits (site0 up, site1 down) = nibble 2; environment strides by 4
    amps[2::4] = ground.vector.amplitudes
    return SpinState(model.n_total, amps)


def full_ground_reference(model: ModelInstance, tol: float = 1e-10) -> tuple[float, float]:
    """(E0, corr0): ground energy and central correlation of the whole system."""
    rng = np.random.default_rng(
        np.random.SeedSequence(model.seed, spawn_key=(SEED_CHILD_FULL_GROUND,)))
    ground = lanczos_ground(model.all_terms, model.n_total, tol=tol, rng=rng)
    return ground.energy, correlation(ground.vector)
