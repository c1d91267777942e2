"""Bit-encoded spin-1/2 state vectors and matrix-free two-spin coupling kernels.

Basis convention: a state over ``n_total`` spins is a complex vector of
length ``2**n_total``; bit ``k`` of the basis index is 1 when site ``k``
points down (up = bit 0, the +1/2 eigenstate of S^z).  Sites 0 and 1 are
the central pair, sites 2..n_total-1 the environment.  Spin operators are
S^a = sigma^a / 2 with hbar = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

with warnings.catch_warnings():
    # the sandboxed TBB is too old for numba; it falls back to omp/workqueue
    warnings.filterwarnings("ignore", message=".*TBB.*")
    from numba import njit, prange

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class CouplingTerm:
    """One exchange addend: applies ``-g * S_i^axis * S_j^axis``.

    Strengths are in units of |J|; the global minus sign of the model
    Hamiltonian lives here, not in the caller.
    """

    i: int
    j: int
    axis: str
    g: float

    def __post_init__(self):
        if self.i == self.j or self.i < 0 or self.j < 0:
            raise ValueError(f"need two distinct non-negative sites, got ({self.i}, {self.j})")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not math.isfinite(self.g):
            raise ValueError(f"coupling strength must be finite, got {self.g}")


@dataclass(frozen=True)
class SpinState:
    """Complex amplitude vector over the bit-encoded basis.

    The amplitude array is owned by the instance; norm is not enforced at
    construction (operator applications legitimately return unnormalized
    vectors) but every state produced by preparation or time evolution is
    unit-norm to 1e-10.
    """

    n_total: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_total < 2:
            raise ValueError(f"need at least the two central spins, got n_total={self.n_total}")
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (1 << self.n_total,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({1 << self.n_total},)"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_total

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "SpinState":
        return SpinState(self.n_total, self.amplitudes.copy())

    @classmethod
    def basis_state(cls, n_total: int, index: int) -> "SpinState":
        """Computational basis state with the given bit-encoded index."""
        if not 0 <= index < (1 << n_total):
            raise ValueError(f"basis index {index} out of range for {n_total} spins")
        amps = np.zeros(1 << n_total, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_total, amps)


def inner(a: SpinState, b: SpinState) -> complex:
    """<a|b> with conjugation on the first argument."""
    if a.dim != b.dim:
        raise ValueError(f"state dimensions differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_term(state: SpinState, term: CouplingTerm) -> SpinState:
    """Apply ``-g * S_i^axis * S_j^axis`` to the state (no normalization).

    Reference implementation in plain numpy; the hot paths go through
    :class:`CompiledHamiltonian` instead.
    """
    n = state.n_total
    if term.i >= n or term.j >= n:
        raise IndexError(f"term sites ({term.i}, {term.j}) out of range for {n} spins")
    amps = state.amplitudes
    k = np.arange(state.dim, dtype=np.int64)
    parity = ((k >> term.i) ^ (k >> term.j)) & 1  # 0 when bits i and j agree
    if term.axis == "z":
        out = (-term.g / 4.0) * (1.0 - 2.0 * parity) * amps
    else:
        mask = (1 << term.i) | (1 << term.j)
        if term.axis == "x":
            out = (-term.g / 4.0) * amps[k ^ mask]
        else:  # y: (i/2)^2 per flipped pair, sign from the bit parity
            out = (term.g / 4.0) * (1.0 - 2.0 * parity) * amps[k ^ mask]
    return SpinState(n, out)


# ----------------------------------------------------------------------
# compiled matrix-free kernel
# ----------------------------------------------------------------------
#
# Terms are grouped by coupled site pair before application:
#   * every z term contributes to one precomputed real diagonal;
#   * x and y terms of a pair merge into a single off-diagonal coefficient
#     that depends only on the parity of bits i and j.
# Grouping is a fixed deterministic function of the term list (first-
# appearance order), so repeated applications are bit-identical; it does
# not preserve the floating-point accumulation order of a term-by-term
# sweep, but the two agree far below the 1e-13 oracle tolerance.
#
# Pairs living entirely in the environment (both sites >= 2) act on whole
# rows of the (dim/4, 4) view, which keeps the inner loop contiguous.


@njit(cache=True, parallel=True)
def _kernel(inp, out, prev, combine, diag, lmask, la, lb, lbi, lbj, emask, ea, eb, ebi, ebj):
    inr = inp.reshape(-1, 4)
    diagr = diag.reshape(-1, 4)
    n_env_pairs = emask.size
    n_low_pairs = lmask.size
    nrow = inr.shape[0]
    for e in prange(nrow):
        a0 = diagr[e, 0] * inr[e, 0]
        a1 = diagr[e, 1] * inr[e, 1]
        a2 = diagr[e, 2] * inr[e, 2]
        a3 = diagr[e, 3] * inr[e, 3]
        for t in range(n_env_pairs):
            p = ((e >> ebi[t]) ^ (e >> ebj[t])) & 1
            c = eb[t] if p else ea[t]
            src = e ^ emask[t]
            a0 += c * inr[src, 0]
            a1 += c * inr[src, 1]
            a2 += c * inr[src, 2]
            a3 += c * inr[src, 3]
        base = e << 2
        for col in range(4):
            k = base | col
            acc = a0 if col == 0 else (a1 if col == 1 else (a2 if col == 2 else a3))
            for t in range(n_low_pairs):
                p = ((k >> lbi[t]) ^ (k >> lbj[t])) & 1
                c = lb[t] if p else la[t]
                acc += c * inp[k ^ lmask[t]]
            if combine:
                out[k] = 2.0 * acc - prev[k]
            else:
                out[k] = acc


@njit(cache=True, parallel=True)
def _axpy(y, x, c):
    for k in prange(y.size):
        y[k] += c * x[k]


class CompiledHamiltonian:
    """Sum of coupling terms compiled to a matrix-free kernel.

    ``scale`` multiplies every term strength (used by the propagator to
    fold the spectral normalization into the kernel).
    """

    def __init__(self, terms, n_total: int, scale: float = 1.0):
        self.n_total = int(n_total)
        self.dim = 1 << self.n_total
        self.terms = tuple(terms)
        if self.n_total < 2:
            raise ValueError("kernel needs n_total >= 2")
        for t in self.terms:
            if t.i >= self.n_total or t.j >= self.n_total:
                raise IndexError(f"term sites ({t.i}, {t.j}) out of range for {self.n_total} spins")

        diag = np.zeros(self.dim, dtype=np.float64)
        pair_coeffs: dict[tuple[int, int], list[float]] = {}
        pair_order: list[tuple[int, int]] = []
        k = np.arange(self.dim, dtype=np.int64)
        for t in self.terms:
            g = t.g * scale
            if t.axis == "z":
                parity = ((k >> t.i) ^ (k >> t.j)) & 1
                diag += (-g / 4.0) * (1.0 - 2.0 * parity)
                continue
            key = (t.i, t.j) if t.i < t.j else (t.j, t.i)
            if key not in pair_coeffs:
                pair_coeffs[key] = [0.0, 0.0]  # off-diagonal coeff at parity 0 / 1
                pair_order.append(key)
            if t.axis == "x":
                pair_coeffs[key][0] += -g / 4.0
                pair_coeffs[key][1] += -g / 4.0
            else:
                pair_coeffs[key][0] += g / 4.0
                pair_coeffs[key][1] += -g / 4.0

        env, low = [], []
        for key in pair_order:
            (env if key[0] >= 2 and key[1] >= 2 else low).append(key)
        self._diag = diag
        self._lmask = np.array([(1 << i) | (1 << j) for i, j in low], dtype=np.int64)
        self._la = np.array([pair_coeffs[p][0] for p in low], dtype=np.float64)
        self._lb = np.array([pair_coeffs[p][1] for p in low], dtype=np.float64)
        self._lbi = np.array([p[0] for p in low], dtype=np.int64)
        self._lbj = np.array([p[1] for p in low], dtype=np.int64)
        # environment pairs act identically on all 4 central components;
        # masks and bit positions shift down into the row-index space
        self._emask = np.array([((1 << i) | (1 << j)) >> 2 for i, j in env], dtype=np.int64)
        self._ea = np.array([pair_coeffs[p][0] for p in env], dtype=np.float64)
        self._eb = np.array([pair_coeffs[p][1] for p in env], dtype=np.float64)
        self._ebi = np.array([p[0] - 2 for p in env], dtype=np.int64)
        self._ebj = np.array([p[1] - 2 for p in env], dtype=np.int64)

    def apply(self, vec: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """H @ vec into ``out`` (allocated when omitted)."""
        if vec.shape != (self.dim,):
            raise ValueError(f"vector shape {vec.shape} does not match dimension {self.dim}")
        if out is None:
            out = np.empty_like(vec)
        _kernel(vec, out, vec, False, self._diag,
                self._lmask, self._la, self._lb, self._lbi, self._lbj,
                self._emask, self._ea, self._eb, self._ebi, self._ebj)
        return out

    def apply_two_minus(self, vec: np.ndarray, prev: np.ndarray, out: np.ndarray) -> np.ndarray:
        """2*H@vec - prev, the Chebyshev three-term update, in one pass."""
        _kernel(vec, out, prev, True, self._diag,
                self._lmask, self._la, self._lb, self._lbi, self._lbj,
                self._emask, self._ea, self._eb, self._ebi, self._ebj)
        return out

    def expectation(self, vec: np.ndarray) -> float:
        """<vec|H|vec> (real part; H is Hermitian)."""
        return float(np.vdot(vec, self.apply(vec)).real)


def apply_hamiltonian(state: SpinState, terms) -> SpinState:
    """Apply the sum of all coupling terms to the state."""
    op = CompiledHamiltonian(terms, state.n_total)
    return SpinState(state.n_total, op.apply(state.amplitudes))


def axpy(y: np.ndarray, x: np.ndarray, c: complex) -> None:
    """y += c*x without a temporary."""
    _axpy(y, x, complex(c))
