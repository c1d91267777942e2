"""Coupling-table construction: central bond, environment topology, and
system-environment interaction, drawn from seeded random distributions.

Engine site indexing throughout: central spins are sites 0 and 1, the N
environment spins are sites 2..N+1.  Bond lists below use environment-local
0-based labels and are shifted by +2 when terms are emitted.

Randomness contract (seeds are portable):
  * generator: numpy PCG64 via ``np.random.default_rng``;
  * draw order: bond-major, axis-minor (axes in x, y, z order restricted
    to the spec's axes); absent axes consume no draws;
  * ``uniform_range`` draws one uniform per (bond, axis); ``sign_flip``
    draws one integer in {0, 1} per (bond, axis); ``fixed`` consumes none;
  * ``build_model`` feeds the environment builder from seed child 0 and
    the interaction builder from child 1 of ``SeedSequence(seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import AXES, CouplingTerm

SPEC_KINDS = ("uniform_range", "sign_flip", "fixed")
TOPOLOGY_KINDS = ("all_pairs", "triangular_nn", "square_nn", "ring_nn")

# SeedSequence spawn keys reserved per consumer
SEED_CHILD_ENV = 0
SEED_CHILD_INT = 1
SEED_CHILD_ENV_GROUND = 2
SEED_CHILD_FULL_GROUND = 3


class ModelError(ValueError):
    """Invalid coupling spec, topology, or builder precondition."""


@dataclass(frozen=True)
class CouplingSpec:
    """Distribution of exchange strengths for one Hamiltonian part.

    kind 'uniform_range': uniform in [lo, hi] per (bond, axis).
    kind 'sign_flip': lo == hi >= 0 is the magnitude, sign random.
    kind 'fixed': deterministic strength lo (== hi).
    Axes absent from ``axes`` get no term (strength zero).
    """

    kind: str
    lo: float
    hi: float
    axes: tuple[str, ...] = AXES

    def __post_init__(self):
        if self.kind not in SPEC_KINDS:
            raise ModelError(f"unknown coupling kind {self.kind!r}")
        if self.lo > self.hi:
            raise ModelError(f"need lo <= hi, got [{self.lo}, {self.hi}]")
        if self.kind in ("sign_flip", "fixed") and self.lo != self.hi:
            raise ModelError(f"{self.kind} needs lo == hi, got [{self.lo}, {self.hi}]")
        if self.kind == "sign_flip" and self.lo < 0:
            raise ModelError(f"sign_flip magnitude must be >= 0, got {self.lo}")
        axes = tuple(self.axes)
        if not axes or any(a not in AXES for a in axes) or len(set(axes)) != len(axes):
            raise ModelError(f"axes must be a nonempty subset of {AXES}, got {axes!r}")
        object.__setattr__(self, "axes", tuple(a for a in AXES if a in axes))

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "uniform_range":
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == "sign_flip":
            return float(self.lo if rng.integers(0, 2) == 1 else -self.lo)
        return float(self.lo)


@dataclass(frozen=True)
class Topology:
    """Environment coupling graph over N environment spins.

    Lattice kinds factor N into rows x cols (rows = largest divisor with
    rows <= cols, rows >= 2), open boundaries.  The triangular patch is
    the rhombic rows x cols parallelogram; alternative patches can be
    supplied as explicit bond lists (see :func:`load_edge_list`).
    """

    kind: str
    n_env: int

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise ModelError(f"unknown topology kind {self.kind!r}")
        if self.n_env < 2:
            raise ModelError(f"need at least 2 environment spins, got {self.n_env}")
        self.bonds()  # fail fast on incompatible lattice sizes

    def bonds(self) -> list[tuple[int, int]]:
        """Environment-local bond list in the canonical enumeration order."""
        n = self.n_env
        if self.kind == "all_pairs":
            return [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
        if self.kind == "ring_nn":
            if n < 3:
                raise ModelError(f"ring needs n_env >= 3, got {n}")
            return [(k, k + 1) for k in range(n - 1)] + [(n - 1, 0)]
        rows, cols = _grid_shape(n, self.kind)
        triangular = self.kind == "triangular_nn"
        bonds = []
        for r in range(rows):
            for c in range(cols):
                s = r * cols + c
                if c + 1 < cols:
                    bonds.append((s, s + 1))
                if r + 1 < rows:
                    bonds.append((s, s + cols))
                    if triangular and c > 0:
                        bonds.append((s, s + cols - 1))
        return bonds


def _grid_shape(n: int, kind: str) -> tuple[int, int]:
    rows = max((r for r in range(2, int(n**0.5) + 1) if n % r == 0), default=0)
    if rows == 0:
        raise ModelError(f"{kind} needs n_env = rows x cols with rows, cols >= 2, got {n}")
    return rows, n // rows


def triangular_rows_bonds(row_lengths) -> list[tuple[int, int]]:
    """Bond list for a triangular patch with explicit row lengths.

    Rows share one slant direction (parallelogram-style): site (r, c)
    bonds to (r, c+1), (r+1, c) and (r+1, c-1) where those exist.  Covers
    patches like the 4/5/5-row 14-site alternative.
    """
    offsets = np.cumsum([0] + list(row_lengths))
    bonds = []
    for r, length in enumerate(row_lengths):
        for c in range(length):
            s = offsets[r] + c
            if c + 1 < length:
                bonds.append((s, s + 1))
            if r + 1 < len(row_lengths):
                below = row_lengths[r + 1]
                if c < below:
                    bonds.append((s, offsets[r + 1] + c))
                if 0 <= c - 1 < below:
                    bonds.append((s, offsets[r + 1] + c - 1))
    return bonds


def load_edge_list(path) -> list[tuple[int, int]]:
    """Read one 'i j' bond per line (0-based environment labels, # comments)."""
    bonds = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ModelError(f"{path}:{lineno}: expected 'i j', got {raw!r}")
        i, j = int(parts[0]), int(parts[1])
        if i == j or i < 0 or j < 0:
            raise ModelError(f"{path}:{lineno}: invalid bond ({i}, {j})")
        bonds.append((i, j))
    return bonds


@dataclass(frozen=True)
class ModelInstance:
    """The three coupling tables of one scenario realization."""

    n_env: int
    central_terms: tuple[CouplingTerm, ...]
    env_terms: tuple[CouplingTerm, ...]
    int_terms: tuple[CouplingTerm, ...]
    seed: int

    def __post_init__(self):
        for t in self.central_terms:
            if {t.i, t.j} != {0, 1}:
                raise ModelError(f"central term on sites ({t.i}, {t.j})")
        for t in self.env_terms:
            if t.i < 2 or t.j < 2:
                raise ModelError(f"environment term on sites ({t.i}, {t.j})")
        for t in self.int_terms:
            if min(t.i, t.j) > 1 or max(t.i, t.j) < 2:
                raise ModelError(f"interaction term on sites ({t.i}, {t.j})")

    @property
    def n_total(self) -> int:
        return self.n_env + 2

    @property
    def all_terms(self) -> tuple[CouplingTerm, ...]:
        return self.central_terms + self.env_terms + self.int_terms


def build_central(j: float) -> list[CouplingTerm]:
    """The isotropic central bond -J S_1 . S_2 (antiferromagnetic, J < 0)."""
    if not j < 0:
        raise ModelError(f"central bond must be antiferromagnetic (J < 0), got J={j}")
    return [CouplingTerm(0, 1, axis, j) for axis in AXES]


def build_environment(topology: Topology, spec: CouplingSpec,
                      rng: np.random.Generator) -> list[CouplingTerm]:
    """One term per (bond, axis in spec.axes), strengths drawn per the spec."""
    return [CouplingTerm(i + 2, j + 2, axis, spec.draw(rng))
            for i, j in topology.bonds() for axis in spec.axes]


def build_environment_from_bonds(bonds, n_env: int, spec: CouplingSpec,
                                 rng: np.random.Generator) -> list[CouplingTerm]:
    """Like :func:`build_environment` for an explicit env-local bond list."""
    for i, j in bonds:
        if i >= n_env or j >= n_env:
            raise ModelError(f"bond ({i}, {j}) out of range for {n_env} environment spins")
    return [CouplingTerm(i + 2, j + 2, axis, spec.draw(rng))
            for i, j in bonds for axis in spec.axes]


def build_interaction(n_env: int, spec: CouplingSpec,
                      rng: np.random.Generator) -> list[CouplingTerm]:
    """Couple both central spins to every environment spin."""
    if n_env < 1:
        raise ModelError(f"need n_env >= 1, got {n_env}")
    return [CouplingTerm(c, j, axis, spec.draw(rng))
            for c in (0, 1) for j in range(2, n_env + 2) for axis in spec.axes]


def build_model(topology: Topology, omega: CouplingSpec, delta: CouplingSpec,
                j: float, seed: int, env_bonds=None) -> ModelInstance:
    """Assemble a full model realization from one 64-bit seed."""
    children = np.random.SeedSequence(seed).spawn(2)
    env_rng = np.random.default_rng(children[SEED_CHILD_ENV])
    int_rng = np.random.default_rng(children[SEED_CHILD_INT])
    if env_bonds is None:
        env_terms = build_environment(topology, omega, env_rng)
    else:
        env_terms = build_environment_from_bonds(env_bonds, topology.n_env, omega, env_rng)
    return ModelInstance(
        n_env=topology.n_env,
        central_terms=tuple(build_central(j)),
        env_terms=tuple(env_terms),
        int_terms=tuple(build_interaction(topology.n_env, delta, int_rng)),
        seed=seed,
    )
