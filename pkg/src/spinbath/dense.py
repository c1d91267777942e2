"""Dense Kronecker-product construction of the coupling Hamiltonian.

Independent oracle for the matrix-free kernel; only sensible for small
systems (the matrix is 4^n_total complex entries).
"""

from __future__ import annotations

import numpy as np

SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=np.complex128)
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=np.complex128)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=np.complex128)
SPIN_HALF = {"x": SX, "y": SY, "z": SZ}


def dense_hamiltonian(terms, n_total: int) -> np.ndarray:
    """Sum of -g * S_i^a S_j^a as an explicit 2^n x 2^n matrix.

    Site k occupies bit k of the basis index, so the Kronecker chain runs
    from site n_total-1 down to site 0.
    """
    if n_total > 14:
        raise ValueError(f"dense construction with n_total={n_total} would need "
                         f"{(1 << n_total)**2 * 16 / 1e9:.0f} GB")
    dim = 1 << n_total
    ham = np.zeros((dim, dim), dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    for t in terms:
        if t.i >= n_total or t.j >= n_total:
            raise IndexError(f"term sites ({t.i}, {t.j}) out of range for {n_total} spins")
        op = SPIN_HALF[t.axis]
        mat = np.ones((1, 1), dtype=np.complex128)
        for site in range(n_total - 1, -1, -1):
            mat = np.kron(mat, op if site in (t.i, t.j) else eye)
        ham += -t.g * mat
    return ham
