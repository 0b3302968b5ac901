"""Dense complex linear algebra for small unitary workloads (dim <= 64).

Matrices are plain ``numpy.ndarray`` of ``complex128``; state vectors are 1-d
arrays of length ``2**n`` with qubit 0 as the most significant bit, so the
basis index of |x1 x2 ... xn> is ``sum(x_k * 2**(n-k))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Residual below which a matrix counts as unitary.
TAU_UNITARY = 1e-10
# Equality tolerance for analytic matrix identities at these dimensions.
TOL_ANALYTIC = 1e-12


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of two square matrices of equal dimension."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a, dtype=complex).conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` indexing the most significant bits."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def unitarity_residual(a: np.ndarray) -> float:
    """Max-abs entry of ``a†a - I``."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    return float(np.max(np.abs(a.conj().T @ a - np.eye(d))))


def is_unitary(a: np.ndarray, tol: float = TAU_UNITARY) -> bool:
    return unitarity_residual(a) <= tol


def matrix_distance(a: np.ndarray, b: np.ndarray, mode: str = "exact") -> float:
    """Max-abs entrywise distance between two matrices.

    ``mode='up_to_global_phase'`` first aligns ``b`` by the phase of the
    largest-magnitude entry pair, then compares entrywise.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if mode == "exact":
        return float(np.max(np.abs(a - b)))
    if mode == "up_to_global_phase":
        idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
        if abs(b[idx]) == 0.0:
            return float(np.max(np.abs(a - b)))
        phase = a[idx] / b[idx]
        mag = abs(phase)
        phase = phase / mag if mag > 0 else 1.0
        return float(np.max(np.abs(a - phase * b)))
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True, eq=False)
class TwoLevelUnitary:
    """A dim x dim unitary acting nontrivially only on basis indices i < j.

    ``block`` is the 2x2 unitary placed at rows/columns (i, j); everything
    else is the identity. Indices are 0-based.
    """

    dim: int
    i: int
    j: int
    block: np.ndarray

    def __post_init__(self):
        if not 0 <= self.i < self.j < self.dim:
            raise ValueError(f"need 0 <= i < j < dim, got i={self.i} j={self.j} dim={self.dim}")
        blk = np.array(self.block, dtype=complex)
        if blk.shape != (2, 2):
            raise ValueError(f"block must be 2x2, got {blk.shape}")
        res = unitarity_residual(blk)
        if res > TAU_UNITARY:
            raise ValueError(f"block not unitary (residual {res:.3e})")
        blk.setflags(write=False)
        object.__setattr__(self, "block", blk)

    def __eq__(self, other):
        return (
            isinstance(other, TwoLevelUnitary)
            and (self.dim, self.i, self.j) == (other.dim, other.i, other.j)
            and np.array_equal(self.block, other.block)
        )


def embed_two_level(t: TwoLevelUnitary) -> np.ndarray:
    """Expand a two-level unitary to its full dense matrix."""
    m = np.eye(t.dim, dtype=complex)
    m[t.i, t.i] = t.block[0, 0]
    m[t.i, t.j] = t.block[0, 1]
    m[t.j, t.i] = t.block[1, 0]
    m[t.j, t.j] = t.block[1, 1]
    return m


def random_unitary(dim: int, rng=None) -> np.ndarray:
    """Haar-style random unitary from QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(rng)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return q * ph


# --- plain-text matrix format ------------------------------------------------
#
# Line 1 is ``dim <d>``; then d rows of d complex literals ``<re><sign><im>i``
# written with 17 significant digits (enough to round-trip float64 exactly).


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(token: str) -> complex:
    s = token.strip()
    low = s.lower()
    if "nan" in low or "inf" in low:
        raise ValueError(f"non-finite complex literal {token!r}")
    if not low.endswith("i"):
        raise ValueError(f"malformed complex literal {token!r}")
    try:
        z = complex(s[:-1] + "j")
    except ValueError:
        raise ValueError(f"malformed complex literal {token!r}") from None
    return z


def matrix_to_text(a: np.ndarray) -> str:
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    lines = [f"dim {d}"]
    for row in a:
        lines.append(" ".join(format_complex(z) for z in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim":
        raise ValueError(f"expected 'dim <d>' header, got {lines[0]!r}")
    d = int(head[1])
    if d <= 0:
        raise ValueError(f"dimension must be positive, got {d}")
    if len(lines) - 1 != d:
        raise ValueError(f"expected {d} rows, got {len(lines) - 1}")
    m = np.empty((d, d), dtype=complex)
    for r, ln in enumerate(lines[1:]):
        toks = ln.split()
        if len(toks) != d:
            raise ValueError(f"row {r}: expected {d} entries, got {len(toks)}")
        for c, tok in enumerate(toks):
            m[r, c] = parse_complex(tok)
    return m
