"""Hermitian pair input, validation and reduction to canonical form.

The canonical form has B diagonal with distinct, strictly positive, ascending
eigenvalues. It is reached by a simultaneous unitary conjugation of A and B, a
deterministic splitting of (near-)degenerate eigenvalues of B, and a scalar shift.
The record kept in :class:`ReducedPair` is enough to map results back to the input.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from scipy import linalg

from bmv.errors import DimensionError, HermitianError, MatrixFormatError, ParameterError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
SPLIT_FACTOR = 1e-6
PHASE_TOL = 1e-10


def _as_square(m: Any) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def validate_hermitian(m: Any, tol: float = HERMITIAN_TOL) -> tuple[bool, float]:
    """Check m against its conjugate transpose.

    Returns (ok, deviation) where deviation = max |m_ij - conj(m_ji)| and ok means
    deviation <= tol * (1 + max |m_ij|).
    """
    arr = _as_square(m)
    if arr.size == 0:
        return True, 0.0
    deviation = float(np.max(np.abs(arr - arr.conj().T)))
    scale = 1.0 + float(np.max(np.abs(arr)))
    return deviation <= tol * scale, deviation


@dataclass(frozen=True, eq=False)
class HermitianPair:
    """The input pair (A, B) of n x n Hermitian matrices."""

    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def from_arrays(cls, a: Any, b: Any, tol: float = HERMITIAN_TOL) -> "HermitianPair":
        """Validate and build a pair; raises on shape mismatch or non-Hermitian input."""
        a_arr = _as_square(a)
        b_arr = _as_square(b)
        if a_arr.shape[0] < 1:
            raise DimensionError("matrices must be at least 1 x 1")
        if a_arr.shape != b_arr.shape:
            raise DimensionError(f"A is {a_arr.shape} but B is {b_arr.shape}")
        for name, arr in (("A", a_arr), ("B", b_arr)):
            ok, deviation = validate_hermitian(arr, tol)
            if not ok:
                raise HermitianError(
                    f"{name} is not Hermitian (max deviation {deviation:.3e})", deviation
                )
        return cls(a=a_arr, b=b_arr)


@dataclass(frozen=True, eq=False)
class ReducedPair:
    """Canonical form of a pair: ``a_red = U* A U`` and ``B + U diag(splitting) U* + shift``
    equal to ``U diag(b_eigs) U*``."""

    n: int
    a_red: np.ndarray
    b_eigs: np.ndarray
    shift: float
    unitary: np.ndarray
    perturbation: float
    splitting: np.ndarray

    @property
    def diag_a(self) -> np.ndarray:
        """Real diagonal entries a_jj of the conjugated A."""
        return np.real(np.diag(self.a_red))

    @property
    def min_gap(self) -> float:
        if self.n < 2:
            return float(self.b_eigs[0])
        return float(np.min(np.diff(self.b_eigs)))

    @property
    def spread(self) -> float:
        return float(self.b_eigs[-1] - self.b_eigs[0])

    def b_matrix(self) -> np.ndarray:
        return np.diag(self.b_eigs).astype(complex)

    def b_perturbed(self) -> np.ndarray:
        """The perturbed input B (original basis, shift removed)."""
        u = self.unitary
        return u @ np.diag(self.b_eigs - self.shift) @ u.conj().T

    def pencil(self, zeta: complex) -> np.ndarray:
        """The matrix a_red - zeta * diag(b_eigs)."""
        return self.a_red - zeta * np.diag(self.b_eigs)


def default_eps_split(eigs: np.ndarray) -> float:
    """1e-6 times the spectral diameter of B, or 1e-6 when B is scalar."""
    diameter = float(eigs[-1] - eigs[0]) if len(eigs) else 0.0
    if diameter <= HERMITIAN_TOL * (1.0 + float(np.max(np.abs(eigs)))):
        return SPLIT_FACTOR
    return SPLIT_FACTOR * diameter


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of each column real and positive."""
    out = vecs.astype(complex).copy()
    for j in range(out.shape[1]):
        column = out[:, j]
        idx = int(np.argmax(np.abs(column) > PHASE_TOL))
        pivot = column[idx]
        if abs(pivot) > 0:
            out[:, j] = column * (abs(pivot) / pivot)
    return out


def split_eigenvalues(eigs: np.ndarray, eps: float) -> np.ndarray:
    """Separate ascending eigenvalues closer than eps.

    Sweeps upward; the lowest eigenvalue of a cluster stays put and each later one is
    raised by the smallest integer multiple of eps leaving it at least eps above its
    predecessor.
    """
    out = np.array(eigs, dtype=float)
    for i in range(1, len(out)):
        if out[i] - out[i - 1] < eps * (1.0 - 1e-9):
            k = math.ceil((out[i - 1] + eps - eigs[i]) / eps - 1e-9)
            out[i] = eigs[i] + k * eps
    return out


def reduce_pair(pair: HermitianPair, eps_split: Optional[float] = None) -> ReducedPair:
    """Bring (A, B) to the canonical form with B diagonal, distinct and positive."""
    eigs, vecs = linalg.eigh(pair.b)
    if eps_split is None:
        eps = default_eps_split(eigs)
    else:
        eps = float(eps_split)
        if not math.isfinite(eps) or eps <= 0:
            raise ParameterError(f"eps_split must be positive, got {eps_split}")

    unitary = _fix_phases(vecs)
    split = split_eigenvalues(eigs, eps)
    shift = eps + max(0.0, -float(eigs[0]))
    if np.any(split != eigs):
        logger.debug("split eigenvalues of B: offsets %s", (split - eigs).tolist())

    a_red = unitary.conj().T @ pair.a @ unitary
    a_red = 0.5 * (a_red + a_red.conj().T)
    return ReducedPair(
        n=pair.n,
        a_red=a_red,
        b_eigs=split + shift,
        shift=shift,
        unitary=unitary,
        perturbation=eps,
        splitting=split - eigs,
    )


def parse_matrix(obj: Any, path: Optional[str] = None) -> np.ndarray:
    """Build a complex matrix from ``{"n": int, "re": [[...]], "im": [[...]]}``."""
    if not isinstance(obj, dict):
        raise MatrixFormatError("top-level value must be an object", path)
    if "n" not in obj or "re" not in obj:
        raise MatrixFormatError("missing required key 'n' or 're'", path)
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MatrixFormatError(f"'n' must be a positive integer, got {n!r}", path)

    parts = []
    for key in ("re", "im"):
        if key not in obj:
            parts.append(np.zeros((n, n)))
            continue
        try:
            arr = np.asarray(obj[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise MatrixFormatError(f"'{key}' is not a numeric array: {exc}", path) from exc
        if arr.shape != (n, n):
            raise DimensionError(f"{path or 'matrix'}: '{key}' has shape {arr.shape}, expected {(n, n)}")
        parts.append(arr)
    return parts[0] + 1j * parts[1]


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    """Read a matrix JSON file."""
    path = str(path)
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read file: {exc.strerror}", path) from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(exc.msg, path, exc.lineno, exc.colno) from exc
    return parse_matrix(obj, path)


def dump_matrix(m: np.ndarray) -> dict:
    arr = np.asarray(m, dtype=complex)
    return {"n": int(arr.shape[0]), "re": arr.real.tolist(), "im": arr.imag.tolist()}


def _random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
    return 0.5 * (x + x.conj().T)


def random_pair(n: int, seed: int, diagonal_b: bool = True) -> HermitianPair:
    """Seeded random instance: A Hermitian with parts in [-1, 1], B = diag(1..n) by default."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    a = _random_hermitian(rng, n)
    b = np.diag(np.arange(1.0, n + 1.0)) if diagonal_b else _random_hermitian(rng, n)
    return HermitianPair.from_arrays(a, b)


def _random_gram(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
    g = x @ x.conj().T / n
    return 0.5 * (g + g.conj().T)


def random_psd_pair(n: int, seed: int) -> HermitianPair:
    """Seeded random instance with A = Y Y* / n and B = X X* / n, both positive semidefinite."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    return HermitianPair.from_arrays(_random_gram(rng, n), _random_gram(rng, n))
