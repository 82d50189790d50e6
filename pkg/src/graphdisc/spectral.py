"""Symmetric eigendecomposition, graph Fourier transform, subspace splits.

Functions:

eig_sym: full eigendecomposition of a symmetric support matrix (cyclic Jacobi)
gft / igft: analysis and synthesis with the eigenvector basis
split_subspace: partition the basis at a sorted index k
project_subspace: orthogonal projection onto the low or high subspace

Classes:

Spectrum: eigenvalues sorted by ascending magnitude plus orthonormal basis
SubspaceSplit: the V_low / V_high partition of a Spectrum

Eigenvalues are ordered by ascending |lambda| with ties broken by ascending
signed value; each eigenvector is flipped so its first significant component
is positive. Both conventions make downstream coefficients reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, NumericalError, ShapeError
from .graphs import SupportMatrix, _frozen

_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition S = V diag(eigenvalues) V^T."""

    eigenvalues: np.ndarray   # (n,), |l_1| <= ... <= |l_n|
    eigenvectors: np.ndarray  # (n, n), column i pairs with eigenvalues[i]

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class SubspaceSplit:
    """Columns of a Spectrum partitioned at sorted index k."""

    k: int
    v_low: np.ndarray        # (n, k)
    v_high: np.ndarray       # (n, n-k)
    lambda_low: np.ndarray   # (k,)
    lambda_high: np.ndarray  # (n-k,)

    def __post_init__(self):
        for name in ("v_low", "v_high", "lambda_low", "lambda_high"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self) -> int:
        return self.v_low.shape[0]


def _round_robin_schedule(n: int) -> list[list[tuple[int, int]]]:
    """Partition all index pairs into rounds of mutually disjoint pairs.

    Circle-method tournament schedule: every pair (p, q) appears exactly
    once per full cycle of rounds, so one cycle is one cyclic Jacobi sweep.
    """
    m = n if n % 2 == 0 else n + 1  # dummy player for odd n
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                pairs.append((a, b) if a < b else (b, a))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi_rotate_all(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi sweeps on a copy of `a`; returns (diagonal, rotations V).

    Sweeps run until every off-diagonal magnitude is at most
    1e-12 * max|a|, capped at _MAX_SWEEPS. Rotations within one tournament
    round act on disjoint planes, so the round is applied as a single
    orthogonal update.
    """
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    scale = float(np.max(np.abs(a)))
    if scale == 0.0 or n == 1:
        return np.diag(A).copy(), V
    thresh = 1e-12 * scale
    schedule = _round_robin_schedule(n)

    for _ in range(_MAX_SWEEPS):
        off = A - np.diag(np.diag(A))
        if np.max(np.abs(off)) <= thresh:
            return np.diag(A).copy(), V
        for pairs in schedule:
            rotated = []
            Q = np.eye(n)
            for p, q in pairs:
                apq = float(A[p, q])
                if abs(apq) <= thresh:
                    continue
                theta = 0.5 * (float(A[q, q]) - float(A[p, p])) / apq
                if theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                Q[p, p] = c
                Q[q, q] = c
                Q[p, q] = s
                Q[q, p] = -s
                rotated.append((p, q))
            if not rotated:
                continue
            A = Q.T @ A @ Q
            V = V @ Q
            for p, q in rotated:
                A[p, q] = 0.0
                A[q, p] = 0.0

    off = A - np.diag(np.diag(A))
    if np.max(np.abs(off)) <= thresh:
        return np.diag(A).copy(), V
    raise NumericalError(
        f"Jacobi did not converge in {_MAX_SWEEPS} sweeps "
        f"(residual {np.max(np.abs(off)):.3e}, threshold {thresh:.3e})"
    )


def eig_sym(s: SupportMatrix) -> Spectrum:
    """Eigendecomposition of a symmetric support matrix.

    Raises ConfigurationError if the input asymmetry exceeds 1e-10 and
    NumericalError if the Jacobi iteration fails to converge.
    """
    a = s.entries
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > 1e-10:
        raise ConfigurationError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    a = 0.5 * (a + a.T)

    eigvals, eigvecs = _jacobi_rotate_all(a)

    # ascending |lambda|, ties by ascending signed value
    order = np.lexsort((eigvals, np.abs(eigvals)))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    # first significant component of each eigenvector is positive
    for i in range(eigvecs.shape[1]):
        col = eigvecs[:, i]
        significant = np.nonzero(np.abs(col) > 1e-12)[0]
        if significant.size and col[significant[0]] < 0.0:
            eigvecs[:, i] = -col

    return Spectrum(eigenvalues=eigvals, eigenvectors=eigvecs)


def gft(spec: Spectrum, x: np.ndarray) -> np.ndarray:
    """Analysis coefficients V^T x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != spec.n:
        raise ShapeError(f"signal has length {x.shape[-1]}, basis is {spec.n}")
    return x @ spec.eigenvectors


def igft(spec: Spectrum, xt: np.ndarray) -> np.ndarray:
    """Synthesis V xt, the inverse of gft."""
    xt = np.asarray(xt, dtype=np.float64)
    if xt.shape[-1] != spec.n:
        raise ShapeError(f"coefficients have length {xt.shape[-1]}, basis is {spec.n}")
    return xt @ spec.eigenvectors.T


def split_subspace(spec: Spectrum, k: int) -> SubspaceSplit:
    """Partition the eigenbasis into the k lowest-magnitude modes and the rest."""
    if not 0 < k < spec.n:
        raise ConfigurationError(f"split index must satisfy 0 < k < {spec.n}, got {k}")
    return SubspaceSplit(
        k=k,
        v_low=spec.eigenvectors[:, :k],
        v_high=spec.eigenvectors[:, k:],
        lambda_low=spec.eigenvalues[:k],
        lambda_high=spec.eigenvalues[k:],
    )


def project_subspace(split: SubspaceSplit, w: np.ndarray, which: str,
                     normalize: bool = False) -> np.ndarray:
    """Project w onto the chosen subspace, optionally normalizing the result.

    which is "low" (span of v_low) or "high" (span of v_high). With
    normalize=True a projection with norm below 1e-12 raises
    DegenerateInputError.
    """
    w = np.asarray(w, dtype=np.float64)
    if which == "low":
        basis = split.v_low
    elif which == "high":
        basis = split.v_high
    else:
        raise ConfigurationError(f"which must be 'low' or 'high', got {which!r}")
    if w.shape[-1] != split.n:
        raise ShapeError(f"signal has length {w.shape[-1]}, basis is {split.n}")
    out = (w @ basis) @ basis.T
    if normalize:
        norm = float(np.linalg.norm(out))
        if norm < 1e-12:
            raise DegenerateInputError(
                f"projection onto the {which} subspace is degenerate (norm {norm:.3e})"
            )
        out = out / norm
    return out
