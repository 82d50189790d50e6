"""Pointwise nonlinearities, single-layer GNN forward map, readout.

The forward map applies a bank of filters to one input signal and passes
each feature through a scalar nonlinearity entrywise. The readout combines
the F features per node with weights shared across nodes (no bias).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConfigurationError, ShapeError
from .filters import FilterBank, SpectralFilter, apply_fir, apply_spectral
from .graphs import SupportMatrix, _frozen
from .spectral import Spectrum

Bank = Union[FilterBank, Sequence[SpectralFilter]]


@dataclass(frozen=True)
class Nonlinearity:
    """Entrywise scalar activation: strictly monotone and Lipschitz.

    kind is "tanh", "identity", or "leaky_rectifier"; slope only applies to
    the leaky rectifier and must lie in (0, 1) so the function stays
    strictly monotone.
    """

    kind: str
    slope: float = 1.0

    def __post_init__(self):
        if self.kind not in ("tanh", "identity", "leaky_rectifier"):
            raise ConfigurationError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "leaky_rectifier" and not 0.0 < self.slope < 1.0:
            raise ConfigurationError(
                f"leaky rectifier slope must be in (0, 1), got {self.slope}"
            )

    @classmethod
    def tanh(cls) -> "Nonlinearity":
        return cls(kind="tanh")

    @classmethod
    def identity(cls) -> "Nonlinearity":
        return cls(kind="identity")

    @classmethod
    def leaky_rectifier(cls, slope: float) -> "Nonlinearity":
        return cls(kind="leaky_rectifier", slope=slope)

    def eval(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "tanh":
            return np.tanh(t)
        if self.kind == "identity":
            return t.copy() if t.ndim else t
        return np.where(t >= 0.0, t, self.slope * t)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "tanh":
            return 1.0 - np.tanh(t) ** 2
        if self.kind == "identity":
            return np.ones_like(t)
        return np.where(t >= 0.0, 1.0, self.slope)

    @property
    def lipschitz_constant(self) -> float:
        return 1.0

    @property
    def strictly_monotone(self) -> bool:
        return True

    def descriptor(self) -> str:
        if self.kind == "leaky_rectifier":
            return f"leaky_rectifier {self.slope:.17g}"
        return self.kind

    @classmethod
    def from_descriptor(cls, text: str) -> "Nonlinearity":
        parts = text.split()
        if parts[0] == "leaky_rectifier":
            return cls.leaky_rectifier(float(parts[1]))
        return cls(kind=parts[0])


@dataclass(frozen=True)
class SingleLayerGnn:
    """A filter bank followed by an entrywise nonlinearity."""

    bank: Bank
    sigma: Nonlinearity

    def __post_init__(self):
        if not isinstance(self.bank, FilterBank):
            object.__setattr__(self, "bank", tuple(self.bank))
            if len(self.bank) == 0:
                raise ConfigurationError("a GNN needs at least one filter")

    @property
    def size(self) -> int:
        return self.bank.size if isinstance(self.bank, FilterBank) else len(self.bank)


@dataclass(frozen=True)
class Readout:
    """Single-tap readout: per-node weighted sum of the F features."""

    weights: np.ndarray  # (F,)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(weights)):
            raise ConfigurationError("readout weights must be finite")
        object.__setattr__(self, "weights", _frozen(weights))


def bank_forward(bank: Bank, s_or_spec, x: np.ndarray) -> np.ndarray:
    """Stack of F filtered signals, shape (F, n); no nonlinearity."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(bank, FilterBank):
        if not isinstance(s_or_spec, SupportMatrix):
            raise ConfigurationError("an FIR bank is applied through a SupportMatrix")
        return np.stack([apply_fir(f, s_or_spec, x) for f in bank.filters])
    if not isinstance(s_or_spec, Spectrum):
        raise ConfigurationError("a spectral bank is applied through a Spectrum")
    return np.stack([apply_spectral(f, s_or_spec, x) for f in bank])


def gnn_forward(gnn: SingleLayerGnn, s_or_spec, x: np.ndarray) -> np.ndarray:
    """sigma applied entrywise to every filtered feature, shape (F, n)."""
    return gnn.sigma.eval(bank_forward(gnn.bank, s_or_spec, x))


def readout_apply(r: Readout, features: np.ndarray) -> np.ndarray:
    """Weighted feature sum per node: sum_f w_f feature_f."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != r.weights.shape[0]:
        raise ShapeError(
            f"{features.shape[0]} features but {r.weights.shape[0]} readout weights"
        )
    return np.tensordot(r.weights, features, axes=(0, 0))


def save_model(bank: FilterBank, readout: Readout, sigma: Nonlinearity, path: str) -> None:
    """Bank text format plus one readout line and one sigma descriptor line."""
    lines = [f"{bank.size} {bank.filters[0].taps.size}"]
    for f in bank.filters:
        lines.append(" ".join(f"{t:.17g}" for t in f.taps))
    lines.append(" ".join(f"{w:.17g}" for w in readout.weights))
    lines.append(sigma.descriptor())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> tuple[FilterBank, Readout, Nonlinearity]:
    """Inverse of save_model."""
    from .filters import FirFilter

    with open(path) as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    n_filters, n_taps = (int(t) for t in lines[0].split())
    filters = tuple(
        FirFilter(np.array([float(t) for t in ln.split()]))
        for ln in lines[1:1 + n_filters]
    )
    if any(f.taps.size != n_taps for f in filters):
        raise ConfigurationError(f"inconsistent tap counts in {path}")
    readout = Readout(np.array([float(t) for t in lines[1 + n_filters].split()]))
    sigma = Nonlinearity.from_descriptor(lines[2 + n_filters])
    return FilterBank(filters=filters), readout, sigma
