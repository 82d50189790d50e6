"""Nondiscriminable-set membership, secant analysis, and randomized verifiers.

Two signals are nondiscriminable relative to a split when their difference
carries no energy on the k protected (low-magnitude) modes. Three nested
views of that idea are implemented:

  in_nul_vk:     the difference x - y itself has no low-mode energy
  pair_in_d_h:   no filtered difference H^f x - H^f y has low-mode energy
  pair_in_d_phi: no activated difference sigma(H^f x) - sigma(H^f y) has
                 low-mode energy

All membership tests are relative: a residual counts as zero when it is at
most tol * max(||x - y||, 1e-30). By linearity the first two views must
agree whenever every filter is nonzero on the protected modes; pair_in_d_h
computes both and raises NumericalError if they ever disagree, since that
signals a numerical bug rather than a modelling fact.

The verifiers draw randomized trials and check, statement by statement:

  verify_theorem1:         discriminable pairs stay discriminable after the
                           nonlinearity when one filter is exactly zero on
                           the unprotected modes
  verify_theorem2_forward: for pairs the bank cannot discriminate, GNN
                           nondiscriminability coincides with the secants
                           of the nonlinearity being constant across nodes
  verify_corollary1:       with an all-zero-high bank the two verdicts are
                           identical on every pair
  verify_corollary2:       with tanh and more than one unprotected mode the
                           GNN verdict set is strictly smaller, and the
                           per-node secant equations admit no consistent
                           solution (overdetermined-system probe)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, NumericalError, ShapeError
from .filters import SpectralFilter, freq_response, zero_high_response
from .gnn import Bank, Nonlinearity, SingleLayerGnn, bank_forward
from .spectral import Spectrum, SubspaceSplit

SCALE_FLOOR = 1e-30
SECANT_EQUAL_POINTS = 1e-12   # |x_i - y_i| below this uses the derivative
FIR_ZERO_HIGH_TOL = 1e-10
DEFAULT_TOL = 1e-8
DEFAULT_SECANT_TOL = 1e-9


@dataclass(frozen=True)
class PairVerdict:
    """Membership evidence for one (x, y) pair."""

    in_d_h: bool
    in_d_phi: bool
    residual_low_filter: float  # Frobenius over filters of ||V_low^T (H^f x - H^f y)||
    residual_low_gnn: float     # same, after the nonlinearity
    tolerance_used: float


@dataclass(frozen=True)
class SecantReport:
    """Per-filter secants of the nonlinearity between the two filter outputs."""

    secants: np.ndarray               # (F, n)
    max_deviation: np.ndarray         # (F,) max_i |b_i - mean_i b_i|
    high_response_nonzero: np.ndarray  # (F,) bool


@dataclass(frozen=True)
class TrialRow:
    """One verifier trial, in the layout of the exported CSV."""

    trial: int
    in_d_h: bool
    in_d_phi: bool
    residual_low_filter: float
    residual_low_gnn: float
    max_secant_deviation: float


def _pair_scale(x: np.ndarray, y: np.ndarray) -> float:
    return max(float(np.linalg.norm(x - y)), SCALE_FLOOR)


def in_nul_vk(split: SubspaceSplit, d: np.ndarray, tol: float) -> tuple[bool, float]:
    """Whether d carries no low-mode energy; returns (flag, residual)."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (split.n,):
        raise ShapeError(f"signal has shape {d.shape}, expected ({split.n},)")
    if tol <= 0:
        raise ConfigurationError(f"tol must be positive, got {tol}")
    residual = float(np.linalg.norm(split.v_low.T @ d))
    flag = residual <= tol * max(float(np.linalg.norm(d)), SCALE_FLOOR)
    return flag, residual


def _low_residuals(split: SubspaceSplit, features_x: np.ndarray,
                   features_y: np.ndarray) -> np.ndarray:
    """Per-filter low-mode residuals ||V_low^T (f_x - f_y)||, shape (F,)."""
    diff = features_x - features_y          # (F, n)
    return np.linalg.norm(diff @ split.v_low, axis=1)


def _bank_outputs(bank: Bank, s_or_spec, x: np.ndarray) -> np.ndarray:
    """Filter the signal through whichever representation was supplied."""
    if isinstance(s_or_spec, Spectrum):
        return _filter_outputs(bank, s_or_spec, x)
    return bank_forward(bank, s_or_spec, x)


def pair_in_d_h(split: SubspaceSplit, bank: Bank, s_or_spec, x: np.ndarray,
                y: np.ndarray, tol: float) -> tuple[bool, float]:
    """Whether the bank cannot discriminate x from y; returns (flag, residual).

    The direct test on x - y is evaluated alongside the filtered test; the
    two must agree by linearity, and a disagreement raises NumericalError.
    The returned residual aggregates the per-filter residuals
    Frobenius-style.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scale = _pair_scale(x, y)

    fx = _bank_outputs(bank, s_or_spec, x)
    fy = _bank_outputs(bank, s_or_spec, y)
    residuals = _low_residuals(split, fx, fy)
    filtered_flag = bool(np.all(residuals <= tol * scale))

    direct_flag, _ = in_nul_vk(split, x - y, tol)
    if direct_flag != filtered_flag:
        raise NumericalError(
            "direct and filtered nondiscriminability verdicts disagree "
            f"(direct={direct_flag}, filtered={filtered_flag}); this indicates "
            "a numerical bug or a bank that vanishes on a protected mode"
        )
    return filtered_flag, float(np.linalg.norm(residuals))


def pair_in_d_phi(split: SubspaceSplit, gnn: SingleLayerGnn, s_or_spec,
                  x: np.ndarray, y: np.ndarray, tol: float) -> PairVerdict:
    """Full membership verdict for one pair under the GNN."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scale = _pair_scale(x, y)

    in_d_h_flag, residual_filter = pair_in_d_h(split, gnn.bank, s_or_spec, x, y, tol)
    gx = gnn.sigma.eval(_bank_outputs(gnn.bank, s_or_spec, x))
    gy = gnn.sigma.eval(_bank_outputs(gnn.bank, s_or_spec, y))
    residuals = _low_residuals(split, gx, gy)
    in_d_phi_flag = bool(np.all(residuals <= tol * scale))
    return PairVerdict(
        in_d_h=in_d_h_flag,
        in_d_phi=in_d_phi_flag,
        residual_low_filter=residual_filter,
        residual_low_gnn=float(np.linalg.norm(residuals)),
        tolerance_used=tol,
    )


def sample_pair_in_d_h(split: SubspaceSplit, rng: np.random.Generator,
                       scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """A pair that is nondiscriminable by construction.

    x is standard normal and y adds a high-subspace perturbation with
    coefficients scale * standard normal.
    """
    if split.v_high.shape[1] < 1:
        raise ConfigurationError("the split has no high subspace to perturb in")
    x = rng.standard_normal(split.n)
    delta = scale * rng.standard_normal(split.v_high.shape[1])
    y = x + split.v_high @ delta
    return x, y


def _filter_outputs(bank: Bank, spec: Spectrum, x: np.ndarray) -> np.ndarray:
    """Per-filter outputs through the eigenbasis, shape (F, n).

    FIR filters are evaluated via their frequency response on the spectrum,
    which matches the shift-domain path to working precision and keeps this
    module independent of the support matrix. Mixed banks are fine; each
    filter dispatches on its own type.
    """
    xt = x @ spec.eigenvectors
    rows = []
    for f in _bank_items(bank):
        gains = f.response if isinstance(f, SpectralFilter) else \
            freq_response(f, spec.eigenvalues)
        rows.append((xt * gains) @ spec.eigenvectors.T)
    return np.stack(rows)


def _high_response_flags(bank: Bank, spec: Spectrum, k: int) -> np.ndarray:
    """Which filters respond above the index-k cutoff."""
    flags = []
    for f in _bank_items(bank):
        if isinstance(f, SpectralFilter):
            flags.append(bool(np.any(f.response[k:] != 0.0)))
        else:
            flags.append(bool(np.any(np.abs(freq_response(f, spec.eigenvalues[k:]))
                                     > FIR_ZERO_HIGH_TOL)))
    return np.array(flags, dtype=bool)


def secant_report(gnn: SingleLayerGnn, spec: Spectrum, x: np.ndarray,
                  y: np.ndarray, cutoff_k: int) -> SecantReport:
    """Secants of the nonlinearity between the two filter outputs, per node.

    Where the two outputs coincide (within 1e-12) the derivative replaces
    the secant.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    fx = _filter_outputs(gnn.bank, spec, x)
    fy = _filter_outputs(gnn.bank, spec, y)
    diff = fx - fy
    equal = np.abs(diff) < SECANT_EQUAL_POINTS
    safe = np.where(equal, 1.0, diff)
    secants = np.where(
        equal,
        gnn.sigma.derivative(fx),
        (gnn.sigma.eval(fx) - gnn.sigma.eval(fy)) / safe,
    )
    max_dev = np.max(np.abs(secants - secants.mean(axis=1, keepdims=True)), axis=1)
    return SecantReport(
        secants=secants,
        max_deviation=max_dev,
        high_response_nonzero=_high_response_flags(gnn.bank, spec, cutoff_k),
    )


# ---------------------------------------------------------------------------
# constructions used by the verifiers
# ---------------------------------------------------------------------------

def verifier_gnn(spec: Spectrum, k: int, sigma: Nonlinearity,
                 full_band_filters: int = 1,
                 rng: np.random.Generator | None = None) -> SingleLayerGnn:
    """Spectral-bank GNN with the shape the theorems hypothesize.

    The first filter is exactly zero above the index-k cutoff with unit
    gains below; each additional filter has random positive low gains and a
    constant unit gain above the cutoff.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    filters = [zero_high_response(spec, k, np.ones(k))]
    for _ in range(full_band_filters):
        response = np.ones(spec.n)
        response[:k] = rng.uniform(0.5, 1.5, size=k)
        filters.append(SpectralFilter(response=response))
    return SingleLayerGnn(bank=tuple(filters), sigma=sigma)


def all_zero_high_gnn(spec: Spectrum, k: int, sigma: Nonlinearity,
                      n_filters: int = 2,
                      rng: np.random.Generator | None = None) -> SingleLayerGnn:
    """GNN whose every filter is exactly zero above the index-k cutoff."""
    if rng is None:
        rng = np.random.default_rng(0)
    filters = [zero_high_response(spec, k, np.ones(k))]
    for _ in range(n_filters - 1):
        filters.append(zero_high_response(spec, k, rng.uniform(0.5, 1.5, size=k)))
    return SingleLayerGnn(bank=tuple(filters), sigma=sigma)


def constant_secant_pair(split: SubspaceSplit, gnn: SingleLayerGnn, spec: Spectrum,
                         rng: np.random.Generator, scale: float = 1.0,
                         margin: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """A bank-nondiscriminable pair whose filter outputs are all positive.

    Both signals are shifted along the lowest eigenvector until every filter
    output entry of both exceeds `margin`, so a piecewise-linear activation
    operates in its unit-slope region and the secants are constant by
    construction. The shift leaves x - y untouched.
    """
    v1 = spec.eigenvectors[:, 0]
    if float(np.min(v1)) <= 1e-8:
        raise ConfigurationError(
            "the lowest eigenvector must be entrywise positive for the "
            "all-positive construction (is the graph connected?)"
        )
    gains_v1 = []
    bank = gnn.bank
    items = bank.filters if hasattr(bank, "filters") else bank
    for f in items:
        if isinstance(f, SpectralFilter):
            gains_v1.append(float(f.response[0]))
        else:
            gains_v1.append(float(freq_response(f, spec.eigenvalues[0])))
    if min(gains_v1) <= 1e-12:
        raise ConfigurationError(
            "every filter needs a positive gain on the lowest mode to "
            "shift its output positive"
        )

    x0, y0 = sample_pair_in_d_h(split, rng, scale)
    fx = _filter_outputs(bank, spec, x0)
    fy = _filter_outputs(bank, spec, y0)
    v1_min = float(np.min(v1))
    shift = 0.0
    for gain, ax, ay in zip(gains_v1, fx, fy):
        lowest = float(min(ax.min(), ay.min()))
        shift = max(shift, (margin - lowest) / (gain * v1_min))
    return x0 + shift * v1, y0 + shift * v1


def _require_zero_high(f, spec: Spectrum, k: int, role: str) -> None:
    """Check a filter is (exactly or numerically) zero above the cutoff."""
    if isinstance(f, SpectralFilter):
        if np.any(f.response[k:] != 0.0):
            raise ConfigurationError(f"{role} must be exactly zero above the cutoff")
    else:
        high = np.abs(freq_response(f, spec.eigenvalues[k:]))
        if np.any(high > FIR_ZERO_HIGH_TOL):
            raise ConfigurationError(
                f"{role} must vanish above the cutoff; max response there "
                f"is {float(np.max(high)):.3e}"
            )
        warnings.warn(
            f"{role} is an FIR filter; its response above the cutoff is only "
            f"numerically zero (max {float(np.max(high)):.3e})",
            stacklevel=3,
        )


def _bank_items(bank: Bank):
    return bank.filters if hasattr(bank, "filters") else bank


# ---------------------------------------------------------------------------
# randomized statement verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Theorem1Report:
    trials: int
    counterexamples: int
    rows: list[TrialRow] = field(repr=False)


@dataclass(frozen=True)
class Theorem2Report:
    trials: int
    agreements: int
    agreement_rate: float
    discriminated: int     # trials with in_d_phi false
    worst_margin: float    # smallest observed distance to a decision threshold
    rows: list[TrialRow] = field(repr=False)


@dataclass(frozen=True)
class Corollary1Report:
    trials: int
    verdict_mismatches: int
    rows: list[TrialRow] = field(repr=False)


@dataclass(frozen=True)
class Corollary2Report:
    trials: int
    subset_violations: int
    strictness_witnesses: int
    probe_draws: int
    probe_above_threshold: int   # residual > 1e-6
    probe_residuals: np.ndarray
    rows: list[TrialRow] = field(repr=False)


def _sample_pair_not_in_d_h(split: SubspaceSplit, rng: np.random.Generator,
                            tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Rejection-sample a pair whose difference has low-mode energy."""
    for _ in range(100):
        x = rng.standard_normal(split.n)
        y = rng.standard_normal(split.n)
        flag, _ = in_nul_vk(split, x - y, tol)
        if not flag:
            return x, y
    raise NumericalError("could not sample a discriminable pair in 100 tries")


def verify_theorem1(spec: Spectrum, split: SubspaceSplit, bank: Bank,
                    sigma: Nonlinearity, trials: int, rng: np.random.Generator,
                    tol: float = DEFAULT_TOL) -> Theorem1Report:
    """Sample pairs the bank discriminates; count any the GNN does not.

    Requires the first filter of the bank to vanish above the cutoff and a
    strictly monotone Lipschitz nonlinearity. The expected counterexample
    count is zero.
    """
    items = _bank_items(bank)
    _require_zero_high(items[0], spec, split.k, "the first filter")
    if not sigma.strictly_monotone:
        raise ConfigurationError("the nonlinearity must be strictly monotone")
    gnn = SingleLayerGnn(bank=bank, sigma=sigma)

    rows = []
    counterexamples = 0
    for trial in range(trials):
        x, y = _sample_pair_not_in_d_h(split, rng, tol)
        verdict = pair_in_d_phi(split, gnn, spec, x, y, tol)
        srep = secant_report(gnn, spec, x, y, split.k)
        if verdict.in_d_phi:
            counterexamples += 1
        rows.append(TrialRow(
            trial=trial,
            in_d_h=verdict.in_d_h,
            in_d_phi=verdict.in_d_phi,
            residual_low_filter=verdict.residual_low_filter,
            residual_low_gnn=verdict.residual_low_gnn,
            max_secant_deviation=float(np.max(srep.max_deviation)),
        ))
    return Theorem1Report(trials=trials, counterexamples=counterexamples, rows=rows)


def verify_theorem2_forward(spec: Spectrum, split: SubspaceSplit,
                            gnn: SingleLayerGnn, trials: int,
                            rng: np.random.Generator,
                            tol: float = DEFAULT_TOL,
                            tol_secant: float = DEFAULT_SECANT_TOL) -> Theorem2Report:
    """Check the constant-secant biconditional on bank-nondiscriminable pairs.

    For each sampled pair the GNN verdict must coincide with the secants
    being constant across nodes for every filter that responds above the
    cutoff. Reports the agreement rate and the worst margin by which a
    trial cleared its decision thresholds.
    """
    items = _bank_items(gnn.bank)
    if len(items) < 2:
        raise ConfigurationError("the biconditional needs at least two filters")
    _require_zero_high(items[0], spec, split.k, "the first filter")

    rows = []
    agreements = 0
    discriminated = 0
    worst_margin = math.inf
    for trial in range(trials):
        x, y = sample_pair_in_d_h(split, rng)
        verdict = pair_in_d_phi(split, gnn, spec, x, y, tol)
        srep = secant_report(gnn, spec, x, y, split.k)
        considered = srep.max_deviation[srep.high_response_nonzero]
        constant = bool(np.all(considered <= tol_secant)) if considered.size else True
        if verdict.in_d_phi == constant:
            agreements += 1
        if not verdict.in_d_phi:
            discriminated += 1

        scale = _pair_scale(x, y)
        margin_phi = abs(verdict.residual_low_gnn / scale - tol)
        margin_sec = (float(np.min(np.abs(considered - tol_secant)))
                      if considered.size else math.inf)
        worst_margin = min(worst_margin, margin_phi, margin_sec)
        rows.append(TrialRow(
            trial=trial,
            in_d_h=verdict.in_d_h,
            in_d_phi=verdict.in_d_phi,
            residual_low_filter=verdict.residual_low_filter,
            residual_low_gnn=verdict.residual_low_gnn,
            max_secant_deviation=float(np.max(srep.max_deviation)),
        ))
    return Theorem2Report(
        trials=trials,
        agreements=agreements,
        agreement_rate=agreements / trials if trials else 1.0,
        discriminated=discriminated,
        worst_margin=worst_margin,
        rows=rows,
    )


def verify_corollary1(spec: Spectrum, split: SubspaceSplit, bank: Bank,
                      sigma: Nonlinearity, trials: int,
                      rng: np.random.Generator,
                      tol: float = DEFAULT_TOL) -> Corollary1Report:
    """With an all-zero-high bank the two verdicts must agree on every pair.

    Trials alternate between pairs inside the bank-nondiscriminable set,
    generic pairs outside it, and identical pairs.
    """
    items = _bank_items(bank)
    for idx, f in enumerate(items):
        _require_zero_high(f, spec, split.k, f"filter {idx}")
    gnn = SingleLayerGnn(bank=bank, sigma=sigma)

    rows = []
    mismatches = 0
    for trial in range(trials):
        mode = trial % 3
        if mode == 0:
            x, y = sample_pair_in_d_h(split, rng)
        elif mode == 1:
            x, y = _sample_pair_not_in_d_h(split, rng, tol)
        else:
            x = rng.standard_normal(split.n)
            y = x.copy()
        verdict = pair_in_d_phi(split, gnn, spec, x, y, tol)
        srep = secant_report(gnn, spec, x, y, split.k)
        if verdict.in_d_h != verdict.in_d_phi:
            mismatches += 1
        rows.append(TrialRow(
            trial=trial,
            in_d_h=verdict.in_d_h,
            in_d_phi=verdict.in_d_phi,
            residual_low_filter=verdict.residual_low_filter,
            residual_low_gnn=verdict.residual_low_gnn,
            max_secant_deviation=float(np.max(srep.max_deviation)),
        ))
    return Corollary1Report(trials=trials, verdict_mismatches=mismatches, rows=rows)


def _tanh_secant_offset(a: float, b: float) -> float | None:
    """Nonzero e with tanh(a) - tanh(a - e) = b * e, or None if none exists.

    a is a filter output at one node and b the prescribed secant. The
    trivial root e = 0 is excluded; the search brackets sign changes of the
    defect on a symmetric grid sized from |e| <= 2/b.
    """
    extent = 2.0 / b + 1.0
    grid = np.linspace(-extent, extent, 8001)
    g = math.tanh(a) - np.tanh(a - grid) - b * grid
    signs = np.sign(g)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    zero_cell = int(np.searchsorted(grid, 0.0)) - 1
    for idx in flips:
        if idx == zero_cell:
            continue  # brackets the trivial root
        lo, hi = grid[idx], grid[idx + 1]
        root = brentq(lambda e: math.tanh(a) - math.tanh(a - e) - b * e, lo, hi)
        if abs(root) > 1e-9:
            return float(root)
    return None


def overdetermined_probe(spec: Spectrum, split: SubspaceSplit,
                         gnn: SingleLayerGnn, rng: np.random.Generator) -> float:
    """Residual of the constant-secant system for one random draw.

    Draws a random signal and a random secant b in (0, 1), inverts the
    per-node secant equation of tanh at the outputs of the first filter
    that responds above the cutoff, and solves the resulting system (one
    equation per node, one unknown per unprotected mode) by normal
    equations. Returns the residual norm, or inf when some node admits no
    nonzero offset at all, which rules out a constant-secant signal even
    more directly.
    """
    flags = _high_response_flags(gnn.bank, spec, split.k)
    if not np.any(flags):
        raise ConfigurationError("the probe needs a filter with nonzero high response")
    f_idx = int(np.argmax(flags))

    x = rng.standard_normal(split.n)
    b = float(rng.uniform(0.0, 1.0))
    outputs = _filter_outputs(gnn.bank, spec, x)[f_idx]

    targets = np.empty(split.n)
    for i, a in enumerate(outputs):
        root = _tanh_secant_offset(float(a), b)
        if root is None:
            return math.inf
        targets[i] = root

    basis = split.v_high                              # (n, n-k)
    gram = basis.T @ basis
    delta = np.linalg.solve(gram, basis.T @ targets)  # normal equations
    return float(np.linalg.norm(basis @ delta - targets))


def verify_corollary2(spec: Spectrum, split: SubspaceSplit,
                      gnn: SingleLayerGnn, trials: int,
                      rng: np.random.Generator,
                      tol: float = DEFAULT_TOL,
                      probe_draws: int = 100) -> Corollary2Report:
    """Strict inclusion of the GNN verdict set under tanh.

    (a) no sampled pair is GNN-nondiscriminable without being
    bank-nondiscriminable, (b) at least one bank-nondiscriminable pair is
    discriminated by the GNN, and (c) the overdetermined constant-secant
    system has residual bounded away from zero on random draws.
    """
    if split.v_high.shape[1] <= 1:
        raise ConfigurationError("the corollary needs more than one unprotected mode")
    if gnn.sigma.kind != "tanh":
        raise ConfigurationError("the corollary is specific to tanh")
    if not np.any(_high_response_flags(gnn.bank, spec, split.k)):
        raise ConfigurationError("need at least one filter with nonzero high response")

    rows = []
    subset_violations = 0
    witnesses = 0
    for trial in range(trials):
        mode = trial % 3
        if mode == 2:
            x = rng.standard_normal(split.n)
            y = x.copy()
        elif mode == 1:
            x, y = _sample_pair_not_in_d_h(split, rng, tol)
        else:
            x, y = sample_pair_in_d_h(split, rng)
        verdict = pair_in_d_phi(split, gnn, spec, x, y, tol)
        srep = secant_report(gnn, spec, x, y, split.k)
        if verdict.in_d_phi and not verdict.in_d_h:
            subset_violations += 1
        if verdict.in_d_h and not verdict.in_d_phi:
            witnesses += 1
        rows.append(TrialRow(
            trial=trial,
            in_d_h=verdict.in_d_h,
            in_d_phi=verdict.in_d_phi,
            residual_low_filter=verdict.residual_low_filter,
            residual_low_gnn=verdict.residual_low_gnn,
            max_secant_deviation=float(np.max(srep.max_deviation)),
        ))

    residuals = np.array([overdetermined_probe(spec, split, gnn, rng)
                          for _ in range(probe_draws)])
    return Corollary2Report(
        trials=trials,
        subset_violations=subset_violations,
        strictness_witnesses=witnesses,
        probe_draws=probe_draws,
        probe_above_threshold=int(np.sum(residuals > 1e-6)),
        probe_residuals=residuals,
        rows=rows,
    )


def write_trial_csv(rows: list[TrialRow], path: str) -> None:
    """Machine-readable trial log, one row per trial."""
    lines = ["trial,in_d_h,in_d_phi,residual_low_filter,residual_low_gnn,"
             "max_secant_deviation"]
    for r in rows:
        lines.append(
            f"{r.trial},{int(r.in_d_h)},{int(r.in_d_phi)},"
            f"{r.residual_low_filter:.17g},{r.residual_low_gnn:.17g},"
            f"{r.max_secant_deviation:.17g}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
