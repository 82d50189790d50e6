"""End-to-end synthetic regression experiment over eigenvalue subspaces.

A replicate draws a geometric graph, adopts its eigenvalue-normalized
Laplacian as the shift operator, generates inputs confined to the low or
high part of the spectrum (or the full space), labels them with the sign of
a random quadratic polynomial in the shift, and trains a linear filter-bank
model and a tanh GNN on identical data from identical initial parameters.
Test errors are aggregated over replicates with normal-approximation 95%
confidence intervals.

Determinism: every replicate derives its RNG streams from
SeedSequence((master_seed, mode_index, graph_index)), and aggregation is an
ordered reduction over replicate indices, so results do not depend on how
many worker processes ran them.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, ShapeError
from .filters import FirFilter, apply_fir, bank_il_constant
from .gnn import Nonlinearity
from .graphs import GeometricGraph, SupportMatrix, generate_geometric_graph, laplacian, normalize_support
from .spectral import SubspaceSplit, eig_sym, split_subspace
from .training import EpochRecord, TrainConfig, TrainableModel, init_model, mse_loss, predict, train

MODES = ("low", "high", "full")
MODE_INDEX = {"low": 0, "high": 1, "full": 2}
MODEL_NAMES = ("filter_bank", "gnn")


@dataclass
class ExperimentConfig:
    """Settings for the subspace regression experiment.

    `k` is the size of the nondiscriminable band: the k largest-magnitude
    eigenvalues sit above the cutoff (the upper quintile at the defaults),
    so the spectrum splits at index n - k. High-subspace inputs live in
    those top k modes; low-subspace inputs in the remaining n - k.
    """

    n: int = 50
    k: int = 10
    neighbors: int = 5
    features: int = 32
    taps: int = 3
    subspace: str = "all"          # low | high | full | all
    train: int = 8000
    val: int = 200
    test: int = 200
    graphs: int = 30
    epochs: int = 40
    batch_size: int = 10
    learning_rate: float = 1e-3
    decay: float = 0.9
    il_weight: float = 0.01
    seed: int = 0

    @property
    def split_index(self) -> int:
        return self.n - self.k

    def validate(self) -> None:
        if not 0 < self.k < self.n:
            raise ConfigurationError(f"need 0 < k < n, got k={self.k}, n={self.n}")
        if self.subspace not in MODES + ("all",):
            raise ConfigurationError(f"unknown subspace {self.subspace!r}")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be nonnegative")
        for name in ("n", "neighbors", "features", "taps", "train", "val",
                     "test", "graphs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")

    def modes(self) -> tuple[str, ...]:
        return MODES if self.subspace == "all" else (self.subspace,)


@dataclass(frozen=True)
class RunMetrics:
    graph_index: int
    subspace: str
    model: str
    test_mse: float
    il_constant: float
    wall_time: float


@dataclass(frozen=True)
class SummaryEntry:
    subspace: str
    model: str
    mean_error: float
    ci_halfwidth: float
    per_graph: tuple[float, ...]


@dataclass(frozen=True)
class AggregateReport:
    summaries: tuple[SummaryEntry, ...]
    runs: tuple[RunMetrics, ...]
    relative_gap: dict[str, float]          # subspace -> filter/gnn - 1
    histories: dict[tuple[str, str, int], list[EpochRecord]] = field(repr=False)


class Dataset(NamedTuple):
    train: tuple[np.ndarray, np.ndarray]
    val: tuple[np.ndarray, np.ndarray]
    test: tuple[np.ndarray, np.ndarray]


def generate_input(split: SubspaceSplit, mode: str,
                   rng: np.random.Generator) -> np.ndarray:
    """Unit-norm Gaussian input confined to the requested subspace."""
    if mode not in MODES:
        raise ConfigurationError(f"unknown input mode {mode!r}")
    for attempt in range(2):
        w = rng.standard_normal(split.n)
        try:
            if mode == "full":
                norm = float(np.linalg.norm(w))
                if norm < 1e-12:
                    raise DegenerateInputError("degenerate full-spectrum draw")
                return w / norm
            basis = split.v_low if mode == "low" else split.v_high
            out = (w @ basis) @ basis.T
            norm = float(np.linalg.norm(out))
            if norm < 1e-12:
                raise DegenerateInputError(f"degenerate {mode} projection")
            return out / norm
        except DegenerateInputError:
            if attempt == 1:
                raise
    raise DegenerateInputError("unreachable")


def generate_target(s_norm: SupportMatrix, x: np.ndarray,
                    c: np.ndarray) -> np.ndarray:
    """sign(c0 x + c1 S x + c2 S^2 x) entrywise, with sign(0) = +1."""
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (3,):
        raise ShapeError(f"expected three coefficients, got shape {c.shape}")
    value = apply_fir(FirFilter(c), s_norm, x)
    return np.where(value >= 0.0, 1.0, -1.0)


def build_dataset(s_norm: SupportMatrix, split: SubspaceSplit, mode: str,
                  counts: tuple[int, int, int], coeffs: np.ndarray,
                  rng: np.random.Generator) -> Dataset:
    """Disjoint train/val/test sets with i.i.d. inputs and shared coefficients."""
    parts = []
    for count in counts:
        x = np.stack([generate_input(split, mode, rng) for _ in range(count)])
        y = generate_target(s_norm, x, coeffs)
        parts.append((x, y))
    return Dataset(train=parts[0], val=parts[1], test=parts[2])


@dataclass(frozen=True)
class ReplicateOutput:
    graph_index: int
    subspace: str
    graph: GeometricGraph
    metrics: tuple[RunMetrics, RunMetrics]
    histories: dict[str, list[EpochRecord]] = field(repr=False)
    models: dict[str, TrainableModel] = field(repr=False)


def run_replicate(config: ExperimentConfig, mode: str, graph_index: int,
                  graph: GeometricGraph | None = None,
                  init_taps: np.ndarray | None = None,
                  init_readout: np.ndarray | None = None) -> ReplicateOutput:
    """One graph replicate: data, both models, test metrics.

    Passing `graph` replaces the generated graph (the RNG streams stay tied
    to the replicate index); init_taps/init_readout warm-start both models.
    """
    root = np.random.SeedSequence((config.seed, MODE_INDEX[mode], graph_index))
    ss_graph, ss_data, ss_init = root.spawn(3)

    if graph is None:
        graph_seed = int(ss_graph.generate_state(1, np.uint64)[0])
        graph = generate_geometric_graph(config.n, config.neighbors, graph_seed)
    elif graph.n != config.n:
        raise ConfigurationError(
            f"loaded graph has {graph.n} nodes, config expects {config.n}"
        )
    s_norm = normalize_support(laplacian(graph))
    split = split_subspace(eig_sym(s_norm), config.split_index)

    data_rng = np.random.default_rng(ss_data)
    coeffs = data_rng.uniform(-1.0, 1.0, size=3)
    dataset = build_dataset(s_norm, split, mode,
                            (config.train, config.val, config.test),
                            coeffs, data_rng)

    init_seed = int(ss_init.generate_state(1, np.uint64)[0])
    train_config = TrainConfig(
        epochs=config.epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        decay=config.decay,
        il_weight=config.il_weight,
        seed=init_seed,
    )

    metrics = []
    histories = {}
    models = {}
    for name in MODEL_NAMES:
        model = init_model(config.features, config.taps, Nonlinearity.tanh(),
                           use_nonlinearity=(name == "gnn"), seed=init_seed)
        if init_taps is not None:
            if init_taps.shape != model.taps.shape:
                raise ShapeError(
                    f"warm-start taps shape {init_taps.shape} != {model.taps.shape}"
                )
            model.taps = init_taps.copy()
        if init_readout is not None:
            if init_readout.shape != model.readout.shape:
                raise ShapeError(
                    f"warm-start readout shape {init_readout.shape} != {model.readout.shape}"
                )
            model.readout = init_readout.copy()

        start = time.perf_counter()
        result = train(model, s_norm, dataset.train, dataset.val, train_config)
        elapsed = time.perf_counter() - start

        test_mse = mse_loss(predict(result.model, s_norm, dataset.test[0]),
                            dataset.test[1])[0]
        metrics.append(RunMetrics(
            graph_index=graph_index,
            subspace=mode,
            model=name,
            test_mse=test_mse,
            il_constant=bank_il_constant(result.model.bank(), 1.0),
            wall_time=elapsed,
        ))
        histories[name] = result.history
        models[name] = result.model

    return ReplicateOutput(
        graph_index=graph_index,
        subspace=mode,
        graph=graph,
        metrics=(metrics[0], metrics[1]),
        histories=histories,
        models=models,
    )


def _replicate_star(args) -> ReplicateOutput:
    return run_replicate(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1,
                   graph: GeometricGraph | None = None,
                   init_taps: np.ndarray | None = None,
                   init_readout: np.ndarray | None = None,
                   keep_outputs: list[ReplicateOutput] | None = None) -> AggregateReport:
    """All replicates for every requested subspace, aggregated.

    A failed replicate aborts the run with its index in the exception
    message. `keep_outputs`, when given, receives every ReplicateOutput in
    order (used by the CLI to save artifacts of the first replicate).
    """
    config.validate()
    if graph is not None and config.graphs != 1:
        raise ConfigurationError("a fixed graph implies exactly one replicate")

    tasks = [(config, mode, g, graph, init_taps, init_readout)
             for mode in config.modes() for g in range(config.graphs)]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outputs = list(pool.map(_replicate_star, tasks))
        else:
            outputs = [_replicate_star(t) for t in tasks]
    except Exception as exc:
        raise RuntimeError(f"a replicate failed: {exc}") from exc

    if keep_outputs is not None:
        keep_outputs.extend(outputs)

    runs: list[RunMetrics] = []
    histories: dict[tuple[str, str, int], list[EpochRecord]] = {}
    for out in outputs:
        runs.extend(out.metrics)
        for name, record in out.histories.items():
            histories[(out.subspace, name, out.graph_index)] = record

    summaries = []
    relative_gap = {}
    for mode in config.modes():
        means = {}
        for name in MODEL_NAMES:
            values = [r.test_mse for r in runs
                      if r.subspace == mode and r.model == name]
            mean = float(np.mean(values))
            if len(values) > 1:
                ci = 1.96 * float(np.std(values, ddof=1)) / np.sqrt(len(values))
            else:
                ci = 0.0
            summaries.append(SummaryEntry(
                subspace=mode, model=name, mean_error=mean,
                ci_halfwidth=ci, per_graph=tuple(values),
            ))
            means[name] = mean
        relative_gap[mode] = means["filter_bank"] / means["gnn"] - 1.0

    return AggregateReport(
        summaries=tuple(summaries),
        runs=tuple(runs),
        relative_gap=relative_gap,
        histories=histories,
    )


def emit_report(report: AggregateReport, out_dir: str) -> list[str]:
    """Write summary.csv, runs.csv, and per-run history CSVs; print a table.

    Returns the list of written paths. Numbers are written with 17
    significant digits so a round-trip parse reproduces them exactly.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "summary.csv")
    lines = ["subspace,model,mean_error,ci_halfwidth,n_graphs"]
    for s in report.summaries:
        lines.append(f"{s.subspace},{s.model},{s.mean_error:.17g},"
                     f"{s.ci_halfwidth:.17g},{len(s.per_graph)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(path)

    path = os.path.join(out_dir, "runs.csv")
    lines = ["subspace,model,graph,test_mse,il_constant,wall_time_s"]
    for r in report.runs:
        lines.append(f"{r.subspace},{r.model},{r.graph_index},"
                     f"{r.test_mse:.17g},{r.il_constant:.17g},{r.wall_time:.6f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(path)

    for (mode, name, g), records in report.histories.items():
        path = os.path.join(out_dir, f"history_{mode}_{name}_g{g}.csv")
        lines = ["epoch,train_loss,val_loss,il_constant,learning_rate"]
        for rec in records:
            lines.append(f"{rec.epoch},{rec.train_loss:.17g},{rec.val_loss:.17g},"
                         f"{rec.il_constant:.17g},{rec.learning_rate:.17g}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(path)

    print(f"{'subspace':<10}{'model':<14}{'mean_error':>14}{'ci_95':>12}{'graphs':>8}")
    for s in report.summaries:
        print(f"{s.subspace:<10}{s.model:<14}{s.mean_error:>14.6f}"
              f"{s.ci_halfwidth:>12.6f}{len(s.per_graph):>8}")
    for mode, gap in report.relative_gap.items():
        print(f"relative gap ({mode}): filter/gnn - 1 = {gap:+.3f}")
    return written
