"""Experiment orchestration: pipeline phases, metrics, reports, scaling bench.

A pipeline run goes centrality -> feature binning -> encoder training ->
embedding similarity -> gradual matching, with wall-clock seconds recorded
per phase (file I/O excluded). Reports serialize to JSON with a CSV
side-car of per-round matching statistics.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .align import AlignConfig, GradualAlignResult, gradual_align
from .centrality import (
    CentralityParams,
    CentralityVector,
    compute_centrality,
    select_centrality,
)
from .embedding import TrainConfig, embedding_similarity, train_gnn
from .features import augment_features
from .graphs import (
    Graph,
    NodeMapping,
    load_edgelist,
    load_feature_matrix,
    load_mapping,
    save_mapping,
)
from .synth import NoiseSpec, er_graph, noisy_copy


class PhaseError(RuntimeError):
    """A pipeline phase failed; carries the phase name and the cause."""

    def __init__(self, phase: str, cause: Exception):
        super().__init__(f"phase {phase!r} failed: {cause}")
        self.phase = phase
        self.cause = cause


def accuracy(mapping: NodeMapping, truth: NodeMapping) -> float:
    """Fraction of ground-truth pairs present in the mapping."""
    if len(truth) == 0:
        raise ValueError("ground truth is empty")
    ref = truth.as_dict()
    correct = sum(1 for u, v in mapping.pairs if ref.get(u) == v)
    return correct / len(truth)


def precision_at_q(s: np.ndarray, truth: NodeMapping, q: int) -> float:
    """Fraction of truth pairs whose similarity ranks in the top q of its row.

    A pair counts as a hit when its value is >= the q-th largest value in
    the row, so ties at the cut are hits.
    """
    n_t = s.shape[1]
    if not (1 <= q <= n_t):
        raise ValueError(f"q must be in [1, {n_t}], got {q}")
    if len(truth) == 0:
        raise ValueError("ground truth is empty")
    hits = 0
    for u, v in truth.pairs:
        row = s[u]
        kth = np.partition(row, n_t - q)[n_t - q]
        if row[v] >= kth:
            hits += 1
    return hits / len(truth)


@dataclass(frozen=True)
class FilePairSpec:
    source: Path
    target: Path
    source_features: Path | None = None
    target_features: Path | None = None
    truth: Path | None = None
    seeds: Path | None = None


@dataclass(frozen=True)
class SynthPairSpec:
    """Base graph (ER or loaded from file) plus the noisy-copy protocol."""

    n: int | None = None
    m: int | None = None
    base_path: Path | None = None
    base_features: Path | None = None
    edge_noise: float = 0.0
    feature_noise: float = 0.0

    def __post_init__(self) -> None:
        from_er = self.n is not None and self.m is not None
        if from_er == (self.base_path is not None):
            raise ValueError("give either n and m, or a base edge-list path")


PROFILES = {
    "desk": {"hidden": 32, "max_epochs": 20},
    "paper": {"hidden": 128, "max_epochs": 200},
}


@dataclass(frozen=True)
class PipelineSettings:
    centrality: str = "auto"
    cnfa_dim: int = 15
    gamma: float = 1.0
    bins: int = 10
    centrality_params: CentralityParams = field(default_factory=CentralityParams)
    train: TrainConfig = field(default_factory=lambda: TrainConfig(hidden=32, max_epochs=20))
    lam: float = 0.3
    normalize: bool = True
    align: AlignConfig = field(default_factory=AlignConfig)
    pairs: int | None = None
    seed_fraction: float = 0.0
    qs: tuple[int, ...] = (5, 10)
    seed: int = 0


@dataclass
class Report:
    selected_centrality: str
    selection_scores: dict[str, float | None] | None
    accuracy: float | None
    precision_at: dict[str, float]
    seeds_injected: int
    mapping_size: int
    pairs_total: int
    per_iteration: list[dict]
    timings: dict[str, float]
    seed: int
    config: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        side = path.with_suffix(".iterations.csv")
        with side.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "new_matched", "new_correct", "cum_matched", "cum_correct"]
            )
            for row in self.per_iteration:
                writer.writerow(
                    [
                        row["iteration"],
                        row["new_matched"],
                        row["new_correct"],
                        row["cum_matched"],
                        row["cum_correct"],
                    ]
                )


@dataclass
class ExperimentConfig:
    data: FilePairSpec | SynthPairSpec
    settings: PipelineSettings = field(default_factory=PipelineSettings)
    out: Path | None = None
    mapping_out: Path | None = None


def _sub_seeds(seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def _phase(timings: dict[str, float], name: str):
    class _Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            timings[name] = timings.get(name, 0.0) + time.perf_counter() - self.start
            if exc is not None and not isinstance(exc, PhaseError):
                raise PhaseError(name, exc) from exc
            return False

    return _Timer()


def run_pipeline(
    g_s: Graph,
    g_t: Graph,
    truth: NodeMapping | None,
    settings: PipelineSettings,
    seeds: NodeMapping | None = None,
) -> tuple[GradualAlignResult, Report]:
    """Run the alignment pipeline on in-memory graphs.

    Supervision seeds come from the explicit seeds mapping if given, else
    from drawing floor(seed_fraction * |truth|) truth pairs. Metrics needing
    truth are None when truth is absent.
    """
    timings: dict[str, float] = {}
    seed_train1, seed_train2, seed_pick = _sub_seeds(settings.seed, 5)[:3]

    with _phase(timings, "centrality"):
        if settings.centrality == "auto":
            selection = select_centrality(
                g_s, g_t, settings.gamma, settings.bins, settings.centrality_params
            )
            c_s, c_t = selection.values_s, selection.values_t
            selected = selection.measure
            scores: dict[str, float | None] | None = selection.scores
        else:
            c_s = compute_centrality(g_s, settings.centrality, settings.centrality_params)
            c_t = compute_centrality(g_t, settings.centrality, settings.centrality_params)
            selected = settings.centrality
            scores = None

    with _phase(timings, "cnfa"):
        aug_s, aug_t = augment_features(c_s, c_t, settings.cnfa_dim)

    with _phase(timings, "training"):
        stack_s = stack_t = None
        if g_s.features is not None and g_t.features is not None:
            _, stack_s, stack_t = train_gnn(
                g_s, g_t, g_s.features, g_t.features, replace(settings.train, seed=seed_train1)
            )
        _, hat_s, hat_t = train_gnn(
            g_s, g_t, aug_s.matrix, aug_t.matrix, replace(settings.train, seed=seed_train2)
        )

    with _phase(timings, "similarity"):
        s_emb = embedding_similarity(
            stack_s, stack_t, hat_s, hat_t, settings.lam, settings.normalize
        )

    with _phase(timings, "matching"):
        if seeds is None:
            picked: list[tuple[int, int]] = []
            if settings.seed_fraction > 0.0:
                if truth is None:
                    raise ValueError("seed_fraction needs ground truth to draw seeds from")
                k = math.floor(settings.seed_fraction * len(truth))
                if k:
                    rng = np.random.default_rng(seed_pick)
                    idx = rng.choice(len(truth), size=k, replace=False)
                    picked = [truth.pairs[i] for i in sorted(idx)]
            seeds = NodeMapping(picked)
        if settings.pairs is not None:
            pairs_total = settings.pairs
        elif truth is not None:
            pairs_total = len(truth) - len(seeds)
        else:
            pairs_total = min(g_s.node_count, g_t.node_count) - len(seeds)
        result = gradual_align(g_s, g_t, s_emb, seeds, pairs_total, settings.align)

    acc = None
    per_iteration: list[dict] = []
    precision: dict[str, float] = {}
    ref = truth.as_dict() if truth is not None else None
    if truth is not None:
        acc = accuracy(result.mapping, truth)
        for q in settings.qs:
            if 1 <= q <= g_t.node_count:
                precision[str(q)] = precision_at_q(result.final_similarity, truth, q)
    cum_matched = len(seeds)
    if ref is not None:
        cum_correct = sum(1 for u, v in seeds.pairs if ref.get(u) == v)
    else:
        cum_correct = 0
    for i, batch in enumerate(result.iteration_pairs, start=1):
        new_correct = (
            sum(1 for u, v in batch if ref.get(u) == v) if ref is not None else None
        )
        cum_matched += len(batch)
        if new_correct is not None:
            cum_correct += new_correct
        per_iteration.append(
            {
                "iteration": i,
                "new_matched": len(batch),
                "new_correct": new_correct,
                "cum_matched": cum_matched,
                "cum_correct": cum_correct if ref is not None else None,
            }
        )

    report = Report(
        selected_centrality=selected,
        selection_scores=scores,
        accuracy=acc,
        precision_at=precision,
        seeds_injected=len(seeds),
        mapping_size=len(result.mapping),
        pairs_total=pairs_total,
        per_iteration=per_iteration,
        timings=timings,
        seed=settings.seed,
        config=asdict(settings),
    )
    return result, report


def _load_pair(
    data: FilePairSpec | SynthPairSpec, seed: int
) -> tuple[Graph, Graph, NodeMapping | None, NodeMapping | None]:
    if isinstance(data, FilePairSpec):
        g_s = load_edgelist(data.source)
        g_t = load_edgelist(data.target)
        if data.source_features is not None:
            g_s = g_s.with_features(load_feature_matrix(data.source_features))
        if data.target_features is not None:
            g_t = g_t.with_features(load_feature_matrix(data.target_features))
        truth = load_mapping(data.truth) if data.truth is not None else None
        seeds = load_mapping(data.seeds) if data.seeds is not None else None
        return g_s, g_t, truth, seeds
    seed_er, seed_noise = _sub_seeds(seed, 5)[3:]
    if data.base_path is not None:
        base = load_edgelist(data.base_path)
        if data.base_features is not None:
            base = base.with_features(load_feature_matrix(data.base_features))
    else:
        base = er_graph(data.n, data.m, seed_er)
    target, truth = noisy_copy(
        base, NoiseSpec(data.edge_noise, data.feature_noise, seed_noise)
    )
    return base, target, truth, None


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Load or synthesize the pair, run the pipeline, write outputs."""
    g_s, g_t, truth, seeds = _load_pair(cfg.data, cfg.settings.seed)
    result, report = run_pipeline(g_s, g_t, truth, cfg.settings, seeds)
    if cfg.out is not None:
        report.write(cfg.out)
    if cfg.mapping_out is not None:
        save_mapping(result.mapping, cfg.mapping_out)
    return report


BENCH_PHASES = ("centrality", "cnfa", "training", "similarity", "matching")


@dataclass
class BenchRow:
    n: int
    m: int
    seconds: float
    phase_seconds: dict[str, float]
    accuracy: float | None


@dataclass
class BenchResult:
    rows: list[BenchRow]
    slope: float | None

    def to_csv(self) -> str:
        lines = ["n,m,seconds," + ",".join(BENCH_PHASES)]
        for row in self.rows:
            phases = ",".join(f"{row.phase_seconds.get(p, 0.0):.6f}" for p in BENCH_PHASES)
            lines.append(f"{row.n},{row.m},{row.seconds:.6f},{phases}")
        if self.slope is not None:
            lines.append(f"# slope {self.slope:.4f}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def bench_settings(seed: int = 0) -> PipelineSettings:
    """Fixed small configuration used for runtime scaling measurements.

    Degree centrality keeps the measure phase linear in the edge count; the
    encoder is the desk-size one with a short epoch budget.
    """
    return PipelineSettings(
        centrality="degree",
        train=TrainConfig(hidden=32, max_epochs=10),
        seed=seed,
    )


def bench_scaling(
    sizes: Sequence[tuple[int, int]], seed: int = 0
) -> BenchResult:
    """Time the pipeline on identical ER pairs of growing size.

    Each size (n, m) aligns a fresh ER graph with an identical copy of
    itself (identity ground truth). Graph generation is not timed. With two
    or more sizes the log-log slope of total seconds versus m is fitted by
    least squares.
    """
    if not sizes:
        raise ValueError("at least one size is required")
    rows: list[BenchRow] = []
    for i, (n, m) in enumerate(sizes):
        g = er_graph(n, m, seed + i)
        truth = NodeMapping([(u, u) for u in range(n)])
        _, report = run_pipeline(g, g.copy(), truth, bench_settings(seed + i))
        total = sum(report.timings.values())
        rows.append(BenchRow(n, m, total, dict(report.timings), report.accuracy))
    slope = None
    if len(rows) >= 2:
        xs = np.log([row.m for row in rows])
        ys = np.log([max(row.seconds, 1e-9) for row in rows])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return BenchResult(rows, slope)
