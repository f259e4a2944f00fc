"""Command-line interface: align, synth, centrality, and bench subcommands."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .centrality import MEASURES, compute_centrality, select_centrality
from .embedding import TrainConfig
from .align import AlignConfig
from .graphs import (
    load_edgelist,
    load_feature_matrix,
    save_edgelist,
    save_feature_matrix,
    save_mapping,
)
from .harness import (
    PROFILES,
    ExperimentConfig,
    FilePairSpec,
    PipelineSettings,
    SynthPairSpec,
    bench_scaling,
    run_experiment,
)
from .synth import NoiseSpec, er_graph, noisy_copy

SEED_ENV = "NETALIGN_SEED"


def _load_config(path: str | None) -> dict:
    """Read a config file, either JSON or flat key=value lines."""
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    config: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def _cast_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


class _Resolver:
    """CLI flag > config entry > fallback default."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config

    def get(self, key: str, default, cast=None):
        cli = getattr(self.args, key, None)
        if cli is not None:
            return cli
        if key in self.config:
            value = self.config[key]
            if cast is bool:
                return _cast_bool(value)
            return cast(value) if cast else value
        return default

    def seed(self) -> int:
        if self.args.seed is not None:
            return self.args.seed
        env = os.environ.get(SEED_ENV)
        if env is not None:
            return int(env)
        if "seed" in self.config:
            return int(self.config["seed"])
        return 0


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file, JSON or flat key=value")
    p.add_argument("--centrality", choices=("auto",) + MEASURES)
    p.add_argument("--cnfa-dim", dest="cnfa_dim", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--bins", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--raw-dot", dest="raw_dot", action="store_const", const=True)
    p.add_argument("--p", type=float)
    p.add_argument("--acn-eps", dest="acn_eps", type=float)
    p.add_argument("--strict-acn", dest="strict_acn", action="store_const", const=True)
    p.add_argument("--iterations", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--similarity", choices=("acn", "jaccard"))
    p.add_argument("--t", type=float, help="fraction of truth pairs injected as seeds")
    p.add_argument("--profile", choices=tuple(PROFILES))
    p.add_argument("--seed", type=int)


def _settings_from(res: _Resolver) -> PipelineSettings:
    profile = PROFILES[res.get("profile", "desk")]
    acn_eps = res.get("acn_eps", 1.0, float)
    if res.get("strict_acn", False, bool):
        acn_eps = 0.0
    return PipelineSettings(
        centrality=res.get("centrality", "auto"),
        cnfa_dim=res.get("cnfa_dim", 15, int),
        gamma=res.get("gamma", 1.0, float),
        bins=res.get("bins", 10, int),
        train=TrainConfig(
            layers=res.get("layers", 2, int),
            hidden=res.get("hidden", profile["hidden"], int),
            lr=res.get("lr", 0.005, float),
            max_epochs=res.get("epochs", profile["max_epochs"], int),
        ),
        lam=res.get("lam", 0.3, float),
        normalize=not res.get("raw_dot", False, bool),
        align=AlignConfig(
            p=res.get("p", 1.5, float),
            acn_eps=acn_eps,
            iterations=res.get("iterations", 10, int),
            similarity=res.get("similarity", "acn"),
        ),
        pairs=res.get("pairs", None, int),
        seed_fraction=res.get("t", 0.0, float),
        seed=res.seed(),
    )


def _cmd_align(args: argparse.Namespace) -> int:
    res = _Resolver(args, _load_config(args.config))
    settings = _settings_from(res)
    if args.er is not None:
        n, m = args.er
        data = SynthPairSpec(
            n=n,
            m=m,
            edge_noise=res.get("edge_noise", 0.0, float),
            feature_noise=res.get("feature_noise", 0.0, float),
        )
    else:
        source = res.get("source", None)
        target = res.get("target", None)
        if source is None or target is None:
            print("align needs --source and --target (or --er N M)", file=sys.stderr)
            return 2
        data = FilePairSpec(
            source=Path(source),
            target=Path(target),
            source_features=_opt_path(res.get("source_features", None)),
            target_features=_opt_path(res.get("target_features", None)),
            truth=_opt_path(res.get("truth", None)),
            seeds=_opt_path(res.get("seeds", None)),
        )
    cfg = ExperimentConfig(
        data=data,
        settings=settings,
        out=_opt_path(args.out),
        mapping_out=_opt_path(args.mapping_out),
    )
    report = run_experiment(cfg)
    print(report.to_json())
    return 0


def _opt_path(value) -> Path | None:
    return None if value is None else Path(value)


def _cmd_synth(args: argparse.Namespace) -> int:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV, "0"))
    if args.synth_kind == "er":
        g = er_graph(args.n, args.m, seed)
        save_edgelist(g, args.out)
        return 0
    base = load_edgelist(args.input)
    if args.features is not None:
        base = base.with_features(load_feature_matrix(args.features))
    target, truth = noisy_copy(
        base, NoiseSpec(args.edge_noise, args.feature_noise, seed)
    )
    prefix = args.out_prefix
    save_edgelist(base, f"{prefix}.source.edges")
    save_edgelist(target, f"{prefix}.target.edges")
    save_mapping(truth, f"{prefix}.truth.map")
    if target.features is not None:
        save_feature_matrix(target.features, f"{prefix}.target.features.csv")
    return 0


def _cmd_centrality(args: argparse.Namespace) -> int:
    g_s = load_edgelist(args.source)
    g_t = load_edgelist(args.target)
    out = sys.stdout
    out.write("record,network,node,measure,value\n")
    if args.measure is not None:
        vectors = {
            args.measure: (
                compute_centrality(g_s, args.measure),
                compute_centrality(g_t, args.measure),
            )
        }
        scores = {}
    else:
        selection = select_centrality(g_s, g_t, args.gamma, args.bins)
        vectors = selection.all_values
        scores = selection.scores
    for measure, score in scores.items():
        value = "" if score is None else repr(float(score))
        out.write(f"selection_score,both,,{measure},{value}\n")
    for measure, (c_s, c_t) in vectors.items():
        for name, vec in (("s", c_s), ("t", c_t)):
            for node, value in enumerate(vec.values):
                out.write(f"centrality,{name},{node},{measure},{float(value)!r}\n")
    return 0


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for part in text.split(","):
        n, m = part.strip().split(":")
        sizes.append((int(n), int(m)))
    return sizes


def _cmd_bench(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    result = bench_scaling(_parse_sizes(args.sizes), seed)
    if args.out is not None:
        result.write_csv(args.out)
    sys.stdout.write(result.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netalign",
        description="unsupervised network alignment via binned centrality features, "
        "GNN embeddings, and gradual matching",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="run the alignment pipeline")
    p_align.add_argument("--source")
    p_align.add_argument("--target")
    p_align.add_argument("--source-features", dest="source_features")
    p_align.add_argument("--target-features", dest="target_features")
    p_align.add_argument("--truth")
    p_align.add_argument("--seeds", help="file of known pairs used as the initial mapping")
    p_align.add_argument("--er", nargs=2, type=int, metavar=("N", "M"),
                         help="align a synthetic ER graph with its noisy copy")
    p_align.add_argument("--edge-noise", dest="edge_noise", type=float)
    p_align.add_argument("--feature-noise", dest="feature_noise", type=float)
    _add_pipeline_flags(p_align)
    p_align.add_argument("--out", help="report JSON path (CSV side-car written next to it)")
    p_align.add_argument("--mapping-out", dest="mapping_out")
    p_align.set_defaults(func=_cmd_align)

    p_synth = sub.add_parser("synth", help="generate synthetic graphs and pairs")
    synth_sub = p_synth.add_subparsers(dest="synth_kind", required=True)
    p_er = synth_sub.add_parser("er", help="uniform random graph with n nodes and m edges")
    p_er.add_argument("--n", type=int, required=True)
    p_er.add_argument("--m", type=int, required=True)
    p_er.add_argument("--seed", type=int)
    p_er.add_argument("--out", required=True)
    p_copy = synth_sub.add_parser("noisy-copy", help="permuted copy with edge/feature noise")
    p_copy.add_argument("--input", required=True)
    p_copy.add_argument("--features")
    p_copy.add_argument("--edge-noise", dest="edge_noise", type=float, default=0.0)
    p_copy.add_argument("--feature-noise", dest="feature_noise", type=float, default=0.0)
    p_copy.add_argument("--seed", type=int)
    p_copy.add_argument("--out-prefix", dest="out_prefix", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_cent = sub.add_parser("centrality", help="per-node centralities and selection scores")
    p_cent.add_argument("--source", required=True)
    p_cent.add_argument("--target", required=True)
    p_cent.add_argument("--measure", choices=MEASURES)
    p_cent.add_argument("--gamma", type=float, default=1.0)
    p_cent.add_argument("--bins", type=int, default=10)
    p_cent.set_defaults(func=_cmd_centrality)

    p_bench = sub.add_parser("bench", help="runtime scaling over ER sizes")
    p_bench.add_argument("--sizes", required=True, help="comma list of n:m pairs")
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--out", help="CSV output path")
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
