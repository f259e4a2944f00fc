import json

import numpy as np
import pytest

from netalign.align import AlignConfig
from netalign.embedding import TrainConfig
from netalign.graphs import (
    NodeMapping,
    load_mapping,
    save_edgelist,
    save_feature_matrix,
    save_mapping,
)
from netalign.harness import (
    BENCH_PHASES,
    ExperimentConfig,
    FilePairSpec,
    PhaseError,
    PipelineSettings,
    SynthPairSpec,
    accuracy,
    bench_scaling,
    precision_at_q,
    run_experiment,
    run_pipeline,
)
from netalign.synth import NoiseSpec, er_graph, noisy_copy

FAST_TRAIN = TrainConfig(hidden=8, max_epochs=5)


def fast_settings(**kw):
    kw.setdefault("centrality", "degree")
    kw.setdefault("train", FAST_TRAIN)
    return PipelineSettings(**kw)


class TestAccuracy:
    def test_perfect(self):
        truth = NodeMapping([(0, 1), (1, 0)])
        assert accuracy(truth, truth) == 1.0

    def test_partial(self):
        truth = NodeMapping([(0, 0), (1, 1), (2, 2), (3, 3)])
        got = NodeMapping([(0, 0), (1, 2), (2, 1), (3, 3)])
        assert accuracy(got, truth) == 0.5

    def test_extra_pairs_do_not_count(self):
        truth = NodeMapping([(0, 0)])
        got = NodeMapping([(0, 0), (1, 1), (2, 2)])
        assert accuracy(got, truth) == 1.0

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError):
            accuracy(NodeMapping([]), NodeMapping([]))


class TestPrecisionAtQ:
    S = np.array([[0.9, 0.1, 0.0], [0.2, 0.8, 0.0], [0.3, 0.3, 0.4]])

    def test_top1(self):
        truth = NodeMapping([(0, 0), (1, 1), (2, 2)])
        assert precision_at_q(self.S, truth, 1) == 1.0

    def test_rank_two_needs_q_two(self):
        truth = NodeMapping([(0, 1), (1, 0)])
        assert precision_at_q(self.S, truth, 1) == 0.0
        assert precision_at_q(self.S, truth, 2) == 1.0

    def test_ties_at_cut_are_hits(self):
        s = np.array([[0.5, 0.5]])
        truth = NodeMapping([(0, 1)])
        assert precision_at_q(s, truth, 1) == 1.0

    def test_q_equal_to_width_is_one(self):
        truth = NodeMapping([(0, 2), (1, 0), (2, 1)])
        assert precision_at_q(self.S, truth, 3) == 1.0

    def test_q_bounds(self):
        truth = NodeMapping([(0, 0)])
        with pytest.raises(ValueError):
            precision_at_q(self.S, truth, 0)
        with pytest.raises(ValueError):
            precision_at_q(self.S, truth, 4)

    def test_monotone_in_q(self):
        rng = np.random.default_rng(3)
        s = rng.uniform(size=(8, 8))
        truth = NodeMapping(list(enumerate(rng.permutation(8))))
        values = [precision_at_q(s, truth, q) for q in range(1, 9)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0


class TestRunPipeline:
    def _pair(self, n=24, m=50, seed=5, **noise):
        base = er_graph(n, m, seed)
        spec = NoiseSpec(noise.get("edge_noise", 0.0), noise.get("feature_noise", 0.0), seed + 1)
        target, truth = noisy_copy(base, spec)
        return base, target, truth

    def test_report_fields_and_mapping_size(self):
        g_s, g_t, truth = self._pair()
        result, report = run_pipeline(g_s, g_t, truth, fast_settings())
        assert report.selected_centrality == "degree"
        assert report.selection_scores is None
        assert 0.0 <= report.accuracy <= 1.0
        assert report.seeds_injected == 0
        assert report.pairs_total == len(truth)
        assert report.mapping_size == len(truth)
        assert len(result.mapping) == report.mapping_size
        assert set(report.timings) == set(BENCH_PHASES)
        assert all(t >= 0.0 for t in report.timings.values())

    def test_auto_centrality_reports_scores(self):
        g_s, g_t, truth = self._pair(n=16, m=30)
        _, report = run_pipeline(g_s, g_t, truth, fast_settings(centrality="auto"))
        assert report.selected_centrality in report.selection_scores
        assert len(report.selection_scores) == 6

    def test_per_iteration_rows_are_cumulative(self):
        g_s, g_t, truth = self._pair()
        _, report = run_pipeline(g_s, g_t, truth, fast_settings())
        cum_m = 0
        cum_c = 0
        for row in report.per_iteration:
            cum_m += row["new_matched"]
            cum_c += row["new_correct"]
            assert row["cum_matched"] == cum_m
            assert row["cum_correct"] == cum_c
        assert cum_m == report.pairs_total

    def test_without_truth(self):
        g_s, g_t, _ = self._pair()
        _, report = run_pipeline(g_s, g_t, None, fast_settings())
        assert report.accuracy is None
        assert report.precision_at == {}
        assert report.pairs_total == min(g_s.node_count, g_t.node_count)
        assert all(row["new_correct"] is None for row in report.per_iteration)

    def test_seed_fraction_draws_from_truth(self):
        g_s, g_t, truth = self._pair()
        _, report = run_pipeline(g_s, g_t, truth, fast_settings(seed_fraction=0.25))
        k = int(0.25 * len(truth))
        assert report.seeds_injected == k
        assert report.per_iteration[0]["cum_correct"] >= k
        assert report.pairs_total == len(truth) - k

    def test_seed_fraction_without_truth_fails_in_matching(self):
        g_s, g_t, _ = self._pair()
        with pytest.raises(PhaseError) as err:
            run_pipeline(g_s, g_t, None, fast_settings(seed_fraction=0.5))
        assert err.value.phase == "matching"

    def test_explicit_seeds_take_priority(self):
        g_s, g_t, truth = self._pair()
        seeds = NodeMapping(truth.pairs[:3])
        result, report = run_pipeline(
            g_s, g_t, truth, fast_settings(seed_fraction=0.9), seeds=seeds
        )
        assert report.seeds_injected == 3
        got = result.mapping.as_dict()
        assert all(got[u] == v for u, v in seeds.pairs)

    def test_pairs_override(self):
        g_s, g_t, truth = self._pair()
        _, report = run_pipeline(g_s, g_t, truth, fast_settings(pairs=7))
        assert report.pairs_total == 7
        assert report.mapping_size == 7

    def test_phase_error_carries_phase(self):
        g_s, g_t, truth = self._pair()
        with pytest.raises(PhaseError) as err:
            run_pipeline(g_s, g_t, truth, fast_settings(cnfa_dim=0))
        assert err.value.phase == "cnfa"
        assert isinstance(err.value.cause, ValueError)

    def test_deterministic_reports(self):
        g_s, g_t, truth = self._pair()
        _, r1 = run_pipeline(g_s, g_t, truth, fast_settings(seed=9))
        _, r2 = run_pipeline(g_s, g_t, truth, fast_settings(seed=9))
        d1, d2 = r1.to_dict(), r2.to_dict()
        d1.pop("timings")
        d2.pop("timings")
        assert d1 == d2

    def test_feature_graphs_use_both_encoders(self):
        base = er_graph(18, 36, seed=2)
        x = np.eye(6)[np.arange(18) % 6]
        base = base.with_features(x)
        target, truth = noisy_copy(base, NoiseSpec(0.0, 0.0, 3))
        _, report = run_pipeline(base, target, truth, fast_settings())
        assert 0.0 <= report.accuracy <= 1.0

    def test_precision_keys_match_qs(self):
        g_s, g_t, truth = self._pair()
        _, report = run_pipeline(g_s, g_t, truth, fast_settings(qs=(1, 5, 1000)))
        # out-of-range q values are skipped rather than reported
        assert set(report.precision_at) == {"1", "5"}
        assert report.precision_at["1"] <= report.precision_at["5"]


class TestReportSerialization:
    def test_json_roundtrip_and_csv_sidecar(self, tmp_path):
        base = er_graph(20, 40, seed=1)
        target, truth = noisy_copy(base, NoiseSpec(0.0, 0.0, 2))
        _, report = run_pipeline(base, target, truth, fast_settings())
        out = tmp_path / "report.json"
        report.write(out)
        loaded = json.loads(out.read_text())
        assert loaded == json.loads(report.to_json())
        assert loaded["accuracy"] == report.accuracy
        assert loaded["timings"] == report.timings
        side = tmp_path / "report.iterations.csv"
        lines = side.read_text().strip().splitlines()
        assert lines[0] == "iteration,new_matched,new_correct,cum_matched,cum_correct"
        assert len(lines) == 1 + len(report.per_iteration)


class TestRunExperiment:
    def test_synthetic_spec_writes_outputs(self, tmp_path):
        cfg = ExperimentConfig(
            data=SynthPairSpec(n=20, m=40, edge_noise=0.1),
            settings=fast_settings(),
            out=tmp_path / "r.json",
            mapping_out=tmp_path / "m.map",
        )
        report = run_experiment(cfg)
        assert (tmp_path / "r.json").exists()
        mapping = load_mapping(tmp_path / "m.map")
        assert len(mapping) == report.mapping_size

    def test_synthetic_spec_deterministic(self):
        cfg = ExperimentConfig(data=SynthPairSpec(n=20, m=40), settings=fast_settings(seed=4))
        d1 = run_experiment(cfg).to_dict()
        d2 = run_experiment(cfg).to_dict()
        d1.pop("timings")
        d2.pop("timings")
        assert d1 == d2

    def test_file_spec_with_truth_and_seeds(self, tmp_path):
        base = er_graph(22, 45, seed=6)
        target, truth = noisy_copy(base, NoiseSpec(0.0, 0.0, 7))
        save_edgelist(base, tmp_path / "s.edges")
        save_edgelist(target, tmp_path / "t.edges")
        save_mapping(truth, tmp_path / "truth.map")
        save_mapping(NodeMapping(truth.pairs[:4]), tmp_path / "seeds.map")
        cfg = ExperimentConfig(
            data=FilePairSpec(
                source=tmp_path / "s.edges",
                target=tmp_path / "t.edges",
                truth=tmp_path / "truth.map",
                seeds=tmp_path / "seeds.map",
            ),
            settings=fast_settings(),
        )
        report = run_experiment(cfg)
        assert report.seeds_injected == 4
        assert report.accuracy is not None

    def test_file_spec_with_features(self, tmp_path):
        base = er_graph(15, 30, seed=8)
        x = np.eye(5)[np.arange(15) % 5]
        target, truth = noisy_copy(base.with_features(x), NoiseSpec(0.0, 0.2, 9))
        save_edgelist(base, tmp_path / "s.edges")
        save_edgelist(target, tmp_path / "t.edges")
        save_feature_matrix(x, tmp_path / "s.csv")
        save_feature_matrix(target.features, tmp_path / "t.csv")
        save_mapping(truth, tmp_path / "truth.map")
        cfg = ExperimentConfig(
            data=FilePairSpec(
                source=tmp_path / "s.edges",
                target=tmp_path / "t.edges",
                source_features=tmp_path / "s.csv",
                target_features=tmp_path / "t.csv",
                truth=tmp_path / "truth.map",
            ),
            settings=fast_settings(),
        )
        report = run_experiment(cfg)
        assert report.accuracy is not None

    def test_synth_spec_validation(self):
        with pytest.raises(ValueError):
            SynthPairSpec()
        with pytest.raises(ValueError):
            SynthPairSpec(n=5, m=4, base_path="x.edges")


class TestBench:
    def test_two_sizes_fit_slope(self):
        result = bench_scaling([(15, 30), (30, 90)], seed=0)
        assert len(result.rows) == 2
        assert all(row.seconds > 0.0 for row in result.rows)
        assert result.slope is not None
        csv_text = result.to_csv()
        lines = csv_text.strip().splitlines()
        assert lines[0] == "n,m,seconds," + ",".join(BENCH_PHASES)
        assert lines[-1].startswith("# slope ")

    def test_single_size_no_slope(self, tmp_path):
        result = bench_scaling([(15, 30)], seed=1)
        assert result.slope is None
        result.write_csv(tmp_path / "bench.csv")
        text = (tmp_path / "bench.csv").read_text()
        assert "# slope" not in text

    def test_identity_truth_recorded(self):
        result = bench_scaling([(15, 30)], seed=2)
        assert result.rows[0].accuracy is not None

    def test_empty_sizes_rejected(self):
        with pytest.raises(ValueError):
            bench_scaling([])
