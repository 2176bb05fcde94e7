import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactopt.harness import (
    BAND_HEADER,
    ConfigError,
    ExperimentSpec,
    InitSpec,
    ObjectiveSpec,
    OptimizerEntry,
    QuantileBand,
    RateUndefinedError,
    SearchRanges,
    TRACE_HEADER,
    _quantile,
    derive_seed,
    estimate_rate,
    export_band_csv,
    export_csv,
    export_svg,
    export_trace_csv,
    monte_carlo,
    parallel_map,
    parse_experiment,
    random_search,
    read_band_csv,
    read_trace_csv,
    run_bench,
    spec_to_doc,
)
from contactopt.optimizers import RunRecord
from contactopt.presets import PRESET_NAMES, SCALES, experiment_preset


class TestSeeding:
    def test_deterministic(self):
        assert derive_seed(42, "search:gd", 3) == derive_seed(42, "search:gd", 3)

    def test_distinct_streams(self):
        seeds = {
            derive_seed(42, "search:gd", 0),
            derive_seed(42, "search:gd", 1),
            derive_seed(42, "search:cm", 0),
            derive_seed(43, "search:gd", 0),
            derive_seed(42, "objective", 0),
        }
        assert len(seeds) == 5

    def test_range_and_negative_master(self):
        s = derive_seed(-1, "x", 0)
        assert 0 <= s < 2 ** 64
        assert s == derive_seed(2 ** 64 - 1, "x", 0)


class TestParallelMap:
    def test_preserves_order(self):
        items = list(range(40))
        assert parallel_map(lambda v: v * v, items, jobs=4) == [v * v for v in items]

    def test_matches_serial(self):
        items = [3, 1, 4, 1, 5, 9]
        assert parallel_map(str, items, jobs=3) == parallel_map(str, items, jobs=1)

    def test_empty_and_single(self):
        assert parallel_map(abs, [], jobs=4) == []
        assert parallel_map(abs, [-2], jobs=4) == [2]


class TestInitSpec:
    def test_fixed_roundtrip(self):
        spec = InitSpec(kind="fixed", values=(1.0, -2.0, 3.0))
        np.testing.assert_array_equal(spec.materialize(3), [1.0, -2.0, 3.0])
        assert not spec.random

    def test_fixed_dim_mismatch(self):
        with pytest.raises(ValueError, match="dim"):
            InitSpec(kind="fixed", values=(1.0, 2.0)).materialize(3)

    def test_pattern_tiles(self):
        spec = InitSpec(kind="pattern", values=(-1.2, 1.0))
        np.testing.assert_array_equal(
            spec.materialize(5), [-1.2, 1.0, -1.2, 1.0, -1.2])

    def test_box_draws_in_range(self):
        spec = InitSpec(kind="box", lo=-2.0, hi=3.0)
        assert spec.random
        x = spec.materialize(100, np.random.default_rng(0))
        assert np.all(x >= -2.0) and np.all(x <= 3.0)

    def test_box_needs_generator(self):
        with pytest.raises(ValueError, match="generator"):
            InitSpec(kind="box", lo=0.0, hi=1.0).materialize(2)

    def test_validation(self):
        with pytest.raises(ValueError, match="kind"):
            InitSpec(kind="gaussian")
        with pytest.raises(ValueError, match="value"):
            InitSpec(kind="pattern")
        with pytest.raises(ValueError, match="lo < hi"):
            InitSpec(kind="box", lo=1.0, hi=1.0)


class _ZeroRng:
    def uniform(self, lo, hi):
        return 0.0


class TestSearchRanges:
    def test_default_laws(self):
        r = SearchRanges(tau=(1e-5, 1e-1), epsilon=(0.0, 0.6), mu=(0.8, 0.99))
        assert r.law("tau") == "log_uniform"  # four decades
        assert r.law("epsilon") == "uniform"  # touches zero
        assert r.law("mu") == "uniform"
        assert SearchRanges(tau=(0.01, 0.5)).law("tau") == "uniform"  # < 2 decades

    def test_sampling_override(self):
        r = SearchRanges(mu=(0.5, 0.9), sampling={"mu": "log_uniform"})
        assert r.law("mu") == "log_uniform"

    def test_sampling_validation(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            SearchRanges(tau=(0.1, 1.0), sampling={"beta": "uniform"})
        with pytest.raises(ValueError, match="law"):
            SearchRanges(tau=(0.1, 1.0), sampling={"tau": "jeffreys"})
        with pytest.raises(ValueError, match="positive lower bound"):
            SearchRanges(delta=(0.0, 5.0), sampling={"delta": "log_uniform"})

    def test_interval_validation(self):
        with pytest.raises(ValueError, match="lo > hi"):
            SearchRanges(tau=(1.0, 0.5))
        with pytest.raises(ValueError, match="finite"):
            SearchRanges(mu=(0.1, math.inf))

    def test_degenerate_interval_is_point_mass(self):
        r = SearchRanges(tau=(0.25, 0.25))
        rng = np.random.default_rng(0)
        assert all(r.draw("tau", rng) == 0.25 for _ in range(5))

    def test_draw_requires_declared_interval(self):
        with pytest.raises(ValueError, match="no search interval"):
            SearchRanges(tau=(0.1, 1.0)).draw("mu", np.random.default_rng(0))

    def test_zero_draw_clamped_positive(self):
        r = SearchRanges(epsilon=(0.0, 0.6))
        v = r.draw("epsilon", _ZeroRng())
        assert v > 0.0

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=50, deadline=None)
    def test_draws_stay_in_bounds(self, seed):
        r = SearchRanges(tau=(1e-5, 1e-1), mu=(0.8, 0.99))
        rng = np.random.default_rng(seed)
        t = r.draw("tau", rng)
        m = r.draw("mu", rng)
        assert 1e-5 <= t <= 1e-1
        assert 0.8 <= m <= 0.99


class TestEntryAndSpecs:
    def test_entry_requires_ranges_for_kind(self):
        with pytest.raises(ValueError, match="search range"):
            OptimizerEntry(kind="cm", ranges=SearchRanges(tau=(0.1, 1.0)))
        with pytest.raises(ValueError, match="search range"):
            OptimizerEntry(kind="rgd", ranges=SearchRanges(
                epsilon=(0.1, 1.0), mu=(0.5, 0.9)))

    def test_make_config_carries_modes(self):
        entry = OptimizerEntry(
            kind="nag",
            ranges=SearchRanges(tau=(0.1, 1.0), mu=(0.5, 0.9)),
            momentum_schedule="nesterov_k",
        )
        cfg = entry.make_config({"tau": 0.2, "mu": 0.7})
        assert cfg.kind == "nag" and cfg.tau == 0.2 and cfg.mu == 0.7
        assert cfg.momentum_schedule == "nesterov_k"

    def test_objective_spec_validation(self):
        with pytest.raises(ValueError, match="unknown objective"):
            ObjectiveSpec(name="ackley", dim=2)
        with pytest.raises(ValueError, match="two-dimensional"):
            ObjectiveSpec(name="camelback", dim=3)

    def test_only_quadratic_is_randomized(self):
        assert ObjectiveSpec(name="quadratic", dim=3).randomized
        assert not ObjectiveSpec(name="quartic", dim=3).randomized

    def test_quadratic_seed_override_changes_draw(self):
        spec = ObjectiveSpec(name="quadratic", dim=4, seed=1)
        x = np.ones(4)
        assert spec.build().eval(x) == spec.build(seed=1).eval(x)
        assert spec.build().eval(x) != spec.build(seed=2).eval(x)

    def test_experiment_spec_validation(self):
        obj = ObjectiveSpec(name="quartic", dim=3)
        init = InitSpec(kind="pattern", values=(2.0,))
        entry = OptimizerEntry(kind="gd", ranges=SearchRanges(tau=(0.01, 0.1)))
        good = dict(objective=obj, init=init, optimizers=(entry,),
                    search_trials=5, mc_runs=2, iters=10)
        ExperimentSpec(**good)
        with pytest.raises(ValueError, match="at least one optimizer"):
            ExperimentSpec(**{**good, "optimizers": ()})
        for field in ("search_trials", "mc_runs", "iters"):
            with pytest.raises(ValueError, match=field):
                ExperimentSpec(**{**good, field: 0})
        with pytest.raises(ValueError, match="fixed init length"):
            ExperimentSpec(**{**good, "init": InitSpec(kind="fixed", values=(1.0,))})


class TestQuantiles:
    def test_band_ordering_enforced(self):
        with pytest.raises(ValueError, match="ordering"):
            QuantileBand(kind="gd", median=(1.0,), q025=(2.0,), q975=(3.0,))
        with pytest.raises(ValueError, match="equal length"):
            QuantileBand(kind="gd", median=(1.0, 2.0), q025=(1.0,), q975=(1.0,))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30),
           st.sampled_from([0.025, 0.25, 0.5, 0.975]))
    @settings(max_examples=80, deadline=None)
    def test_matches_numpy_on_finite_data(self, vals, q):
        vals = sorted(vals)
        mine = _quantile(vals, q)
        ref = float(np.quantile(vals, q))
        assert mine == pytest.approx(ref, abs=1e-9 * (1 + abs(ref)))

    def test_infinity_handling(self):
        assert _quantile([1.0, math.inf, math.inf], 0.5) == math.inf
        assert _quantile([1.0, 2.0, math.inf], 0.5) == 2.0
        assert _quantile([1.0, 2.0, math.inf], 0.975) == math.inf
        assert _quantile([5.0], 0.025) == 5.0


class TestRateEstimation:
    def test_recovers_planted_rates(self):
        for p in (0.5, 3.0, 18.22, 116.19):
            trace = [1.0] + [2.3 * k ** (-p) for k in range(1, 301)]
            est = estimate_rate(trace, (150, 300))
            assert est == pytest.approx(p, rel=1e-3)

    def test_cubic_decay_tight(self):
        trace = [1.0] + [k ** -3.0 for k in range(1, 101)]
        assert estimate_rate(trace, (1, 100)) == pytest.approx(3.0, abs=1e-9)

    def test_constant_trace_has_zero_rate(self):
        trace = [7.0] * 50
        assert abs(estimate_rate(trace, (1, 49))) <= 1e-9

    def test_undefined_on_bad_values(self):
        with pytest.raises(RateUndefinedError):
            estimate_rate([1.0, 0.5, 0.0, 0.1], (1, 3))
        with pytest.raises(RateUndefinedError):
            estimate_rate([1.0, 0.5, math.inf, 0.1], (1, 3))
        with pytest.raises(RateUndefinedError):
            estimate_rate([1.0, -0.5, 0.2, 0.1], (1, 3))

    def test_window_validation(self):
        trace = [1.0] * 20
        with pytest.raises(ValueError, match=">= 1"):
            estimate_rate(trace, (0, 10))
        with pytest.raises(ValueError, match="k_lo < k_hi"):
            estimate_rate(trace, (5, 5))
        with pytest.raises(ValueError, match="exceeds"):
            estimate_rate(trace, (1, 20))


def tiny_spec(**over):
    base = dict(
        objective=ObjectiveSpec(name="quartic", dim=2),
        init=InitSpec(kind="fixed", values=(2.0, 2.0)),
        optimizers=(OptimizerEntry(kind="gd", ranges=SearchRanges(tau=(0.02, 0.02))),),
        search_trials=3,
        mc_runs=4,
        iters=15,
        master_seed=9,
    )
    base.update(over)
    return ExperimentSpec(**base)


class TestMonteCarlo:
    def test_deterministic_setup_gives_zero_width_band(self):
        spec = tiny_spec()
        entry = spec.optimizers[0]
        band, records = monte_carlo(spec, entry, {"tau": 0.02})
        assert len(records) == 4
        assert band.median == band.q025 == band.q975
        assert len(band.median) == 16

    def test_single_run_band_is_the_trace(self):
        spec = tiny_spec(mc_runs=1)
        band, records = monte_carlo(spec, spec.optimizers[0], {"tau": 0.02})
        assert band.median == records[0].trace

    def test_randomized_objective_spreads_band(self):
        spec = tiny_spec(
            objective=ObjectiveSpec(name="quadratic", dim=4),
            init=InitSpec(kind="pattern", values=(1.0,)),
            mc_runs=5,
            iters=10,
        )
        band, records = monte_carlo(spec, spec.optimizers[0], {"tau": 0.1})
        assert len({r.trace for r in records}) > 1
        assert any(h > l for l, h in zip(band.q025[1:], band.q975[1:]))

    def test_diverged_runs_pad_with_inf(self):
        spec = tiny_spec(mc_runs=3, iters=30)
        band, records = monte_carlo(spec, spec.optimizers[0], {"tau": 1.0})
        assert all(r.diverged for r in records)
        assert band.median[0] < math.inf
        assert band.median[-1] == math.inf


class TestRandomSearch:
    def test_point_mass_ranges_return_the_point(self):
        spec = tiny_spec()
        sr = random_search(spec, spec.optimizers[0])
        assert sr.viable
        assert sr.best_params == {"tau": 0.02}
        assert sr.n_trials == 3 and sr.n_diverged == 0

    def test_deterministic_in_master_seed(self):
        spec = tiny_spec(
            optimizers=(OptimizerEntry(
                kind="gd", ranges=SearchRanges(tau=(0.001, 0.05))),),
            search_trials=20,
        )
        a = random_search(spec, spec.optimizers[0])
        b = random_search(spec, spec.optimizers[0])
        assert a.best_params == b.best_params and a.best_gap == b.best_gap

    def test_recovers_known_optimal_step(self):
        # f(x) = x^2/2 in 1-D: gd contracts by (1 - tau) per step, so the
        # best step over a wide log-uniform range must land near tau = 1
        spec = ExperimentSpec(
            objective=ObjectiveSpec(
                name="quadratic", dim=1, seed=3, eigen_lo=1.0, eigen_hi=1.0),
            init=InitSpec(kind="fixed", values=(1.0,)),
            optimizers=(OptimizerEntry(
                kind="gd", ranges=SearchRanges(tau=(0.01, 1.9))),),
            search_trials=600,
            mc_runs=1,
            iters=5,
            master_seed=7,
        )
        assert spec.optimizers[0].ranges.law("tau") == "log_uniform"
        sr = random_search(spec, spec.optimizers[0])
        assert sr.viable
        assert 0.9 <= sr.best_params["tau"] <= 1.1

    def test_all_diverged_marks_nonviable(self):
        spec = tiny_spec(
            optimizers=(OptimizerEntry(
                kind="gd", ranges=SearchRanges(tau=(1.0, 2.0))),),
            search_trials=6,
        )
        outcomes = run_bench(spec)
        sr = outcomes[0].search
        assert not sr.viable
        assert sr.best_params is None
        assert sr.best_gap == math.inf
        assert sr.n_diverged == 6
        assert outcomes[0].band is None
        assert outcomes[0].records == ()


class TestRunBench:
    def test_parallel_equals_serial(self):
        spec = tiny_spec(
            objective=ObjectiveSpec(name="quadratic", dim=3),
            init=InitSpec(kind="box", lo=-1.0, hi=1.0),
            optimizers=(
                OptimizerEntry(kind="gd", ranges=SearchRanges(tau=(0.01, 0.3))),
                OptimizerEntry(kind="cm", ranges=SearchRanges(
                    tau=(0.01, 0.3), mu=(0.5, 0.95))),
            ),
            search_trials=8,
            mc_runs=3,
            iters=12,
        )
        serial = run_bench(spec, jobs=1)
        threaded = run_bench(spec, jobs=4)
        assert len(serial) == len(threaded) == 2
        for a, b in zip(serial, threaded):
            assert a.search == b.search
            assert a.band == b.band
            assert a.records == b.records


class TestCsvRoundTrip:
    def make_records(self):
        return [
            RunRecord(kind="gd", params={"tau": 0.1},
                      trace=(2.0, 1.0, 0.5, 0.125), diverged=False),
            RunRecord(kind="crgd", params={},
                      trace=(2.0, 37.25), diverged=True),
        ]

    def test_trace_roundtrip(self, tmp_path):
        path = str(tmp_path / "t.csv")
        recs = self.make_records()
        export_trace_csv(recs, path)
        back = read_trace_csv(path)
        assert [t for t, _ in back] == [0, 1]
        for (_, got), want in zip(back, recs):
            assert got.kind == want.kind
            assert got.trace == want.trace
            assert got.diverged == want.diverged

    def test_band_roundtrip_with_inf(self, tmp_path):
        path = str(tmp_path / "b.csv")
        band = QuantileBand(
            kind="rgd",
            median=(1.0, 0.1234567890123456, math.inf),
            q025=(0.5, 0.001, math.inf),
            q975=(2.0, 1.0, math.inf),
        )
        export_band_csv([band], path)
        got = read_band_csv(path)
        assert got == [band]
        text = open(path).read()
        assert "inf" in text

    def test_empty_exports_header_only(self, tmp_path):
        path = str(tmp_path / "e.csv")
        export_trace_csv([], path)
        assert open(path).read() == TRACE_HEADER + "\n"
        assert read_trace_csv(path) == []

    def test_bad_header_rejected(self, tmp_path):
        path = str(tmp_path / "x.csv")
        with open(path, "w") as fh:
            fh.write("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="trace CSV"):
            read_trace_csv(path)
        with pytest.raises(ValueError, match="band CSV"):
            read_band_csv(path)

    def test_export_csv_dispatch(self, tmp_path):
        bpath = str(tmp_path / "bands.csv")
        tpath = str(tmp_path / "traces.csv")
        band = QuantileBand(kind="gd", median=(1.0,), q025=(1.0,), q975=(1.0,))
        export_csv([band], bpath)
        assert open(bpath).readline().strip() == BAND_HEADER
        export_csv(self.make_records(), tpath)
        assert open(tpath).readline().strip() == TRACE_HEADER


class TestSvg:
    def bands(self):
        ks = list(range(6))
        return [
            QuantileBand(kind="gd",
                         median=tuple(2.0 ** -k for k in ks),
                         q025=tuple(2.0 ** -k / 2 for k in ks),
                         q975=tuple(2.0 ** -k * 2 for k in ks)),
            QuantileBand(kind="crgd",
                         median=tuple(4.0 ** -k for k in ks),
                         q025=tuple(4.0 ** -k / 2 for k in ks),
                         q975=tuple(4.0 ** -k * 2 for k in ks)),
        ]

    def test_two_bands_render_distinctly(self, tmp_path):
        path = str(tmp_path / "p.svg")
        export_svg(self.bands(), path, title="demo")
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        polygons = [el for el in root.iter() if el.tag.endswith("polygon")]
        texts = [el.text for el in root.iter() if el.tag.endswith("text")]
        assert len(polylines) == 2 and len(polygons) == 2
        strokes = {el.get("stroke") for el in polylines}
        assert len(strokes) == 2
        assert "gd" in texts and "crgd" in texts and "demo" in texts

    def test_constant_band_is_horizontal(self, tmp_path):
        path = str(tmp_path / "c.svg")
        band = QuantileBand(kind="gd", median=(1.0,) * 5,
                            q025=(1.0,) * 5, q975=(1.0,) * 5)
        export_svg([band], path)
        root = ET.parse(path).getroot()
        line = next(el for el in root.iter() if el.tag.endswith("polyline"))
        ys = {pt.split(",")[1] for pt in line.get("points").split()}
        assert len(ys) == 1

    def test_requires_bands(self, tmp_path):
        with pytest.raises(ValueError):
            export_svg([], str(tmp_path / "n.svg"))


def base_doc():
    return {
        "objective": {"name": "quartic", "dim": 3},
        "init": {"kind": "pattern", "pattern": [2.0]},
        "optimizers": [{"kind": "gd", "ranges": {"tau": [0.01, 0.1]}}],
        "search_trials": 5,
        "mc_runs": 2,
        "iters": 10,
    }


class TestConfigParsing:
    def test_minimal_doc_parses(self):
        spec = parse_experiment(base_doc())
        assert spec.objective.name == "quartic"
        assert spec.master_seed == 0
        assert spec.optimizers[0].ranges.tau == (0.01, 0.1)

    def test_presets_roundtrip_through_json_doc(self):
        for name in PRESET_NAMES:
            for scale in SCALES:
                spec = experiment_preset(name, scale=scale, master_seed=5)
                assert parse_experiment(spec_to_doc(spec)) == spec

    def test_unknown_keys_carry_json_path(self):
        doc = base_doc()
        doc["bogus"] = 1
        with pytest.raises(ConfigError, match=r"\$\.bogus"):
            parse_experiment(doc)

        doc = base_doc()
        doc["objective"]["noise"] = 0.1
        with pytest.raises(ConfigError, match=r"\$\.objective\.noise"):
            parse_experiment(doc)

        doc = base_doc()
        doc["optimizers"][0]["ranges"]["beta"] = [0, 1]
        with pytest.raises(ConfigError, match=r"\$\.optimizers\[0\]\.ranges\.beta"):
            parse_experiment(doc)

    def test_missing_required_keys(self):
        for key in ("objective", "init", "optimizers", "iters"):
            doc = base_doc()
            del doc[key]
            with pytest.raises(ConfigError):
                parse_experiment(doc)

    def test_interval_shape_checked(self):
        doc = base_doc()
        doc["optimizers"][0]["ranges"]["tau"] = [0.01]
        with pytest.raises(ConfigError, match=r"interval"):
            parse_experiment(doc)

    def test_init_key_exclusivity(self):
        doc = base_doc()
        doc["init"] = {"kind": "box", "lo": 0.0, "hi": 1.0, "pattern": [1]}
        with pytest.raises(ConfigError, match="not allowed"):
            parse_experiment(doc)
        doc["init"] = {"kind": "pattern", "pattern": [1], "lo": 0.0}
        with pytest.raises(ConfigError, match="not allowed"):
            parse_experiment(doc)

    def test_type_errors_are_config_errors(self):
        doc = base_doc()
        doc["iters"] = 2.5
        with pytest.raises(ConfigError, match="integer"):
            parse_experiment(doc)
        doc = base_doc()
        doc["objective"]["dim"] = True
        with pytest.raises(ConfigError, match="number"):
            parse_experiment(doc)
        doc = base_doc()
        doc["objective"] = {"name": "camelback", "dim": 3}
        with pytest.raises(ConfigError, match="two-dimensional"):
            parse_experiment(doc)

    def test_sampling_law_parsed_and_checked(self):
        doc = base_doc()
        doc["optimizers"][0]["sampling"] = {"tau": "log_uniform"}
        spec = parse_experiment(doc)
        assert spec.optimizers[0].ranges.law("tau") == "log_uniform"
        doc["optimizers"][0]["sampling"] = {"tau": "jeffreys"}
        with pytest.raises(ConfigError):
            parse_experiment(doc)


class TestPresets:
    def test_all_presets_build_at_both_scales(self):
        for name in PRESET_NAMES:
            for scale in SCALES:
                spec = experiment_preset(name, scale=scale)
                assert len(spec.optimizers) == 4
                kinds = [e.kind for e in spec.optimizers]
                assert kinds == ["cm", "nag", "rgd", "crgd"]

    def test_unknown_names_raise(self):
        with pytest.raises(ValueError, match="unknown preset"):
            experiment_preset("styblinski")
        with pytest.raises(ValueError, match="scale"):
            experiment_preset("quartic", scale="huge")

    def test_init_override(self):
        override = InitSpec(kind="fixed", values=(5.0, 5.0))
        spec = experiment_preset("camelback", init=override)
        assert spec.init == override
