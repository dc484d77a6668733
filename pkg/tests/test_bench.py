import io
import math

import numpy as np
import pytest

from inspectre.bench import (
    CSV_HEADER,
    COVERAGE_ESTIMATORS,
    ENTROPY_ESTIMATORS,
    FAMILIES,
    ExperimentConfig,
    RmseReport,
    RmseRow,
    SyntheticSpec,
    emit_csv,
    ingest_count_table,
    ingest_token_corpus,
    make_distribution,
    read_csv,
    run_coverage_experiment,
    run_entropy_experiment,
    subsample_without_replacement,
)
from inspectre.core import DiscreteDistribution, build_histogram
from inspectre.errors import ConfigurationError, IngestionError


def rows_by_key(report):
    return {(r.estimator, r.x, r.epsilon): r for r in report.rows}


class TestDistributions:
    def test_uniform(self):
        assert make_distribution(SyntheticSpec("uniform", 4)).probs.tolist() == [0.25] * 4

    def test_zipf(self):
        p = make_distribution(SyntheticSpec("zipf", 2, s=0.5)).probs
        r2 = math.sqrt(2)
        assert p.tolist() == pytest.approx([r2 / (r2 + 1), 1 / (r2 + 1)], abs=1e-15)

    def test_dirichlet(self):
        a = make_distribution(SyntheticSpec("dirichlet", 3, beta=1.0, seed=5)).probs
        b = make_distribution(SyntheticSpec("dirichlet", 3, beta=1.0, seed=5)).probs
        assert a.tolist() == b.tolist()
        assert math.fsum(a.tolist()) == pytest.approx(1.0, abs=1e-12)
        c = make_distribution(SyntheticSpec("dirichlet", 3, beta=1.0, seed=6)).probs
        assert a.tolist() != c.tolist()

    def test_two_step(self):
        p = make_distribution(SyntheticSpec("two-step", 10)).probs
        assert p[:5].sum() == pytest.approx(0.25) and p[5:].sum() == pytest.approx(0.75)
        assert np.ptp(p[:5]) == 0 and np.ptp(p[5:]) == 0

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("k", [2, 7, 1000])
    def test_invariants(self, family, k):
        d = make_distribution(SyntheticSpec(family, k, beta=0.5))
        assert d.k == k and d.probs.min() >= 0

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            SyntheticSpec("gauss", 10)
        with pytest.raises(ConfigurationError):
            SyntheticSpec("uniform", 1)
        with pytest.raises(ConfigurationError):
            SyntheticSpec("zipf", 10, s=0)


class TestEntropyExperiment:
    def test_point_mass_zero_error(self):
        cfg = ExperimentConfig(SyntheticSpec("uniform", 3), (10,), iterations=1, estimators=("plug-in",))
        report = run_entropy_experiment(cfg, distribution=DiscreteDistribution([1.0, 0.0, 0.0]))
        assert report.rows[0].rmse == 0.0 and report.rows[0].trials == 1

    def test_deterministic_and_thread_independent(self):
        cfg = ExperimentConfig(
            SyntheticSpec("zipf", 300), (200, 900), (0.5, 2.0), iterations=25, master_seed=42
        )
        a = run_entropy_experiment(cfg)
        b = run_entropy_experiment(cfg)
        c = run_entropy_experiment(cfg, workers=4)
        assert a.rows == b.rows == c.rows

    def test_seed_changes_result(self):
        base = dict(spec=SyntheticSpec("uniform", 100), x_grid=(200,), iterations=10)
        a = run_entropy_experiment(ExperimentConfig(master_seed=1, **base))
        b = run_entropy_experiment(ExperimentConfig(master_seed=2, **base))
        assert a.rows != b.rows

    def test_row_layout(self):
        cfg = ExperimentConfig(SyntheticSpec("uniform", 50), (100, 400), (1.0, 4.0), iterations=5)
        report = run_entropy_experiment(cfg)
        keys = rows_by_key(report)
        for n in (100.0, 400.0):
            for tag in ("plug-in", "miller-madow", "poly"):
                assert keys[(tag, n, math.inf)].trials == 5
            for tag in ("private-plug-in", "private-poly"):
                for eps in (1.0, 4.0):
                    assert (tag, n, eps) in keys
        assert all(r.rmse >= 0 for r in report.rows)

    def test_private_poly_near_poly(self):
        cfg = ExperimentConfig(
            SyntheticSpec("uniform", 1000), (10_000,), (1.0,), 100, ("poly", "private-poly"), 0
        )
        keys = rows_by_key(run_entropy_experiment(cfg))
        assert keys[("private-poly", 10_000.0, 1.0)].rmse - keys[("poly", 10_000.0, math.inf)].rmse <= 0.1

    def test_error_shrinks_with_n(self):
        grid = (500, 1000, 2000, 4000, 8000)
        cfg = ExperimentConfig(SyntheticSpec("uniform", 1000), grid, iterations=30,
                               estimators=("plug-in", "miller-madow"), master_seed=3)
        report = run_entropy_experiment(cfg)
        for tag in ("plug-in", "miller-madow"):
            errs = [r.rmse for r in report.rows if r.estimator == tag]
            inversions = sum(b > a for a, b in zip(errs, errs[1:]))
            assert inversions <= 1

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(SyntheticSpec("uniform", 10), (), iterations=1)
        with pytest.raises(ConfigurationError):
            ExperimentConfig(SyntheticSpec("uniform", 10), (10,), iterations=0)
        with pytest.raises(ConfigurationError):
            ExperimentConfig(SyntheticSpec("uniform", 10), (10,), epsilons=(0.0,))
        with pytest.raises(ConfigurationError):
            run_entropy_experiment(ExperimentConfig(SyntheticSpec("uniform", 10), (10,), estimators=("sgt",)))
        with pytest.raises(ConfigurationError):
            run_entropy_experiment(ExperimentConfig(SyntheticSpec("uniform", 10), (1,)))


class TestCoverageExperiment:
    def test_t_one_finite(self):
        cfg = ExperimentConfig(SyntheticSpec("uniform", 200), (1,), (1.0,), 20, COVERAGE_ESTIMATORS)
        report = run_coverage_experiment(cfg)
        assert all(math.isfinite(r.rmse) for r in report.rows)

    def test_epsilon_ordering(self):
        cfg = ExperimentConfig(SyntheticSpec("uniform", 2000), (1, 2, 3, 4, 5), (1.0, 2.0, 10.0), 1000,
                               COVERAGE_ESTIMATORS, master_seed=5)
        keys = rows_by_key(run_coverage_experiment(cfg))
        for t in (1.0, 2.0, 3.0, 4.0, 5.0):
            assert keys[("private-sgt", t, 10.0)].rmse <= keys[("private-sgt", t, 1.0)].rmse

    def test_small_support_pays_more(self):
        ratios = {}
        for k in (200, 2000):
            cfg = ExperimentConfig(SyntheticSpec("uniform", k), (1, 2, 3, 4, 5), (1.0,), 1000,
                                   COVERAGE_ESTIMATORS, master_seed=9)
            keys = rows_by_key(run_coverage_experiment(cfg))
            ratios[k] = [keys[("private-sgt", t, 1.0)].rmse / keys[("sgt", t, math.inf)].rmse
                         for t in (1.0, 2.0, 3.0, 4.0, 5.0)]
        assert all(a > b for a, b in zip(ratios[200], ratios[2000]))

    def test_thread_independent(self):
        cfg = ExperimentConfig(SyntheticSpec("two-step", 400), (1, 3.5), (1.0,), 50, COVERAGE_ESTIMATORS, 4)
        assert run_coverage_experiment(cfg).rows == run_coverage_experiment(cfg, workers=3).rows

    def test_grid_validation(self):
        cfg = ExperimentConfig(SyntheticSpec("uniform", 100), (0.5,), estimators=COVERAGE_ESTIMATORS)
        with pytest.raises(ConfigurationError):
            run_coverage_experiment(cfg)


class TestTokenCorpus:
    def test_basic(self):
        assert ingest_token_corpus(b"To be, to be.").as_dict() == {"to": 2, "be": 2}

    def test_empty(self):
        hist = ingest_token_corpus(b"")
        assert hist.n == 0 and hist.as_dict() == {}

    def test_text_and_stream(self):
        assert ingest_token_corpus("a b a").as_dict() == {"a": 2, "b": 1}
        assert ingest_token_corpus(io.BytesIO("naïve ok_go".encode())).as_dict() == {
            "naïve": 1, "ok": 1, "go": 1,
        }

    def test_interning(self):
        hist = ingest_token_corpus(b"x y z x y x w")
        assert hist.distinct == len(hist.labels) == 4

    def test_bad_encoding(self):
        with pytest.raises(IngestionError) as exc:
            ingest_token_corpus(b"fine \xff broken")
        assert exc.value.offset == 5


class TestCountTable:
    def test_total(self):
        pop = ingest_count_table([("smith", 2), ("lee", 1)])
        assert pop.m_total == 3

    def test_duplicates_merge(self):
        pop = ingest_count_table("a,2\nb,1\na,5\n")
        assert dict(zip(pop.names, pop.counts.tolist())) == {"a": 7, "b": 1}

    def test_header_detected(self):
        pop = ingest_count_table("name,count\nx,3\n\ny,4\n")
        assert pop.names == ("x", "y") and pop.m_total == 7

    def test_census_style(self):
        rng = np.random.default_rng(0)
        counts = rng.integers(100, 5000, size=500)
        text = "name,count\n" + "".join(f"N{i},{c}\n" for i, c in enumerate(counts))
        pop = ingest_count_table(io.StringIO(text))
        assert pop.m_total == int(counts.sum())
        assert pop.as_histogram().n == pop.m_total

    @pytest.mark.parametrize("text,line", [("a,1\nb\n", 2), ("a,1\nb,0\n", 2), ("a,1\nb,x\n", 2), ("a,1,2\n", 1)])
    def test_errors(self, text, line):
        with pytest.raises(IngestionError) as exc:
            ingest_count_table(text)
        assert exc.value.line == line


class TestSubsample:
    def test_full_draw(self):
        pop = ingest_count_table([("a", 3), ("b", 1), ("c", 6)])
        s = subsample_without_replacement(pop, pop.m_total, seed=1)
        assert build_histogram(s).as_dict() == {"a": 3, "b": 1, "c": 6}

    def test_single_draw_frequency(self):
        pop = ingest_count_table([("a", 9), ("b", 1)])
        hits = sum(
            subsample_without_replacement(pop, 1, seed=s).symbols[0] == 0 for s in range(100_000)
        )
        assert hits / 100_000 == pytest.approx(0.9, abs=0.01)

    def test_seeds(self):
        pop = ingest_count_table([("a", 4), ("b", 3), ("c", 5)])
        a = subsample_without_replacement(pop, 12, seed=1).symbols
        b = subsample_without_replacement(pop, 12, seed=2).symbols
        assert sorted(a.tolist()) == sorted(b.tolist())
        assert a.tolist() != b.tolist()
        assert subsample_without_replacement(pop, 5, seed=3).symbols.tolist() == \
            subsample_without_replacement(pop, 5, seed=3).symbols.tolist()

    def test_no_individual_twice(self):
        pop = ingest_count_table([("a", 2), ("b", 2)])
        for s in range(50):
            counts = build_histogram(subsample_without_replacement(pop, 3, seed=s)).counts
            assert counts.max() <= 2

    def test_too_many(self):
        pop = ingest_count_table([("a", 2)])
        with pytest.raises(ConfigurationError):
            subsample_without_replacement(pop, 3, seed=0)


class TestCsv:
    def _report(self):
        rows = (
            RmseRow("plug-in", 1000.0, 0.1 + 0.2, 100),
            RmseRow("private-poly", 2000.0, 1 / 3, 100, 0.5),
            RmseRow("sgt", 1.5, 2.0 ** -60, 7),
        )
        return RmseReport(rows, seed=11)

    def test_empty(self):
        buf = io.StringIO()
        emit_csv(RmseReport((), seed=3), buf)
        assert buf.getvalue() == ",".join(CSV_HEADER) + "\n"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "r.csv"
        report = self._report()
        emit_csv(report, path, comments=["hello", "seed=11"])
        back = read_csv(path)
        assert back.rows == report.rows and back.seed == 11

    def test_layout(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_csv(self._report(), path, comments=["x"])
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "# x"
        assert all(len(line.split(",")) == 6 for line in lines[1:])

    def test_bad_header(self):
        with pytest.raises(IngestionError):
            read_csv(io.StringIO("a,b\n"))


def test_estimator_names_are_stable():
    assert ENTROPY_ESTIMATORS == ("plug-in", "miller-madow", "poly", "private-plug-in", "private-poly")
    assert COVERAGE_ESTIMATORS == ("sgt", "private-sgt")
