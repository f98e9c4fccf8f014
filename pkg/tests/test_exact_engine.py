import numpy as np
import pytest

from tileprobe.errors import UntrackedAttribute
from tileprobe.exact_engine import AggregateRequest, evaluate_exact
from tileprobe.tile_index import IndexConfig, Rect

from conftest import (
    REF_WINDOW,
    brute_aggregate,
    build_scenario,
    random_window,
    ref_tiles,
    write_csv,
)

ALL_FUNCTIONS = [
    AggregateRequest("count"),
    AggregateRequest("sum", 2),
    AggregateRequest("mean", 2),
    AggregateRequest("min", 2),
    AggregateRequest("max", 2),
]


class TestMetadataPaths:
    def test_fully_covered_tile_needs_no_reads(self, tmp_path):
        rows = [(i, i, 10) for i in range(5)]
        sc = build_scenario(write_csv(tmp_path / "d.csv", rows), IndexConfig(initial_grid=1))
        ans = evaluate_exact(sc.index, sc.index.domain, [AggregateRequest("sum", 2)], sc.reader)
        assert ans.values == [50.0]
        assert ans.telemetry.rows_read == 0

    def test_count_only_query_reads_nothing(self, ref_scenario):
        ans = evaluate_exact(ref_scenario.index, REF_WINDOW, [AggregateRequest("count")], ref_scenario.reader)
        assert ans.values == [5.0]
        assert ans.telemetry.rows_read == 0
        assert ans.telemetry.tiles_split == 0

    def test_untracked_attribute(self, ref_scenario):
        with pytest.raises(UntrackedAttribute):
            evaluate_exact(ref_scenario.index, REF_WINDOW, [AggregateRequest("sum", 1)], ref_scenario.reader)


class TestReferenceWindow:
    def test_reads_exactly_the_partial_tiles_rows(self, ref_scenario):
        index, reader = ref_scenario.index, ref_scenario.reader
        tiles = ref_tiles(index)
        expected_reads = tiles["a"].count + tiles["c"].count  # 2 + 3
        ans = evaluate_exact(index, REF_WINDOW, [AggregateRequest("sum", 2)], reader)
        assert ans.values == [107.0]  # 42 from metadata + 10 + (5 + 50) read back
        assert ans.telemetry.rows_read == expected_reads == 5
        assert ans.telemetry.tiles_split == 2
        assert not tiles["a"].is_leaf and not tiles["c"].is_leaf

    def test_repeat_query_reads_decay(self, ref_scenario):
        index, reader = ref_scenario.index, ref_scenario.reader
        req = [AggregateRequest("sum", 2)]
        first = evaluate_exact(index, REF_WINDOW, req, reader)
        second = evaluate_exact(index, REF_WINDOW, req, reader)
        assert second.values == first.values
        assert second.telemetry.rows_read <= first.telemetry.rows_read
        # splitting left one in-window child per partial tile fully contained;
        # the leftover out-of-window children hold no in-window objects
        assert second.telemetry.rows_read == 0

    def test_empty_window(self, ref_scenario):
        ans = evaluate_exact(ref_scenario.index, Rect(2.2, 2.8, 0.1, 0.4), ALL_FUNCTIONS, ref_scenario.reader)
        assert ans.values == [0.0, 0.0, None, None, None]


class TestOracleAgreement:
    def test_hundred_random_windows(self, uniform_10k, uniform_10k_table):
        sc = uniform_10k.fresh()
        rng = np.random.default_rng(47)
        for _ in range(100):
            q = random_window(rng, sc.index.domain)
            ans = evaluate_exact(sc.index, q, ALL_FUNCTIONS, sc.reader)
            for req, got in zip(ALL_FUNCTIONS, ans.values):
                want = brute_aggregate(uniform_10k_table, q, req)
                if want is None or got is None:
                    assert want is None and got is None
                elif req.function in ("sum", "mean"):
                    assert got == pytest.approx(want, rel=1e-9)
                else:
                    assert got == want

    def test_mean_times_count_is_sum(self, uniform_10k):
        sc = uniform_10k.fresh()
        rng = np.random.default_rng(53)
        for _ in range(25):
            q = random_window(rng, sc.index.domain)
            ans = evaluate_exact(
                sc.index, q,
                [AggregateRequest("count"), AggregateRequest("sum", 3), AggregateRequest("mean", 3)],
                sc.reader,
            )
            n, s, m = ans.values
            if n:
                assert m * n == pytest.approx(s, rel=1e-9)
