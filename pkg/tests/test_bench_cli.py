import csv
import io

import numpy as np
import pytest

from conftest import synthetic
from learnedspatial import bench, cli
from learnedspatial.index import TECHNIQUES, BuildConfig, ConfigError, build
from learnedspatial.oracle import BruteForce
from learnedspatial.workload import WorkloadSpec, gen_workload, save_points

NON_TIMING = ("technique", "search", "leaf_size", "query_type", "queries", "index_bytes", "partitions",
              "avg_partitions", "avg_scanned", "checksum", "verified")


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(out))) if out.strip() else []
    return code, rows, err


@pytest.fixture(scope="module")
def data_10k():
    return synthetic(10_000, clusters=5, spread=2.0, seed=51)


@pytest.fixture(scope="module")
def data_file(tmp_path_factory, data_10k):
    p = tmp_path_factory.mktemp("d") / "data.csv"
    save_points(p, data_10k)
    return p


@pytest.fixture(scope="module")
def data_100k_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("d") / "data100k.csv"
    save_points(p, synthetic(100_000, clusters=5, spread=2.0, seed=52))
    return p


class TestBuild:
    def test_partitions_ceil(self, capsys, data_100k_file):
        code, rows, _ = run_cli(capsys, "build", "--data", data_100k_file, "--index", "fixed", "--leaf-size", 10_000)
        assert code == 0
        assert 1 <= int(rows[0]["partitions"]) <= 10
        assert int(rows[0]["points"]) == 100_000

    def test_empty_dataset(self, capsys, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("lat,lon\n")
        code, _, err = run_cli(capsys, "build", "--data", p)
        assert code == cli.EXIT_INGEST and "empty dataset" in err

    def test_bad_rows(self, capsys, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("lat,lon\n1,2\n95,0\n")
        code, _, err = run_cli(capsys, "build", "--data", p)
        assert code == cli.EXIT_INGEST and "3" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run_cli(capsys, "build", "--data", tmp_path / "none.csv")[0] == cli.EXIT_INGEST

    def test_deterministic_sizes(self, capsys, data_file):
        a = run_cli(capsys, "build", "--data", data_file, "--index", "quadtree", "--leaf-size", 100)[1]
        b = run_cli(capsys, "build", "--data", data_file, "--index", "quadtree", "--leaf-size", 100)[1]
        assert a[0]["index_bytes"] == b[0]["index_bytes"]

    def test_config_errors(self, capsys, data_file):
        assert run_cli(capsys, "build", "--data", data_file, "--leaf-size", 0)[0] == cli.EXIT_USAGE
        assert run_cli(capsys, "build", "--data", data_file, "--index", "hilbert", "--hilbert-order", 40)[0] == cli.EXIT_USAGE
        assert run_cli(capsys, "build", "--data", data_file, "--index", "rtree")[0] == cli.EXIT_USAGE
        assert run_cli(capsys, "frobnicate")[0] == cli.EXIT_USAGE
        assert run_cli(capsys, "build")[0] == cli.EXIT_USAGE

    def test_serialize_roundtrip(self, capsys, data_file, data_10k, tmp_path):
        out = tmp_path / "i.lsix"
        code, rows, _ = run_cli(capsys, "build", "--data", data_file, "--index", "str", "--leaf-size", 64,
                                "--search", "binary", "--out", out)
        assert code == 0 and out.read_bytes()[:5] == b"LSIX1"
        idx = bench.load_index(out)
        assert idx.config == BuildConfig("str", 64, "binary")
        assert sorted(map(tuple, data_10k.tolist())) == sorted(p for part in idx.partitions for p in part.points)
        assert idx.size_bytes() == int(rows[0]["index_bytes"])
        code, rows, _ = run_cli(capsys, "query", "--data", out, "--queries", 20, "--verify")
        assert code == 0 and rows[0]["verified"] == "True"
        assert (rows[0]["technique"], rows[0]["search"], rows[0]["leaf_size"]) == ("str", "binary", "64")

    def test_corrupt_index_file(self, tmp_path):
        p = tmp_path / "bad.lsix"
        p.write_bytes(b"LSIX1\x05fixed")
        with pytest.raises(ValueError):
            bench.load_index(p)
        p.write_bytes(b"NOPE")
        with pytest.raises(ValueError):
            bench.load_index(p)


class TestQuery:
    @pytest.mark.parametrize("technique", TECHNIQUES)
    @pytest.mark.parametrize("qt", ["range", "point", "distance", "join"])
    def test_verify_passes(self, capsys, data_file, technique, qt):
        code, rows, err = run_cli(capsys, "query", "--data", data_file, "--index", technique, "--leaf-size", 128,
                                  "--query-type", qt, "--selectivity", 1e-3, "--queries", 100 if qt != "join" else 20,
                                  "--verify", "--hilbert-order", 12)
        assert code == 0, err
        assert rows[0]["verified"] == "True" and rows[0]["queries"] in ("100", "20")

    def test_point_rows_have_zero_scan(self, capsys, data_file):
        code, rows, _ = run_cli(capsys, "query", "--data", data_file, "--query-type", "point", "--queries", 200,
                                "--plot-data")
        assert code == 0 and float(rows[0]["scan_us"]) == 0.0
        assert float(rows[0]["refinement_us"]) > 0

    def test_plot_columns(self, capsys, data_file):
        _, plain, _ = run_cli(capsys, "query", "--data", data_file, "--queries", 10)
        _, plot, _ = run_cli(capsys, "query", "--data", data_file, "--queries", 10, "--plot-data")
        assert "scan_us" not in plain[0]
        assert {"lookup_us", "refinement_us", "scan_us", "refine_us"} <= set(plot[0])

    def test_mismatch_exits_3(self, capsys, data_file, monkeypatch):
        real = bench.range_query

        def lossy(idx, q, profile=None):
            return real(idx, q, profile)[1:]

        monkeypatch.setattr(bench, "range_query", lossy)
        code, _, err = run_cli(capsys, "query", "--data", data_file, "--queries", 20, "--selectivity", 1e-3, "--verify")
        assert code == cli.EXIT_VERIFY
        assert "query 0" in err and "missing" in err

    def test_workload_and_polygon_files(self, capsys, data_file, tmp_path):
        w = tmp_path / "w.csv"
        assert run_cli(capsys, "gen", "--data", data_file, "--query-type", "distance", "--queries", 15,
                       "--selectivity", 1e-3, "--out", w)[0] == 0
        code, rows, _ = run_cli(capsys, "query", "--data", data_file, "--workload", w, "--verify")
        assert code == 0 and rows[0]["query_type"] == "distance" and rows[0]["queries"] == "15"
        polys = tmp_path / "p.txt"
        polys.write_text("a;0 0,0 50,50 50,50 0\nbroken;1 1,2 2\nc;-20 -20,-20 20,20 0\n")
        code, rows, _ = run_cli(capsys, "query", "--data", data_file, "--query-type", "join", "--polygons", polys,
                                "--verify")
        assert code == 0 and rows[0]["queries"] == "3"
        assert run_cli(capsys, "query", "--data", data_file, "--query-type", "join",
                       "--polygons", tmp_path / "none.txt")[0] == cli.EXIT_INGEST

    def test_selectivity_over_one(self, capsys, data_file):
        assert run_cli(capsys, "query", "--data", data_file, "--selectivity", 1.5)[0] == cli.EXIT_USAGE

    def test_latency_grows_with_selectivity(self, capsys, tmp_path):
        p = tmp_path / "d.csv"
        save_points(p, synthetic(50_000, clusters=5, spread=2.0, seed=53))
        means = []
        for sel in (1e-4, 1e-3, 1e-2):
            code, rows, _ = run_cli(capsys, "query", "--data", p, "--index", "fixed", "--leaf-size", 1024,
                                    "--selectivity", sel, "--queries", 300, "--seed", 1)
            means.append(float(rows[0]["mean_us"]))
        assert means == sorted(means)

    def test_report_determinism(self, capsys, data_file):
        args = ("query", "--data", data_file, "--index", "adaptive", "--queries", 50, "--seed", 3, "--verify")
        a, b = run_cli(capsys, *args)[1][0], run_cli(capsys, *args)[1][0]
        assert {k: a[k] for k in NON_TIMING} == {k: b[k] for k in NON_TIMING}

    def test_checksum_matches_oracle(self, data_10k):
        qs = gen_workload(data_10k, WorkloadSpec("range", 1e-3, "skewed", 50, 1))
        row = bench.bench(data_10k, BuildConfig("hilbert", 100), "range", qs, oracle=BruteForce(data_10k))
        assert row.checksum == bench.checksum(bench.oracle_results(BruteForce(data_10k), "range", qs))


class TestTune:
    def test_counters_shape(self, capsys, data_100k_file):
        code, rows, err = run_cli(capsys, "tune", "--data", data_100k_file, "--index", "fixed",
                                  "--sweep", "10,100,1000,10000,100000", "--selectivity", 1e-5, "--queries", 200)
        assert code == 0 and "best leaf size" in err
        scanned = [float(r["avg_scanned"]) for r in rows]
        cells = [int(r["partitions"]) for r in rows]
        assert scanned == sorted(scanned)
        assert cells == sorted(cells, reverse=True)
        assert sum(r["best"] == "True" for r in rows) == 1

    def test_single_value_sweep(self, capsys, data_file):
        code, rows, err = run_cli(capsys, "tune", "--data", data_file, "--sweep", "256", "--queries", 20)
        assert code == 0 and "best leaf size: 256" in err and rows[0]["best"] == "True"

    def test_invalid_sweep(self, capsys, data_file, data_10k):
        assert run_cli(capsys, "tune", "--data", data_file, "--sweep", "256,64")[0] == cli.EXIT_USAGE
        assert run_cli(capsys, "tune", "--data", data_file, "--sweep", "0,64")[0] == cli.EXIT_USAGE
        with pytest.raises(ConfigError):
            bench.tune(data_10k, "fixed", "binary", [], "range", [])

    def test_best_is_argmin(self, data_10k):
        qs = gen_workload(data_10k, WorkloadSpec("range", 1e-4, "skewed", 50, 1))
        rows, best = bench.tune(data_10k, "fixed", "spline", [16, 256, 4096], "range", qs)
        assert best == min(rows, key=lambda r: r.mean_us).leaf_size


class TestCompare:
    def test_two_rows_and_ratio(self, capsys, data_file):
        code, rows, _ = run_cli(capsys, "compare", "--data", data_file, "--techniques", "fixed",
                                "--sweep", "64,1024", "--queries", 50)
        assert code == 0 and [r["search"] for r in rows] == ["binary", "spline"]
        ratio = float(rows[0]["mean_us"]) / float(rows[1]["mean_us"])
        assert float(rows[0]["bs_over_ml"]) == pytest.approx(ratio, rel=1e-3)

    def test_all_techniques_verified(self, capsys, data_file):
        code, rows, _ = run_cli(capsys, "compare", "--data", data_file, "--sweep", "64,512", "--queries", 30,
                                "--verify", "--hilbert-order", 12)
        assert code == 0 and len(rows) == 12
        assert all(r["verified"] == "True" for r in rows)
        assert len({r["checksum"] for r in rows}) == 1

    def test_bad_list(self, capsys, data_file):
        assert run_cli(capsys, "compare", "--data", data_file, "--techniques", "fixed,rtree")[0] == cli.EXIT_USAGE


class TestGen:
    def test_dataset(self, capsys, tmp_path):
        out = tmp_path / "g.csv"
        assert run_cli(capsys, "gen", "--n", 500, "--clusters", 0, "--seed", 2, "--out", out)[0] == 0
        assert out.read_text().splitlines()[0] == "lat,lon" and len(out.read_text().splitlines()) == 501

    @pytest.mark.parametrize("qt", ["range", "point", "join"])
    def test_workload(self, capsys, data_file, tmp_path, qt):
        out = tmp_path / "w.csv"
        assert run_cli(capsys, "gen", "--data", data_file, "--query-type", qt, "--queries", 5, "--out", out)[0] == 0
        assert out.read_text().splitlines()[0] == qt

    def test_out_required(self, capsys):
        assert run_cli(capsys, "gen")[0] == cli.EXIT_USAGE
