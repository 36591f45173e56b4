import subprocess
import sys

import numpy as np
import pytest

from ngfix import GraphIndex
from ngfix.cli import main
from ngfix.io import read_id_lists, read_vecs, write_id_lists


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run("synth", "--n", 3000, "--d", 16, "--queries", 60, "--test", 40,
               "--shift", 2.0, "--seed", 3, "--out-dir", d) == 0
    assert run("build", "--base", d / "base.fvecs", "--M", 12, "--efc", 60,
               "--out", d / "base.ngfx") == 0
    assert run("gt", "--base", d / "base.fvecs", "--queries", d / "hist.fvecs", "--depth", 100,
               "--out", d / "hist_gt.ivecs") == 0
    assert run("gt", "--base", d / "base.fvecs", "--queries", d / "test.fvecs", "--depth", 10,
               "--out", d / "test_gt.ivecs") == 0
    assert run("fix", "--index", d / "base.ngfx", "--queries", d / "hist.fvecs",
               "--gt", d / "hist_gt.ivecs", "--rounds", "20:20:100,10:10:50",
               "--out", d / "fixed.ngfx") == 0
    return d


def test_pipeline_outputs(pipeline):
    d = pipeline
    assert read_vecs(d / "base.fvecs").shape == (3000, 16)
    assert read_vecs(d / "test.fvecs").shape == (40, 16)
    assert all(len(x) == 100 for x in read_id_lists(d / "hist_gt.ivecs"))
    base, fixed = GraphIndex.load(d / "base.ngfx"), GraphIndex.load(d / "fixed.ngfx")
    assert base.edge_count()[1] == 0 and fixed.edge_count()[1] > 0


def test_sweep_csv_and_determinism(pipeline, tmp_path):
    d = pipeline
    for name in ("a.csv", "b.csv"):
        assert run("sweep", "--index", d / "fixed.ngfx", "--queries", d / "test.fvecs",
                   "--gt", d / "test_gt.ivecs", "-k", 10, "--l-max", 40, "--format", "csv",
                   "--out", tmp_path / name) == 0
    a = (tmp_path / "a.csv").read_text().splitlines()
    b = (tmp_path / "b.csv").read_text().splitlines()
    assert a[0] == "L,recall,rderr,ndc,qps" and len(a) == 5
    strip = lambda rows: [r.rsplit(",", 1)[0] for r in rows]  # noqa: E731
    assert strip(a) == strip(b)


def test_rerun_is_byte_identical(pipeline, tmp_path):
    d = pipeline
    for name in ("x.ngfx", "y.ngfx"):
        run("fix", "--index", d / "base.ngfx", "--queries", d / "hist.fvecs",
            "--gt", d / "hist_gt.ivecs", "--rounds", "10:10:50", "--out", tmp_path / name)
    assert (tmp_path / "x.ngfx").read_bytes() == (tmp_path / "y.ngfx").read_bytes()


def test_fix_variants(pipeline, tmp_path, capsys):
    d = pipeline
    assert run("fix", "--index", d / "base.ngfx", "--queries", d / "hist.fvecs", "--gt", "approx",
               "--rounds", "10:10:50", "--out", tmp_path / "ap.ngfx") == 0
    assert run("fix", "--index", d / "base.ngfx", "--queries", d / "hist.fvecs",
               "--gt", d / "hist_gt.ivecs", "--rounds", "10:10:50", "--rfix-only",
               "--out", tmp_path / "rf.ngfx") == 0
    assert "rfix edges" in capsys.readouterr().out
    G = GraphIndex.load(tmp_path / "rf.ngfx")
    tags = {t for v in range(G.n) for _, t in G.extra_neighbors(v)}
    assert tags <= {65535}


def test_insert_delete_search(pipeline, tmp_path, capsys):
    d = pipeline
    idx = tmp_path / "m.ngfx"
    idx.write_bytes((d / "fixed.ngfx").read_bytes())
    assert run("augment", "--queries", d / "test.fvecs", "-c", 0.3, "--ratio", 2, "--seed", 1,
               "--out", tmp_path / "new.fvecs") == 0
    assert read_vecs(tmp_path / "new.fvecs").shape == (80, 16)
    assert run("insert", "--index", idx, "--add", tmp_path / "new.fvecs", "--efc", 60,
               "--partial-rebuild", 0.2, "--queries", d / "hist.fvecs",
               "--rounds", "10:10:50") == 0
    assert GraphIndex.load(idx).n == 3080
    write_id_lists(tmp_path / "del.ivecs", [np.arange(0, 100)])
    assert run("delete", "--index", idx, "--ids", tmp_path / "del.ivecs", "--compact",
               "--repair-l", 100) == 0
    G = GraphIndex.load(idx)
    assert G.tomb[:100].all() and G.removed[:100].all()
    capsys.readouterr()
    assert run("search", "--index", idx, "--queries", d / "test.fvecs", "-k", 5, "-L", 40) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 40
    assert all(int(x) >= 100 for line in lines for x in line.split())


def test_threads_env_fallback(pipeline, tmp_path, monkeypatch):
    monkeypatch.setenv("NGFIX_THREADS", "4")
    assert run("build", "--base", pipeline / "base.fvecs", "--M", 4, "--efc", 8,
               "--out", tmp_path / "t.ngfx") == 0


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as e:
        run("build", "--bogus")
    assert e.value.code != 0
    with pytest.raises(SystemExit) as e:
        run()
    assert e.value.code != 0
    assert run("build", "--base", tmp_path / "missing.fvecs", "--out", tmp_path / "x") != 0
    (tmp_path / "junk.ngfx").write_bytes(b"junk")
    assert run("search", "--index", tmp_path / "junk.ngfx", "--queries", tmp_path / "q.fvecs") != 0


def test_property_suite_command():
    assert run("test", "--suite", "theorems", "--trials", 3, "--seed", 1) == 0


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "ngfix.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "sweep" in out.stdout
