import json
import os

import numpy as np
import pytest

from etfforge import cli
from etfforge.errors import ConstructionError
from etfforge.serialize import read_json


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.mark.parametrize("q", [3, 5, 7, 9, 13])
@pytest.mark.parametrize("family", ["paley-plus", "double-paley-plus"])
def test_round_trip_construct_check_detect_circulantize(tmp_path, family, q):
    bundle = tmp_path / "bundle.json"
    gens = tmp_path / "gens.json"
    assert run_cli("construct", "--family", family, "--q", q, "--out", bundle) == 0
    assert run_cli("check", "--in", bundle) == 0
    assert run_cli("detect", "--in", bundle) == 0
    assert run_cli("circulantize", "--in", bundle, "--out", gens) == 0
    assert run_cli("check", "--in", gens, "--tol", "1e-8") == 0


def test_construct_double_paley_q5_embeds_pair(tmp_path):
    out = tmp_path / "dp5.json"
    assert run_cli("construct", "--family", "double-paley", "--q", 5, "--out", out) == 0
    doc = read_json(out)
    assert doc["d"] == 5 and doc["n"] == 10
    assert doc["pair"] is not None
    assert doc["pair"]["d"] == 5
    assert run_cli("check", "--in", out) == 0


def test_construct_double_paley_accepts_v_alias(tmp_path):
    out = tmp_path / "dp13.json"
    assert run_cli("construct", "--family", "double-paley", "--v", 13, "--out", out) == 0
    assert read_json(out)["d"] == 13


def test_construct_double_paley_q7_skew_path(tmp_path):
    out = tmp_path / "dp7.json"
    assert run_cli("construct", "--family", "double-paley", "--q", 7, "--out", out) == 0
    doc = read_json(out)
    assert doc["d"] == 7 and doc["n"] == 14
    assert run_cli("check", "--in", out) == 0


def test_construct_other_families(tmp_path):
    cases = [
        (["--family", "renes-strohmer", "--q", 7], 4, 7),
        (["--family", "steiner", "--m", 2], 7, 28),
        (["--family", "family-3x6"], 3, 6),
        (["--family", "zauner-2x4"], 2, 4),
    ]
    for extra, d, n in cases:
        out = tmp_path / ("f_%d_%d.json" % (d, n))
        assert run_cli("construct", *extra, "--out", out) == 0
        doc = read_json(out)
        assert doc["d"] == d and doc["n"] == n
        assert run_cli("check", "--in", out) == 0


def test_construct_paley_plus_q17_shape(tmp_path):
    out = tmp_path / "pp17.json"
    assert run_cli("construct", "--family", "paley-plus", "--q", 17, "--out", out) == 0
    doc = read_json(out)
    assert doc["d"] == 9 and doc["n"] == 18


def test_check_flags_perturbed_bundle(tmp_path):
    out = tmp_path / "z.json"
    run_cli("construct", "--family", "zauner-2x4", "--out", out)
    doc = read_json(out)
    doc["frame"]["re"][0][0] += 1e-6
    with open(out, "w") as fh:
        json.dump(doc, fh)
    assert run_cli("check", "--in", out) == 1
    # impossible tolerance also fails
    out2 = tmp_path / "z2.json"
    run_cli("construct", "--family", "zauner-2x4", "--out", out2)
    assert run_cli("check", "--in", out2, "--tol", "0") == 1


def test_solve_then_certify_round_trip(tmp_path):
    solved = tmp_path / "s3.json"
    cert = tmp_path / "c3.json"
    assert run_cli("solve", "--d", 3, "--out", solved) == 0
    doc = read_json(solved)
    assert doc["kind"] == "circulant-generators"
    assert doc["converged"] is True
    assert run_cli("certify", "--in", solved, "--out", cert) == 0
    cdoc = read_json(cert)
    assert cdoc["verified"] is True
    assert cdoc["kernel_dim"] == 5  # ceil(3*3/2)
    assert cdoc["seed"] == doc["seed"]


def test_certify_corrupted_generators_fails(tmp_path):
    solved = tmp_path / "s3.json"
    run_cli("solve", "--d", 3, "--out", solved)
    doc = read_json(solved)
    doc["x_re"][0] += 1e-2
    bad = tmp_path / "bad.json"
    with open(bad, "w") as fh:
        json.dump(doc, fh)
    failed = tmp_path / "failed.json"
    assert run_cli("certify", "--in", bad, "--out", failed) == 1
    fdoc = read_json(failed)
    assert fdoc["verified"] is False
    assert fdoc["reason"] == "infeasible"


def test_solve_then_detect_two_circulant_structure(tmp_path):
    solved = tmp_path / "s4.json"
    assert run_cli("solve", "--d", 4, "--out", solved) == 0
    # the generator document has no witness; --m names the block size
    assert run_cli("detect", "--in", solved, "--m", 4, "--tol", "1e-8") == 0


def test_detect_wrong_block_size_fails(tmp_path):
    bundle = tmp_path / "pp5.json"
    run_cli("construct", "--family", "paley-plus", "--q", 5, "--out", bundle)
    assert run_cli("detect", "--in", bundle, "--m", 2) == 1


def test_detect_without_witness_needs_m(tmp_path):
    solved = tmp_path / "s5.json"
    run_cli("solve", "--d", 5, "--out", solved)
    assert run_cli("detect", "--in", solved) == 2


def test_solve_nonconvergence_exit(tmp_path):
    assert run_cli("solve", "--d", 12, "--max-iter", 1) == 1


def test_sweep_small_range(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    assert run_cli("sweep", "--d", "2..3", "--out-dir", out_dir) == 0
    text = capsys.readouterr().out
    assert "2/2 verified" in text
    summary = read_json(out_dir / "summary.json")
    assert summary["verified_count"] == 2 and summary["total"] == 2
    for d in (2, 3):
        doc = read_json(out_dir / ("certificate_d%03d.json" % d))
        assert doc["verified"] is True
        assert doc["certificate"]["kernel_dim"] == -(-3 * d // 2)


def test_sweep_with_d4_reports_partial(tmp_path, capsys):
    out_dir = tmp_path / "sweep4"
    assert run_cli("sweep", "--d", "3..4", "--out-dir", out_dir) == 1
    text = capsys.readouterr().out
    assert "1/2 verified" in text
    doc = read_json(out_dir / "certificate_d004.json")
    assert doc["verified"] is False
    assert doc["failure_reason"] in ("infeasible", "rank")


def test_sweep_single_d_syntax(tmp_path):
    out_dir = tmp_path / "single"
    assert run_cli("sweep", "--d", "2", "--out-dir", out_dir) == 0
    assert (out_dir / "certificate_d002.json").exists()


def test_manifest_digest_deterministic_across_directories(tmp_path, monkeypatch):
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    dir_a.mkdir()
    dir_b.mkdir()
    monkeypatch.chdir(dir_a)
    assert run_cli("solve", "--d", 3, "--seed", 1, "--out", "gen.json") == 0
    monkeypatch.chdir(dir_b)
    assert run_cli("solve", "--d", 3, "--seed", 1, "--out", "gen.json") == 0
    doc_a = read_json(dir_a / "gen.json")
    doc_b = read_json(dir_b / "gen.json")
    assert doc_a["manifest"]["digest"] == doc_b["manifest"]["digest"]
    assert doc_a["manifest"]["outputs"] == doc_b["manifest"]["outputs"]
    # everything except the wall time is reproducible
    doc_a["manifest"].pop("wall_time")
    doc_b["manifest"].pop("wall_time")
    assert doc_a == doc_b


def test_manifest_structure(tmp_path):
    out = tmp_path / "z.json"
    run_cli("construct", "--family", "zauner-2x4", "--out", out)
    man = read_json(out)["manifest"]
    for key in ["command", "seeds", "version", "inputs", "outputs", "wall_time", "digest"]:
        assert key in man
    assert str(out) in man["outputs"]


def test_usage_errors_exit_2(tmp_path):
    assert run_cli("construct", "--family", "paley-plus", "--out", tmp_path / "x.json") == 2
    assert run_cli("construct", "--family", "steiner", "--out", tmp_path / "x.json") == 2
    assert run_cli("sweep", "--d", "a..b", "--out-dir", tmp_path / "s") == 2
    assert run_cli("solve", "--d", "nope") == 2
    assert run_cli("check", "--in", tmp_path / "missing.json") == 2
    assert run_cli("certify", "--in", tmp_path / "missing.json") == 2


def test_certify_needs_generator_document(tmp_path):
    out = tmp_path / "rs.json"
    run_cli("construct", "--family", "renes-strohmer", "--q", 7, "--out", out)
    assert run_cli("certify", "--in", out) == 2  # no circulant pair embedded


def test_circulantize_needs_witness(tmp_path):
    out = tmp_path / "z.json"
    run_cli("construct", "--family", "zauner-2x4", "--out", out)
    assert run_cli("circulantize", "--in", out, "--out", tmp_path / "g.json") == 2


def test_unknown_family_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli("construct", "--family", "mystery", "--out", tmp_path / "x.json")
    assert err.value.code == 2


def test_threads_env_controls_jobs(tmp_path, monkeypatch):
    monkeypatch.setenv("ETFFORGE_THREADS", "2")
    out_dir = tmp_path / "par"
    assert run_cli("sweep", "--d", "2..3", "--out-dir", out_dir) == 0
    monkeypatch.setenv("ETFFORGE_THREADS", "zero")
    assert run_cli("sweep", "--d", "2..2", "--out-dir", tmp_path / "x") == 2
    monkeypatch.setenv("ETFFORGE_THREADS", "0")
    assert run_cli("sweep", "--d", "2..2", "--out-dir", tmp_path / "y") == 2


def test_construction_invariant_failure_exits_3(tmp_path, monkeypatch):
    from etfforge import constructions

    def boom():
        raise ConstructionError("synthetic invariant failure")

    monkeypatch.setattr(constructions, "zauner_2x4_signature", boom)
    assert run_cli("construct", "--family", "zauner-2x4", "--out", tmp_path / "x.json") == 3


def test_check_accepts_generator_documents(tmp_path):
    solved = tmp_path / "s6.json"
    run_cli("solve", "--d", 6, "--out", solved)
    assert run_cli("check", "--in", solved, "--tol", "1e-10") == 0
