import json

import pytest

from kzp.cli import main


def run(args):
    return main(args)


def test_gen_writes_families(tmp_path):
    out = tmp_path / "fams.json"
    assert run(["gen", "--n", "2", "--p", "5", "--h", "3", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["plus"]) == 1 and payload["minus"] == []
    comp = payload["plus"][0]["components"][0]
    assert comp["terms"]  # graded-lex sorted term list
    keys = [tuple(t["e"]) for t in comp["terms"]]
    assert keys == sorted(keys, key=lambda e: (sum(e), e))


def test_gen_h_zero_note(tmp_path):
    out = tmp_path / "fams.json"
    assert run(["gen", "--n", "3", "--p", "5", "--h", "0", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["plus"] == [] and payload["minus"] == [] and "note" in payload


def test_not_prime_exits_2():
    assert run(["gen", "--n", "2", "--p", "6", "--h", "1"]) == 2
    assert run(["suite", "--n", "2", "--p", "6", "--h", "1"]) == 2


def test_suite_small_cell_passes(tmp_path):
    out = tmp_path / "certs.ndjson"
    assert run(["suite", "--n", "3", "--p", "5", "--h", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    names = [json.loads(l)["check"] for l in lines]
    assert names == [
        "counting",
        "flatness",
        "homogeneity",
        "degree-bounds",
        "orthogonality",
        "point-independence",
        "lagrangian",
        "nilpotency",
        "rank-structure",
        "closed-form",
        "formal-rank",
    ]
    assert all(json.loads(l)["status"] == "pass" for l in lines)


def test_suite_deterministic_reruns(tmp_path):
    a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    for path in (a, b):
        assert run(["suite", "--n", "3", "--p", "5", "--h", "2", "--seed", "fixed", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_suite_mutation_self_test(tmp_path):
    out = tmp_path / "certs.ndjson"
    assert run(["suite", "--n", "3", "--p", "5", "--h", "3", "--mutate", "--out", str(out)]) == 1
    failed = {json.loads(l)["check"] for l in out.read_text().splitlines() if json.loads(l)["status"] == "fail"}
    assert {"flatness", "orthogonality", "closed-form"} <= failed
    witnessed = [
        json.loads(l)
        for l in out.read_text().splitlines()
        if json.loads(l)["status"] == "fail"
    ]
    assert all("witness" in d for d in witnessed)


def test_suite_irrational_h(tmp_path):
    out = tmp_path / "certs.ndjson"
    assert run(
        ["suite", "--n", "3", "--p", "5", "--ext-degree", "2", "--h", "0,1", "--out", str(out)]
    ) == 0
    by_name = {json.loads(l)["check"]: json.loads(l) for l in out.read_text().splitlines()}
    assert by_name["no-solution"]["status"] == "pass"
    assert by_name["steepest-descent-spectrum"]["status"] == "pass"
    assert by_name["flatness"]["status"] == "not-applicable"


def test_check_single_name(tmp_path):
    out = tmp_path / "one.ndjson"
    assert run(["check", "--name", "orthogonality", "--n", "3", "--p", "5", "--h", "3", "--out", str(out)]) == 0
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(recs) == 1 and recs[0]["check"] == "orthogonality"
    assert run(["check", "--name", "bogus", "--n", "3", "--p", "5", "--h", "3"]) == 2


def test_check_derivative_identity():
    assert run(["check", "--name", "derivative-identity", "--n", "2", "--p", "5", "--h", "3"]) == 0


def test_katz_subcommand():
    assert run(["katz", "--n", "3", "--p", "5", "--h", "3"]) == 0


def test_formal_and_pcurv_subcommands(capsys):
    assert run(["formal", "--n", "3", "--p", "5", "--h", "3"]) == 0
    data = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert data["dimension"] == 1
    assert run(["pcurv", "--n", "2", "--p", "5", "--h", "3"]) == 0


def test_spectrum_subcommand(tmp_path):
    out = tmp_path / "spec.ndjson"
    assert run(
        ["spectrum", "--n", "2", "--p", "5", "--ext-degree", "2", "--h", "0,1", "--out", str(out)]
    ) == 0
    assert run(["spectrum", "--n", "2", "--p", "5", "--h", "3"]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "p": 5, "h": 2, "seed": "file-seed"}))
    out = tmp_path / "c.ndjson"
    assert run(["suite", "--config", str(cfg), "--h", "3", "--out", str(out)]) == 0
    rec = json.loads(out.read_text().splitlines()[0])
    assert rec["params"]["h"] == "3"  # flag overrides file
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "p": 5, "bogus": 1}))
    assert run(["suite", "--config", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    bad2 = tmp_path / "bad2.json"
    bad2.write_text("{not json")
    assert run(["suite", "--config", str(bad2)]) == 2
