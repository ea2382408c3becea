import os
import pathlib

import pytest

import chmc

ROOT = pathlib.Path(__file__).resolve().parents[2]
CORPUS = pathlib.Path(os.environ.get("CHMC_CORPUS", ROOT / "corpus"))
DATA = pathlib.Path(os.environ.get("CHMC_TEST_DATA", ROOT / "tests" / "data"))


def bank(v):
    return CORPUS / "bank" / v / "contract.sol", CORPUS / "bank" / "properties.hml"


def test_oracle_engine_on_bank_v3():
    c, p = bank("v3")
    rep = chmc.verify(c, p, engine="oracle", max_depth=1, property="reversibility")
    assert rep["errors"] == []
    [r] = rep["properties"]
    assert r["verdict"] == "invalid" and r["depth"] == 0


def test_smt_refutes_liquidity():
    c, p = bank("v3")
    rep = chmc.verify(c, p, engine="bmc", max_depth=3, timeout=60, property="liquidity")
    [r] = rep["properties"]
    assert r["verdict"] == "invalid"
    assert r["depth"] == 1
    assert len(r["trace"]) == 1
    assert r["oracle_check"] == "confirmed"


def test_frontend_errors_are_reported(tmp_path):
    bad = tmp_path / "bad.sol"
    bad.write_text("contract X { int a; function f( { } }")
    rep = chmc.verify(bad, bank("v1")[1])
    assert rep["errors"]


def test_replay_bet_trace():
    r = chmc.replay(str(DATA / "bet_trace.json"), str(CORPUS / "bet" / "v1" / "contract.sol"),
                    str(CORPUS / "bet" / "properties.hml"), "liquidity")
    assert len(r.states) == 5
    assert r.reverted == [False, False, False, False]
    assert "B" in r.states[-1]


def test_missing_file_raises():
    with pytest.raises(Exception):
        chmc.replay("/nonexistent.json", "/nonexistent.sol", "/nonexistent.hml", "p")


CLI = os.environ.get("CHMC_CLI")


@pytest.mark.skipif(not CLI, reason="CHMC_CLI not set")
def test_cli_exit_codes(tmp_path):
    import json
    import subprocess

    c, p = bank("v3")
    out = tmp_path / "r.json"
    r = subprocess.run([CLI, "verify", "--contract", str(c), "--props", str(p), "--engine", "bmc",
                        "--max-depth", "2", "--property", "liquidity", "--json", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 1, r.stdout + r.stderr
    rep = json.loads(out.read_text())
    assert rep["properties"][0]["verdict"] == "invalid"

    trace = tmp_path / "t.json"
    trace.write_text(json.dumps(rep["properties"][0]["trace"]))
    r = subprocess.run([CLI, "replay", str(trace), "--contract", str(c), "--props", str(p),
                        "--property", "liquidity"], capture_output=True, text=True)
    assert r.returncode == 1 and "violated" in r.stdout

    c1, _ = bank("v1")
    r = subprocess.run([CLI, "verify", "--contract", str(c1), "--props", str(p), "--engine", "oracle",
                        "--max-depth", "1", "--property", "liquidity"], capture_output=True, text=True)
    assert r.returncode == 0, r.stdout

    r = subprocess.run([CLI, "verify", "--contract", str(tmp_path / "none.sol"), "--props", str(p)],
                       capture_output=True, text=True)
    assert r.returncode == 2

    r = subprocess.run([CLI, "bench", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 2 and "error" in r.stderr
