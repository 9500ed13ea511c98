import shutil
import subprocess

import pytest

from rrs_vanet import analysis
from rrs_vanet.authority import TrcState
from rrs_vanet.cli import main
from rrs_vanet.sim import SimConfig


@pytest.fixture
def world(tmp_path, monkeypatch):
    monkeypatch.delenv("RRS_SEED", raising=False)
    monkeypatch.chdir(tmp_path)
    assert main(["keygen", "--trc-out", "trc.bin", "--seed", "5"]) == 0
    for rid in ("alice", "bob", "carol"):
        assert main(["register", "--trc", "trc.bin", "--rid", rid, "--out", f"{rid}.key"]) == 0
    assert main(["make-ring", "--member", "alice.key", "--member", "bob.key", "--member", "carol.key", "--out", "ring.bin"]) == 0
    assert main(["payload", "--timestamp-ms", "1000", "--x", "3.5", "--event", "hazard", "--out", "msg.bin"]) == 0
    return tmp_path


def sign(extra=()):
    return main(
        ["sign", "--key", "bob.key", "--ring", "ring.bin", "--trc-pub", "trc.bin.pub", "--msg", "msg.bin",
         "--out", "sig.bin", "--envelope-out", "env.bin", "--seed", "1", *extra]
    )


def verify(msg="msg.bin", pub="trc.bin.pub"):
    return main(["verify", "--ring", "ring.bin", "--trc-pub", pub, "--msg", msg, "--sig", "sig.bin"])


def test_sign_verify_exit_codes(world):
    assert sign() == 0
    assert verify() == 0
    assert verify(pub="trc.bin") == 0  # snapshot works as a public key source
    assert verify(msg="alice.key") == 1
    (world / "sig.bin").write_bytes(b"\x01junk")
    assert verify() == 1


def test_trace_and_revoke(world, capsys):
    sign()
    capsys.readouterr()
    assert main(["trace", "--trc", "trc.bin", "--envelope", "env.bin"]) == 0
    out = capsys.readouterr().out
    assert "rid bob" in out
    key_hex = next(line.split()[1] for line in out.splitlines() if line.startswith("key "))
    assert main(["revoke", "--trc", "trc.bin", "--key", key_hex, "--broadcast-out", "b.bin"]) == 0
    state = TrcState.load(world / "trc.bin")
    assert len(state.rl) == 1
    assert main(["revoke", "--trc", "trc.bin", "--key", key_hex]) == 2  # already revoked


def test_seeded_keygen_and_env_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    main(["keygen", "--trc-out", "a.bin", "--seed", "1"])
    main(["keygen", "--trc-out", "b.bin", "--seed", "1"])
    assert (tmp_path / "a.bin.pub").read_bytes() == (tmp_path / "b.bin.pub").read_bytes()
    monkeypatch.setenv("RRS_SEED", "2")
    main(["keygen", "--trc-out", "c.bin", "--seed", "1"])
    assert (tmp_path / "c.bin.pub").read_bytes() != (tmp_path / "a.bin.pub").read_bytes()


def test_curves_and_complexity(tmp_path, capsys):
    out = tmp_path / "f3.csv"
    assert main(["curves", "--figure", "3", "--n", "50", "--out", str(out)]) == 0
    assert out.read_text() == analysis.figure_csv(3, n=50)
    assert main(["complexity", "--table5"]) == 0
    assert "O(log(N_obu))" in capsys.readouterr().out
    assert main(["complexity", "--protocol", "rrsb", "--search", "binary"]) == 0


def test_simulate_writes_report(tmp_path, monkeypatch):
    monkeypatch.delenv("RRS_SEED", raising=False)
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(SimConfig(num_vehicles=3, duration_ms=3000, sample_interval_ms=1000).to_text())
    assert main(["simulate", "--config", str(cfg), "--report-out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "metrics.csv").read_text().count("\n") == 5


def test_bench_audit(capsys):
    assert main(["bench", "--iters", "10", "--n", "1", "2", "--audit"]) == 0
    assert ",ok" in capsys.readouterr().out


def test_bad_input_exit_code(tmp_path):
    assert main(["verify", "--ring", str(tmp_path / "missing"), "--trc-pub", "x", "--msg", "x", "--sig", "x"]) == 2


@pytest.mark.skipif(shutil.which("rrs-vanet") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["rrs-vanet", "complexity", "--table5"], capture_output=True, text=True)
    assert res.returncode == 0 and "RRSB:" in res.stdout
