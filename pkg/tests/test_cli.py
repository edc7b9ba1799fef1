import io
import json
import math

import pytest

from ldpsim.cli import main, parse_onebit_file, parse_two_party_file
from ldpsim.problems import read_instance
from ldpsim.reductions import enumerate_transcript_distribution

LN3 = math.log(3.0)

TWO_PARTY_FILE = """\
two-party bits=1 channel=bsc flip=0.375
step prefix=- sender=alice p0=0 p1=1
"""

ONE_BIT_FILE = """\
one-bit eps=1.0986122886681098 users=2
user p_alice=0.75 p_bob=0.25
user p_alice=0.7 p_bob=0.7
"""


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def test_parse_two_party_file():
    protocol = parse_two_party_file(io.StringIO(TWO_PARTY_FILE))
    assert protocol.num_bits == 1
    assert protocol.channel.crossover == 0.375
    dist = enumerate_transcript_distribution(protocol, 1, 0)
    assert dist["1"] == pytest.approx(0.625, abs=1e-12)


def test_parse_onebit_file():
    protocol = parse_onebit_file(io.StringIO(ONE_BIT_FILE))
    assert protocol.max_users == 2
    assert protocol.epsilon == pytest.approx(LN3, rel=1e-12)


def test_parse_rejects_malformed():
    with pytest.raises(ValueError):
        parse_two_party_file(io.StringIO("one-bit eps=1 users=0\n"))
    with pytest.raises(ValueError):
        parse_onebit_file(io.StringIO("one-bit eps=1 users=3\nuser p_alice=0.5 p_bob=0.5\n"))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def test_gen_instance_pc_prints_oracle(capsys, tmp_path):
    out = tmp_path / "inst.txt"
    code, stdout, _ = run_cli(
        capsys, "gen-instance", "pc", "--k", "2", "--l", "8", "--seed", "7", "--out", str(out)
    )
    assert code == 0
    text = out.read_text()
    lines = text.splitlines()
    inst = read_instance(lines[:3])
    assert inst.hops == 2 and inst.size == 8
    assert lines[3].startswith("oracle ")


def test_gen_instance_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "gen-instance", "hl", "--b", "2", "--l", "3", "--seed", "5")
    code2, out2, _ = run_cli(capsys, "gen-instance", "hl", "--b", "2", "--l", "3", "--seed", "5")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "consistent_count 2" in out1


def test_run_json_output(capsys):
    code, stdout, _ = run_cli(
        capsys,
        "run",
        "--problem",
        "pc",
        "--k",
        "1",
        "--l",
        "2",
        "--eps",
        "20",
        "--m",
        "30",
        "--trials",
        "4",
        "--seed",
        "3",
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["trials"] == 4
    assert payload["success_count"] == 4
    assert "wall_time" not in payload


def test_run_with_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "pc", "k": 1, "l": 2, "eps": 20.0, "m": 30, "trials": 2}))
    code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg), "--seed", "3")
    assert code == 0
    assert json.loads(stdout)["trials"] == 2


def test_run_missing_required_flags(capsys):
    code, _stdout, stderr = run_cli(capsys, "run", "--problem", "pc", "--seed", "1")
    assert code == 1
    assert "error" in stderr


def test_seed_is_mandatory(capsys):
    code, _stdout, _stderr = run_cli(
        capsys, "run", "--problem", "pc", "--k", "1", "--l", "2", "--eps", "1", "--m", "5", "--trials", "1"
    )
    assert code == 1


def test_sweep_csv_output(capsys):
    code, stdout, _ = run_cli(
        capsys,
        "sweep",
        "--problem",
        "pc",
        "--k",
        "1",
        "--l",
        "2",
        "--eps",
        "20",
        "--m",
        "10",
        "--trials",
        "2",
        "--seed",
        "3",
        "--axis",
        "m",
        "--values",
        "10,20",
    )
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0].startswith("problem,solver,shape")
    assert len(lines) == 3


def test_audit_table(capsys):
    code, stdout, _ = run_cli(
        capsys,
        "audit",
        "--problem",
        "pc",
        "--k",
        "1",
        "--l",
        "2",
        "--eps",
        "1",
        "--m",
        "2",
        "--seed",
        "9",
    )
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0] == "user_id\tmax_log_ratio\tbudget\tstatus"
    assert all(line.endswith("pass") for line in lines[1:])


def test_reduce_lift_echo(capsys, tmp_path):
    proto = tmp_path / "proto.txt"
    proto.write_text(TWO_PARTY_FILE)
    code, stdout, _ = run_cli(
        capsys, "reduce", "lift", "--eps", str(LN3), "--protocol", str(proto)
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["lift_advantage"] == pytest.approx(0.125, abs=1e-12)
    assert payload["channel_flip"] == 0.375
    assert payload["steps"][0]["sender"] == "alice"


def test_reduce_lift_channel_mismatch(capsys, tmp_path):
    proto = tmp_path / "proto.txt"
    proto.write_text(TWO_PARTY_FILE.replace("0.375", "0.25"))
    code, _stdout, stderr = run_cli(
        capsys, "reduce", "lift", "--eps", str(LN3), "--protocol", str(proto)
    )
    assert code == 1
    assert "advantage" in stderr


def test_reduce_lower_echo(capsys, tmp_path):
    proto = tmp_path / "onebit.txt"
    proto.write_text(ONE_BIT_FILE)
    code, stdout, _ = run_cli(
        capsys, "reduce", "lower", "--eps", str(LN3), "--protocol", str(proto)
    )
    assert code == 0
    payload = json.loads(stdout)
    assert payload["lower_advantage"] == pytest.approx(0.25, abs=1e-12)
    assert [s["case"] for s in payload["steps"]] == ["case1", "case2"]


def test_reduce_amplify_echo(capsys):
    code, stdout, _ = run_cli(capsys, "reduce", "amplify", "--flip", "0.25", "--m", "3")
    assert code == 0
    assert json.loads(stdout)["effective_flip"] == 0.15625


def test_reduce_rounds_echo(capsys):
    code, stdout, _ = run_cli(capsys, "reduce", "rounds", "--rounds", "2")
    assert code == 0
    payload = json.loads(stdout)
    assert payload["output_rounds"] == 3
    assert payload["first_speaker"] == "bob"
    assert payload["schedule"] == [["bob", 1], ["alice", 2], ["bob", 1]]


def test_enumerate_output(capsys, tmp_path):
    proto = tmp_path / "proto.txt"
    proto.write_text(TWO_PARTY_FILE)
    code, stdout, _ = run_cli(capsys, "enumerate", "--protocol", str(proto), "--x", "1", "--y", "0")
    assert code == 0
    assert stdout.splitlines() == ["0 0.375", "1 0.625"]


def test_acceptance_subset(capsys):
    code, stdout, _ = run_cli(capsys, "acceptance", "--only", "8", "--only", "10")
    assert code == 0
    lines = stdout.splitlines()
    assert len(lines) == 2
    assert all(line.startswith("PASS criterion-") for line in lines)


def test_acceptance_failure_exits_two(capsys, monkeypatch):
    import ldpsim.acceptance as acceptance

    monkeypatch.setitem(
        acceptance.CRITERIA, 10, ("stub-failure", lambda: (False, "forced"), 60.0)
    )
    code, stdout, _ = run_cli(capsys, "acceptance", "--only", "10")
    assert code == 2
    assert stdout.splitlines()[0].startswith("FAIL criterion-10")


def test_unknown_command_is_usage_error(capsys):
    code, _stdout, _stderr = run_cli(capsys, "bogus")
    assert code == 1


def test_help_exits_zero(capsys):
    code, stdout, _ = run_cli(capsys, "--help")
    assert code == 0
    assert "gen-instance" in stdout
