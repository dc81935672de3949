# test_cli.py 命令行：退出码、stdout/stderr 分离与可复现性
import pytest
from click.testing import CliRunner

from dna_netstack.cli import cli
from dna_netstack.fasta import format_fasta, parse_fasta
from dna_netstack.ledger import read_chain

THREE_CELLS = """\
node 0001
node 0002
node 0003
link 0001 0002
link 0002 0003
route 0001 0003 via 0002
route 0002 0003 via 0003
"""


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:  # click >= 8.2 总是分开捕获 stderr
        return CliRunner()


@pytest.fixture
def payload(tmp_path):
    p = tmp_path / "payload.bin"
    p.write_bytes(bytes(range(256)) * 4)
    return p


def _run(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def test_encode_then_decode(runner, tmp_path, payload):
    frames = tmp_path / "frames.fa"
    back = tmp_path / "back.bin"
    r = _run(runner, "encode", payload, "--out", frames)
    assert r.exit_code == 0, r.stderr
    assert frames.read_text().startswith(">frame 0 ecc=triple\n")
    assert "[Config] seed=0" in r.stderr
    r = _run(runner, "decode", frames, "--out", back)
    assert r.exit_code == 0, r.stderr
    assert back.read_bytes() == payload.read_bytes()


def test_decode_truncated_file_names_missing_segment(runner, tmp_path, payload):
    frames = tmp_path / "frames.fa"
    _run(runner, "encode", payload, "--out", frames)
    records = parse_fasta(frames.read_text())
    assert len(records) > 2
    frames.write_text(format_fasta(records[:-1]))
    r = _run(runner, "decode", frames, "--out", tmp_path / "x.bin")
    assert r.exit_code == 1
    assert "[decode] ERROR MissingSegmentError:" in r.stderr


def test_encode_empty_file_fails(runner, tmp_path):
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    r = _run(runner, "encode", empty)
    assert r.exit_code == 1
    assert "EmptyPayloadError" in r.stderr
    assert r.stdout == ""


def test_usage_errors_exit_2(runner, tmp_path):
    assert _run(runner, "encode").exit_code == 2
    assert _run(runner, "encode", tmp_path / "nope.bin").exit_code == 2
    assert _run(runner, "send", "--ecc", "quintuple", tmp_path).exit_code == 2


def test_noiseless_send_reports_csv(runner, payload):
    r = _run(runner, "send", payload, "--seed", 1)
    assert r.exit_code == 0, r.stderr
    lines = r.stdout.splitlines()
    assert lines[0] == "hop,src,dst,frames_sent,corrupted,corrected,dropped"
    hop, src, dst, sent, corrupted, corrected, dropped = lines[1].split(",")
    assert (hop, src, dst) == ("1", "0001", "0002")
    assert int(sent) > 1 and corrupted == corrected == dropped == "0"
    assert "recovered=true" in r.stderr


def test_send_is_reproducible(runner, tmp_path, payload):
    args = ["send", payload, "--seed", 42, "--p-sub", 0.003, "--p-ins", 0.0005]
    first, second = _run(runner, *args), _run(runner, *args)
    assert first.stdout == second.stdout
    assert first.exit_code == second.exit_code


def test_send_over_topology_with_report(runner, tmp_path, payload):
    topo = tmp_path / "net.topo"
    topo.write_text(THREE_CELLS)
    out = tmp_path / "got.bin"
    report = tmp_path / "run.md"
    stats = tmp_path / "hops.csv"
    r = _run(runner, "send", payload, "--topology", topo, "--dst", "0003", "--out", out,
             "--stats-csv", stats, "--report", report, "--html")
    assert r.exit_code == 0, r.stderr
    assert r.stdout == ""
    assert out.read_bytes() == payload.read_bytes()
    assert stats.read_text().count("\n") == 3
    assert "## Per-hop delivery" in report.read_text(encoding="utf-8")
    assert (tmp_path / "run.html").read_text(encoding="utf-8").startswith("<html>")


def test_send_without_switching_delivers_nothing(runner, payload):
    r = _run(runner, "send", payload, "--no-switching")
    assert r.exit_code == 1
    assert "MissingSegmentError" in r.stderr


def test_send_without_route_fails(runner, tmp_path, payload):
    topo = tmp_path / "net.topo"
    topo.write_text(THREE_CELLS)
    r = _run(runner, "send", payload, "--topology", topo, "--src", "0003", "--dst", "0001")
    assert r.exit_code == 1
    assert "NoRouteError" in r.stderr


def test_bad_topology_reports_position(runner, tmp_path, payload):
    topo = tmp_path / "net.topo"
    topo.write_text("node 0001\nnode 0002\nlink 0001 0009\n")
    r = _run(runner, "send", payload, "--topology", topo)
    assert r.exit_code == 1
    assert f"{topo}:3:1:" in r.stderr


def test_chain_init_then_validate(runner, tmp_path):
    c = tmp_path / "c.fa"
    assert _run(runner, "chain", "init", "--out", c, "--difficulty", 1).exit_code == 0
    r = _run(runner, "chain", "validate", c)
    assert r.exit_code == 0
    assert r.stdout == ""


def test_mutated_replica_fails_validation(runner, tmp_path):
    c, m = tmp_path / "c.fa", tmp_path / "m.fa"
    _run(runner, "chain", "init", "--out", c, "--difficulty", 1)
    _run(runner, "chain", "mine", c, "--payload", "one", "--payload", "two")
    assert _run(runner, "chain", "replicate", c, "--p-mut", 0.5, "--seed", 3, "--out", m).exit_code == 0
    r = _run(runner, "chain", "validate", m)
    assert r.exit_code == 1
    assert r.stdout.strip()
    assert "[chain validate] ERROR ValidationError:" in r.stderr


def test_resolve_picks_longest(runner, tmp_path):
    c, c3, c5, w = (tmp_path / n for n in ("c.fa", "c3.fa", "c5.fa", "w.fa"))
    _run(runner, "chain", "init", "--out", c, "--difficulty", 1)
    _run(runner, "chain", "mine", c, "--payload", "a", "--payload", "b", "--out", c3)
    _run(runner, "chain", "mine", c, *[x for p in "abcd" for x in ("--payload", p)], "--out", c5)
    r = _run(runner, "chain", "resolve", c3, c5, "--out", w)
    assert r.exit_code == 0, r.stderr
    assert len(read_chain(str(w))) == 5
    assert w.read_text() == c5.read_text()


def test_mining_stats_are_appended(runner, tmp_path):
    c, stats = tmp_path / "c.fa", tmp_path / "mine.csv"
    _run(runner, "chain", "init", "--out", c, "--difficulty", 2, "--stats-csv", stats)
    _run(runner, "chain", "mine", c, "--payload", "x", "--payload", "y", "--stats-csv", stats)
    lines = stats.read_text().splitlines()
    assert lines[0] == "index,difficulty,attempts,wall_ms"
    assert [l.split(",")[0] for l in lines[1:]] == ["0", "1", "2"]


def test_chain_commands_are_reproducible(runner, tmp_path):
    outs = []
    for run in ("a", "b"):
        c, m = tmp_path / f"{run}.fa", tmp_path / f"{run}-m.fa"
        _run(runner, "chain", "init", "--out", c, "--difficulty", 2)
        _run(runner, "chain", "mine", c, "--payload", "same")
        _run(runner, "chain", "replicate", c, "--p-mut", 0.01, "--seed", 5, "--out", m)
        outs.append((c.read_text(), m.read_text()))
    assert outs[0] == outs[1]


def test_config_file_and_cli_precedence(runner, tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("difficulty: 1\nseed: 9\n")
    c1, c2 = tmp_path / "c1.fa", tmp_path / "c2.fa"
    r = _run(runner, "chain", "init", "--config", cfg, "--out", c1)
    assert "[Config] seed=9" in r.stderr
    assert read_chain(str(c1)).difficulty == 1
    _run(runner, "chain", "init", "--config", cfg, "--out", c2, "--difficulty", 2)
    assert read_chain(str(c2)).difficulty == 2


def test_demo_is_reproducible(runner, tmp_path):
    first = _run(runner, "demo", "--seed", 7, "--p-sub", 0.001)
    second = _run(runner, "demo", "--seed", 7, "--p-sub", 0.001)
    assert first.exit_code == 0, first.stderr
    assert first.stdout == second.stdout
    assert "chain_winner_length=4" in first.stdout


def test_root_demo_flag(runner, tmp_path):
    r = _run(runner, "--demo")
    assert r.exit_code == 0, r.stderr
    assert "recovered=true" in r.stdout
    report = tmp_path / "demo.md"
    r = _run(runner, "demo", "--report", report, "--html")
    assert r.exit_code == 0
    assert (tmp_path / "demo.json").exists()
    assert (tmp_path / "demo.html").exists()
