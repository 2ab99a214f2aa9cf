import io
import re

import pytest

from atsgames import bundled
from atsgames.cli import main
from atsgames.gamefile import parse_game, parse_play, parse_sequential

PNG = b"\x89PNG"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name in ("fig1.game", "choice.game"):
        path = tmp_path / name
        path.write_text(bundled(name))
        out[name.split(".")[0]] = str(path)
    out["dir"] = tmp_path
    return out


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_validate(files):
    assert run("validate", files["fig1"])[0] == 0
    assert "asynchronous" in run("validate", files["choice"])[1]


def test_validate_bad_file(files, capsys):
    bad = files["dir"] / "bad.game"
    bad.write_text(bundled("fig1.game").replace("(q2)", "(q7)"))
    assert run("validate", str(bad))[0] == 1
    assert "line 13" in capsys.readouterr().err


def test_info(files):
    code, text = run("info", files["fig1"])
    assert code == 0
    assert "global states: 9" in text and "complete: no" in text


def test_solve_seq(files, tmp_path):
    fig = tmp_path / "region.png"
    witness = tmp_path / "w.seq"
    code, text = run("solve-seq", files["fig1"], "--plot", str(fig), "--witness-out", str(witness))
    assert code == 0
    assert "verdict: SystemWins" in text
    assert fig.read_bytes().startswith(PNG)
    strat = parse_sequential(witness.read_text())
    assert strat.choices[(("q0", "r0"), "a")] == ("q2", "r0")


def test_solve_dist(files, tmp_path):
    fig = tmp_path / "refuted.png"
    code, text = run("solve-dist", files["fig1"], "--horizon", "2", "--plot", str(fig))
    assert code == 10
    assert "4 strategies examined" in text
    assert text.count("losing play:") == 4
    assert fig.read_bytes().startswith(PNG)


def test_solve_dist_enumerate(files):
    code, text = run("solve-dist", files["fig1"], "--horizon", "2", "--enumerate")
    assert code == 10
    assert "4 strategies examined" in text
    assert len(re.findall(r"^strategy \d: EnvironmentWins$", text, re.M)) == 4
    # every reported losing play re-parses
    G = parse_game(bundled("fig1.game"))
    blocks = text.split("  losing play:\n")[1:]
    for block in blocks:
        lines = ["play:"] + [ln[2:] for ln in block.splitlines() if ln.startswith("    ")]
        assert parse_play("\n".join(lines) + "\n", G)


def test_solve_dist_threads_same_report(files):
    one = run("solve-dist", files["fig1"], "--horizon", "2", "--enumerate")
    two = run("solve-dist", files["fig1"], "--horizon", "2", "--enumerate", "--threads", "2")
    assert one == two


def test_unknown_exit(files):
    assert run("solve-dist", files["fig1"], "--horizon", "1")[0] == 20


def test_cap_exit(files, capsys):
    assert run("--max-plays", "1", "solve-dist", files["fig1"], "--horizon", "2")[0] == 2
    assert "cap" in capsys.readouterr().err


def test_usage_errors(files):
    with pytest.raises(SystemExit) as info:
        main(["solve-dist", files["fig1"]])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["solve-dist", files["fig1"], "--horizon", "-1"])
    assert info.value.code == 1


def test_missing_file(files):
    assert run("validate", str(files["dir"] / "nope.game"))[0] == 1


def test_reduce_then_solve_and_check(files, tmp_path):
    reduced = tmp_path / "reduced.game"
    strat = tmp_path / "w.strat"
    assert run("reduce", files["choice"], "-o", str(reduced))[0] == 0
    code, text = run("solve-dist", str(reduced), "--horizon", "12", "--strategy-out", str(strat))
    assert code == 0
    assert run("check-strategy", str(reduced), str(strat), "--horizon", "12")[0] == 0
    code, text = run("solve-dist", files["choice"], "--horizon", "4")
    assert code == 0
    assert "p: tick sync -> {left}" in text


def test_reduce_needs_asyn(files, tmp_path):
    assert run("reduce", files["fig1"], "-o", str(tmp_path / "x.game"))[0] == 1


def test_check_strategy_losing(files, tmp_path):
    strat = tmp_path / "s.strat"
    strat.write_text("a -> (q1)\nb -> (r1)\n")
    code, text = run("check-strategy", files["fig1"], str(strat), "--horizon", "2")
    assert code == 10 and "losing play" in text


def test_simulate(files):
    a = run("simulate", files["fig1"], "--schedule", "ab", "--seed", "3")
    b = run("simulate", files["fig1"], "--schedule", "a b", "--seed", "3")
    assert a == b and a[0] == 0
    assert "status: maximal" in a[1]
    assert "blocked" in run("simulate", files["fig1"], "--schedule", "aa")[1]


def test_export_dot(files, tmp_path):
    code, text = run("export-dot", files["fig1"], "--global-graph")
    assert code == 0 and text.startswith("digraph")
    target = tmp_path / "t.dot"
    assert run("export-dot", files["fig1"], "--trace", "ab", "-o", str(target))[0] == 0
    assert "->" not in target.read_text()


def test_reports_are_deterministic(files, tmp_path):
    first = run("solve-dist", files["fig1"], "--horizon", "2", "--plot", str(tmp_path / "a.png"))
    second = run("solve-dist", files["fig1"], "--horizon", "2", "--plot", str(tmp_path / "a.png"))
    assert first == second
