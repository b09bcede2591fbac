from __future__ import annotations

import subprocess
import sys

import pytest

from lfends.cli import main
from lfends.graphs import parse_edge_list
from lfends.tower import cantor_tower, format_tower, parse_tower


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_tower_table(capsys):
    code, out, _ = run(["tower", "--family", "line", "--depth", "4", "--window", "12"], capsys)
    assert code == 0 and "sizes: 2 2 2 2" in out and "\nstabilized" in out


def test_endsum_table(capsys):
    code, out, _ = run(["endsum", "--left", "line", "--right", "line", "--depth", "4"], capsys)
    assert code == 0 and out.count("3 = 2+2-1      OK") == 4


def test_bad_family_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["tower", "--family", "badname"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_domain_error_line(capsys):
    code, out, err = run(["tower", "--family", "line", "--depth", "4", "--window", "3"], capsys)
    assert code == 1 and err.startswith("ERR:WindowTooSmall") and err.count("\n") == 1


def test_missing_source_is_usage_error(capsys):
    code, _, err = run(["tower"], capsys)
    assert code == 2 and "usage" in err


@pytest.mark.parametrize("argv", [
    ["gen", "--family", "grid(2)", "--window", "2"],
    ["ends", "--family", "comb", "--depth", "3"],
    ["h0", "--family", "binary_tree", "--depth", "3", "--basis", "--coeff", "fp:5"],
    ["h0", "--family", "line", "--depth", "3", "--reduced", "--end", "1,1,1"],
    ["ray", "--family", "regular_tree(3)", "--depth", "3", "--end", "2,5,11"],
    ["retract", "--family", "grid(2)", "--depth", "3"],
    ["tree", "--family", "comb", "--depth", "3"],
    ["dot", "--family", "binary_tree", "--depth", "3"],
])
def test_verbs_are_deterministic(argv, capsys):
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first[0] == 0 and first == second and first[1]


def test_files_round_trip(tmp_path, capsys):
    tower_file = tmp_path / "t.txt"
    code, out, _ = run(["tower", "--family", "binary_tree", "--depth", "3", "--out", str(tower_file)], capsys)
    assert code == 0 and parse_tower(tower_file.read_text()).sizes == (2, 4, 8)
    code, out, _ = run(["dot", "--tower", str(tower_file)], capsys)
    assert out.count("[label") == 15
    ray_file = tmp_path / "r.txt"
    run(["ray", "--family", "line", "--depth", "3", "--end", "1,1,1", "--out", str(ray_file)], capsys)
    code, out, _ = run(["ray", "--family", "line", "--depth", "3", "--ray", str(ray_file)], capsys)
    assert code == 0 and out == "points to end 1,1,1\n"
    graph_file = tmp_path / "g.txt"
    run(["gen", "--family", "comb", "--window", "4", "--out", str(graph_file)], capsys)
    assert len(parse_edge_list(graph_file.read_text()).adjacency) == 15
    code, out, _ = run(["ends", "--graph", str(graph_file), "--depth", "2", "--window", "4"], capsys)
    assert code == 0 and "sizes: 2 3" in out


def test_realize_cantor(tmp_path, capsys):
    f = tmp_path / "c.txt"
    f.write_text(format_tower(cantor_tower(4)))
    code, out, _ = run(["realize", "--tower", str(f)], capsys)
    assert code == 0 and "canonical codes equal: yes" in out and "basis size: 16" in out


def test_incoherent_end_is_domain_error(capsys):
    code, _, err = run(["h0", "--family", "comb", "--depth", "3", "--reduced", "--end", "0,2,0"], capsys)
    assert code == 1 and err.startswith("ERR:IncoherentPrefix")


def test_console_script_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "lfends.cli", "ends", "--family", "line", "--depth", "2"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and "stabilized: 2 ends" in ok.stdout
    bad = subprocess.run([sys.executable, "-m", "lfends.cli", "nosuchverb"], capture_output=True, text=True)
    assert bad.returncode == 2
