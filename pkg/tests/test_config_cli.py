import os

import pytest

from shiftflex.cli import main
from shiftflex.config import RunConfig, StageOverride, parse_config, render_config
from shiftflex.errors import ConfigError

SMALL = """\
[shift]
alphabet = 2
matrix = 11 11

[roof]
constant = 1.0

[target]
c_fraction = 0.1

[run]
stages = 1
seed = 0
metric_depth = 2
samples = 32

[stage 1]
word_length = 10
overlap_length = 1
delta = 0.11
kappa = 0.5
radius = 0.5
entropy_target = 0.38
block_depth = 2
"""

GOLDEN = """\
[shift]
alphabet = 2
matrix = 11 10

[roof]
constant = 1.0

[target]
c_fraction = 0.5

[run]
stages = 1
"""

FULL3 = """\
[shift]
alphabet = 3
matrix = 111 111 111

[roof]
constant = 1.0

[target]
c_fraction = 0.5

[run]
stages = 1
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return str(p)


def test_roundtrip_is_field_identical():
    rc = parse_config(SMALL)
    assert parse_config(render_config(rc)) == rc
    rc2 = RunConfig(
        alphabet=3,
        forbidden=("11", "202"),
        block=3,
        roof_depth=1,
        roof_values=(("0", 1.0), ("1", 1.5), ("2", 2.0)),
        c=0.25,
        stages=2,
        seed=9,
        stage_overrides=(StageOverride(index=1, delta=0.2, word_length=8),),
    )
    assert parse_config(render_config(rc2)) == rc2


def test_parse_diagnostics_carry_line_numbers():
    with pytest.raises(ConfigError) as exc:
        parse_config("[shift]\nalphabet == 3\n")
    assert "line 2" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        parse_config("[shift]\nalphabet = three\n")
    assert "line 2" in str(exc.value) and "alphabet" in str(exc.value)
    with pytest.raises(ConfigError):
        parse_config("alphabet = 3\n")  # key outside a section


def test_forbidden_word_shift():
    rc = parse_config(
        "[shift]\nalphabet = 2\nforbidden = 11\n\n[roof]\nconstant = 1.0\n"
        "\n[target]\nc_fraction = 0.5\n"
    )
    shift = rc.build_shift()
    from shiftflex import golden_mean_shift, topological_entropy

    assert abs(
        topological_entropy(shift) - topological_entropy(golden_mean_shift())
    ) < 1e-12


def test_cmd_entropy_outputs(tmp_path, capsys):
    p = tmp_path / "full3.cfg"
    p.write_text(FULL3)
    assert main(["entropy", "--config", str(p)]) == 0
    assert capsys.readouterr().out.strip() == "1.098612288668"
    g = tmp_path / "golden.cfg"
    g.write_text(GOLDEN)
    assert main(["entropy", "--config", str(g)]) == 0
    assert capsys.readouterr().out.strip() == "0.481211825060"


def test_cmd_entropy_reducible(tmp_path, capsys):
    p = tmp_path / "red.cfg"
    p.write_text(GOLDEN.replace("11 10", "11 01"))
    assert main(["entropy", "--config", str(p)]) == 1
    assert "reducible transition matrix" in capsys.readouterr().err


def test_cmd_parry(tmp_path, capsys):
    g = tmp_path / "golden.cfg"
    g.write_text(GOLDEN)
    assert main(["parry", "--config", str(g)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("pi = 0.723606797750 0.276393202250")
    assert "P[1] = 1.000000000000 0.000000000000" in out


def test_cmd_ud_check(capsys):
    assert main(["ud-check", "0", "01", "11"]) == 0
    assert capsys.readouterr().out.strip() == "uniquely decipherable"
    assert main(["ud-check", "0", "01", "10"]) == 0
    assert (
        capsys.readouterr().out.strip()
        == "NOT uniquely decipherable: 010 = 0·10 = 01·0"
    )
    assert main(["ud-check", "00", "01", "10", "11"]) == 0
    assert capsys.readouterr().out.strip() == "uniquely decipherable"


def test_cmd_find_word(tmp_path, capsys):
    f = tmp_path / "full2.cfg"
    f.write_text(GOLDEN.replace("11 10", "11 11"))
    assert main(["find-word", "--config", str(f), "-l", "8"]) == 0
    assert capsys.readouterr().out.strip() == "00000001  max overlap 0 < 2"
    one = tmp_path / "one.cfg"
    one.write_text(GOLDEN.replace("alphabet = 2", "alphabet = 1").replace("matrix = 11 10", "matrix = 1"))
    assert main(["find-word", "--config", str(one), "-l", "8"]) == 1
    assert "not found" in capsys.readouterr().err


def test_cmd_construct_small(small_cfg, tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["construct", "--config", small_cfg, "--out", out]) == 0
    text = capsys.readouterr().out
    assert "pass" in text
    csv = open(os.path.join(out, "stages.csv")).read().splitlines()
    assert csv[0] == (
        "stage,k,gamma,h_top,roof_integral,normalized_entropy,"
        "bracket_lower,bracket_upper,dist_prev,ud_pass,sync_depth"
    )
    assert len(csv) == 3  # header + base + stage 1
    assert csv[2].split(",")[:3] == ["1", "29", "13"]
    assert csv[2].split(",")[9] == "pass"
    assert os.path.exists(os.path.join(out, "summary.txt"))
    assert os.path.exists(os.path.join(out, "stage-1.report"))


def test_cmd_construct_deterministic(small_cfg, tmp_path, capsys):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["construct", "--config", small_cfg, "--out", out1]) == 0
    assert main(["construct", "--config", small_cfg, "--out", out2]) == 0
    capsys.readouterr()
    a = open(os.path.join(out1, "stages.csv"), "rb").read()
    b = open(os.path.join(out2, "stages.csv"), "rb").read()
    assert a == b


def test_cmd_construct_infeasible(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(SMALL.replace("c_fraction = 0.1", "c_fraction = 1.5"))
    assert main(["construct", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "infeasible-target" in capsys.readouterr().err


def test_cmd_construct_zero_stages(small_cfg, tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["construct", "--config", small_cfg, "--out", out, "--stages", "0"]) == 0
    capsys.readouterr()
    csv = open(os.path.join(out, "stages.csv")).read().splitlines()
    assert len(csv) == 2  # header + base row only
    assert csv[1].startswith("0,")


def test_cmd_report(small_cfg, tmp_path, capsys):
    out = str(tmp_path / "o")
    main(["construct", "--config", small_cfg, "--out", out])
    capsys.readouterr()
    assert main(["report", "--out", out]) == 0
    assert "verdict" in capsys.readouterr().out
