import json

import pytest

from app.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out.strip(), captured.err


def test_decompose(capsys):
    """Test the decompose command"""
    code, out, _ = run(capsys, "decompose", "--graph", "n=3; edges=2->1,1->3")
    assert code == 0
    assert out == "-[1>2>3] - [1>3>2]"


def test_residue(capsys):
    code, out, _ = run(capsys, "residue", "--expr", "(z1-z2)^-2*(z1-z3)^-1", "--line", "1>2")
    assert code == 0
    assert out == "-(w2-w3)^-2"


def test_fourier(capsys):
    code, out, _ = run(capsys, "fourier", "--expr", "(z1-z2)^-2", "--forest", "1>2")
    assert (code, out) == (0, "-l1")


def test_convolve(capsys):
    code, out, _ = run(capsys, "convolve", "--f", "(w1-w2)^-1", "--q", "L1*L2")
    assert (code, out) == (0, "-1/2*L1^2*L2 - 1/6*L1^3")


def test_lie_dim(capsys):
    """Test the dimension line followed by the bracket basis"""
    code, out, _ = run(capsys, "lie-dim", "--n", "3")
    assert code == 0
    assert out.splitlines() == ["dim P^cl(3) = 2", "[x1,[x2,x3]]", "[x1,[x3,x2]]"]


@pytest.mark.parametrize("argv", [
    ("residue", "--expr", "z1^-1", "--line", "1>2"),
    ("residue", "--expr", "(z1-z2)^-1", "--line", "1>3", "--n", "2"),
    ("decompose", "--graph", "n=2; edges=1->1"),
    ("fourier", "--expr", "z1 $ z2", "--forest", "1>2"),
    ("residue", "--expr", "1/0", "--line", "1>2"),
    ("lie-dim", "--n", "0"),
])
def test_errors_exit_with_two(capsys, argv):
    """Test that bad input gives exit code 2 and a message on stderr"""
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "error:" in err


def test_verify_json(capsys):
    """Test verify prints JSON carrying the seed to stdout"""
    code, out, err = run(capsys, "verify", "--suite", "lie-dim", "--n", "3", "--seed", "11")
    assert code == 0
    assert "seed:" not in err
    data = json.loads(out)
    assert data["seed"] == 11
    assert data["passed"] is True


def test_verify_text(capsys):
    code, out, err = run(capsys, "verify", "--suite", "fourier-delta", "--n", "2", "--format", "text")
    assert code == 0
    assert out.startswith("seed: 42")
    assert (out + err).count("seed:") == 1
    assert "[PASS] fourier-delta/delta" in out


def test_verify_rejects_unknown_suite(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["verify", "--suite", "bogus"])
    assert excinfo.value.code == 2
