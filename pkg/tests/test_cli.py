import io
import subprocess
import sys

import pytest

from heightforge.cli import run


def call(*argv, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return {line.split("\t")[0]: line.split("\t")[1:] for line in text.splitlines()}


def test_height():
    code, out, _ = call("height", "--dyn", "sq_t.dyn", "--point", "[t:1]")
    assert code == 0 and out == "h\t1\n"


def test_canheight():
    code, out, _ = call("canheight", "--dyn", "sq_t.dyn", "--point", "[t:1]", "--tol", "1e-6")
    rec = records(out)
    assert code == 0
    assert rec["hhat"] == ["1", "exact"]
    assert int(rec["iters"][0]) <= 5


def test_ns_swap():
    code, out, _ = call("ns", "--dyn", "swap.dyn")
    rec = records(out)
    assert rec["St"] == ["[[0,3],[2,0]]"]
    assert rec["charpoly"] == ["x^2 - 6"]
    assert rec["Eplus_dim"] == ["2"]
    assert rec["kappa"][0].startswith("2.44948974278317") and rec["kappa"][1] == "interval"
    assert rec["kronecker"] == ["HasExpandingEigenvalue"]


def test_series_and_northcott():
    _, out, _ = call("series", "--dyn", "sq_t", "--point", "[t:1]")
    rec = records(out)
    assert rec["recurrence"] == ["[2]"] and rec["gf_den"] == ["1 - 2*z"] and rec["limit"] == ["1", "exact"]
    _, out, _ = call("northcott", "--dyn", "sq_t_f2", "--height-max", "2")
    rec = records(out)
    assert rec["count"] == ["33"] and rec["biconditional"] == ["true"] and rec["chain_bound"] == ["3"]


def test_other_commands():
    assert call("classify", "--matrix", "[[0,-1],[1,0]]")[0] == 0
    assert "verdict\tPreperiodic" in call("orbit", "--dyn", "sq_f3", "--point", "[2:1]")[1]
    _, out, _ = call("pushforward", "--dyn", "cusp", "--point", "[t:1]", "--terms", "2")
    assert "y0^4 - t^9*y1^4" in out
    _, out, _ = call("enumerate", "--base", "GF(2)", "--space", "P1", "--height-max", "0")
    assert out.startswith("count\t3\n")
    _, out, _ = call("basechange", "--dyn", "sq_t", "--subst", "t^2", "--point", "[t:1]", "--seed", "0")
    rec = records(out)
    assert rec["hhat_pulled"] == ["2"] and rec["scaling_ok"] == ["true"] and rec["weil_scaling"] == ["100/100"]


def test_determinism():
    argv = ("canheight", "--dyn", "sq_shift", "--sample", "30", "--seed", "3")
    assert call(*argv)[1] == call(*argv)[1]


@pytest.mark.parametrize("argv,code,name", [
    (("height", "--dyn", "missing.dyn", "--point", "[t:1]"), 2, "ValidationError"),
    (("height", "--dyn", "sq", "--point", "[0:0]"), 2, "AllZeroCoordinates"),
    (("canheight", "--dyn", "sq", "--point", "[t:1]", "--max-iter", "x"), 2, "UsageError"),
    (("enumerate", "--base", "QQ", "--space", "P1", "--height-max", "1"), 2, "RationalsNotEnumerable"),
    (("enumerate", "--base", "GF(5)", "--space", "P1xP1", "--height-max", "6"), 3, "EnumerationTooLarge"),
    (("bogus",), 2, "UsageError"),
])
def test_errors(argv, code, name):
    c, out, _ = call(*argv)
    assert c == code
    lines = out.splitlines()
    assert len(lines) == 1 and lines[0].split("\t")[:2] == ["error", name]


def test_threads_env(monkeypatch):
    monkeypatch.setenv("HEIGHTFORGE_THREADS", "zero")
    c, out, _ = call("height", "--dyn", "sq", "--point", "[t:1]")
    assert c == 2 and out.startswith("error\tValidationError")


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "heightforge.cli", "height", "--dyn", "sq_t", "--point", "[t:1]"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "h\t1\n"
