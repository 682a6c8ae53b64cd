import subprocess
import sys

import pytest

from qlat.cli_harness import cli
from qlat.cli_harness.config import ConfigError, ExperimentConfig, parse_config
from qlat.cli_harness.output import fmt, render_csv
from fractions import Fraction


def run(argv, capsys):
    rc = cli.main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_density_values(capsys):
    rc, out, _ = run(["density", "--p", "2", "--m", "2", "--n", "5"], capsys)
    assert rc == 0 and out.strip() == "15/16"
    rc, out, _ = run(["density", "--p", "3", "--m", "1", "--n", "1", "--method", "brute"], capsys)
    assert out.strip() == "10/9"


def test_density_verify(capsys):
    rc, out, _ = run(["density", "verify", "--pmax", "3", "--mmax", "4", "--nmax", "2"], capsys)
    lines = out.splitlines()
    assert rc == 0
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "p,m,n,mu_num,mu_den,brute_match,deviation"
    assert len(lines) == 2 + 2 * 4 * 2


def test_count(capsys):
    rc, out, _ = run(["count", "--m", "100"], capsys)
    assert rc == 0 and out.splitlines()[-1] == "100,1,119514"


def test_chain(capsys, tmp_path):
    from qlat.cli_harness.config import data_path
    rc, out, _ = run(["chain", "--model", data_path("chain_zero.txt"), "--m", "25"], capsys)
    rows = out.splitlines()[2:]
    assert rc == 0
    assert rows[0].endswith(",1210") and rows[1].endswith(",10")


def test_missing_option_is_usage_error(capsys):
    rc, _, err = run(["density", "--p", "3", "--m", "1"], capsys)
    assert rc == 2 and "--n" in err


def test_corrupt_lattice(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n1 0\n0 2\n")
    rc, _, err = run(["density", "--lattice", str(bad), "--p", "3", "--m", "1", "--n", "1"], capsys)
    assert rc == 2 and err.startswith("qlat: error:")


def test_missing_file(capsys):
    rc, _, _ = run(["count", "--m", "3", "--lattice", "/nonexistent/lattice.txt"], capsys)
    assert rc == 2


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("colour = blue\n")
    rc, _, _ = run(["--config", str(cfg), "ledger"], capsys)
    assert rc == 2
    with pytest.raises(ConfigError):
        parse_config("X = a b")


def test_config_paths_relative(tmp_path):
    cfg = parse_config("lattice = lat.txt\nX = 4, 8\n", tmp_path)
    assert cfg.lattice == str(tmp_path / "lat.txt") and cfg.X == (4, 8)


def test_digest_ignores_threads():
    a = ExperimentConfig()
    b = ExperimentConfig(threads=4)
    c = ExperimentConfig(seed=1)
    assert a.digest() == b.digest() != c.digest()
    assert len(a.digest()) == 16


def test_empty_ledger_is_header_only(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("D = 3\nX = 1\n")
    rc, out, _ = run(["--config", str(cfg), "ledger"], capsys)
    assert rc == 0
    lines = out.splitlines()
    assert len(lines) == 2 and lines[1].startswith("kind,key,")


def test_ledger_deterministic_across_threads(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("X = 4 8\n")
    _, one, _ = run(["--config", str(cfg), "ledger"], capsys)
    _, two, _ = run(["--config", str(cfg), "--threads", "2", "ledger"], capsys)
    assert one == two
    assert "window,4," in one


def test_output_file_and_entry_point(tmp_path):
    out = tmp_path / "o.csv"
    proc = subprocess.run([sys.executable, "-m", "qlat.cli_harness.cli", "--out", str(out),
                           "count", "--m", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == ""
    assert out.read_text().splitlines()[1] == "m,T,count"


def test_formatting():
    assert fmt(Fraction(3, 4)) == "3/4"
    assert fmt(None) == ""
    assert fmt(0.1 + 0.2) == "0.3"
    text = render_csv(["a", "b"], [[1, 2.5]], "0" * 16)
    assert text == "# config_hash=0000000000000000\na,b\n1,2.5\n"


def test_suite_unknown_criterion(capsys):
    rc, _, _ = run(["suite", "--criteria", "42"], capsys)
    assert rc == 2
