import subprocess
import sys

import pytest

from spectori.cli import main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_periods_record(capsys):
    code, out = run(["periods", "--family", "odd", "--n", "0", "--R", "4.25"], capsys)
    assert code == 0
    assert out.startswith("record=PERIODS ")
    assert " Iplus=[6,10] " in out
    code2, out2 = run(["periods", "--family", "odd", "--n", "0", "--R", "4.25"], capsys)
    assert out == out2


def test_periods_values(capsys):
    _, out = run(["periods", "--family", "even", "--n", "0"], capsys)
    fields = dict(tok.split("=", 1) for tok in out.split()[1:])
    assert fields["Dplus"] == "-1" and fields["Dminus"] == "1"


def test_search_then_verify(capsys, tmp_path):
    code, out = run(["search", "--family", "odd", "--n", "0", "--R", "4.0", "--target-plus", "3/5",
                     "--report", str(tmp_path / "rep")], capsys)
    assert code == 0
    cand = next(ln for ln in out.splitlines() if ln.startswith("candidate "))
    assert "intPlus=3,5" in cand and "intMinus=1" in cand
    assert (tmp_path / "rep" / "newton.png").stat().st_size > 0
    f = tmp_path / "cand.txt"
    f.write_text(cand + "\n")
    code, out = run(["verify", "--candidate-file", str(f)], capsys)
    assert code == 0 and "overall=true" in out.lower()
    tampered = cand.replace("intPlus=3,5", "intPlus=3,6")
    f.write_text(tampered + "\n")
    code, out = run(["verify", "--candidate-file", str(f)], capsys)
    assert code == 2


def test_dump_contours(capsys, tmp_path):
    out_csv = tmp_path / "c.csv"
    code, _ = run(["dump-contours", "--family", "even", "--n", "0", "--output", str(out_csv)], capsys)
    assert code == 0
    assert out_csv.read_text().splitlines()[0] == "curve,label,index,re,im"


def test_periods_dump_and_report(capsys, tmp_path):
    code, _ = run(["periods", "--family", "odd", "--n", "1", "--R", "3", "--lambda", "0.3,0.8",
                   "--lambda", "0.3,-0.8", "--dump-contours", str(tmp_path / "c.csv"),
                   "--report", str(tmp_path / "rep")], capsys)
    assert code == 0
    assert (tmp_path / "rep" / "contours.png").exists()
    assert "B(1)" in (tmp_path / "c.csv").read_text()


def test_asymptotics_csv(capsys):
    code, out = run(["asymptotics", "--family", "odd", "--n", "0", "--R", "2.5", "--mu", "0.3", "--nu", "0",
                     "--sign", "minus", "--mu-list", "100", "1000", "10000"], capsys)
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0].startswith("mu,") and rows[-1].startswith("fitted_order,")
    order = float(rows[-1].split(",")[1])
    assert abs(order + 1.5) < 0.2


def test_errors_exit_one(capsys):
    code = main(["periods", "--family", "odd", "--n", "0", "--R", "1.5"])
    assert code == 1
    assert "error" in capsys.readouterr().err
    code = main(["verify", "--candidate", "nonsense"])
    assert code == 1


def test_base_check_reports_table(capsys):
    code, out = run(["base-check"], capsys)
    lines = out.strip().splitlines()
    assert all(ln.startswith("record=BASE ") for ln in lines)
    assert "check=even_genus0 pass=true" in out
    # s = t/2 + O(t^2) misses the |s - t| <= 5 t^2 bound, so the table has failures
    assert code == 2
    assert "check=odd_genus1_s_half_t=0.01 pass=true" in out


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "spectori.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "base-check" in out.stdout
