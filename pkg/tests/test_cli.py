import subprocess
import sys

from sdnview.cli import main


def test_list_prints_bundled(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "fig5-LV-DP\tsim\tsimple-lv\tsync=1 2 4 8 16 32" in out


def test_run_writes_csv(tmp_path, capsys):
    rc = main(["run", "fig3-LV-SP", "--runs", "2", "--horizon", "30", "--out-dir", str(tmp_path)])
    assert rc == 0
    series = (tmp_path / "fig3-LV-SP" / "series.csv").read_text().splitlines()
    assert series[0].startswith("time,xi_f,xi_b,sigma_f,sigma_b,f_1,f_2")
    assert len(series) == 1 + 5  # 15 two-second samples in 6 s blocks
    assert "xi_b=" in capsys.readouterr().out


def test_sweep_with_engine_override(tmp_path, capsys):
    rc = main(["sweep", "fig5-LV-DP", "--engine", "model", "--runs", "1", "--horizon", "20",
               "--seed", "3", "--out-dir", str(tmp_path)])
    assert rc == 0
    summary = (tmp_path / "fig5-LV-DP" / "summary.csv").read_text().splitlines()
    assert len(summary) == 7


def test_bad_scenario_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("[scenario]\nname = x\nruns = 0\n[traffic]\nprofile = simple-lv\n")
    assert main(["run", str(bad)]) == 2
    assert f"{bad}:3:" in capsys.readouterr().err


def test_sweep_without_sweep_section(capsys):
    assert main(["sweep", "fig3-LV-SP"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sdnview", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "fig9-LV-DP-LSVS" in proc.stdout
