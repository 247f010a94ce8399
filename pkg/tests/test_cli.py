"""CLI behaviour: subcommands, determinism, exit codes."""

import subprocess
import sys

import pytest

from zedlink.cli import main

FAST_RUNS = {
    "bistatic": ["linkbudget", "bistatic", "--preset", "fig4b-768MHz"],
    "monostatic": ["linkbudget", "monostatic", "--preset", "fig4c-mmwave"],
    "phy-ber": ["phy", "ber", "--preset", "phy-ber-default", "--set", "phy.trials=5"],
    "phy-psd": ["phy", "psd", "--preset", "phy-ber-default", "--set", "phy.psd_symbols=8"],
    "aloha": [
        "protocol", "aloha", "--preset", "fig4b-768MHz", "--points", "3",
        "--set", "access.slots=5000",
    ],
    "rate": ["protocol", "rate", "--preset", "fig4b-768MHz"],
    "plan": ["protocol", "plan", "--preset", "fig4b-768MHz"],
    "position": [
        "position", "simulate", "--preset", "positioning-grid5m", "--points", "100",
    ],
    "sweep": [
        "sweep", "--preset", "fig4b-768MHz", "--var", "link.d_ue_bs_km",
        "--start", "0.1", "--stop", "10", "--points", "5", "--scale", "log",
    ],
}


def run_to_file(argv, path):
    code = main(argv + ["--out", str(path)])
    assert code == 0
    return path.read_bytes()


@pytest.mark.parametrize("name", sorted(FAST_RUNS))
def test_subcommand_deterministic(name, tmp_path, capsys):
    first = run_to_file(FAST_RUNS[name], tmp_path / "a.csv")
    second = run_to_file(FAST_RUNS[name], tmp_path / "b.csv")
    assert first == second
    assert first  # non-empty


def test_echo_precedes_results(capsys):
    code = main(["linkbudget", "bistatic", "--preset", "fig4b-768MHz"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.index("# resolved scenario") < out.index("carrier_hz,")
    assert "frequency_hz = 768000000.0" in out


def test_seed_flag_changes_random_outputs(tmp_path, capsys):
    args = FAST_RUNS["position"]
    a = run_to_file(args + ["--seed", "1"], tmp_path / "a.csv")
    b = run_to_file(args + ["--seed", "2"], tmp_path / "b.csv")
    assert a != b


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[carrier]\nbandwidth_hz = 9e6\n")  # frequency missing
    assert main(["linkbudget", "bistatic", "--config", str(bad)]) == 2
    assert main(["linkbudget", "bistatic", "--preset", "nope"]) == 2
    assert (
        main(["linkbudget", "bistatic", "--preset", "fig4b-768MHz",
              "--set", "carrier.nope=1"])
        == 2
    )


def test_mode_mismatch_is_config_error(capsys):
    assert main(["linkbudget", "monostatic", "--preset", "fig4b-768MHz"]) == 2
    assert main(["linkbudget", "bistatic", "--preset", "fig4c-mmwave"]) == 2


def test_domain_error_exit_code(capsys):
    code = main(
        ["linkbudget", "bistatic", "--preset", "fig4b-768MHz",
         "--set", "link.d_ue_bs_km=-1"]
    )
    assert code == 3


def test_io_error_exit_code(tmp_path, capsys):
    code = main(
        ["linkbudget", "bistatic", "--preset", "fig4b-768MHz",
         "--out", str(tmp_path / "no" / "such" / "dir.csv")]
    )
    assert code == 4


def test_psd_metadata_and_annotated_peaks(tmp_path, capsys):
    path = tmp_path / "psd.csv"
    run_to_file(FAST_RUNS["phy-psd"], path)
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# scenario_hash:") for l in comments)
    peaks_line = next(l for l in comments if l.startswith("# peaks_hz:"))
    peaks = [float(v) for v in peaks_line.split(":", 1)[1].split(",") if v.strip()]
    assert any(abs(p - 200.0) < 20 for p in peaks)
    assert any(abs(p + 200.0) < 20 for p in peaks)
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "offset_hz,power_db"


def test_sweep_requires_range(capsys):
    assert main(["sweep", "--preset", "fig4b-768MHz", "--var", "link.d_ue_bs_km"]) == 2


def test_protocol_plan_prints_grid_map(capsys):
    assert main(["protocol", "plan", "--preset", "fig4b-768MHz"]) == 0
    out = capsys.readouterr().out
    assert "DL |R" in out and "UL |D" in out


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "zedlink.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "linkbudget" in proc.stdout and "sweep" in proc.stdout
