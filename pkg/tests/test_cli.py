"""Command-line interface: output formats, exit codes, and byte determinism."""

import subprocess
import sys

import pytest

from profitbandit.bounds import bound_report
from profitbandit.cli import main
from profitbandit.presets import get_preset

# Small enough to keep the whole module under a few seconds.
SMOKE = ["--horizon", "200", "--trajectories", "20", "--seed", "7"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    """Split CSV output into (header_lines, rows as tuples)."""
    header, rows = [], []
    lines = text.splitlines()
    assert lines, "empty CSV output"
    for line in lines:
        if line.startswith("#"):
            header.append(line)
        elif line == "policy,t,mean_regret,stderr":
            continue
        else:
            label, t, mean, err = line.split(",")
            rows.append((label, int(t), float(mean), float(err)))
    return header, rows


# -- scenarios ------------------------------------------------------------------


def test_scenarios_lists_every_preset_with_its_parameters(capsys):
    code, out, err = run_cli(capsys, "scenarios")
    assert code == 0 and err == ""
    for name in ("bernoulli:", "poisson:", "poisson-sharp:"):
        assert name in out
    assert "  means         0.1, 0.3, 0.5, 0.5, 0.7" in out
    assert "  thresholds    0.2, 0.2, 0.4, 0.6, 0.8" in out
    assert "  client rates  3, 4, 5, 6, 7 (shifted Poisson)" in out
    assert "  thresholds    1.1, 1.9, 3.1, 3.9, 5.1" in out
    assert "  reward bound  100 (bounded-reward policies)" in out
    assert "defaults      horizon 10000, trajectories 10000" in out


def test_scenarios_name_filter(capsys):
    code, out, _ = run_cli(capsys, "scenarios", "--name", "bernoulli")
    assert code == 0
    assert out.startswith("bernoulli:")
    assert "poisson:" not in out


def test_scenarios_unknown_name_exits_two(capsys):
    code, _, err = run_cli(capsys, "scenarios", "--name", "bernouli")
    assert code == 2
    assert "unknown scenario preset" in err


# -- bounds ---------------------------------------------------------------------


def test_bounds_report_for_the_bernoulli_preset(capsys):
    code, out, err = run_cli(capsys, "bounds", "bernoulli")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "scenario bernoulli (5 arms, 2 profitable)"
    table_arms = [line.split()[0] for line in lines[2:-2]]
    assert table_arms == ["0", "3", "4"]
    assert "lower slope 11.175040467099668" in out
    assert "upper slope 73.59885507954219" in out


def test_bounds_with_every_arm_profitable(capsys, tmp_path):
    path = tmp_path / "easy.cfg"
    path.write_text(
        "[arm]\nfamily = bernoulli\nmean = 0.6\nthreshold = 0.4\nclients = 2\n"
        "[policy]\nkind = kl-ucb\n",
        encoding="utf-8",
    )
    code, out, _ = run_cli(capsys, "bounds", "--config", str(path))
    assert code == 0
    assert "(1 arms, 1 profitable)" in out
    assert "all arms profitable; no asymptotic regret accrues" in out
    assert "lower slope 0" in out
    assert "upper slope 0" in out


def test_bounds_zero_gap_arm_exits_two(capsys, tmp_path):
    path = tmp_path / "knife-edge.cfg"
    path.write_text(
        "[arm]\nfamily = bernoulli\nmean = 0.4\nthreshold = 0.4\nclients = 2\n"
        "[policy]\nkind = kl-ucb\n",
        encoding="utf-8",
    )
    code, _, err = run_cli(capsys, "bounds", "--config", str(path))
    assert code == 2
    assert "arm 0" in err and "equal to its threshold" in err


@pytest.mark.parametrize("argv", [["bounds"], ["run"]])
def test_naming_no_scenario_exits_two(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert "name exactly one scenario" in err


def test_naming_both_preset_and_config_exits_two(capsys, tmp_path):
    path = tmp_path / "x.cfg"
    path.write_text("[arm]\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "bounds", "bernoulli", "--config", str(path))
    assert code == 2
    assert "name exactly one scenario" in err


def test_unknown_preset_exits_two(capsys):
    code, _, err = run_cli(capsys, "bounds", "bernouli")
    assert code == 2
    assert "unknown scenario preset" in err


# -- run ------------------------------------------------------------------------


def test_run_emits_a_well_formed_deterministic_csv(capsys):
    code, out, err = run_cli(capsys, "run", "bernoulli", *SMOKE)
    assert code == 0 and err == ""
    header, rows = parse_csv(out)
    assert header[0].startswith("# profitbandit ")
    assert header[1].startswith("# generator ")
    assert header[2] == "# scenario bernoulli"
    assert "# arm 0 family=bernoulli mean=0.1 threshold=0.2 clients=shifted-poisson(3)" in header
    assert "# policy kl-bernoulli-ucb c=3 bound=1" in header
    assert "# policy ts prior=jeffreys" in header
    assert "# run horizon=200 trajectories=20 seed=7 grid=every-step" in header
    report = bound_report(get_preset("bernoulli").specs)
    assert (
        f"# bound-slopes lower={report.lower_slope:.17g} "
        f"upper={report.upper_slope:.17g}" in header
    )

    labels = sorted({row[0] for row in rows})
    assert labels == [
        "bayes-ucb",
        "emp-kl-ucb",
        "kl-bernoulli-ucb",
        "kl-gaussian-ucb",
        "kl-ucb",
        "kl-ucb-plus",
        "oracle",
        "ts",
    ]
    # sorted by label then round; one row per round per policy
    assert rows == sorted(rows, key=lambda row: (row[0], row[1]))
    for label in labels:
        times = [row[1] for row in rows if row[0] == label]
        assert times == list(range(1, 201))
    # cumulative regret never decreases, and its spread is a real stderr
    for label in labels:
        means = [row[2] for row in rows if row[0] == label]
        assert all(b >= a for a, b in zip(means, means[1:]))
    assert all(row[3] >= 0.0 for row in rows)
    assert all(row[2] == 0.0 and row[3] == 0.0 for row in rows if row[0] == "oracle")


def test_run_policies_filter(capsys):
    code, out, _ = run_cli(
        capsys, "run", "bernoulli", *SMOKE, "--policies", "oracle,kl-ucb"
    )
    assert code == 0
    header, rows = parse_csv(out)
    assert {row[0] for row in rows} == {"oracle", "kl-ucb"}
    policy_lines = [line for line in header if line.startswith("# policy ")]
    assert policy_lines == ["# policy oracle", "# policy kl-ucb c=3"]


def test_run_unknown_policy_exits_two(capsys):
    code, _, err = run_cli(capsys, "run", "bernoulli", "--policies", "ucb1")
    assert code == 2
    assert "not in the scenario's roster" in err
    assert "available:" in err


def test_run_rejects_invalid_sizes(capsys):
    code, _, err = run_cli(capsys, "run", "poisson", "--trajectories", "0")
    assert code == 2
    assert "trajectories" in err


def test_run_desk_scale_yields_to_explicit_sizes(capsys):
    code, out, _ = run_cli(
        capsys,
        "run",
        "bernoulli",
        "--desk-scale",
        "--trajectories",
        "2",
        "--policies",
        "oracle",
    )
    assert code == 0
    header, rows = parse_csv(out)
    assert "# run horizon=5000 trajectories=2 seed=1 grid=every-step" in header
    assert len(rows) == 5000


def test_run_out_file_and_worker_count_leave_the_bytes_alone(capsys, tmp_path):
    argv = [
        "run",
        "bernoulli",
        "--horizon",
        "120",
        "--trajectories",
        "130",  # three seed blocks, so multiprocessing has real joins to do
        "--policies",
        "kl-ucb,ts",
    ]
    serial = tmp_path / "serial.csv"
    forked = tmp_path / "forked.csv"
    code, out, _ = run_cli(capsys, *argv, "--out", str(serial))
    assert code == 0 and out == ""
    code, _, _ = run_cli(capsys, *argv, "--workers", "2", "--out", str(forked))
    assert code == 0
    serial_bytes = serial.read_bytes()
    assert serial_bytes == forked.read_bytes()
    assert serial_bytes.decode("utf-8").splitlines()[0].startswith("# profitbandit")


def test_run_unwritable_out_path_exits_one(capsys, tmp_path):
    code, _, err = run_cli(
        capsys,
        "run",
        "bernoulli",
        *SMOKE,
        "--policies",
        "oracle",
        "--out",
        str(tmp_path / "missing-dir" / "trace.csv"),
    )
    assert code == 1
    assert "error:" in err


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "profitbandit.cli", "scenarios"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    assert "bernoulli:" in proc.stdout
