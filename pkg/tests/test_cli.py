import csv

import pytest

from wreathwalk.cli import COMMANDS, main


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# wreathwalk ") and "config_hash=" in lines[0] and "rng=" in lines[0]
    return list(csv.DictReader(lines[1:]))


def test_harmonic_verify(tmp_path):
    assert main(["harmonic-verify", "--preset", "symz", "--window", "1000", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "harmonic-verify.csv")
    assert len(rows) == 2001 and all(r["residual"] == "0/1" for r in rows)
    man = (tmp_path / "harmonic-verify.manifest").read_text()
    assert "rng=" in man and "wall_seconds=" in man and "param.window=1000" in man


def test_couple_tail_profile(tmp_path):
    code = main(["couple", "--preset", "ll-z2", "--gamma", "sigma0", "--x", "0", "--trials", "5000",
                 "--ns", "16,64", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "couple.csv")
    assert [r["n"] for r in rows] == ["16", "64"]
    assert set(rows[0]) == {"n", "p_hat", "stderr", "sqrt_n_times_p"}


def test_malformed_config_writes_nothing(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("trials = 10\nunknown_key = 1\n")
    out = tmp_path / "out"
    assert main(["couple", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    cfg.write_text("trials = [\n")
    assert main(["couple", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_bad_values_exit_2(tmp_path):
    assert main(["voltage", "--d", "1", "--out", str(tmp_path)]) == 2
    assert main(["couple", "--gamma", "sigma1", "--out", str(tmp_path)]) == 2
    assert main(["no-such-command"]) == 2
    assert list(tmp_path.iterdir()) == []


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('q = 3\nlevels = 4\na = "1"\n')
    assert main(["da-energy", "--config", str(cfg), "--levels", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "da-energy.csv")
    assert [r["N"] for r in rows] == ["0", "1", "2"]
    assert "param.q=3" in (tmp_path / "da-energy.manifest").read_text()


def test_determinism(tmp_path):
    bodies = []
    for k in range(2):
        d = tmp_path / str(k)
        assert main(["couple-fc", "--runs", "300", "--seed", "5", "--out", str(d)]) == 0
        bodies.append((d / "couple-fc.csv").read_bytes())
    assert bodies[0] == bodies[1]


def test_exit_codes(tmp_path):
    assert main(["non-normal-demo", "--runs", "10", "--out", str(tmp_path)]) == 4
    assert main(["fc-class", "--element", "alpha[1]", "--cap", "100", "--out", str(tmp_path / "x")]) == 3
    assert not (tmp_path / "x").exists()


def test_list_presets(tmp_path, capsys):
    assert main(["list-presets", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    rows = {line.split()[0]: line.split()[1] for line in text.splitlines() if line.strip() and ":" not in line}
    assert rows["symz"] == "§4.2" and rows["da-q2"] == "§4.2" and rows["plateau-z2"] == "§5"


@pytest.mark.parametrize("argv", [
    ["walk-speed", "--n", "64", "--trials", "200"],
    ["convolve", "--n", "2"],
    ["tv", "--n", "2", "--m", "3"],
    ["sn-delta", "--n", "2"],
    ["couple-exit", "--trials", "200", "--rs", "8"],
    ["da-harmonic", "--depth", "5"],
    ["voltage", "--L", "11"],
    ["eta-check", "--L", "11"],
    ["zwz-cocycle", "--pairs", "20"],
    ["growth", "--preset", "da-q2", "--radii", "1,2"],
    ["delta-build"],
    ["fc-class"],
    ["copy-check"],
    ["plateau", "--n-max", "4"],
])
def test_every_subcommand_runs(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 0
    assert (tmp_path / f"{argv[0]}.csv").exists()


def test_all_families_present():
    expected = {"walk-speed", "convolve", "tv", "sn-delta", "couple", "couple-exit", "couple-fc",
                "non-normal-demo", "harmonic-verify", "da-harmonic", "da-energy", "voltage", "eta-check",
                "zwz-cocycle", "growth", "delta-build", "fc-class", "copy-check", "plateau"}
    assert expected <= set(COMMANDS)
