import json
import math

import pytest

from mesondyn import cli


def run(*args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    """Split a table file into (meta, header, rows, trailer)."""
    meta, trailer = {}, {}
    header, rows = None, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" = ")
            (meta if header is None else trailer)[key] = value
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows, trailer


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nh = 2.5\nL = 24\nseed = 7\n\n")
    rc = run("theory", "--quantity", "quantized-energy", "--n", "1..2",
             "--config", cfg, "--h", "3.5", "--out-dir", tmp_path)
    assert rc == 0
    meta, header, rows, _ = read_csv(tmp_path / "theory_quantized_energy.csv")
    assert meta["h"] == "3.5"  # flag beats file
    assert meta["L"] == "24"   # file beats default
    assert meta["seed"] == "7"
    assert header == ["n", "E"]
    assert float(rows[0][1]) == pytest.approx(2 * 3.5, rel=1e-12)
    assert float(rows[1][1]) == pytest.approx(4 * 3.5, rel=1e-12)


def test_config_file_rejects_bad_lines(tmp_path):
    bad_key = tmp_path / "a.cfg"
    bad_key.write_text("frobnicate = 1\n")
    assert run("evolve", "--config", bad_key, "--out-dir", tmp_path) == 2

    bad_syntax = tmp_path / "b.cfg"
    bad_syntax.write_text("L 24\n")
    assert run("evolve", "--config", bad_syntax, "--out-dir", tmp_path) == 2

    missing = tmp_path / "missing.cfg"
    assert run("evolve", "--config", missing, "--out-dir", tmp_path) == 4


def test_unwritable_output_directory(tmp_path):
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("plain file\n")
    rc = run("theory", "--quantity", "airy-zeros",
             "--out-dir", blocker / "sub")
    assert rc == 4


def test_oversized_lattice_reports_capacity(tmp_path):
    rc = run("evolve", "--L", "130", "--tmax", "1", "--dt", "0.5",
             "--window", "0.1:1", "--out-dir", tmp_path)
    assert rc == 3


def test_bad_values_report_usage(tmp_path):
    assert run("evolve", "--dt", "-0.1", "--out-dir", tmp_path) == 2
    assert run("evolve", "--theta", "9.9", "--out-dir", tmp_path) == 2
    with pytest.raises(SystemExit) as exc:
        run("evolve", "--format", "xml", "--out-dir", tmp_path)
    assert exc.value.code == 2


def test_evolve_writes_timeseries_heatmap_and_summary(tmp_path):
    rc = run("evolve", "--L", "20", "--h", "2", "--tmax", "9",
             "--dt", "0.02", "--window", "0.5:8",
             "--snapshots", "1.0", "--out-dir", tmp_path)
    assert rc == 0

    meta, header, rows, _ = read_csv(tmp_path / "evolve_timeseries.csv")
    assert header == ["Jt", "r_avg", "c_s", "energy", "norm_error"]
    assert len(rows) == 451
    assert meta["L"] == "20"
    assert float(rows[0][0]) == 0.0
    assert float(rows[-1][0]) == pytest.approx(9.0)
    assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-12)
    energies = [float(r[3]) for r in rows]
    assert max(energies) - min(energies) < 1e-8
    assert all(abs(float(r[4])) < 1e-10 for r in rows)

    pgm = (tmp_path / "evolve_density.pgm").read_text().splitlines()
    assert pgm[0] == "P2"
    body = [line for line in pgm[1:] if not line.startswith("#")]
    assert body[0] == "20 451"
    assert body[1] == "65535"
    assert len(body) == 2 + 451
    first_row = [int(v) for v in body[2].split()]
    assert len(first_row) == 20
    assert all(0 <= v <= 65535 for v in first_row)

    meta, header, rows, _ = read_csv(tmp_path / "evolve_summary.csv")
    assert header[:3] == ["h", "theta", "r_prime_avg"]
    assert len(rows) == 1
    assert float(rows[0][2]) >= 1.0
    assert "guard_time" in meta

    meta, header, rows, _ = read_csv(tmp_path / "evolve_occupation_t1.0.csv")
    assert header == ["r", "c", "probability"]
    assert meta["Jt"] == "1.0"
    mass = sum(float(r[2]) for r in rows)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_sweep_field_emits_fits_only_with_enough_points(tmp_path):
    common = ["--L", "30", "--tmax", "11", "--dt", "0.05",
              "--window", "1:9"]
    single = tmp_path / "single"
    rc = run("sweep-field", "--h-list", "3", *common, "--out-dir", single)
    assert rc == 0
    _, header, rows, trailer = read_csv(single / "sweep_field.csv")
    assert header == ["h", "r_prime_avg", "omega", "v", "speed_r_squared"]
    assert len(rows) == 1
    assert trailer == {}

    multi = tmp_path / "multi"
    rc = run("sweep-field", "--h-list", "2", "3", "4", *common,
             "--out-dir", multi)
    assert rc == 0
    _, _, rows, trailer = read_csv(multi / "sweep_field.csv")
    assert len(rows) == 3
    assert set(trailer) == {
        "fit_inverse_field_a", "fit_inverse_field_r_squared",
        "fit_omega_slope", "fit_omega_intercept", "fit_omega_r_squared",
    }
    r_primes = [float(r[1]) for r in rows]
    assert r_primes == sorted(r_primes, reverse=True)  # tighter at larger h


def test_sweep_theta_reports_energy_and_size(tmp_path):
    rc = run("sweep-theta", "--theta-list", "0.3927", "1.1781", "2.3562",
             "--L", "30", "--h", "1.1", "--tmax", "11", "--dt", "0.05",
             "--window", "1:9", "--out-dir", tmp_path)
    assert rc == 0
    _, header, rows, trailer = read_csv(tmp_path / "sweep_theta.csv")
    assert header == ["theta", "E_theory", "E_measured", "r_prime_avg", "v"]
    assert len(rows) == 3
    for row in rows:
        assert float(row[1]) == pytest.approx(float(row[2]), abs=1e-6)
    assert trailer["r_prime_monotone_in_E"] == "true"


def test_theory_airy_zero_table(tmp_path):
    rc = run("theory", "--quantity", "airy-zeros", "--n", "1..3",
             "--out-dir", tmp_path)
    assert rc == 0
    _, header, rows, _ = read_csv(tmp_path / "theory_airy_zeros.csv")
    assert header == ["n", "z_n"]
    assert float(rows[0][1]) == pytest.approx(-2.338107410459767, abs=1e-9)
    assert float(rows[1][1]) == pytest.approx(-4.087949444130971, abs=1e-9)
    assert float(rows[2][1]) == pytest.approx(-5.520559828095551, abs=1e-9)


def test_unknown_theory_quantity_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("theory", "--quantity", "no-such-thing", "--out-dir", tmp_path)
    assert exc.value.code == 2


def test_json_format_embeds_config(tmp_path):
    rc = run("theory", "--quantity", "airy-zeros", "--n", "1..2",
             "--format", "json", "--out-dir", tmp_path)
    assert rc == 0
    payload = json.loads((tmp_path / "theory_airy_zeros.json").read_text())
    assert payload["config"]["format"] == "json"
    assert payload["columns"]["n"] == [1, 2]
    assert payload["columns"]["z_n"][0] == pytest.approx(-2.3381074, abs=1e-6)
    assert "version" in payload


def test_spin_sample_bytes_reproduce_across_directories(tmp_path):
    args = ["spin-sample", "--L", "16", "--h", "1.1", "--at-time", "3.0",
            "--count", "1000", "--seed", "11"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(*args, "--out-dir", a) == 0
    assert run(*args, "--out-dir", b) == 0
    text_a = (a / "spin_snapshots.txt").read_bytes()
    assert text_a == (b / "spin_snapshots.txt").read_bytes()

    lines = text_a.decode().splitlines()
    body = [line for line in lines if not line.startswith("#")]
    assert len(body) == 1000
    assert all(len(line) == 15 and set(line) <= {"u", "d"} for line in body)

    _, header, rows, _ = read_csv(a / "spin_sample_summary.csv")
    assert header == ["count", "r_avg_hat", "c_s_hat", "r_stderr",
                      "r_avg_exact", "c_s_exact"]
    row = rows[0]
    stderr = float(row[3])
    assert abs(float(row[1]) - float(row[4])) < 5.0 * max(stderr, 1e-3)


def test_spin_sample_trotter_check(tmp_path):
    rc = run("spin-sample", "--L", "8", "--h", "1.1", "--at-time", "2.0",
             "--count", "100", "--trotter-check", "--trotter-dt", "0.1",
             "--trotter-time", "2.0", "--out-dir", tmp_path)
    assert rc == 0
    meta, header, rows, _ = read_csv(tmp_path / "trotter_check.csv")
    assert header == ["dt", "l2_error"]
    assert [float(r[0]) for r in rows] == [0.1, 0.05]
    ratio = float(meta["error_ratio"])
    assert 3.0 < ratio < 5.0
    assert float(rows[0][1]) > float(rows[1][1])


def test_spectrum_table_and_operator_dump(tmp_path):
    rc = run("spectrum", "--L", "12", "--h", "1.5", "--k-list", "0.0",
             "--levels", "2", "--r-max", "60",
             "--dump-operator", "hamiltonian.mtx", "--out-dir", tmp_path)
    assert rc == 0
    meta, header, rows, _ = read_csv(tmp_path / "spectrum.csv")
    assert header == ["k", "n", "E"]
    assert meta["r_max"] == "60"
    assert len(rows) == 2
    assert float(rows[0][2]) < float(rows[1][2])

    dump = (tmp_path / "hamiltonian.mtx").read_text().splitlines()
    assert dump[0].startswith("%")
    data = [line for line in dump if not line.startswith("%")]
    dim, dim2, nnz = (int(v) for v in data[0].split())
    assert dim == dim2 == 66  # L = 12 pair basis
    assert len(data) == 1 + nnz
    rr, cc, vv = data[1].split()
    assert int(rr) >= 1 and int(cc) >= 1
    float(vv)


def test_window_flag_accepts_both_separators(tmp_path):
    colon = tmp_path / "colon"
    comma = tmp_path / "comma"
    base = ["theory", "--quantity", "airy-zeros"]
    assert run(*base, "--window", "10:60", "--out-dir", colon) == 0
    assert run(*base, "--window", "10,60", "--out-dir", comma) == 0
    for where in (colon, comma):
        meta, _, _, _ = read_csv(where / "theory_airy_zeros.csv")
        assert meta["window_start"] == "10.0"
        assert meta["window_end"] == "60.0"
    with pytest.raises(SystemExit):
        run(*base, "--window", "60", "--out-dir", tmp_path)
