import csv
import json
import textwrap

import numpy as np
import pytest

from plasmon_entangle import cli
from plasmon_entangle.experiments import run_rates, run_steady, run_sweep, run_transient
from plasmon_entangle.errors import ValidationError
from plasmon_entangle.fileio import load_scenario, parse_scenario
from plasmon_entangle.units import convert


def preset(name, overrides=()):
    return load_scenario(cli.preset_dir() / f"{name}.yaml", overrides)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def first_max(x, y):
    i = next(i for i in range(1, len(y) - 1) if y[i] >= y[i - 1] and y[i] >= y[i + 1])
    return x[i]


def test_presets_are_listed():
    names = cli.preset_names()
    for prefix in ("fig2", "fig4", "fig5", "fig7", "fig8", "fig9"):
        assert any(n.startswith(prefix) for n in names)


def test_slots_shift_first_gamma_ab_maximum():
    base = run_rates(preset("fig3_rates_finite_wire"), cli.preset_dir())
    slotted = run_rates(preset("fig3_rates_finite_wire_slots"), cli.preset_dir())
    (_, a), = base.tables.values()
    (_, b), = slotted.tables.values()
    assert first_max(a[:, 0], a[:, 1]) != pytest.approx(first_max(b[:, 0], b[:, 1]), abs=0.01)


def test_vacuum_transient_is_small_but_nonzero():
    out = run_transient(preset("fig4_vacuum"), cli.preset_dir())
    assert 0.01 < out.summary["peak_concurrence"] < 0.15
    assert out.summary["max_deviation"] < 1e-6


def test_finite_guide_beats_infinite_guide():
    fin = run_transient(preset("fig4_finite_wire"), cli.preset_dir()).summary["peak_concurrence"]
    inf = run_transient(preset("fig4_infinite_wire"), cli.preset_dir()).summary["peak_concurrence"]
    assert fin > inf
    fin = run_transient(preset("fig5_finite_groove"), cli.preset_dir()).summary["peak_concurrence"]
    inf = run_transient(preset("fig5_infinite_groove"), cli.preset_dir()).summary["peak_concurrence"]
    assert fin > inf


def test_preset_orderings():
    peaks = {n: run_transient(preset(n), cli.preset_dir()).summary["peak_concurrence"]
             for n in ("fig4_vacuum", "fig4_infinite_wire", "fig4_infinite_wire_slots",
                       "fig4_finite_wire", "fig4_finite_wire_slots")}
    order = list(peaks.values())
    assert order == sorted(order)


def test_dephased_curve_factorizes():
    s0 = preset("fig6_groove_dephasing", ["qubits.dephasing=0 ueV"])
    s1 = preset("fig6_groove_dephasing")
    a = run_transient(s0, cli.preset_dir()).tables["transient_groove_dephased_analytic"][1]
    b = run_transient(s1, cli.preset_dir()).tables["transient_groove_dephased_analytic"][1]
    # the time axis is in units of 1/Gamma_aa, which excludes the dephasing rate
    t = a[:, 0] / convert(11.38, "ueV", "rad/s")
    gamma = s1.qubits.dephasing.value
    assert np.max(np.abs(b[:, 1] - np.exp(-gamma * t) * a[:, 1])) < 1e-8


@pytest.mark.parametrize("regime", ["symmetric", "asymmetric"])
def test_steady_state_populations(regime):
    out = run_steady(preset(f"fig9_groove_{regime}"), cli.preset_dir())
    pops = out.summary["steady_populations"]
    if regime == "symmetric":
        assert abs(pops["eg"] - pops["ge"]) < 1e-9
    else:
        assert pops["eg"] > pops["ge"]
    assert out.summary["plateau_deviation"] < 1e-6


def test_pump_sweep_has_interior_maximum():
    out = run_sweep(preset("fig9_pump_sweep"), cli.preset_dir())
    (_, data), = out.tables.values()
    i = int(np.argmax(data[:, 1]))
    assert 0 < i < len(data) - 1
    assert data[i, 1] > data[0, 1] and data[i, 1] > data[-1, 1]


def test_asymmetric_beats_symmetric_at_strong_pump():
    c = {}
    for regime in ("symmetric", "asymmetric"):
        s = preset(f"fig9_groove_{regime}", ["pump.rabi=3 gamma_aa"])
        c[regime] = run_steady(s, cli.preset_dir()).summary["C_inf"]
    assert c["asymmetric"] >= c["symmetric"]


def test_separation_sweep_parallel_is_order_stable():
    s = preset("fig8_separation_sweep", ["run.sweep={start: 0.25, stop: 2.5, count: 16}"])
    serial = run_sweep(s, cli.preset_dir(), parallel=1)
    threaded = run_sweep(s, cli.preset_dir(), parallel=4)
    assert len(serial.tables) == 3
    for key in serial.tables:
        assert np.array_equal(serial.tables[key][1], threaded.tables[key][1], equal_nan=True)


def test_failed_sweep_points_are_recorded():
    s = preset("fig8_separation_sweep", ["run.geometry=centered", "provider.length=500 nm",
                                         "run.sweep={start: 0.5, stop: 2.0, count: 4}", "run.regimes=[symmetric]"])
    out = run_sweep(s, cli.preset_dir())
    (_, data), = out.tables.values()
    assert np.isnan(data[-1, 1]) and np.isfinite(data[0, 1])
    assert out.summary["failures"] and "DomainError" in out.summary["failures"][0]["diagnostic"]


# --------------------------------------------------------------------------- command line


def test_cli_transient_writes_expected_files(tmp_path, capsys):
    rc = cli.main(["transient", "--preset", "fig4_vacuum", "--out", str(tmp_path), "--plot-script"])
    assert rc == 0
    header, data = read_csv(tmp_path / "transient_vacuum.csv")
    assert header == ["t_gamma_aa", "C", "rho_ee", "rho_eg", "rho_ge", "rho_gg"]
    assert data.shape == (401, 6)
    assert (tmp_path / "transient_vacuum_analytic.csv").exists()
    assert (tmp_path / "plot_transient_vacuum.py").exists()
    summary = json.loads((tmp_path / "transient_vacuum_summary.json").read_text())
    assert summary["max_deviation"] < 1e-6


def test_cli_rates_columns(tmp_path):
    assert cli.main(["rates", "--preset", "fig2_rates_infinite_wire", "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "rates_infinite_wire.csv")
    assert header == ["dz_over_lambda_spp", "gamma_ab_over_gamma0", "g_ab_over_gamma0"]
    assert len(data) == 301


def test_cli_sweep_line_count(tmp_path):
    rc = cli.main(["sweep", "--preset", "fig8_separation_sweep", "--out", str(tmp_path),
                   "--set", "run.sweep={start: 0.5, stop: 2.5, count: 100}", "--parallel", "2"])
    assert rc == 0
    for regime in ("symmetric", "antisymmetric", "asymmetric"):
        lines = (tmp_path / f"c_inf_vs_separation_{regime}.csv").read_text().splitlines()
        assert len(lines) == 101
        x = np.array([float(l.split(",")[0]) for l in lines[1:]])
        assert np.all(np.diff(x) > 0)


def test_cli_override_equals_edit(tmp_path):
    text = (cli.preset_dir() / "fig4_vacuum.yaml").read_text().replace("637.5 nm", "500 nm")
    edited = tmp_path / "edited.yaml"
    edited.write_text(text)
    assert cli.main(["transient", "--scenario", str(edited), "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["transient", "--preset", "fig4_vacuum", "--out", str(tmp_path / "b"),
                     "--set", "qubits.z_b=500 nm"]) == 0
    assert (tmp_path / "a" / "transient_vacuum.csv").read_bytes() == \
        (tmp_path / "b" / "transient_vacuum.csv").read_bytes()


def test_cli_validation_exit_code(tmp_path, capsys):
    assert cli.main(["transient", "--preset", "fig4_vacuum", "--out", str(tmp_path),
                     "--set", "qubits.nonsense=1"]) == 2
    assert "qubits.nonsense" in capsys.readouterr().err
    assert cli.main(["rates", "--preset", "fig4_vacuum", "--out", str(tmp_path)]) == 2
    assert cli.main(["transient", "--preset", "nope", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("provider:\n  kind: free_space\nqubits:\n  z_a: 0 nm\n")
    assert cli.main(["transient", "--scenario", str(bad), "--out", str(tmp_path)]) == 2


def test_cli_numerical_exit_code(tmp_path):
    # Gamma_ab = Gamma_aa leaves a dark state: no unique steady state
    table = tmp_path / "dark.gtab"
    table.write_text(textwrap.dedent("""\
        green-table v1
        site a 0 0 0
        site b 0 0 1e-7
        3.0e15, a, a, 0.0, 1.0e9
        3.0e15, b, b, 0.0, 1.0e9
        3.0e15, a, b, 0.0, 1.0e9
        3.0e15, b, a, 0.0, 1.0e9
        """))
    scenario = tmp_path / "dark.yaml"
    scenario.write_text(textwrap.dedent("""\
        provider: {kind: tabulated, table: dark.gtab}
        qubits: {site_a: a, site_b: b, dipole: 30 D, frequency: 3.0e15 rad/s}
        pump: {regime: antisymmetric, rabi: 0 gamma_aa}
        run: {mode: steady, horizon: 5}
        """))
    assert cli.main(["steady", "--scenario", str(scenario), "--out", str(tmp_path / "o")]) == 4


def test_cli_consistency_exit_code(tmp_path, monkeypatch):
    from plasmon_entangle import experiments

    monkeypatch.setattr(experiments, "CONSISTENCY_TOL", 1e-15)
    assert cli.main(["transient", "--preset", "fig4_vacuum", "--out", str(tmp_path)]) == 3


def test_transient_with_pump_runs_as_steady(tmp_path):
    text = (cli.preset_dir() / "fig9_groove_symmetric.yaml").read_text().replace("mode: steady", "mode: transient")
    path = cli.preset_dir() / "fig9_groove_symmetric.yaml"
    s = parse_scenario(text)
    out = run_steady(s, path.parent)
    assert out.summary["C_inf"] > 0
    with pytest.raises(ValidationError):
        run_transient(s, path.parent)
