"""Calibrate the guide models and regenerate the bundled preset scenarios.

Run from the repository root: ``python scripts/make_presets.py``. It prints the
calibrated parameters and the transient-peak ordering of every configuration.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml
from scipy.optimize import brentq, least_squares

from plasmon_entangle.entanglement import peak_concurrence
from plasmon_entangle.fileio import dump_green_table
from plasmon_entangle.greens import (
    FabryPerotModel,
    FiniteGuide,
    FreeSpace,
    InfiniteGuide,
    Plasmon1DModel,
    SlotScatterer,
    SlottedGuide,
    TabulatedGreenSet,
)
from plasmon_entangle.rates import QubitPair, RateMatrix, compute_rates
from plasmon_entangle.units import DEBYE, convert

OUT = Path(__file__).resolve().parents[1] / "src" / "plasmon_entangle" / "presets"

OMEGA = convert(500.0, "THz", "rad/s")
DIPOLE = 30 * DEBYE
PROP_LENGTH = 1.7e-6

# nanowire: qubits at the ends of a 1.5 lambda_spp guide
WIRE_LAMBDA = 425e-9
WIRE_L = 1.5 * WIRE_LAMBDA
WIRE_R_END = 0.8
WIRE_GAMMA_AA = 6.5  # ueV, fixes gamma_pl

# groove: 2 lambda_spp guide, qubits a quarter wavelength in from each end
GROOVE_LAMBDA = 423e-9
GROOVE_L = 2.0 * GROOVE_LAMBDA
GROOVE_ZA, GROOVE_ZB = 0.25 * GROOVE_LAMBDA, 1.75 * GROOVE_LAMBDA
GROOVE_TARGET = np.array([11.38, -6.48, 5.8])  # gamma_aa, gamma_ab, g_ab in ueV
WIRE_TARGET = np.array([6.5, -1.2, 2.85])

SLOT_PHASE = -math.pi / 4
SLOT_R = 0.3 * complex(math.cos(SLOT_PHASE), math.sin(SLOT_PHASE))
SLOT_T = 0.9 * complex(math.cos(SLOT_PHASE + math.pi / 2), math.sin(SLOT_PHASE + math.pi / 2))
SLOT_OFFSET = 40e-9
SLOT_INSET = 27e-9


def ueV(x):
    return convert(x, "ueV", "rad/s")


def peak(rates: RateMatrix) -> float:
    return peak_concurrence(rates, 0.0, 10.0 / rates.gamma_aa).c_peak


def calibrate_wire() -> float:
    pair = QubitPair.on_axis(OMEGA, [DIPOLE, 0, 0], 0.0, WIRE_L)
    g0 = pair.gamma0

    def f(gpl):
        fp = FabryPerotModel(Plasmon1DModel(WIRE_LAMBDA, PROP_LENGTH, gpl * g0), WIRE_L, WIRE_R_END)
        return compute_rates(pair, FiniteGuide(fp)).gamma_aa / ueV(1) - WIRE_GAMMA_AA

    return brentq(f, 0.01, 100.0, xtol=1e-14, rtol=1e-14)


def calibrate_groove() -> tuple[float, complex]:
    pair = QubitPair.on_axis(OMEGA, [DIPOLE, 0, 0], GROOVE_ZA, GROOVE_ZB)
    g0 = pair.gamma0

    def res(x):
        fp = FabryPerotModel(Plasmon1DModel(GROOVE_LAMBDA, PROP_LENGTH, x[0] * g0), GROOVE_L,
                             x[1] * np.exp(1j * x[2]))
        r = compute_rates(pair, FiniteGuide(fp))
        return np.array([r.gamma_aa, r.gamma_ab, r.g_ab]) / ueV(1) - GROOVE_TARGET

    sol = least_squares(res, [27.0, 0.6, -1.07], bounds=([0, 0, -np.pi], [200, 1, np.pi]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    assert np.max(np.abs(res(sol.x))) < 1e-9, res(sol.x)
    return float(sol.x[0]), complex(sol.x[1] * np.exp(1j * sol.x[2]))


def reference_rate_table(name: str, target: np.ndarray, separation: float) -> str:
    """Green table holding the quoted total rates at three frequencies around the transition."""
    gaa, gab, g = (ueV(v) for v in target)
    freqs = OMEGA * np.array([0.999, 1.0, 1.001])
    ones = np.ones(3)
    entries = {
        ("a", "a"): 1j * gaa * ones, ("b", "b"): 1j * gaa * ones,
        ("a", "b"): (2 * g + 1j * gab) * ones, ("b", "a"): (2 * g + 1j * gab) * ones,
    }
    table = TabulatedGreenSet({"a": (0.0, 0.0, 0.0), "b": (0.0, 0.0, separation)}, freqs, entries,
                              {"field": "total", "source": f"{name} rates in ueV: {', '.join(map(str, target))}"})
    return dump_green_table(table)


def q(x_m: float, unit: str = "nm") -> str:
    scale = {"nm": 1e9, "um": 1e6}[unit]
    return f"{x_m * scale:.12g} {unit}"


def c(z: complex) -> str:
    return repr(complex(round(z.real, 15), round(z.imag, 15)))


QUBITS = {"dipole": "30 D", "frequency": "500 THz", "orientation": [1, 0, 0]}


def wire_provider(kind: str, gpl: float, slots=None) -> dict:
    p = {"kind": kind, "lambda_spp": q(WIRE_LAMBDA), "prop_length": "1.7 um", "gamma_pl": f"{gpl!r} gamma0"}
    if kind in ("finite_guide",) or (kind == "slotted" and slots == "inside"):
        p["length"] = q(WIRE_L)
        p["r_end"] = c(WIRE_R_END)
    if slots == "outside":
        p["slots"] = [{"position": q(-SLOT_OFFSET), "r": c(SLOT_R), "t": c(SLOT_T)},
                      {"position": q(WIRE_L + SLOT_OFFSET), "r": c(SLOT_R), "t": c(SLOT_T)}]
    elif slots == "inside":
        p["slots"] = [{"position": q(SLOT_INSET), "r": c(SLOT_R), "t": c(SLOT_T)},
                      {"position": q(WIRE_L - SLOT_INSET), "r": c(SLOT_R), "t": c(SLOT_T)}]
    return p


def groove_provider(kind: str, gpl: float, r_end: complex, slots: bool = False) -> dict:
    p = {"kind": kind, "lambda_spp": q(GROOVE_LAMBDA), "prop_length": "1.7 um", "gamma_pl": f"{gpl!r} gamma0"}
    if kind == "finite_guide":
        p["length"] = q(GROOVE_L)
        p["r_end"] = c(r_end)
    if slots:
        p["slots"] = [{"position": q(GROOVE_ZA - SLOT_OFFSET), "r": c(SLOT_R), "t": c(SLOT_T)},
                      {"position": q(GROOVE_ZB + SLOT_OFFSET), "r": c(SLOT_R), "t": c(SLOT_T)}]
    return p


def wire_qubits(**extra):
    return {**QUBITS, "z_a": "0 nm", "z_b": q(WIRE_L), **extra}


def groove_qubits(**extra):
    return {**QUBITS, "z_a": q(GROOVE_ZA), "z_b": q(GROOVE_ZB), **extra}


def tab_qubits(**extra):
    return {**QUBITS, "site_a": "a", "site_b": "b", **extra}


def transient_run(name):
    return {"mode": "transient", "horizon": 10, "samples": 401, "name": name}


def build_presets(gpl_wire: float, gpl_groove: float, r_groove: complex) -> dict[str, dict]:
    wire_rates = {"kind": "tabulated", "table": "wire_rates.gtab"}
    groove_rates = {"kind": "tabulated", "table": "groove_rates.gtab"}
    pre: dict[str, dict] = {}
    sweep_rates = {"mode": "rates_sweep", "sweep": {"start": 0.0, "stop": 1.5, "count": 301}}
    pre["fig2_rates_infinite_wire"] = {
        "provider": wire_provider("infinite_guide", gpl_wire), "qubits": wire_qubits(),
        "run": {**sweep_rates, "name": "rates_infinite_wire"}}
    pre["fig3_rates_finite_wire"] = {
        "provider": wire_provider("finite_guide", gpl_wire), "qubits": wire_qubits(),
        "run": {**sweep_rates, "name": "rates_finite_wire"}}
    pre["fig3_rates_finite_wire_slots"] = {
        "provider": wire_provider("slotted", gpl_wire, "inside"), "qubits": wire_qubits(),
        "run": {**sweep_rates, "name": "rates_finite_wire_slots"}}
    pre["fig4_vacuum"] = {"provider": {"kind": "free_space"}, "qubits": wire_qubits(),
                          "run": transient_run("transient_vacuum")}
    pre["fig4_infinite_wire"] = {"provider": wire_provider("infinite_guide", gpl_wire), "qubits": wire_qubits(),
                                 "run": transient_run("transient_infinite_wire")}
    pre["fig4_infinite_wire_slots"] = {"provider": wire_provider("slotted", gpl_wire, "outside"),
                                       "qubits": wire_qubits(), "run": transient_run("transient_infinite_wire_slots")}
    pre["fig4_finite_wire"] = {"provider": wire_provider("finite_guide", gpl_wire), "qubits": wire_qubits(),
                               "run": transient_run("transient_finite_wire")}
    pre["fig4_finite_wire_slots"] = {"provider": wire_provider("slotted", gpl_wire, "inside"),
                                     "qubits": wire_qubits(), "run": transient_run("transient_finite_wire_slots")}
    pre["fig4_wire_rates"] = {"provider": wire_rates, "qubits": tab_qubits(),
                              "run": transient_run("transient_wire_rates")}
    pre["fig5_vacuum"] = {"provider": {"kind": "free_space"}, "qubits": groove_qubits(),
                          "run": transient_run("transient_vacuum")}
    pre["fig5_infinite_groove"] = {"provider": groove_provider("infinite_guide", gpl_groove, r_groove),
                                   "qubits": groove_qubits(), "run": transient_run("transient_infinite_groove")}
    pre["fig5_infinite_groove_slots"] = {
        "provider": groove_provider("slotted", gpl_groove, r_groove, slots=True), "qubits": groove_qubits(),
        "run": transient_run("transient_infinite_groove_slots")}
    pre["fig5_finite_groove"] = {"provider": groove_provider("finite_guide", gpl_groove, r_groove),
                                 "qubits": groove_qubits(), "run": transient_run("transient_finite_groove")}
    pre["fig5_groove_rates"] = {"provider": groove_rates, "qubits": tab_qubits(),
                                "run": transient_run("transient_groove_rates")}
    pre["fig6_groove_dephasing"] = {"provider": groove_rates, "qubits": tab_qubits(dephasing="1 ueV"),
                                    "run": transient_run("transient_groove_dephased")}
    pre["fig6_wire_dephasing"] = {"provider": wire_rates, "qubits": tab_qubits(dephasing="1 ueV"),
                                  "run": transient_run("transient_wire_dephased")}
    for regime in ("symmetric", "antisymmetric", "asymmetric"):
        pre[f"fig7_groove_{regime}"] = {
            "provider": groove_rates, "qubits": tab_qubits(),
            "pump": {"regime": regime, "rabi": "0.1 gamma_aa"},
            "run": {"mode": "steady", "horizon": 80, "samples": 501, "name": f"pumped_groove_{regime}"}}
    pre["fig8_separation_sweep"] = {
        "provider": groove_provider("finite_guide", gpl_groove, r_groove), "qubits": groove_qubits(),
        "pump": {"regime": "symmetric", "rabi": "0.3 gamma_aa"},
        "run": {"mode": "separation_sweep", "sweep": {"start": 0.25, "stop": 2.5, "count": 91},
                "regimes": ["asymmetric", "antisymmetric", "symmetric"], "geometry": "scaled",
                "end_inset": q(GROOVE_ZA), "name": "c_inf_vs_separation"}}
    for regime in ("symmetric", "asymmetric"):
        pre[f"fig9_groove_{regime}"] = {
            "provider": groove_rates, "qubits": tab_qubits(),
            "pump": {"regime": regime, "rabi": "0.3 gamma_aa"},
            "run": {"mode": "steady", "horizon": 50, "samples": 501, "name": f"pumped_groove_{regime}"}}
    pre["fig9_pump_sweep"] = {
        "provider": groove_rates, "qubits": tab_qubits(),
        "pump": {"regime": "symmetric", "rabi": "0.3 gamma_aa"},
        "run": {"mode": "pump_sweep", "sweep": {"start": 0.02, "stop": 3.0, "count": 150},
                "name": "c_inf_vs_rabi"}}
    return pre


def report(gpl_wire, gpl_groove, r_groove):
    g0 = QubitPair.on_axis(OMEGA, [DIPOLE, 0, 0], 0, WIRE_L).gamma0
    wbase = Plasmon1DModel(WIRE_LAMBDA, PROP_LENGTH, gpl_wire * g0)
    wfp = FabryPerotModel(wbase, WIRE_L, WIRE_R_END)
    wpair = QubitPair.on_axis(OMEGA, [DIPOLE, 0, 0], 0, WIRE_L)
    out = SlotScatterer(-SLOT_OFFSET, SLOT_R, SLOT_T), SlotScatterer(WIRE_L + SLOT_OFFSET, SLOT_R, SLOT_T)
    ins = SlotScatterer(SLOT_INSET, SLOT_R, SLOT_T), SlotScatterer(WIRE_L - SLOT_INSET, SLOT_R, SLOT_T)
    rows = {
        "wire vacuum": compute_rates(wpair, FreeSpace()),
        "wire infinite": compute_rates(wpair, InfiniteGuide(wbase)),
        "wire infinite + slots": compute_rates(wpair, SlottedGuide(wbase, out)),
        "wire finite": compute_rates(wpair, FiniteGuide(wfp)),
        "wire finite + slots": compute_rates(wpair, SlottedGuide(wfp, ins)),
    }
    gbase = Plasmon1DModel(GROOVE_LAMBDA, PROP_LENGTH, gpl_groove * g0)
    gpair = QubitPair.on_axis(OMEGA, [DIPOLE, 0, 0], GROOVE_ZA, GROOVE_ZB)
    gs = (SlotScatterer(GROOVE_ZA - SLOT_OFFSET, SLOT_R, SLOT_T),
          SlotScatterer(GROOVE_ZB + SLOT_OFFSET, SLOT_R, SLOT_T))
    rows.update({
        "groove vacuum": compute_rates(gpair, FreeSpace()),
        "groove infinite": compute_rates(gpair, InfiniteGuide(gbase)),
        "groove infinite + slots": compute_rates(gpair, SlottedGuide(gbase, gs)),
        "groove finite": compute_rates(gpair, FiniteGuide(FabryPerotModel(gbase, GROOVE_L, r_groove))),
    })
    for name, r in rows.items():
        vals = ", ".join(f"{v / ueV(1):8.3f}" for v in (r.gamma_aa, r.gamma_ab, r.g_ab))
        print(f"{name:26s} [{vals}] ueV  peak C = {peak(r):.4f}")


def main():
    gpl_wire = calibrate_wire()
    gpl_groove, r_groove = calibrate_groove()
    print(f"wire:   gamma_pl = {gpl_wire!r} gamma0, r_end = {WIRE_R_END}")
    print(f"groove: gamma_pl = {gpl_groove!r} gamma0, r_end = {r_groove!r} "
          f"(|r| = {abs(r_groove):.6f}, arg = {np.angle(r_groove):.6f})")
    report(gpl_wire, gpl_groove, r_groove)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "wire_rates.gtab").write_text(reference_rate_table("nanowire", WIRE_TARGET, WIRE_L), encoding="utf-8")
    (OUT / "groove_rates.gtab").write_text(reference_rate_table("groove", GROOVE_TARGET, GROOVE_ZB - GROOVE_ZA),
                                           encoding="utf-8")
    for name, doc in build_presets(gpl_wire, gpl_groove, r_groove).items():
        text = yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)
        (OUT / f"{name}.yaml").write_text(text, encoding="utf-8")
    print(f"wrote presets to {OUT}")


if __name__ == "__main__":
    main()
