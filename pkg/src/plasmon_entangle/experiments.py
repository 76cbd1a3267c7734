"""Scenario pipelines: rates sweeps, transients, pumped steady states and sweeps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dynamics, entanglement
from .errors import ConsistencyError, PlasmonEntangleError, ValidationError
from .fileio import RunOutput, Scenario, load_green_table
from .greens import (
    FabryPerotModel,
    FiniteGuide,
    FreeSpace,
    GreenProvider,
    InfiniteGuide,
    Plasmon1DModel,
    SlotScatterer,
    SlottedGuide,
    Tabulated,
)
from .rates import QubitPair, RateMatrix, compute_rates, normalized_rates
from .units import from_rad_s, vacuum_decay_rate

log = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-6
SUBCOMMAND_MODES = {
    "rates": ("rates_sweep",),
    "transient": ("transient",),
    "steady": ("steady", "transient"),
    "sweep": ("separation_sweep", "pump_sweep"),
}


@dataclass(frozen=True)
class Setup:
    """Resolved physical objects for one scenario point."""

    pair: QubitPair
    provider: GreenProvider
    include_free_space: bool

    def rates(self, scattered_only: bool = False) -> RateMatrix:
        return compute_rates(self.pair, self.provider, self.include_free_space and not scattered_only)


def _gamma0(s: Scenario) -> float:
    return vacuum_decay_rate(s.qubits.frequency, s.qubits.dipole)


def _dipole_vector(s: Scenario) -> tuple[float, float, float]:
    o = np.asarray(s.qubits.orientation, dtype=float)
    return tuple(float(x) for x in s.qubits.dipole * o / np.linalg.norm(o))


def build_provider(s: Scenario, base_dir: str | Path = ".", length: float | None = None) -> GreenProvider:
    """Green provider described by the scenario; ``length`` replaces the guide length if given."""
    p = s.provider
    if p.kind == "free_space":
        return FreeSpace()
    if p.kind == "tabulated":
        path = Path(base_dir) / p.table
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read green table {path}: {exc}") from None
        return Tabulated(load_green_table(text))
    base = Plasmon1DModel(p.lambda_spp, p.prop_length, p.gamma_pl.resolve(gamma0=_gamma0(s)))
    guide_length = length if length is not None else p.length
    model = base
    if guide_length is not None:
        r_end = p.r_end if p.r_end is not None else FabryPerotModel.__dataclass_fields__["r_end"].default
        model = FabryPerotModel(base, guide_length, r_end)
    if p.kind == "infinite_guide":
        return InfiniteGuide(base)
    if p.kind == "finite_guide":
        return FiniteGuide(model)
    slots = tuple(SlotScatterer(sl.position, sl.r, sl.t) for sl in p.slots)
    return SlottedGuide(model, slots)


def build_setup(s: Scenario, base_dir: str | Path = ".", z_a: float | None = None, z_b: float | None = None,
                length: float | None = None) -> Setup:
    provider = build_provider(s, base_dir, length)
    q = s.qubits
    dephasing = q.dephasing.resolve(gamma0=_gamma0(s))
    if isinstance(provider, Tabulated):
        sites = provider.table.sites
        for label in (q.site_a, q.site_b):
            if label not in sites:
                raise ValidationError(f"site {label!r} is not declared in the green table")
        pair = QubitPair(q.frequency, q.frequency, _dipole_vector(s), tuple(sites[q.site_a]),
                         tuple(sites[q.site_b]), dephasing, dephasing, (q.site_a, q.site_b))
    else:
        za = q.z_a if z_a is None else z_a
        zb = q.z_b if z_b is None else z_b
        pair = QubitPair.on_axis(q.frequency, _dipole_vector(s), za, zb, dephasing)
    return Setup(pair, provider, s.provider.include_free_space)


def build_pump(s: Scenario, rates: RateMatrix, regime: str | None = None, rabi: float | None = None
               ) -> dynamics.PumpConfig:
    """Pump with Rabi frequencies resolved against ``Gamma_aa`` of ``rates``."""
    pump = s.pump
    gaa = rates.gamma_aa
    regime = regime or pump.regime
    omega = pump.rabi.resolve(gamma_aa=gaa) if rabi is None else rabi * gaa
    detuning = pump.detuning.resolve(gamma_aa=gaa)
    if regime == "custom":
        return dynamics.PumpConfig(omega, pump.rabi_b.resolve(gamma_aa=gaa), detuning, detuning, "custom")
    return dynamics.PumpConfig.from_regime(regime, omega, detuning)


def _name(s: Scenario) -> str:
    return s.run.name or s.run.mode


def _rates_summary(rates: RateMatrix, gamma0: float) -> dict:
    keys = ("gamma_aa", "gamma_bb", "gamma_ab", "gamma_ba", "g_ab", "g_ba")
    return {
        "rates_ueV": {k: from_rad_s(v, "ueV") for k, v in zip(keys, rates.as_tuple())},
        "rates_over_gamma0": {k: v / gamma0 for k, v in zip(keys, rates.as_tuple())},
        "gamma0_ueV": from_rad_s(gamma0, "ueV"),
    }


def _state_columns(t_scaled, conc, states):
    pops = [states[:, i, i].real for i in range(4)]
    return [t_scaled, conc, *pops]


STATE_HEADER = ("t_gamma_aa", "C", "rho_ee", "rho_eg", "rho_ge", "rho_gg")


# --------------------------------------------------------------------------- rates


def run_rates(s: Scenario, base_dir: str | Path = ".") -> RunOutput:
    """Scattered-only ``Gamma_ab / Gamma_0`` and ``g_ab / Gamma_0`` versus separation."""
    if s.run.mode != "rates_sweep":
        raise ValidationError(f"rates needs mode 'rates_sweep', scenario has {s.run.mode!r}")
    if s.provider.kind not in ("infinite_guide", "finite_guide", "slotted"):
        raise ValidationError("rates sweeps need a guide provider (infinite_guide, finite_guide or slotted)")
    lam = s.provider.lambda_spp
    x = s.run.sweep.values()
    gab = np.empty_like(x)
    g = np.empty_like(x)
    for k, dz in enumerate(x):
        setup = build_setup(s, base_dir, z_b=s.qubits.z_a + dz * lam)
        r = normalized_rates(setup.rates(scattered_only=True), setup.pair)
        gab[k], g[k] = r.gamma_ab, r.g_ab
    out = RunOutput(_name(s))
    out.add_table(_name(s), ("dz_over_lambda_spp", "gamma_ab_over_gamma0", "g_ab_over_gamma0"), (x, gab, g))
    out.summary = {"mode": s.run.mode, "points": int(x.size), "projection": "scattered"}
    return out


# --------------------------------------------------------------------------- transient


def run_transient(s: Scenario, base_dir: str | Path = ".") -> RunOutput:
    """Unpumped decay from ``|eg>``: numeric and closed-form concurrence with their deviation."""
    if s.run.mode != "transient":
        raise ValidationError(f"transient needs mode 'transient', scenario has {s.run.mode!r}")
    if s.pump is not None:
        raise ValidationError("transient runs are unpumped; use the steady subcommand for pumped scenarios")
    setup = build_setup(s, base_dir)
    rates = setup.rates()
    gamma = setup.pair.gamma_a
    lv = dynamics.build_liouvillian(rates, (gamma, setup.pair.gamma_b))
    times = np.linspace(0.0, s.run.horizon * lv.time_scale, s.run.samples)
    traj = dynamics.evolve(lv, dynamics.projector("eg"), times)
    conc = traj.concurrence
    name = _name(s)
    out = RunOutput(name)
    out.add_table(name, STATE_HEADER, _state_columns(traj.t_scaled, conc, traj.states))
    summary = {"mode": "transient", "samples": int(times.size), "dephasing_ueV": from_rad_s(gamma, "ueV"),
               "numeric_peak_concurrence": float(conc.max()), "integrator_steps": traj.n_steps}
    summary.update(_rates_summary(rates, setup.pair.gamma0))
    if rates.is_symmetric and setup.pair.gamma_a == setup.pair.gamma_b:
        analytic = entanglement.transient_concurrence(rates, gamma, times)
        deviation = float(np.max(np.abs(analytic - conc)))
        peak = entanglement.peak_concurrence(rates, gamma, times[-1])
        out.add_table(f"{name}_analytic", ("t_gamma_aa", "C"), (traj.t_scaled, analytic))
        summary.update(max_deviation=deviation, peak_concurrence=peak.c_peak,
                       peak_time_gamma_aa=peak.t_peak / lv.time_scale)
        out.summary = summary
        if deviation > CONSISTENCY_TOL:
            raise ConsistencyError(f"closed-form and integrated concurrence differ by {deviation:.3g} "
                                   f"(tolerance {CONSISTENCY_TOL:g})")
    else:
        summary["max_deviation"] = None
        out.summary = summary
    return out


# --------------------------------------------------------------------------- steady


def run_steady(s: Scenario, base_dir: str | Path = ".") -> RunOutput:
    """Pumped evolution from ``|eg>`` followed by the stationary solve; the two must agree."""
    if s.run.mode not in SUBCOMMAND_MODES["steady"] or s.pump is None:
        raise ValidationError("steady needs mode 'steady' (or 'transient' with a pump section)")
    setup = build_setup(s, base_dir)
    rates = setup.rates()
    pump = build_pump(s, rates)
    lv = dynamics.build_liouvillian(rates, (setup.pair.gamma_a, setup.pair.gamma_b), pump)
    times = np.linspace(0.0, s.run.horizon * lv.time_scale, s.run.samples)
    traj = dynamics.evolve(lv, dynamics.projector("eg"), times)
    rho_ss = dynamics.steady_state(lv)
    c_inf = entanglement.concurrence_general(rho_ss)
    deviation = float(np.max(np.abs(traj.states[-1] - rho_ss)))
    name = _name(s)
    out = RunOutput(name)
    out.add_table(name, STATE_HEADER, _state_columns(traj.t_scaled, traj.concurrence, traj.states))
    out.summary = {
        "mode": "steady", "regime": pump.regime, "samples": int(times.size),
        "rabi_over_gamma_aa": abs(pump.rabi_a) / rates.gamma_aa,
        "C_inf": c_inf, "plateau_deviation": deviation,
        "steady_populations": {lab: float(rho_ss[i, i].real) for i, lab in enumerate(dynamics.BASIS)},
        "transient_peak_concurrence": float(traj.concurrence.max()),
    }
    out.summary.update(_rates_summary(rates, setup.pair.gamma0))
    if deviation > CONSISTENCY_TOL:
        raise ConsistencyError(f"integrated state at t = {s.run.horizon:g}/Gamma_aa differs from the "
                               f"stationary solve by {deviation:.3g}")
    return out


# --------------------------------------------------------------------------- sweeps


def _separation_geometry(s: Scenario, x: float) -> dict:
    lam = s.provider.lambda_spp
    geom = s.run.geometry
    if geom == "anchored":
        return {"z_b": s.qubits.z_a + x * lam}
    if s.provider.length is None and geom in ("centered", "scaled"):
        raise ValidationError(f"geometry {geom!r} needs a guide with a 'length'")
    if geom == "centered":
        mid = 0.5 * s.provider.length
        return {"z_a": mid - 0.5 * x * lam, "z_b": mid + 0.5 * x * lam}
    if s.provider.slots:
        raise ValidationError("geometry 'scaled' moves the guide ends; slotted guides are not supported")
    inset = s.run.end_inset
    return {"z_a": inset, "z_b": inset + x * lam, "length": x * lam + 2.0 * inset}


def steady_concurrence_point(s: Scenario, regime: str, x: float, base_dir: str | Path = ".") -> float:
    """``C_inf`` at one sweep point (separation in ``lambda_spp`` or Rabi frequency in ``Gamma_aa``)."""
    if s.run.mode == "separation_sweep":
        setup = build_setup(s, base_dir, **_separation_geometry(s, x))
        rates = setup.rates()
        pump = build_pump(s, rates, regime)
    else:
        setup = build_setup(s, base_dir)
        rates = setup.rates()
        pump = build_pump(s, rates, regime, rabi=x)
    lv = dynamics.build_liouvillian(rates, (setup.pair.gamma_a, setup.pair.gamma_b), pump)
    return entanglement.concurrence_general(dynamics.steady_state(lv))


def run_sweep(s: Scenario, base_dir: str | Path = ".", parallel: int = 1) -> RunOutput:
    """``C_inf`` versus separation or pump strength, one table per pump regime.

    A point that fails is recorded as NaN with its diagnostic; the sweep goes on.
    """
    if s.run.mode not in SUBCOMMAND_MODES["sweep"]:
        raise ValidationError(f"sweep needs mode 'separation_sweep' or 'pump_sweep', scenario has {s.run.mode!r}")
    if s.run.mode == "separation_sweep" and s.provider.kind not in ("infinite_guide", "finite_guide", "slotted"):
        raise ValidationError("separation sweeps need a guide provider")
    regimes = s.run.regimes or (s.pump.regime,)
    x = s.run.sweep.values()
    jobs = [(regime, float(v)) for regime in regimes for v in x]

    def point(job):
        regime, v = job
        try:
            return steady_concurrence_point(s, regime, v, base_dir), None
        except PlasmonEntangleError as exc:
            return math.nan, f"{type(exc).__name__}: {exc}"

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(point, jobs))
    else:
        results = [point(job) for job in jobs]
    name = _name(s)
    out = RunOutput(name)
    failures = []
    for n, regime in enumerate(regimes):
        chunk = results[n * x.size:(n + 1) * x.size]
        out.add_table(f"{name}_{regime}", ("x", "C_inf"), (x, [c for c, _ in chunk]))
        for v, (_, diag) in zip(x, chunk):
            if diag is not None:
                log.warning("sweep point %s x=%.6g failed: %s", regime, v, diag)
                failures.append({"regime": regime, "x": float(v), "diagnostic": diag})
    out.summary = {
        "mode": s.run.mode, "regimes": list(regimes), "points": int(x.size),
        "x_unit": "lambda_spp" if s.run.mode == "separation_sweep" else "gamma_aa",
        "failures": failures,
    }
    return out


def run_scenario(s: Scenario, base_dir: str | Path = ".", parallel: int = 1,
                 subcommand: str | None = None) -> RunOutput:
    """Dispatch on the run mode (or validate it against an explicit subcommand)."""
    if subcommand is None:
        subcommand = next(k for k, modes in SUBCOMMAND_MODES.items()
                          if s.run.mode in modes and not (k == "transient" and s.pump is not None))
    if s.run.mode not in SUBCOMMAND_MODES[subcommand]:
        raise ValidationError(f"subcommand {subcommand!r} cannot run a scenario in mode {s.run.mode!r}")
    if subcommand == "rates":
        return run_rates(s, base_dir)
    if subcommand == "transient":
        return run_transient(s, base_dir)
    if subcommand == "steady":
        return run_steady(s, base_dir)
    return run_sweep(s, base_dir, parallel)


def with_overrides(s: Scenario, **run_fields) -> Scenario:
    return replace(s, run=replace(s.run, **run_fields))
