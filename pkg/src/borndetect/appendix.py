"""Order-of-magnitude calculator for slow-neutron detection in B-10 F3 gas.

All arithmetic is SI; energies are reported in eV.  The report records the
values printed alongside the original estimates so that each recomputed
number can be compared against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from scipy import constants as sc

__all__ = [
    "NeutronExperimentInputs",
    "AppendixReport",
    "ChainVerdict",
    "PRINTED",
    "excitation_energy",
    "excitation_energy_joules",
    "epsilon_perturbative",
    "compute_report",
    "check_chain",
    "comparisons",
    "format_table",
    "MUCH_LESS_RATIO",
]

AMU = sc.physical_constants["atomic mass constant"][0]
M_NEUTRON = sc.physical_constants["neutron mass"][0]
# atomic masses (u), AME2020
M_B10 = 10.012936862 * AMU
M_B11 = 11.009305167 * AMU
M_F19 = 18.998403162 * AMU

STP_PRESSURE = sc.atm
STP_TEMPERATURE = 293.15

MUCH_LESS_RATIO = 0.1

# Values as printed next to each estimate, for comparison only.
PRINTED = {
    "excitation_energy_eV": 12e6,
    "packet_volume_m3": 4e-15,
    "psi_mag": 2e7,
    "n_molecules": 2e11,
    "thermal_speed_m_s": 300.0,
    "spread_S_eV": 12.0,
    "spacing_delta_eV": 6e-11,
    "kinetic_energy_eV": 0.2e-3,
    "bandwidth_hbar_omega_eV": 3e-8,
    "epsilon": 3e-6,
    "hbar_eps_psi_eV": 4e-14,
    "density_printed_m3": (3e9) ** 3,
}

# Relative tolerance used to grade each recomputed value against PRINTED:
# ("rel", x) -> |ours/printed - 1| <= x ; ("factor", f) -> 1/f <= ratio <= f.
TOLERANCES = {
    "excitation_energy_eV": ("rel", 0.10),
    "packet_volume_m3": ("rel", 0.25),
    "psi_mag": ("factor", 2.0),
    "n_molecules": ("factor", 10.0),
    "thermal_speed_m_s": ("rel", 0.50),
    "spread_S_eV": ("rel", 0.50),
    "spacing_delta_eV": ("factor", 10.0),
    "kinetic_energy_eV": ("rel", 0.10),
    "epsilon": ("factor", 3.0),
    "hbar_eps_psi_eV": ("factor", 3.0),
}

RESONANCE_SCALING_NOTE = (
    "Near-zero-energy resonance estimate: a capture cross section scaling as "
    "k^-2 already has the dimensions of an area, so it fixes no value of the "
    "coupling; no number is produced."
)
PERTURBATIVE_CAVEAT = (
    "The perturbative coupling rests on a k^-3 cross-section law at a "
    "zero-energy resonance. That law has no physical basis, so the value is "
    "an order-of-magnitude placeholder at best."
)
THERMAL_SPEED_NOTE = (
    "Thermal speed computed as sqrt(k_B T / m) (positive exponent); the printed "
    "formula carries exponent -1/2, inconsistent with its own ~300 m/s value."
)


@dataclass(frozen=True)
class NeutronExperimentInputs:
    cross_section: float = 4000e-28  # 4000 barn
    wavelength: float = 20e-10
    bandwidth_fraction: float = 2 * 0.7 / 20
    density: float = STP_PRESSURE / (sc.k * STP_TEMPERATURE)
    temperature: float = STP_TEMPERATURE
    m_neutron: float = M_NEUTRON
    m_b10: float = M_B10
    m_b11: float = M_B11
    m_bf3: float = M_B10 + 3 * M_F19
    width: float = 0.4e-3
    c: float = sc.c
    hbar: float = sc.hbar
    k_b: float = sc.k

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")


def excitation_energy_joules(m_b10, m_n, m_b11, c=sc.c) -> float:
    return (m_b10 + m_n - m_b11) * c**2


def excitation_energy(m_b10, m_n, m_b11, c=sc.c) -> float:
    """Mass defect of the compound nucleus, in eV."""
    return excitation_energy_joules(m_b10, m_n, m_b11, c) / sc.e


def epsilon_perturbative(cross_section, k, m_n, hbar=sc.hbar) -> float:
    """Coupling from ``sigma ~ eps^2 m^2 / (k^3 hbar^2)``, in s^-1 m^(3/2)."""
    return hbar * math.sqrt(cross_section * k**3) / m_n


@dataclass(frozen=True)
class ChainVerdict:
    spacing_over_bandwidth: float
    bandwidth_over_spread: float
    coupling_over_spacing: float

    @property
    def spacing_much_less_than_bandwidth(self) -> bool:
        return self.spacing_over_bandwidth <= MUCH_LESS_RATIO

    @property
    def bandwidth_much_less_than_spread(self) -> bool:
        return self.bandwidth_over_spread <= MUCH_LESS_RATIO

    @property
    def coupling_much_less_than_spacing(self) -> bool:
        return self.coupling_over_spacing <= MUCH_LESS_RATIO

    @property
    def all_pass(self) -> bool:
        return (
            self.spacing_much_less_than_bandwidth
            and self.bandwidth_much_less_than_spread
            and self.coupling_much_less_than_spacing
        )

    def as_dict(self) -> dict:
        return {
            "delta/hbarOmega": float(f"{self.spacing_over_bandwidth:.2g}"),
            "hbarOmega/S": float(f"{self.bandwidth_over_spread:.2g}"),
            "hbar_eps_psi/delta": float(f"{self.coupling_over_spacing:.2g}"),
            "delta << hbarOmega": self.spacing_much_less_than_bandwidth,
            "hbarOmega << S": self.bandwidth_much_less_than_spread,
            "hbar_eps_psi << delta": self.coupling_much_less_than_spacing,
        }


@dataclass(frozen=True)
class AppendixReport:
    wavenumber: float
    wavenumber_bandwidth: float
    packet_volume_m3: float
    psi_mag: float
    n_molecules: float
    excitation_energy_eV: float
    thermal_speed_m_s: float
    spread_S_eV: float
    spacing_delta_eV: float
    kinetic_energy_eV: float
    bandwidth_hbar_omega_eV: float
    epsilon: float
    hbar_eps_psi_eV: float
    chain: ChainVerdict
    discrepancies: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def values(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("chain", "discrepancies", "notes")}

    def to_dict(self) -> dict:
        out = self.values()
        out["chain"] = self.chain.as_dict()
        out["comparisons"] = comparisons(self)
        out["discrepancies"] = list(self.discrepancies)
        out["notes"] = list(self.notes)
        return out


def check_chain(report) -> ChainVerdict:
    """Grade ``delta << hbar Omega << S`` and ``hbar eps |psi| << delta`` as ratios <= 0.1."""
    return ChainVerdict(
        report.spacing_delta_eV / report.bandwidth_hbar_omega_eV,
        report.bandwidth_hbar_omega_eV / report.spread_S_eV,
        report.hbar_eps_psi_eV / report.spacing_delta_eV,
    )


def compute_report(inputs: NeutronExperimentInputs | None = None) -> AppendixReport:
    p = inputs or NeutronExperimentInputs()
    k = 2 * math.pi / p.wavelength
    dk = p.bandwidth_fraction * k
    volume = p.width**2 * (2 * math.pi / dk)
    psi = volume**-0.5
    n_mol = p.density * volume
    delta_exc = excitation_energy(p.m_b10, p.m_neutron, p.m_b11, p.c)
    v = math.sqrt(p.k_b * p.temperature / p.m_bf3)
    spread = (v / p.c) * delta_exc
    spacing = spread / n_mol
    kinetic = (p.hbar * k) ** 2 / (2 * p.m_neutron) / sc.e
    hbar_omega = 2 * kinetic * (dk / k)
    eps = epsilon_perturbative(p.cross_section, k, p.m_neutron, p.hbar)
    hbar_eps_psi = p.hbar * eps * psi / sc.e

    printed_rho = PRINTED["density_printed_m3"]
    discrepancies = [
        {
            "quantity": "bandwidth_hbar_omega_eV",
            "recomputed": hbar_omega,
            "printed": PRINTED["bandwidth_hbar_omega_eV"],
            "note": "2 E dk/k with the listed E and dk/k gives the recomputed value; "
                    "the printed value is about 1000x smaller. Both are kept; the "
                    "delta << hbar Omega << S chain holds for either.",
            "chain_with_printed": {
                "delta/hbarOmega": spacing / PRINTED["bandwidth_hbar_omega_eV"],
                "hbarOmega/S": PRINTED["bandwidth_hbar_omega_eV"] / spread,
            },
        },
        {
            "quantity": "density",
            "used": p.density,
            "printed": printed_rho,
            "note": "The printed density (3e9 m^-3)^3 read literally implies "
                    f"N ~ {printed_rho * volume:.2g} molecules, inconsistent with the "
                    "printed N ~ 2e11. The ideal-gas value at 1 atm is used instead.",
            "n_molecules_with_printed": printed_rho * volume,
        },
    ]
    draft = AppendixReport(
        wavenumber=k,
        wavenumber_bandwidth=dk,
        packet_volume_m3=volume,
        psi_mag=psi,
        n_molecules=n_mol,
        excitation_energy_eV=delta_exc,
        thermal_speed_m_s=v,
        spread_S_eV=spread,
        spacing_delta_eV=spacing,
        kinetic_energy_eV=kinetic,
        bandwidth_hbar_omega_eV=hbar_omega,
        epsilon=eps,
        hbar_eps_psi_eV=hbar_eps_psi,
        chain=ChainVerdict(1.0, 1.0, 1.0),
        discrepancies=discrepancies,
        notes=[RESONANCE_SCALING_NOTE, PERTURBATIVE_CAVEAT, THERMAL_SPEED_NOTE],
    )
    return AppendixReport(**{**draft.__dict__, "chain": check_chain(draft)})


def comparisons(report: AppendixReport) -> dict:
    """Recomputed value, printed value, ratio and tolerance verdict per quantity."""
    out = {}
    values = report.values()
    for name, (kind, tol) in TOLERANCES.items():
        ours, printed = values[name], PRINTED[name]
        ratio = ours / printed
        ok = abs(ratio - 1) <= tol if kind == "rel" else 1 / tol <= ratio <= tol
        out[name] = {"recomputed": ours, "printed": printed, "ratio": ratio,
                     "tolerance": f"{kind} {tol:g}", "within": ok}
    return out


def format_table(report: AppendixReport) -> str:
    rows = [("quantity", "recomputed", "printed", "ratio", "ok")]
    cmp = comparisons(report)
    for name, val in report.values().items():
        if name in cmp:
            c = cmp[name]
            rows.append((name, f"{val:.3g}", f"{c['printed']:.3g}", f"{c['ratio']:.2g}",
                         "yes" if c["within"] else "NO"))
        elif name in PRINTED:
            rows.append((name, f"{val:.3g}", f"{PRINTED[name]:.3g}",
                         f"{val / PRINTED[name]:.2g}", "flag"))
        else:
            rows.append((name, f"{val:.3g}", "-", "-", ""))
    for key, val in report.chain.as_dict().items():
        rows.append((key, str(val), "", "", ""))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.append("")
    for d in report.discrepancies:
        lines.append(f"DISCREPANCY {d['quantity']}: {d['note']}")
    for note in report.notes:
        lines.append(f"NOTE: {note}")
    return "\n".join(lines)
