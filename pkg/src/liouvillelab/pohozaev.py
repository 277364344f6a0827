"""Integral identities satisfied by every solution, evaluated term by term.

Three identities are audited for a field ``v`` at ``(lam, V)``:

``gradient_x{i}``
    ``1/2 int_S (dv/dn)^2 x_i + lam int_S V x_i + 2 int_S (dv/dn) x_i
    = 4 pi d_i v(0) + lam int_B |x|^2 d_i V e^v``.
``pair_diff``
    ``lam int_B e^v (d_1V x_1 - d_2V x_2) = lam int_S V (x_1^2 - x_2^2)
    + 1/2 int_S (dv/dn)^2 (x_1^2 - x_2^2) - pi (d_1 v(0))^2 + pi (d_2 v(0))^2``.
``pair_mixed``
    ``lam int_B e^v (d_1V x_2 + d_2V x_1) = 2 lam int_S V x_1 x_2
    + int_S (dv/dn)^2 x_1 x_2 - 2 pi d_1 v(0) d_2 v(0)``.

Here ``S`` is the unit circle and ``B`` the disk. Gradients at the origin
come from the first angular mode, and normal derivatives from the radial
differentiation matrix, so every term has spectral accuracy.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .disk_spectral import (DiskField, boundary_normal_derivative, gradient_at_origin, integrate_boundary,
                            integrate_disk, solve_poisson)
from .potential import Potential

__all__ = [
    "IdentityAudit",
    "PohozaevReport",
    "solve_residual",
    "audit_gradient_identity",
    "audit_pohozaev_pair",
    "mass_concentration",
    "vanishing_moments",
    "volume_moments",
    "pohozaev_report",
]

NOT_APPLICABLE = "identity not applicable: field is not a solution"


@dataclass
class IdentityAudit:
    name: str
    lhs: dict
    rhs: dict

    @property
    def residual(self) -> float:
        return float(sum(self.lhs.values()) - sum(self.rhs.values()))

    @property
    def terms(self) -> dict:
        out = {f"lhs.{k}": v for k, v in self.lhs.items()}
        out.update({f"rhs.{k}": v for k, v in self.rhs.items()})
        return out


def solve_residual(v: DiskField, lam: float, V: Potential) -> float:
    """Lifted residual ``max |v - (-Delta)^{-1}(lam V |x|^2 e^v)|`` plus boundary mismatch."""
    g = v.grid
    src = lam * V(g.z) * np.abs(g.z) ** 2 * np.exp(v.values)
    inner = float(np.abs(v.values - solve_poisson(g, src)).max())
    return max(inner, float(np.abs(v.boundary_values).max()))


def _boundary_parts(v: DiskField):
    g = v.grid
    dn = boundary_normal_derivative(v)
    c, s = np.cos(g.theta), np.sin(g.theta)
    return g, dn, c, s


def audit_gradient_identity(v: DiskField, lam: float, V: Potential, i: int) -> IdentityAudit:
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    g, dn, c, s = _boundary_parts(v)
    xi = c if i == 1 else s
    vb = V(np.exp(1j * g.theta))
    grad0 = gradient_at_origin(v)
    dV = V.gradient(g.z)[i - 1]
    lhs = {
        "half_dnu_sq_xi": 0.5 * integrate_boundary(dn**2, xi, grid=g),
        "lam_V_xi": lam * integrate_boundary(vb, xi, grid=g),
        "two_dnu_xi": 2.0 * integrate_boundary(dn, xi, grid=g),
    }
    rhs = {
        "four_pi_grad0": 4.0 * np.pi * grad0[i - 1],
        "lam_r2_dV_ev": lam * integrate_disk(DiskField(g, np.exp(v.values)), np.abs(g.z) ** 2 * dV),
    }
    return IdentityAudit(f"gradient_x{i}", lhs, rhs)


def volume_moments(v: DiskField, lam: float, V: Potential) -> tuple[float, float]:
    """``lam int e^v (d1V x1 - d2V x2)`` and ``lam int e^v (d1V x2 + d2V x1)``."""
    g = v.grid
    d1, d2 = V.gradient(g.z)
    ev = DiskField(g, np.exp(v.values))
    diff = lam * integrate_disk(ev, d1 * g.x1 - d2 * g.x2)
    mixed = lam * integrate_disk(ev, d1 * g.x2 + d2 * g.x1)
    return diff, mixed


def audit_pohozaev_pair(v: DiskField, lam: float, V: Potential) -> tuple[IdentityAudit, IdentityAudit]:
    g, dn, c, s = _boundary_parts(v)
    vb = V(np.exp(1j * g.theta))
    d1v, d2v = gradient_at_origin(v)
    diff, mixed = volume_moments(v, lam, V)
    first = IdentityAudit("pair_diff", {"lam_ev_dV_diff": diff}, {
        "lam_V_diff": lam * integrate_boundary(vb, c * c - s * s, grid=g),
        "half_dnu_sq_diff": 0.5 * integrate_boundary(dn**2, c * c - s * s, grid=g),
        "minus_pi_d1_sq": -np.pi * d1v**2,
        "pi_d2_sq": np.pi * d2v**2,
    })
    second = IdentityAudit("pair_mixed", {"lam_ev_dV_mixed": mixed}, {
        "two_lam_V_x1x2": 2.0 * lam * integrate_boundary(vb, c * s, grid=g),
        "dnu_sq_x1x2": integrate_boundary(dn**2, c * s, grid=g),
        "minus_two_pi_d1_d2": -2.0 * np.pi * d1v * d2v,
    })
    return first, second


def mass_concentration(v: DiskField, lam: float, V: Potential) -> float:
    """``lam int |x|^2 V e^v``; tends to ``16 pi`` along a concentrating branch."""
    g = v.grid
    return lam * integrate_disk(DiskField(g, np.exp(v.values)), np.abs(g.z) ** 2 * V(g.z))


def vanishing_moments(v: DiskField, lam: float, V: Potential) -> tuple[float, float, float]:
    """``lam int (g1 x1^2 - g2 x2^2) e^v``, ``lam int x1 x2 e^v`` and ``|grad v(0)|``."""
    g = v.grid
    g1, g2 = V.gammas
    ev = DiskField(g, np.exp(v.values))
    m1 = lam * integrate_disk(ev, g1 * g.x1**2 - g2 * g.x2**2)
    m2 = lam * integrate_disk(ev, g.x1 * g.x2)
    return m1, m2, float(np.hypot(*gradient_at_origin(v)))


@dataclass
class PohozaevReport:
    lam: float
    identities: list
    gradient_at_origin: tuple
    mass: float
    moments: tuple
    vanishing: tuple
    boundary_normal_derivative_range: tuple
    solve_residual: float
    applicable: bool
    threshold: float
    flags: list = field(default_factory=list)

    @property
    def residuals(self) -> dict:
        return {a.name: a.residual for a in self.identities}

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals.values())

    def passes(self, threshold: float | None = None) -> bool:
        thr = self.threshold if threshold is None else threshold
        return self.applicable and self.max_residual <= thr

    def to_flat(self) -> dict:
        out = {"lambda": self.lam, "solve_residual": self.solve_residual, "applicable": self.applicable,
               "threshold": self.threshold, "mass": self.mass,
               "grad0_x1": self.gradient_at_origin[0], "grad0_x2": self.gradient_at_origin[1],
               "moment_dV_diff": self.moments[0], "moment_dV_mixed": self.moments[1],
               "m1_hessian": self.vanishing[0], "m2_x1x2": self.vanishing[1], "m3_grad0": self.vanishing[2],
               "dnu_min": self.boundary_normal_derivative_range[0],
               "dnu_max": self.boundary_normal_derivative_range[1]}
        for a in self.identities:
            for k, val in a.terms.items():
                out[f"{a.name}.{k}"] = val
            out[f"{a.name}.residual"] = a.residual
        out["flags"] = ";".join(self.flags)
        return out

    def records(self) -> list[dict]:
        recs = []
        for a in self.identities:
            for side, terms in (("lhs", a.lhs), ("rhs", a.rhs)):
                for k, val in terms.items():
                    recs.append({"identity": a.name, "side": side, "term": k, "value": val})
            recs.append({"identity": a.name, "side": "residual", "term": "lhs_minus_rhs", "value": a.residual})
        return recs

    def write(self, stem: str | Path) -> tuple[Path, Path]:
        """Write ``<stem>.txt`` (key = value) and ``<stem>.json`` (one record per term)."""
        stem = Path(stem)
        txt = stem.with_suffix(".txt")
        js = stem.with_suffix(".json")
        lines = [f"{k} = {_fmt(v)}" for k, v in self.to_flat().items()]
        txt.write_text("\n".join(lines) + "\n")
        js.write_text(json.dumps({"lambda": self.lam, "applicable": self.applicable, "flags": self.flags,
                                  "records": self.records()}, indent=2) + "\n")
        return txt, js


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12e}"
    return str(v)


def pohozaev_report(v: DiskField, lam: float, V: Potential, threshold: float = 1e-6,
                    applicability: float = 1e-6) -> PohozaevReport:
    """Evaluate all identities, mass and moments for ``v``.

    The report is flagged as not applicable when the lifted residual of
    ``v`` exceeds ``applicability``: the identities only hold for
    solutions.
    """
    res = solve_residual(v, lam, V)
    ids = [audit_gradient_identity(v, lam, V, 1), audit_gradient_identity(v, lam, V, 2),
           *audit_pohozaev_pair(v, lam, V)]
    dn = boundary_normal_derivative(v)
    flags = []
    applicable = res <= applicability
    if not applicable:
        flags.append(f"{NOT_APPLICABLE} (residual {res:.2e})")
    report = PohozaevReport(lam=lam, identities=ids, gradient_at_origin=gradient_at_origin(v),
                            mass=mass_concentration(v, lam, V), moments=volume_moments(v, lam, V),
                            vanishing=vanishing_moments(v, lam, V),
                            boundary_normal_derivative_range=(float(dn.min()), float(dn.max())),
                            solve_residual=res, applicable=applicable, threshold=threshold, flags=flags)
    if applicable and report.max_residual > threshold:
        report.flags.append(f"residual {report.max_residual:.2e} exceeds threshold {threshold:.1e}")
    return report
