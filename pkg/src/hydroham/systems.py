"""Hydrodynamic-type systems, conserved currents, point changes of variables
and reciprocal transformations.

Systems are stored in the convention u^i_t = v^i_j(u) u^j_x.  Presets that
arise in the characteristic form r_t + lambda r_x = 0 are negated on
ingestion, so one internal convention holds everywhere.

A current (rho, sigma) is conserved when D_t rho + D_x sigma = 0 on
solutions.  The 1-forms defining a reciprocal change of independent
variables are built as

    dt~ = sigma_1 dt + rho_1 dx,        dx~ = -sigma_2 dt + rho_2 dx,

the x-form flux negated so that the form is closed on solutions under the
conservation convention above, the t-form kept with positive orientation
(which fixes the sign freedom left by closedness and makes the identity pair
rho=(0,1), (1,0) act as the identity).  This sign bridge is a documented
decision and is echoed in the notes of every transformation report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    EvalDomainError,
    HostileDomainError,
    NonConservedCurrentError,
    VanishingDenominatorError,
)
from .exprs import Const, Expr, const, eval_jet, eval_scalar, field_value
from .geometry import scaled_abs_det
from .reports import CheckReport, condition_from_samples
from .sampling import RESAMPLE_BUDGET, SamplePlan

SIGN_BRIDGE_NOTE = (
    "sign bridge: currents stored with D_t rho + D_x sigma = 0; "
    "dt~ = sigma_1 dt + rho_1 dx, dx~ = -sigma_2 dt + rho_2 dx"
)

ScalarField = Union[Expr, Callable[[np.ndarray], float]]


def _is_zero_expr(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


@dataclass(frozen=True)
class HydroSystem:
    """First-order quasilinear system u^i_t = v^i_j(u) u^j_x."""

    dim: int
    v: tuple  # n x n of Expr or callable fields
    diagonal: bool = False

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.v)
        if len(rows) != self.dim or any(len(r) != self.dim for r in rows):
            raise ValueError("speed matrix must be n x n")
        if self.diagonal:
            for i in range(self.dim):
                for j in range(self.dim):
                    e = rows[i][j]
                    if i != j and isinstance(e, Expr) and not _is_zero_expr(e):
                        raise ValueError(
                            "diagonal systems must have identically zero off-diagonal entries"
                        )
        object.__setattr__(self, "v", rows)

    def speeds(self, point) -> np.ndarray:
        out = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = field_value(self.v[i][j], point)
        return out


@dataclass(frozen=True)
class ConservedCurrent:
    rho: Expr
    sigma: Expr


@dataclass(frozen=True)
class PointChangeMap:
    """A point change of dependent variables, with an optional inverse."""

    forward: tuple
    inverse: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(self.forward))
        if self.inverse is not None:
            object.__setattr__(self, "inverse", tuple(self.inverse))

    @property
    def dim(self) -> int:
        return len(self.forward)

    def apply(self, point) -> np.ndarray:
        return np.array([eval_scalar(e, point) for e in self.forward])

    def apply_inverse(self, point) -> np.ndarray:
        if self.inverse is None:
            raise ValueError("no inverse map supplied")
        return np.array([eval_scalar(e, point) for e in self.inverse])

    def jacobian(self, point) -> np.ndarray:
        n = self.dim
        out = np.empty((n, n))
        for a, e in enumerate(self.forward):
            out[a, :] = eval_jet(e, point, 1).gradient()
        return out

    def inverted(self) -> "PointChangeMap":
        if self.inverse is None:
            raise ValueError("no inverse map supplied")
        return PointChangeMap(forward=self.inverse, inverse=self.forward)


def check_conserved_current(s: HydroSystem, c: ConservedCurrent,
                            plan: SamplePlan) -> CheckReport:
    """On-shell divergence: d_k rho v^k_l + d_l sigma = 0 for every l."""
    samples = []
    for i in range(plan.count):
        for r in range(RESAMPLE_BUDGET + 1):
            p = plan.point(i, r)
            try:
                grad_rho = eval_jet(c.rho, p, 1).gradient()
                grad_sigma = eval_jet(c.sigma, p, 1).gradient()
                v = s.speeds(p)
            except EvalDomainError:
                continue
            break
        else:
            raise HostileDomainError(f"domain too hostile at sample point {i}")
        transport = grad_rho @ v
        res = transport + grad_sigma
        scale = max(np.max(np.abs(transport)), np.max(np.abs(grad_sigma)))
        samples.append((p, np.max(np.abs(res)), scale))
    cond = condition_from_samples(
        "current_conserved",
        "d_k rho v^k_l + d_l sigma = 0 for every l",
        samples,
        plan.tolerance,
    )
    return CheckReport(title="conserved current", conditions=[cond], plan=plan)


def check_change_of_variables(s_old: HydroSystem, s_new: HydroSystem,
                              m: PointChangeMap, plan: SamplePlan) -> CheckReport:
    """Conjugacy of speed matrices: J(u) v_old(u) = v_new(m(u)) J(u)."""
    if not (s_old.dim == s_new.dim == m.dim):
        raise ValueError("systems and map disagree on dimension")
    samples = []
    notes = []
    for i in range(plan.count):
        for r in range(RESAMPLE_BUDGET + 1):
            p = plan.point(i, r)
            try:
                jac = m.jacobian(p)
                if scaled_abs_det(jac) < plan.floor:
                    if not notes:
                        notes.append("singular Jacobian encountered; point redrawn")
                    continue
                lhs = jac @ s_old.speeds(p)
                rhs = s_new.speeds(m.apply(p)) @ jac
            except EvalDomainError:
                continue
            break
        else:
            raise HostileDomainError(f"domain too hostile at sample point {i}")
        samples.append(
            (p, np.max(np.abs(lhs - rhs)), max(np.max(np.abs(lhs)), np.max(np.abs(rhs))))
        )
    cond = condition_from_samples(
        "conjugacy",
        "J v_old = v_new(m(u)) J for the Jacobian J of the map",
        samples,
        plan.tolerance,
    )
    return CheckReport(
        title="change of variables", conditions=[cond], plan=plan, notes=notes
    )


def reciprocal_transform_system(s: HydroSystem, c1: ConservedCurrent,
                                c2: ConservedCurrent, plan: SamplePlan) -> HydroSystem:
    """Transform a system under the change of independent variables defined
    by two conserved currents.

    In the u_t = v u_x convention the new speed matrix is

        v~ = (rho_2 v + sigma_2 I) (sigma_1 I - rho_1 v)^{-1},

    which acts entrywise on diagonal systems.  Entries of the result are
    callable fields closing over the inputs.
    """
    for label, c in (("c1", c1), ("c2", c2)):
        rep = check_conserved_current(s, c, plan)
        if not rep.passed:
            raise NonConservedCurrentError(
                f"current {label} is not conserved "
                f"(max residual {rep.conditions[0].residual:.3e})"
            )
    n = s.dim

    def denominator(p) -> np.ndarray:
        return float(eval_scalar(c1.sigma, p)) * np.eye(n) - float(
            eval_scalar(c1.rho, p)
        ) * s.speeds(p)

    sign_seen = 0
    for i in range(plan.count):
        p = plan.point(i)
        try:
            d = denominator(p)
        except EvalDomainError:
            continue
        if scaled_abs_det(d) < 1e-6:
            raise VanishingDenominatorError(f"denominator field vanishes near {tuple(p)}")
        sign = 1 if np.linalg.det(d) > 0 else -1
        if sign_seen == 0:
            sign_seen = sign
        elif sign != sign_seen:
            # determinant changes sign across the box, so it crosses zero
            raise VanishingDenominatorError(
                f"denominator field vanishes inside the box (sign change near {tuple(p)})"
            )

    def currents_at(p):
        return (
            eval_scalar(c1.sigma, p),
            eval_scalar(c1.rho, p),
            eval_scalar(c2.sigma, p),
            eval_scalar(c2.rho, p),
        )

    if s.diagonal:
        def diag_entry(i: int):
            def field(p, _i=i):
                vi = field_value(s.v[_i][_i], p)
                s1, r1, s2, r2 = currents_at(p)
                return (r2 * vi + s2) / (s1 - r1 * vi)

            return field

        zero = const(0)
        return HydroSystem(
            dim=n,
            v=tuple(
                tuple(diag_entry(i) if i == j else zero for j in range(n))
                for i in range(n)
            ),
            diagonal=True,
        )

    def new_speeds(p) -> np.ndarray:
        v = s.speeds(p)
        s1, r1, s2, r2 = currents_at(p)
        return (r2 * v + s2 * np.eye(n)) @ np.linalg.inv(s1 * np.eye(n) - r1 * v)

    def entry(i: int, j: int):
        def field(p, _i=i, _j=j):
            return float(new_speeds(p)[_i, _j])

        return field

    return HydroSystem(
        dim=n, v=tuple(tuple(entry(i, j) for j in range(n)) for i in range(n))
    )
