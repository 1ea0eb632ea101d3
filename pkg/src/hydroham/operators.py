"""Hamiltonianity checks for local and nonlocal first-order operators.

A local operator is a pair (g, b): metric coefficients g^{ij}(u) on D_x and
connection coefficients b^{ij}_k(u) on u^k_x.  It is Hamiltonian iff g is a
flat (pseudo-)Riemannian metric and b encodes its Levi-Civita connection.
A nonlocal operator adds signed affinor tails (eps_a, w_a); flatness is then
replaced by the Gauss equation against the tail sum, plus the Codazzi
symmetry, the pairing symmetry g_{ik} w^k_j = g_{jk} w^k_i and pairwise
commutation of the affinors.

Every check samples the identities on a seeded plan and reports one record
per condition.  Residuals are normalized by the largest magnitude among the
terms entering each identity, so exponential prefactors do not distort the
verdict; a condition passes only if it is within tolerance at every point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError, EvalDomainError, HostileDomainError
from .exprs import Expr, as_expr, eval_jet
from .geometry import (
    AffinorField,
    ConnectionField,
    MetricField,
    MetricFrame,
    covariant_derivative_values,
    eval_matrix,
    eval_matrix_jets,
    eval_tensor3,
    metric_frame,
)
from .reports import CheckReport, ConditionResult, condition_from_samples
from .sampling import RESAMPLE_BUDGET, SamplePlan

DEGENERATE_FRACTION_LIMIT = 0.2


@dataclass(frozen=True)
class LocalOperator:
    dim: int
    g: MetricField
    b: ConnectionField

    def __post_init__(self):
        if self.g.dim != self.dim or self.b.dim != self.dim:
            raise ValueError("operator parts disagree on dimension")


@dataclass(frozen=True)
class NonlocalOperator:
    local: LocalOperator
    tails: tuple[AffinorField, ...]

    def __post_init__(self):
        object.__setattr__(self, "tails", tuple(self.tails))
        for w in self.tails:
            if w.dim != self.local.dim:
                raise ValueError("tail dimension disagrees with the local part")

    @property
    def dim(self) -> int:
        return self.local.dim


# -- sampling of metric frames -------------------------------------------------


@dataclass
class _FrameSweep:
    frames: list  # resolved (point, MetricFrame) pairs
    g_values: list  # (point, g_up values) for every attempt that evaluated
    attempts: int
    degenerate: int
    unresolved: int
    degenerate_witness: tuple | None

    @property
    def identically_degenerate(self) -> bool:
        return not self.frames and self.degenerate > 0


def _sweep_frames(g: MetricField, plan: SamplePlan, curvature: bool) -> _FrameSweep:
    """Resolve one frame per plan point, redrawing points hit by domain
    violations or isolated metric degeneracy."""
    sweep = _FrameSweep([], [], 0, 0, 0, None)
    for i in range(plan.count):
        resolved = None
        domain_failures = 0
        for r in range(RESAMPLE_BUDGET + 1):
            p = plan.point(i, r)
            sweep.attempts += 1
            try:
                frame = metric_frame(g, p, curvature=curvature)
            except DegenerateMetricError:
                sweep.degenerate += 1
                sweep.degenerate_witness = tuple(float(x) for x in p)
                try:
                    sweep.g_values.append((p, eval_matrix(g.entries, p)))
                except EvalDomainError:
                    pass
                continue
            except EvalDomainError:
                domain_failures += 1
                continue
            resolved = (p, frame)
            break
        if resolved is None:
            if domain_failures > RESAMPLE_BUDGET:
                raise HostileDomainError(
                    f"domain too hostile: sample point {i} exhausted {RESAMPLE_BUDGET} redraws"
                )
            sweep.unresolved += 1
        else:
            sweep.frames.append(resolved)
            sweep.g_values.append(resolved[0:1] + (resolved[1].g_up,))
    return sweep


def _symmetry_condition(samples, tol) -> ConditionResult:
    return condition_from_samples(
        "metric_symmetric",
        "g^{ij} = g^{ji}",
        samples,
        tol,
    )


def _nondegeneracy_condition(sweep: _FrameSweep, plan: SamplePlan) -> ConditionResult:
    bad_fraction = sweep.degenerate / max(1, sweep.attempts)
    failed = sweep.unresolved > 0 or bad_fraction > DEGENERATE_FRACTION_LIMIT
    note = None
    if sweep.identically_degenerate:
        note = "identically degenerate"
    elif failed:
        note = f"degenerate at {bad_fraction:.0%} of attempted points"
    return ConditionResult(
        cid="metric_nondegenerate",
        description="|det g| above the degeneracy floor on the box",
        residual=1.0 if failed else 0.0,
        witness=sweep.degenerate_witness if failed else None,
        passed=not failed,
        note=note,
    )


def _not_evaluated(cid: str, description: str) -> ConditionResult:
    return ConditionResult(
        cid=cid,
        description=description,
        residual=None,
        witness=None,
        passed=False,
        note="not evaluated (metric degenerate)",
    )


def _gamma_from_b(frame: MetricFrame, b_vals: np.ndarray) -> np.ndarray:
    return -np.einsum("is,ijk->jsk", frame.g_lo, b_vals)


def _compatibility_residual(frame: MetricFrame, gamma: np.ndarray):
    """nabla_k g_{ij} = d_k g_{ij} - Gamma^s_{ik} g_{sj} - Gamma^s_{jk} g_{is}."""
    t1 = np.einsum("sik,sj->kij", gamma, frame.g_lo)
    t2 = np.einsum("sjk,is->kij", gamma, frame.g_lo)
    res = frame.dg_lo - t1 - t2
    scale = max(
        np.max(np.abs(frame.dg_lo)), np.max(np.abs(t1)), np.max(np.abs(t2))
    )
    return np.max(np.abs(res)), scale


def _flatness_residual(frame: MetricFrame):
    gg = np.einsum("jmk,msl->jskl", frame.gamma, frame.gamma)
    scale = max(np.max(np.abs(frame.dgamma)), np.max(np.abs(gg)))
    return np.max(np.abs(frame.riemann)), scale


# -- checks ---------------------------------------------------------------------


def check_skew_adjoint(a: LocalOperator, plan: SamplePlan) -> CheckReport:
    """Formal skew-adjointness: g symmetric and b^{ij}_k + b^{ji}_k = d_k g^{ij}."""
    sym_samples = []
    pair_samples = []
    for i in range(plan.count):
        for r in range(RESAMPLE_BUDGET + 1):
            p = plan.point(i, r)
            try:
                g_vals, dg = eval_matrix_jets(a.g.entries, p, 1)
                b_vals = eval_tensor3(a.b.entries, p)
            except EvalDomainError:
                continue
            break
        else:
            raise HostileDomainError(f"domain too hostile at sample point {i}")
        sym_samples.append((p, np.max(np.abs(g_vals - g_vals.T)), np.max(np.abs(g_vals))))
        lhs = b_vals + np.einsum("ijk->jik", b_vals)
        rhs = np.einsum("kij->ijk", dg)
        pair_samples.append(
            (p, np.max(np.abs(lhs - rhs)), max(np.max(np.abs(b_vals)), np.max(np.abs(dg))))
        )
    conditions = [
        _symmetry_condition(sym_samples, plan.tolerance),
        condition_from_samples(
            "skew_pairing",
            "b^{ij}_k + b^{ji}_k = d_k g^{ij}",
            pair_samples,
            plan.tolerance,
        ),
    ]
    return CheckReport(title="skew-adjointness", conditions=conditions, plan=plan)


def check_local_hamiltonian(a: LocalOperator, plan: SamplePlan) -> CheckReport:
    """The five conditions for a local operator to be Hamiltonian: symmetric
    nondegenerate metric, symmetric connection, metric compatibility, and a
    flat metric."""
    sweep = _sweep_frames(a.g, plan, curvature=True)
    sym_samples = [
        (p, np.max(np.abs(G - G.T)), np.max(np.abs(G))) for p, G in sweep.g_values
    ]
    conditions = [
        _symmetry_condition(sym_samples, plan.tolerance),
        _nondegeneracy_condition(sweep, plan),
    ]
    if not sweep.frames:
        conditions.append(_not_evaluated("connection_symmetric", "Gamma^j_{sk} = Gamma^j_{ks}"))
        conditions.append(_not_evaluated("metric_compatible", "nabla g = 0"))
        conditions.append(_not_evaluated("metric_flat", "curvature of g vanishes"))
        return CheckReport(title="local Hamiltonian", conditions=conditions, plan=plan)

    gamma_sym, compat, flat = [], [], []
    for p, frame in sweep.frames:
        b_vals = eval_tensor3(a.b.entries, p)
        gamma_b = _gamma_from_b(frame, b_vals)
        gamma_scale = np.max(np.abs(gamma_b))
        gamma_sym.append(
            (p, np.max(np.abs(gamma_b - np.einsum("jsk->jks", gamma_b))), gamma_scale)
        )
        raw, scale = _compatibility_residual(frame, gamma_b)
        compat.append((p, raw, scale))
        raw, scale = _flatness_residual(frame)
        flat.append((p, raw, scale))
    conditions.append(
        condition_from_samples(
            "connection_symmetric",
            "Gamma^j_{sk} = Gamma^j_{ks} for Gamma derived from b",
            gamma_sym,
            plan.tolerance,
        )
    )
    conditions.append(
        condition_from_samples(
            "metric_compatible",
            "nabla_k g_{ij} = 0 under the connection derived from b",
            compat,
            plan.tolerance,
        )
    )
    conditions.append(
        condition_from_samples(
            "metric_flat",
            "Riemann curvature of g vanishes",
            flat,
            plan.tolerance,
        )
    )
    return CheckReport(title="local Hamiltonian", conditions=conditions, plan=plan)


def gauss_tail_sum(tails, w_values, dim: int | None = None) -> np.ndarray:
    """sum_a eps_a (w^i_{a l} w^j_{a k} - w^i_{a k} w^j_{a l})."""
    if dim is None:
        dim = w_values[0].shape[0]
    out = np.zeros((dim, dim, dim, dim))
    for w, vals in zip(tails, w_values):
        out += w.sign * (
            np.einsum("il,jk->ijkl", vals, vals) - np.einsum("ik,jl->ijkl", vals, vals)
        )
    return out


def check_ferapontov(a: NonlocalOperator, plan: SamplePlan) -> CheckReport:
    """Hamiltonianity conditions for a nonlocal operator: the local
    conditions minus flatness, plus pairing symmetry (t1), Codazzi symmetry
    (t2), the Gauss equation (t3) and commuting affinors (t4)."""
    op = a.local
    sweep = _sweep_frames(op.g, plan, curvature=True)
    sym_samples = [
        (p, np.max(np.abs(G - G.T)), np.max(np.abs(G))) for p, G in sweep.g_values
    ]
    conditions = [
        _symmetry_condition(sym_samples, plan.tolerance),
        _nondegeneracy_condition(sweep, plan),
    ]
    if not sweep.frames:
        for cid, desc in (
            ("connection_symmetric", "Gamma^j_{sk} = Gamma^j_{ks}"),
            ("metric_compatible", "nabla g = 0"),
            ("t1_pairing_symmetric", "g_{ik} w^k_j symmetric"),
            ("t2_codazzi", "nabla_k w^i_j = nabla_j w^i_k"),
            ("t3_gauss", "curvature equals the tail sum"),
            ("t4_tails_commute", "[w_a, w_b] = 0"),
        ):
            conditions.append(_not_evaluated(cid, desc))
        return CheckReport(title="nonlocal Hamiltonian", conditions=conditions, plan=plan)

    gamma_sym, compat = [], []
    t1, t2, t3, t4 = [], [], [], []
    for p, frame in sweep.frames:
        b_vals = eval_tensor3(op.b.entries, p)
        gamma_b = _gamma_from_b(frame, b_vals)
        gamma_sym.append(
            (p, np.max(np.abs(gamma_b - np.einsum("jsk->jks", gamma_b))),
             np.max(np.abs(gamma_b)))
        )
        raw, scale = _compatibility_residual(frame, gamma_b)
        compat.append((p, raw, scale))

        w_vals = [eval_matrix(w.entries, p) for w in a.tails]

        worst = (0.0, 1.0)
        for vals in w_vals:
            gw = frame.g_lo @ vals
            raw = np.max(np.abs(gw - gw.T))
            if raw >= worst[0]:
                worst = (raw, np.max(np.abs(gw)))
        t1.append((p, worst[0], worst[1]))

        worst = (0.0, 1.0)
        for w in a.tails:
            nabla = covariant_derivative_values(w, frame)
            raw = np.max(np.abs(nabla - np.einsum("kij->jik", nabla)))
            if raw >= worst[0]:
                worst = (raw, np.max(np.abs(nabla)))
        t2.append((p, worst[0], worst[1]))

        tail_sum = gauss_tail_sum(a.tails, w_vals, op.dim)
        gg = np.einsum("jmk,msl->jskl", frame.gamma, frame.gamma)
        scale = max(
            np.max(np.abs(frame.riemann_up)),
            np.max(np.abs(tail_sum)),
            np.max(np.abs(frame.dgamma)),
            np.max(np.abs(gg)),
        )
        t3.append((p, np.max(np.abs(frame.riemann_up - tail_sum)), scale))

        worst = (0.0, 1.0)
        for x in range(len(w_vals)):
            for y in range(x + 1, len(w_vals)):
                comm = w_vals[x] @ w_vals[y] - w_vals[y] @ w_vals[x]
                raw = np.max(np.abs(comm))
                if raw >= worst[0]:
                    worst = (raw, np.max(np.abs(w_vals[x] @ w_vals[y])))
        t4.append((p, worst[0], worst[1]))

    conditions.append(
        condition_from_samples(
            "connection_symmetric",
            "Gamma^j_{sk} = Gamma^j_{ks} for Gamma derived from b",
            gamma_sym,
            plan.tolerance,
        )
    )
    conditions.append(
        condition_from_samples(
            "metric_compatible",
            "nabla_k g_{ij} = 0 under the connection derived from b",
            compat,
            plan.tolerance,
        )
    )
    conditions.append(
        condition_from_samples(
            "t1_pairing_symmetric", "g_{ik} w^k_j = g_{jk} w^k_i", t1, plan.tolerance
        )
    )
    conditions.append(
        condition_from_samples(
            "t2_codazzi", "nabla_k w^i_j = nabla_j w^i_k", t2, plan.tolerance
        )
    )
    conditions.append(
        condition_from_samples(
            "t3_gauss",
            "R^{ij}_{kl} = sum_a eps_a (w^i_l w^j_k - w^i_k w^j_l)",
            t3,
            plan.tolerance,
        )
    )
    conditions.append(
        condition_from_samples(
            "t4_tails_commute", "[w_a, w_b] = 0 for all tail pairs", t4, plan.tolerance
        )
    )
    return CheckReport(title="nonlocal Hamiltonian", conditions=conditions, plan=plan)


def pencil_operator(a: LocalOperator, b: LocalOperator, lam: float) -> LocalOperator:
    """The combination with metric g_a + lam g_b and connection b_a + lam b_b."""
    if a.dim != b.dim:
        raise ValueError("pencil requires operators of equal dimension")
    lam_e = as_expr(lam)
    n = a.dim
    g = tuple(
        tuple(a.g.entries[i][j] + lam_e * b.g.entries[i][j] for j in range(n))
        for i in range(n)
    )
    bb = tuple(
        tuple(
            tuple(a.b.entries[i][j][k] + lam_e * b.b.entries[i][j][k] for k in range(n))
            for j in range(n)
        )
        for i in range(n)
    )
    return LocalOperator(n, MetricField(n, g), ConnectionField(n, bb))


def check_pencil_compatibility(a: LocalOperator, b: LocalOperator, lambdas,
                               plan: SamplePlan) -> CheckReport:
    """Run the local Hamiltonian check on g_a + lam g_b, b_a + lam b_b for
    each lam.  A lam at which the combined metric is identically degenerate
    carries no constraint (the compatibility identities are polynomial in
    lam) and is skipped with a note.
    """
    conditions: list[ConditionResult] = []
    notes: list[str] = []
    for lam in lambdas:
        sub = check_local_hamiltonian(pencil_operator(a, b, lam), plan)
        degenerate_everywhere = any(
            c.cid == "metric_nondegenerate" and c.note == "identically degenerate"
            for c in sub.conditions
        )
        if degenerate_everywhere:
            conditions.append(
                ConditionResult(
                    cid=f"lambda={lam}:degenerate",
                    description="combined metric identically degenerate; no constraint at this lambda",
                    residual=None,
                    witness=None,
                    passed=True,
                    note="skipped",
                )
            )
            notes.append(f"lambda={lam}: identically degenerate combination skipped")
            continue
        for c in sub.conditions:
            conditions.append(
                ConditionResult(
                    cid=f"lambda={lam}:{c.cid}",
                    description=c.description,
                    residual=c.residual,
                    witness=c.witness,
                    passed=c.passed,
                    note=c.note,
                )
            )
    return CheckReport(
        title="pencil compatibility", conditions=conditions, plan=plan, notes=notes
    )


def hamiltonian_flow(a: LocalOperator, h: Expr, plan: SamplePlan | None = None):
    """The hydrodynamic system u_t = v u_x generated by a density depending
    on u only: v^i_k = g^{ij} d_j d_k H + b^{ij}_k d_j H.

    Entries are callable fields closing over the operator and the density.
    """
    from .systems import HydroSystem  # local import to avoid a cycle

    n = a.dim

    def v_matrix(p) -> np.ndarray:
        jet = eval_jet(h, p, 2)
        grad = jet.gradient()
        hess = jet.hessian()
        g_vals = eval_matrix(a.g.entries, p)
        b_vals = eval_tensor3(a.b.entries, p)
        return g_vals @ hess + np.einsum("ijk,j->ik", b_vals, grad)

    def entry(i: int, k: int):
        def field(p, _i=i, _k=k):
            return float(v_matrix(p)[_i, _k])

        return field

    if plan is not None:
        v_matrix(plan.point(0))  # fail fast on domain problems
    return HydroSystem(
        dim=n, v=tuple(tuple(entry(i, k) for k in range(n)) for i in range(n))
    )
