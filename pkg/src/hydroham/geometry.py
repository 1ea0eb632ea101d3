"""Pointwise differential geometry derived from a contravariant metric field.

Everything here evaluates to plain numpy arrays at a single point; no
symbolic Christoffel symbols or curvature are ever formed.  Derivatives of
the metric come from jet evaluation of its entries, derivatives of the
inverse from d(g_lo) = -g_lo (d g_up) g_lo.

Index conventions, fixed once for the whole package:

    g_up[i, j]        g^{ij}               contravariant metric values
    g_lo[i, j]        g_{ij}               inverse (covariant) metric
    dg_up[k, i, j]    d_k g^{ij}           derivative index first
    b[i, j, k]        b^{ij}_k             coefficient of u^k_x, first two
                                           indices contravariant
    gamma[j, s, k]    Gamma^j_{sk}         related to b by
                                           b^{ij}_k = -g^{is} Gamma^j_{sk}
    riemann[j, s, k, l]     R^j_{skl} = d_k Gamma^j_{sl} - d_l Gamma^j_{sk}
                                      + Gamma^j_{mk} Gamma^m_{sl}
                                      - Gamma^j_{ml} Gamma^m_{sk}
    riemann_up[i, j, k, l]  g^{is} R^j_{skl}
    w[i, j]           w^i_j                row contravariant, column covariant
    nabla_w[k, i, j]  nabla_k w^i_j
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateMetricError
from .exprs import Expr, eval_jet, eval_scalar, max_var_index

DEGENERACY_FLOOR = 1e-8


def _as_entry_grid(entries, shape, what: str):
    """Validate a nested sequence of Expr against a shape; return nested tuples."""

    def rec(node, dims):
        if not dims:
            if not isinstance(node, Expr):
                raise TypeError(f"{what} entries must be expressions, got {type(node)}")
            return node
        seq = tuple(node)
        if len(seq) != dims[0]:
            raise ValueError(f"{what} must have shape {shape}")
        return tuple(rec(x, dims[1:]) for x in seq)

    return rec(entries, shape)


@dataclass(frozen=True)
class MetricField:
    """Contravariant metric g^{ij}(u) as an n x n grid of expressions."""

    dim: int
    entries: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "entries", _as_entry_grid(self.entries, (self.dim, self.dim), "metric")
        )
        for row in self.entries:
            for e in row:
                if max_var_index(e) >= self.dim:
                    raise ValueError("metric entry uses a variable beyond the dimension")


@dataclass(frozen=True)
class ConnectionField:
    """Connection coefficients b^{ij}_k(u) as an n x n x n grid of expressions."""

    dim: int
    entries: tuple

    def __post_init__(self):
        object.__setattr__(
            self,
            "entries",
            _as_entry_grid(self.entries, (self.dim, self.dim, self.dim), "connection"),
        )


@dataclass(frozen=True)
class AffinorField:
    """A (1,1)-tensor field w^i_j(u) with its sign epsilon in {-1, +1}."""

    dim: int
    sign: int
    entries: tuple

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("affinor sign must be exactly -1 or +1")
        object.__setattr__(
            self, "entries", _as_entry_grid(self.entries, (self.dim, self.dim), "affinor")
        )


# -- pointwise evaluation -----------------------------------------------------


def eval_matrix(entries, point) -> np.ndarray:
    n = len(entries)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = eval_scalar(entries[i][j], point)
    return out


def eval_tensor3(entries, point) -> np.ndarray:
    n = len(entries)
    out = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] = eval_scalar(entries[i][j][k], point)
    return out


def eval_matrix_jets(entries, point, order: int):
    """Values plus derivative arrays of a matrix of expressions.

    Returns (vals, d1) for order 1 and (vals, d1, d2) for order 2, with the
    derivative indices leading: d1[k, i, j] = d_k entry_{ij}.
    """
    n = len(entries)
    dim = len(point)
    vals = np.empty((n, n))
    d1 = np.empty((dim, n, n))
    d2 = np.empty((dim, dim, n, n)) if order >= 2 else None
    for i in range(n):
        for j in range(n):
            jet = eval_jet(entries[i][j], point, order)
            vals[i, j] = jet.value
            d1[:, i, j] = jet.gradient()
            if order >= 2:
                d2[:, :, i, j] = jet.hessian()
    if order >= 2:
        return vals, d1, d2
    return vals, d1


def scaled_abs_det(m: np.ndarray) -> float:
    """|det| after scaling each row by its largest entry (0.0 if a row vanishes)."""
    rowmax = np.max(np.abs(m), axis=1)
    if np.any(rowmax == 0.0):
        return 0.0
    return float(abs(np.linalg.det(m / rowmax[:, None])))


def invert_metric_values(g_up: np.ndarray, point, floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    det = scaled_abs_det(g_up)
    if det < floor:
        raise DegenerateMetricError(det, point)
    inv = np.linalg.inv(g_up)
    return (inv + inv.T) / 2.0


def invert_metric(g: MetricField, point, floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """Covariant metric g_{ij} at a point; raises DegenerateMetricError below
    the degeneracy floor."""
    return invert_metric_values(eval_matrix(g.entries, point), point, floor)


# -- frames -------------------------------------------------------------------


@dataclass
class MetricFrame:
    """Everything the checks need about a metric at one point."""

    point: np.ndarray
    g_up: np.ndarray
    g_lo: np.ndarray
    dg_up: np.ndarray
    dg_lo: np.ndarray
    gamma: np.ndarray  # Levi-Civita, gamma[j, s, k]
    d2g_up: Optional[np.ndarray] = None
    dgamma: Optional[np.ndarray] = None  # dgamma[l, j, s, k]
    riemann: Optional[np.ndarray] = None
    riemann_up: Optional[np.ndarray] = None


def _lower_derivatives(g_lo, dg_up):
    return -np.einsum("ia,kab,bj->kij", g_lo, dg_up, g_lo)


def _levi_civita_from_parts(g_up, g_lo, dg_lo):
    t = (
        np.einsum("smk->msk", dg_lo)
        + np.einsum("kms->msk", dg_lo)
        - dg_lo
    )
    return 0.5 * np.einsum("jm,msk->jsk", g_up, t), t


def metric_frame(g: MetricField, point, curvature: bool = False,
                 floor: float = DEGENERACY_FLOOR) -> MetricFrame:
    """Build the pointwise frame; order-2 jets are used only when curvature
    is requested."""
    order = 2 if curvature else 1
    if curvature:
        g_up, dg_up, d2g_up = eval_matrix_jets(g.entries, point, 2)
    else:
        g_up, dg_up = eval_matrix_jets(g.entries, point, 1)
        d2g_up = None
    g_lo = invert_metric_values(g_up, point, floor)
    dg_lo = _lower_derivatives(g_lo, dg_up)
    gamma, t = _levi_civita_from_parts(g_up, g_lo, dg_lo)
    frame = MetricFrame(
        point=np.asarray(point, dtype=float),
        g_up=g_up,
        g_lo=g_lo,
        dg_up=dg_up,
        dg_lo=dg_lo,
        gamma=gamma,
    )
    if curvature:
        d2g_lo = -(
            np.einsum("lia,kab,bj->lkij", dg_lo, dg_up, g_lo)
            + np.einsum("ia,lkab,bj->lkij", g_lo, d2g_up, g_lo)
            + np.einsum("ia,kab,lbj->lkij", g_lo, dg_up, dg_lo)
        )
        dt = (
            np.einsum("lsmk->lmsk", d2g_lo)
            + np.einsum("lkms->lmsk", d2g_lo)
            - d2g_lo
        )
        dgamma = 0.5 * (
            np.einsum("ljm,msk->ljsk", dg_up, t)
            + np.einsum("jm,lmsk->ljsk", g_up, dt)
        )
        gg1 = np.einsum("jmk,msl->jskl", gamma, gamma)
        gg2 = np.einsum("jml,msk->jskl", gamma, gamma)
        riemann = (
            np.einsum("kjsl->jskl", dgamma)
            - np.einsum("ljsk->jskl", dgamma)
            + gg1
            - gg2
        )
        frame.d2g_up = d2g_up
        frame.dgamma = dgamma
        frame.riemann = riemann
        frame.riemann_up = np.einsum("is,jskl->ijkl", g_up, riemann)
    return frame


# -- public operations ----------------------------------------------------------


def christoffel_from_b(g: MetricField, b: ConnectionField, point,
                       floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """Gamma^j_{sk} = -g_{is} b^{ij}_k, solving the defining representation."""
    g_lo = invert_metric(g, point, floor)
    b_vals = eval_tensor3(b.entries, point)
    return -np.einsum("is,ijk->jsk", g_lo, b_vals)


def levi_civita(g: MetricField, point, floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """Christoffel symbols of the metric inverse to g^{ij}, via order-1 jets."""
    return metric_frame(g, point, curvature=False, floor=floor).gamma


def riemann_curvature(g: MetricField, point, floor: float = DEGENERACY_FLOOR):
    """Curvature of the Levi-Civita connection: (R^j_{skl}, g^{is} R^j_{skl})."""
    frame = metric_frame(g, point, curvature=True, floor=floor)
    return frame.riemann, frame.riemann_up


def covariant_derivative_affinor(w: AffinorField, g: MetricField, point,
                                 floor: float = DEGENERACY_FLOOR) -> np.ndarray:
    """nabla_k w^i_j under the Levi-Civita connection of g."""
    frame = metric_frame(g, point, curvature=False, floor=floor)
    return covariant_derivative_values(w, frame)


def covariant_derivative_values(w: AffinorField, frame: MetricFrame) -> np.ndarray:
    vals, d1 = eval_matrix_jets(w.entries, frame.point, 1)
    return (
        d1
        + np.einsum("isk,sj->kij", frame.gamma, vals)
        - np.einsum("sjk,is->kij", frame.gamma, vals)
    )
