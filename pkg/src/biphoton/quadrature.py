"""Globally adaptive Gauss-Kronrod (7/15) quadrature that returns its rule.

The integrand is vector valued and vectorized over nodes. Refinement stops when
the summed Kronrod-Gauss discrepancy falls below ``epsrel`` times the largest
component of the integral. The final composite rule (nodes and weights) is
returned so that closely related integrands can reuse it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

# QUADPACK qk15 abscissae/weights, nonnegative half
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1] and matching weights
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss-7 weights laid out on the Kronrod nodes (zero where not a Gauss node)
_g = np.zeros(8)
_g[1:6:2] = _WG[:3]
_g[7] = _WG[3]
GAUSS_WEIGHTS = np.concatenate([_g[:-1], _g[::-1]])


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    error: float
    panels: int

    def integrate(self, values):
        """Apply the rule to integrand samples taken at ``nodes`` (last axis)."""
        return np.asarray(values) @ self.weights


def adaptive_rule(func, breakpoints, epsrel=1e-12, epsabs=0.0, max_panels=200000):
    """Build a composite GK15 rule adapted to ``func``.

    ``func(x)`` takes a 1-D node array and returns shape ``(len(x),)`` or
    ``(m, len(x))`` (several integrands sharing one rule).
    ``breakpoints`` is a sorted sequence whose first/last entries are the limits.
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    if edges.size < 2:
        raise NumericError("need at least two distinct breakpoints")
    a, b = edges[:-1], edges[1:]
    done_nodes, done_w, done_err = [], [], 0.0
    total = None
    while True:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        x = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
        fx = np.atleast_2d(np.asarray(func(x.ravel()), dtype=float))
        fx = fx.reshape(fx.shape[0], a.size, KRONROD_NODES.size)
        kron = (fx @ KRONROD_WEIGHTS) * half
        gauss = (fx @ GAUSS_WEIGHTS) * half
        err = np.max(np.abs(kron - gauss), axis=0)
        panel_sum = kron.sum(axis=1)
        total = panel_sum if total is None else total + panel_sum
        tol = max(epsabs, epsrel * np.max(np.abs(total)))
        live_err = err.sum()
        if done_err + live_err <= tol:
            done_nodes.append(x.ravel())
            done_w.append((half[:, None] * KRONROD_WEIGHTS[None, :]).ravel())
            done_err += live_err
            break
        # keep panels that are already fine, split the rest
        budget = tol * (b - a) / (edges[-1] - edges[0])
        keep = err <= budget
        if keep.any():
            done_nodes.append(x[keep].ravel())
            done_w.append((half[keep, None] * KRONROD_WEIGHTS[None, :]).ravel())
            done_err += err[keep].sum()
        total = total - kron[:, ~keep].sum(axis=1)
        a_s, b_s, m_s = a[~keep], b[~keep], mid[~keep]
        a = np.concatenate([a_s, m_s])
        b = np.concatenate([m_s, b_s])
        n_done = sum(v.size for v in done_nodes) // KRONROD_NODES.size
        if n_done + a.size > max_panels:
            raise NumericError(
                f"adaptive quadrature exceeded {max_panels} panels "
                f"(error estimate {done_err + live_err:.3e}, target {tol:.3e})"
            )
        if np.any(b - a <= np.abs(a) * 4 * np.finfo(float).eps):
            raise NumericError(
                f"adaptive quadrature hit floating-point resolution "
                f"(error estimate {done_err + live_err:.3e}, target {tol:.3e})"
            )
    nodes = np.concatenate(done_nodes)
    weights = np.concatenate(done_w)
    order = np.argsort(nodes, kind="stable")
    return QuadRule(nodes[order], weights[order], float(done_err), nodes.size // KRONROD_NODES.size)
