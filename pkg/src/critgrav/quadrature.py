"""Globally adaptive 2-D Gauss-Kronrod cubature on rectangles.

Each cell is integrated with the tensor 15-point Kronrod rule; the embedded
7-point Gauss tensor rule gives the error estimate. The cell with the
largest estimate is split into four until the summed estimate meets the
tolerance. Used as an independent check of the closed-form cylinder energy.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNonConvergence

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
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

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # ascending, 15 nodes
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (indices 1, 3, ..., 13)
W_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

W2_K = np.outer(W_KRONROD, W_KRONROD)
W2_G = np.outer(W_GAUSS, W_GAUSS)


@dataclass(frozen=True)
class CubatureResult:
    value: float
    error: float
    cells: int
    evaluations: int
    converged: bool


def _rule(f, cells):
    """Kronrod value and |Kronrod - Gauss| for an (n, 4) array of cells."""
    x0, x1, y0, y1 = cells.T
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    cx = 0.5 * (x1 + x0)
    cy = 0.5 * (y1 + y0)
    X = cx[:, None, None] + hx[:, None, None] * NODES[None, :, None]
    Y = cy[:, None, None] + hy[:, None, None] * NODES[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    F = f(X, Y)
    jac = hx * hy
    k = np.einsum("nij,ij->n", F, W2_K) * jac
    g = np.einsum("nij,ij->n", F, W2_G) * jac
    return k, np.abs(k - g)


def adaptive_cubature(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_breaks: Sequence[float],
    y_breaks: Sequence[float],
    rtol: float = 1e-6,
    atol: float = 0.0,
    max_cells: int = 200_000,
) -> CubatureResult:
    """Integrate vectorized ``f(x, y)`` over the box spanned by the break lists.

    The breaks define the initial tensor mesh; graded breaks let the rule
    resolve features far smaller than the box.
    """
    if not rtol > 0:
        raise ValueError("rtol must be > 0")
    xb = np.asarray(x_breaks, dtype=float)
    yb = np.asarray(y_breaks, dtype=float)
    cells = np.array(
        [(xb[i], xb[i + 1], yb[j], yb[j + 1]) for i in range(len(xb) - 1) for j in range(len(yb) - 1)]
    )
    vals, errs = _rule(f, cells)
    heap = [(-e, i) for i, e in enumerate(errs)]
    heapq.heapify(heap)
    store = {i: (tuple(cells[i]), vals[i], errs[i]) for i in range(len(cells))}
    next_id = len(cells)
    total = float(np.sum(vals))
    total_err = float(np.sum(errs))
    evaluations = len(cells) * 225
    while total_err > max(atol, rtol * abs(total)):
        if len(store) + 3 > max_cells:
            total = math.fsum(v for _, v, _ in store.values())
            return CubatureResult(total, total_err, len(store), evaluations, False)
        # refine a batch of the worst cells at once to amortize numpy overhead
        batch = [heapq.heappop(heap)[1] for _ in range(min(16, len(heap)))]
        children = []
        for cid in batch:
            (x0, x1, y0, y1), v, e = store.pop(cid)
            total -= v
            total_err -= e
            xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            children += [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        arr = np.array(children)
        cv, ce = _rule(f, arr)
        evaluations += len(children) * 225
        for c, v, e in zip(children, cv, ce):
            store[next_id] = (c, v, e)
            heapq.heappush(heap, (-e, next_id))
            next_id += 1
        total += float(np.sum(cv))
        total_err += float(np.sum(ce))
    total = math.fsum(v for _, v, _ in store.values())
    total_err = math.fsum(e for _, _, e in store.values())
    return CubatureResult(total, total_err, len(store), evaluations, True)


def graded_breaks(start: float, stop: float, scale: float, first: float = 0.125) -> list:
    """Breakpoints ``start + scale * first * 2**k`` clipped to ``[start, stop]``."""
    out = [start]
    step = scale * first
    while start + step < stop:
        out.append(start + step)
        step *= 2.0
    out.append(stop)
    return out
