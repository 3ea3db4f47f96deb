"""Bounded Nelder-Mead simplex minimiser."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool
    trace: list = field(default_factory=list)


def minimize(fun, x0, step=0.02, bounds=None, max_iter=500, xtol=1e-4):
    """Minimise ``fun`` from ``x0``.

    The initial simplex offsets each coordinate by ``step`` times its scale
    (|x0_k|, or 1 where x0_k == 0). Convergence is declared when every vertex
    lies within ``xtol`` (relative to that same scale) of the best vertex.
    Points are clipped into ``bounds`` (sequence of (lo, hi), None = open).
    ``trace`` records (iteration, best f) once per iteration.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    scale = np.where(x0 != 0, np.abs(x0), 1.0)
    if bounds is not None:
        lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], float)
        hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], float)
    else:
        lo = np.full(n, -np.inf)
        hi = np.full(n, np.inf)

    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        return float(fun(x))

    def clip(x):
        return np.clip(x, lo, hi)

    sim = [clip(x0)]
    for k in range(n):
        v = x0.copy()
        v[k] += step * scale[k]
        v = clip(v)
        if np.allclose(v, sim[0]):
            v[k] = x0[k] - step * scale[k]
            v = clip(v)
        sim.append(v)
    sim = np.array(sim)
    fs = np.array([f(v) for v in sim])

    trace = []
    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        trace.append((it, float(fs[0])))
        if np.max(np.abs(sim[1:] - sim[0]) / scale) < xtol:
            converged = True
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        xr = clip(centroid + (centroid - sim[-1]))
        fr = f(xr)
        if fr < fs[0]:
            xe = clip(centroid + 2.0 * (centroid - sim[-1]))
            fe = f(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = clip(centroid + 0.5 * (xr - centroid))
            fc = f(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xc = clip(centroid + 0.5 * (sim[-1] - centroid))
            fc = f(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
                continue
        # shrink toward the best vertex
        for i in range(1, n + 1):
            sim[i] = clip(sim[0] + 0.5 * (sim[i] - sim[0]))
            fs[i] = f(sim[i])

    order = np.argsort(fs, kind="stable")
    return SimplexResult(sim[order[0]].copy(), float(fs[order[0]]), it, nfev, converged, trace)
