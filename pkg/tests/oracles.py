"""Reference computations that share no code with the solver paths.

Dense Gaussian elimination on the full Laplacian and explicit closed forms.
"""
import numpy as np

from harmonia.weighted_graph import Subdomain, WeightedGraph


def dense_kernel(g: WeightedGraph, d: Subdomain) -> tuple[list, list, np.ndarray]:
    """Harmonic measure by numpy.linalg.solve on ``L_II u = -L_IB``."""
    inter = sorted(d.interior)
    bnd = sorted(d.boundary)
    ii = {v: i for i, v in enumerate(inter)}
    bi = {v: j for j, v in enumerate(bnd)}
    L = np.zeros((len(inter), len(inter)))
    B = np.zeros((len(inter), len(bnd)))
    for x in inter:
        for y, w in g.neighbors(x).items():
            L[ii[x], ii[x]] += w
            if y in ii:
                L[ii[x], ii[y]] -= w
            elif y in bi:
                B[ii[x], bi[y]] += w
    return inter, bnd, np.linalg.solve(L, B)


def gauss_seidel(g: WeightedGraph, d: Subdomain, f: dict, tol: float = 1e-13) -> dict:
    """In-place mean-value sweeps in plain Python."""
    u = {v: 0.0 for v in d.interior}
    u.update({q: float(f[q]) for q in d.boundary})
    while True:
        change = 0.0
        for x in sorted(d.interior):
            nb = g.neighbors(x)
            new = sum(w * u[y] for y, w in nb.items() if y in u) / sum(nb.values())
            change = max(change, abs(new - u[x]))
            u[x] = new
        if change <= tol:
            return u


def path_kernel(n_interior: int) -> np.ndarray:
    """Gambler's ruin on b0 - x1 .. xn - b_{n+1}: rows x_i, columns (b0, b_{n+1})."""
    i = np.arange(1, n_interior + 1)
    m = n_interior + 1
    return np.stack([1 - i / m, i / m], axis=1)
