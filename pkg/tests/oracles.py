"""Brute-force reference computations for the tests.

Everything here enumerates paths or states directly, without any of the
matrix recursions used by the library, so it can serve as an independent
check of the exact-flow code paths.
"""

import itertools

import numpy as np


def path_weight(model, path):
    """Initial mass times all step weights along one trajectory."""
    w = model.eta0[path[0]]
    for q in range(len(path) - 1):
        w *= model.potentials[q][path[q]] * model.kernels[q][path[q], path[q + 1]]
    return w


def enumerate_paths(model, n):
    return itertools.product(*[range(model.dims[t]) for t in range(n + 1)])


def flow_by_enumeration(model, n):
    """(eta_n, normalizer mass) by summing over every trajectory."""
    mass = 0.0
    eta = np.zeros(model.dims[n])
    for path in enumerate_paths(model, n):
        w = path_weight(model, path)
        mass += w
        eta[path[-1]] += w
    return eta / mass, mass


def transport_by_enumeration(model, p, n):
    """Unnormalized transport matrix from time p to n by path sums."""
    if p == n:
        return np.eye(model.dims[p])
    Q = np.zeros((model.dims[p], model.dims[n]))
    for xp in range(model.dims[p]):
        for mid in itertools.product(*[range(model.dims[t]) for t in range(p + 1, n)]):
            for xn in range(model.dims[n]):
                seq = (xp,) + mid + (xn,)
                w = 1.0
                for q in range(len(seq) - 1):
                    t = p + q
                    w *= model.potentials[t][seq[q]] * model.kernels[t][seq[q], seq[q + 1]]
                Q[xp, xn] += w
    return Q


def variance_by_enumeration(model, f, n):
    """Limiting variance of the terminal fluctuation, zero-eps kernels.

    With eps = 0 every kernel row equals the one-step updated law, so the
    conditional variance at step p collapses to the plain variance of the
    transported function under eta_p; the p = 0 term is the variance under
    the initial law.  All ingredients are computed by path enumeration.
    """
    etas = [flow_by_enumeration(model, t)[0] for t in range(n + 1)]
    masses = [flow_by_enumeration(model, t)[1] for t in range(n + 1)]
    centered = f.values[n] - etas[n] @ f.values[n]
    total = 0.0
    increments = []
    for p in range(n + 1):
        Q = transport_by_enumeration(model, p, n)
        fpn = (masses[p] / masses[n]) * (Q @ centered)
        inc = float(etas[p] @ (fpn**2)) - float(etas[p] @ fpn) ** 2
        increments.append(inc)
        total += inc
    return np.array(increments), total
