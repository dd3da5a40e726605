"""Canonical parameterized models, one per structural case.

Every entry bundles a model, a mixing spec and a default test function, plus
a note on what it exercises.  Entries are reproducible constants: any
randomness inside a builder comes from a fixed builder seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonTooLargeForPathSpace, UnknownEntry
from .model import (
    FeynmanKacModel,
    McKeanSpec,
    TestFunction,
    indicator_function,
    make_function,
    make_model,
    validate_model,
    validate_spec,
)
from .rng import stream

MAX_PATH_HORIZON = 8  # path dimension 2**(n+1) caps at 512


@dataclass(frozen=True)
class ZooEntry:
    name: str
    params: dict
    model: FeynmanKacModel
    spec: McKeanSpec
    f: TestFunction
    notes: str


def _hmm_parts(horizon, stay0, stay1, accuracy, obs_seed):
    """Transition matrix, synthetic observations and likelihood potentials."""
    M = np.array([[stay0, 1.0 - stay0], [1.0 - stay1, stay1]])
    rng = stream(obs_seed, 0)
    # simulate one hidden trajectory and flip each emission with prob 1-accuracy
    x = 0 if rng.random() < 0.5 else 1
    obs = []
    for n in range(horizon + 1):
        if n > 0:
            x = 0 if rng.random() < M[x, 0] else 1
        y = x if rng.random() < accuracy else 1 - x
        obs.append(y)
    potentials = []
    for y in obs:
        g = np.where(np.arange(2) == y, accuracy, 1.0 - accuracy)
        potentials.append(g)
    return M, tuple(obs), potentials


def binary_hmm(
    horizon: int = 5,
    stay0: float = 0.985,
    stay1: float = 0.985,
    accuracy: float = 0.985,
    eps_scale: float = 0.0,
    obs_seed: int = 1905,
) -> ZooEntry:
    """Two-state filtering model with likelihood potentials.

    The potentials are the emission likelihoods of one fixed synthetic
    observation record, so the flow is the exact posterior of the hidden
    state.  eps_scale in [0, 1] sets eps_n = eps_scale / max(G_n).
    """
    M, obs, potentials = _hmm_parts(horizon, stay0, stay1, accuracy, obs_seed)
    model = make_model(
        eta0=[0.5, 0.5], kernels=[M] * horizon, potentials=potentials
    )
    eps = tuple(eps_scale / potentials[n].max() for n in range(horizon))
    entry = ZooEntry(
        name="binary_hmm",
        params={
            "horizon": horizon,
            "stay0": stay0,
            "stay1": stay1,
            "accuracy": accuracy,
            "eps_scale": eps_scale,
            "obs_seed": obs_seed,
            "observations": list(obs),
        },
        model=model,
        spec=McKeanSpec(epsilons=eps),
        f=indicator_function(model.dims, 1),
        notes="nonlinear filtering posterior; the default rate-experiment target",
    )
    return entry


def ring_walk(
    d: int = 4,
    holding: float = 0.5,
    ratio: float = 2.0,
    horizon: int = 5,
    eps_scale: float = 0.5,
) -> ZooEntry:
    """Random walk on a d-ring with a distinguished heavy site.

    The walk holds with probability `holding`, otherwise moves to a uniform
    neighbor.  Potentials are constant in time with max/min ratio `ratio`,
    so the two-step composition is strictly positive: the model satisfies an
    explicit (m=2, r=ratio, rho) minorization, which is what this entry is
    for.  eps_n = eps_scale / ratio keeps the kernel weights in [0, 1].
    """
    M = np.zeros((d, d))
    for x in range(d):
        M[x, x] = holding
        M[x, (x - 1) % d] += (1.0 - holding) / 2.0
        M[x, (x + 1) % d] += (1.0 - holding) / 2.0
    g = np.ones(d)
    g[0] = ratio
    model = make_model(
        eta0=np.full(d, 1.0 / d),
        kernels=[M] * horizon,
        potentials=[g] * (horizon + 1),
    )
    # half-amplitude wave: oscillation exactly 1, usable in every experiment
    f = make_function([0.5 * np.cos(2.0 * np.pi * np.arange(d) / d)] * (horizon + 1))
    return ZooEntry(
        name="ring_walk",
        params={
            "d": d,
            "holding": holding,
            "ratio": ratio,
            "horizon": horizon,
            "eps_scale": eps_scale,
        },
        model=model,
        spec=McKeanSpec(epsilons=(eps_scale / ratio,) * horizon),
        f=f,
        notes="uniform mixing case with an explicit (m, r, rho) certificate",
    )


def path_genealogy(
    horizon: int = 5,
    stay0: float = 0.985,
    stay1: float = 0.985,
    accuracy: float = 0.985,
    obs_seed: int = 1905,
) -> ZooEntry:
    """Path-space expansion of the two-state filtering model.

    States at time n are whole trajectories (x_0, ..., x_n) encoded as base-2
    integers (x_0 is the lowest bit), so d_n = 2**(n+1).  Kernels append one
    coordinate; potentials depend on the terminal coordinate only, making the
    particle system a genealogical-tree sampler whose terminal-coordinate
    marginal must match the flat filtering flow.
    """
    if horizon > MAX_PATH_HORIZON:
        raise HorizonTooLargeForPathSpace(
            f"horizon {horizon} gives dimension 2**{horizon + 1}; "
            f"cap is {MAX_PATH_HORIZON}"
        )
    M, obs, flat_potentials = _hmm_parts(horizon, stay0, stay1, accuracy, obs_seed)
    kernels = []
    for n in range(horizon):
        d_from, d_to = 2 ** (n + 1), 2 ** (n + 2)
        K = np.zeros((d_from, d_to))
        for code in range(d_from):
            last = path_last_state(code, n)
            for nxt in range(2):
                K[code, code + (nxt << (n + 1))] = M[last, nxt]
        kernels.append(K)
    potentials = []
    for n in range(horizon + 1):
        d_n = 2 ** (n + 1)
        last = np.array([path_last_state(c, n) for c in range(d_n)])
        potentials.append(flat_potentials[n][last])
    values = []
    for n in range(horizon + 1):
        d_n = 2 ** (n + 1)
        last = np.array([path_last_state(c, n) for c in range(d_n)])
        values.append(last.astype(float))
    model = make_model(eta0=[0.5, 0.5], kernels=kernels, potentials=potentials)
    return ZooEntry(
        name="path_genealogy",
        params={
            "horizon": horizon,
            "stay0": stay0,
            "stay1": stay1,
            "accuracy": accuracy,
            "obs_seed": obs_seed,
            "observations": list(obs),
        },
        model=model,
        spec=McKeanSpec.zero(horizon),
        f=make_function(values),
        notes="genealogical path expansion; marginal must equal binary_hmm",
    )


def path_last_state(code: int, n: int) -> int:
    """Terminal coordinate of a base-2 path code of length n+1."""
    return (code >> n) & 1


def path_decode(code: int, n: int) -> tuple[int, ...]:
    """Full coordinate tuple (x_0, ..., x_n) of a path code."""
    return tuple((code >> q) & 1 for q in range(n + 1))


def path_encode(coords) -> int:
    """Inverse of path_decode."""
    return sum(int(x) << q for q, x in enumerate(coords))


def plain_markov(horizon: int = 5, eps: float = 1.0) -> ZooEntry:
    """Unweighted two-state chain: potentials are identically one.

    The flow is the bare chain law, and with eps = 1 the particle kernel is
    the chain kernel itself (fully independent particles), which makes this
    the degeneracy and reduction oracle.
    """
    M = np.array([[0.8, 0.2], [0.3, 0.7]])
    model = make_model(
        eta0=[0.5, 0.5],
        kernels=[M] * horizon,
        potentials=[np.ones(2)] * (horizon + 1),
    )
    return ZooEntry(
        name="plain_markov",
        params={"horizon": horizon, "eps": eps},
        model=model,
        spec=McKeanSpec(epsilons=(eps,) * horizon),
        f=indicator_function(model.dims, 0),
        notes="unit potentials; flow reduces to the plain chain law",
    )


def iid_reduction(p: float = 0.2) -> ZooEntry:
    """Horizon-0 model: the fluctuation is a standardized binomial error.

    Used to calibrate the rate harness against the classical independent-sum
    normal approximation, whose exact distance is computable from the
    binomial distribution.
    """
    model = make_model(eta0=[1.0 - p, p], kernels=[], potentials=[np.ones(2)])
    return ZooEntry(
        name="iid_reduction",
        params={"p": p},
        model=model,
        spec=McKeanSpec(epsilons=()),
        f=indicator_function(model.dims, 1),
        notes="independent draws only; classical rate calibration",
    )


_BUILDERS = {
    "binary_hmm": binary_hmm,
    "ring_walk": ring_walk,
    "path_genealogy": path_genealogy,
    "plain_markov": plain_markov,
    "iid_reduction": iid_reduction,
}


def names() -> list[str]:
    return sorted(_BUILDERS)


def build(name: str, **params) -> ZooEntry:
    """Build a zoo entry by name; unknown names raise UnknownEntry."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownEntry(f"unknown zoo entry {name!r}; know {names()}") from None
    entry = builder(**params)
    validate_model(entry.model)
    validate_spec(entry.spec, entry.model)
    return entry
