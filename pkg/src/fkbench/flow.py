"""Exact evolution of the weighted flow and its limiting constants.

Everything here is deterministic linear algebra on the finite model: the
normalized distribution flow eta_n, log-normalizers, the two-parameter
transport semigroup and its normalized form, contraction coefficients,
limiting variances and the concentration constant b(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .errors import EpsilonOutOfRange, FlowConsistencyError, ZeroMass
from .model import FeynmanKacModel, McKeanSpec, TestFunction, validate_model


@dataclass
class FlowAnalytics:
    """Exact flow quantities, filled in stages.

    exact_flow fills etas and log_gamma1.  semigroups adds the normalized
    transport matrices qbar[(p, n)], the transported centered functions
    fpn[p] for a terminal index, and the full upper-triangular tables of
    Dobrushin coefficients (betas) and mass ratios (ratios).
    limiting_variance adds the variance increments and their sum.
    """

    etas: list[np.ndarray] = field(default_factory=list)
    log_gamma1: np.ndarray | None = None
    qbar: dict[tuple[int, int], np.ndarray] | None = None
    terminal: int | None = None
    fpn: list[np.ndarray] | None = None
    betas: np.ndarray | None = None
    ratios: np.ndarray | None = None
    deltaC: np.ndarray | None = None
    sigma_sq: float | None = None
    b_const: np.ndarray | None = None


def boltzmann_gibbs(model: FeynmanKacModel, mu, n: int) -> np.ndarray:
    """Reweight mu by the time-n potential and renormalize."""
    mu = np.asarray(mu, dtype=float)
    weighted = model.potentials[n] * mu
    mass = weighted.sum()
    if mass <= 0.0:
        raise ZeroMass(f"measure has zero mass under potential {n}")
    return weighted / mass


def step_phi(model: FeynmanKacModel, mu, n: int) -> np.ndarray:
    """One nonlinear update: reweight at time n, then move through kernel n."""
    return boltzmann_gibbs(model, mu, n) @ model.kernels[n]


def exact_flow(model: FeynmanKacModel) -> FlowAnalytics:
    """Run the flow recursion exactly over the whole horizon.

    log-normalizers are accumulated in the log domain:
    log gamma_{n+1}(1) = log gamma_n(1) + log eta_n(G_n), starting from 0.
    """
    validate_model(model)
    H = model.horizon
    etas = [model.eta0.copy()]
    log_g = np.zeros(H + 1)
    for n in range(H):
        log_g[n + 1] = log_g[n] + np.log(float(etas[n] @ model.potentials[n]))
        etas.append(step_phi(model, etas[n], n))
    return FlowAnalytics(etas=etas, log_gamma1=log_g)


def mckean_kernel(model: FeynmanKacModel, spec: McKeanSpec, mu, n: int) -> np.ndarray:
    """Row-stochastic selection/mutation kernel for step n -> n+1 at measure mu.

    Row x mixes kernel row x (weight eps_n*G_n(x)) with the updated law of mu
    (complementary weight).  eps_n*G_n must lie in [0, 1].
    """
    mu = np.asarray(mu, dtype=float)
    eps = spec.epsilons[n]
    w = eps * model.potentials[n]
    if eps < 0 or np.any(w > 1.0 + tol.ALGEBRA):
        raise EpsilonOutOfRange(f"eps[{n}]={eps} puts eps*G outside [0,1]")
    target = step_phi(model, mu, n)
    return w[:, None] * model.kernels[n] + (1.0 - w)[:, None] * target


def compatibility_residual(model: FeynmanKacModel, spec: McKeanSpec, mu, n: int) -> float:
    """Max-norm gap between mu applied to its own kernel and the direct update.

    Zero in exact arithmetic for every valid (mu, eps); the contract is
    <= 1e-12 in floating point.
    """
    mu = np.asarray(mu, dtype=float)
    kernel = mckean_kernel(model, spec, mu, n)
    target = step_phi(model, mu, n)
    # row-wise difference first: the zero-eps rows cancel exactly
    return float(np.max(np.abs(mu @ (kernel - target[None, :]))))


def dobrushin_beta(P: np.ndarray) -> float:
    """Largest total-variation distance between two rows of a Markov matrix."""
    best = 0.0
    for x in range(P.shape[0] - 1):
        gap = 0.5 * np.abs(P[x + 1 :] - P[x]).sum(axis=1).max()
        best = max(best, float(gap))
    return best


def semigroups(
    model: FeynmanKacModel,
    flow: FlowAnalytics,
    f: TestFunction,
    terminal: int | None = None,
) -> FlowAnalytics:
    """Fill the normalized transport matrices and their contraction tables.

    The normalized semigroup from p to n is the product over q = p..n-1 of
    diag(G_q) M_{q+1} / eta_q(G_q); each factor is rescaled by the one-step
    normalizer so the accumulated product stays O(1).  Row-normalizing any of
    these matrices gives the Markov transport P_{p,n} whose Dobrushin
    coefficient is tabulated in betas[p, n]; ratios[p, n] is the max/min
    ratio of the row masses.

    fpn[p] is the transported, terminally centered test function: the
    (p, terminal) matrix applied to f_terminal minus its flow mean.
    """
    if not flow.etas:
        raise FlowConsistencyError("run exact_flow before semigroups")
    H = model.horizon
    n_star = H if terminal is None else terminal

    steps = [
        model.potentials[q][:, None]
        * model.kernels[q]
        / float(flow.etas[q] @ model.potentials[q])
        for q in range(H)
    ]
    qbar: dict[tuple[int, int], np.ndarray] = {}
    for p in range(H + 1):
        acc = np.eye(model.dims[p])
        qbar[(p, p)] = acc
        for q in range(p, H):
            acc = acc @ steps[q]
            qbar[(p, q + 1)] = acc

    betas = np.full((H + 1, H + 1), np.nan)
    ratios = np.full((H + 1, H + 1), np.nan)
    for p in range(H + 1):
        for n in range(p, H + 1):
            mass = qbar[(p, n)].sum(axis=1)
            ratios[p, n] = float(mass.max() / mass.min())
            betas[p, n] = dobrushin_beta(qbar[(p, n)] / mass[:, None])

    centered = f.values[n_star] - float(flow.etas[n_star] @ f.values[n_star])
    fpn = [qbar[(p, n_star)] @ centered for p in range(n_star + 1)]

    flow.qbar = qbar
    flow.terminal = n_star
    flow.fpn = fpn
    flow.betas = betas
    flow.ratios = ratios
    flow.b_const = np.array([concentration_b(flow, n) for n in range(H + 1)])
    return flow


def _variance_increments(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    etas: list[np.ndarray],
    family: list[np.ndarray],
) -> np.ndarray:
    """Conditional-variance increments of a per-time function family.

    Term p is the flow-weighted conditional variance of family[p] under the
    step-(p-1) kernel; the p = 0 term is the plain variance under the initial
    law.  Each term is evaluated in two algebraically equal forms and the
    pair must agree to the algebra tolerance.
    """
    out = np.empty(len(family))
    for p, v in enumerate(family):
        if p == 0:
            mean = float(etas[0] @ v)
            out[0] = float(etas[0] @ (v * v)) - mean * mean
            continue
        K = mckean_kernel(model, spec, etas[p - 1], p - 1)
        kf = K @ v
        form1 = float(etas[p - 1] @ (K @ (v * v) - kf * kf))
        form2 = float(
            step_phi(model, etas[p - 1], p - 1) @ (v * v) - etas[p - 1] @ (kf * kf)
        )
        if abs(form1 - form2) > tol.ALGEBRA:
            raise FlowConsistencyError(
                f"variance increment forms disagree at p={p}: {form1} vs {form2}"
            )
        out[p] = form1
    return out


def limiting_variance(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    flow: FlowAnalytics,
    f: TestFunction,
) -> tuple[np.ndarray, float]:
    """Variance increments of the transported family fpn and their sum."""
    if flow.fpn is None:
        semigroups(model, flow, f)
    delta = _variance_increments(model, spec, flow.etas, flow.fpn)
    flow.deltaC = delta
    flow.sigma_sq = float(delta.sum())
    return delta, flow.sigma_sq


def limiting_increasing_process(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    etas: list[np.ndarray],
    f: TestFunction,
    n: int,
) -> np.ndarray:
    """Increments of the deterministic increasing process of f itself.

    Uses the raw per-time values f_p (not the transported family); the sum up
    to n is the large-population limit of the particle increasing process.
    """
    return _variance_increments(model, spec, etas, [f.values[p] for p in range(n + 1)])


def concentration_b(flow: FlowAnalytics, n: int) -> float:
    """Concentration constant b(n) = 2 * sum_{q<=n} ratios[q,n] * betas[q,n]."""
    if flow.betas is None or flow.ratios is None:
        raise FlowConsistencyError("run semigroups before concentration_b")
    q = np.arange(n + 1)
    return float(2.0 * np.sum(flow.ratios[q, n] * flow.betas[q, n]))


def analyze(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    f: TestFunction,
    terminal: int | None = None,
) -> FlowAnalytics:
    """exact_flow + semigroups + limiting_variance in one call."""
    flow = exact_flow(model)
    semigroups(model, flow, f, terminal=terminal)
    limiting_variance(model, spec, flow, f)
    return flow
