"""Seeded simulation of the interacting particle system.

A run is addressed by (master seed, replicate index); each time step consumes
its own counter-based stream, so traces are reproducible byte for byte and
replicates stay independent under any execution order.  Empirical measures
are kept as integer count vectors and every martingale bookkeeping quantity
is evaluated from them by exact finite-space sums.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFunction, FlowConsistencyError
from .flow import FlowAnalytics, analyze, mckean_kernel, step_phi
from .model import FeynmanKacModel, McKeanSpec, TestFunction
from .rng import categorical, categorical_rows, stream


@dataclass(frozen=True)
class RunConfig:
    """Simulation parameters.

    Attributes:
        n_particles: population size N >= 1.
        seed: master seed; replicate streams are derived from it.
        horizon: final time index (must not exceed the model horizon).
        record_fields: names of optional per-step series for tabular output.
    """

    n_particles: int
    seed: int
    horizon: int
    record_fields: tuple[str, ...] = ()


@dataclass(frozen=True)
class ParticleCloud:
    """Particle positions at one time index."""

    states: np.ndarray
    time: int
    dim: int

    def counts(self) -> np.ndarray:
        return np.bincount(self.states, minlength=self.dim)

    def empirical(self) -> np.ndarray:
        return self.counts() / len(self.states)


@dataclass(frozen=True)
class RunTrace:
    """Counts per time step of one realized run; everything else derives."""

    n_particles: int
    counts: list[np.ndarray]

    def empirical(self, n: int) -> np.ndarray:
        return self.counts[n] / self.n_particles


def init_particles(
    config: RunConfig, model: FeynmanKacModel, replicate: int = 0
) -> ParticleCloud:
    """Draw N independent initial states from the initial law."""
    if config.n_particles < 1:
        raise ValueError(f"n_particles must be >= 1, got {config.n_particles}")
    rng = stream(config.seed, replicate, 0)
    states = categorical(rng, model.eta0, config.n_particles)
    return ParticleCloud(states=states, time=0, dim=model.dims[0])


def step_particles(
    cloud: ParticleCloud,
    model: FeynmanKacModel,
    spec: McKeanSpec,
    config: RunConfig,
    replicate: int = 0,
) -> ParticleCloud:
    """Advance every particle one step through the empirical-measure kernel.

    Particle i moves from row states[i] of the kernel built at the current
    empirical measure; uniforms are consumed in particle order from the
    stream addressed by (seed, replicate, time+1).
    """
    n = cloud.time
    kernel = mckean_kernel(model, spec, cloud.empirical(), n)
    rng = stream(config.seed, replicate, n + 1)
    states = categorical_rows(rng, kernel, cloud.states)
    return ParticleCloud(states=states, time=n + 1, dim=model.dims[n + 1])


def simulate(
    config: RunConfig,
    model: FeynmanKacModel,
    spec: McKeanSpec,
    replicate: int = 0,
) -> RunTrace:
    """Run one replicate to the configured horizon and record count vectors."""
    if config.horizon > model.horizon:
        raise ValueError(
            f"config horizon {config.horizon} exceeds model horizon {model.horizon}"
        )
    cloud = init_particles(config, model, replicate)
    counts = [cloud.counts()]
    for _ in range(config.horizon):
        cloud = step_particles(cloud, model, spec, config, replicate)
        counts.append(cloud.counts())
    return RunTrace(n_particles=config.n_particles, counts=counts)


def martingale_increment(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    f: TestFunction,
    cloud_prev: ParticleCloud | None,
    cloud: ParticleCloud,
) -> float:
    """Sampling error of the step into cloud: realized minus predicted mean.

    At time 0 the prediction is the exact initial law.
    """
    n = cloud.time
    emp = cloud.empirical()
    if n == 0:
        return float((emp - model.eta0) @ f.values[0])
    predicted = step_phi(model, cloud_prev.empirical(), n - 1)
    return float((emp - predicted) @ f.values[n])


def increasing_process_increment(
    model: FeynmanKacModel,
    spec: McKeanSpec,
    f: TestFunction,
    cloud_prev: ParticleCloud | None,
    time: int,
) -> float:
    """Exact conditional variance of the time-`time` sampling error.

    Deterministic given the previous cloud (a closed-form sum over states);
    the time-0 increment is the variance of f_0 under the initial law.
    """
    if time == 0:
        v = f.values[0]
        mean = float(model.eta0 @ v)
        return float(model.eta0 @ (v * v)) - mean * mean
    mu = cloud_prev.empirical()
    K = mckean_kernel(model, spec, mu, time - 1)
    v = f.values[time]
    kf = K @ v
    return float(mu @ (K @ (v * v) - kf * kf))


def martingale_increments(
    trace: RunTrace, model: FeynmanKacModel, spec: McKeanSpec, f: TestFunction
) -> np.ndarray:
    """Realized sampling-error increments along a trace."""
    n_steps = len(trace.counts)
    out = np.empty(n_steps)
    out[0] = float((trace.empirical(0) - model.eta0) @ f.values[0])
    for n in range(1, n_steps):
        predicted = step_phi(model, trace.empirical(n - 1), n - 1)
        out[n] = float((trace.empirical(n) - predicted) @ f.values[n])
    return out


def increasing_increments(
    trace: RunTrace, model: FeynmanKacModel, spec: McKeanSpec, f: TestFunction
) -> np.ndarray:
    """Increments of the realized increasing process along a trace."""
    n_steps = len(trace.counts)
    out = np.empty(n_steps)
    v0 = f.values[0]
    mean0 = float(model.eta0 @ v0)
    out[0] = float(model.eta0 @ (v0 * v0)) - mean0 * mean0
    for n in range(1, n_steps):
        mu = trace.empirical(n - 1)
        K = mckean_kernel(model, spec, mu, n - 1)
        v = f.values[n]
        kf = K @ v
        out[n] = float(mu @ (K @ (v * v) - kf * kf))
    return out


@dataclass(frozen=True)
class DoobSeries:
    """Per-index decomposition of the realized fluctuation field.

    a and m are the predictable and martingale parts of the empirical mean of
    the transported functions; b and l are their sqrt(N)-scaled counterparts
    entering the fluctuation field w.  residual_mean and residual_field are
    the worst per-index gaps of the two exact decompositions; both are pure
    floating-point error on every realized run.
    """

    a: np.ndarray
    m: np.ndarray
    b: np.ndarray
    l: np.ndarray
    w: np.ndarray
    residual_mean: float
    residual_field: float


def doob_terms(
    trace: RunTrace,
    flow: FlowAnalytics,
    model: FeynmanKacModel,
    f: TestFunction,
    n: int,
) -> DoobSeries:
    """Evaluate the predictable/martingale decompositions on a realized run.

    Requires flow analytics with the transported family built for terminal
    index n.  All series are exact functions of the recorded empirical
    measures; no sampling is involved.
    """
    if flow.fpn is None or flow.terminal != n:
        raise FlowConsistencyError(
            f"flow analytics must hold the transported family for terminal {n}"
        )
    N = trace.n_particles
    root_n = np.sqrt(N)
    fpn = flow.fpn
    emp = [trace.empirical(q) for q in range(n + 1)]

    a_inc = np.zeros(n + 1)
    m_inc = np.zeros(n + 1)
    b_inc = np.zeros(n + 1)
    m_inc[0] = float((emp[0] - flow.etas[0]) @ fpn[0])
    for q in range(1, n + 1):
        g = model.potentials[q - 1]
        mass_ratio = float(emp[q - 1] @ g) / float(flow.etas[q - 1] @ g)
        phi_emp = step_phi(model, emp[q - 1], q - 1)
        phi_exact = step_phi(model, flow.etas[q - 1], q - 1)
        a_inc[q] = (1.0 - mass_ratio) * float(phi_emp @ fpn[q])
        m_inc[q] = float((emp[q] - phi_emp) @ fpn[q])
        b_inc[q] = root_n * (1.0 - mass_ratio) * float((phi_emp - phi_exact) @ fpn[q])

    a = np.cumsum(a_inc)
    m = np.cumsum(m_inc)
    b = np.cumsum(b_inc)
    l = root_n * m
    w = np.array(
        [root_n * float((emp[p] - flow.etas[p]) @ fpn[p]) for p in range(n + 1)]
    )

    mean_series = np.array([float(emp[p] @ fpn[p]) for p in range(n + 1)])
    residual_mean = float(np.max(np.abs(mean_series - (a + m))))
    residual_field = float(np.max(np.abs(w - (b + l))))
    return DoobSeries(
        a=a, m=m, b=b, l=l, w=w,
        residual_mean=residual_mean,
        residual_field=residual_field,
    )


@dataclass(frozen=True)
class ReplicateStats:
    """Terminal statistics of one replicate."""

    replicate: int
    w: float
    l_terminal: float
    b_terminal: float
    c_total: float
    delta_c_terminal: float
    max_dev: float
    residual_mean: float
    residual_field: float


def simulate_replicates(
    config: RunConfig,
    model: FeynmanKacModel,
    spec: McKeanSpec,
    f: TestFunction,
    n_reps: int,
    flow: FlowAnalytics | None = None,
    normalize: bool = False,
    threads: int | None = None,
) -> list[ReplicateStats]:
    """Run independent replicates and collect their terminal statistics.

    Deterministic for a fixed master seed: replicate r always uses the
    streams addressed (seed, r, step), so the output list does not depend on
    the execution order or thread count.

    Args:
        flow: analytics for f with terminal index config.horizon; computed
            here when omitted.
        normalize: divide w and the decomposition terms by the limiting
            standard deviation (raises DegenerateFunction when it vanishes).
        threads: worker threads for replicate execution (default serial).
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    n = config.horizon
    if flow is None or flow.terminal != n or flow.sigma_sq is None:
        flow = analyze(model, spec, f, terminal=n)
    scale = 1.0
    if normalize:
        if flow.sigma_sq <= 0.0 or f.oscillation(n) == 0.0:
            raise DegenerateFunction(
                f"limiting variance at time {n} is zero; cannot normalize"
            )
        scale = 1.0 / np.sqrt(flow.sigma_sq)

    def one(replicate: int) -> ReplicateStats:
        trace = simulate(config, model, spec, replicate)
        dc = increasing_increments(trace, model, spec, f)
        doob = doob_terms(trace, flow, model, f, n)
        emp_n = trace.empirical(n)
        return ReplicateStats(
            replicate=replicate,
            w=float(scale * doob.w[n]),
            l_terminal=float(scale * doob.l[n]),
            b_terminal=float(scale * doob.b[n]),
            c_total=float(dc.sum()),
            delta_c_terminal=float(dc[n]),
            max_dev=float(np.max(np.abs(emp_n - flow.etas[n]))),
            residual_mean=doob.residual_mean,
            residual_field=doob.residual_field,
        )

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(n_reps)))
    return [one(r) for r in range(n_reps)]
