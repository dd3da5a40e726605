"""Closed-form constants: moment constants, mixing bounds, kernel regularity.

These are the analytic upper bounds that the statistical experiments compare
against; everything is a small formula plus, where a model is supplied, a
direct enumeration check of its hypotheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import FlowConsistencyError, HypothesisNotSatisfied
from .flow import FlowAnalytics, concentration_b
from .model import FeynmanKacModel, McKeanSpec, validate_model


def burkholder_d(p: int) -> float:
    """Moment constant d(p) for empirical measures of independent variables.

    d(2n) = (2n)!/n! * 2^-n and d(2n-1) = (2n-1)!/((n-1)!) / sqrt(n - 1/2)
    * 2^-(n-1/2), with the falling-factorial reading (m)_k = m!/(m-k)!.
    d(2) = 1 and d(4) = 3, matching the Gaussian moments.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p % 2 == 0:
        n = p // 2
        return math.perm(2 * n, n) * 2.0 ** (-n)
    n = (p + 1) // 2
    return math.perm(2 * n - 1, n) / math.sqrt(n - 0.5) * 2.0 ** (-(n - 0.5))


@dataclass(frozen=True)
class McKeanGamma:
    """Regularity masses of the constant-eps kernel family.

    The kernel's one-step difference at two measures is controlled by a single
    point mass on the centered terminal function, so gamma = 0 and
    gamma_prime = 1.  combined is the larger of the two total masses and
    tilde = combined + 1 enters the fluctuation constant a3.
    """

    gamma: float = 0.0
    gamma_prime: float = 1.0

    @property
    def combined(self) -> float:
        return max(self.gamma, self.gamma_prime)

    @property
    def tilde(self) -> float:
        return self.combined + 1.0


def mckean_gamma(spec: McKeanSpec) -> McKeanGamma:
    """Regularity constants for a constant-eps mixing spec."""
    # only constant (measure-independent) eps is supported, so the constants
    # do not depend on the actual values
    return McKeanGamma()


def a3_constant(flow: FlowAnalytics, n: int, gamma: float = 1.0) -> float:
    """Exponential-continuity constant of the increasing-process increments.

    a3(n) = 4*sqrt(2)*(1+gamma) * max over q in {n, n-1} of
    sum_{p<=q} ratios[p,q]*betas[p,q]; the inner sums are b(q)/2.
    """
    if flow.betas is None:
        raise FlowConsistencyError("run semigroups before a3_constant")
    sums = [concentration_b(flow, q) / 2.0 for q in range(max(n - 1, 0), n + 1)]
    return 4.0 * math.sqrt(2.0) * (1.0 + gamma) * max(sums)


@dataclass(frozen=True)
class MixingBounds:
    """Closed-form bounds under an (m, r, rho) minorization hypothesis."""

    m: int
    r: float
    rho: float
    r_bound: float                 # bounds the mass ratio over an m-step window
    beta_bounds: np.ndarray | None # per-gap contraction bound, None if vacuous
    b_bound: float                 # bounds sup_n b(n)
    a3_bound: float                # bounds sup_n a3(n)
    r_check: bool | None = None    # numeric confirmations when a model is given
    b_check: bool | None = None
    a3_check: bool | None = None


def _window_kernel(model: FeynmanKacModel, n: int, m: int) -> np.ndarray:
    acc = model.kernels[n]
    for q in range(n + 1, n + m):
        acc = acc @ model.kernels[q]
    return acc


def check_minorization(model: FeynmanKacModel, m: int, rho: float) -> None:
    """Verify M_{n,n+m}(x, A) >= rho * M_{n,n+m}(y, A) by direct enumeration.

    On finite spaces it is enough to check the atoms: for every column z the
    smallest row entry must dominate rho times the largest.
    """
    for n in range(model.horizon - m + 1):
        window = _window_kernel(model, n, m)
        lo = window.min(axis=0)
        hi = window.max(axis=0)
        bad = lo + tol.ALGEBRA < rho * hi
        if np.any(bad):
            z = int(np.argmax(bad))
            raise HypothesisNotSatisfied(
                f"window [{n}, {n + m}] violates the rho={rho} minorization at "
                f"state {z}: min={lo[z]}, max={hi[z]}"
            )


def mixing_bounds(
    m: int,
    r: float,
    rho: float,
    n: int,
    model: FeynmanKacModel | None = None,
    flow: FlowAnalytics | None = None,
    gamma: float = 1.0,
) -> MixingBounds:
    """Closed-form uniform bounds, optionally verified against a model.

    r_bound = r**m / rho, b_bound = 2*m*r**(2m-1) / rho**3 and
    a3_bound = 8*sqrt(2)*m*r**(2m-1)*(1+gamma) / rho**3.  The per-gap
    contraction bound (1 - r**(m-1)*rho**2)**floor(gap/m) is reported only
    when its base lies in (0, 1); it is never asserted.

    When a model is given, the minorization hypothesis is checked by
    enumeration (raising HypothesisNotSatisfied on failure, also when the
    supplied r does not dominate the model's potential ratios), and the
    computed window ratios, b(n) and a3(n) are compared against the bounds.
    """
    if m < 1 or r < 1.0 or not 0.0 < rho <= 1.0:
        raise ValueError(f"need m >= 1, r >= 1, rho in (0, 1]; got {(m, r, rho)}")
    r_bound = r**m / rho
    b_bound = 2.0 * m * r ** (2 * m - 1) / rho**3
    a3_bound = 8.0 * math.sqrt(2.0) * m * r ** (2 * m - 1) * (1.0 + gamma) / rho**3

    base = 1.0 - r ** (m - 1) * rho**2
    if 0.0 < base < 1.0:
        gaps = np.arange(n + 1)
        beta_bounds = base ** np.floor(gaps / m)
    else:
        beta_bounds = None

    r_check = b_check = a3_check = None
    if model is not None:
        pot_ratios = validate_model(model)
        if pot_ratios.max() > r + tol.ALGEBRA:
            raise HypothesisNotSatisfied(
                f"supplied r={r} is below the model's potential ratio "
                f"{pot_ratios.max()}"
            )
        check_minorization(model, m, rho)
        if flow is not None and flow.ratios is not None:
            H = model.horizon
            slack = 1.0 + tol.PRODUCT
            r_check = all(
                flow.ratios[p, p + m] <= r_bound * slack for p in range(H - m + 1)
            )
            b_check = all(
                concentration_b(flow, q) <= b_bound * slack for q in range(H + 1)
            )
            a3_check = all(
                a3_constant(flow, q, gamma) <= a3_bound * slack for q in range(H + 1)
            )
    return MixingBounds(
        m=m,
        r=r,
        rho=rho,
        r_bound=r_bound,
        beta_bounds=beta_bounds,
        b_bound=b_bound,
        a3_bound=a3_bound,
        r_check=r_check,
        b_check=b_check,
        a3_check=a3_check,
    )
