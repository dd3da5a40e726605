"""
One particle run and its martingale bookkeeping
===============================================

Simulate a single seeded replicate and evaluate, per time step: the sampling
error increments, the realized increasing process, and the two exact
decompositions of the fluctuation field.  The decomposition residuals are
pure floating-point error on every run; no averaging is involved.
"""

import numpy as np

import fkbench as fk
from fkbench import zoo

np.set_printoptions(precision=5, suppress=True)

entry = zoo.build("binary_hmm")
model, spec, f = entry.model, entry.spec, entry.f
flow = fk.analyze(model, spec, f, terminal=5)

config = fk.RunConfig(n_particles=500, seed=2024, horizon=5)
trace = fk.simulate(config, model, spec, replicate=0)
print("particle counts per step (rows = time):")
for n, c in enumerate(trace.counts):
    print(f"  n={n}: {c}   empirical = {trace.empirical(n)}")

inc_m = fk.martingale_increments(trace, model, spec, f)
inc_c = fk.increasing_increments(trace, model, spec, f)
print("\nsampling-error increments:", inc_m)
print("increasing-process increments:", inc_c)
print("realized increasing process:", np.cumsum(inc_c))
limit = fk.limiting_increasing_process(model, spec, flow.etas, f, 5)
print("limiting increments:        ", limit)

series = fk.doob_terms(trace, flow, model, f, 5)
print("\nfluctuation field w_p:", series.w)
print("predictable part b_p: ", series.b)
print("martingale part l_p:  ", series.l)
print(f"decomposition residuals: mean {series.residual_mean:.2e}, "
      f"field {series.residual_field:.2e}")

# determinism: the same address always reproduces the same trace
again = fk.simulate(config, model, spec, replicate=0)
same = all(np.array_equal(a, b) for a, b in zip(trace.counts, again.counts))
print(f"\nsame seed, same replicate, same trace: {same}")
