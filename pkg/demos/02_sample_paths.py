"""One exact sample path of the modulated default count at two chain
speeds, plus the three sampling engines drawing from the same law."""

import numpy as np

from mmbinom import (
    ProcessSpec,
    RngStream,
    conditional_binomial_sample,
    sample_chain_path,
    sample_counts_on_grid,
    simulate_counting,
    validate_generator,
)

Q = np.array([[-5.0, 1.0, 5.0], [2.0, -2.0, 5.0], [3.0, 1.0, -10.0]])
G = validate_generator(Q)
lam = (0.1, 1.0, 3.0)

for speed in (1.0, 50.0):
    spec = ProcessSpec(n=1000, lam=lam, chain_speed=speed, horizon=3.0)
    path = simulate_counting(spec, G, RngStream(7, 0), z0=0)
    grid = np.linspace(0.0, 3.0, 7)
    print(f"chain speed {speed:g}: {path.chain.jump_times.size} chain jumps, "
          f"{path.event_times.size} defaults")
    print("  t      :", "  ".join(f"{t:6.2f}" for t in grid))
    print("  N_t    :", "  ".join(f"{c:6d}" for c in path.counts_on_grid(grid)))

# same marginal law three ways (t = 2, speed 5)
spec = ProcessSpec(n=200, lam=lam, chain_speed=5.0, horizon=2.0)
M = 2000
joint = np.array([simulate_counting(spec, G, RngStream(8, i)).count_at(2.0) for i in range(M)])
thin = np.array([sample_counts_on_grid(spec, G, [2.0], RngStream(9, i), engine="thinning")[0]
                 for i in range(M)])
cond = np.empty(M)
for i in range(M):
    rng = RngStream(10, i)
    chain = sample_chain_path(G, 5.0, "stationary", 2.0, rng)
    cond[i] = conditional_binomial_sample(chain, lam, 200, 2.0, rng)

print()
print(f"{M} draws of N_2 (n=200) from each engine:")
for name, x in (("joint event-driven", joint), ("thinning", thin), ("conditional binomial", cond)):
    print(f"  {name:22s} mean {x.mean():7.2f}  sd {x.std(ddof=1):6.2f}")
