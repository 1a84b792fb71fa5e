"""
Sweeping the arrival probability
================================

Busier streams leave less slack between tasks, which is where planning ahead
pays. Ten replications per point keep this quick; the acceptance suite uses
thirty.
"""

from orbit_sim import Scenario, sweep

result = sweep(Scenario.default(n_tasks=100), "arrival_prob", [0.05, 0.1, 0.2, 0.3], replications=10)

print(f"{'p':>5s} {'dp':>8s} {'greedy':>8s} {'random':>8s} {'dp-greedy':>10s}")
for p in result.values:
    dp, greedy, rnd = (result.stat(p, pol, "total_gain")[0] for pol in ("dp", "greedy", "random"))
    print(f"{p:5.2f} {dp:8.2f} {greedy:8.2f} {rnd:8.2f} {dp - greedy:10.2f}")
