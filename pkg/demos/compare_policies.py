"""
Gain-aware DP against the online baselines
==========================================

One seeded stream of 300 tasks, three policies. The DP sees the whole stream
and trades depth on one task for room on the next; greedy always goes as deep
as the current state allows; random ignores the state entirely.
"""

from orbit_sim import Scenario, margin_pct, run

scenario = Scenario.default(n_tasks=300, arrival_prob=0.1, seed=0)
results = {policy: run(scenario, policy) for policy in ("dp", "greedy", "random")}

print(f"{'policy':8s} {'gain':>8s} {'completion':>11s} {'latency':>9s}")
for policy, res in results.items():
    m = res.metrics
    print(f"{policy:8s} {m.total_gain:8.2f} {m.completion_rate:11.3f} {m.avg_latency:8.2f}s")

dp = results["dp"].metrics.total_gain
for other in ("greedy", "random"):
    print(f"dp over {other}: {margin_pct(dp, results[other].metrics.total_gain):+.1f}% gain")

# which exits did each policy pick?
for policy, res in results.items():
    counts = [sum(row.E == e for row in res.trace) for e in range(5)]
    print(f"{policy:8s} skip={counts[0]:3d}  " + "  ".join(f"E{e}={c:3d}" for e, c in enumerate(counts) if e))
