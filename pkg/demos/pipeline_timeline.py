"""
One task through the three-stage pipeline
=========================================

A LEO-imaging task runs its first layers on the LEO, ships the cut tensor to
the HEO, and finishes there. Every (exit, partition) pair gives a different
timeline; a busy HEO queue pushes the remote stage back.
"""

from orbit_sim import Decision, LinkParams, QueueState, TaskSpec, TaskType, builtin_profile, schedule_task

profile = builtin_profile("alexnet-5ee")
link = LinkParams()
task = TaskSpec(id=0, task_type=TaskType.LEO_IMAGING, data_size=5 * 24576, deadline_rel=27.0, arrival=0.0)

# deepest exit, every partition point, empty queues
print("exit 4, empty queues")
for p in range(profile.branch(4).layer_count + 1):
    tl = schedule_task(profile, task, Decision(4, p), QueueState(), link)
    print(f"  P={p}: LEO {tl.s1:5.2f}-{tl.o1:5.2f}  HEO {tl.s2:5.2f}-{tl.o2:5.2f}  done {tl.o3:6.2f} s"
          f"  {'meets' if tl.meets(task) else 'misses'} the deadline")

# the same choices while the HEO is still busy with earlier work until t = 20 s
print("exit 4, HEO busy until 20 s")
busy = QueueState({}, 20.0)
for p in (0, 4, 8):
    tl = schedule_task(profile, task, Decision(4, p), busy, link)
    print(f"  P={p}: done {tl.o3:6.2f} s")
