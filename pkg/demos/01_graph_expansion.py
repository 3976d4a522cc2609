"""
From task graph to candidate graph
==================================

A workflow is placed in two steps.  First every task is replicated once
per device it may run on (the device-level graph), then every one of
those placements expands into concrete redundancy candidates: a single
run, a run plus one replica, or a run plus two replicas, depending on
how vulnerable that task is on that device.
"""

import ehcalloc as e

# the bundled three-device reference system and its fifteen-task
# inspection pipeline
topology = e.reference_topology()
workflow = e.inspection_workflow()
policy = e.default_policy()          # highest criticality level

print(f"devices:   {[d.id for d in topology.devices]}")
print(f"tasks:     {len(workflow.tasks)}, arcs: {len(list(workflow.arcs))}")
print(f"thresholds at level {policy.level}: "
      f"dual >= {policy.thresholds()[0]}, triple >= {policy.thresholds()[1]}")

# ---------------------------------------------------------------------
# Step one replicates tasks across their allowed devices.  Task t1 is
# pinned to the edge sensor and t15 to the hub, so they contribute one
# node each; the thirteen free tasks contribute three nodes each.
eg = e.build_eg(workflow, topology)
summary = e.eg_summary(eg)
print(f"\ndevice-level graph: {summary['nodes']} nodes, "
      f"{summary['arcs']} arcs")
print(f"devices per task:   {summary['devices_per_task']}")

# ---------------------------------------------------------------------
# Step two expands each placement into redundancy candidates.  A
# placement needing two replicas on a three-device system yields six
# unordered replica pairs, so candidate counts grow quickly with
# vulnerability.
reg = e.build_reg(eg, policy)
rs = e.reg_summary(reg)
print(f"\ncandidate graph:    {rs['candidates']} candidates, "
      f"{rs['arcs']} arcs, {rs['replica_slots']} replica slots")
print(f"candidates per mode: {rs['candidates_per_mode']}")

# ---------------------------------------------------------------------
# Every candidate knows its end-to-end latency (including replica
# round-trips and compare/vote overhead) and its reliability.  Here is
# everything task t2 could do:
print("\ncandidates for t2:")
print(f"{'key':<14}{'mode':<6}{'latency_s':>12}{'reliability':>14}")
for i in reg.candidates_for_task("t2"):
    c = reg.candidates[i]
    print(f"{c.key:<14}{c.mode.name:<6}{c.latency:>12.6f}"
          f"{c.reliability:>14.9f}")
