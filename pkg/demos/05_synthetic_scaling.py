"""
Synthetic workloads and model growth
====================================

The generator builds seed-deterministic workflows in three structure
classes and draws execution profiles scaled from edge-device pools, so
benchmark instances of any size are one call away.  This script grows
the task count and watches the model (and the exact solver) keep up.
"""

import time

import ehcalloc as e
import ehcalloc.synthgen as sg

topology = e.reference_topology()
devices = tuple(topology.devices)
policy = e.default_policy()
weights = e.ObjectiveWeights(0.5, 0.5)

# ---------------------------------------------------------------------
# Structure classes: a chain with skip arcs, a fan-out tree with joins,
# and alternating runs and fork-joins.
for structure in ("serial", "parallel", "mixed"):
    arcs = sg.generate_structure(sg.GenSpec(task_count=10,
                                            structure=structure, seed=0))
    print(f"{structure:<10} 10 tasks -> {len(arcs)} arcs")

# ---------------------------------------------------------------------
# Model size is governed by the redundancy mix.  Each device tier has
# its own single/dual/triple quota -- fragile edge placements are
# mostly triple execution, robust cloud placements mostly single -- so
# candidates per task stay near a dozen at any scale.
print(f"\n{'tasks':>6}{'candidates':>12}{'variables':>11}"
      f"{'constraints':>13}{'solve_s':>9}")
for n in (5, 8, 12, 15):
    graph = sg.generate(sg.GenSpec(task_count=n, structure="mixed", seed=7),
                        devices)
    reg, model = e.prepare(topology, graph, policy)
    stats = e.model_stats(model)
    t0 = time.perf_counter()
    plan, _ = e.solve_allocation(topology, graph, policy, weights)
    dt = time.perf_counter() - t0
    print(f"{n:>6}{len(reg.candidates):>12}"
          f"{stats['variables']['total']:>11}"
          f"{stats['constraints']['total']:>13}{dt:>9.2f}")

# ---------------------------------------------------------------------
# The built-in branch-and-bound is exact, and exactness has a price:
# past roughly twenty tasks the search can take minutes.  For headroom
# experiments the model exports to MPS with a JSON sidecar (column
# semantics, row tags, objective constant), so any external
# mixed-integer solver can take over where enumeration and
# branch-and-bound stop being fun:
#
#   ehcalloc generate --tasks 100 --structure mixed --out big.json
#   ehcalloc export-mps --workflow big.json --objective rel-max \
#       --out big.mps
