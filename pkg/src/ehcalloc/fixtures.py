"""Bundled reference system and workflow.

The topology is a measured three-tier deployment: a Raspberry Pi class
edge board, a laptop class hub and a rack server cloud node, with the
edge and cloud reachable from each other only through the hub.  The
workflow is a 15-task visual inspection pipeline: one capture task fans
out into two processing branches that are fused by a final reporting
task pinned to the hub.
"""

from __future__ import annotations

from .model import UNBOUNDED, Channel, CriticalityPolicy, Device, TaskSpec, Topology, WorkflowGraph

GIB = 2 ** 30
WH = 3600.0          # joules per watt hour
MBIT_S = 1e6         # bits per second
UJ_BIT = 1e-6        # joules per bit
US = 1e-6            # seconds


def reference_topology() -> Topology:
    devices = [
        Device("e", memory_budget=1 * GIB, storage_budget=16 * GIB,
               energy_budget=129.96 * WH,
               compare_time=1.00 * US, vote_time=1.50 * US,
               compare_power=1.20, vote_power=1.21,
               idle_power=1.2, max_power=4.5),
        Device("h", memory_budget=8 * GIB, storage_budget=512 * GIB,
               energy_budget=60.00 * WH,
               compare_time=0.02 * US, vote_time=0.03 * US,
               compare_power=8.02, vote_power=8.03,
               idle_power=8.0, max_power=44.0),
        Device("c", memory_budget=400 * GIB, storage_budget=10240 * GIB,
               energy_budget=UNBOUNDED,
               compare_time=0.01 * US, vote_time=0.02 * US,
               compare_power=75.23, vote_power=75.26,
               idle_power=75.0, max_power=900.0),
    ]
    channels = [
        Channel("e", "h", bandwidth=11.0 * MBIT_S, tx_energy=1.00 * UJ_BIT, rx_energy=0.70 * UJ_BIT),
        Channel("h", "e", bandwidth=8.5 * MBIT_S, tx_energy=1.00 * UJ_BIT, rx_energy=0.70 * UJ_BIT),
        Channel("h", "c", bandwidth=12.5 * MBIT_S, tx_energy=2.50 * UJ_BIT, rx_energy=1.25 * UJ_BIT),
        Channel("c", "h", bandwidth=20.0 * MBIT_S, tx_energy=2.50 * UJ_BIT, rx_energy=1.25 * UJ_BIT),
    ]
    relays = {("e", "c"): "h", ("c", "e"): "h"}
    return Topology(devices, channels, relays)


def default_policy(level: int = 3) -> CriticalityPolicy:
    return CriticalityPolicy(level=level, max_level=3, kappa=0.06, lambda_coef=3.0)


# (id, memory B, storage B, output bits, exec s (e,h,c), power W (e,h,c),
#  vulnerability (e,h,c)) for the freely placeable tasks
_FREE_TASKS = [
    ("t2", 32148999, 128822516, 8203990, (13.252, 0.4948, 0.346), (4.15, 43.87, 75.22), (0.0258, 0.2437, 0.0291)),
    ("t3", 32897430, 213777233, 8272778, (2.095, 0.2757, 0.1436), (3.97, 30.17, 75.22), (0.0691, 0.0338, 0.0023)),
    ("t4", 20577670, 226591890, 14283936, (7.012, 0.0941, 0.0331), (2.61, 43.87, 124.59), (0.214, 0.0042, 0.0338)),
    ("t5", 39613605, 125358044, 4845088, (16.268, 2.1405, 1.1148), (3.49, 26.52, 75.22), (0.1175, 0.0194, 0.0272)),
    ("t6", 6248809, 230211087, 12188944, (13.026, 1.7139, 0.8927), (2.11, 16.04, 75.22), (0.1586, 0.0463, 0.0112)),
    ("t7", 22390570, 136630222, 1283056, (13.326, 1.7534, 0.9132), (3.23, 24.55, 75.22), (0.1033, 0.0409, 0.0133)),
    ("t8", 12021235, 179337708, 1089621, (5.463, 0.0402, 0.0305), (3.66, 43.87, 75.22), (0.1926, 0.1453, 0.1976)),
    ("t9", 35811625, 228426783, 21331605, (4.78, 0.6289, 0.3276), (2.64, 20.06, 75.22), (0.0277, 0.1846, 0.0579)),
    ("t10", 8202346, 239400337, 13186533, (13.515, 0.0995, 0.0754), (3.78, 43.87, 75.22), (0.1503, 0.2782, 0.0279)),
    ("t11", 7073807, 185671130, 8752872, (8.503, 1.1188, 0.5827), (3.44, 26.14, 75.22), (0.2703, 0.0371, 0.0345)),
    ("t12", 18280616, 392561759, 15159800, (4.704, 0.0631, 0.0222), (3.96, 43.87, 124.59), (0.2722, 0.0436, 0.0163)),
    ("t13", 10277580, 204109713, 6749535, (13.484, 0.0992, 0.0752), (3.62, 43.87, 75.22), (0.1967, 0.0549, 0.0167)),
    ("t14", 38873981, 125251413, 17122363, (9.245, 1.0182, 0.1103), (2.23, 20.25, 186.91), (0.0571, 0.2241, 0.049)),
]


def inspection_workflow() -> WorkflowGraph:
    """15 tasks: capture (pinned to the edge camera board), two parallel
    processing chains, and a fusion/report task (pinned to the hub)."""
    tasks = [
        TaskSpec("t1", memory=12e6, storage=3e7, output_size=22e6,
                 allowed_devices=("e",),
                 exec_time={"e": 0.8}, power={"e": 2.2}, vulnerability={"e": 0.035}),
    ]
    for tid, mem, sto, out, (le, lh, lc), (pe, ph, pc), (ve, vh, vc) in _FREE_TASKS:
        tasks.append(TaskSpec(
            tid, memory=float(mem), storage=float(sto), output_size=float(out),
            allowed_devices=("e", "h", "c"),
            exec_time={"e": le, "h": lh, "c": lc},
            power={"e": pe, "h": ph, "c": pc},
            vulnerability={"e": ve, "h": vh, "c": vc},
        ))
    tasks.append(TaskSpec("t15", memory=2e7, storage=2.5e8, output_size=5e5,
                          allowed_devices=("h",),
                          exec_time={"h": 0.6}, power={"h": 9.5},
                          vulnerability={"h": 0.028}))

    arcs = [("t1", "t2"), ("t1", "t10")]
    arcs += [(f"t{i}", f"t{i + 1}") for i in range(2, 9)]       # t2 .. t9
    arcs += [("t9", "t15")]
    arcs += [(f"t{i}", f"t{i + 1}") for i in range(10, 14)]     # t10 .. t14
    arcs += [("t14", "t15")]
    return WorkflowGraph(tasks, arcs)
