"""Two-step expansion of a task graph for allocation with time redundancy.

Step one replicates every task across the devices it may run on and every
task-graph arc across all compatible device pairs, pricing each arc with
its transfer latency and energy.  Step two expands each task-on-device
node into explicit redundancy candidates: one for single execution, one
per replica device for dual execution, and one per unordered replica pair
for triple execution.  Each candidate carries its own end-to-end latency,
per-replica energy bill and residual vulnerability, so the allocation
problem downstream is linear in candidate picks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CriticalityPolicy, Topology, TaskSpec, WorkflowGraph, validate_workflow
from .params import (
    ExecMode,
    comm_energy,
    comm_latency,
    comp_energy,
    exec_mode,
    rx_energy,
    tx_energy,
)


@dataclass(frozen=True)
class EgArc:
    """Arc between two task-on-device placements, pricing one transfer."""

    src_task: str
    src_dev: str
    dst_task: str
    dst_dev: str
    latency: float                # seconds, 0 when devices coincide
    energy: float                 # joules across all devices involved


class ExpandedGraph:
    """Task graph replicated over the devices each task may run on."""

    def __init__(self, graph: WorkflowGraph, topology: Topology) -> None:
        self.graph = graph
        self.topology = topology

        # device order inside a task is canonical: topology order
        self.nodes: list[tuple[str, str]] = []
        self.devices_of: dict[str, list[str]] = {}
        for task in graph.tasks:
            devs = sorted(task.allowed_devices, key=topology.device_index)
            self.devices_of[task.id] = devs
            self.nodes.extend((task.id, d) for d in devs)

        self.arcs: list[EgArc] = []
        for src, dst in graph.arcs:
            bits = graph.task(src).output_size
            for k in self.devices_of[src]:
                for l in self.devices_of[dst]:
                    self.arcs.append(EgArc(
                        src, k, dst, l,
                        latency=comm_latency(topology, k, l, bits),
                        energy=comm_energy(topology, k, l, bits),
                    ))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)


def build_eg(graph: WorkflowGraph, topology: Topology) -> ExpandedGraph:
    """Validate the workflow and expand it over the topology."""
    report = validate_workflow(graph, topology)
    if not report.ok:
        raise ValueError("invalid workflow: " + "; ".join(report.violations))
    return ExpandedGraph(graph, topology)


@dataclass(frozen=True)
class CandidateNode:
    """One concrete way to run a task: primary device plus replica slots.

    ``replicas`` holds the devices of slots 2.. (empty for single
    execution); slot 1 always runs on ``primary``.  ``latency`` is the
    candidate's completion time including redundancy overhead and replica
    round-trips, ``per_replica_energy`` the joules each slot charges to
    the device it runs on, and ``vulnerability`` the probability that
    every replica fails.
    """

    task: str
    primary: str
    mode: ExecMode
    replicas: tuple[str, ...]
    latency: float
    per_replica_energy: tuple[tuple[int, str, float], ...]   # (slot, device, joules)
    vulnerability: float

    @property
    def reliability(self) -> float:
        return 1.0 - self.vulnerability

    @property
    def key(self) -> str:
        if not self.replicas:
            return f"{self.task}@{self.primary}"
        return f"{self.task}@{self.primary}+{','.join(self.replicas)}"


def candidate_latency(
    topology: Topology,
    task: TaskSpec,
    primary: str,
    replicas: tuple[str, ...],
    in_bits: float,
) -> float:
    """Completion time of one candidate, seconds.

    Re-executions on the primary serialize; a replica on another device
    runs in parallel with the primary but pays for shipping the task
    input out and the result back.  Two replicas on the same foreign
    device serialize there after a single input transfer.
    """
    k = primary
    dev = topology.device(k)
    out_bits = task.output_size
    lk = task.exec_time[k]

    def round_trip(n: str, runs: int = 1) -> float:
        return (comm_latency(topology, k, n, in_bits)
                + runs * (task.exec_time[n] + comm_latency(topology, n, k, out_bits)))

    if not replicas:
        return lk
    if len(replicas) == 1:
        l = replicas[0]
        if l == k:
            return 2 * lk + dev.compare_time
        return max(lk, round_trip(l)) + dev.compare_time
    on_primary = sum(1 for r in replicas if r == k)
    remotes = [r for r in replicas if r != k]
    if on_primary == 2:
        span = 3 * lk
    elif on_primary == 1:
        span = max(2 * lk, round_trip(remotes[0]))
    elif remotes[0] == remotes[1]:
        span = max(lk, round_trip(remotes[0], runs=2))
    else:
        span = max(lk, round_trip(remotes[0]), round_trip(remotes[1]))
    return span + dev.vote_time


def candidate_replica_energy(
    topology: Topology,
    task: TaskSpec,
    primary: str,
    replicas: tuple[str, ...],
    in_bits: float,
) -> tuple[tuple[int, str, float], ...]:
    """Energy each replica slot charges to its device, joules.

    Slot 1 (the primary) additionally pays the comparison or vote
    overhead, one input transmission per distinct foreign replica device
    and the reception of every foreign replica's result.  A foreign slot
    pays to receive the input, execute, and send its result back.
    """
    k = primary
    dev = topology.device(k)
    out_bits = task.output_size
    mode = ExecMode(1 + len(replicas))

    primary_joules = comp_energy(task, k)
    if mode is ExecMode.DE:
        primary_joules += dev.compare_energy
    elif mode is ExecMode.TE:
        primary_joules += dev.vote_energy
    remotes = [r for r in replicas if r != k]
    for r in sorted(set(remotes), key=topology.device_index):
        primary_joules += tx_energy(topology, k, r, in_bits)
    for r in remotes:
        primary_joules += rx_energy(topology, r, k, out_bits)

    slots: list[tuple[int, str, float]] = [(1, k, primary_joules)]
    for z, n in enumerate(replicas, start=2):
        if n == k:
            joules = comp_energy(task, k)
        else:
            joules = (rx_energy(topology, k, n, in_bits)
                      + comp_energy(task, n)
                      + tx_energy(topology, n, k, out_bits))
        slots.append((z, n, joules))
    return tuple(slots)


def candidate_vulnerability(task: TaskSpec, primary: str, replicas: tuple[str, ...]) -> float:
    """Probability that the primary and every replica all fail."""
    v = task.vulnerability[primary]
    for r in replicas:
        v *= task.vulnerability[r]
    return v


class CandidateGraph:
    """Redundancy-expanded graph: candidates per placement plus the EG arcs."""

    def __init__(self, eg: ExpandedGraph, policy: CriticalityPolicy) -> None:
        self.eg = eg
        self.policy = policy
        self.topology = eg.topology
        self.graph = eg.graph

        self.input_size: dict[str, float] = {
            t: eg.graph.input_size(t) for t in eg.graph.task_ids
        }
        self.mode_of: dict[tuple[str, str], ExecMode] = {}
        self.candidates: list[CandidateNode] = []
        self.candidates_of: dict[tuple[str, str], list[int]] = {}

        topo = eg.topology
        for task_id, k in eg.nodes:
            task = eg.graph.task(task_id)
            mode = exec_mode(task.vulnerability[k], policy)
            self.mode_of[(task_id, k)] = mode
            devs = eg.devices_of[task_id]
            if mode is ExecMode.SE:
                replica_sets: list[tuple[str, ...]] = [()]
            elif mode is ExecMode.DE:
                replica_sets = [(l,) for l in devs]
            else:
                replica_sets = [(devs[a], devs[b])
                                for a in range(len(devs))
                                for b in range(a, len(devs))]
            ids: list[int] = []
            in_bits = self.input_size[task_id]
            for reps in replica_sets:
                cand = CandidateNode(
                    task=task_id,
                    primary=k,
                    mode=mode,
                    replicas=reps,
                    latency=candidate_latency(topo, task, k, reps, in_bits),
                    per_replica_energy=candidate_replica_energy(topo, task, k, reps, in_bits),
                    vulnerability=candidate_vulnerability(task, k, reps),
                )
                ids.append(len(self.candidates))
                self.candidates.append(cand)
            self.candidates_of[(task_id, k)] = ids

    @property
    def arcs(self) -> list[EgArc]:
        return self.eg.arcs

    @property
    def candidate_count(self) -> int:
        return len(self.candidates)

    @property
    def replica_slot_count(self) -> int:
        return sum(1 + len(c.replicas) for c in self.candidates)

    def candidates_for_task(self, task_id: str) -> list[int]:
        out: list[int] = []
        for dev in self.eg.devices_of[task_id]:
            out.extend(self.candidates_of[(task_id, dev)])
        return out


def build_reg(eg: ExpandedGraph, policy: CriticalityPolicy) -> CandidateGraph:
    """Expand every task-on-device node into its redundancy candidates."""
    return CandidateGraph(eg, policy)


def eg_summary(eg: ExpandedGraph) -> dict:
    """Size and degree statistics of an expanded graph, for debugging."""
    out_deg: dict[tuple[str, str], int] = {n: 0 for n in eg.nodes}
    in_deg: dict[tuple[str, str], int] = {n: 0 for n in eg.nodes}
    for a in eg.arcs:
        out_deg[(a.src_task, a.src_dev)] += 1
        in_deg[(a.dst_task, a.dst_dev)] += 1

    def histogram(deg: dict) -> dict[str, int]:
        hist: dict[str, int] = {}
        for v in deg.values():
            hist[str(v)] = hist.get(str(v), 0) + 1
        return dict(sorted(hist.items(), key=lambda kv: int(kv[0])))

    return {
        "nodes": eg.node_count,
        "arcs": eg.arc_count,
        "devices_per_task": {t: len(d) for t, d in eg.devices_of.items()},
        "out_degree_histogram": histogram(out_deg),
        "in_degree_histogram": histogram(in_deg),
    }


def reg_summary(reg: CandidateGraph) -> dict:
    """Candidate statistics of a redundancy-expanded graph."""
    per_mode = {m.name: 0 for m in ExecMode}
    for c in reg.candidates:
        per_mode[c.mode.name] += 1
    return {
        "candidates": reg.candidate_count,
        "arcs": len(reg.arcs),
        "replica_slots": reg.replica_slot_count,
        "candidates_per_mode": per_mode,
        "candidates_per_task": {
            t: len(reg.candidates_for_task(t)) for t in reg.graph.task_ids
        },
    }


def to_dot(eg: ExpandedGraph) -> str:
    """Render the expanded graph in DOT format."""
    lines = ["digraph expanded {", "  rankdir=LR;"]
    for task_id, dev in eg.nodes:
        lines.append(f'  "{task_id}@{dev}";')
    for a in eg.arcs:
        lines.append(
            f'  "{a.src_task}@{a.src_dev}" -> "{a.dst_task}@{a.dst_dev}"'
            f' [label="{a.latency:.4g}s"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
