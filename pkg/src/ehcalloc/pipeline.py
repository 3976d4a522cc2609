"""End-to-end allocation: build, normalize, solve, report.

A solve runs the full stack: expand the workflow, assemble the BILP,
compute normalization bounds with four auxiliary solves, scalarize with
the requested weights, solve exactly, and package the result as an
:class:`AllocationPlan`.  Plans serialize to JSON and sweeps to CSV with
stable field order and no timestamps, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import oracle
from .bilp import (
    BilpModel,
    InfeasibleError,
    NormalizationBounds,
    ObjectiveWeights,
    arc_energy_share,
    build_model,
    weighted_objective,
    normalization_bounds,
)
from .model import CriticalityPolicy, TaskSpec, Topology, WorkflowGraph
from .solver import Solution, SolverOptions, SolverStatus, solve_builtin
from .transform import CandidateGraph, build_eg, build_reg


@dataclass
class PipelineContext:
    """Everything a solve produced, for callers that want to dig deeper."""

    topology: Topology
    graph: WorkflowGraph
    policy: CriticalityPolicy
    reg: CandidateGraph
    model: BilpModel
    bounds: NormalizationBounds
    weighted: BilpModel | None = None
    solution: Solution | None = None


@dataclass
class AllocationPlan:
    status: str
    criticality_level: int
    w_rel: float
    w_lat: float
    g: float | None = None
    f_rel: float | None = None
    f_lat: float | None = None
    f_rel_norm: float | None = None
    f_lat_norm: float | None = None
    reliability: float | None = None
    bounds: dict = field(default_factory=dict)
    tasks: list[dict] = field(default_factory=list)
    arcs: list[dict] = field(default_factory=list)
    devices: list[dict] = field(default_factory=list)
    solver_nodes: int = 0
    # kept off to_json_dict: written artifacts must be byte-identical
    # across repeat runs
    wall_time_s: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "criticality_level": self.criticality_level,
            "weights": {"w_rel": self.w_rel, "w_lat": self.w_lat},
            "objective": {
                "g": self.g,
                "f_rel": self.f_rel,
                "f_lat_s": self.f_lat,
                "f_rel_norm": self.f_rel_norm,
                "f_lat_norm": self.f_lat_norm,
                "reliability": self.reliability,
            },
            "bounds": self.bounds,
            "tasks": self.tasks,
            "arcs": self.arcs,
            "devices": self.devices,
            "solver": {"nodes": self.solver_nodes, "status": self.status},
        }


def prepare(topology: Topology, graph: WorkflowGraph,
            policy: CriticalityPolicy) -> tuple[CandidateGraph, BilpModel]:
    eg = build_eg(graph, topology)
    reg = build_reg(eg, policy)
    return reg, build_model(reg)


def chosen_candidates(reg: CandidateGraph, model: BilpModel,
                      assignment: list[int]) -> list[int]:
    """Candidate indexes (one per task, in task order) picked by an assignment."""
    picks: list[int] = []
    for t in reg.graph.task_ids:
        hit = [i for i in reg.candidates_for_task(t)
               if assignment[model.catalog.candidates[i].var] == 1]
        if len(hit) != 1:
            raise ValueError(f"assignment picks {len(hit)} candidates for task {t}")
        picks.append(hit[0])
    return picks


def assignment_from_picks(reg: CandidateGraph, model: BilpModel,
                          picks: list[int]) -> list[int]:
    """Full binary vector implied by one candidate index per task.

    Inverse of :func:`chosen_candidates`: sets the candidate, placement,
    and replica variables for each pick and activates the unique arc
    between each pair of chosen placements.
    """
    catalog = model.catalog
    x = [0] * catalog.n_vars
    primary: dict[str, str] = {}
    for i in picks:
        cvar = catalog.candidates[i]
        if cvar.task in primary:
            raise ValueError(f"two candidates picked for task {cvar.task}")
        primary[cvar.task] = cvar.primary
        x[cvar.var] = 1
        x[catalog.set_var[(cvar.task, cvar.primary)].var] = 1
        for r in catalog.replicas_of[cvar.var]:
            x[r.var] = 1
    missing = [t for t in catalog.task_order if t not in primary]
    if missing:
        raise ValueError(f"no candidate picked for tasks {missing}")
    for (src, dst), arcs in catalog.arcs_by_tasks.items():
        for a in arcs:
            if a.src_dev == primary[src] and a.dst_dev == primary[dst]:
                x[a.var] = 1
    return x


def _device_usage(reg: CandidateGraph, model: BilpModel,
                  assignment: list[int]) -> list[dict]:
    """Per-device budget usage, read off the budget rows."""
    usage: dict[str, dict] = {}
    for d in reg.topology.devices:
        usage[d.id] = {
            "device": d.id,
            "memory_bytes": 0.0, "memory_budget_bytes": d.memory_budget,
            "storage_bytes": 0.0, "storage_budget_bytes": d.storage_budget,
            "energy_j": 0.0,
            "energy_budget_j": None if d.energy_unbounded else d.energy_budget,
        }
    for row in model.constraints:
        kind, _, rest = row.tag.partition("[")
        if kind not in ("memory", "storage", "energy"):
            continue
        dev = rest.rstrip("]")
        key = {"memory": "memory_bytes", "storage": "storage_bytes",
               "energy": "energy_j"}[kind]
        usage[dev][key] = row.lhs(assignment)
    # energy spent on devices without a budget row still exists; recompute
    for d in reg.topology.devices:
        if not d.energy_unbounded:
            continue
        joules = 0.0
        for cvar, cand in zip(model.catalog.candidates, reg.candidates):
            if assignment[cvar.var] != 1:
                continue
            for _slot, dev, j in cand.per_replica_energy:
                if dev == d.id:
                    joules += j
        for avar in model.catalog.arcs:
            if assignment[avar.var] == 1:
                joules += arc_energy_share(reg, avar, d.id)
        usage[d.id]["energy_j"] = joules
    return [usage[d.id] for d in reg.topology.devices]


def extract_plan(
    reg: CandidateGraph,
    model: BilpModel,
    weights: ObjectiveWeights,
    bounds: NormalizationBounds,
    solution: Solution,
) -> AllocationPlan:
    plan = AllocationPlan(
        status=solution.status.value,
        criticality_level=reg.policy.level,
        w_rel=weights.w_rel,
        w_lat=weights.w_lat,
        bounds=bounds.to_json_dict(),
        solver_nodes=solution.nodes,
        wall_time_s=solution.wall_time,
    )
    if solution.assignment is None:
        return plan
    x = solution.assignment
    picks = chosen_candidates(reg, model, x)
    cands = [reg.candidates[i] for i in picks]
    f_rel, f_lat = oracle.raw_objectives(reg, cands)
    plan.f_rel = f_rel
    plan.f_lat = f_lat
    plan.reliability = math.exp(f_rel)
    plan.f_rel_norm = bounds.normalize_rel(f_rel)
    plan.f_lat_norm = bounds.normalize_lat(f_lat)
    plan.g = (weights.w_rel * plan.f_rel_norm - weights.w_lat * plan.f_lat_norm)

    for cand in cands:
        plan.tasks.append({
            "task": cand.task,
            "candidate": cand.key,
            "primary": cand.primary,
            "mode": cand.mode.name,
            "replicas": list(cand.replicas),
            "latency_s": cand.latency,
            "reliability": cand.reliability,
        })
    for avar, arc in zip(model.catalog.arcs, reg.arcs):
        if x[avar.var] == 1:
            plan.arcs.append({
                "src": arc.src_task, "dst": arc.dst_task,
                "src_device": arc.src_dev, "dst_device": arc.dst_dev,
                "latency_s": arc.latency,
            })
    plan.devices = _device_usage(reg, model, x)
    return plan


def solve_allocation(
    topology: Topology,
    graph: WorkflowGraph,
    policy: CriticalityPolicy,
    weights: ObjectiveWeights,
    options: SolverOptions | None = None,
    bounds: NormalizationBounds | None = None,
) -> tuple[AllocationPlan, PipelineContext]:
    """Full pipeline for one weight vector.

    Raises InfeasibleError if the model has no feasible assignment (the
    normalization solves detect that before the weighted solve runs).
    """
    reg, model = prepare(topology, graph, policy)
    if bounds is None:
        bounds = normalization_bounds(reg, model, options)
    weighted = weighted_objective(reg, model, weights, bounds)
    solution = solve_builtin(weighted, options)
    ctx = PipelineContext(topology, graph, policy, reg, model, bounds,
                          weighted, solution)
    return extract_plan(reg, model, weights, bounds, solution), ctx


@dataclass
class SweepResult:
    device_ids: list[str]
    rows: list[dict]

    def to_csv(self) -> str:
        cols = ["w_rel", "w_lat", "status", "g", "f_rel", "f_lat_s",
                "f_rel_norm", "f_lat_norm", "reliability"]
        cols += [f"pct_{d}" for d in self.device_ids]
        for p in self.device_ids:
            cols += [f"rep_{p}_{r}" for r in self.device_ids]
        lines = [",".join(cols)]
        for row in self.rows:
            lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {"devices": self.device_ids, "rows": self.rows}


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _share_stats(reg: CandidateGraph, cands) -> dict:
    """Per-device replica shares and primary-to-replica placement counts."""
    device_ids = [d.id for d in reg.topology.devices]
    slots = {d: 0 for d in device_ids}
    matrix = {p: {r: 0 for r in device_ids} for p in device_ids}
    total = 0
    for cand in cands:
        for _slot, dev, _j in cand.per_replica_energy:
            slots[dev] += 1
            total += 1
        for r in cand.replicas:
            matrix[cand.primary][r] += 1
    out = {f"pct_{d}": round(100.0 * slots[d] / total, 10) for d in device_ids}
    for p in device_ids:
        for r in device_ids:
            out[f"rep_{p}_{r}"] = matrix[p][r]
    return out


def sweep(
    topology: Topology,
    graph: WorkflowGraph,
    policy: CriticalityPolicy,
    steps: int = 20,
    options: SolverOptions | None = None,
    workers: int = 1,
) -> SweepResult:
    """Solve across the weight grid w_rel = 0, 1/steps, ..., 1.

    Normalization bounds are computed once and shared by every point, so
    the normalized objectives of all rows live on the same scale.
    """
    reg, model = prepare(topology, graph, policy)
    bounds = normalization_bounds(reg, model, options)
    grid = [i / steps for i in range(steps + 1)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                _sweep_point,
                [(topology, graph, policy, w, options, bounds) for w in grid]))
    else:
        rows = [_sweep_point((topology, graph, policy, w, options, bounds))
                for w in grid]
    return SweepResult([d.id for d in topology.devices], rows)


def _sweep_point(args) -> dict:
    topology, graph, policy, w, options, bounds = args
    weights = ObjectiveWeights(w_rel=w, w_lat=1.0 - w)
    plan, ctx = solve_allocation(topology, graph, policy, weights, options, bounds)
    row = {
        "w_rel": w, "w_lat": 1.0 - w, "status": plan.status,
        "g": plan.g, "f_rel": plan.f_rel, "f_lat_s": plan.f_lat,
        "f_rel_norm": plan.f_rel_norm, "f_lat_norm": plan.f_lat_norm,
        "reliability": plan.reliability,
    }
    if ctx.solution.assignment is not None:
        picks = chosen_candidates(ctx.reg, ctx.model, ctx.solution.assignment)
        row.update(_share_stats(ctx.reg, [ctx.reg.candidates[i] for i in picks]))
    return row


def restrict_to_device(graph: WorkflowGraph, device_id: str) -> WorkflowGraph:
    """Pin every freely placeable task to one device (pinned tasks keep
    their pin); the single-device baseline graph."""
    tasks = []
    for t in graph.tasks:
        if len(t.allowed_devices) == 1:
            tasks.append(t)
            continue
        if device_id not in t.allowed_devices:
            raise ValueError(f"task {t.id} cannot run on {device_id}")
        tasks.append(TaskSpec(
            id=t.id, memory=t.memory, storage=t.storage,
            output_size=t.output_size, allowed_devices=(device_id,),
            exec_time={device_id: t.exec_time[device_id]},
            power={device_id: t.power[device_id]},
            vulnerability={device_id: t.vulnerability[device_id]},
        ))
    return WorkflowGraph(tasks, list(graph.arcs))


def baselines(
    topology: Topology,
    graph: WorkflowGraph,
    policy: CriticalityPolicy,
    weights: ObjectiveWeights,
    options: SolverOptions | None = None,
) -> dict:
    """Unrestricted optimum versus every single-device restriction.

    All plans are normalized with the unrestricted bounds so their g
    values are comparable; a baseline whose restriction cannot be
    satisfied is reported infeasible.
    """
    reg, model = prepare(topology, graph, policy)
    bounds = normalization_bounds(reg, model, options)
    unrestricted, _ = solve_allocation(topology, graph, policy, weights,
                                       options, bounds)
    per_device: dict[str, AllocationPlan] = {}
    for d in topology.devices:
        try:
            restricted = restrict_to_device(graph, d.id)
            plan, _ = solve_allocation(topology, restricted, policy, weights,
                                       options, bounds)
        except (InfeasibleError, ValueError):
            plan = AllocationPlan(status="infeasible",
                                  criticality_level=policy.level,
                                  w_rel=weights.w_rel, w_lat=weights.w_lat,
                                  bounds=bounds.to_json_dict())
        per_device[d.id] = plan
    return {"unrestricted": unrestricted, "baselines": per_device}
