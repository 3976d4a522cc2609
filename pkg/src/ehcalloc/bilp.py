"""Binary integer linear program assembly over a candidate graph.

Variables, in a fixed global order so exports and solves are repeatable:

* one binary per redundancy candidate (pick exactly one per task),
* one binary per expanded arc (active when both endpoint placements are),
* one binary per task-on-device placement (any candidate there chosen),
* one binary per replica slot of every candidate (drives budget rows).

The weighted objective trades normalized log-reliability against
normalized end-to-end latency; normalization bounds come from four
auxiliary single-objective solves over the same constraint set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .params import rx_energy, tx_energy
from .transform import CandidateGraph


class InfeasibleError(Exception):
    """Raised when a model (or an auxiliary normalization solve) has no feasible point."""


class TimeLimitError(Exception):
    """Raised when a time budget expires before a required exact solve finishes."""


@dataclass(frozen=True)
class CandidateVar:
    var: int
    task: str
    primary: str
    replicas: tuple[str, ...]
    key: str


@dataclass(frozen=True)
class ArcVar:
    var: int
    src_task: str
    src_dev: str
    dst_task: str
    dst_dev: str


@dataclass(frozen=True)
class SetVar:
    var: int
    task: str
    device: str


@dataclass(frozen=True)
class ReplicaVar:
    var: int
    candidate_var: int
    slot: int
    device: str


class VariableCatalog:
    """Index of every binary variable and what it stands for."""

    def __init__(
        self,
        task_order: list[str],
        candidates: list[CandidateVar],
        arcs: list[ArcVar],
        sets: list[SetVar],
        replicas: list[ReplicaVar],
    ) -> None:
        self.task_order = list(task_order)
        self.candidates = list(candidates)
        self.arcs = list(arcs)
        self.sets = list(sets)
        self.replicas = list(replicas)
        self.n_vars = len(candidates) + len(arcs) + len(sets) + len(replicas)

        self.names: list[str] = [""] * self.n_vars
        for c in self.candidates:
            self.names[c.var] = f"C{c.var}"
        for a in self.arcs:
            self.names[a.var] = f"A{a.var}"
        for s in self.sets:
            self.names[s.var] = f"S{s.var}"
        for r in self.replicas:
            self.names[r.var] = f"P{r.var}"

        self.by_task: dict[str, list[CandidateVar]] = {t: [] for t in self.task_order}
        for c in self.candidates:
            self.by_task[c.task].append(c)
        self.set_var: dict[tuple[str, str], SetVar] = {(s.task, s.device): s for s in self.sets}
        self.replicas_of: dict[int, list[ReplicaVar]] = {c.var: [] for c in self.candidates}
        for r in self.replicas:
            self.replicas_of[r.candidate_var].append(r)
        self.arcs_by_tasks: dict[tuple[str, str], list[ArcVar]] = {}
        for a in self.arcs:
            self.arcs_by_tasks.setdefault((a.src_task, a.dst_task), []).append(a)

    @property
    def category_counts(self) -> dict[str, int]:
        return {
            "candidate": len(self.candidates),
            "arc": len(self.arcs),
            "placement": len(self.sets),
            "replica": len(self.replicas),
            "total": self.n_vars,
        }

    def to_json_dict(self) -> dict:
        return {
            "task_order": self.task_order,
            "candidates": [
                {"var": c.var, "task": c.task, "primary": c.primary,
                 "replicas": list(c.replicas), "key": c.key}
                for c in self.candidates
            ],
            "arcs": [
                {"var": a.var, "src_task": a.src_task, "src_dev": a.src_dev,
                 "dst_task": a.dst_task, "dst_dev": a.dst_dev}
                for a in self.arcs
            ],
            "placements": [
                {"var": s.var, "task": s.task, "device": s.device} for s in self.sets
            ],
            "replicas": [
                {"var": r.var, "candidate_var": r.candidate_var,
                 "slot": r.slot, "device": r.device}
                for r in self.replicas
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "VariableCatalog":
        return cls(
            task_order=list(data["task_order"]),
            candidates=[CandidateVar(d["var"], d["task"], d["primary"],
                                     tuple(d["replicas"]), d["key"])
                        for d in data["candidates"]],
            arcs=[ArcVar(d["var"], d["src_task"], d["src_dev"],
                         d["dst_task"], d["dst_dev"])
                  for d in data["arcs"]],
            sets=[SetVar(d["var"], d["task"], d["device"]) for d in data["placements"]],
            replicas=[ReplicaVar(d["var"], d["candidate_var"], d["slot"], d["device"])
                      for d in data["replicas"]],
        )


@dataclass
class LinearConstraint:
    coeffs: dict[int, float]
    sense: str                    # "<=" or "="
    rhs: float
    tag: str

    def lhs(self, x) -> float:
        return sum(c * x[v] for v, c in self.coeffs.items())

    def satisfied(self, x, tol: float = 1e-9) -> bool:
        lhs = self.lhs(x)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class BilpModel:
    catalog: VariableCatalog
    constraints: list[LinearConstraint]
    objective: dict[int, float]
    objective_offset: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return self.catalog.n_vars

    def objective_value(self, x) -> float:
        return sum(c * x[v] for v, c in self.objective.items()) + self.objective_offset

    def with_objective(self, objective: dict[int, float], offset: float = 0.0,
                       **metadata) -> "BilpModel":
        return BilpModel(self.catalog, self.constraints, dict(objective), offset,
                         {**self.metadata, **metadata})


def build_catalog(reg: CandidateGraph) -> VariableCatalog:
    """Lay out all variables in the canonical order."""
    n = 0
    candidates: list[CandidateVar] = []
    for cand in reg.candidates:
        candidates.append(CandidateVar(n, cand.task, cand.primary, cand.replicas, cand.key))
        n += 1
    arcs: list[ArcVar] = []
    for a in reg.arcs:
        arcs.append(ArcVar(n, a.src_task, a.src_dev, a.dst_task, a.dst_dev))
        n += 1
    sets: list[SetVar] = []
    for task_id, dev in reg.eg.nodes:
        sets.append(SetVar(n, task_id, dev))
        n += 1
    replicas: list[ReplicaVar] = []
    for cvar, cand in zip(candidates, reg.candidates):
        for slot, dev, _joules in cand.per_replica_energy:
            replicas.append(ReplicaVar(n, cvar.var, slot, dev))
            n += 1
    return VariableCatalog(reg.graph.task_ids, candidates, arcs, sets, replicas)


def assemble_constraints(reg: CandidateGraph, catalog: VariableCatalog) -> list[LinearConstraint]:
    """All structural and budget rows, in a fixed order."""
    rows: list[LinearConstraint] = []
    topo = reg.topology

    # exactly one candidate per task
    for task_id in catalog.task_order:
        coeffs = {c.var: 1.0 for c in catalog.by_task[task_id]}
        rows.append(LinearConstraint(coeffs, "=", 1.0, f"choose_one[{task_id}]"))

    # placement active iff one of its candidates picked
    cand_by_set: dict[tuple[str, str], list[CandidateVar]] = {}
    for c in catalog.candidates:
        cand_by_set.setdefault((c.task, c.primary), []).append(c)
    for s in catalog.sets:
        coeffs = {s.var: 1.0}
        for c in cand_by_set.get((s.task, s.device), []):
            coeffs[c.var] = -1.0
        rows.append(LinearConstraint(coeffs, "=", 0.0, f"placement_link[{s.task},{s.device}]"))

    # replica slots move with their candidate
    for c in catalog.candidates:
        reps = catalog.replicas_of[c.var]
        coeffs = {c.var: float(len(reps))}
        for r in reps:
            coeffs[r.var] = -1.0
        rows.append(LinearConstraint(coeffs, "=", 0.0, f"replica_link[{c.key}]"))

    # each task activates as many outgoing arcs as it has successors
    for task_id in catalog.task_order:
        nu = reg.graph.out_degree(task_id)
        if nu == 0:
            continue
        coeffs: dict[int, float] = {}
        for child in reg.graph.children[task_id]:
            for a in catalog.arcs_by_tasks[(task_id, child)]:
                coeffs[a.var] = 1.0
        rows.append(LinearConstraint(coeffs, "=", float(nu), f"out_degree[{task_id}]"))

    # arc active exactly when both endpoint placements are (AND linearization)
    for a in catalog.arcs:
        s = catalog.set_var[(a.src_task, a.src_dev)]
        d = catalog.set_var[(a.dst_task, a.dst_dev)]
        label = f"{a.src_task}@{a.src_dev}->{a.dst_task}@{a.dst_dev}"
        rows.append(LinearConstraint({a.var: 1.0, s.var: -1.0}, "<=", 0.0, f"arc_src[{label}]"))
        rows.append(LinearConstraint({a.var: 1.0, d.var: -1.0}, "<=", 0.0, f"arc_dst[{label}]"))
        rows.append(LinearConstraint({s.var: 1.0, d.var: 1.0, a.var: -1.0}, "<=", 1.0,
                                     f"arc_on[{label}]"))

    # per-device budgets
    slot_energy: dict[int, float] = {}
    for cvar, cand in zip(catalog.candidates, reg.candidates):
        for (slot, dev, joules), r in zip(cand.per_replica_energy, catalog.replicas_of[cvar.var]):
            assert r.slot == slot and r.device == dev
            slot_energy[r.var] = joules

    for device in topo.devices:
        mem: dict[int, float] = {}
        sto: dict[int, float] = {}
        for r in catalog.replicas:
            if r.device != device.id:
                continue
            task = reg.graph.task(catalog_task_of(catalog, r))
            mem[r.var] = mem.get(r.var, 0.0) + task.memory
            sto[r.var] = sto.get(r.var, 0.0) + task.storage
        rows.append(LinearConstraint(mem, "<=", device.memory_budget, f"memory[{device.id}]"))
        rows.append(LinearConstraint(sto, "<=", device.storage_budget, f"storage[{device.id}]"))

        if device.energy_unbounded:
            continue
        en: dict[int, float] = {}
        for r in catalog.replicas:
            if r.device == device.id:
                en[r.var] = en.get(r.var, 0.0) + slot_energy[r.var]
        for a in catalog.arcs:
            coeff = arc_energy_share(reg, a, device.id)
            if coeff:
                en[a.var] = en.get(a.var, 0.0) + coeff
        rows.append(LinearConstraint(en, "<=", device.energy_budget, f"energy[{device.id}]"))

    return rows


def catalog_task_of(catalog: VariableCatalog, replica: ReplicaVar) -> str:
    return catalog.candidates[replica.candidate_var].task


def arc_energy_share(reg: CandidateGraph, arc: ArcVar, device_id: str) -> float:
    """Joules the device pays if this arc is active: its own transfer leg,
    plus relay pass-through when it forwards the data."""
    if arc.src_dev == arc.dst_dev:
        return 0.0
    topo = reg.topology
    bits = reg.graph.task(arc.src_task).output_size
    share = 0.0
    if arc.src_dev == device_id:
        share += tx_energy(topo, arc.src_dev, arc.dst_dev, bits)
    if arc.dst_dev == device_id:
        share += rx_energy(topo, arc.src_dev, arc.dst_dev, bits)
    via = topo.relays.get((arc.src_dev, arc.dst_dev))
    if via == device_id:
        first = topo.channels[(arc.src_dev, via)]
        second = topo.channels[(via, arc.dst_dev)]
        share += bits * (first.rx_energy + second.tx_energy)
    return share


def build_model(reg: CandidateGraph) -> BilpModel:
    """Catalog plus constraints; attach an objective before solving."""
    catalog = build_catalog(reg)
    constraints = assemble_constraints(reg, catalog)
    return BilpModel(catalog, constraints, objective={}, metadata={"objective_kind": "none"})


def objective_reliability(reg: CandidateGraph, catalog: VariableCatalog) -> dict[int, float]:
    """Sum of log candidate reliabilities (log turns the product linear)."""
    return {
        cvar.var: math.log(cand.reliability)
        for cvar, cand in zip(catalog.candidates, reg.candidates)
    }


def objective_latency(reg: CandidateGraph, catalog: VariableCatalog) -> dict[int, float]:
    """Sum of candidate completion times plus active transfer times."""
    coeffs = {
        cvar.var: cand.latency
        for cvar, cand in zip(catalog.candidates, reg.candidates)
    }
    for avar, arc in zip(catalog.arcs, reg.arcs):
        if arc.latency:
            coeffs[avar.var] = arc.latency
    return coeffs


@dataclass(frozen=True)
class ObjectiveWeights:
    w_rel: float
    w_lat: float

    def __post_init__(self) -> None:
        if self.w_rel < 0 or self.w_lat < 0:
            raise ValueError("objective weights must be non-negative")
        if abs(self.w_rel + self.w_lat - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.w_rel + self.w_lat!r}")


@dataclass(frozen=True)
class NormalizationBounds:
    rel_min: float
    rel_max: float
    lat_min: float
    lat_max: float

    @property
    def rel_span(self) -> float:
        return self.rel_max - self.rel_min

    @property
    def lat_span(self) -> float:
        return self.lat_max - self.lat_min

    def _degenerate(self, span: float, lo: float, hi: float) -> bool:
        return span <= 1e-12 * max(1.0, abs(lo), abs(hi))

    @property
    def rel_degenerate(self) -> bool:
        return self._degenerate(self.rel_span, self.rel_min, self.rel_max)

    @property
    def lat_degenerate(self) -> bool:
        return self._degenerate(self.lat_span, self.lat_min, self.lat_max)

    def normalize_rel(self, f_rel: float) -> float:
        if self.rel_degenerate:
            return 0.0
        return (f_rel - self.rel_min) / self.rel_span

    def normalize_lat(self, f_lat: float) -> float:
        if self.lat_degenerate:
            return 0.0
        return (f_lat - self.lat_min) / self.lat_span

    def to_json_dict(self) -> dict:
        return {"rel_min": self.rel_min, "rel_max": self.rel_max,
                "lat_min": self.lat_min, "lat_max": self.lat_max}


def normalization_bounds(reg: CandidateGraph, model: BilpModel, options=None) -> NormalizationBounds:
    """Best and worst reachable value of each raw objective.

    Four exact solves of the fully constrained model, one per bound.
    Infeasibility in any of them means the model itself is infeasible.
    """
    from .solver import SolverStatus, solve_builtin

    rel = objective_reliability(reg, model.catalog)
    lat = objective_latency(reg, model.catalog)

    def extreme(coeffs: dict[int, float], maximize: bool, kind: str) -> float:
        sign = 1.0 if maximize else -1.0
        aux = model.with_objective({v: sign * c for v, c in coeffs.items()},
                                   objective_kind=kind)
        sol = solve_builtin(aux, options)
        if sol.status is SolverStatus.TIME_LIMIT:
            raise TimeLimitError(f"normalization solve {kind} hit the time limit")
        if sol.status is not SolverStatus.OPTIMAL:
            raise InfeasibleError(f"normalization solve {kind} ended {sol.status.name}")
        return sign * sol.objective

    return NormalizationBounds(
        rel_max=extreme(rel, True, "rel_max"),
        rel_min=extreme(rel, False, "rel_min"),
        lat_max=extreme(lat, True, "lat_max"),
        lat_min=extreme(lat, False, "lat_min"),
    )


def weighted_objective(
    reg: CandidateGraph,
    model: BilpModel,
    weights: ObjectiveWeights,
    bounds: NormalizationBounds,
) -> BilpModel:
    """Scalarized objective: w_rel * normalized log-reliability minus
    w_lat * normalized latency, to be maximized.

    A degenerate normalization span zeroes that term entirely.
    """
    coeffs: dict[int, float] = {}
    offset = 0.0
    if not bounds.rel_degenerate:
        scale = weights.w_rel / bounds.rel_span
        for v, c in objective_reliability(reg, model.catalog).items():
            coeffs[v] = coeffs.get(v, 0.0) + scale * c
        offset -= scale * bounds.rel_min
    if not bounds.lat_degenerate:
        scale = weights.w_lat / bounds.lat_span
        for v, c in objective_latency(reg, model.catalog).items():
            coeffs[v] = coeffs.get(v, 0.0) - scale * c
        offset += scale * bounds.lat_min
    return model.with_objective(
        coeffs, offset,
        objective_kind="weighted",
        weights=(weights.w_rel, weights.w_lat),
        bounds=bounds.to_json_dict(),
    )


def model_stats(model: BilpModel) -> dict:
    """Variable and constraint counts by category."""
    by_kind: dict[str, int] = {}
    for row in model.constraints:
        kind = row.tag.split("[", 1)[0]
        by_kind[kind] = by_kind.get(kind, 0) + 1
    return {
        "variables": model.catalog.category_counts,
        "constraints": {"total": len(model.constraints), **dict(sorted(by_kind.items()))},
    }
