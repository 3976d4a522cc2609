"""Exact solver for the allocation BILP, plus MPS round-trip plumbing.

The built-in solver is a deterministic branch-and-bound over the one
real degree of freedom the model has: which redundancy candidate each
task picks.  Placement, replica and arc variables are all implied by
that choice, so the search fixes one task per level, bounds the rest by
a relaxation that keeps the pick-one rows and drops budget and arc
coupling (tightened by propagating fixed picks into arc costs), and
prunes monotone budget rows incrementally.  Candidates are visited in
canonical order and a subtree is pruned when its bound does not strictly
beat the incumbent, so the search returns the lexicographically smallest
candidate-index vector among the optima and never enumerates tied ones.

A greedy pass (best locally feasible candidate per task) seeds the
incumbent.  Until the tree search itself confirms an equally good leaf,
subtrees tying the greedy value are still explored, which keeps the
lex-smallest tie-break exact while pruning strictly more than a cold
start would.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bilp import BilpModel, LinearConstraint, VariableCatalog


class SolverStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"


class SolverMode(str, enum.Enum):
    BUILTIN = "builtin"
    EXPORT_ONLY = "export_only"
    EXTERNAL = "external"


@dataclass
class SolverOptions:
    mode: SolverMode = SolverMode.BUILTIN
    time_limit: float | None = None       # seconds of wall time
    absolute_gap: float = 0.0             # prune nodes within this of the incumbent


@dataclass
class Solution:
    status: SolverStatus
    objective: float | None
    assignment: list[int] | None          # 0/1 per variable index
    bound: float | None                   # valid upper bound on the optimum
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def choices(self) -> list[int] | None:
        """Candidate-index vector recorded by the search, if any."""
        return getattr(self, "_choices", None)


class _TimeUp(Exception):
    pass


def _row_tol(rhs: float) -> float:
    return 1e-9 * max(1.0, abs(rhs))


class _TaskChoiceSearch:
    """Branch-and-bound state; one instance per solve."""

    def __init__(self, model: BilpModel, options: SolverOptions) -> None:
        self.model = model
        self.options = options
        cat = model.catalog
        obj = model.objective

        self.tasks = cat.task_order
        self.n_tasks = len(self.tasks)

        # monotone <= rows (budgets) can be checked as choices accumulate
        self.inc_rows: list[LinearConstraint] = [
            row for row in model.constraints
            if row.sense == "<=" and all(c >= 0.0 for c in row.coeffs.values())
        ]
        self.row_rhs = [row.rhs for row in self.inc_rows]
        self.row_cap = [row.rhs + _row_tol(row.rhs) for row in self.inc_rows]
        var_rows: dict[int, list[tuple[int, float]]] = {}
        for pos, row in enumerate(self.inc_rows):
            for v, c in row.coeffs.items():
                if c:
                    var_rows.setdefault(v, []).append((pos, c))

        # per-task candidate records: static objective + budget contributions
        # of the candidate, its placement and its replica slots
        self.cand_records: list[list[dict]] = []
        self.task_max: list[float] = []
        for t in self.tasks:
            records = []
            for pos, c in enumerate(cat.by_task[t]):
                implied = [c.var, cat.set_var[(c.task, c.primary)].var]
                implied += [r.var for r in cat.replicas_of[c.var]]
                static_obj = sum(obj.get(v, 0.0) for v in implied)
                rows: dict[int, float] = {}
                for v in implied:
                    for rpos, coeff in var_rows.get(v, ()):
                        rows[rpos] = rows.get(rpos, 0.0) + coeff
                records.append({
                    "pos": pos,
                    "var": c.var,
                    "primary": c.primary,
                    "obj": static_obj,
                    "rows": list(rows.items()),
                    "implied": implied,
                })
            if not records:
                raise ValueError(f"task {t} has no candidates")
            self.cand_records.append(records)
            self.task_max.append(max(r["obj"] for r in records))

        # arc variables grouped by task pair, with per-side maxima for bounds
        task_idx = {t: i for i, t in enumerate(self.tasks)}
        self.pairs: list[tuple[int, int]] = []
        self.arc_entries: list[dict[tuple[str, str], dict]] = []
        pair_pos: dict[tuple[str, str], int] = {}
        for a in cat.arcs:
            key = (a.src_task, a.dst_task)
            if key not in pair_pos:
                pair_pos[key] = len(self.pairs)
                self.pairs.append((task_idx[a.src_task], task_idx[a.dst_task]))
                self.arc_entries.append({})
            self.arc_entries[pair_pos[key]][(a.src_dev, a.dst_dev)] = {
                "var": a.var,
                "obj": obj.get(a.var, 0.0),
                "rows": var_rows.get(a.var, []),
            }
        self.arc_max_any: list[float] = []
        self.arc_max_src: list[dict[str, float]] = []
        self.arc_max_dst: list[dict[str, float]] = []
        for entries in self.arc_entries:
            by_src: dict[str, float] = {}
            by_dst: dict[str, float] = {}
            for (k, l), e in entries.items():
                by_src[k] = max(by_src.get(k, -math.inf), e["obj"])
                by_dst[l] = max(by_dst.get(l, -math.inf), e["obj"])
            self.arc_max_any.append(max((e["obj"] for e in entries.values()),
                                        default=-math.inf))
            self.arc_max_src.append(by_src)
            self.arc_max_dst.append(by_dst)
        self.touching: list[list[int]] = [[] for _ in self.tasks]
        for p, (i, j) in enumerate(self.pairs):
            self.touching[i].append(p)
            self.touching[j].append(p)

        # mutable search state
        self.fixed_dev: list[str | None] = [None] * self.n_tasks
        self.chosen_pos: list[int] = [-1] * self.n_tasks
        self.chosen_rec: list[dict | None] = [None] * self.n_tasks
        self.usage = [0.0] * len(self.inc_rows)
        self.partial = 0.0
        self.future = sum(self.task_max) + sum(self.arc_max_any)
        self.arc_bound = list(self.arc_max_any)
        self.best_g = -math.inf
        self.best_vec: tuple[int, ...] | None = None
        self.best_assignment: list[int] | None = None
        # an incumbent is canonical once it was reached in DFS order; only
        # then may subtrees that merely tie it be pruned
        self.best_canonical = False
        self.max_pruned = -math.inf
        self.nodes = 0
        self.deadline = (time.perf_counter() + options.time_limit
                         if options.time_limit is not None else None)

    # -- incremental choice application -------------------------------------

    def _apply(self, depth: int, rec: dict) -> tuple | None:
        """Fix task ``depth`` to candidate ``rec``; returns an undo token,
        or None (after self-undoing) if the partial choice is infeasible."""
        self.nodes += 1
        if self.deadline is not None and self.nodes % 256 == 0:
            if time.perf_counter() > self.deadline:
                raise _TimeUp
        old_partial = self.partial
        old_future = self.future
        touched_rows: list[tuple[int, float]] = []
        touched_arcs: list[tuple[int, float]] = []

        feasible = True
        for rpos, coeff in rec["rows"]:
            touched_rows.append((rpos, self.usage[rpos]))
            self.usage[rpos] += coeff
            if self.usage[rpos] > self.row_cap[rpos]:
                feasible = False
        self.partial += rec["obj"]
        self.future -= self.task_max[depth]
        self.fixed_dev[depth] = rec["primary"]
        self.chosen_pos[depth] = rec["pos"]
        self.chosen_rec[depth] = rec

        if feasible:
            for p in self.touching[depth]:
                i, j = self.pairs[p]
                other = j if i == depth else i
                if self.fixed_dev[other] is None:
                    dev = rec["primary"]
                    side = self.arc_max_src[p] if i == depth else self.arc_max_dst[p]
                    newb = side.get(dev, -math.inf)
                    touched_arcs.append((p, self.arc_bound[p]))
                    self.future += newb - self.arc_bound[p]
                    self.arc_bound[p] = newb
                    if newb == -math.inf:
                        feasible = False
                        break
                else:
                    key = ((rec["primary"], self.fixed_dev[other]) if i == depth
                           else (self.fixed_dev[other], rec["primary"]))
                    entry = self.arc_entries[p].get(key)
                    touched_arcs.append((p, self.arc_bound[p]))
                    self.future -= self.arc_bound[p]
                    self.arc_bound[p] = 0.0
                    if entry is None:
                        feasible = False
                        break
                    self.partial += entry["obj"]
                    for rpos, coeff in entry["rows"]:
                        touched_rows.append((rpos, self.usage[rpos]))
                        self.usage[rpos] += coeff
                        if self.usage[rpos] > self.row_cap[rpos]:
                            feasible = False
                    if not feasible:
                        break

        token = (depth, old_partial, old_future, touched_rows, touched_arcs)
        if not feasible:
            self._undo(token)
            return None
        return token

    def _undo(self, token: tuple) -> None:
        depth, old_partial, old_future, touched_rows, touched_arcs = token
        # restore saved values exactly; no float drift across siblings
        self.partial = old_partial
        self.future = old_future
        for rpos, old in reversed(touched_rows):
            self.usage[rpos] = old
        for p, old in reversed(touched_arcs):
            self.arc_bound[p] = old
        self.fixed_dev[depth] = None
        self.chosen_pos[depth] = -1
        self.chosen_rec[depth] = None

    # -- search --------------------------------------------------------------

    def _greedy(self) -> None:
        """Seed the incumbent with a one-pass greedy assignment.

        At each task, the applied candidate is the one whose committed
        objective (own terms plus arcs to already-fixed neighbours) is
        largest and feasible so far.  Purely a warm start: the result is
        recorded as non-canonical so tie-breaking is unaffected.
        """
        tokens: list[tuple] = []
        for depth in range(self.n_tasks):
            best: tuple[float, dict] | None = None
            for rec in self.cand_records[depth]:
                token = self._apply(depth, rec)
                if token is None:
                    continue
                score = self.partial
                self._undo(token)
                if best is None or score > best[0]:
                    best = (score, rec)
            if best is None:
                break
            tokens.append(self._apply(depth, best[1]))
        else:
            self.best_g = self.partial + self.model.objective_offset
            self.best_vec = tuple(self.chosen_pos)
            self.best_assignment = self._materialize()
            self.best_canonical = False
        for token in reversed(tokens):
            self._undo(token)

    def _accept_leaf(self) -> None:
        # leaves are reached in lexicographic candidate order, so requiring a
        # strict improvement keeps the lex-smallest vector among equal optima;
        # a non-canonical (greedy) incumbent may be replaced by a tying leaf
        g = self.partial + self.model.objective_offset
        if g > self.best_g or (g == self.best_g and not self.best_canonical):
            self.best_g = g
            self.best_vec = tuple(self.chosen_pos)
            self.best_assignment = self._materialize()
            self.best_canonical = True

    def _materialize(self) -> list[int]:
        x = [0] * self.model.catalog.n_vars
        for depth in range(self.n_tasks):
            for v in self.chosen_rec[depth]["implied"]:
                x[v] = 1
        for p, (i, j) in enumerate(self.pairs):
            entry = self.arc_entries[p][(self.fixed_dev[i], self.fixed_dev[j])]
            x[entry["var"]] = 1
        return x

    def _dfs(self, depth: int, parent_bound: float = math.inf) -> None:
        if depth == self.n_tasks:
            self._accept_leaf()
            return
        gap = self.options.absolute_gap
        for rec in self.cand_records[depth]:
            token = self._apply(depth, rec)
            if token is None:
                continue
            bound = self.partial + self.future + self.model.objective_offset
            assert bound <= parent_bound + 1e-9 * max(1.0, abs(parent_bound)), \
                "relaxation bound increased down the tree"
            limit = self.best_g + gap
            if bound < limit or (bound == limit and self.best_canonical):
                self.max_pruned = max(self.max_pruned, bound)
            else:
                self._dfs(depth + 1, bound)
            self._undo(token)

    def run(self) -> Solution:
        t0 = time.perf_counter()
        root_bound = self.partial + self.future + self.model.objective_offset
        status = SolverStatus.OPTIMAL
        try:
            self._greedy()
            self._dfs(0)
        except _TimeUp:
            status = SolverStatus.TIME_LIMIT

        wall = time.perf_counter() - t0
        if self.best_assignment is None:
            final = (SolverStatus.INFEASIBLE if status is SolverStatus.OPTIMAL
                     else SolverStatus.TIME_LIMIT)
            sol = Solution(final, None, None,
                           bound=root_bound if final is SolverStatus.TIME_LIMIT else None,
                           nodes=self.nodes, wall_time=wall)
            return sol
        if status is SolverStatus.TIME_LIMIT:
            bound = root_bound
        else:
            bound = max(self.best_g, self.max_pruned)
        sol = Solution(status, self.best_g, self.best_assignment,
                       bound=bound, nodes=self.nodes, wall_time=wall)
        sol._choices = list(self.best_vec)
        return sol


def solve_builtin(model: BilpModel, options: SolverOptions | None = None) -> Solution:
    """Solve to proven optimality (absolute gap 0 by default).

    The final incumbent is re-checked against every constraint row; a
    violation means the model does not have the task-choice structure
    this solver relies on, and is reported as an error rather than a
    wrong answer.
    """
    opts = options or SolverOptions()
    search = _TaskChoiceSearch(model, opts)
    sol = search.run()
    if sol.assignment is not None:
        bad = verify(model, sol.assignment)
        if bad:
            raise ValueError("solution violates model rows: " + "; ".join(bad[:5]))
    return sol


def verify(model: BilpModel, assignment: list[int], tol: float = 1e-9) -> list[str]:
    """Check an assignment against every row; returns violation messages."""
    issues: list[str] = []
    for i, v in enumerate(assignment):
        if v not in (0, 1):
            issues.append(f"variable {model.catalog.names[i]} is {v!r}, not binary")
    for row in model.constraints:
        lhs = row.lhs(assignment)
        scaled = tol * max(1.0, abs(row.rhs))
        if row.sense == "<=":
            if lhs > row.rhs + scaled:
                issues.append(f"{row.tag}: {lhs!r} exceeds {row.rhs!r}")
        elif abs(lhs - row.rhs) > scaled:
            issues.append(f"{row.tag}: {lhs!r} != {row.rhs!r}")
    return issues


# -- MPS round trip ----------------------------------------------------------


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".columns.json")


def export_mps(model: BilpModel, path: str | Path, name: str = "EHCALLOC") -> Path:
    """Write the model as MPS (maximization, all-binary via BV bounds).

    Column and row names are short and opaque; the sidecar
    ``<stem>.columns.json`` maps them back to task/device/slot semantics
    and carries the objective constant and row tags.  Values are printed
    with 17 significant digits so a round trip preserves the optimum.
    """
    path = Path(path)
    cat = model.catalog
    lines: list[str] = [f"NAME          {name}", "OBJSENSE", "    MAXIMIZE", "ROWS",
                        " N  OBJ"]
    row_names: list[str] = []
    for i, row in enumerate(model.constraints):
        rn = f"R{i}"
        row_names.append(rn)
        sense = "L" if row.sense == "<=" else ("E" if row.sense == "=" else "G")
        lines.append(f" {sense}  {rn}")

    by_var: list[list[tuple[str, float]]] = [[] for _ in range(cat.n_vars)]
    for v, c in model.objective.items():
        if c:
            by_var[v].append(("OBJ", c))
    for rn, row in zip(row_names, model.constraints):
        for v, c in row.coeffs.items():
            if c:
                by_var[v].append((rn, c))

    lines.append("COLUMNS")
    for v in range(cat.n_vars):
        col = cat.names[v]
        for rn, c in by_var[v]:
            lines.append(f"    {col:<10}{rn:<10}{c:.17g}")
    lines.append("RHS")
    if model.objective_offset:
        lines.append(f"    RHS       OBJ       {-model.objective_offset:.17g}")
    for rn, row in zip(row_names, model.constraints):
        if row.rhs:
            lines.append(f"    RHS       {rn:<10}{row.rhs:.17g}")
    lines.append("BOUNDS")
    for v in range(cat.n_vars):
        lines.append(f" BV BND       {cat.names[v]}")
    lines.append("ENDATA")
    path.write_text("\n".join(lines) + "\n")

    sidecar = {
        "catalog": cat.to_json_dict(),
        "rows": {rn: row.tag for rn, row in zip(row_names, model.constraints)},
        "objective_offset": model.objective_offset,
        "metadata": {k: v for k, v in model.metadata.items()
                     if isinstance(v, (str, int, float, list, tuple, dict, type(None)))},
    }
    _sidecar_path(path).write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def read_mps(path: str | Path, sidecar_path: str | Path | None = None) -> BilpModel:
    """Rebuild a model from an MPS file and its sidecar.

    The sidecar is required: MPS alone cannot say which columns are
    candidates of which task, and the solver needs that structure.
    """
    path = Path(path)
    sidecar_path = Path(sidecar_path) if sidecar_path else _sidecar_path(path)
    if not sidecar_path.exists():
        raise FileNotFoundError(f"missing sidecar {sidecar_path}")
    sidecar = json.loads(sidecar_path.read_text())
    catalog = VariableCatalog.from_json_dict(sidecar["catalog"])
    var_of = {name: i for i, name in enumerate(catalog.names)}

    section = None
    maximize = True
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    row_coeffs: dict[str, dict[int, float]] = {}
    obj: dict[int, float] = {}
    rhs: dict[str, float] = {}
    obj_rhs = 0.0

    for raw in path.read_text().splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if raw[0] not in " \t":
            head = raw.split()[0]
            if head in {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES",
                        "BOUNDS", "ENDATA"}:
                section = head
                continue
        tokens = raw.split()
        if section == "OBJSENSE":
            maximize = tokens[0].upper() == "MAXIMIZE"
        elif section == "ROWS":
            sense, rn = tokens
            if sense == "N":
                continue
            row_sense[rn] = {"L": "<=", "E": "=", "G": ">="}[sense]
            row_order.append(rn)
            row_coeffs[rn] = {}
        elif section == "COLUMNS":
            col = tokens[0]
            if col not in var_of:
                raise ValueError(f"unknown column {col!r} in {path}")
            v = var_of[col]
            for rn, val in zip(tokens[1::2], tokens[2::2]):
                if rn == "OBJ":
                    obj[v] = float(val)
                else:
                    row_coeffs[rn][v] = float(val)
        elif section == "RHS":
            for rn, val in zip(tokens[1::2], tokens[2::2]):
                if rn == "OBJ":
                    obj_rhs = float(val)
                else:
                    rhs[rn] = float(val)

    tags = sidecar.get("rows", {})
    constraints = [
        LinearConstraint(row_coeffs[rn], row_sense[rn], rhs.get(rn, 0.0),
                         tags.get(rn, rn))
        for rn in row_order
    ]
    offset = -obj_rhs
    if not maximize:
        obj = {v: -c for v, c in obj.items()}
        offset = -offset
    metadata = dict(sidecar.get("metadata", {}))
    metadata["source"] = str(path)
    return BilpModel(catalog, constraints, obj, offset, metadata)


def read_solution(path: str | Path, model: BilpModel,
                  tol: float = 1e-6) -> list[int]:
    """Read an external solver's ``name value`` lines into an assignment.

    Unlisted variables default to 0.  Values must sit within ``tol`` of
    an integer 0 or 1; anything else is an error.
    """
    path = Path(path)
    var_of = {name: i for i, name in enumerate(model.catalog.names)}
    x = [0] * model.catalog.n_vars
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "*", "//")):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'name value', got {line!r}")
        name, sval = parts
        if name not in var_of:
            raise ValueError(f"{path}:{lineno}: unknown variable {name!r}")
        val = float(sval)
        nearest = round(val)
        if nearest not in (0, 1) or abs(val - nearest) > tol:
            raise ValueError(f"{path}:{lineno}: value {val!r} is not binary within {tol}")
        x[var_of[name]] = int(nearest)
    return x
