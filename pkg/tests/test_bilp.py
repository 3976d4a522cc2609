"""Model assembly: variable catalog, constraint rows, objectives."""

import math

import pytest

import ehcalloc as e
from ehcalloc.bilp import (
    NormalizationBounds,
    ObjectiveWeights,
    arc_energy_share,
    build_model,
    model_stats,
    normalization_bounds,
    objective_latency,
    objective_reliability,
    weighted_objective,
)
from ehcalloc.model import TaskSpec, WorkflowGraph
from ehcalloc.oracle import oracle_bounds


def small_graph():
    t1 = TaskSpec(id="t1", memory=1e6, storage=1e7, output_size=8e6,
                  allowed_devices=("e", "h"),
                  exec_time={"e": 1.0, "h": 0.5}, power={"e": 2.0, "h": 8.1},
                  vulnerability={"e": 0.01, "h": 0.01})
    t2 = TaskSpec(id="t2", memory=1e6, storage=1e7, output_size=1e6,
                  allowed_devices=("h", "c"),
                  exec_time={"h": 0.5, "c": 0.2}, power={"h": 8.1, "c": 75.1},
                  vulnerability={"h": 0.04, "c": 0.07})
    return WorkflowGraph([t1, t2], [("t1", "t2")])


@pytest.fixture(scope="module")
def reg_model():
    topo = e.reference_topology()
    reg = e.build_reg(e.build_eg(small_graph(), topo), e.default_policy(3))
    return reg, build_model(reg)


class TestCatalog:
    def test_variable_layout_candidates_arcs_sets_replicas(self, reg_model):
        reg, model = reg_model
        cat = model.catalog
        n_c, n_a, n_s = len(cat.candidates), len(cat.arcs), len(cat.sets)
        assert [c.var for c in cat.candidates] == list(range(n_c))
        assert [a.var for a in cat.arcs] == list(range(n_c, n_c + n_a))
        assert [s.var for s in cat.sets] == list(range(n_c + n_a, n_c + n_a + n_s))
        assert cat.n_vars == n_c + n_a + n_s + len(cat.replicas)

    def test_names_encode_category(self, reg_model):
        _, model = reg_model
        cat = model.catalog
        assert cat.names[cat.candidates[0].var].startswith("C")
        assert cat.names[cat.arcs[0].var].startswith("A")
        assert cat.names[cat.sets[0].var].startswith("S")
        assert cat.names[cat.replicas[0].var].startswith("P")
        assert len(set(cat.names)) == cat.n_vars
        assert all(len(n) <= 8 for n in cat.names)

    def test_replica_slots_mirror_candidates(self, reg_model):
        reg, model = reg_model
        cat = model.catalog
        for cvar, cand in zip(cat.candidates, reg.candidates):
            slots = cat.replicas_of[cvar.var]
            assert [r.slot for r in slots] == [s for s, _, _ in cand.per_replica_energy]
            assert [r.device for r in slots] == [d for _, d, _ in cand.per_replica_energy]

    def test_round_trips_through_json(self, reg_model):
        _, model = reg_model
        cat = model.catalog
        clone = type(cat).from_json_dict(cat.to_json_dict())
        assert clone.names == cat.names
        assert clone.task_order == cat.task_order
        assert [(c.var, c.task, c.primary, c.replicas) for c in clone.candidates] \
            == [(c.var, c.task, c.primary, c.replicas) for c in cat.candidates]


def rows_by_kind(model, kind):
    return [r for r in model.constraints if r.tag.split("[", 1)[0] == kind]


class TestConstraints:
    def test_choose_one_per_task(self, reg_model):
        reg, model = reg_model
        rows = rows_by_kind(model, "choose_one")
        assert len(rows) == 2
        for row in rows:
            task = row.tag[row.tag.index("[") + 1:-1]
            assert set(row.coeffs) == {model.catalog.candidates[i].var
                                       for i in reg.candidates_for_task(task)}
            assert all(c == 1.0 for c in row.coeffs.values())
            assert row.sense == "=" and row.rhs == 1.0

    def test_placement_links_sum_of_candidates(self, reg_model):
        reg, model = reg_model
        for row in rows_by_kind(model, "placement_link"):
            # x_set - sum(candidates there) = 0
            assert row.sense == "=" and row.rhs == 0.0
            assert sorted(row.coeffs.values()).count(1.0) == 1

    def test_replica_links_scale_with_slot_count(self, reg_model):
        reg, model = reg_model
        cat = model.catalog
        rows = rows_by_kind(model, "replica_link")
        assert len(rows) == len(cat.candidates)
        for row, cvar in zip(rows, cat.candidates):
            n_slots = len(cat.replicas_of[cvar.var])
            assert row.coeffs[cvar.var] == float(n_slots)
            assert sum(1 for c in row.coeffs.values() if c == -1.0) == n_slots

    def test_out_degree_rows_only_for_tasks_with_children(self, reg_model):
        reg, model = reg_model
        rows = rows_by_kind(model, "out_degree")
        assert [r.tag for r in rows] == ["out_degree[t1]"]
        assert rows[0].rhs == 1.0

    def test_and_linearization_three_rows_per_arc(self, reg_model):
        _, model = reg_model
        n_arcs = len(model.catalog.arcs)
        assert len(rows_by_kind(model, "arc_src")) == n_arcs
        assert len(rows_by_kind(model, "arc_dst")) == n_arcs
        assert len(rows_by_kind(model, "arc_on")) == n_arcs

    def test_budget_rows_per_device(self, reg_model):
        reg, model = reg_model
        assert len(rows_by_kind(model, "memory")) == 3
        assert len(rows_by_kind(model, "storage")) == 3
        # the cloud's energy budget is unbounded: no row for it
        tags = [r.tag for r in rows_by_kind(model, "energy")]
        assert tags == ["energy[e]", "energy[h]"]

    def test_memory_row_charges_replica_slots(self, reg_model):
        reg, model = reg_model
        row = next(r for r in model.constraints if r.tag == "memory[h]")
        h_slots = [r for r in model.catalog.replicas if r.device == "h"]
        assert set(row.coeffs) == {r.var for r in h_slots}
        assert all(c == 1e6 for c in row.coeffs.values())
        assert row.rhs == reg.topology.device("h").memory_budget


class TestArcEnergyShare:
    def test_direct_arc_shares(self, reg_model):
        reg, model = reg_model
        arc = next(a for a in model.catalog.arcs
                   if (a.src_dev, a.dst_dev) == ("h", "c"))
        # t1 ships 8 Mbit; h->c costs 2.50 / 1.25 uJ per bit
        assert arc_energy_share(reg, arc, "h") == pytest.approx(8e6 * 2.5e-6)
        assert arc_energy_share(reg, arc, "c") == pytest.approx(8e6 * 1.25e-6)
        assert arc_energy_share(reg, arc, "e") == 0.0

    def test_relayed_arc_charges_the_relay(self, reg_model):
        reg, model = reg_model
        arc = next(a for a in model.catalog.arcs
                   if (a.src_dev, a.dst_dev) == ("e", "c"))
        # h forwards: receives at 0.70, retransmits at 2.50 uJ/bit
        assert arc_energy_share(reg, arc, "e") == pytest.approx(8e6 * 1.0e-6)
        assert arc_energy_share(reg, arc, "h") == pytest.approx(
            8e6 * (0.70e-6 + 2.5e-6))
        assert arc_energy_share(reg, arc, "c") == pytest.approx(8e6 * 1.25e-6)

    def test_same_device_arc_is_free(self, reg_model):
        reg, model = reg_model
        arc = next(a for a in model.catalog.arcs
                   if (a.src_dev, a.dst_dev) == ("h", "h"))
        for d in "ehc":
            assert arc_energy_share(reg, arc, d) == 0.0


class TestObjectives:
    def test_reliability_coefficients_are_log_reliabilities(self, reg_model):
        reg, model = reg_model
        coeffs = objective_reliability(reg, model.catalog)
        for cvar, cand in zip(model.catalog.candidates, reg.candidates):
            assert coeffs[cvar.var] == pytest.approx(math.log(cand.reliability))

    def test_latency_covers_candidates_and_arcs(self, reg_model):
        reg, model = reg_model
        coeffs = objective_latency(reg, model.catalog)
        for cvar, cand in zip(model.catalog.candidates, reg.candidates):
            assert coeffs[cvar.var] == cand.latency
        for avar, arc in zip(model.catalog.arcs, reg.arcs):
            assert coeffs.get(avar.var, 0.0) == arc.latency

    def test_weights_must_be_convex(self):
        ObjectiveWeights(0.3, 0.7)
        with pytest.raises(ValueError):
            ObjectiveWeights(0.3, 0.6)
        with pytest.raises(ValueError):
            ObjectiveWeights(-0.1, 1.1)

    def test_normalization_matches_enumerated_extremes(self, reg_model):
        reg, model = reg_model
        got = normalization_bounds(reg, model, None)
        want = oracle_bounds(reg)
        assert got.rel_min == pytest.approx(want.rel_min, rel=1e-12)
        assert got.rel_max == pytest.approx(want.rel_max, rel=1e-12)
        assert got.lat_min == pytest.approx(want.lat_min, rel=1e-12)
        assert got.lat_max == pytest.approx(want.lat_max, rel=1e-12)

    def test_weighted_objective_value_at_extremes(self, reg_model):
        reg, model = reg_model
        bounds = normalization_bounds(reg, model, None)
        for w_rel, expect_kind in ((1.0, "rel"), (0.0, "lat")):
            weighted = weighted_objective(
                reg, model, ObjectiveWeights(w_rel, 1.0 - w_rel), bounds)
            sol = e.solve_builtin(weighted)
            # at a pure weight the optimum normalizes to exactly 1 (best
            # reliability) or 0 (least latency)
            assert sol.objective == pytest.approx(1.0 if w_rel else 0.0, abs=1e-9)

    def test_degenerate_span_zeroes_the_term(self):
        b = NormalizationBounds(rel_min=-0.5, rel_max=-0.5, lat_min=3.0, lat_max=9.0)
        assert b.rel_degenerate and not b.lat_degenerate
        assert b.normalize_rel(-0.5) == 0.0
        assert b.normalize_lat(6.0) == pytest.approx(0.5)

    def test_stats_totals(self, reg_model):
        _, model = reg_model
        stats = model_stats(model)
        assert stats["variables"]["total"] == model.catalog.n_vars
        assert stats["constraints"]["total"] == len(model.constraints)
