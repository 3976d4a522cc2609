"""Synthetic workload generation: structures, parameter scaling, quotas."""

import math

import pytest

import ehcalloc as e
import ehcalloc.synthgen as sg


def devices(topology):
    return tuple(topology.devices)


class TestGenSpec:
    def test_rejects_degenerate_settings(self):
        with pytest.raises(ValueError):
            sg.GenSpec(task_count=1)
        with pytest.raises(ValueError):
            sg.GenSpec(task_count=5, structure="ring")
        with pytest.raises(ValueError):
            sg.GenSpec(task_count=5, max_out_degree=0)


class TestStructure:
    @pytest.mark.parametrize("structure", ["serial", "parallel", "mixed"])
    @pytest.mark.parametrize("n", [2, 3, 7, 16, 40])
    def test_topological_dag_connected_within_degree_bounds(self, structure, n):
        spec = sg.GenSpec(task_count=n, structure=structure, seed=n)
        arcs = sg.generate_structure(spec)
        assert len(set(arcs)) == len(arcs)
        in_deg = [0] * n
        out_deg = [0] * n
        for a, b in arcs:
            assert 0 <= a < b < n          # index order is topological
            in_deg[b] += 1
            out_deg[a] += 1
        assert all(in_deg[v] >= 1 for v in range(1, n))
        assert out_deg[0] >= 1
        assert max(in_deg) <= spec.max_in_degree
        assert max(out_deg) <= spec.max_out_degree

    def test_serial_is_a_chain_with_skip_arcs(self):
        arcs = sg.generate_structure(sg.GenSpec(task_count=8, structure="serial"))
        assert len(arcs) == 2 * 8 - 3
        assert all((i, i + 1) in arcs for i in range(7))
        assert all((i, i + 2) in arcs for i in range(6))

    def test_serial_without_degree_budget_degrades_to_plain_chain(self):
        arcs = sg.generate_structure(
            sg.GenSpec(task_count=8, structure="serial", max_in_degree=1))
        assert arcs == [(i, i + 1) for i in range(7)]

    def test_structure_only_depends_on_the_seed(self):
        spec = lambda s: sg.GenSpec(task_count=12, structure="mixed", seed=s)
        assert sg.generate_structure(spec(4)) == sg.generate_structure(spec(4))
        variants = {tuple(sg.generate_structure(spec(s))) for s in range(8)}
        assert len(variants) > 1


@pytest.fixture(scope="module")
def graph20(topology):
    spec = sg.GenSpec(task_count=20, seed=3)
    return sg.generate(spec, devices(topology))


class TestParameters:
    def test_validates_against_the_reference_system(self, topology, graph20):
        report = e.validate_workflow(graph20, topology)
        assert report.ok, report.violations

    def test_hub_and_cloud_times_follow_a_ratio_row(self, graph20):
        table = sg.DEFAULT_PERF_RATIOS
        for t in graph20.tasks:
            th = t.exec_time["e"] / t.exec_time["h"]
            tc = t.exec_time["h"] / t.exec_time["c"]
            row = min(table, key=lambda r: abs(r[0] - th))
            assert th == pytest.approx(row[0], rel=1e-9)
            assert tc == pytest.approx(row[1], rel=1e-9)

    def test_scaled_power_stays_inside_the_device_envelope(self, topology,
                                                           graph20):
        for dev in devices(topology):
            for t in graph20.tasks:
                p = t.power[dev.id]
                assert dev.idle_power < p <= dev.max_power

    def test_vulnerabilities_stay_inside_the_draw_window(self, graph20):
        for t in graph20.tasks:
            for v in t.vulnerability.values():
                assert sg.V_FLOOR <= v < sg.V_CEIL

    def test_mode_shares_hit_the_tier_targets_exactly(self, topology, graph20):
        # 20 tasks split cleanly: edge 5/20/75% -> 1/4/15, hub -> 4/7/9,
        # cloud -> 7/10/3 under the default (highest) criticality level
        policy = e.default_policy()
        expected = {"e": (1, 4, 15), "h": (4, 7, 9), "c": (7, 10, 3)}
        for dev_id, want in expected.items():
            modes = [e.exec_mode(t.vulnerability[dev_id], policy)
                     for t in graph20.tasks]
            got = tuple(sum(1 for m in modes if m is mode)
                        for mode in (e.ExecMode.SE, e.ExecMode.DE, e.ExecMode.TE))
            assert got == want

    def test_quota_rounding_uses_largest_remainders(self, topology):
        # 7 tasks at 5/20/75% give raw 0.35/1.4/5.25 -> floor 0/1/5; the one
        # leftover goes to the largest fractional part (dual execution, 0.4)
        spec = sg.GenSpec(task_count=7, seed=11)
        graph = sg.generate(spec, devices(topology))
        policy = e.default_policy()
        modes = [e.exec_mode(t.vulnerability["e"], policy) for t in graph.tasks]
        got = tuple(sum(1 for m in modes if m is mode)
                    for mode in (e.ExecMode.SE, e.ExecMode.DE, e.ExecMode.TE))
        assert got == (0, 2, 5)

    def test_lower_level_policy_widens_the_draw_windows(self, topology):
        spec = sg.GenSpec(task_count=20, seed=3)
        policy = e.default_policy(1)
        graph = sg.generate(spec, devices(topology), policy)
        vt_de, vt_te = policy.thresholds()
        assert vt_de == pytest.approx(0.06)
        modes = [e.exec_mode(t.vulnerability["e"], policy) for t in graph.tasks]
        got = tuple(sum(1 for m in modes if m is mode)
                    for mode in (e.ExecMode.SE, e.ExecMode.DE, e.ExecMode.TE))
        assert got == (1, 4, 15)

    def test_same_seed_reproduces_every_field(self, topology):
        a = sg.generate(sg.GenSpec(task_count=9, seed=5), devices(topology))
        b = sg.generate(sg.GenSpec(task_count=9, seed=5), devices(topology))
        c = sg.generate(sg.GenSpec(task_count=9, seed=6), devices(topology))
        assert [t.__dict__ for t in a.tasks] == [t.__dict__ for t in b.tasks]
        assert list(a.arcs) == list(b.arcs)
        assert [t.__dict__ for t in a.tasks] != [t.__dict__ for t in c.tasks]


class TestFixedAllocations:
    def test_pinned_tasks_keep_a_single_device(self, topology):
        spec = sg.GenSpec(task_count=10, seed=2, fixed_edge_pct=30.0,
                          fixed_hub_pct=20.0)
        graph = sg.generate(spec, devices(topology))
        pinned_e = [t for t in graph.tasks if t.allowed_devices == ("e",)]
        pinned_h = [t for t in graph.tasks if t.allowed_devices == ("h",)]
        free = [t for t in graph.tasks if len(t.allowed_devices) == 3]
        assert (len(pinned_e), len(pinned_h), len(free)) == (3, 2, 5)
        for t in pinned_e + pinned_h:
            dev = t.allowed_devices[0]
            assert set(t.exec_time) == set(t.power) == set(t.vulnerability) == {dev}

    def test_counts_round_half_away_from_zero(self, topology):
        spec = sg.GenSpec(task_count=2, seed=2, fixed_edge_pct=25.0)
        graph = sg.generate(spec, devices(topology))
        assert sum(1 for t in graph.tasks if t.allowed_devices == ("e",)) == 1

    def test_overcommitted_percentages_are_rejected(self, topology):
        spec = sg.GenSpec(task_count=4, seed=0, fixed_edge_pct=80.0,
                          fixed_hub_pct=80.0)
        with pytest.raises(ValueError, match="exceed"):
            sg.generate(spec, devices(topology))

    def test_pinning_preserves_the_original_profile_values(self, topology):
        base = sg.generate(sg.GenSpec(task_count=6, seed=9), devices(topology))
        pinned = sg.assign_fixed_allocations(base, 50.0, 0.0, seed=9,
                                             edge_id="e", hub_id="h")
        for orig, new in zip(base.tasks, pinned.tasks):
            if new.allowed_devices == ("e",):
                assert new.exec_time["e"] == orig.exec_time["e"]
                assert new.vulnerability["e"] == orig.vulnerability["e"]
            else:
                assert new is orig
