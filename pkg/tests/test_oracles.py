from __future__ import annotations

import itertools
import json

import pytest

from conftest import all_forests, all_trees, brute_is_ranking, induced_subgraph_of
from ranklab import forest as fc
from ranklab.errors import BudgetExceeded, SizeLimit
from ranklab.forest import LabeledForest
from ranklab.game import ClassSpec
from ranklab.oracles import (
    SolveResult,
    default_budget,
    online_rank_decision,
    online_rank_value,
    psi_exact,
    psi_path_formula,
    rho_tkd_formula,
    sample_classes,
    stv_class,
    tree_depth,
)


def induced(f: LabeledForest) -> ClassSpec:
    return ClassSpec.induced_of(f)


# ---------------------------------------------------------------------------
# solver


def test_decision_examples():
    p2 = induced(fc.path_forest(2))
    assert not online_rank_decision(p2, 2, 1)
    assert online_rank_decision(p2, 2, 2)
    p4 = induced(fc.path_forest(4))
    assert not online_rank_decision(p4, 4, 2)
    assert online_rank_decision(p4, 4, 3)
    assert online_rank_decision(induced(fc.path_forest(1)), 1, 1)
    with pytest.raises(ValueError):
        online_rank_decision(p2, 0, 1)


def test_value_examples():
    assert online_rank_value(induced(fc.path_forest(3)), 3, 5).value == 3
    assert online_rank_value(induced(fc.path_forest(1)), 1, 5).value == 1
    res = online_rank_value(induced(fc.path_forest(5)), 5, 2)
    assert res.exceeds and res.value == "exceeds"


def test_two_internal_diameter_three_value():
    res = online_rank_value(ClassSpec.few_internal(2, 3), 8, 5)
    assert res.value == 4
    # the smallest cap at which Presenter already forces 4
    assert online_rank_value(ClassSpec.few_internal(2, 3), 3, 5).value == 3
    assert online_rank_value(ClassSpec.few_internal(2, 3), 4, 5).value == 4


def test_solve_result_json():
    res = online_rank_value(induced(fc.path_forest(3)), 3, 5)
    data = json.loads(res.to_json())
    assert set(data) == {"value", "n_cap", "b_max", "nodes", "memo_hits"}
    assert data["value"] == 3 and data["n_cap"] == 3 and data["b_max"] == 5 and data["nodes"] > 0
    assert SolveResult("exceeds", 1, 2, 3, 4).exceeds


def test_budget_is_reported_not_guessed():
    with pytest.raises(BudgetExceeded) as info:
        online_rank_value(ClassSpec.few_internal(2, 3), 8, 5, budget=50)
    assert info.value.nodes > 50


def test_budget_env(monkeypatch):
    monkeypatch.setenv("RANKLAB_BUDGET", "1234")
    assert default_budget() == 1234
    monkeypatch.delenv("RANKLAB_BUDGET")
    assert default_budget() == 10**8


def test_tree_depth_not_above_online_value():
    for n in range(1, 7):
        for t in all_trees(n):
            assert tree_depth(t) <= online_rank_value(induced(t), n, 8).value


def test_paths_online_value_below_psi():
    for n in range(1, 8):
        assert online_rank_value(induced(fc.path_forest(n)), n, psi_path_formula(n) + 1).value <= psi_path_formula(n)


def test_value_monotone_in_cap():
    for spec in sample_classes(20, seed=3, max_n=6):
        values = [online_rank_value(spec, c, 8).value for c in range(1, spec.host.n + 1)]
        assert values == sorted(values), values


def test_value_monotone_in_induced_subgraphs():
    hosts = [fc.path_forest(5), fc.star_forest(4), fc.build_tkd(2, 3)]
    for host in hosts:
        big = online_rank_value(induced(host), host.n, 8).value
        for n in range(1, host.n):
            for f in all_forests(n):
                if induced_subgraph_of(f, host):
                    assert online_rank_value(induced(f), n, 8).value <= big


# ---------------------------------------------------------------------------
# tree-depth


def _brute_tree_depth(t: LabeledForest) -> int:
    for b in itertools.count(1):
        for labels in itertools.product(range(1, b + 1), repeat=t.n):
            if brute_is_ranking(t, labels):
                return b


def test_tree_depth_examples():
    assert tree_depth(fc.path_forest(1)) == 1
    assert tree_depth(fc.path_forest(4)) == 3
    assert tree_depth(fc.build_tkd(3, 4)) == 3
    assert tree_depth(LabeledForest.from_edges(5, [(0, 1), (2, 3)])) == 2


def test_tree_depth_matches_brute_force():
    for n in range(1, 7):
        for t in all_trees(n):
            assert tree_depth(t) == _brute_tree_depth(t), t.sorted_edges()


def test_rho_formula_examples():
    assert rho_tkd_formula(3, 0) == 1
    assert rho_tkd_formula(3, 4) == 3
    assert rho_tkd_formula(4, 7) == 5
    with pytest.raises(ValueError):
        rho_tkd_formula(2, 3)


@pytest.mark.parametrize("k,d", [(3, d) for d in range(7)] + [(4, d) for d in range(5)])
def test_tree_depth_of_tkd_matches_formula(k, d):
    assert tree_depth(fc.build_tkd(k, d)) == rho_tkd_formula(k, d)


# ---------------------------------------------------------------------------
# psi


def _brute_psi(t: LabeledForest) -> int:
    """Greedy over every order, checking each label against the definition."""
    worst = 0
    for order in itertools.permutations(range(t.n)):
        labels = {}
        for i, v in enumerate(order):
            sub_vertices = list(order[: i + 1])
            sub = t.induced(sub_vertices)
            for lab in itertools.count(1):
                trial = [labels[u] for u in sub_vertices[:-1]] + [lab]
                if brute_is_ranking(sub, trial):
                    labels[v] = lab
                    break
        worst = max(worst, max(labels.values()))
    return worst


def test_psi_examples():
    assert psi_exact(fc.path_forest(1)) == 1
    assert psi_exact(fc.path_forest(3)) == 3
    assert psi_exact(fc.path_forest(4)) == 3
    with pytest.raises(SizeLimit):
        psi_exact(fc.path_forest(10))


def test_psi_matches_brute_force():
    for n in range(1, 6):
        for t in all_trees(n):
            assert psi_exact(t) == _brute_psi(t)


def test_psi_path_formula_examples():
    assert [psi_path_formula(n) for n in (1, 2, 7)] == [1, 2, 5]
    with pytest.raises(ValueError):
        psi_path_formula(0)


def test_psi_paths_match_formula():
    for n in range(1, 10):
        assert psi_exact(fc.path_forest(n)) == psi_path_formula(n)


def test_psi_bounds_tree_depth():
    for n in range(1, 8):
        for t in all_trees(n):
            assert tree_depth(t) <= psi_exact(t)


# ---------------------------------------------------------------------------
# small-value classification


def test_stv_examples():
    assert stv_class(LabeledForest.from_edges(3, [])) == 1
    assert stv_class(LabeledForest.from_edges(3, [(0, 1)])) == 2
    assert stv_class(fc.path_forest(4)) == 3
    assert stv_class(fc.star_forest(5)) == 3
    assert stv_class(fc.path_forest(5)) == "4+"


def test_stv_agrees_with_solver():
    for n in range(1, 6):
        for f in all_forests(n):
            value = online_rank_value(induced(f), n, 4).value
            expect = stv_class(f)
            assert (value if value != "exceeds" and value <= 3 else "4+") == expect, (f.sorted_edges(), value)
