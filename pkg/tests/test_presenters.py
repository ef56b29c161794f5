from __future__ import annotations

import pytest

from conftest import induced_subgraph_of, to_nx
from ranklab import forest as fc
from ranklab.game import ClassSpec, GameState, is_legal_extension, max_label, play
from ranklab.oracles import best_response_value, online_rank_value
from ranklab.presenters import (
    ExhaustivePresenter,
    LowerBoundPlan,
    LowerBoundPresenter,
    RandomPresenter,
    SingleVertex,
    certify,
    default_class_for,
    exhaustive_worst_case,
    make_presenter,
    spider_class,
    spider_plan,
    spider_presenter,
    star_tree_class,
    star_tree_guarantee,
    star_tree_plan,
    star_tree_presenter,
)
from ranklab.rankers import GreedyRanker, RandomRanker, RankCompleteRanker


def _subdivided_star(a: int, length: int = 1) -> LowerBoundPlan:
    return LowerBoundPlan(SingleVertex, a, (length,) * a, (0,) * a, (0,) * a)


def _rankers(cls: ClassSpec, rankcomplete_d: int | None = None):
    yield GreedyRanker()
    for s in range(20):
        yield RandomRanker(s)
    if rankcomplete_d is not None:
        yield RankCompleteRanker(3, rankcomplete_d)


def _check_guarantee(cls: ClassSpec, make, bound: int, rankcomplete_d: int | None = None, best: bool = True):
    for ranker in _rankers(cls, rankcomplete_d):
        t = play(cls, make(), ranker)
        assert max_label(t) >= bound, (ranker.name, t.labels())
        t.final_state()  # replay re-checks every move and label
    if best:
        assert best_response_value(cls, make()) >= bound


# ---------------------------------------------------------------------------
# lower-bound construction


def test_blueprint_of_one_connector_is_p3():
    plan = _subdivided_star(1)
    g = plan.blueprint()
    assert g.n == 3 and fc.diameter(g, 0) == 2


def test_lowerbound_examples():
    cls = ClassSpec.induced_of(_subdivided_star(1).blueprint())
    _check_guarantee(cls, lambda: LowerBoundPresenter(_subdivided_star(1)), 2, rankcomplete_d=6)
    assert online_rank_value(cls, 3, 4).value >= 2

    cls = ClassSpec.induced_of(_subdivided_star(3).blueprint())
    _check_guarantee(cls, lambda: LowerBoundPresenter(_subdivided_star(3)), 4, rankcomplete_d=6)

    plan = star_tree_plan(2, 2)
    assert plan.copy_template.n == 1 and plan.a == 2
    _check_guarantee(star_tree_class(2, 2), lambda: LowerBoundPresenter(star_tree_plan(2, 2)), 3, rankcomplete_d=6)


def test_lowerbound_with_longer_connectors():
    plan = _subdivided_star(2, length=3)
    cls = ClassSpec.induced_of(plan.blueprint())
    assert plan.blueprint().n == 9
    _check_guarantee(cls, lambda: LowerBoundPresenter(_subdivided_star(2, length=3)), 3, rankcomplete_d=6)


def test_plan_validation():
    with pytest.raises(ValueError):
        LowerBoundPlan(SingleVertex, 0, (), (), ())
    with pytest.raises(ValueError):
        LowerBoundPlan(SingleVertex, 2, (1,), (0, 0), (0, 0))
    with pytest.raises(ValueError):
        LowerBoundPlan(SingleVertex, 1, (0,), (0,), (0,))


def test_presenter_built_graph_matches_template():
    for make, cls in [
        (lambda: spider_presenter(3), spider_class(3)),
        (lambda: star_tree_presenter(2, 2), star_tree_class(2, 2)),
        (lambda: star_tree_presenter(2, 4), star_tree_class(2, 4)),
        (lambda: star_tree_presenter(3, 2), star_tree_class(3, 2)),
    ]:
        for ranker in (GreedyRanker(), RandomRanker(3)):
            p = make()
            t = play(cls, p, ranker)
            f = t.final_state().forest
            emb = p.embedding()
            assert len(emb) == f.n and len(set(emb)) == f.n
            for u in range(f.n):
                for w in range(u + 1, f.n):
                    assert (w in f.adj[u]) == (emb[w] in p.template.adj[emb[u]])
            assert induced_subgraph_of(f, cls.host)


def test_hub_is_copy_with_smallest_max():
    for seed in range(20):
        p = star_tree_presenter(2, 4)
        t = play(star_tree_class(2, 4), p, RandomRanker(seed))
        sel = p.selection
        hub = sel["hub"]
        assert all(sel["copy_max_labels"][hub] <= m for m in sel["copy_max_labels"])
        # recompute from the transcript: copies are the first (a+1)*|F| vertices, |F| each
        m = p.F.n
        labels = t.labels()
        maxima = [max(labels[c * m:(c + 1) * m]) for c in range(p.plan.a + 1)]
        assert maxima == sel["copy_max_labels"]


# ---------------------------------------------------------------------------
# star trees and spiders


@pytest.mark.parametrize("k,r,spec_bound", [(2, 0, 1), (2, 2, 2), (3, 2, 3), (2, 4, 4)])
def test_star_tree_examples(k, r, spec_bound):
    cls = star_tree_class(k, r)
    ours = star_tree_guarantee(k, r)
    assert ours >= spec_bound >= k ** (r // 2)
    small = cls.host.n <= 12
    d = max(6, 2 * r) if k == 2 else None
    _check_guarantee(cls, lambda: star_tree_presenter(k, r), ours, rankcomplete_d=d, best=small)


def test_star_tree_guarantee_recursion():
    assert [star_tree_guarantee(2, r) for r in range(7)] == [1, 1, 3, 3, 5, 5, 11]
    assert star_tree_guarantee(3, 2) == 4
    for k in (2, 3, 4):
        for r in range(0, 9):
            assert star_tree_guarantee(k, r) >= k ** (r // 2)


def test_star_tree_rejects_odd_depth():
    with pytest.raises(ValueError):
        star_tree_presenter(2, 3)


@pytest.mark.parametrize("a", [1, 2, 3, 4, 5])
def test_spider_forces_a_plus_one(a):
    cls = spider_class(a)
    assert cls.host.n == 2 * a + 1
    _check_guarantee(cls, lambda: spider_presenter(a), a + 1, rankcomplete_d=6, best=cls.host.n <= 12)
    if a >= 3:
        assert a + 1 > cls.host.n / 2


def test_spider_blueprint_shape():
    g = spider_plan(3).blueprint()
    degrees = sorted(len(nb) for nb in g.adj)
    assert degrees == [1, 1, 1, 2, 2, 2, 3]


def test_certificate():
    c = certify(spider_class(2), spider_presenter(2), GreedyRanker())
    assert c.claimed_minimum == 3 and c.holds
    with pytest.raises(ValueError):
        certify(ClassSpec.path_family(3), RandomPresenter(ClassSpec.path_family(3), 0, 3), GreedyRanker())


# ---------------------------------------------------------------------------
# best response


@pytest.mark.parametrize(
    "make,cls",
    [
        (lambda: spider_presenter(1), spider_class(1)),
        (lambda: spider_presenter(2), spider_class(2)),
        (lambda: spider_presenter(3), spider_class(3)),
        (lambda: star_tree_presenter(2, 2), star_tree_class(2, 2)),
        (lambda: LowerBoundPresenter(_subdivided_star(2, 2)), ClassSpec.induced_of(_subdivided_star(2, 2).blueprint())),
    ],
)
def test_best_response_restriction_is_lossless(make, cls):
    assert cls.host.n <= 8
    assert best_response_value(cls, make()) == best_response_value(cls, make(), restrict=False)


def test_best_response_never_beats_game_value():
    # the presenter is one particular adversary, so Ranker does at least as well as the game value
    cls = spider_class(2)
    assert best_response_value(cls, spider_presenter(2)) <= online_rank_value(cls, 5, 6).value


# ---------------------------------------------------------------------------
# random and exhaustive presenters


def test_random_presenter_on_edge_class():
    spec = ClassSpec.induced_of(fc.path_forest(2))
    for seed in range(10):
        assert play(spec, RandomPresenter(spec, seed, 10), GreedyRanker()).rounds <= 2


@pytest.mark.parametrize("mode", ["uniform", "host", "auto"])
def test_random_presenter_deterministic(mode):
    spec = ClassSpec.max_deg_diam(3, 5)
    a = play(spec, RandomPresenter(spec, 17, 15, mode), RandomRanker(2))
    b = play(spec, RandomPresenter(spec, 17, 15, mode), RandomRanker(2))
    assert a == b
    c = play(spec, RandomPresenter(spec, 18, 15, mode), RandomRanker(2))
    assert c.events != a.events or mode == "uniform"


def test_random_presenter_prefixes_are_legal():
    spec = ClassSpec.max_deg_diam(3, 6)
    for seed in range(5):
        t = play(spec, RandomPresenter(spec, seed, 22), GreedyRanker())
        state = GameState.initial(spec)
        for ev, nxt in zip(t.events, list(t.states())[1:]):
            assert is_legal_extension(state, ev.move)
            state = nxt
        assert t.rounds <= 22


def test_random_presenter_stops_at_n_max():
    spec = ClassSpec.few_internal(3, 4)
    t = play(spec, RandomPresenter(spec, 0, 6), GreedyRanker())
    assert t.rounds == 6


@pytest.mark.parametrize("host", [fc.path_forest(3), fc.path_forest(4), fc.star_forest(3), fc.path_forest(5)])
def test_exhaustive_presenter_realizes_worst_case(host):
    spec = ClassSpec.induced_of(host)
    value, _ = exhaustive_worst_case(spec, GreedyRanker())
    ranker = GreedyRanker()
    assert max_label(play(spec, ExhaustivePresenter(ranker), ranker)) == value
    # greedy is a Ranker, so it cannot do better than the game value
    assert value >= online_rank_value(spec, host.n, 6).value


def test_exhaustive_needs_finite_class():
    with pytest.raises(ValueError):
        exhaustive_worst_case(ClassSpec.few_internal(2, 3), GreedyRanker())


def test_make_presenter_registry():
    assert make_presenter("spider", {"a": "2"}).guarantee == 3
    assert make_presenter("startree", {"k": "2", "r": "2"}).guarantee == 3
    lb = make_presenter("lowerbound", {"a": "2", "length": "2"})
    assert lb.guarantee == 3 and lb.template.n == 7
    spec = ClassSpec.path_family(4)
    assert isinstance(make_presenter("random", {"seed": "3"}, spec=spec), RandomPresenter)
    with pytest.raises(ValueError):
        make_presenter("spider", {})
    with pytest.raises(ValueError):
        make_presenter("spider", {"a": "2", "b": "1"})
    with pytest.raises(ValueError):
        make_presenter("exhaustive", {})
    with pytest.raises(ValueError):
        make_presenter("chaos", {})
    assert default_class_for("spider", {"a": 2}) == spider_class(2)
    assert default_class_for("lowerbound", {"a": 2, "length": 2}).host.n == 7
    assert default_class_for("random", {}) is None


def test_networkx_agrees_on_blueprint():
    import networkx as nx

    assert nx.is_tree(to_nx(star_tree_plan(2, 4).blueprint()))
