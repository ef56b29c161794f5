"""Acceptance criteria 1-7, one test each, each printing a single PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
"""

from __future__ import annotations

import itertools
import random
import time

import networkx as nx

from conftest import all_forests, all_trees, to_nx
from ranklab import forest as fc
from ranklab.forest import LabeledForest
from ranklab.game import ClassSpec, max_label, play
from ranklab.oracles import (
    best_response_value,
    online_rank_decision,
    online_rank_value,
    psi_exact,
    psi_path_formula,
    rho_tkd_formula,
    sample_classes,
    tree_depth,
)
from ranklab.presenters import (
    RandomPresenter,
    exhaustive_worst_case,
    spider_class,
    spider_presenter,
    star_tree_class,
    star_tree_presenter,
)
from ranklab.rankers import (
    DoubleStarRanker,
    GreedyRanker,
    LabelSegments,
    RandomRanker,
    RankCompleteRanker,
    RankSmallRanker,
    rankcomplete_lemmas,
)


def induced(f: LabeledForest) -> ClassSpec:
    return ClassSpec.induced_of(f)


# ---------------------------------------------------------------------------


def test_criterion_1_small_values(criterion):
    cases = [
        ("K1", LabeledForest.from_edges(1, []), 1),
        ("3K1", LabeledForest.from_edges(3, []), 1),
        ("P2", fc.path_forest(2), 2),
        ("P3", fc.path_forest(3), 3),
        ("P4", fc.path_forest(4), 3),
    ]
    problems = []
    slowest = 0.0
    for name, f, want in cases:
        start = time.perf_counter()
        got = online_rank_value(induced(f), f.n, 6).value
        took = time.perf_counter() - start
        slowest = max(slowest, took)
        if got != want or took >= 1.0:
            problems.append(f"{name}: got {got} in {took:.2f}s, want {want}")
    ok = criterion(1, not problems, f"values 1,1,2,3,3 for K1,3K1,P2,P3,P4; slowest {slowest:.3f}s" + (f"; {problems}" if problems else ""))
    assert ok, problems


def test_criterion_2_double_stars(criterion):
    start = time.perf_counter()
    spec = ClassSpec.few_internal(2, 3)
    # (a) Presenter wins against every Ranker that stays at 3
    win_cap = next((n for n in range(1, 11) if not online_rank_decision(spec, n, 3, budget=10**8)), None)
    # (b) Rankdoublestar stays at 4
    broken: list[str] = []

    def check(shown, lab, nxt):
        if lab > 4 or not fc.is_valid_ranking(nxt.forest):
            broken.append(f"label {lab} on {nxt.forest.sorted_edges()}")

    worst_exh, steps = exhaustive_worst_case(spec.with_cap(8), DoubleStarRanker(), check)
    worst_rand = 0
    for seed in range(1000):
        t = play(spec, RandomPresenter(spec, seed, 12), DoubleStarRanker(), seed=seed)
        if not fc.is_valid_ranking(t.final_state().forest):
            broken.append(f"seed {seed} invalid")
        worst_rand = max(worst_rand, max_label(t))
    took = time.perf_counter() - start
    ok = win_cap is not None and worst_exh <= 4 and worst_rand <= 4 and not broken and took < 600
    criterion(
        2,
        ok,
        f"Presenter forces 4 from n_cap={win_cap}; doublestar worst {worst_exh} over {steps} exhaustive steps (n_cap 8), "
        f"worst {worst_rand} over 1000 random games (n_max 12); {took:.1f}s",
    )
    assert ok, broken[:3]


def test_criterion_3_rankcomplete(criterion):
    start = time.perf_counter()
    details = []
    failures = []
    for d in (6, 7, 8, 9):
        spec = ClassSpec.max_deg_diam(3, d)
        n_max = min(fc.tkd_size(3, d), 200)
        top = LabelSegments.for_tree(3, d).top
        assert top <= 6 * 2 ** (d // 3)
        worst = 0
        for seed in range(200):
            t = play(spec, RandomPresenter(spec, seed, n_max), RankCompleteRanker(3, d), seed=seed)
            final = t.final_state().forest  # replay re-validates every move and label
            if not fc.is_valid_ranking(final):
                failures.append(f"d={d} seed={seed}: invalid ranking")
            worst = max(worst, max_label(t))
            bad = rankcomplete_lemmas(t, 3, d)
            if bad:
                failures.append(f"d={d} seed={seed}: {bad[0]}")
        if worst > top:
            failures.append(f"d={d}: max label {worst} > {top}")
        details.append(f"d={d} worst {worst}<={top}")
    took = time.perf_counter() - start
    ok = not failures and took < 300
    criterion(3, ok, f"{'; '.join(details)}; 800 games, lemmas clean; {took:.1f}s")
    assert ok, failures[:5]


def test_criterion_4_adversaries(criterion):
    start = time.perf_counter()
    rows = []
    failures = []
    constructions = [(f"startree k={k} r={r}", star_tree_class(k, r), (lambda k=k, r=r: star_tree_presenter(k, r)), k ** (r // 2)) for k, r in [(2, 2), (2, 4), (3, 2)]]
    constructions += [(f"spider a={a}", spider_class(a), (lambda a=a: spider_presenter(a)), a + 1) for a in range(1, 6)]
    for name, cls, make, bound in constructions:
        rankers = [GreedyRanker()] + [RandomRanker(s) for s in range(20)]
        worst = min(max_label(play(cls, make(), r)) for r in rankers)
        size = play(cls, make(), GreedyRanker()).rounds
        best = best_response_value(cls, make()) if size <= 12 else None
        if worst < bound or (best is not None and best < bound):
            failures.append(f"{name}: greedy/random {worst}, best response {best}, bound {bound}")
        rows.append(f"{name}>={bound}: {worst}" + (f"/br {best}" if best is not None else ""))
    took = time.perf_counter() - start
    ok = not failures and took < 600
    criterion(4, ok, f"{', '.join(rows)}; {took:.1f}s")
    assert ok, failures


def test_criterion_5_formulas(criterion):
    start = time.perf_counter()
    failures = []
    for k, d in [(3, d) for d in range(7)] + [(4, d) for d in range(5)]:
        if tree_depth(fc.build_tkd(k, d)) != rho_tkd_formula(k, d):
            failures.append(f"tree_depth(T_{k},{d})")
    psi = [psi_exact(fc.path_forest(n)) for n in range(1, 10)]
    if psi != [psi_path_formula(n) for n in range(1, 10)]:
        failures.append(f"psi paths {psi}")
    online = [online_rank_value(induced(fc.path_forest(n)), n, psi_path_formula(n) + 1).value for n in range(1, 8)]
    if any(v == "exceeds" or v > psi_path_formula(n) for n, v in zip(range(1, 8), online)):
        failures.append(f"online paths {online}")
    took = time.perf_counter() - start
    ok = not failures and took < 900
    criterion(5, ok, f"tree-depth formula on 12 trees, psi(P1..P9)={psi}, online(P1..P7)={online}; {took:.1f}s")
    assert ok, failures


def test_criterion_6_ranksmall(criterion):
    start = time.perf_counter()
    rows = []
    failures = []
    for p, q in [(1, 2), (2, 3), (3, 4)]:
        leaf_breaks: list[str] = []

        def check(shown, lab, nxt):
            f = shown.forest
            v = shown.pending
            comp = f.component(v)
            if f.degree(v) == 1 and len(comp) >= 2:
                m = max(f.labels[u] for u in comp if u != v)
                if lab >= m:
                    leaf_breaks.append(f"leaf {v} got {lab} >= {m}")
            if not fc.is_valid_ranking(nxt.forest):
                leaf_breaks.append("invalid ranking")

        value, steps = exhaustive_worst_case(ClassSpec.few_internal(p, q, n_cap=8), RankSmallRanker(q, p), check)
        if value > p + q + 1 or leaf_breaks:
            failures.append(f"(p,q)=({p},{q}): value {value}, {leaf_breaks[:2]}")
        rows.append(f"({p},{q}) worst {value}<={p + q + 1} over {steps} steps")
    took = time.perf_counter() - start
    ok = not failures and took < 600
    criterion(6, ok, f"{'; '.join(rows)}; Leaf holds; {took:.1f}s")
    assert ok, failures


def _paths_between(f: LabeledForest) -> list[tuple[int, int, list[int]]]:
    g = to_nx(f)
    out = []
    for u, w in itertools.combinations(range(f.n), 2):
        if nx.has_path(g, u, w):
            out.append((u, w, nx.shortest_path(g, u, w)[1:-1]))
    return out


def _definition_holds(pairs, labels) -> bool:
    for u, w, inner in pairs:
        if labels[u] == labels[w] and all(labels[x] < labels[u] for x in inner):
            return False
    return True


def _labeled_nx(f: LabeledForest) -> nx.Graph:
    g = to_nx(f)
    nx.set_node_attributes(g, dict(enumerate(f.labels)), "label")
    return g


def _same_label(a, b) -> bool:
    return a["label"] == b["label"]


def test_criterion_7_property_suites(criterion):
    start = time.perf_counter()
    failures = []
    rng = random.Random(7)
    # ranking check against the definition, every labeling with labels <= 4
    checked = 0
    for n in range(1, 9):
        for f in all_forests(n):
            pairs = _paths_between(f)
            for labels in itertools.product(range(1, 5), repeat=n):
                checked += 1
                if fc.is_valid_ranking(f.with_labels(labels)) != _definition_holds(pairs, labels):
                    failures.append(f"ranking {f.sorted_edges()} {labels}")
    # candidate labels: every vertex of every forest <= 7 as the pending one, random valid context
    for n in range(1, 8):
        for f in all_forests(n):
            pairs = _paths_between(f)
            for v in range(n):
                for _ in range(3):
                    labels = [rng.randint(1, 5) for _ in range(n)]
                    labels[v] = 0
                    lab_f = f.with_labels(labels)
                    if not fc.is_valid_ranking(lab_f.induced([u for u in range(n) if u != v]).with_labels([labels[u] for u in range(n) if u != v])):
                        continue
                    want = [x for x in range(1, 8) if _definition_holds(pairs, labels[:v] + [x] + labels[v + 1:])]
                    if fc.candidate_labels(lab_f, v, 7) != want:
                        failures.append(f"candidates {f.sorted_edges()} {labels} v={v}")
    # star-tree embedding against subgraph isomorphism, every tree <= 8 vertices
    for k in (1, 2, 3):
        for r in (0, 1, 2, 3):
            host = to_nx(fc.build_star_tree(k, r).to_forest())
            for n in range(1, 9):
                for t in all_trees(n):
                    want = nx.algorithms.isomorphism.GraphMatcher(host, to_nx(t)).subgraph_is_monomorphic()
                    if fc.embeds_in_star_tree(t, k, r) != want:
                        failures.append(f"embed k={k} r={r} {t.sorted_edges()}")
    # canonical keys: invariant under shuffles, injective on labeled forests <= 6 vertices, labels <= 3
    for n in range(1, 7):
        seen: dict[bytes, LabeledForest] = {}
        for f in all_forests(n):
            for labels in itertools.product(range(1, 4), repeat=n):
                g = f.with_labels(labels)
                key = fc.canonical_key(g)
                for _ in range(2):
                    perm = list(range(n))
                    rng.shuffle(perm)
                    if fc.canonical_key(g.relabeled(perm)) != key:
                        failures.append(f"key not invariant {g.sorted_edges()} {labels}")
                other = seen.setdefault(key, g)
                if other is not g and not nx.is_isomorphic(_labeled_nx(other), _labeled_nx(g), node_match=_same_label):
                    failures.append(f"key collision {g.sorted_edges()} {labels}")
    # solver monotone in n_cap on 20 sampled classes
    for spec in sample_classes(20, seed=11, max_n=6):
        values = [online_rank_value(spec, c, 8).value for c in range(1, spec.host.n + 1)]
        if values != sorted(values):
            failures.append(f"monotonicity {values}")
    took = time.perf_counter() - start
    ok = not failures and took < 600
    criterion(7, ok, f"{checked} rankings, candidates, embeddings, canonical keys exhaustive; n_cap monotone on 20 classes; {took:.1f}s")
    assert ok, failures[:5]
