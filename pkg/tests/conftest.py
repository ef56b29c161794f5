from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import networkx as nx
import pytest

from ranklab.forest import LabeledForest
from ranklab.game import STOP, GameState, Move, Presenter


def to_nx(f: LabeledForest) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(f.n))
    g.add_edges_from(f.sorted_edges())
    return g


def from_nx(g: nx.Graph) -> LabeledForest:
    nodes = sorted(g.nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    return LabeledForest.from_edges(len(nodes), [(idx[a], idx[b]) for a, b in g.edges])


def all_trees(n: int) -> list[LabeledForest]:
    if n == 1:
        return [LabeledForest.from_edges(1, [])]
    return [from_nx(t) for t in nx.nonisomorphic_trees(n)]


def all_forests(n: int) -> list[LabeledForest]:
    """Every forest on n vertices up to isomorphism, via partitions into trees."""
    out: list[LabeledForest] = []

    def parts(rest: int, largest: int) -> Iterable[list[int]]:
        if rest == 0:
            yield []
            return
        for s in range(min(rest, largest), 0, -1):
            for tail in parts(rest - s, s):
                yield [s] + tail

    for sizes in parts(n, n):
        for combo in itertools.product(*[range(len(all_trees(s))) for s in sizes]):
            f = LabeledForest.empty()
            for s, i in zip(sizes, combo):
                f = f.disjoint_union(all_trees(s)[i])
            out.append(f)
    # different tree multisets can still coincide (same trees, other order), so dedup by isomorphism
    result: list[LabeledForest] = []
    for f in out:
        if not any(g.n == f.n and nx.is_isomorphic(to_nx(g), to_nx(f)) for g in result):
            result.append(f)
    return result


def brute_is_ranking(f: LabeledForest, labels: Sequence[int]) -> bool:
    """Directly from the definition: every path between equal labels has a larger one."""
    g = to_nx(f)
    for u, w in itertools.combinations(range(f.n), 2):
        if labels[u] != labels[w] or not nx.has_path(g, u, w):
            continue
        path = nx.shortest_path(g, u, w)
        if max(labels[x] for x in path[1:-1]) <= labels[u] if len(path) > 2 else True:
            return False
    return True


def induced_subgraph_of(pattern: LabeledForest, host: LabeledForest) -> bool:
    gm = nx.algorithms.isomorphism.GraphMatcher(to_nx(host), to_nx(pattern))
    return gm.subgraph_is_isomorphic()


class ScriptedPresenter(Presenter):
    """Plays a fixed list of attachment tuples, then stops."""

    name = "scripted"

    def __init__(self, moves: Sequence[Sequence[int]]):
        self.moves = [Move(tuple(m)) for m in moves]

    def move(self, state: GameState) -> Move:
        i = state.forest.n
        return self.moves[i] if i < len(self.moves) else STOP


@pytest.fixture
def scripted():
    return ScriptedPresenter


# ---------------------------------------------------------------------------
# acceptance reporting: one line per criterion, repeated at the end of the run

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        _CRITERIA[number] = line
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
