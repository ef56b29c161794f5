"""Exact ground truth for small instances.

Everything here is brute force with memoization: the capped game value by
minimax, tree-depth by vertex removal, psi by trying every presentation
order against the greedy Ranker, plus closed forms to compare against.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import forest as fc
from .errors import BudgetExceeded, SizeLimit
from .forest import LabeledForest
from .game import ClassSpec, GameState, Presenter, legal_moves, present

DEFAULT_BUDGET = 10**8
PSI_LIMIT = 9


def default_budget() -> int:
    raw = os.environ.get("RANKLAB_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# capped game value


@dataclass
class SolveResult:
    value: int | str
    n_cap: int
    b_max: int
    nodes: int
    memo_hits: int

    @property
    def exceeds(self) -> bool:
        return self.value == "exceeds"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class _Solver:
    """Can Ranker keep every label <= b? One instance per (class, cap, b)."""

    def __init__(self, spec: ClassSpec, b: int, budget: int):
        self.spec = spec
        self.b = b
        self.budget = budget
        self.nodes = 0
        self.hits = 0
        self.memo: dict[bytes, bool] = {}

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"solver exceeded {self.budget} nodes", nodes=self.nodes)

    def ranker_holds(self, state: GameState) -> bool:
        """Presenter to move on a fully labeled board."""
        key = fc.canonical_key(state.forest)
        hit = self.memo.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self._tick()
        # Stopping never hurts Ranker, so only real moves matter.
        ok = all(self.ranker_answers(present(state, mv)) for mv in legal_moves(state).moves)
        self.memo[key] = ok
        return ok

    def ranker_answers(self, state: GameState) -> bool:
        """A vertex is pending; does some label <= b keep Ranker alive?"""
        key = fc.canonical_key(state.forest)
        hit = self.memo.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self._tick()
        v = state.pending
        ok = False
        for lab in fc.candidate_labels(state.forest, v, self.b):
            nxt = GameState(state.forest.with_label(v, lab), state.cls, state.round + 1)
            if self.ranker_holds(nxt):
                ok = True
                break
        self.memo[key] = ok
        return ok


def _decide(spec: ClassSpec, n_cap: int, b: int, budget: int) -> tuple[bool, _Solver]:
    if n_cap < 1 or b < 1:
        raise ValueError("n_cap and b must be >= 1")
    solver = _Solver(spec.with_cap(n_cap), b, budget)
    return solver.ranker_holds(GameState.initial(solver.spec)), solver


def online_rank_decision(spec: ClassSpec, n_cap: int, b: int, *, budget: int | None = None) -> bool:
    """True iff Ranker can keep all labels <= b against every Presenter using <= n_cap vertices."""
    ok, _ = _decide(spec, n_cap, b, default_budget() if budget is None else budget)
    return ok


def online_rank_value(spec: ClassSpec, n_cap: int, b_max: int, *, budget: int | None = None) -> SolveResult:
    """Smallest b <= b_max that Ranker can hold, else ``"exceeds"``.

    The node budget is shared across the b values tried.
    """
    left = default_budget() if budget is None else budget
    nodes = hits = 0
    for b in range(1, b_max + 1):
        try:
            ok, solver = _decide(spec, n_cap, b, left - nodes)
        except BudgetExceeded as exc:
            raise BudgetExceeded(str(exc), nodes=nodes + exc.nodes) from None
        nodes += solver.nodes
        hits += solver.hits
        if ok:
            return SolveResult(b, n_cap, b_max, nodes, hits)
    return SolveResult("exceeds", n_cap, b_max, nodes, hits)


# ---------------------------------------------------------------------------
# best response against a fixed Presenter


def best_response_value(
    spec: ClassSpec,
    presenter: Presenter,
    *,
    b_max: int = 64,
    restrict: bool = True,
    budget: int | None = None,
) -> int:
    """Least final max label any Ranker achieves against a deterministic ``presenter``.

    With ``restrict`` Ranker only considers labels up to the current max + 1;
    otherwise every label up to the bound being tested.
    """
    budget = default_budget() if budget is None else budget
    nodes = 0
    presenter.reset()

    def holds(state: GameState, pres: Presenter, b: int, memo: dict) -> bool:
        nonlocal nodes
        key = state.forest.labels
        if key in memo:
            return memo[key]
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded("best-response search exceeded its budget", nodes=nodes)
        p = copy.deepcopy(pres)
        mv = p.move(state)
        if mv.stop:
            memo[key] = True
            return True
        shown = present(state, mv)
        v = shown.pending
        top = min(b, shown.forest.max_label + 1) if restrict else b
        ok = any(
            holds(GameState(shown.forest.with_label(v, lab), spec, shown.round + 1), p, b, memo)
            for lab in fc.candidate_labels(shown.forest, v, top)
        )
        memo[key] = ok
        return ok

    for b in range(1, b_max + 1):
        if holds(GameState.initial(spec), presenter, b, {}):
            return b
    raise BudgetExceeded(f"no Ranker reply keeps labels <= {b_max}", nodes=nodes)


# ---------------------------------------------------------------------------
# tree-depth


_DEPTH_MEMO: dict[bytes, int] = {}


def _path_depth(vertices: int) -> int:
    return vertices.bit_length()  # ceil(log2(vertices + 1))


def tree_depth(t: LabeledForest) -> int:
    """Ranking number: remove the best top vertex, recurse on what is left."""
    plain = t.unlabeled()
    return max((_tree_depth(plain.induced(comp)) for comp in plain.components()), default=0)


def _tree_depth(tree: LabeledForest) -> int:
    key = fc.canonical_key(tree)
    hit = _DEPTH_MEMO.get(key)
    if hit is not None:
        return hit
    if tree.n == 1:
        return 1
    ecc = fc.eccentricities(tree, list(range(tree.n)))
    # a longest path is a subgraph, so its depth bounds ours from below
    floor = _path_depth(max(ecc.values()) + 1)
    best = tree.n
    tried: set[str] = set()
    for v in sorted(range(tree.n), key=lambda u: (ecc[u], u)):
        code = fc._rooted_code(tree, v)
        if code in tried:
            continue
        tried.add(code)
        rest = [u for u in range(tree.n) if u != v]
        sub = tree.induced(rest)
        val = 1 + max(_tree_depth(sub.induced(c)) for c in sub.components())
        best = min(best, val)
        if best == floor:
            break
    _DEPTH_MEMO[key] = best
    return best


def rho_tkd_formula(k: int, d: int) -> int:
    if k < 3 or d < 0:
        raise ValueError("formula stated for k >= 3, d >= 0")
    return -(-d // 2) + 1


# ---------------------------------------------------------------------------
# psi: greedy over all presentation orders


def psi_exact(t: LabeledForest) -> int:
    """Largest label of a minimal ranking, as the worst greedy outcome over all orders."""
    if t.n > PSI_LIMIT:
        raise SizeLimit(f"psi_exact handles at most {PSI_LIMIT} vertices, got {t.n}")
    plain = t.unlabeled()
    if plain.n == 0:
        return 0
    memo: dict[tuple[int, ...], int] = {}

    def worst(labels: tuple[int, ...]) -> int:
        hit = memo.get(labels)
        if hit is not None:
            return hit
        shown = [u for u in range(plain.n) if labels[u]]
        if len(shown) == plain.n:
            out = max(labels)
        else:
            out = 0
            for v in range(plain.n):
                if labels[v]:
                    continue
                order = shown + [v]
                sub = plain.induced(order).with_labels([labels[u] for u in shown] + [0])
                lab = fc.smallest_valid_label(sub, len(shown))
                nxt = list(labels)
                nxt[v] = lab
                out = max(out, worst(tuple(nxt)))
        memo[labels] = out
        return out

    return worst((0,) * plain.n)


def _floor_log2(x: Fraction) -> int:
    if x <= 0:
        raise ValueError("log of a non-positive number")
    e = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** e > x:
        e -= 1
    while Fraction(2) ** (e + 1) <= x:
        e += 1
    return e


def psi_path_formula(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    half = Fraction(2) ** (_floor_log2(Fraction(n)) - 1)
    return _floor_log2(Fraction(n + 1)) + _floor_log2(Fraction(n + 1) - half)


# ---------------------------------------------------------------------------
# known characterization of values 1, 2, 3


def stv_class(f: LabeledForest) -> int | str:
    """1, 2 or 3 when the forest has that on-line ranking number, else ``"4+"``."""
    comps = f.components()
    sizes = [len(c) for c in comps]
    if all(s == 1 for s in sizes):
        return 1
    if all(s <= 2 for s in sizes):
        return 2
    diam = [fc.diameter(f, c[0]) for c in comps]
    if all(x <= 2 for x in diam):
        return 3
    linear = all(len(f.adj[u]) <= 2 for u in range(f.n))
    if linear and max(sizes) == 4:
        return 3
    return "4+"


# ---------------------------------------------------------------------------
# helpers for sweeping


def sample_classes(count: int, seed: int = 0, max_n: int = 6) -> list[ClassSpec]:
    """Deterministic small induced classes for property sweeps."""
    import random

    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, max_n)
        edges = [(rng.randrange(i), i) for i in range(1, n) if rng.random() < 0.8]
        out.append(ClassSpec.induced_of(LabeledForest.from_edges(n, edges)))
    return out


__all__ = [
    "DEFAULT_BUDGET",
    "SolveResult",
    "best_response_value",
    "default_budget",
    "online_rank_decision",
    "online_rank_value",
    "psi_exact",
    "psi_path_formula",
    "rho_tkd_formula",
    "sample_classes",
    "stv_class",
    "tree_depth",
]
