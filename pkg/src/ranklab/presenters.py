"""Presenter strategies: lower-bound adversaries, random fuzzers and exhaustive search.

The adversaries here all build a known target graph. A *copy strategy* is a
presenter that, besides playing moves on its own vertices, can report which
vertex of its ``template`` each presented vertex is; the lower-bound
presenter runs several copy strategies side by side and then wires the copies
together.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from . import forest as fc
from .errors import IllegalMove
from .forest import LabeledForest
from .game import (
    ISOLATED,
    STOP,
    ClassSpec,
    GameState,
    Move,
    Presenter,
    Ranker,
    Transcript,
    assign,
    legal_moves,
    max_label,
    play,
    present,
    skeleton_trees,
)


def _local_state(state: GameState, vertices: Sequence[int], template: LabeledForest) -> GameState:
    return GameState(state.forest.induced(vertices), ClassSpec.induced_of(template), len(vertices))


class CopyStrategy(Presenter):
    """A presenter that reveals vertices of ``template`` and can say which ones."""

    template: LabeledForest

    def embedding(self) -> list[int]:
        raise NotImplementedError


class SingleVertex(CopyStrategy):
    """Present one isolated vertex, forcing label >= 1."""

    name = "single"
    guarantee = 1

    def __init__(self) -> None:
        self.template = LabeledForest.from_edges(1, [])

    def move(self, state: GameState) -> Move:
        return ISOLATED if state.forest.n == 0 else STOP

    def embedding(self) -> list[int]:
        return [0]


class Completing(CopyStrategy):
    """Run ``inner`` to completion, then reveal the rest of a (super)template.

    ``outer`` and ``lift`` let the inner template sit inside a larger one:
    ``lift[t]`` is the outer vertex for inner template vertex ``t``.
    """

    name = "completing"

    def __init__(self, inner: CopyStrategy, outer: LabeledForest | None = None, lift: Sequence[int] | None = None):
        self.inner = inner
        self.template = inner.template if outer is None else outer
        self.lift = list(range(inner.template.n)) if lift is None else list(lift)
        self.guarantee = inner.guarantee
        self.inner_done = False
        self.extra: list[int] = []

    def reset(self) -> None:
        self.inner.reset()
        self.inner_done = False
        self.extra = []

    def embedding(self) -> list[int]:
        return [self.lift[t] for t in self.inner.embedding()] + self.extra

    def move(self, state: GameState) -> Move:
        if not self.inner_done:
            mv = self.inner.move(state)
            if not mv.stop:
                return mv
            self.inner_done = True
        placed = self.embedding()
        where = {t: i for i, t in enumerate(placed)}
        for t in _bfs(self.template):
            if t not in where:
                self.extra.append(t)
                return Move(tuple(where[w] for w in self.template.adj[t] if w in where))
        return STOP


def _bfs(f: LabeledForest) -> list[int]:
    seen = [False] * f.n
    order = []
    for s in range(f.n):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        for u in queue:
            order.append(u)
            for w in f.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return order


# ---------------------------------------------------------------------------
# lower-bound construction


@dataclass
class LowerBoundPlan:
    """Blueprint: a+1 copies of F, and for each i >= 1 a path of new vertices
    from ``hub_anchors[i-1]`` of the hub copy to ``far_anchors[i-1]`` of copy i."""

    sub_factory: Callable[[], CopyStrategy]
    a: int
    connector_lengths: tuple[int, ...]
    hub_anchors: tuple[int, ...]
    far_anchors: tuple[int, ...]
    outer: LabeledForest | None = None
    outer_lift: Callable[[int], int] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.a < 1:
            raise ValueError("a must be >= 1")
        for name in ("connector_lengths", "hub_anchors", "far_anchors"):
            if len(getattr(self, name)) != self.a:
                raise ValueError(f"{name} needs one entry per connector")
        if any(x < 1 for x in self.connector_lengths):
            raise ValueError("every connector path has at least one internal vertex")

    @property
    def copy_template(self) -> LabeledForest:
        return self.sub_factory().template

    def blueprint(self) -> LabeledForest:
        """The graph G: copy s occupies ids s*|F|.., connector vertices follow."""
        F = self.copy_template
        m = F.n
        edges = [(s * m + u, s * m + w) for s in range(self.a + 1) for u, w in F.sorted_edges()]
        nxt = (self.a + 1) * m
        for i in range(1, self.a + 1):
            prev = self.hub_anchors[i - 1]
            for _ in range(self.connector_lengths[i - 1]):
                edges.append((prev, nxt))
                prev = nxt
                nxt += 1
            edges.append((prev, i * m + self.far_anchors[i - 1]))
        return LabeledForest.from_edges(nxt, edges)


class LowerBoundPresenter(CopyStrategy):
    """Force ``sub guarantee + a`` by building the plan's blueprint adaptively.

    Copies are played one after another; the copy with the smallest maximum
    label becomes the hub; connector paths are then presented from the hub
    side outward.
    """

    name = "lowerbound"

    def __init__(self, plan: LowerBoundPlan):
        self.plan = plan
        self.F = plan.copy_template
        self.blue = plan.blueprint()
        self.template = plan.outer if plan.outer is not None else self.blue
        self.guarantee = plan.sub_factory().guarantee + plan.a
        self.reset()

    def reset(self) -> None:
        self.copy_ids: list[list[int]] = []
        self.copy_embed: list[list[int]] = []
        self.current: Completing | None = None
        self.slot_of_copy: list[int] | None = None
        self.selection: dict[str, Any] | None = None
        self.placed: list[tuple[int, int]] = []  # (own vertex, blueprint vertex) on connectors
        self.connector_queue: list[tuple[tuple[int, ...], int]] | None = None
        self.completion_ids: list[tuple[int, int]] = []  # (own vertex, outer vertex) after the blueprint
        self.n_presented = 0

    def describe(self) -> dict[str, Any]:
        return {"name": "lowerbound", "params": {"a": self.plan.a}}

    def embedding(self) -> list[int]:
        if self.slot_of_copy is None:
            raise RuntimeError("embedding is known only once the hub copy is chosen")
        m = self.F.n
        emb = [0] * self.n_presented
        for c, ids in enumerate(self.copy_ids):
            s = self.slot_of_copy[c]
            for local, fv in enumerate(self.copy_embed[c]):
                emb[ids[local]] = s * m + fv
        for own, bv in self.placed:
            emb[own] = bv
        if self.plan.outer is None:
            return emb
        done = {own for own, _ in self.completion_ids}
        lifted = [0 if i in done else self.plan.outer_lift(b) for i, b in enumerate(emb)]
        for own, ov in self.completion_ids:
            lifted[own] = ov
        return lifted

    def _emit(self, mv: Move) -> Move:
        self.n_presented += 1
        return mv

    def move(self, state: GameState) -> Move:
        if state.forest.n != self.n_presented:
            raise IllegalMove("lower-bound presenter sees vertices it did not present")
        plan = self.plan
        while len(self.copy_ids) < plan.a + 1 or (self.current is not None):
            if self.current is None:
                self.current = Completing(plan.sub_factory())
                self.copy_ids.append([])
            ids = self.copy_ids[-1]
            mv = self.current.move(_local_state(state, ids, self.F))
            if not mv.stop:
                ids.append(self.n_presented)
                return self._emit(Move(tuple(ids[a] for a in mv.attachments)))
            self.copy_embed.append(self.current.embedding())
            self.current = None
            if len(self.copy_ids) == plan.a + 1:
                break
        if self.slot_of_copy is None:
            self._choose_hub(state)
        if self.connector_queue:
            att, bv = self.connector_queue.pop(0)
            self.placed.append((self.n_presented, bv))
            resolved = tuple(self._own_of_blueprint(b) for b in att)
            return self._emit(Move(resolved))
        if plan.outer is None:
            return STOP
        return self._complete_outer()

    def _choose_hub(self, state: GameState) -> None:
        labels = state.forest.labels
        maxima = [max(labels[u] for u in ids) for ids in self.copy_ids]
        hub = min(range(len(maxima)), key=lambda c: (maxima[c], c))
        others = [c for c in range(len(maxima)) if c != hub]
        self.slot_of_copy = [0] * len(maxima)
        for s, c in enumerate(others, start=1):
            self.slot_of_copy[c] = s
        self.selection = {"copy_max_labels": maxima, "hub": hub}
        m = self.F.n
        self.blue_to_own: dict[int, int] = {}
        for c, ids in enumerate(self.copy_ids):
            s = self.slot_of_copy[c]
            for local, fv in enumerate(self.copy_embed[c]):
                self.blue_to_own[s * m + fv] = ids[local]
        queue = []
        nxt = (self.plan.a + 1) * m
        for i in range(1, self.plan.a + 1):
            prev = self.plan.hub_anchors[i - 1]
            length = self.plan.connector_lengths[i - 1]
            for t in range(length):
                att = [prev]
                if t == length - 1:
                    att.append(i * m + self.plan.far_anchors[i - 1])
                queue.append((tuple(att), nxt))
                prev = nxt
                nxt += 1
        self.connector_queue = queue

    def _own_of_blueprint(self, b: int) -> int:
        if b in self.blue_to_own:
            return self.blue_to_own[b]
        for own, bv in self.placed:
            if bv == b:
                return own
        raise KeyError(b)

    def _complete_outer(self) -> Move:
        emb = self.embedding()
        where = {t: i for i, t in enumerate(emb)}
        outer = self.plan.outer
        for t in _bfs(outer):
            if t not in where:
                self.completion_ids.append((self.n_presented, t))
                return self._emit(Move(tuple(where[w] for w in outer.adj[t] if w in where)))
        return STOP


def lowerbound_presenter(plan: LowerBoundPlan) -> LowerBoundPresenter:
    return LowerBoundPresenter(plan)


# ---------------------------------------------------------------------------
# concrete constructions


def _address_index(tree: fc.RootedTree) -> tuple[dict[tuple[int, ...], int], list[tuple[int, ...]]]:
    addr: list[tuple[int, ...]] = [()] * tree.n
    for u in tree.bfs_order():
        for i, c in enumerate(tree.children[u]):
            addr[c] = addr[u] + (i,)
    return {a: u for u, a in enumerate(addr)}, addr


def _star_tree_copy(k: int, r: int, complete: bool) -> CopyStrategy:
    """Copy strategy on T*_{k,r}; when ``complete`` it finishes the whole template."""
    if r == 0:
        return SingleVertex()
    if r % 2:
        inner = _star_tree_copy(k, r - 1, False)
        if not complete:
            return inner
        outer_tree = fc.build_star_tree(k, r)
        _, inner_addr = _address_index(fc.build_star_tree(k, r - 1))
        index, _ = _address_index(outer_tree)
        lift = [index[a] for a in inner_addr]
        return Completing(inner, outer_tree.to_forest(), lift)
    plan = star_tree_plan(k, r)
    if not complete:
        plan.outer = None
        plan.outer_lift = None
    return LowerBoundPresenter(plan)


def star_tree_plan(k: int, r: int) -> LowerBoundPlan:
    """Blueprint inside T*_{k,r} (r even >= 2): hub T*_{k,r/2-1}, connectors at depth r/2."""
    if r < 2 or r % 2:
        raise ValueError("star-tree plans need an even r >= 2")
    half = r // 2
    a = k**half
    F_tree = fc.build_star_tree(k, half - 1)
    _, f_addr = _address_index(F_tree)
    leaves = [u for u in F_tree.bfs_order() if not F_tree.children[u]]
    hub_anchors = tuple(leaf for leaf in leaves for _ in range(k))
    outer_tree = fc.build_star_tree(k, r)
    o_index, _ = _address_index(outer_tree)
    m = F_tree.n
    u_addrs = [f_addr[leaf] + (c,) for leaf in leaves for c in range(k)]

    def lift(b: int) -> int:
        if b < m:
            return o_index[f_addr[b]]
        if b < (a + 1) * m:
            s, fv = divmod(b, m)
            return o_index[u_addrs[s - 1] + (0,) + f_addr[fv]]
        return o_index[u_addrs[b - (a + 1) * m]]

    return LowerBoundPlan(
        sub_factory=lambda: _star_tree_copy(k, half - 1, True),
        a=a,
        connector_lengths=(1,) * a,
        hub_anchors=hub_anchors,
        far_anchors=(0,) * a,
        outer=outer_tree.to_forest(),
        outer_lift=lift,
    )


def star_tree_presenter(k: int, r: int) -> CopyStrategy:
    """Adversary on T*_{k,r} forcing at least k^{floor(r/2)} (r even)."""
    if k < 2 or r < 0:
        raise ValueError("star_tree_presenter needs k >= 2 and r >= 0")
    if r % 2:
        raise ValueError("star_tree_presenter takes an even r")
    p = _star_tree_copy(k, r, False)
    p.name = "startree"
    p.describe = lambda: {"name": "startree", "params": {"k": k, "r": r}}  # type: ignore[method-assign]
    return p


def star_tree_guarantee(k: int, r: int) -> int:
    """Bound the recursive construction certifies: 1 at r=0, odd r as r-1."""
    if r == 0:
        return 1
    if r % 2:
        return star_tree_guarantee(k, r - 1)
    return star_tree_guarantee(k, r // 2 - 1) + k ** (r // 2)


def spider_plan(a: int) -> LowerBoundPlan:
    return LowerBoundPlan(SingleVertex, a, (1,) * a, (0,) * a, (0,) * a)


def spider_presenter(a: int) -> LowerBoundPresenter:
    """Subdivided K_{1,a}; forces at least a+1."""
    p = LowerBoundPresenter(spider_plan(a))
    p.name = "spider"
    p.describe = lambda: {"name": "spider", "params": {"a": a}}  # type: ignore[method-assign]
    return p


def spider_class(a: int) -> ClassSpec:
    return ClassSpec.induced_of(spider_plan(a).blueprint())


def star_tree_class(k: int, r: int) -> ClassSpec:
    return ClassSpec.induced_of(fc.build_star_tree(k, r).to_forest())


@dataclass(frozen=True)
class ForcedValueCertificate:
    """A finished game together with the value its presenter promised to force."""

    transcript: Transcript
    claimed_minimum: int

    @property
    def holds(self) -> bool:
        return max_label(self.transcript) >= self.claimed_minimum


def certify(spec: ClassSpec, presenter: Presenter, ranker: Ranker) -> ForcedValueCertificate:
    """Play one game and pair it with the presenter's guarantee."""
    if presenter.guarantee is None:
        raise ValueError(f"presenter {presenter.name} promises nothing")
    return ForcedValueCertificate(play(spec, presenter, ranker), presenter.guarantee)


# ---------------------------------------------------------------------------
# random presenters


def random_member_tree(p: int, q: int, n: int, rng: random.Random) -> LabeledForest:
    """A random tree with <= p internal vertices, diameter <= q and about ``n`` vertices."""
    skeletons = skeleton_trees(p, q - 2) if p >= 1 and q >= 2 else []
    if not skeletons:
        return LabeledForest.from_edges(2, [(0, 1)]) if q >= 1 and n >= 2 else LabeledForest.from_edges(1, [])
    s = rng.choice(skeletons)
    edges = s.sorted_edges()
    nxt = s.n
    if s.n == 1:
        needs = [0, 0]
    else:
        needs = [u for u in range(s.n) if len(s.adj[u]) == 1]
    for u in needs:
        edges.append((u, nxt))
        nxt += 1
    while nxt < n:
        edges.append((rng.randrange(s.n), nxt))
        nxt += 1
    return LabeledForest.from_edges(nxt, edges)


class RandomPresenter(Presenter):
    """Seeded random Presenter.

    ``uniform`` mode draws uniformly from the symmetry-reduced legal moves.
    ``host`` mode fixes a hidden member of the class and reveals its vertices
    in random order, half the time preferring vertices next to what is
    already shown; this scales to large classes where enumerating moves does
    not. ``auto`` uses ``host`` for max-degree/diameter classes.
    """

    name = "random"

    def __init__(self, spec: ClassSpec, seed: int, n_max: int, mode: str = "auto"):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        if mode == "auto":
            mode = "host" if spec.variant == "maxdegdiam" else "uniform"
        if mode not in ("uniform", "host"):
            raise ValueError(f"unknown random presenter mode {mode!r}")
        self.spec = spec
        self.seed = seed
        self.n_max = n_max
        self.mode = mode
        self.reset()

    def describe(self) -> dict[str, Any]:
        return {"name": "random", "params": {"seed": self.seed, "n_max": self.n_max, "mode": self.mode}}

    def reset(self) -> None:
        self.rng = random.Random(self.seed)
        self.host: LabeledForest | None = None
        self.revealed: list[int] = []

    def _make_host(self) -> LabeledForest:
        s = self.spec
        if s.variant == "induced":
            return s.host
        if s.variant == "path":
            return fc.path_forest(s.n_max)
        if s.variant == "maxdegdiam":
            return fc.build_tkd(s.k, s.d)
        return random_member_tree(s.p, s.q, self.n_max, self.rng)

    def move(self, state: GameState) -> Move:
        cap = self.n_max if self.spec.n_cap is None else min(self.n_max, self.spec.n_cap)
        if state.forest.n >= cap:
            return STOP
        if self.mode == "uniform":
            moves = legal_moves(state).moves
            return self.rng.choice(moves) if moves else STOP
        if self.host is None:
            self.host = self._make_host()
        shown = set(self.revealed)
        rest = [h for h in range(self.host.n) if h not in shown]
        if not rest:
            return STOP
        frontier = [h for h in rest if any(w in shown for w in self.host.adj[h])]
        pool = frontier if frontier and self.rng.random() < 0.5 else rest
        h = self.rng.choice(pool)
        where = {t: i for i, t in enumerate(self.revealed)}
        self.revealed.append(h)
        return Move(tuple(where[w] for w in self.host.adj[h] if w in where))


def random_presenter(spec: ClassSpec, seed: int, n_max: int, mode: str = "auto") -> RandomPresenter:
    return RandomPresenter(spec, seed, n_max, mode)


# ---------------------------------------------------------------------------
# exhaustive search against a deterministic ranker


class _WorstCase:
    """Memoized max over Presenter lines of the final max label against one ranker."""

    def __init__(self, spec: ClassSpec, on_step: Callable[[GameState, int, GameState], None] | None = None):
        self.spec = spec
        self.memo: dict[tuple, tuple[int, Move]] = {}
        self.on_step = on_step
        self.edges = 0

    def value(self, state: GameState, ranker: Ranker) -> tuple[int, Move]:
        token = ranker.memo_token()
        # a stateful ranker's memory names vertex ids, so only exact boards are interchangeable
        board = fc.canonical_key(state.forest) if token is None else state.forest
        key = (board, token)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        best = (state.forest.max_label, STOP)
        for mv in legal_moves(state).moves:
            r = copy.deepcopy(ranker)
            shown = present(state, mv)
            lab = r.label(shown)
            nxt = assign(shown, lab)
            self.edges += 1
            if self.on_step is not None:
                self.on_step(shown, lab, nxt)
            val, _ = self.value(nxt, r)
            if val > best[0]:
                best = (val, mv)
        self.memo[key] = best
        return best


def exhaustive_worst_case(
    spec: ClassSpec,
    ranker: Ranker,
    on_step: Callable[[GameState, int, GameState], None] | None = None,
) -> tuple[int, int]:
    """Largest label ``ranker`` can be forced to use on ``spec`` (needs a finite cap).

    Every reachable (state, move) pair is visited once, so ``on_step`` sees
    each step of every possible game. Returns ``(value, steps_visited)``.
    Memoization treats isomorphic boards as equal for memoryless rankers
    (``memo_token() is None``) and exact boards plus token otherwise.
    """
    if spec.effective_cap() is None:
        raise ValueError("exhaustive search needs a finite class or an n_cap")
    ranker.reset()
    search = _WorstCase(spec, on_step)
    val, _ = search.value(GameState.initial(spec), ranker)
    return val, search.edges


class ExhaustivePresenter(Presenter):
    """Plays the line that maximizes the final label against a known deterministic ranker."""

    name = "exhaustive"

    def __init__(self, ranker: Ranker):
        self.ranker = ranker
        self.search: _WorstCase | None = None

    def reset(self) -> None:
        self.search = None

    def describe(self) -> dict[str, Any]:
        return {"name": "exhaustive", "params": {}}

    def move(self, state: GameState) -> Move:
        if self.search is None:
            if state.cls.effective_cap() is None:
                raise ValueError("exhaustive presenter needs a finite class or an n_cap")
            self.search = _WorstCase(state.cls)
        _, mv = self.search.value(state, copy.deepcopy(self.ranker))
        return mv


# ---------------------------------------------------------------------------
# registry

PRESENTERS = ("lowerbound", "startree", "spider", "random", "exhaustive")


def make_presenter(
    name: str,
    params: dict[str, Any] | None = None,
    *,
    spec: ClassSpec | None = None,
    ranker: Ranker | None = None,
) -> Presenter:
    params = {k: str(v) for k, v in (params or {}).items()}

    def take(key: str, default: str | None = None) -> str:
        if key in params:
            return params.pop(key)
        if default is None:
            raise ValueError(f"presenter {name!r} needs parameter {key!r}")
        return default

    if name == "spider":
        out: Presenter = spider_presenter(int(take("a")))
    elif name == "startree":
        out = star_tree_presenter(int(take("k")), int(take("r")))
    elif name == "lowerbound":
        # F = K_1 with a connectors of the given length: a subdivided star
        a = int(take("a"))
        length = int(take("length", "1"))
        out = LowerBoundPresenter(LowerBoundPlan(SingleVertex, a, (length,) * a, (0,) * a, (0,) * a))
    elif name == "random":
        if spec is None:
            raise ValueError("random presenter needs the class")
        out = RandomPresenter(spec, int(take("seed", "0")), int(take("n_max", str(spec.effective_cap() or 20))), take("mode", "auto"))
    elif name == "exhaustive":
        if ranker is None:
            raise ValueError("exhaustive presenter needs the ranker it plays against")
        out = ExhaustivePresenter(ranker)
    else:
        raise ValueError(f"unknown presenter {name!r}; choose from {list(PRESENTERS)}")
    if params:
        raise ValueError(f"unexpected parameters for {name!r}: {sorted(params)}")
    return out


def default_class_for(name: str, params: dict[str, Any]) -> ClassSpec | None:
    """The class an adversary's construction lives in, if it determines one."""
    if name == "spider":
        return spider_class(int(params["a"]))
    if name == "startree":
        return star_tree_class(int(params["k"]), int(params["r"]))
    if name == "lowerbound":
        a = int(params["a"])
        length = int(params.get("length", 1))
        return ClassSpec.induced_of(LowerBoundPlan(SingleVertex, a, (length,) * a, (0,) * a, (0,) * a).blueprint())
    return None


__all__ = [
    "CopyStrategy",
    "Completing",
    "ExhaustivePresenter",
    "ForcedValueCertificate",
    "LowerBoundPlan",
    "LowerBoundPresenter",
    "RandomPresenter",
    "SingleVertex",
    "certify",
    "default_class_for",
    "exhaustive_worst_case",
    "lowerbound_presenter",
    "make_presenter",
    "random_member_tree",
    "random_presenter",
    "spider_class",
    "spider_plan",
    "spider_presenter",
    "star_tree_class",
    "star_tree_guarantee",
    "star_tree_plan",
    "star_tree_presenter",
]
