"""The Presenter/Ranker protocol: graph classes, move legality, play and transcripts."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, NamedTuple

from . import forest as fc
from .errors import (
    BudgetExceeded,
    EmptyTranscript,
    IllegalMove,
    InvalidLabel,
    RankLabError,
    StrategyError,
)
from .forest import LabeledForest

log = logging.getLogger(__name__)

EXACT_PACKING_LIMIT = 64
DEFAULT_MAX_ROUNDS = 10**4
LEGALITY_BUDGET = 200_000

VARIANTS = ("maxdegdiam", "fewinternal", "induced", "path")


@dataclass(frozen=True)
class ClassSpec:
    """A graph class the game is played on, optionally capped in size.

    Use the named constructors rather than filling fields by hand.
    """

    variant: str
    k: int | None = None
    d: int | None = None
    p: int | None = None
    q: int | None = None
    host: LabeledForest | None = None
    n_max: int | None = None
    n_cap: int | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown class variant {self.variant!r}")
        if self.variant == "maxdegdiam" and (self.k is None or self.d is None or self.k < 2 or self.d < 0):
            raise ValueError("maxdegdiam needs k >= 2 and d >= 0")
        if self.variant == "fewinternal" and (self.p is None or self.q is None or self.p < 0 or self.q < 0):
            raise ValueError("fewinternal needs p >= 0 and q >= 0")
        if self.variant == "induced" and self.host is None:
            raise ValueError("induced needs a host forest")
        if self.variant == "path" and (self.n_max is None or self.n_max < 1):
            raise ValueError("path family needs n_max >= 1")
        if self.n_cap is not None and self.n_cap < 1:
            raise ValueError("n_cap must be >= 1")

    @classmethod
    def max_deg_diam(cls, k: int, d: int, n_cap: int | None = None) -> ClassSpec:
        return cls("maxdegdiam", k=k, d=d, n_cap=n_cap)

    @classmethod
    def few_internal(cls, p: int, q: int, n_cap: int | None = None) -> ClassSpec:
        return cls("fewinternal", p=p, q=q, n_cap=n_cap)

    @classmethod
    def induced_of(cls, host: LabeledForest, n_cap: int | None = None) -> ClassSpec:
        return cls("induced", host=host.unlabeled(), n_cap=n_cap)

    @classmethod
    def path_family(cls, n_max: int, n_cap: int | None = None) -> ClassSpec:
        return cls("path", n_max=n_max, n_cap=n_cap)

    def with_cap(self, n_cap: int | None) -> ClassSpec:
        return ClassSpec(self.variant, self.k, self.d, self.p, self.q, self.host, self.n_max, n_cap)

    @property
    def host_size(self) -> int | None:
        """Vertex count of the largest member, when the class is finite."""
        if self.variant == "induced":
            return self.host.n
        if self.variant == "path":
            return self.n_max
        if self.variant == "maxdegdiam":
            return fc.tkd_size(self.k, self.d)
        return None

    @property
    def max_new_degree(self) -> int | None:
        if self.variant == "maxdegdiam":
            return self.k
        if self.variant == "path":
            return 2
        if self.variant == "induced":
            return max((len(nb) for nb in self.host.adj), default=0)
        return None

    def effective_cap(self) -> int | None:
        caps = [c for c in (self.n_cap, self.host_size) if c is not None]
        return min(caps) if caps else None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"variant": self.variant}
        if self.variant == "maxdegdiam":
            out.update(k=self.k, d=self.d)
        elif self.variant == "fewinternal":
            out.update(p=self.p, q=self.q)
        elif self.variant == "induced":
            out.update(n=self.host.n, edges=[list(e) for e in self.host.sorted_edges()])
        else:
            out.update(n_max=self.n_max)
        out["n_cap"] = self.n_cap
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ClassSpec:
        v = data["variant"]
        cap = data.get("n_cap")
        if v == "maxdegdiam":
            return cls.max_deg_diam(int(data["k"]), int(data["d"]), cap)
        if v == "fewinternal":
            return cls.few_internal(int(data["p"]), int(data["q"]), cap)
        if v == "induced":
            host = LabeledForest.from_edges(int(data["n"]), [tuple(e) for e in data["edges"]])
            return cls.induced_of(host, cap)
        if v == "path":
            return cls.path_family(int(data["n_max"]), cap)
        raise ValueError(f"unknown class variant {v!r}")

    def __str__(self) -> str:
        if self.variant == "maxdegdiam":
            s = f"maxdegdiam:k={self.k},d={self.d}"
        elif self.variant == "fewinternal":
            s = f"fewinternal:p={self.p},q={self.q}"
        elif self.variant == "induced":
            s = f"induced:n={self.host.n},edges={self.host.sorted_edges()}"
        else:
            s = f"path:n_max={self.n_max}"
        return s if self.n_cap is None else f"{s},n_cap={self.n_cap}"


# ---------------------------------------------------------------------------
# legality


class _Membership:
    """Cached "is this unlabeled forest an induced subgraph of a class member" test."""

    def __init__(self, spec: ClassSpec):
        self.spec = spec.with_cap(None)
        self.cache: dict[bytes, bool] = {}
        self._host_index = None
        self._skeletons: list[LabeledForest] | None = None
        # host images of exact forests seen so far, so that a one-vertex
        # extension can usually be certified by extending a known embedding
        self.witness: dict[LabeledForest, tuple[int, ...]] = {}
        self.budget_misses = 0
        if spec.variant == "maxdegdiam":
            self.tkd_n = fc.tkd_size(spec.k, spec.d)
            self.tkd_alpha = fc.independence_number(fc.build_tkd(spec.k, spec.d))

    def host_index(self):
        if self._host_index is None:
            if self.spec.variant == "induced":
                self._host_index = fc._HostIndex(self.spec.host)
            else:
                self._host_index = fc._HostIndex(fc.build_tkd(self.spec.k, self.spec.d))
        return self._host_index

    def __call__(self, forest: LabeledForest) -> bool:
        plain = forest.unlabeled()
        key = fc.canonical_key(plain)
        hit = self.cache.get(key)
        if hit is None:
            hit = self._decide(plain)
            self.cache[key] = hit
        elif hit and self.spec.variant in ("induced", "maxdegdiam") and plain not in self.witness:
            self._extend_witness(plain)
        return hit

    def _extend_witness(self, f: LabeledForest) -> bool:
        if f.n == 0:
            return True
        prev = self.witness.get(f.induced(range(f.n - 1)))
        if prev is None:
            return False
        hx = self.host_index()
        used = set(prev)
        att = f.adj[f.n - 1]
        target = {prev[a] for a in att}
        # a new isolated vertex goes as far out as possible, leaving room near the centre
        pool = sorted(hx.nbrs[prev[att[0]]]) if att else sorted(range(hx.n), key=lambda x: (-hx.ecc[x], x))
        for x in pool:
            if x not in used and hx.nbrs[x] & used == target:
                self._remember(f, prev + (x,))
                return True
        return False

    def _remember(self, f: LabeledForest, image: tuple[int, ...]) -> None:
        if len(self.witness) > 100_000:
            self.witness.clear()
        self.witness[f] = image

    def _embeds(self, f: LabeledForest, budget: int | None) -> bool:
        if self._extend_witness(f):
            return True
        emb = fc.find_induced_embedding(f, self.host_index(), budget=budget)
        if emb is None:
            return False
        self._remember(f, tuple(emb[i] for i in range(f.n)))
        return True

    def _decide(self, f: LabeledForest) -> bool:
        v = self.spec.variant
        if f.n == 0:
            return True
        if v == "path":
            return _is_path_prefix(f, self.spec.n_max)
        if v == "induced":
            return self._embeds(f, None)
        if v == "maxdegdiam":
            return self._maxdegdiam(f)
        return fewinternal_member(f, self.spec.p, self.spec.q, self.skeletons())

    def _maxdegdiam(self, f: LabeledForest) -> bool:
        k, d = self.spec.k, self.spec.d
        comps = f.components()
        if f.n > self.tkd_n or len(comps) > self.tkd_alpha:
            return False
        for comp in comps:
            if any(len(f.adj[u]) > k for u in comp):
                return False
            if fc.diameter(f, comp[0]) > d:
                return False
        if self.tkd_n > EXACT_PACKING_LIMIT:
            return True
        try:
            return self._embeds(f, LEGALITY_BUDGET)
        except BudgetExceeded:
            self.budget_misses += 1
            report = log.warning if self.budget_misses == 1 else log.debug
            report("exact packing check over budget on %d vertices; accepting on necessary conditions", f.n)
            return True

    def skeletons(self) -> list[LabeledForest]:
        if self._skeletons is None:
            self._skeletons = skeleton_trees(self.spec.p, self.spec.q - 2)
        return self._skeletons


def _is_path_prefix(f: LabeledForest, n_max: int) -> bool:
    comps = f.components()
    for comp in comps:
        if any(len(f.adj[u]) > 2 for u in comp):
            return False
    return f.n + len(comps) - 1 <= n_max


def skeleton_trees(max_size: int, max_diam: int) -> list[LabeledForest]:
    """All trees (up to isomorphism) with 1..max_size vertices and diameter <= max_diam."""
    if max_size < 1 or max_diam < 0:
        return []
    out = [LabeledForest.from_edges(1, [])]
    level = list(out)
    for _ in range(max_size - 1):
        seen: dict[bytes, LabeledForest] = {}
        for t in level:
            for u in range(t.n):
                g = LabeledForest.from_edges(t.n + 1, t.sorted_edges() + [(u, t.n)])
                if fc.diameter(g, 0) <= max_diam:
                    seen.setdefault(fc.canonical_key(g), g)
        level = list(seen.values())
        out.extend(level)
    return out


def fewinternal_member(f: LabeledForest, p: int, q: int, skeletons: list[LabeledForest] | None = None) -> bool:
    """Whether ``f`` is an induced subgraph of a tree with <= p internal vertices and diameter <= q.

    Vertices of ``f`` that end up internal form a vertex cover ``A`` (holding
    every vertex of degree >= 2) whose induced forest must embed into the
    internal skeleton of the host; the rest become leaves. Isolated leaves
    need a skeleton vertex outside the image of ``A``.
    """
    n = f.n
    if n == 0:
        return True
    deg = [len(nb) for nb in f.adj]
    if n == 1:
        return True
    if n == 2 and deg[0] == 1 and q >= 1:
        return True
    if p == 0 or q < 2:
        return False
    if skeletons is None:
        skeletons = skeleton_trees(p, q - 2)
    must = [u for u in range(n) if deg[u] >= 2]
    if len(must) > p:
        return False
    optional = [u for u in range(n) if deg[u] <= 1]
    isolated = {u for u in range(n) if deg[u] == 0}
    for extra in range(0, p - len(must) + 1):
        for add in itertools.combinations(optional, extra):
            A = set(must) | set(add)
            if any(u not in A and w not in A for u in range(n) for w in f.adj[u]):
                continue
            spare_needed = any(u not in A for u in isolated)
            sub = f.induced(sorted(A)).unlabeled()
            for s in skeletons:
                if s.n < len(A) + (1 if spare_needed else 0):
                    continue
                if fc.find_induced_embedding(sub, s, budget=None) is not None:
                    return True
    return False


_MEMBERSHIP: dict[ClassSpec, _Membership] = {}


def membership(spec: ClassSpec) -> _Membership:
    key = spec.with_cap(None)
    m = _MEMBERSHIP.get(key)
    if m is None:
        m = _MEMBERSHIP[key] = _Membership(key)
    return m


# ---------------------------------------------------------------------------
# moves and states


@dataclass(frozen=True)
class Move:
    """A Presenter action: reveal a vertex adjacent to ``attachments``, or stop."""

    attachments: tuple[int, ...] = ()
    stop: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "attachments", tuple(sorted(set(self.attachments))))

    def to_json(self) -> list[int] | str:
        return "stop" if self.stop else list(self.attachments)


STOP = Move(stop=True)
ISOLATED = Move(())


@dataclass(frozen=True)
class GameState:
    forest: LabeledForest
    cls: ClassSpec
    round: int = 0

    @classmethod
    def initial(cls, spec: ClassSpec) -> GameState:
        return cls(LabeledForest.empty(), spec, 0)

    @property
    def pending(self) -> int | None:
        return self.forest.pending

    def component(self) -> list[int]:
        """Vertices of the pending vertex's component."""
        return self.forest.component(self.pending)


def is_legal_extension(state: GameState, move: Move) -> bool:
    if state.pending is not None:
        raise IllegalMove("a vertex is still waiting for its label")
    if move.stop:
        return True
    try:
        nxt = fc.add_vertex(state.forest, move.attachments)
    except fc.ForestError:
        return False
    cap = state.cls.n_cap
    if cap is not None and nxt.n > cap:
        return False
    return membership(state.cls)(nxt)


class LegalMoves(NamedTuple):
    moves: list[Move]
    truncated: bool


def _candidate_moves(state: GameState) -> Iterator[Move]:
    """Attachment sets up to symmetry, by increasing size.

    Isomorphic components are interchangeable and vertices in one automorphism
    orbit are interchangeable, so a move is a multiset of orbit choices per
    isomorphism class of components.
    """
    f = state.forest
    max_deg = state.cls.max_new_degree
    groups: dict[bytes, list[list[int]]] = {}
    for comp in f.components():
        groups.setdefault(fc._component_code(f, comp), []).append(comp)
    per_group: list[dict[int, list[list[int]]]] = []
    for code in sorted(groups):
        members = groups[code]
        orbit_lists = [fc.rooted_orbits(f, comp) for comp in members]
        n_orbits = len(orbit_lists[0])
        by_size: dict[int, list[list[int]]] = {}
        top = len(members) if max_deg is None else min(len(members), max_deg)
        for size in range(top + 1):
            by_size[size] = [
                [orbit_lists[i][o][0] for i, o in enumerate(combo)]
                for combo in itertools.combinations_with_replacement(range(n_orbits), size)
            ]
        per_group.append(by_size)
    total = len(f.components()) if max_deg is None else min(len(f.components()), max_deg)

    def spread(g: int, remaining: int) -> Iterator[list[int]]:
        if g == len(per_group):
            if remaining == 0:
                yield []
            return
        for c in range(min(remaining, max(per_group[g])) + 1):
            for head in per_group[g][c]:
                for tail in spread(g + 1, remaining - c):
                    yield head + tail

    for size in range(total + 1):
        for att in spread(0, size):
            yield Move(tuple(att))


def legal_moves(state: GameState, limit: int | None = None) -> LegalMoves:
    """Legal moves with distinct successor canonical keys, fewest attachments first."""
    if state.pending is not None:
        raise IllegalMove("a vertex is still waiting for its label")
    cap = state.cls.effective_cap()
    if cap is not None and state.forest.n >= cap:
        return LegalMoves([], False)
    member = membership(state.cls)
    seen: set[bytes] = set()
    out: list[Move] = []
    for mv in _candidate_moves(state):
        nxt = fc.add_vertex(state.forest, mv.attachments)
        key = fc.canonical_key(nxt)
        if key in seen:
            continue
        seen.add(key)
        if member(nxt):
            if limit is not None and len(out) >= limit:
                return LegalMoves(out, True)
            out.append(mv)
    return LegalMoves(out, False)


def has_legal_move(state: GameState) -> bool:
    return bool(legal_moves(state, limit=1).moves)


def present(state: GameState, move: Move) -> GameState:
    if move.stop:
        raise IllegalMove("stop is not a presentation")
    if not is_legal_extension(state, move):
        raise IllegalMove(f"attachments {list(move.attachments)} leave the class {state.cls}")
    return GameState(fc.add_vertex(state.forest, move.attachments), state.cls, state.round)


def assign(state: GameState, label: int) -> GameState:
    v = state.pending
    if v is None:
        raise InvalidLabel("no vertex is waiting for a label")
    if not isinstance(label, int) or label < 1:
        raise InvalidLabel(f"labels are positive integers, got {label!r}")
    if not fc._branches_valid(state.forest, v, None):
        raise InvalidLabel("existing labels are not a ranking")
    forbidden, floor = fc.label_constraints(state.forest, v)
    if label in forbidden or label <= floor:
        raise InvalidLabel(f"label {label} on vertex {v} breaks the ranking")
    return GameState(state.forest.with_label(v, label), state.cls, state.round + 1)


# ---------------------------------------------------------------------------
# strategies


class Presenter:
    """Base class for Presenter strategies. Subclasses override ``move``."""

    name = "presenter"
    guarantee: int | None = None

    def reset(self) -> None:
        pass

    def move(self, state: GameState) -> Move:
        raise NotImplementedError

    def describe(self) -> dict[str, Any] | None:
        return None


class Ranker:
    """Base class for Ranker strategies. Subclasses override ``label``."""

    name = "ranker"

    def reset(self) -> None:
        pass

    def label(self, state: GameState) -> int:
        raise NotImplementedError

    def memo_token(self) -> Any:
        """Hashable summary of private memory that affects future labels."""
        return None

    def describe(self) -> dict[str, Any] | None:
        return None


# ---------------------------------------------------------------------------
# transcripts


@dataclass(frozen=True)
class Event:
    move: Move
    label: int | None


@dataclass(frozen=True)
class Transcript:
    cls: ClassSpec
    events: tuple[Event, ...] = ()
    seed: int | None = None
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def rounds(self) -> int:
        return sum(1 for e in self.events if not e.move.stop)

    def labels(self) -> list[int]:
        return [e.label for e in self.events if not e.move.stop]

    def states(self, *, check_legal: bool = True) -> Iterator[GameState]:
        """Replay from the empty forest, yielding the state after every labeled round.

        Raises ``IllegalMove``/``InvalidLabel`` annotated with the round number.
        """
        state = GameState.initial(self.cls)
        yield state
        for i, ev in enumerate(self.events, start=1):
            if ev.move.stop:
                return
            try:
                if check_legal:
                    state = present(state, ev.move)
                else:
                    state = GameState(fc.add_vertex(state.forest, ev.move.attachments), state.cls, state.round)
                state = assign(state, ev.label)
            except RankLabError as exc:
                exc.round = i
                raise
            yield state

    def final_state(self, *, check_legal: bool = True) -> GameState:
        state = None
        for state in self.states(check_legal=check_legal):
            pass
        return state

    def prefix(self, rounds: int) -> Transcript:
        return Transcript(self.cls, self.events[:rounds], self.seed, dict(self.meta))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "class": self.cls.to_dict(),
            "seed": self.seed,
            "events": [{"attach": e.move.to_json(), "label": e.label} for e in self.events],
        }
        for key in ("presenter", "ranker"):
            if key in self.meta:
                out[key] = self.meta[key]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Transcript:
        events = []
        for ev in data["events"]:
            att = ev["attach"]
            mv = STOP if att == "stop" else Move(tuple(int(a) for a in att))
            lab = ev.get("label")
            events.append(Event(mv, None if lab is None else int(lab)))
        meta = {k: data[k] for k in ("presenter", "ranker") if k in data}
        return cls(ClassSpec.from_dict(data["class"]), tuple(events), data.get("seed"), meta)

    @classmethod
    def from_json(cls, text: str) -> Transcript:
        return cls.from_dict(json.loads(text))


def max_label(t: Transcript) -> int:
    labels = [x for x in t.labels() if x is not None]
    if not labels:
        raise EmptyTranscript("transcript has no labeled rounds")
    return max(labels)


def play(
    spec: ClassSpec,
    presenter: Presenter,
    ranker: Ranker,
    max_rounds: int | None = None,
    *,
    seed: int | None = None,
) -> Transcript:
    """Alternate Presenter and Ranker until Presenter stops or the cap is reached.

    Presenter moves are checked for legality; a presenter with no legal move
    left is expected to return ``STOP``.
    """
    if max_rounds is None:
        max_rounds = spec.n_cap if spec.n_cap is not None else DEFAULT_MAX_ROUNDS
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    presenter.reset()
    ranker.reset()
    meta = {k: v for k, v in (("presenter", presenter.describe()), ("ranker", ranker.describe())) if v}
    state = GameState.initial(spec)
    events: list[Event] = []

    def partial() -> Transcript:
        return Transcript(spec, tuple(events), seed, meta)

    cap = spec.effective_cap()
    while len(events) < max_rounds:
        if cap is not None and state.forest.n >= cap:
            break
        mv = presenter.move(state)
        if mv.stop:
            events.append(Event(STOP, None))
            break
        if not is_legal_extension(state, mv):
            raise StrategyError(
                f"presenter {presenter.name} made illegal move {list(mv.attachments)} in round {len(events) + 1}",
                round=len(events) + 1,
                transcript=partial(),
            )
        state = GameState(fc.add_vertex(state.forest, mv.attachments), spec, state.round)
        lab = ranker.label(state)
        try:
            state = assign(state, lab)
        except InvalidLabel as exc:
            raise StrategyError(
                f"ranker {ranker.name} gave invalid label {lab} in round {len(events) + 1}: {exc}",
                round=len(events) + 1,
                transcript=partial(),
            ) from exc
        events.append(Event(mv, lab))
    return partial()
