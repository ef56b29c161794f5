"""Ranker strategies: greedy, Rankcomplete for T_{k,d}, Ranksmall, Rankdoublestar.

Each strategy is available both as a pure function of the game state (plus
explicit memory where needed) and as a ``Ranker`` object for ``play``.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from . import forest as fc
from .errors import ClassViolation, ExistenceError, MultiCaseError, NoCaseError
from .game import ClassSpec, GameState, Ranker, Transcript, membership, present

# ---------------------------------------------------------------------------
# greedy


def greedy_label(state: GameState) -> int:
    """Smallest label that keeps the labeling a ranking."""
    v = _pending(state)
    return fc.smallest_valid_label(state.forest, v)


def _pending(state: GameState) -> int:
    v = state.pending
    if v is None:
        raise ValueError("no vertex is waiting for a label")
    return v


class GreedyRanker(Ranker):
    name = "greedy"

    def label(self, state: GameState) -> int:
        return greedy_label(state)

    def describe(self) -> dict[str, Any]:
        return {"name": "greedy", "params": {}}


class RandomRanker(Ranker):
    """Uniform choice among valid labels up to the current maximum plus ``slack``."""

    name = "random"

    def __init__(self, seed: int = 0, slack: int = 1):
        self.seed = seed
        self.slack = slack
        self.rng = random.Random(seed)

    def reset(self) -> None:
        self.rng = random.Random(self.seed)

    def label(self, state: GameState) -> int:
        v = _pending(state)
        top = state.forest.max_label + self.slack
        return self.rng.choice(fc.candidate_labels(state.forest, v, max(top, 1)))

    def describe(self) -> dict[str, Any]:
        return {"name": "random", "params": {"seed": self.seed, "slack": self.slack}}


# ---------------------------------------------------------------------------
# Rankcomplete


@dataclass(frozen=True)
class LabelSegments:
    """The three consecutive label intervals X < Y < Z used on T_{k,d}."""

    j: int
    X: range
    Y: range
    Z: range

    @classmethod
    def for_tree(cls, k: int, d: int) -> LabelSegments:
        j = d // 3
        low = fc.star_tree_size(k - 1, j - 1)
        mid = fc.star_tree_size(k - 1, j)
        return cls(j, range(1, low + 1), range(low + 1, mid + 1), range(mid + 1, 3 * mid + 1))

    @property
    def top(self) -> int:
        return self.Z[-1]

    def segment_of(self, label: int) -> str | None:
        for name in ("X", "Y", "Z"):
            if label in getattr(self, name):
                return name
        return None


class CaseTag(enum.Enum):
    I = "I"
    II = "II"
    III = "III"


def f_ab(state: GameState, v: int, A: Iterable[int], B: Iterable[int]) -> int | None:
    """Smallest label of ``A`` completing a ranking of the B-region around ``v``."""
    region = fc.subtree_region(state.forest, v, B)
    forbidden, floor = fc.label_constraints(state.forest, v, region)
    for a in sorted(A):
        if a > floor and a not in forbidden:
            return a
    return None


@dataclass(frozen=True)
class CaseFacts:
    """Inputs to the case table for one presented vertex."""

    ecc: int
    region_x: frozenset[int]
    embeds: bool
    whole: bool
    y_separator: int | None

    def tags(self, d: int, j: int) -> list[CaseTag]:
        out = []
        far = self.ecc >= d - j
        if self.embeds and (self.whole or self.y_separator is not None):
            out.append(CaseTag.I)
        if far and self.y_separator is None:
            out.append(CaseTag.II)
        if not far and (not self.embeds or not self.whole):
            out.append(CaseTag.III)
        return out


def case_facts(state: GameState, k: int, d: int, seg: LabelSegments | None = None) -> CaseFacts:
    seg = seg or LabelSegments.for_tree(k, d)
    f = state.forest
    v = _pending(state)
    comp = f.component(v)
    region = fc.subtree_region(f, v, seg.X)
    boundary = {w for u in region for w in f.adj[u] if w not in region}
    sep = None
    if len(boundary) == 1:
        (u,) = boundary
        if f.labels[u] in seg.Y:
            sep = u
    return CaseFacts(
        ecc=fc.eccentricity(f, v),
        region_x=region,
        embeds=fc.embeds_in_star_tree(f, k - 1, seg.j - 1, region),
        whole=len(region) == len(comp),
        y_separator=sep,
    )


def rankcomplete_case(state: GameState, k: int, d: int) -> CaseTag:
    if d < 6 or k < 3:
        raise ValueError("the case table applies to k >= 3 and d >= 6")
    seg = LabelSegments.for_tree(k, d)
    tags = case_facts(state, k, d, seg).tags(d, seg.j)
    if not tags:
        raise NoCaseError(f"no case applies to vertex {state.pending}")
    if len(tags) > 1:
        raise MultiCaseError(f"cases {[t.value for t in tags]} all apply to vertex {state.pending}")
    return tags[0]


def small_tree_params(k: int, d: int) -> tuple[int, int]:
    """(internal vertex count, diameter) of T_{k,d}; used to route d <= 5 to Ranksmall."""
    t = fc.build_tkd(k, d)
    return sum(1 for nb in t.adj if len(nb) >= 2), d


def rankcomplete_label(state: GameState, k: int, d: int) -> int:
    if d <= 5:
        _, q = small_tree_params(k, d)
        return ranksmall_label(state, q)
    seg = LabelSegments.for_tree(k, d)
    tag = rankcomplete_case(state, k, d)
    v = _pending(state)
    if tag is CaseTag.I:
        out = f_ab(state, v, seg.X, seg.X)
    elif tag is CaseTag.II:
        out = f_ab(state, v, seg.Y, list(seg.X) + list(seg.Y))
    else:
        out = f_ab(state, v, seg.Z, range(1, seg.top + 1))
    if out is None:
        raise ExistenceError(f"case {tag.value} has no completing label for vertex {v}")
    return out


class RankCompleteRanker(Ranker):
    name = "rankcomplete"

    def __init__(self, k: int, d: int):
        if k < 3:
            raise ValueError("rankcomplete needs k >= 3")
        self.k = k
        self.d = d

    def label(self, state: GameState) -> int:
        return rankcomplete_label(state, self.k, self.d)

    def describe(self) -> dict[str, Any]:
        return {"name": "rankcomplete", "params": {"k": self.k, "d": self.d}}


# ---------------------------------------------------------------------------
# Ranksmall


def ranksmall_label(state: GameState, q: int) -> int:
    f = state.forest
    v = _pending(state)
    comp = f.component(v)
    if len(comp) == 1:
        return q + 1
    m = max(f.labels[u] for u in comp if u != v)
    below = fc.candidate_labels(f, v, m - 1)
    return below[-1] if below else m + 1


class RankSmallRanker(Ranker):
    name = "ranksmall"

    def __init__(self, q: int, p: int | None = None):
        self.q = q
        self.p = p

    def label(self, state: GameState) -> int:
        return ranksmall_label(state, self.q)

    def describe(self) -> dict[str, Any]:
        params = {"q": self.q}
        if self.p is not None:
            params["p"] = self.p
        return {"name": "ranksmall", "params": params}


# ---------------------------------------------------------------------------
# Rankdoublestar

FORCED_LEAF = "forced-leaf"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class DoubleStarMemory:
    first: int | None = None
    v_seen: int | None = None
    v_prime_seen: int | None = None
    case: str | None = None
    classification: tuple[tuple[int, str], ...] = field(default=())

    def classify(self, u: int, kind: str) -> DoubleStarMemory:
        return replace(self, classification=self.classification + ((u, kind),))

    def token(self) -> tuple:
        return (self.first is not None, self.v_seen is not None, self.v_prime_seen is not None, self.case)


_TREE23 = ClassSpec.few_internal(2, 3)

# label for undetermined vertices after v, by the case fixed when v arrived
_LATER_UNDETERMINED = {"A": 2, "B": 3}


def doublestar_label(state: GameState, memory: DoubleStarMemory) -> tuple[int, DoubleStarMemory]:
    """One step of Rankdoublestar. Cases A-D follow the order the rules are stated:
    A: G(v) is a single edge; B: more than one edge with v next to the 3;
    C: exactly one edge with v next to the 3; D: v not next to the 3.
    """
    f = state.forest
    u = _pending(state)
    if not membership(_TREE23)(f):
        raise ClassViolation("the board no longer extends to a tree of diameter at most 3")
    nbrs = f.adj[u]
    if memory.first is None:
        return 3, replace(memory, first=u)
    if memory.v_seen is None:
        if not nbrs:
            return 2, memory
        edges = len(nbrs)
        next_to_3 = memory.first in nbrs
        if f.n == 2 and edges == 1:
            case, lab = "A", 4
        elif edges > 1 and next_to_3:
            case, lab = "B", 4
        elif edges == 1 and next_to_3:
            case, lab = "C", 2
        else:
            # also covers a connected G(v) with v away from the 3, which the
            # class rules out; the residual rule applies either way
            case, lab = "D", 3
        return lab, replace(memory, v_seen=u, case=case).classify(u, UNDETERMINED)
    connected = len(f.components()) == 1
    if memory.v_prime_seen is None:
        if fc.diameter(f, u) >= 3:
            mem = replace(memory, v_prime_seen=u)
            if len(nbrs) == 1:
                return 1, mem.classify(u, FORCED_LEAF)
            return _undetermined_label(memory.case), mem.classify(u, UNDETERMINED)
        if not connected:
            return 1, memory.classify(u, FORCED_LEAF)
        if memory.case not in _LATER_UNDETERMINED:
            raise ClassViolation(f"vertex {u} cannot be undetermined in case {memory.case}")
        return _LATER_UNDETERMINED[memory.case], memory.classify(u, UNDETERMINED)
    return 1, memory.classify(u, FORCED_LEAF)


def _undetermined_label(case: str | None) -> int:
    return _LATER_UNDETERMINED.get(case, 4)


class DoubleStarRanker(Ranker):
    name = "doublestar"

    def __init__(self) -> None:
        self.memory = DoubleStarMemory()

    def reset(self) -> None:
        self.memory = DoubleStarMemory()

    def label(self, state: GameState) -> int:
        lab, self.memory = doublestar_label(state, self.memory)
        return lab

    def memo_token(self) -> tuple:
        return self.memory.token()

    def describe(self) -> dict[str, Any]:
        return {"name": "doublestar", "params": {}}


# ---------------------------------------------------------------------------
# registry


def _int_params(params: dict[str, Any], *names: str, optional: Iterable[str] = ()) -> dict[str, int]:
    out = {}
    allowed = set(names) | set(optional)
    for key in params:
        if key not in allowed:
            raise ValueError(f"unexpected parameter {key!r}")
    for name in names:
        if name not in params:
            raise ValueError(f"missing parameter {name!r}")
        out[name] = int(params[name])
    for name in optional:
        if name in params:
            out[name] = int(params[name])
    return out


def make_ranker(name: str, params: dict[str, Any] | None = None) -> Ranker:
    """Build a ranker from its registry name and ``key=value`` parameters."""
    params = dict(params or {})
    if name == "greedy":
        _int_params(params)
        return GreedyRanker()
    if name == "rankcomplete":
        return RankCompleteRanker(**_int_params(params, "k", "d"))
    if name == "ranksmall":
        return RankSmallRanker(**_int_params(params, "q", optional=("p",)))
    if name == "doublestar":
        _int_params(params)
        return DoubleStarRanker()
    if name == "random":
        return RandomRanker(**_int_params(params, optional=("seed", "slack")))
    raise ValueError(f"unknown ranker {name!r}; choose from {sorted(RANKERS)}")


RANKERS = ("greedy", "rankcomplete", "ranksmall", "doublestar", "random")


def replay_ranker(ranker: Ranker, transcript: Transcript) -> list[tuple[int, int, int]]:
    """Feed a transcript's states to a fresh ranker; return (round, recorded, produced) mismatches."""
    ranker.reset()
    bad = []
    state = GameState.initial(transcript.cls)
    for rnd, ev in enumerate(transcript.events, start=1):
        if ev.move.stop:
            break
        state = present(state, ev.move)
        got = ranker.label(state)
        if got != ev.label:
            bad.append((rnd, ev.label, got))
        state = GameState(state.forest.with_label(state.pending, ev.label), state.cls, state.round + 1)
    return bad


# ---------------------------------------------------------------------------
# post-hoc transcript checks


@dataclass(frozen=True)
class LemmaViolation:
    lemma: str
    round: int
    detail: str

    def __str__(self) -> str:
        return f"round {self.round}: lemma {self.lemma} failed ({self.detail})"


def _labeled_steps(transcript: Transcript):
    """Yield (round, presented state, label) for each labeled round."""
    state = GameState.initial(transcript.cls)
    for rnd, ev in enumerate(transcript.events, start=1):
        if ev.move.stop:
            return
        shown = present(state, ev.move)
        yield rnd, shown, ev.label
        state = GameState(shown.forest.with_label(shown.pending, ev.label), shown.cls, shown.round + 1)


def _on_common_path(dist: dict[int, dict[int, int]], a: int, b: int, c: int) -> bool:
    """In a tree, three vertices share a path iff one lies between the other two."""
    return (
        dist[a][b] + dist[b][c] == dist[a][c]
        or dist[b][a] + dist[a][c] == dist[b][c]
        or dist[a][c] + dist[c][b] == dist[a][b]
    )


def _sides(f: fc.LabeledForest, y: int) -> list[set[int]]:
    out = []
    for w in f.adj[y]:
        side = {w}
        stack = [w]
        while stack:
            u = stack.pop()
            for x in f.adj[u]:
                if x != y and x not in side:
                    side.add(x)
                    stack.append(x)
        out.append(side)
    return out


def rankcomplete_lemmas(transcript: Transcript, k: int, d: int) -> list[LemmaViolation]:
    """Check the structural facts a Rankcomplete game must satisfy, round by round.

    ``separate``: a vertex cut off from H(y) by a Y-labeled y carries an X label,
    where H(y) is the widest branch around y when y arrived.
    ``yyy``: no path of T_{X∪Y}(v) holds three Y labels.
    ``zyy``: a Y label in T(v) implies an earlier Z label there, and no path
    holds such a Z vertex together with two Y vertices of T_{X∪Y}(v).
    ``z``: a fresh Z label m is given to a leaf of a subtree of T_{X∪Z}(v)
    holding every smaller Z label.
    ``max``: no label exceeds the top of Z.
    """
    if d < 6:
        p, q = small_tree_params(k, d)
        return ranksmall_lemmas(transcript, q, p)
    seg = LabelSegments.for_tree(k, d)
    X, Y, Z = set(seg.X), set(seg.Y), set(seg.Z)
    hub: dict[int, set[int]] = {}
    out: list[LemmaViolation] = []
    for rnd, shown, lab in _labeled_steps(transcript):
        f0 = shown.forest
        v = shown.pending
        if lab > seg.top:
            out.append(LemmaViolation("max", rnd, f"label {lab} > {seg.top}"))
        if lab in Y:
            sides = _sides(f0, v)
            if sides:
                widest = max(sides, key=lambda s: (fc.diameter(f0, next(iter(s)), s), -min(s)))
                hub[v] = widest
        if lab in Z:
            before = {f0.labels[u] for u in f0.component(v) if u != v}
            if lab not in before and lab > seg.Z[0]:
                need = set(range(seg.Z[0], lab))
                order = sorted(fc.subtree_region(f0, v, X | Z))
                sub = f0.induced(order)
                branches = _sides(sub, order.index(v))
                if not any(need <= {sub.labels[u] for u in side} for side in branches):
                    out.append(LemmaViolation("z", rnd, f"fresh label {lab} at vertex {v} misses a smaller Z label"))
        f = f0.with_label(v, lab)
        comp = f.component(v)
        comp_set = set(comp)
        for y, h in hub.items():
            if y not in comp_set:
                continue
            for side in _sides(f, y):
                if side & h:
                    continue
                bad = [u for u in side if f.labels[u] not in X]
                if bad:
                    out.append(LemmaViolation("separate", rnd, f"vertex {bad[0]} cut off by {y} has label {f.labels[bad[0]]}"))
        region = fc.subtree_region(f, v, X | Y)
        ys = sorted(u for u in region if f.labels[u] in Y)
        # the Z side speaks about labels already present when v arrived
        zs = sorted(u for u in comp if f.labels[u] in Z and u != v)
        if any(f.labels[u] in Y for u in comp) and not zs:
            out.append(LemmaViolation("zyy", rnd, "a Y label without any Z label in the component"))
        if len(ys) >= 2:
            dist = {u: fc.bfs_distances(f, u) for u in ys}
            for a in range(len(ys)):
                for b in range(a + 1, len(ys)):
                    for c in range(b + 1, len(ys)):
                        if _on_common_path(dist, ys[a], ys[b], ys[c]):
                            out.append(LemmaViolation("yyy", rnd, f"Y vertices {ys[a]}, {ys[b]}, {ys[c]} share a path"))
            for z in zs:
                dist[z] = fc.bfs_distances(f, z)
                for a in range(len(ys)):
                    for b in range(a + 1, len(ys)):
                        if _on_common_path(dist, z, ys[a], ys[b]):
                            out.append(LemmaViolation("zyy", rnd, f"Z vertex {z} shares a path with Y vertices {ys[a]}, {ys[b]}"))
    return out


def ranksmall_lemmas(transcript: Transcript, q: int, p: int | None = None) -> list[LemmaViolation]:
    """``Leaf``: a leaf joining a nontrivial component gets a label below its max.
    ``bound``: with ``p`` given, no label exceeds p+q+1."""
    out = []
    for rnd, shown, lab in _labeled_steps(transcript):
        f = shown.forest
        v = shown.pending
        comp = f.component(v)
        if f.degree(v) == 1 and len(comp) >= 2:
            m = max(f.labels[u] for u in comp if u != v)
            if lab >= m:
                out.append(LemmaViolation("Leaf", rnd, f"leaf {v} got {lab}, component max {m}"))
        if p is not None and lab > p + q + 1:
            out.append(LemmaViolation("bound", rnd, f"label {lab} > p+q+1 = {p + q + 1}"))
    return out
