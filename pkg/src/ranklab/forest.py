"""Labeled forests: the game board, ranking checks, tree metrics and generators.

Vertices are dense integers ``0..n-1``. Labels are positive integers; ``0``
marks an unlabeled vertex (at most one exists during a game, the one Presenter
just revealed). All values are immutable, every operation returns a new forest.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    CycleError,
    ForestError,
    PendingVertexError,
    SizeLimit,
    UnknownVertex,
    UnlabeledVertex,
)

UNLABELED = 0
DEFAULT_SIZE_CAP = 10**6


class LabeledForest:
    """Immutable forest with a partial labeling."""

    __slots__ = ("adj", "labels", "_comp")

    def __init__(self, adj: Sequence[Sequence[int]], labels: Sequence[int]):
        if len(adj) != len(labels):
            raise ForestError("adjacency and labels differ in length")
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(nb) for nb in adj)
        self.labels: tuple[int, ...] = tuple(int(x) for x in labels)
        self._comp: tuple[int, ...] | None = None

    # construction -----------------------------------------------------

    @classmethod
    def empty(cls) -> LabeledForest:
        return cls((), ())

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[int] | None = None,
    ) -> LabeledForest:
        """Build a forest, rejecting cycles, loops and out-of-range ids."""
        adj: list[list[int]] = [[] for _ in range(n)]
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            for x in (u, v):
                if not 0 <= x < n:
                    raise UnknownVertex(x)
            if u == v:
                raise CycleError(f"self-loop at {u}")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise CycleError(f"edge {u}-{v} closes a cycle")
            parent[ru] = rv
            adj[u].append(v)
            adj[v].append(u)
        if labels is None:
            labels = [UNLABELED] * n
        if any(x < 0 for x in labels):
            raise ForestError("labels must be non-negative (0 = unlabeled)")
        return cls([sorted(nb) for nb in adj], labels)

    # basic accessors --------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, nb in enumerate(self.adj) for v in nb if u < v)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def label(self, v: int) -> int:
        self._check(v)
        return self.labels[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check(v)
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    @property
    def pending(self) -> int | None:
        """The unlabeled vertex, if any."""
        for v, x in enumerate(self.labels):
            if x == UNLABELED:
                return v
        return None

    @property
    def is_fully_labeled(self) -> bool:
        return UNLABELED not in self.labels

    @property
    def max_label(self) -> int:
        return max(self.labels, default=0)

    def _check(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self.adj):
            raise UnknownVertex(v)

    # components -------------------------------------------------------

    def component_ids(self) -> tuple[int, ...]:
        if self._comp is None:
            comp = [-1] * self.n
            c = 0
            for s in range(self.n):
                if comp[s] >= 0:
                    continue
                comp[s] = c
                stack = [s]
                while stack:
                    u = stack.pop()
                    for w in self.adj[u]:
                        if comp[w] < 0:
                            comp[w] = c
                            stack.append(w)
                c += 1
            self._comp = tuple(comp)
        return self._comp

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(self.component_ids()):
            groups.setdefault(c, []).append(v)
        return list(groups.values())

    def component(self, v: int) -> list[int]:
        self._check(v)
        c = self.component_ids()[v]
        return [u for u, cu in enumerate(self.component_ids()) if cu == c]

    # derived forests --------------------------------------------------

    def with_label(self, v: int, label: int) -> LabeledForest:
        self._check(v)
        labels = list(self.labels)
        labels[v] = label
        out = LabeledForest.__new__(LabeledForest)
        out.adj = self.adj
        out.labels = tuple(labels)
        out._comp = self._comp
        return out

    def with_labels(self, labels: Sequence[int]) -> LabeledForest:
        out = LabeledForest.__new__(LabeledForest)
        if len(labels) != self.n:
            raise ForestError("label vector has wrong length")
        out.adj = self.adj
        out.labels = tuple(labels)
        out._comp = self._comp
        return out

    def unlabeled(self) -> LabeledForest:
        return self.with_labels([UNLABELED] * self.n)

    def induced(self, vertices: Sequence[int]) -> LabeledForest:
        """Induced subforest; vertex ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        adj = [[index[w] for w in self.adj[v] if w in index] for v in vertices]
        return LabeledForest([sorted(a) for a in adj], [self.labels[v] for v in vertices])

    def relabeled(self, perm: Sequence[int]) -> LabeledForest:
        """Rename vertex ``v`` to ``perm[v]``."""
        if sorted(perm) != list(range(self.n)):
            raise ForestError("relabeling needs a permutation of the vertex ids")
        inv = [0] * self.n
        for v, p in enumerate(perm):
            inv[p] = v
        adj = [sorted(perm[w] for w in self.adj[inv[i]]) for i in range(self.n)]
        return LabeledForest(adj, [self.labels[inv[i]] for i in range(self.n)])

    def disjoint_union(self, other: LabeledForest) -> LabeledForest:
        off = self.n
        adj = list(self.adj) + [tuple(w + off for w in nb) for nb in other.adj]
        return LabeledForest(adj, self.labels + other.labels)

    # dunder -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledForest):
            return NotImplemented
        return self.adj == other.adj and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.adj, self.labels))

    def __repr__(self) -> str:
        return f"LabeledForest(n={self.n}, edges={self.sorted_edges()}, labels={list(self.labels)})"


# ---------------------------------------------------------------------------
# growth


def add_vertex(forest: LabeledForest, attachments: Iterable[int]) -> LabeledForest:
    """Append one unlabeled vertex adjacent to exactly ``attachments``."""
    att = sorted(set(attachments))
    for a in att:
        forest._check(a)
    if forest.pending is not None:
        raise PendingVertexError(f"vertex {forest.pending} is still unlabeled")
    comp = forest.component_ids()
    seen: set[int] = set()
    for a in att:
        if comp[a] in seen:
            raise CycleError(f"two attachments share the component of {a}")
        seen.add(comp[a])
    new = forest.n
    adj = [list(nb) for nb in forest.adj]
    for a in att:
        adj[a].append(new)
    adj.append(att)
    return LabeledForest(adj, forest.labels + (UNLABELED,))


# ---------------------------------------------------------------------------
# rankings


def ranking_violation(forest: LabeledForest, *, skip_unlabeled: bool = False) -> tuple[int, int] | None:
    """Return two equal-labeled vertices joined by a path with no larger label.

    Sweeps labels upward with a union-find over vertices labeled at most the
    current threshold; two equal labels meeting in one set is a violation.
    Unlabeled vertices raise ``UnlabeledVertex`` unless ``skip_unlabeled``,
    in which case they are treated as deleted.
    """
    labels = forest.labels
    if not skip_unlabeled and UNLABELED in labels:
        raise UnlabeledVertex(labels.index(UNLABELED))
    parent = list(range(forest.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = sorted((x, v) for v, x in enumerate(labels) if x != UNLABELED)
    active = [False] * forest.n
    i = 0
    while i < len(order):
        lab = order[i][0]
        j = i
        while j < len(order) and order[j][0] == lab:
            v = order[j][1]
            active[v] = True
            for w in forest.adj[v]:
                if active[w]:
                    parent[find(w)] = find(v)
            j += 1
        owner: dict[int, int] = {}
        for _, v in order[i:j]:
            r = find(v)
            if r in owner:
                return owner[r], v
            owner[r] = v
        i = j
    return None


def is_valid_ranking(forest: LabeledForest) -> bool:
    return ranking_violation(forest) is None


def label_constraints(
    forest: LabeledForest, v: int, region: Iterable[int] | None = None
) -> tuple[frozenset[int], int]:
    """Constraints on the label of ``v`` given its labeled surroundings.

    Returns ``(forbidden, floor)``: label ``l`` keeps the labeling a ranking
    (of ``region``, default the whole component of ``v``) iff
    ``l not in forbidden and l > floor``. Assumes the other vertices already
    form a ranking. A label ``m`` is *visible* in a branch at ``v`` when some
    vertex labeled ``m`` is reached through interior labels below ``m``.
    """
    forest._check(v)
    allowed = None if region is None else set(region)
    seen_in: dict[int, int] = {}
    floor = 0
    for w0 in forest.adj[v]:
        if allowed is not None and w0 not in allowed:
            continue
        branch_vis: set[int] = set()
        stack = [(w0, v, 0)]
        while stack:
            u, par, inner_max = stack.pop()
            lab = forest.labels[u]
            if lab > inner_max:
                branch_vis.add(lab)
            nxt = max(inner_max, lab)
            for w in forest.adj[u]:
                if w != par and (allowed is None or w in allowed):
                    stack.append((w, u, nxt))
        for m in branch_vis:
            if m in seen_in:
                floor = max(floor, m)
            seen_in[m] = seen_in.get(m, 0) + 1
    return frozenset(seen_in), floor


def _branches_valid(forest: LabeledForest, v: int, region: Iterable[int] | None) -> bool:
    verts = forest.component(v) if region is None else list(region)
    others = [u for u in verts if u != v]
    sub = forest.induced(others)
    return ranking_violation(sub, skip_unlabeled=True) is None


def candidate_labels(forest: LabeledForest, v: int, max_label: int) -> list[int]:
    """Ascending labels ``<= max_label`` that complete a ranking of ``v``'s component."""
    if forest.labels[v] != UNLABELED and forest.pending not in (None, v):
        raise PendingVertexError(f"{v} is not the pending vertex")
    if not _branches_valid(forest, v, None):
        return []
    forbidden, floor = label_constraints(forest, v)
    return [x for x in range(floor + 1, max_label + 1) if x not in forbidden]


def smallest_valid_label(forest: LabeledForest, v: int, region: Iterable[int] | None = None) -> int:
    forbidden, floor = label_constraints(forest, v, region)
    x = floor + 1
    while x in forbidden:
        x += 1
    return x


# ---------------------------------------------------------------------------
# metrics


def bfs_distances(forest: LabeledForest, source: int, within: Iterable[int] | None = None) -> dict[int, int]:
    forest._check(source)
    allowed = None if within is None else set(within)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in forest.adj[u]:
            if w not in dist and (allowed is None or w in allowed):
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def eccentricity(forest: LabeledForest, v: int, within: Iterable[int] | None = None) -> int:
    return max(bfs_distances(forest, v, within).values())


def diameter(forest: LabeledForest, component_of: int, within: Iterable[int] | None = None) -> int:
    """Diameter of the component containing ``component_of`` (two-sweep BFS)."""
    d1 = bfs_distances(forest, component_of, within)
    far = max(d1, key=d1.__getitem__)
    d2 = bfs_distances(forest, far, within)
    return max(d2.values())


def _two_sweep(forest: LabeledForest, vertices: Sequence[int]) -> tuple[dict[int, int], dict[int, int]]:
    d0 = bfs_distances(forest, vertices[0], vertices)
    a = max(d0, key=d0.__getitem__)
    da = bfs_distances(forest, a, vertices)
    b = max(da, key=da.__getitem__)
    return da, bfs_distances(forest, b, vertices)


def eccentricities(forest: LabeledForest, vertices: Sequence[int]) -> dict[int, int]:
    """Eccentricity of every vertex of a connected vertex set, in linear time."""
    da, db = _two_sweep(forest, vertices)
    return {u: max(da[u], db[u]) for u in da}


def subtree_region(forest: LabeledForest, v: int, allowed: Iterable[int]) -> frozenset[int]:
    """Largest connected set around ``v`` whose other vertices carry labels in ``allowed``."""
    forest._check(v)
    ok = set(allowed)
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in forest.adj[u]:
            if w not in seen and forest.labels[w] in ok:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# generators


def star_tree_size(k: int, r: int) -> int:
    return sum(k**i for i in range(r + 1)) if r >= 0 else 0


def tkd_size(k: int, d: int) -> int:
    if d % 2 == 0:
        return star_tree_size(k - 1, d // 2) + star_tree_size(k - 1, d // 2 - 1)
    return 2 * star_tree_size(k - 1, d // 2)


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree with vertices numbered in BFS order (root is 0)."""

    root: int
    children: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.children)

    def parent(self) -> list[int]:
        par = [-1] * self.n
        for u, ch in enumerate(self.children):
            for c in ch:
                par[c] = u
        return par

    def depth(self) -> list[int]:
        dep = [0] * self.n
        for u in self.bfs_order():
            for c in self.children[u]:
                dep[c] = dep[u] + 1
        return dep

    def bfs_order(self) -> list[int]:
        order = [self.root]
        for u in order:
            order.extend(self.children[u])
        return order

    def to_forest(self) -> LabeledForest:
        edges = [(u, c) for u, ch in enumerate(self.children) for c in ch]
        return LabeledForest.from_edges(self.n, edges)


def build_star_tree(k: int, r: int, *, cap: int = DEFAULT_SIZE_CAP) -> RootedTree:
    """T*_{k,r}: every internal vertex has ``k`` children, every leaf has depth ``r``."""
    if k < 0 or r < 0:
        raise ValueError("k and r must be non-negative")
    size = star_tree_size(k, r) if k > 0 else 1
    if size > cap:
        raise SizeLimit(f"T*_{{{k},{r}}} has {size} vertices (cap {cap})")
    children: list[tuple[int, ...]] = []
    level = [0]
    nxt = 1
    depth = 0
    kids: dict[int, tuple[int, ...]] = {}
    while depth < r and k > 0:
        new_level = []
        for u in level:
            kids[u] = tuple(range(nxt, nxt + k))
            new_level.extend(kids[u])
            nxt += k
        level = new_level
        depth += 1
    children = [kids.get(u, ()) for u in range(nxt)]
    return RootedTree(0, tuple(children))


def build_tkd(k: int, d: int, *, cap: int = DEFAULT_SIZE_CAP) -> LabeledForest:
    """T_{k,d}: star trees T*_{k-1,.} of depths ceil(d/2) and floor(d/2) joined at their roots."""
    if d < 0:
        raise ValueError("d must be non-negative")
    if k < 2 and d > 1:
        raise ValueError("T_{k,d} needs k >= 2 when d >= 2")
    if d == 0:
        return LabeledForest.from_edges(1, [])
    if d == 1:
        return LabeledForest.from_edges(2, [(0, 1)])
    size = tkd_size(k, d)
    if size > cap:
        raise SizeLimit(f"T_{{{k},{d}}} has {size} vertices (cap {cap})")
    big = build_star_tree(k - 1, d // 2)
    small = build_star_tree(k - 1, d // 2 - (1 if d % 2 == 0 else 0))
    edges = [(u, c) for u, ch in enumerate(big.children) for c in ch]
    off = big.n
    edges += [(u + off, c + off) for u, ch in enumerate(small.children) for c in ch]
    edges.append((0, off))
    return LabeledForest.from_edges(big.n + small.n, edges)


def path_forest(n: int) -> LabeledForest:
    return LabeledForest.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_forest(leaves: int) -> LabeledForest:
    return LabeledForest.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def spider(a: int) -> LabeledForest:
    """K_{1,a} with every edge subdivided: center 0, middles 1..a, feet a+1..2a."""
    edges = [(0, i) for i in range(1, a + 1)] + [(i, i + a) for i in range(1, a + 1)]
    return LabeledForest.from_edges(2 * a + 1, edges)


def double_star(s: int, t: int) -> LabeledForest:
    """Adjacent centers 0 and 1 with ``s`` and ``t`` pendant leaves."""
    edges = [(0, 1)]
    edges += [(0, 2 + i) for i in range(s)]
    edges += [(1, 2 + s + i) for i in range(t)]
    return LabeledForest.from_edges(2 + s + t, edges)


def independence_number(forest: LabeledForest) -> int:
    """Largest independent set of a forest (greedy leaf stripping is optimal on forests)."""
    taken = [False] * forest.n
    blocked = [False] * forest.n
    deg = [len(nb) for nb in forest.adj]
    stack = [u for u in range(forest.n) if deg[u] <= 1]
    alive = [True] * forest.n
    count = 0
    while stack:
        u = stack.pop()
        if not alive[u]:
            continue
        alive[u] = False
        if not blocked[u]:
            taken[u] = True
            count += 1
            for w in forest.adj[u]:
                if alive[w]:
                    blocked[w] = True
        for w in forest.adj[u]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1:
                    stack.append(w)
    return count


# ---------------------------------------------------------------------------
# embeddings


def embeds_in_star_tree(
    t: LabeledForest, k: int, r: int, vertices: Iterable[int] | None = None
) -> bool:
    """Whether the tree ``t`` (or its connected vertex subset) is a subtree of T*_{k,r}.

    Holds iff some vertex has degree <= k and eccentricity <= r while every
    other vertex has degree <= k+1.
    """
    verts = list(range(t.n)) if vertices is None else list(vertices)
    if not verts:
        return True
    inside = set(verts)
    deg = {u: sum(1 for w in t.adj[u] if w in inside) for u in verts}
    if any(x > k + 1 for x in deg.values()):
        return False
    roots = [u for u in verts if deg[u] <= k]
    if not roots:
        return False
    ecc = eccentricities(t, verts)
    if len(ecc) != len(verts):
        raise ForestError("embeds_in_star_tree needs a connected vertex set")
    return any(ecc[u] <= r for u in roots)


class _HostIndex:
    """Precomputed structure of a host forest for induced-embedding search."""

    def __init__(self, host: LabeledForest):
        self.host = host
        self.n = host.n
        self.nbrs = [set(nb) for nb in host.adj]
        self.deg = [len(nb) for nb in host.adj]
        self.height: dict[tuple[int, int], int] = {}
        # height of w's side of arc (u, w), away from u
        for u in range(self.n):
            for w in host.adj[u]:
                self._arc_height(u, w)
        self.ecc = [0] * self.n
        for comp in host.components():
            for u, e in eccentricities(host, comp).items():
                self.ecc[u] = e
        self.orbit_rep = _orbit_representatives(host)

    def _arc_height(self, u: int, w: int) -> int:
        key = (u, w)
        if key in self.height:
            return self.height[key]
        # iterative post-order over arcs to avoid deep recursion
        stack = [(u, w, False)]
        while stack:
            a, b, done = stack.pop()
            if (a, b) in self.height:
                continue
            rest = [c for c in self.host.adj[b] if c != a]
            if done:
                self.height[(a, b)] = 1 + max((self.height[(b, c)] for c in rest), default=-1)
                continue
            stack.append((a, b, True))
            for c in rest:
                if (b, c) not in self.height:
                    stack.append((b, c, False))
        return self.height[key]


def _orbit_representatives(forest: LabeledForest) -> list[bool]:
    """Mark one vertex per automorphism orbit (within each component type)."""
    keep = [False] * forest.n
    seen: set[str] = set()
    for comp in forest.components():
        inside = set(comp)
        for u in comp:
            code = _rooted_code(forest, u, inside)
            if code not in seen:
                seen.add(code)
                keep[u] = True
    return keep


def find_induced_embedding(
    pattern: LabeledForest,
    host: LabeledForest | _HostIndex,
    *,
    budget: int | None = 2_000_000,
) -> dict[int, int] | None:
    """Map ``pattern`` injectively into ``host`` so edges correspond exactly.

    Backtracking with degree and subtree-height pruning plus symmetry
    breaking among isomorphic components and isomorphic siblings. Labels are
    ignored. Raises ``BudgetExceeded`` after ``budget`` search nodes.
    """
    from .errors import BudgetExceeded

    hx = host if isinstance(host, _HostIndex) else _HostIndex(host)
    if pattern.n > hx.n:
        return None
    if pattern.n == 0:
        return {}
    pdeg = [len(nb) for nb in pattern.adj]
    if any(a > b for a, b in zip(sorted(pdeg, reverse=True), sorted(hx.deg, reverse=True))):
        return None

    comps = pattern.components()
    plain = pattern.unlabeled()
    coded = [(_component_code(plain, c), c) for c in comps]
    coded.sort(key=lambda t: (-len(t[1]), t[0]))

    # per pattern vertex: parent, height below (away from parent), sibling-twin
    order: list[int] = []
    parent: dict[int, int] = {}
    below: dict[int, int] = {}
    twin: dict[int, int] = {}
    comp_root_twin: dict[int, int] = {}
    comp_is_first: dict[int, bool] = {}
    prev_code = None
    prev_root = None
    for idx, (code, comp) in enumerate(coded):
        root = _centers(pattern, comp)[0]
        inside = set(comp)
        bfs = [root]
        parent[root] = -1
        for u in bfs:
            kids = [w for w in pattern.adj[u] if w != parent[u]]
            for w in kids:
                parent[w] = u
            kid_codes = {w: _rooted_code(plain, w, inside, avoid=u) for w in kids}
            kids.sort(key=lambda w: kid_codes[w])
            for a, b in zip(kids, kids[1:]):
                if kid_codes[a] == kid_codes[b]:
                    twin[b] = a
            bfs.extend(kids)
        for u in reversed(bfs):
            below[u] = 1 + max((below[w] for w in pattern.adj[u] if w != parent[u]), default=-1)
        if code == prev_code:
            comp_root_twin[root] = prev_root
        comp_is_first[root] = idx == 0
        prev_code, prev_root = code, root
        order.extend(bfs)
    unique_first = len(coded) < 2 or coded[0][0] != coded[1][0]

    image: dict[int, int] = {}
    used = [False] * hx.n
    blocked = [0] * hx.n
    nodes = 0

    def candidates(u: int) -> list[int]:
        p = parent[u]
        if p < 0:
            out = []
            lo = image[comp_root_twin[u]] if u in comp_root_twin else -1
            for x in range(lo + 1, hx.n):
                if used[x] or blocked[x] or hx.deg[x] < pdeg[u] or hx.ecc[x] < below[u]:
                    continue
                if comp_is_first[u] and unique_first and not hx.orbit_rep[x]:
                    continue
                out.append(x)
            return out
        px = image[p]
        lo = image[twin[u]] if u in twin else -1
        out = []
        for x in hx.nbrs[px]:
            if x <= lo or used[x] or blocked[x] != 1:
                continue
            if hx.deg[x] < pdeg[u] or hx.height[(px, x)] < below[u]:
                continue
            out.append(x)
        out.sort()
        return out

    def place(i: int) -> bool:
        nonlocal nodes
        if i == len(order):
            return True
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded("induced embedding search exceeded its budget", nodes=nodes)
        u = order[i]
        for x in candidates(u):
            image[u] = x
            used[x] = True
            for y in hx.nbrs[x]:
                blocked[y] += 1
            if place(i + 1):
                return True
            for y in hx.nbrs[x]:
                blocked[y] -= 1
            used[x] = False
            del image[u]
        return False

    import sys

    limit = sys.getrecursionlimit()
    if len(order) + 100 > limit:
        sys.setrecursionlimit(len(order) + 1000)
    try:
        return dict(image) if place(0) else None
    finally:
        sys.setrecursionlimit(limit)


# ---------------------------------------------------------------------------
# canonical keys


def _centers(forest: LabeledForest, comp: Sequence[int]) -> list[int]:
    if len(comp) <= 2:
        return sorted(comp)
    inside = set(comp)
    deg = {u: sum(1 for w in forest.adj[u] if w in inside) for u in comp}
    leaves = [u for u in comp if deg[u] <= 1]
    remaining = len(comp)
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for u in leaves:
            deg[u] = 0
            for w in forest.adj[u]:
                if w in inside and deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        leaves = nxt
    return sorted(leaves)


def _rooted_code(
    forest: LabeledForest,
    root: int,
    inside: set[int] | None = None,
    labels: Sequence[int] | None = None,
    avoid: int = -1,
) -> str:
    """AHU code ``(label child-codes...)`` with children sorted, computed iteratively."""
    labs = forest.labels if labels is None else labels
    parent = {root: avoid}
    order = [root]
    for u in order:
        for w in forest.adj[u]:
            if w != parent[u] and (inside is None or w in inside):
                parent[w] = u
                order.append(w)
    codes: dict[int, str] = {}
    for u in reversed(order):
        kids = sorted(codes.pop(w) for w in forest.adj[u] if w != parent[u] and w in codes)
        codes[u] = "(" + str(labs[u]) + "".join(kids) + ")"
    return codes[root]


def _component_code(forest: LabeledForest, comp: Sequence[int], labels: Sequence[int] | None = None) -> bytes:
    inside = set(comp)
    return min(_rooted_code(forest, c, inside, labels) for c in _centers(forest, comp)).encode()


def canonical_key(forest: LabeledForest, labels: Sequence[int] | None = None) -> bytes:
    """Isomorphism-invariant key of a labeled forest (unlabeled vertices encode as 0).

    ``labels`` overrides the forest's own labels, e.g. to fold strategy roles
    into the key.
    """
    codes = sorted(_component_code(forest, c, labels) for c in forest.components())
    return b"".join(codes)


def rooted_orbits(forest: LabeledForest, comp: Sequence[int]) -> list[list[int]]:
    """Partition a component's vertices into label-preserving automorphism orbits."""
    inside = set(comp)
    groups: dict[str, list[int]] = {}
    for u in comp:
        groups.setdefault(_rooted_code(forest, u, inside), []).append(u)
    return [groups[c] for c in sorted(groups)]


# ---------------------------------------------------------------------------
# text format


def to_text(forest: LabeledForest) -> str:
    lines = [str(forest.n)]
    lines += [f"{u} {v}" for u, v in forest.sorted_edges()]
    if any(forest.labels):
        lines.append("labels: " + " ".join(str(x) for x in forest.labels))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> LabeledForest:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ForestError("empty forest file")
    try:
        n = int(rows[0])
    except ValueError as exc:
        raise ForestError(f"bad vertex count {rows[0]!r}") from exc
    edges = []
    labels = None
    for row in rows[1:]:
        if row.startswith("labels:"):
            if labels is not None:
                raise ForestError("duplicate labels line")
            labels = [int(t) for t in row[len("labels:"):].split()]
            if len(labels) != n:
                raise ForestError(f"expected {n} labels, got {len(labels)}")
            continue
        parts = row.split()
        if len(parts) != 2:
            raise ForestError(f"bad edge line {row!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return LabeledForest.from_edges(n, edges, labels)


def read_forest(path: str | Path) -> LabeledForest:
    return from_text(Path(path).read_text(encoding="ascii"))


def write_forest(forest: LabeledForest, path: str | Path) -> None:
    Path(path).write_text(to_text(forest), encoding="ascii", newline="\n")
