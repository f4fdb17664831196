"""Automorphisms of the rooted ternary tree generated by the two-state recursion.

The group under study is generated by the root 3-cycle ``a`` and the directed
generator ``b`` acting by

    0w.a = 1w,  1w.a = 2w,  2w.a = 0w
    0w.b = 0(w.a),  1w.b = 1w,  2w.b = 2(w.b)

i.e. b has the self-similar decomposition (a, id, b).  All actions are RIGHT
actions: x.(gh) = (x.g).h.

Two element representations live here:

* ``Portrait`` -- depth-n truncation (image in the level-n quotient): a sparse
  map from vertices of level < n to a residue mod 3, the power of the 3-cycle
  applied at that vertex's children.

* canonical automaton forms -- an exact, hash-consed normal form for elements
  of the full (infinite) group.  Every element is a leaf (one of
  id, a, a^2, b, b^2) or an interned node (root label, three child forms);
  nodes that coincide with a leaf's self-similar expansion are collapsed, so
  equal elements always intern to the same integer id.  This gives exact
  equality and fast multiplication for the infinite group; the word-based
  triviality test ``is_trivial_in_G`` is kept as an independent route.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, Iterable, Tuple, Union

from .errors import BudgetExceededError
from .words import FreeWord, reduce_word

# --- letter-by-letter vertex action ---------------------------------------


def _shift(v: str, pos: int, amt: int) -> str:
    return v[:pos] + str((int(v[pos]) + amt) % 3) + v[pos + 1 :]


def _act_letter(ch: str, v: str) -> str:
    if not v:
        return v
    if ch == "a":
        return _shift(v, 0, 1)
    if ch == "A":
        return _shift(v, 0, 2)
    if ch not in ("b", "B"):
        raise ValueError(f"unknown generator letter {ch!r}")
    amt = 1 if ch == "b" else 2
    i = 0
    while i < len(v) and v[i] == "2":
        i += 1
    if i == len(v) or v[i] == "1" or i + 1 == len(v):
        return v
    return _shift(v, i + 1, amt)  # v = 2^i 0 rest: rest's head shifts by a^amt


def word_vertex_action(word: str, v: str) -> str:
    """Image of vertex v under the word, letter by letter (right action)."""
    for ch in word:
        v = _act_letter(ch, v)
    return v


def _check_vertex(v: str) -> None:
    if any(d not in "012" for d in v):
        raise ValueError(f"bad vertex string {v!r}")


# --- canonical automaton forms --------------------------------------------

AUT_ID = 0
AUT_A = 1
AUT_A2 = 2
AUT_B = 3
AUT_B2 = 4

_LEAF_EXPAND = {
    AUT_ID: (0, 0, 0, 0),
    AUT_A: (1, 0, 0, 0),
    AUT_A2: (2, 0, 0, 0),
    AUT_B: (0, AUT_A, AUT_ID, AUT_B),
    AUT_B2: (0, AUT_A2, AUT_ID, AUT_B2),
}
_LEAF_BY_EXPAND = {v: k for k, v in _LEAF_EXPAND.items()}
_LEAF_NAME = {0: "e", 1: "a", 2: "A", 3: "b", 4: "B"}

_nodes: list = []  # id-5 -> (c, k0, k1, k2)
_intern: Dict[Tuple[int, int, int, int], int] = {}


def aut_expand(k: int) -> Tuple[int, int, int, int]:
    """(root label, child0, child1, child2) of a canonical form."""
    if k < 5:
        return _LEAF_EXPAND[k]
    return _nodes[k - 5]


def _node(c: int, k0: int, k1: int, k2: int) -> int:
    key = (c, k0, k1, k2)
    leaf = _LEAF_BY_EXPAND.get(key)
    if leaf is not None:
        return leaf
    kid = _intern.get(key)
    if kid is None:
        _nodes.append(key)
        kid = len(_nodes) + 4
        _intern[key] = kid
    return kid


def _word_root_label(word: str) -> int:
    return (word.count("a") - word.count("A")) % 3


def _word_sections(word: str) -> Tuple[str, str, str]:
    """The three level-1 section words (freely reduced) of a word."""
    secs = []
    for start in range(3):
        cur = start
        buf = []
        for ch in word:
            if ch == "a":
                cur = (cur + 1) % 3
            elif ch == "A":
                cur = (cur - 1) % 3
            elif ch == "b":
                if cur == 0:
                    buf.append("a")
                elif cur == 2:
                    buf.append("b")
            else:  # B
                if cur == 0:
                    buf.append("A")
                elif cur == 2:
                    buf.append("B")
        secs.append(reduce_word("".join(buf)))
    return tuple(secs)


_WORD_MEMO: Dict[str, int] = {}


def aut_from_word(word: Union[str, FreeWord]) -> int:
    """Canonical form of a word over a/A/b/B (capital = inverse)."""
    if isinstance(word, FreeWord):
        word = word.chars
    word = reduce_word(word)
    cached = _WORD_MEMO.get(word)
    if cached is not None:
        return cached
    result = _aut_from_reduced(word)
    _WORD_MEMO[word] = result
    return result


def _aut_from_reduced(word: str) -> int:
    if not word:
        return AUT_ID
    if all(ch in "aA" for ch in word):
        return (AUT_ID, AUT_A, AUT_A2)[_word_root_label(word)]
    if all(ch in "bB" for ch in word):
        k = (word.count("b") - word.count("B")) % 3
        return (AUT_ID, AUT_B, AUT_B2)[k]
    cached = _WORD_MEMO.get(word)
    if cached is not None:
        return cached
    c = _word_root_label(word)
    s0, s1, s2 = _word_sections(word)
    result = _node(c, _aut_from_reduced(s0), _aut_from_reduced(s1), _aut_from_reduced(s2))
    _WORD_MEMO[word] = result
    return result


# Resolution of mutually recursive section systems.  Each unresolved state q
# carries (root label, children), a child being ('id', canonical id) or
# ('q', other state).  States stuck on cycles must be nucleus elements
# (leaves); this is where the contraction property of the group is used.


def _resolve_states(states: dict) -> dict:
    resolved: dict = {}
    remaining = dict(states)
    while remaining:
        progress = False
        for q in list(remaining):
            c, children = remaining[q]
            ids = []
            for kind, v in children:
                if kind == "id":
                    ids.append(v)
                elif v in resolved:
                    ids.append(resolved[v])
                else:
                    ids = None
                    break
            if ids is not None:
                resolved[q] = _node(c, *ids)
                del remaining[q]
                progress = True
        if progress:
            continue
        scc = _sink_scc(remaining)
        assignment = _assign_leaves(scc, remaining, resolved)
        resolved.update(assignment)
        for q in assignment:
            del remaining[q]
    return resolved


def _sink_scc(remaining: dict) -> list:
    # Tarjan over the unresolved-child graph; return one SCC with no edges
    # out to other unresolved states.
    graph = {}
    for q, (_, children) in remaining.items():
        graph[q] = [v for kind, v in children if kind == "q" and v in remaining]
    index: dict = {}
    low: dict = {}
    on_stack: dict = {}
    stack: list = []
    sccs: list = []
    counter = [0]

    def strongconnect(v):
        # iterative Tarjan to avoid recursion limits
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack[node] = True
            recurse = False
            for i in range(pi, len(graph[node])):
                w = graph[node][i]
                if w not in index:
                    work[-1] = (node, i + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                elif on_stack.get(w):
                    low[node] = min(low[node], index[w])
            if recurse:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in graph:
        if v not in index:
            strongconnect(v)
    scc_of = {}
    for i, comp in enumerate(sccs):
        for v in comp:
            scc_of[v] = i
    for i, comp in enumerate(sccs):
        if all(scc_of[w] == i for v in comp for w in graph[v]):
            return comp
    raise RuntimeError("no sink SCC in cyclic section system")


def _assign_leaves(scc: list, remaining: dict, resolved: dict) -> dict:
    members = set(scc)
    candidates = {}
    for q in scc:
        c, children = remaining[q]
        cands = []
        for leaf in range(5):
            lc, l0, l1, l2 = _LEAF_EXPAND[leaf]
            if lc != c:
                continue
            lch = (l0, l1, l2)
            ok = True
            for pos, (kind, v) in enumerate(children):
                if kind == "id":
                    if v != lch[pos]:
                        ok = False
                        break
                elif v in resolved:
                    if resolved[v] != lch[pos]:
                        ok = False
                        break
                elif v not in members:
                    raise RuntimeError("sink SCC with external unresolved child")
            if ok:
                cands.append(leaf)
        candidates[q] = cands

    order = list(scc)

    def backtrack(i, assign):
        if i == len(order):
            return dict(assign)
        q = order[i]
        c, children = remaining[q]
        for leaf in candidates[q]:
            lch = _LEAF_EXPAND[leaf][1:]
            ok = True
            for pos, (kind, v) in enumerate(children):
                if kind == "q" and v in members and v in assign and assign[v] != lch[pos]:
                    ok = False
                    break
            if not ok:
                continue
            assign[q] = leaf
            # forward check against already assigned parents
            consistent = True
            for p in order[: i + 1]:
                pc, pch = remaining[p]
                plch = _LEAF_EXPAND[assign[p]][1:]
                for pos, (kind, v) in enumerate(pch):
                    if kind == "q" and v in assign and assign[v] != plch[pos]:
                        consistent = False
                        break
                if not consistent:
                    break
            if consistent:
                out = backtrack(i + 1, assign)
                if out is not None:
                    return out
            del assign[q]
        return None

    out = backtrack(0, {})
    if out is None:
        raise RuntimeError("cyclic section system not solvable inside the nucleus")
    # final verification: every constraint holds
    for q in scc:
        c, children = remaining[q]
        lc, l0, l1, l2 = _LEAF_EXPAND[out[q]]
        lch = (l0, l1, l2)
        for pos, (kind, v) in enumerate(children):
            want = lch[pos]
            got = v if kind == "id" else (resolved.get(v) if v in resolved else out.get(v))
            if got != want:
                raise RuntimeError("leaf assignment failed verification")
    return out


_MUL_MEMO: Dict[Tuple[int, int], int] = {}
_INV_MEMO: Dict[int, int] = {0: 0, 1: 2, 2: 1, 3: 4, 4: 3}


def aut_mul(x: int, y: int) -> int:
    """Product of canonical forms (right-action convention)."""
    if x == AUT_ID:
        return y
    if y == AUT_ID:
        return x
    key = (x, y)
    cached = _MUL_MEMO.get(key)
    if cached is not None:
        return cached
    states: dict = {}
    stack = [key]
    seen = {key}
    while stack:
        u, v = stack.pop()
        cu, u0, u1, u2 = aut_expand(u)
        cv, v0, v1, v2 = aut_expand(v)
        us = (u0, u1, u2)
        vs = (v0, v1, v2)
        children = []
        for i in range(3):
            xi = us[i]
            yi = vs[(i + cu) % 3]
            if xi == AUT_ID:
                children.append(("id", yi))
            elif yi == AUT_ID:
                children.append(("id", xi))
            else:
                done = _MUL_MEMO.get((xi, yi))
                if done is not None:
                    children.append(("id", done))
                else:
                    q = (xi, yi)
                    children.append(("q", q))
                    if q not in seen:
                        seen.add(q)
                        stack.append(q)
        states[(u, v)] = ((cu + cv) % 3, tuple(children))
    resolved = _resolve_states(states)
    _MUL_MEMO.update(resolved)
    return resolved[key]


def aut_inv(x: int) -> int:
    cached = _INV_MEMO.get(x)
    if cached is not None:
        return cached
    states: dict = {}
    stack = [x]
    seen = {x}
    while stack:
        u = stack.pop()
        cu, u0, u1, u2 = aut_expand(u)
        us = (u0, u1, u2)
        children = []
        for i in range(3):
            v = us[(i - cu) % 3]
            done = _INV_MEMO.get(v)
            if done is not None:
                children.append(("id", done))
            else:
                children.append(("q", v))
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        states[u] = ((-cu) % 3, tuple(children))
    resolved = _resolve_states(states)
    _INV_MEMO.update(resolved)
    return resolved[x]


def aut_section(k: int, vertex: str) -> int:
    for d in vertex:
        k = aut_expand(k)[1 + int(d)]
    return k


def aut_root_label(k: int) -> int:
    return aut_expand(k)[0]


def aut_vertex_action(k: int, v: str) -> str:
    out = []
    for d in v:
        c, *children = aut_expand(k)
        out.append(str((int(d) + c) % 3))
        k = children[int(d)]
    return "".join(out)


_SER_MEMO: Dict[int, bytes] = {}


def aut_serialize(k: int) -> bytes:
    """Deterministic structural encoding; equal elements give equal bytes."""
    cached = _SER_MEMO.get(k)
    if cached is not None:
        return cached
    if k < 5:
        out = _LEAF_NAME[k].encode()
    else:
        c, k0, k1, k2 = aut_expand(k)
        out = b"(%d" % c + aut_serialize(k0) + aut_serialize(k1) + aut_serialize(k2) + b")"
    _SER_MEMO[k] = out
    return out


# --- portraits (level-n quotients) -----------------------------------------


def perm_identity(n: int):
    size = 3**n
    if size <= 256:
        return bytes(range(size))
    return tuple(range(size))


def perm_compose(pg, ph):
    """Permutation of the product gh under right action: x -> ph[pg[x]]."""
    if isinstance(pg, bytes):
        table = ph if len(ph) == 256 else ph + bytes(256 - len(ph))
        return pg.translate(table)
    return tuple(ph[i] for i in pg)


def perm_invert(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    if isinstance(p, bytes):
        return bytes(out)
    return tuple(out)


def _vertex_to_index(v: str) -> int:
    idx = 0
    for d in v:
        idx = idx * 3 + int(d)
    return idx


def _index_to_vertex(idx: int, n: int) -> str:
    digits = []
    for _ in range(n):
        digits.append(str(idx % 3))
        idx //= 3
    return "".join(reversed(digits))


class Portrait:
    """Element of the level-n quotient as a sparse label map.

    labels[v] for a vertex v of level < n is the power of the 3-cycle applied
    at v's children; absent vertices carry label 0.  Internally a level-n
    permutation is kept as the canonical fast form (bytes when it fits).
    """

    __slots__ = ("depth", "_labels", "_perm", "_hash")

    def __init__(self, depth: int, labels: Dict[str, int] | None = None, _perm=None):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth = depth
        self._perm = _perm
        self._hash = None
        if labels is None and _perm is None:
            labels = {}
        if labels is not None:
            clean = {}
            for v, c in labels.items():
                _check_vertex(v)
                if len(v) >= depth:
                    raise ValueError(f"label vertex {v!r} at level >= depth {depth}")
                c %= 3
                if c:
                    clean[v] = c
            self._labels = clean
        else:
            self._labels = None

    # -- representations --

    @property
    def labels(self) -> Dict[str, int]:
        if self._labels is None:
            self._labels = self._labels_from_perm()
        return self._labels

    def _labels_from_perm(self) -> Dict[str, int]:
        perm = self._perm
        n = self.depth
        labels: Dict[str, int] = {}
        for level in range(n):
            step = 3 ** (n - level - 1)
            for i in range(3**level):
                v_idx = 0
                v = _index_to_vertex(i, level) if level else ""
                v_idx = _vertex_to_index(v + "0" * (n - level))
                image = perm[v_idx]
                # digit at position `level` of the image, minus original digit 0
                c = (image // step) % 3
                if c:
                    labels[v] = c
        return labels

    def perm(self):
        if self._perm is None:
            n = self.depth
            labels = self._labels
            size = 3**n
            out = [0] * size
            for idx in range(size):
                v = _index_to_vertex(idx, n)
                image = 0
                prefix = ""
                for d in v:
                    c = labels.get(prefix, 0)
                    image = image * 3 + (int(d) + c) % 3
                    prefix += d
                out[idx] = image
            self._perm = bytes(out) if size <= 256 else tuple(out)
        return self._perm

    @classmethod
    def identity(cls, depth: int) -> "Portrait":
        return cls(depth, {})

    @classmethod
    def from_perm(cls, depth: int, perm) -> "Portrait":
        return cls(depth, labels=None, _perm=perm)

    @classmethod
    def from_aut(cls, k: int, depth: int) -> "Portrait":
        labels: Dict[str, int] = {}
        stack = [("", k)]
        while stack:
            v, node = stack.pop()
            c, k0, k1, k2 = aut_expand(node)
            if c:
                labels[v] = c
            if len(v) + 1 < depth:
                stack.append((v + "0", k0))
                stack.append((v + "1", k1))
                stack.append((v + "2", k2))
        return cls(depth, labels)

    # -- group structure --

    def label(self, v: str) -> int:
        return self.labels.get(v, 0)

    def mul(self, other: "Portrait") -> "Portrait":
        if self.depth != other.depth:
            raise ValueError("portrait depth mismatch")
        return Portrait.from_perm(self.depth, perm_compose(self.perm(), other.perm()))

    def inv(self) -> "Portrait":
        return Portrait.from_perm(self.depth, perm_invert(self.perm()))

    def is_identity(self) -> bool:
        return not self.labels if self._labels is not None else self.perm() == perm_identity(self.depth)

    def act(self, v: str) -> str:
        _check_vertex(v)
        if len(v) > self.depth:
            raise ValueError(f"vertex {v!r} deeper than portrait depth {self.depth}")
        labels = self.labels
        out = []
        prefix = ""
        for d in v:
            c = labels.get(prefix, 0)
            out.append(str((int(d) + c) % 3))
            prefix += d
        return "".join(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Portrait)
            and self.depth == other.depth
            and self.perm() == other.perm()
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.depth, self.perm()))
        return self._hash

    def __repr__(self) -> str:
        return f"Portrait(depth={self.depth}, labels={dict(sorted(self.labels.items()))})"

    def to_json(self) -> Dict[str, int]:
        return dict(sorted(self.labels.items()))


def portrait_of_word(word: Union[str, FreeWord], n: int) -> Portrait:
    """Image of a word over {a, b} in the level-n quotient."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    return Portrait.from_aut(aut_from_word(word), n)


def portrait_mul(g: Portrait, h: Portrait) -> Portrait:
    return g.mul(h)


def vertex_action(g: Union[Portrait, FreeWord, str], x: str) -> str:
    """Image of vertex x under g (portrait or word over {a, b})."""
    _check_vertex(x)
    if isinstance(g, Portrait):
        return g.act(x)
    word = g.chars if isinstance(g, FreeWord) else g
    return word_vertex_action(word, x)


# --- exact word problem for the infinite group ------------------------------

_TRIV_MEMO: Dict[str, bool] = {}


def is_trivial_in_G(word: Union[str, FreeWord], budget: int = 1_000_000) -> bool:
    """Exact triviality test in the infinite group.

    Recursive section splitting: a word is trivial iff every word in the
    closure of its level-1 sections has trivial root permutation.  The
    closure is finite because sections shrink (the group is contracting);
    `budget` caps the number of closure nodes and a BudgetExceededError is
    raised rather than ever returning a wrong answer.
    """
    if isinstance(word, FreeWord):
        word = word.chars
    w = reduce_word(word)
    known = _TRIV_MEMO.get(w)
    if known is not None:
        return known
    # cheap pre-filter: direct action on shallow levels
    for level in (1, 2, 4):
        for idx in range(3**level):
            v = _index_to_vertex(idx, level)
            if word_vertex_action(w, v) != v:
                _TRIV_MEMO[w] = False
                return False
    queue = deque([w])
    explored = set()
    nodes = 0
    while queue:
        u = queue.popleft()
        if u in explored:
            continue
        known = _TRIV_MEMO.get(u)
        if known is True:
            continue
        if known is False or _word_root_label(u) != 0:
            _TRIV_MEMO[u] = False
            _TRIV_MEMO[w] = False
            return False
        explored.add(u)
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(
                f"triviality test exceeded budget of {budget} section words"
            )
        for s in _word_sections(u):
            if s and s not in explored:
                queue.append(s)
    for u in explored:
        _TRIV_MEMO[u] = True
    return True
