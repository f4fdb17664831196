"""Level-n orbit graphs of the ternary-tree action and BFS distances.

Vertices are the 3^n digit strings of level n; each vertex has four
generator-moves (a, a^-1, b, b^-1), loops allowed; edges are undirected.
"""

from __future__ import annotations

from collections import deque
from typing import List, Tuple

from .errors import InvalidConfigError
from .trees import _index_to_vertex, _vertex_to_index, word_vertex_action

DEFAULT_MAX_LEVEL = 12


class SchreierGraph:
    """Orbit graph of the generators acting on level-n vertices.

    Adjacency is stored as four move tables (a, A, b, B) indexed by the
    integer encoding of the vertex string (first digit most significant).
    """

    __slots__ = ("level", "moves")

    def __init__(self, level: int, moves):
        self.level = level
        self.moves = moves  # dict letter -> list of image indices

    @property
    def size(self) -> int:
        return 3**self.level

    def vertex_index(self, v: str) -> int:
        if len(v) != self.level or any(d not in "012" for d in v):
            raise ValueError(f"vertex {v!r} is not at level {self.level}")
        return _vertex_to_index(v)

    def neighbors(self, idx: int) -> List[int]:
        return [self.moves[ch][idx] for ch in "aAbB"]

    def edges(self) -> List[Tuple[str, str]]:
        """Undirected generator edges (x, x.a) and (x, x.b), loops included."""
        out = []
        n = self.level
        for idx in range(self.size):
            x = _index_to_vertex(idx, n)
            out.append((x, _index_to_vertex(self.moves["a"][idx], n)))
            out.append((x, _index_to_vertex(self.moves["b"][idx], n)))
        return out

    def distance(self, u: str, v: str) -> int:
        return schreier_distance(self, u, v)

    def is_connected(self) -> bool:
        seen = [False] * self.size
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if not seen[y]:
                    seen[y] = True
                    count += 1
                    queue.append(y)
        return count == self.size


def build_schreier(n: int, max_level: int = DEFAULT_MAX_LEVEL) -> SchreierGraph:
    """Orbit graph on the 3^n level-n vertices."""
    if n < 1:
        raise InvalidConfigError("level must be >= 1")
    if n > max_level:
        raise InvalidConfigError(f"level {n} exceeds the budgeted max {max_level}")
    size = 3**n
    moves = {}
    for ch in "aAbB":
        table = [0] * size
        for idx in range(size):
            v = _index_to_vertex(idx, n)
            table[idx] = _vertex_to_index(word_vertex_action(ch, v))
        moves[ch] = table
    return SchreierGraph(n, moves)


def schreier_distance(g: SchreierGraph, u: str, v: str) -> int:
    """Exact BFS distance between two level-n vertices."""
    src = g.vertex_index(u)
    dst = g.vertex_index(v)
    if src == dst:
        return 0
    dist = [-1] * g.size
    dist[src] = 0
    queue = deque([src])
    while queue:
        x = queue.popleft()
        d = dist[x] + 1
        for y in g.neighbors(x):
            if dist[y] < 0:
                if y == dst:
                    return d
                dist[y] = d
                queue.append(y)
    raise RuntimeError("orbit graph is disconnected")  # should not happen


def far_pair(n: int) -> Tuple[str, str]:
    """The benchmark vertex pair (2^{n-1} 0, 2^n): n-1 twos then 0, vs all twos."""
    return ("2" * (n - 1) + "0", "2" * n)
