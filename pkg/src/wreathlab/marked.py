"""Marked groups over pluggable backends.

A marked group is a group together with an ordered d-tuple of generators;
words over d signed letters evaluate into it, and its relation set (words
evaluating to the identity) determines its marked Cayley ball of any radius.
Backends: free group, free abelian group, the ternary-tree automaton group
with an arbitrary marking, its level-n wreath extensions, and diagonal
products of any two of these.

Spec strings (used by the CLI and reports):
    free:d        abelian:d       fg:<w1>,<w2>
    gamma:<n>[:<w1>,<w2>]         diag(<spec>,<spec>)
where words use the capital-letter inverse syntax ("a", "abA", ...).
"""

from __future__ import annotations

from collections import deque
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .errors import BudgetExceededError, InvalidConfigError, WreathlabError
from .trees import aut_from_word, aut_inv, aut_mul, aut_serialize
from .words import ALPHABET, FreeWord, reduce_word, word_inv, word_mul
from .wreath import WreathElem, eval_word_in_gamma, gamma_generators

DEFAULT_BALL_BUDGET = 2_000_000


def _letter_index(ch: str) -> Tuple[int, bool]:
    return ALPHABET.index(ch.lower()) + 1, ch.isupper()


class MarkedGroup:
    """Base: a group with d marked generators and exact element equality."""

    d: int

    # subclasses implement identity/generator/mul/inv/is_identity/elem_key/
    # canonical_key/spec

    def generator_inv(self, i: int):
        return self.inv(self.generator(i))

    def letter_elems(self) -> Dict[str, object]:
        """Map from each of the 2d letters to its element."""
        cached = getattr(self, "_letters", None)
        if cached is None:
            cached = {}
            for i in range(1, self.d + 1):
                g = self.generator(i)
                cached[ALPHABET[i - 1]] = g
                cached[ALPHABET[i - 1].upper()] = self.inv(g)
            self._letters = cached
        return cached

    def eval_word(self, w: Union[str, FreeWord]):
        if isinstance(w, FreeWord):
            w = w.chars
        letters = self.letter_elems()
        acc = self.identity()
        for ch in w:
            try:
                step = letters[ch]
            except KeyError:
                raise InvalidConfigError(
                    f"letter {ch!r} out of range for marking size {self.d}"
                ) from None
            acc = self.mul(acc, step)
        return acc

    def is_relation(self, w: Union[str, FreeWord]) -> bool:
        return self.is_identity(self.eval_word(w))

    def __repr__(self) -> str:
        return f"<MarkedGroup {self.spec()}>"


class FreeGroupMarked(MarkedGroup):
    """Free group on d generators; elements are reduced letter strings."""

    def __init__(self, d: int):
        if not 1 <= d <= len(ALPHABET):
            raise InvalidConfigError(f"bad rank {d}")
        self.d = d

    def identity(self) -> str:
        return ""

    def generator(self, i: int) -> str:
        return ALPHABET[i - 1]

    def mul(self, x: str, y: str) -> str:
        return word_mul(x, y)

    def inv(self, x: str) -> str:
        return word_inv(x)

    def is_identity(self, x: str) -> bool:
        return not x

    def elem_key(self, x: str) -> str:
        return x

    def canonical_key(self, x: str) -> bytes:
        return x.encode()

    def word_metric_length(self, x: str) -> int:
        return len(x)

    def spec(self) -> str:
        return f"free:{self.d}"


class FreeAbelianMarked(MarkedGroup):
    """Z^d; elements are integer vectors."""

    def __init__(self, d: int):
        if not 1 <= d <= len(ALPHABET):
            raise InvalidConfigError(f"bad rank {d}")
        self.d = d

    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.d

    def generator(self, i: int) -> Tuple[int, ...]:
        return tuple(1 if j == i - 1 else 0 for j in range(self.d))

    def mul(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x):
        return tuple(-a for a in x)

    def is_identity(self, x) -> bool:
        return not any(x)

    def elem_key(self, x):
        return x

    def canonical_key(self, x) -> bytes:
        return ",".join(map(str, x)).encode()

    def spec(self) -> str:
        return f"abelian:{self.d}"


class FGGroupMarked(MarkedGroup):
    """The infinite automaton group with a marking by words over {a, b}.

    Elements are canonical automaton forms (interned ids), giving exact
    equality; the word-problem routine is_trivial_in_G provides an
    independent cross-check, exercised in the test suite.
    """

    def __init__(self, marking: Iterable[Union[str, FreeWord]] = ("a", "b")):
        words = []
        for w in marking:
            chars = w.chars if isinstance(w, FreeWord) else reduce_word(w.replace(" ", ""))
            if any(ch not in "aAbB" for ch in chars):
                raise InvalidConfigError(f"marking word {w!r} not over a/A/b/B")
            words.append(chars)
        if not words:
            raise InvalidConfigError("empty marking")
        self.marking = tuple(words)
        self.d = len(words)
        self._gens = [aut_from_word(w) for w in words]

    def identity(self) -> int:
        return 0

    def generator(self, i: int) -> int:
        return self._gens[i - 1]

    def mul(self, x: int, y: int) -> int:
        return aut_mul(x, y)

    def inv(self, x: int) -> int:
        return aut_inv(x)

    def is_identity(self, x: int) -> bool:
        return x == 0

    def elem_key(self, x: int) -> int:
        return x

    def canonical_key(self, x: int) -> bytes:
        return aut_serialize(x)

    def spec(self) -> str:
        return "fg:" + ",".join(self.marking)


class GammaNMarked(MarkedGroup):
    """Level-n wreath extension with a marking by words over {a, b}.

    The default marking (a, b) gives the standard generators (a_n, b_n);
    a general marking w_j is evaluated through a -> a_n, b -> b_n.
    """

    def __init__(self, n: int, marking: Iterable[Union[str, FreeWord]] = ("a", "b")):
        if n < 1:
            raise InvalidConfigError("level must be >= 1")
        words = []
        for w in marking:
            chars = w.chars if isinstance(w, FreeWord) else reduce_word(w.replace(" ", ""))
            if any(ch not in "aAbB" for ch in chars):
                raise InvalidConfigError(f"marking word {w!r} not over a/A/b/B")
            words.append(chars)
        if not words:
            raise InvalidConfigError("empty marking")
        self.n = n
        self.marking = tuple(words)
        self.d = len(words)
        self._gens = [eval_word_in_gamma(w, n) for w in words]

    def identity(self) -> WreathElem:
        return WreathElem.identity(self.n)

    def generator(self, i: int) -> WreathElem:
        return self._gens[i - 1]

    def mul(self, x: WreathElem, y: WreathElem) -> WreathElem:
        return x.mul(y)

    def inv(self, x: WreathElem) -> WreathElem:
        return x.inv()

    def is_identity(self, x: WreathElem) -> bool:
        return x.is_identity()

    def elem_key(self, x: WreathElem):
        return x.key()

    def canonical_key(self, x: WreathElem) -> bytes:
        perm, cfg = x.key()
        parts = [bytes(perm) if isinstance(perm, bytes) else repr(perm).encode()]
        for idx, val in cfg:
            parts.append(b";%d:" % idx + repr(val).encode())
        return b"|".join(parts)

    def spec(self) -> str:
        if self.marking == ("a", "b"):
            return f"gamma:{self.n}"
        return f"gamma:{self.n}:" + ",".join(self.marking)


class DiagonalMarked(MarkedGroup):
    """Diagonal product: subgroup of G1 x G2 generated by paired generators."""

    def __init__(self, left: MarkedGroup, right: MarkedGroup):
        if left.d != right.d:
            raise InvalidConfigError(
                f"marking sizes differ: {left.d} vs {right.d}"
            )
        self.left = left
        self.right = right
        self.d = left.d

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def generator(self, i: int):
        return (self.left.generator(i), self.right.generator(i))

    def mul(self, x, y):
        return (self.left.mul(x[0], y[0]), self.right.mul(x[1], y[1]))

    def inv(self, x):
        return (self.left.inv(x[0]), self.right.inv(x[1]))

    def is_identity(self, x) -> bool:
        return self.left.is_identity(x[0]) and self.right.is_identity(x[1])

    def elem_key(self, x):
        return (self.left.elem_key(x[0]), self.right.elem_key(x[1]))

    def canonical_key(self, x) -> bytes:
        k1 = self.left.canonical_key(x[0])
        k2 = self.right.canonical_key(x[1])
        return b"%d!" % len(k1) + k1 + k2

    def project_left(self, x):
        return x[0]

    def project_right(self, x):
        return x[1]

    def spec(self) -> str:
        return f"diag({self.left.spec()},{self.right.spec()})"


def parse_group_spec(spec: str) -> MarkedGroup:
    """Build a marked group from its spec string."""
    spec = spec.strip()
    if spec.startswith("diag(") and spec.endswith(")"):
        inner = spec[5:-1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return DiagonalMarked(
                    parse_group_spec(inner[:i]), parse_group_spec(inner[i + 1 :])
                )
        raise InvalidConfigError(f"bad diag spec {spec!r}")
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "free":
            return FreeGroupMarked(int(parts[1]))
        if kind == "abelian":
            return FreeAbelianMarked(int(parts[1]))
        if kind == "fg":
            marking = parts[1].split(",") if len(parts) > 1 else ["a", "b"]
            return FGGroupMarked(marking)
        if kind == "gamma":
            n = int(parts[1])
            marking = parts[2].split(",") if len(parts) > 2 else ["a", "b"]
            return GammaNMarked(n, marking)
    except (IndexError, ValueError) as exc:
        raise InvalidConfigError(f"bad group spec {spec!r}: {exc}") from None
    raise InvalidConfigError(f"unknown group spec {spec!r}")


# --- ball enumeration -------------------------------------------------------


class Ball:
    """Exact radius-r ball with BFS distances and witness words."""

    __slots__ = ("group", "radius", "dist", "witness", "elements", "exact")

    def __init__(self, group, radius, dist, witness, elements, exact=True):
        self.group = group
        self.radius = radius
        self.dist = dist  # elem_key -> distance
        self.witness = witness  # elem_key -> shortest witness word (letters)
        self.elements = elements  # elem_key -> element
        self.exact = exact  # False when the budget cut enumeration short

    @property
    def size(self) -> int:
        return len(self.dist)

    def word_length(self, elem) -> int:
        key = self.group.elem_key(elem)
        try:
            return self.dist[key]
        except KeyError:
            raise WreathlabError(
                f"element outside the enumerated radius {self.radius}"
            ) from None

    def contains(self, elem) -> bool:
        return self.group.elem_key(elem) in self.dist

    def volumes(self) -> List[int]:
        """V(0..radius): cumulative element counts by distance."""
        counts = [0] * (self.radius + 1)
        for d in self.dist.values():
            counts[d] += 1
        out = []
        total = 0
        for c in counts:
            total += c
            out.append(total)
        return out


def ball(G: MarkedGroup, r: int, budget: int = DEFAULT_BALL_BUDGET) -> Ball:
    """BFS ball of radius r around the identity; raises on budget exhaustion."""
    if r < 0:
        raise InvalidConfigError("radius must be >= 0")
    ident = G.identity()
    ident_key = G.elem_key(ident)
    dist = {ident_key: 0}
    witness = {ident_key: ""}
    elements = {ident_key: ident}
    frontier = [ident]
    letters = sorted(G.letter_elems().items())
    for depth in range(1, r + 1):
        nxt = []
        for x in frontier:
            xw = witness[G.elem_key(x)]
            for ch, step in letters:
                y = G.mul(x, step)
                key = G.elem_key(y)
                if key not in dist:
                    if len(dist) >= budget:
                        raise BudgetExceededError(
                            f"ball budget {budget} exhausted at radius {depth}"
                        )
                    dist[key] = depth
                    witness[key] = xw + ch
                    elements[key] = y
                    nxt.append(y)
        frontier = nxt
    return Ball(G, r, dist, witness, elements)


# --- Chabauty agreement -----------------------------------------------------


class AgreementResult(int):
    """Relation-length agreement; .exact is False for a budget-cut lower bound.

    Relation agreement L corresponds to marked balls of radius L // 2
    coinciding (a length-L relation's prefixes stay within L // 2 of the
    identity).
    """

    exact: bool
    discrepancy: Optional[str]

    def __new__(cls, value: int, exact: bool = True, discrepancy: Optional[str] = None):
        obj = super().__new__(cls, value)
        obj.exact = exact
        obj.discrepancy = discrepancy
        return obj


def agreement_radius(
    G1: MarkedGroup,
    G2: MarkedGroup,
    cap: int,
    budget: int = DEFAULT_BALL_BUDGET,
) -> AgreementResult:
    """Largest L <= cap with identical relation sets up to word length L.

    Synchronized pair BFS: a shortest word trivial in exactly one of the two
    groups is found at depth L + 1.  On budget exhaustion the last fully
    explored depth is returned as a flagged lower bound.
    """
    if G1.d != G2.d:
        raise InvalidConfigError("marking sizes differ")
    start = (G1.identity(), G2.identity())
    start_key = (G1.elem_key(start[0]), G2.elem_key(start[1]))
    seen = {start_key}
    frontier = [(start, "")]
    letters1 = sorted(G1.letter_elems().items())
    letters2 = G2.letter_elems()
    for depth in range(1, cap + 1):
        nxt = []
        for (x1, x2), w in frontier:
            for ch, s1 in letters1:
                y1 = G1.mul(x1, s1)
                y2 = G2.mul(x2, letters2[ch])
                key = (G1.elem_key(y1), G2.elem_key(y2))
                if key in seen:
                    continue
                t1 = G1.is_identity(y1)
                t2 = G2.is_identity(y2)
                if t1 != t2:
                    return AgreementResult(depth - 1, True, w + ch)
                if len(seen) >= budget:
                    return AgreementResult(depth - 1, False, None)
                seen.add(key)
                nxt.append(((y1, y2), w + ch))
        frontier = nxt
    return AgreementResult(cap, True, None)


def diagonal_product(G1: MarkedGroup, G2: MarkedGroup) -> DiagonalMarked:
    return DiagonalMarked(G1, G2)


def verify_quotient(G_src: MarkedGroup, G_quo: MarkedGroup, horizon: int = 8,
                    budget: int = DEFAULT_BALL_BUDGET) -> bool:
    """Check (to the given word length) that every relation of G_src holds
    in G_quo, i.e. that G_quo is a marked quotient of G_src."""
    if G_src.d != G_quo.d:
        raise InvalidConfigError("marking sizes differ")
    start = (G_src.identity(), G_quo.identity())
    start_key = (G_src.elem_key(start[0]), G_quo.elem_key(start[1]))
    seen = {start_key}
    frontier = [start]
    letters1 = sorted(G_src.letter_elems().items())
    letters2 = G_quo.letter_elems()
    for _ in range(horizon):
        nxt = []
        for x1, x2 in frontier:
            for ch, s1 in letters1:
                y1 = G_src.mul(x1, s1)
                y2 = G_quo.mul(x2, letters2[ch])
                key = (G_src.elem_key(y1), G_quo.elem_key(y2))
                if key in seen:
                    continue
                if G_src.is_identity(y1) and not G_quo.is_identity(y2):
                    return False
                if len(seen) >= budget:
                    raise BudgetExceededError("quotient check budget exhausted")
                seen.add(key)
                nxt.append((y1, y2))
        frontier = nxt
    return True


# --- marking search and lift ------------------------------------------------


class MarkingSearchResult:
    """A certified d-marking of the automaton group (or another base group).

    Fields mirror the search pipeline: the marking words w_j, the relation
    agreement with the free group, ell (max marking-word length), the
    certificate words z_a, z_b expressing the standard generators in the
    marking, and their lengths (q_a, q_b).
    """

    __slots__ = ("marking", "relation_agreement", "ell", "q_a", "q_b", "z_a", "z_b")

    def __init__(self, marking, relation_agreement, z_a, z_b):
        self.marking = tuple(marking)
        self.relation_agreement = relation_agreement
        self.ell = max(len(w) for w in self.marking)
        self.z_a = z_a
        self.z_b = z_b
        self.q_a = len(z_a)
        self.q_b = len(z_b)

    @property
    def q(self) -> int:
        return max(self.q_a, self.q_b, 1)

    def to_json(self) -> dict:
        return {
            "marking": list(self.marking),
            "relation_agreement": int(self.relation_agreement),
            "agreement_exact": getattr(self.relation_agreement, "exact", True),
            "ell": self.ell,
            "q_a": self.q_a,
            "q_b": self.q_b,
            "z_a": self.z_a,
            "z_b": self.z_b,
        }

    def __repr__(self) -> str:
        return (
            f"MarkingSearchResult(marking={self.marking}, "
            f"agreement={int(self.relation_agreement)}, ell={self.ell}, q={self.q})"
        )


def _certify_generation(
    G: MarkedGroup, marked: MarkedGroup, cert_radius: int, budget: int
) -> Optional[Tuple[str, str]]:
    """Search words z_a, z_b over the candidate marking that evaluate to the
    standard generators of G; returns None if not found within the radius."""
    targets = {
        G.elem_key(G.generator(1)): None,
        G.elem_key(G.generator(2)): None,
    }
    want = [G.elem_key(G.generator(1)), G.elem_key(G.generator(2))]
    try:
        b = ball(marked, cert_radius, budget)
    except BudgetExceededError:
        return None
    for key in want:
        if key not in b.dist:
            return None
        targets[key] = b.witness[key]
    return targets[want[0]], targets[want[1]]


def search_markings(
    target_agreement: int,
    length_cap: int,
    budget: int = DEFAULT_BALL_BUDGET,
    group: Optional[MarkedGroup] = None,
    cert_radius: int = 6,
    max_results: int = 10,
) -> List[MarkingSearchResult]:
    """Exhaustive search over pairs of words of length <= length_cap for
    certified 2-markings, sorted by relation agreement with the free group.

    Only markings with a found generation certificate are returned; an empty
    list is a valid outcome.
    """
    if group is None:
        group = FGGroupMarked(("a", "b"))
    free = FreeGroupMarked(2)
    # all nonempty reduced words of length <= length_cap over a/A/b/B
    candidates: List[str] = []
    frontier = [""]
    for _ in range(length_cap):
        nxt = []
        for w in frontier:
            for ch in "aAbB":
                r = word_mul(w, ch)
                if len(r) == len(w) + 1:
                    nxt.append(r)
        candidates.extend(nxt)
        frontier = nxt
    results: List[MarkingSearchResult] = []
    for w1 in candidates:
        if group.is_identity(group.eval_word(w1)):
            continue
        for w2 in candidates:
            if w2 == w1:
                continue
            if group.is_identity(group.eval_word(w2)):
                continue
            if isinstance(group, FGGroupMarked):
                marked = FGGroupMarked((w1, w2))
            elif isinstance(group, GammaNMarked):
                marked = GammaNMarked(group.n, (w1, w2))
            else:
                marked = _RemarkedGroup(group, (w1, w2))
            cert = _certify_generation(group, marked, cert_radius, budget)
            if cert is None:
                continue
            agreement = agreement_radius(marked, free, target_agreement, budget)
            results.append(MarkingSearchResult((w1, w2), agreement, cert[0], cert[1]))
    results.sort(
        key=lambda res: (-int(res.relation_agreement), res.ell, res.marking)
    )
    return results[:max_results]


class _RemarkedGroup(MarkedGroup):
    """The same group, marked by the evaluations of given words."""

    def __init__(self, base: MarkedGroup, words: Tuple[str, ...]):
        self.base = base
        self.marking = tuple(words)
        self.d = len(words)
        self._gens = [base.eval_word(w) for w in words]

    def identity(self):
        return self.base.identity()

    def generator(self, i: int):
        return self._gens[i - 1]

    def mul(self, x, y):
        return self.base.mul(x, y)

    def inv(self, x):
        return self.base.inv(x)

    def is_identity(self, x) -> bool:
        return self.base.is_identity(x)

    def elem_key(self, x):
        return self.base.elem_key(x)

    def canonical_key(self, x) -> bytes:
        return self.base.canonical_key(x)

    def spec(self) -> str:
        return f"{self.base.spec()}[{','.join(self.marking)}]"


def lift_marking(T: MarkingSearchResult, n: int) -> GammaNMarked:
    """Transport a marking of the automaton group to the level-n extension.

    Requires n > ell * q (marking length times certificate length); the
    generation certificates are re-verified by evaluation and a failure is
    an error, never silently ignored.
    """
    if n <= T.ell * T.q:
        raise InvalidConfigError(
            f"level {n} does not exceed ell*q = {T.ell * T.q}"
        )
    lifted = GammaNMarked(n, T.marking)
    a_n, b_n = gamma_generators(n)
    if lifted.eval_word(T.z_a) != a_n:
        raise WreathlabError("certificate z_a fails to re-verify in the lift")
    if lifted.eval_word(T.z_b) != b_n:
        raise WreathlabError("certificate z_b fails to re-verify in the lift")
    return lifted
