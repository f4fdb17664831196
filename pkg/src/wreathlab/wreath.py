"""Wreath extensions over the level-n tree quotients.

Elements of W_n = A wr_{T_n} G_n are pairs (configuration, portrait): a
finitely supported map from level-n vertices into A = <s,t | s^3 = t^3 = 1>
together with a depth-n portrait permuting the coordinates.  The subgroup
under study is generated by

    a_n = (empty config, portrait of a)
    b_n = ({2^{n-1}0 -> s, 2^n -> t}, portrait of b)

where 2^{n-1}0 means n-1 twos followed by 0.  Product rule (right action):
(phi, g)(psi, h) = (v -> phi(v) * psi(v.g), gh).
"""

from __future__ import annotations

from typing import Dict, Tuple, Union

from .trees import (
    Portrait,
    _index_to_vertex,
    _vertex_to_index,
    perm_invert,
    portrait_of_word,
)
from .words import (
    FP_IDENTITY,
    FpElem,
    FreeWord,
    S_FACTOR,
    T_FACTOR,
    fp_inv,
    fp_mul,
    fp_parse,
    fp_text,
)


class WreathElem:
    """Element (configuration, portrait) of the level-n wreath extension.

    The configuration maps integer vertex indices (level-n strings read as
    base-3 numbers, first digit most significant) to normal-form elements of
    the free product; identity values are never stored.
    """

    __slots__ = ("level", "config", "portrait", "_inv_perm", "_key")

    def __init__(self, level: int, config: Dict[int, FpElem], portrait: Portrait):
        if portrait.depth != level:
            raise ValueError("configuration level and portrait depth differ")
        self.level = level
        self.config = config
        self.portrait = portrait
        self._inv_perm = None
        self._key = None

    @classmethod
    def identity(cls, level: int) -> "WreathElem":
        return cls(level, {}, Portrait.identity(level))

    def key(self):
        """Canonical hashable key; equal elements give equal keys."""
        if self._key is None:
            self._key = (self.portrait.perm(), tuple(sorted(self.config.items())))
        return self._key

    def mul(self, other: "WreathElem") -> "WreathElem":
        if self.level != other.level:
            raise ValueError("level mismatch")
        if self._inv_perm is None:
            self._inv_perm = perm_invert(self.portrait.perm())
        inv = self._inv_perm
        out = dict(self.config)
        for j, y in other.config.items():
            i = inv[j]
            merged = fp_mul(out.get(i, FP_IDENTITY), y)
            if merged:
                out[i] = merged
            elif i in out:
                del out[i]
        return WreathElem(self.level, out, self.portrait.mul(other.portrait))

    def inv(self) -> "WreathElem":
        perm = self.portrait.perm()
        out = {}
        for i, x in self.config.items():
            out[perm[i]] = fp_inv(x)
        return WreathElem(self.level, out, self.portrait.inv())

    def is_identity(self) -> bool:
        return not self.config and self.portrait.is_identity()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WreathElem)
            and self.level == other.level
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        cfg = {
            _index_to_vertex(i, self.level): fp_text(x)
            for i, x in sorted(self.config.items())
        }
        return f"WreathElem(level={self.level}, config={cfg}, portrait={self.portrait.to_json()})"

    def value_at(self, vertex: str) -> FpElem:
        return self.config.get(_vertex_to_index(vertex), FP_IDENTITY)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "config": {
                _index_to_vertex(i, self.level): fp_text(x)
                for i, x in sorted(self.config.items())
            },
            "portrait": self.portrait.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "WreathElem":
        level = data["level"]
        config = {
            _vertex_to_index(v): fp_parse(text)
            for v, text in data["config"].items()
            if text != "id"
        }
        return cls(level, config, Portrait(level, dict(data["portrait"])))


def wreath_mul(x: WreathElem, y: WreathElem) -> WreathElem:
    return x.mul(y)


def gamma_generators(n: int) -> Tuple[WreathElem, WreathElem]:
    """The pair (a_n, b_n) generating the level-n extension."""
    if n < 1:
        raise ValueError("level must be >= 1")
    a_n = WreathElem(n, {}, portrait_of_word("a", n))
    config = {
        _vertex_to_index("2" * (n - 1) + "0"): ((S_FACTOR, 1),),
        _vertex_to_index("2" * n): ((T_FACTOR, 1),),
    }
    b_n = WreathElem(n, config, portrait_of_word("b", n))
    return a_n, b_n


def eval_word_in_gamma(w: Union[str, FreeWord], n: int) -> WreathElem:
    """Image of a word over {a, b} under a -> a_n, b -> b_n."""
    if isinstance(w, FreeWord):
        w = w.chars
    a_n, b_n = gamma_generators(n)
    letters = {"a": a_n, "A": a_n.inv(), "b": b_n, "B": b_n.inv()}
    acc = WreathElem.identity(n)
    for ch in w:
        acc = acc.mul(letters[ch])
    return acc


# --- the level-raising quotient homomorphism --------------------------------


def _tau_fp(x: FpElem) -> Tuple[Dict[int, FpElem], int]:
    """Image of a free-product element under s -> (id, a), t -> (d_0^s + d_2^t, id).

    Returns (configuration over the 3 child slots, power of the 3-cycle),
    composed syllable by syllable in the 3-point wreath product.
    """
    psi: Dict[int, FpElem] = {}
    c = 0
    for fac, exp in x:
        if fac == S_FACTOR:
            c = (c + exp) % 3
        else:
            for e, val in ((0, ((S_FACTOR, exp),)), (2, ((T_FACTOR, exp),))):
                slot = (e - c) % 3
                merged = fp_mul(psi.get(slot, FP_IDENTITY), val)
                if merged:
                    psi[slot] = merged
                else:
                    psi.pop(slot, None)
    return psi, c


def tau_lift(x: WreathElem) -> WreathElem:
    """The quotient homomorphism from level n to level n+1.

    Each configuration value is rewritten over the three children of its
    vertex: its cyclic part becomes a new bottom portrait label, its residual
    configuration lands at children u0 / u2; the old portrait is carried up
    unchanged on levels < n.  Sends a_n to a_{n+1} and b_n to b_{n+1}.
    """
    n = x.level
    new_config: Dict[int, FpElem] = {}
    new_labels = dict(x.portrait.labels)
    for idx, val in x.config.items():
        psi, c = _tau_fp(val)
        if c:
            new_labels[_index_to_vertex(idx, n)] = c
        for e, fv in psi.items():
            new_config[idx * 3 + e] = fv
    return WreathElem(n + 1, new_config, Portrait(n + 1, new_labels))
