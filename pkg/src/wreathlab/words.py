"""Free-group words and free-product normal forms.

Words over d signed generators use a compact text form: lowercase letters
'a', 'b', 'c', ... are generators, the corresponding capitals are their
inverses ("a b A" parses to the word a b a^-1).  Internally a reduced word
is just its canonical string, one character per letter.

Elements of a free product of two cyclic groups of order three,
<s, t | s^3 = t^3 = 1>, are kept in alternating-syllable normal form:
a tuple of (factor, exponent) pairs with factor in {0 (s), 1 (t)} and
exponent in {1, 2}, adjacent factors distinct.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

ALPHABET = "abcdefghijklmnopqrstuvwxyz"

FpElem = Tuple[Tuple[int, int], ...]

FP_IDENTITY: FpElem = ()


def _inv_char(ch: str) -> str:
    return ch.lower() if ch.isupper() else ch.upper()


def reduce_word(chars: str) -> str:
    """Freely reduce a letter string; returns the canonical reduced string."""
    out: list[str] = []
    for ch in chars:
        if out and out[-1] == _inv_char(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def word_mul(u: str, v: str) -> str:
    """Product of two reduced words (cancellation only at the seam)."""
    i = len(u)
    j = 0
    n = len(v)
    while i > 0 and j < n and u[i - 1] == _inv_char(v[j]):
        i -= 1
        j += 1
    return u[:i] + v[j:]


def word_inv(u: str) -> str:
    return "".join(_inv_char(ch) for ch in reversed(u))


class FreeWord:
    """A freely reduced word over d signed generators.

    Immutable; the empty word is the identity.
    """

    __slots__ = ("chars", "d")

    def __init__(self, letters: Iterable[Tuple[int, int]] | str = "", d: int = 2):
        if isinstance(letters, str):
            chars = reduce_word(letters.replace(" ", ""))
        else:
            pieces = []
            for gen, sign in letters:
                if not 1 <= gen <= d:
                    raise ValueError(f"generator index {gen} out of range 1..{d}")
                if sign not in (1, -1):
                    raise ValueError(f"bad sign {sign}")
                ch = ALPHABET[gen - 1]
                pieces.append(ch if sign == 1 else ch.upper())
            chars = reduce_word("".join(pieces))
        for ch in chars:
            idx = ALPHABET.index(ch.lower()) + 1
            if idx > d:
                raise ValueError(f"generator {ch!r} out of range for d={d}")
        self.chars = chars
        self.d = d

    @property
    def letters(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(
            (ALPHABET.index(ch.lower()) + 1, 1 if ch.islower() else -1)
            for ch in self.chars
        )

    def __len__(self) -> int:
        return len(self.chars)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(word_mul(self.chars, other.chars), max(self.d, other.d))

    def inv(self) -> "FreeWord":
        return FreeWord(word_inv(self.chars), self.d)

    def is_identity(self) -> bool:
        return not self.chars

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeWord) and self.chars == other.chars

    def __hash__(self) -> int:
        return hash(("FreeWord", self.chars))

    def __repr__(self) -> str:
        return f"FreeWord({self.text()!r})"

    def text(self) -> str:
        return " ".join(self.chars) if self.chars else ""

    @classmethod
    def parse(cls, text: str, d: int = 2) -> "FreeWord":
        return cls(text, d)


def reduce_free_word(letters: Sequence[Tuple[int, int]] | str, d: int = 2) -> FreeWord:
    """Unique freely reduced form of a raw letter sequence."""
    return FreeWord(letters, d)


# --- free product (Z/3) * (Z/3) -------------------------------------------

S_FACTOR = 0
T_FACTOR = 1


def fp_make(syllables: Iterable[Tuple[int, int]]) -> FpElem:
    """Normal form from raw (factor, exponent) syllables; exponents mod 3."""
    out: list[Tuple[int, int]] = []
    for fac, exp in syllables:
        if fac not in (S_FACTOR, T_FACTOR):
            raise ValueError(f"bad factor {fac}")
        exp %= 3
        if exp == 0:
            continue
        if out and out[-1][0] == fac:
            merged = (out[-1][1] + exp) % 3
            if merged == 0:
                out.pop()
            else:
                out[-1] = (fac, merged)
        else:
            out.append((fac, exp))
    return tuple(out)


def fp_mul(x: FpElem, y: FpElem) -> FpElem:
    """Normal-form product with cascading boundary merges."""
    out = list(x)
    for fac, exp in y:
        if out and out[-1][0] == fac:
            merged = (out[-1][1] + exp) % 3
            if merged == 0:
                out.pop()
            else:
                out[-1] = (fac, merged)
        else:
            out.append((fac, exp))
    return tuple(out)


def fp_inv(x: FpElem) -> FpElem:
    return tuple((fac, 3 - exp) for fac, exp in reversed(x))


def fp_abelianize(x: FpElem) -> Tuple[int, int]:
    """(total s-exponent, total t-exponent) mod 3; (0,0) iff x in [A,A]."""
    s = sum(exp for fac, exp in x if fac == S_FACTOR) % 3
    t = sum(exp for fac, exp in x if fac == T_FACTOR) % 3
    return (s, t)


def fp_single_factor(x: FpElem) -> bool:
    """True iff x lies in <s> or <t> (at most one syllable)."""
    return len(x) <= 1


def fp_parse(text: str) -> FpElem:
    """Parse "s t2 s" style text (exponent suffix, default 1)."""
    syllables = []
    for tok in text.split():
        name = tok[0]
        if name == "s":
            fac = S_FACTOR
        elif name == "t":
            fac = T_FACTOR
        else:
            raise ValueError(f"bad free-product token {tok!r}")
        exp = int(tok[1:]) if len(tok) > 1 else 1
        syllables.append((fac, exp))
    return fp_make(syllables)


def fp_text(x: FpElem) -> str:
    if not x:
        return "id"
    names = {S_FACTOR: "s", T_FACTOR: "t"}
    return " ".join(names[f] + ("" if e == 1 else str(e)) for f, e in x)
