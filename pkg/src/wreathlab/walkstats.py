"""Step distributions and random-walk statistics on marked groups.

Everything is computed at finite time/radius: exact t-fold convolutions of a
finitely supported step distribution, entropy profiles H(t) (natural log),
speed, ball growth, return probabilities and the spectral-radius estimate
rho_hat(t) = mu^(2t)(id)^(1/(2t)), the fundamental-inequality slack, quotient
comparisons, and the conditional kernel measure of a diagonal product.

Probabilities are 64-bit floats by default; a big-rational mode (Fraction)
is available for small t where fixtures want exact masses.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import BudgetExceededError, InvalidConfigError, WreathlabError
from .marked import (
    Ball,
    DiagonalMarked,
    MarkedGroup,
    ball,
    verify_quotient,
)
from .words import ALPHABET, reduce_word, word_inv, word_mul

DEFAULT_CONV_BUDGET = 10_000_000
MASS_TOL = 1e-12
NONDEGENERACY_HORIZON = 12


class StepDistribution:
    """Finitely supported step distribution given by words over d letters.

    support: list of (reduced word, probability).  Probabilities may be
    floats or Fractions (rational mode); they must be positive and sum to 1.
    Nondegeneracy (the support generates the free group as a semigroup, hence
    any marked quotient too) is checked on construction unless waived.
    """

    __slots__ = ("support", "d", "symmetric", "lazy", "waived")

    def __init__(
        self,
        support: Iterable[Tuple[str, Union[float, Fraction]]],
        d: int = 2,
        waive_nondegeneracy: bool = False,
    ):
        merged: Dict[str, Union[float, Fraction]] = {}
        for w, p in support:
            w = reduce_word(w.replace(" ", ""))
            if any(ALPHABET.index(ch.lower()) + 1 > d for ch in w):
                raise InvalidConfigError(f"support word {w!r} out of range for d={d}")
            if p < 0:
                raise InvalidConfigError(f"negative mass {p} on {w!r}")
            if p == 0:
                continue
            merged[w] = merged.get(w, 0) + p
        total = sum(merged.values())
        exact = all(isinstance(p, Fraction) for p in merged.values())
        if exact:
            if total != 1:
                raise InvalidConfigError(f"mass sums to {total}, not 1")
        elif abs(total - 1) > MASS_TOL:
            raise InvalidConfigError(f"mass sums to {total}, not 1")
        self.support = tuple(sorted(merged.items()))
        self.d = d
        self.symmetric = all(
            merged.get(word_inv(w)) == p for w, p in merged.items()
        )
        self.lazy = "" in merged
        self.waived = waive_nondegeneracy
        if not waive_nondegeneracy:
            self._check_nondegenerate()

    def _check_nondegenerate(self, horizon: int = NONDEGENERACY_HORIZON) -> None:
        # Semigroup closure of the support inside the free group, truncated
        # to the word-length horizon, must contain every signed generator.
        words = [w for w, _ in self.support]
        closure = set(words)
        frontier = list(closure)
        targets = set()
        for i in range(self.d):
            targets.add(ALPHABET[i])
            targets.add(ALPHABET[i].upper())
        while frontier and not targets <= closure:
            nxt = []
            for u in frontier:
                for w in words:
                    v = word_mul(u, w)
                    if len(v) <= horizon and v not in closure:
                        closure.add(v)
                        nxt.append(v)
            frontier = nxt
        missing = targets - closure
        if missing:
            raise InvalidConfigError(
                "degenerate step distribution: semigroup closure up to length "
                f"{horizon} misses {sorted(missing)} (pass waive_nondegeneracy "
                "to use it anyway)"
            )

    def is_rational(self) -> bool:
        return all(isinstance(p, Fraction) for _, p in self.support)

    def first_moment(self, G: MarkedGroup, length_ball: Optional[Ball] = None):
        """Sum of |g|_S mu(g) over the support, measured in G's word metric."""
        if length_ball is None:
            r = max((len(w) for w, _ in self.support), default=0)
            length_ball = ball(G, r)
        return sum(p * length_ball.word_length(G.eval_word(w)) for w, p in self.support)

    def __repr__(self) -> str:
        return f"StepDistribution({list(self.support)!r})"


def make_step_distribution(
    spec: Union[str, Iterable[Tuple[str, Union[float, Fraction]]]],
    d: int = 2,
    rational: bool = False,
    waive_nondegeneracy: bool = False,
) -> StepDistribution:
    """Build a step distribution from a name or explicit (word, mass) pairs.

    Named measures: "srw" (uniform on the 2d signed generators) and
    "lazy-srw" (half identity, half srw).
    """
    one = Fraction(1) if rational else 1.0
    if isinstance(spec, str):
        name = spec.strip().lower()
        letters = [ALPHABET[i] for i in range(d)] + [
            ALPHABET[i].upper() for i in range(d)
        ]
        if name == "srw":
            pairs = [(ch, one / (2 * d)) for ch in letters]
        elif name in ("lazy-srw", "lazy_srw", "lazy"):
            pairs = [("", one / 2)] + [(ch, one / (4 * d)) for ch in letters]
        else:
            raise InvalidConfigError(f"unknown measure spec {spec!r}")
    else:
        pairs = [
            (w, Fraction(p) if rational else float(p)) for w, p in spec
        ]
    return StepDistribution(pairs, d, waive_nondegeneracy)


class DistributionTable:
    """Finitely supported distribution over canonical element keys of G."""

    __slots__ = ("group", "step", "probs", "elems")

    def __init__(self, group: MarkedGroup, step: int, probs: dict, elems: dict):
        self.group = group
        self.step = step
        self.probs = probs  # elem_key -> probability
        self.elems = elems  # elem_key -> element

    @classmethod
    def point_mass(cls, group: MarkedGroup, rational: bool = False) -> "DistributionTable":
        ident = group.identity()
        key = group.elem_key(ident)
        one = Fraction(1) if rational else 1.0
        return cls(group, 0, {key: one}, {key: ident})

    def total(self):
        return sum(self.probs.values())

    def mass_at_identity(self):
        key = self.group.elem_key(self.group.identity())
        zero = Fraction(0) if self.is_rational() else 0.0
        return self.probs.get(key, zero)

    def is_rational(self) -> bool:
        return any(isinstance(p, Fraction) for p in self.probs.values())

    def entropy(self) -> float:
        """Shannon entropy in nats.

        In rational mode, equal probabilities are grouped so that uniform
        distributions give exact log-counts (H of uniform-on-4 is exactly
        math.log(4))."""
        if self.is_rational():
            by_p: Dict[Fraction, int] = {}
            for p in self.probs.values():
                if p:
                    by_p[p] = by_p.get(p, 0) + 1
            h = 0.0
            for p, count in by_p.items():
                h += float(count * p) * math.log(p.denominator / p.numerator)
            return h
        return -sum(p * math.log(p) for p in self.probs.values() if p > 0)

    def expected_word_length(self, length_ball: Ball):
        return sum(
            p * length_ball.dist[key] for key, p in self.probs.items()
        )

    def pushforward(self, G_quo: MarkedGroup, project) -> "DistributionTable":
        """Image distribution under an element map into G_quo."""
        probs: dict = {}
        elems: dict = {}
        for key, p in self.probs.items():
            y = project(self.elems[key])
            yk = G_quo.elem_key(y)
            if yk in probs:
                probs[yk] += p
            else:
                probs[yk] = p
                elems[yk] = y
        return DistributionTable(G_quo, self.step, probs, elems)

    def convolve_table(
        self, other: "DistributionTable", budget: int = DEFAULT_CONV_BUDGET
    ) -> "DistributionTable":
        G = self.group
        probs: dict = {}
        elems: dict = {}
        for k1, p1 in self.probs.items():
            x = self.elems[k1]
            for k2, p2 in other.probs.items():
                y = G.mul(x, other.elems[k2])
                yk = G.elem_key(y)
                if yk in probs:
                    probs[yk] += p1 * p2
                else:
                    if len(probs) >= budget:
                        raise BudgetExceededError(
                            f"convolution budget {budget} exhausted"
                        )
                    probs[yk] = p1 * p2
                    elems[yk] = y
        return DistributionTable(G, self.step + other.step, probs, elems)

    def step_convolve(
        self,
        mu_elems: Sequence[Tuple[object, Union[float, Fraction]]],
        budget: int = DEFAULT_CONV_BUDGET,
    ) -> "DistributionTable":
        """One more step: table'(x h) += table(x) mu(h)."""
        G = self.group
        probs: dict = {}
        elems: dict = {}
        for key, p in self.probs.items():
            x = self.elems[key]
            for h, q in mu_elems:
                y = G.mul(x, h)
                yk = G.elem_key(y)
                if yk in probs:
                    probs[yk] += p * q
                else:
                    if len(probs) >= budget:
                        raise BudgetExceededError(
                            f"convolution budget {budget} exhausted"
                        )
                    probs[yk] = p * q
                    elems[yk] = y
        return DistributionTable(G, self.step + 1, probs, elems)

    def self_inner_product_at_identity(self):
        """mu^(2t)(id) computed as sum_x mu^(t)(x) mu^(t)(x^-1).

        Avoids materializing the 2t-fold table."""
        G = self.group
        zero = Fraction(0) if self.is_rational() else 0.0
        total = zero
        for key, p in self.probs.items():
            ik = G.elem_key(G.inv(self.elems[key]))
            q = self.probs.get(ik)
            if q is not None:
                total += p * q
        return total


def _mu_elems(G: MarkedGroup, mu: StepDistribution):
    return [(G.eval_word(w), p) for w, p in mu.support]


def exact_convolution(
    G: MarkedGroup,
    mu: StepDistribution,
    t: int,
    budget: int = DEFAULT_CONV_BUDGET,
) -> DistributionTable:
    """Exact t-fold pushforward convolution of mu on G."""
    if t < 0:
        raise InvalidConfigError("t must be >= 0")
    table = DistributionTable.point_mass(G, mu.is_rational())
    elems = _mu_elems(G, mu)
    for _ in range(t):
        table = table.step_convolve(elems, budget)
    return table


def convolution_profile(
    G: MarkedGroup,
    mu: StepDistribution,
    t_max: int,
    budget: int = DEFAULT_CONV_BUDGET,
) -> List[DistributionTable]:
    """Tables for t = 0..t_max, computed incrementally."""
    tables = [DistributionTable.point_mass(G, mu.is_rational())]
    elems = _mu_elems(G, mu)
    for _ in range(t_max):
        tables.append(tables[-1].step_convolve(elems, budget))
    return tables


def entropy_profile(
    G: MarkedGroup,
    mu: StepDistribution,
    t_max: int,
    budget: int = DEFAULT_CONV_BUDGET,
    tables: Optional[List[DistributionTable]] = None,
) -> List[dict]:
    """Rows {t, H, H_over_t, H_increment} for t = 0..t_max (nats)."""
    if tables is None:
        tables = convolution_profile(G, mu, t_max, budget)
    rows = []
    prev = 0.0
    for t, table in enumerate(tables[: t_max + 1]):
        h = table.entropy()
        rows.append(
            {
                "t": t,
                "H": h,
                "H_over_t": h / t if t else 0.0,
                "H_increment": h - prev,
            }
        )
        prev = h
    return rows


def speed_estimate(
    G: MarkedGroup,
    mu: StepDistribution,
    t: int,
    mode: str = "exact",
    samples: int = 10_000,
    seed: int = 0,
    budget: int = DEFAULT_CONV_BUDGET,
    length_ball: Optional[Ball] = None,
) -> Tuple[float, Optional[float]]:
    """(E|W_t|_S / t, half-width of 95% CI); the CI is None in exact mode.

    Monte Carlo uses one independent substream per trajectory, derived from
    (seed, trajectory index), so results do not depend on how trajectories
    are scheduled across threads.
    """
    if t <= 0:
        raise InvalidConfigError("t must be >= 1")
    max_len = max((len(w) for w, _ in mu.support), default=0)
    if length_ball is None:
        length_ball = ball(G, t * max_len)
    if mode == "exact":
        table = exact_convolution(G, mu, t, budget)
        mean = sum(
            p * length_ball.word_length(table.elems[k])
            for k, p in table.probs.items()
        )
        return float(mean) / t, None
    if mode != "monte_carlo":
        raise InvalidConfigError(f"unknown speed mode {mode!r}")
    words = [w for w, _ in mu.support]
    cum = []
    acc = 0.0
    for _, p in mu.support:
        acc += float(p)
        cum.append(acc)
    values = []
    for i in range(samples):
        rng = random.Random(f"{seed}:{i}")
        x = G.identity()
        for _ in range(t):
            u = rng.random()
            j = 0
            while j < len(cum) - 1 and u > cum[j]:
                j += 1
            x = G.mul(x, G.eval_word(words[j]))
        values.append(length_ball.word_length(x) / t)
    mean = sum(values) / samples
    var = sum((v - mean) ** 2 for v in values) / max(samples - 1, 1)
    ci = 1.96 * math.sqrt(var / samples)
    return mean, ci


def growth_profile(
    G: MarkedGroup,
    r_max: int,
    budget: int = DEFAULT_CONV_BUDGET,
    growth_ball: Optional[Ball] = None,
) -> List[dict]:
    """Rows {r, V, v_hat} with V(r) the ball size and v_hat = log V(r)/r."""
    if growth_ball is None or growth_ball.radius < r_max:
        growth_ball = ball(G, r_max, budget)
    vols = growth_ball.volumes()
    rows = []
    for r in range(r_max + 1):
        v = vols[r]
        rows.append({"r": r, "V": v, "v_hat": math.log(v) / r if r else 0.0})
    return rows


def spectral_radius_profile(
    G: MarkedGroup,
    mu: StepDistribution,
    t_max: int,
    budget: int = DEFAULT_CONV_BUDGET,
    tables: Optional[List[DistributionTable]] = None,
) -> List[dict]:
    """Rows {t, return_prob, rho_hat} with return_prob = mu^(2t)(id)."""
    if not mu.symmetric:
        raise InvalidConfigError("spectral radius requires a symmetric measure")
    if tables is None:
        tables = convolution_profile(G, mu, t_max, budget)
    rows = []
    for t in range(1, t_max + 1):
        ret = tables[t].self_inner_product_at_identity()
        rows.append(
            {
                "t": t,
                "return_prob": ret,
                "rho_hat": float(ret) ** (1.0 / (2 * t)) if ret > 0 else 0.0,
            }
        )
    return rows


def fundamental_inequality_report(
    G: MarkedGroup,
    mu: StepDistribution,
    t: int,
    r: int,
    budget: int = DEFAULT_CONV_BUDGET,
) -> dict:
    """Finite-scale estimators and slacks of h <= v * l and h <= v * E|step|.

    Estimators at matched scales: h_hat = H(t) - H(t-1), l_hat = E|W_t|/t,
    v_hat = log V(r)/r.  The inequality direction is only meaningful when the
    scales are matched (r of order t); mismatched scales can produce negative
    slacks without contradicting the limit statement.
    """
    max_len = max((len(w) for w, _ in mu.support), default=1)
    length_ball = ball(G, max(r, t * max_len), budget)
    tables = convolution_profile(G, mu, t, budget)
    h_hat = tables[t].entropy() - tables[t - 1].entropy()
    l_hat = float(tables[t].expected_word_length(length_ball)) / t
    vols = length_ball.volumes()
    v_hat = math.log(vols[r]) / r if r else 0.0
    first_moment = float(mu.first_moment(G, length_ball))
    return {
        "t": t,
        "r": r,
        "h_hat": h_hat,
        "l_hat": l_hat,
        "v_hat": v_hat,
        "first_moment": first_moment,
        "slack_speed": v_hat * l_hat - h_hat,
        "slack_first_moment": v_hat * first_moment - h_hat,
    }


def quotient_comparison_report(
    G_src: MarkedGroup,
    G_quo: MarkedGroup,
    mu: StepDistribution,
    t_max: int,
    horizon: int = 8,
    budget: int = DEFAULT_CONV_BUDGET,
) -> dict:
    """Per-t entropy and return-probability comparison along a marked quotient.

    The quotient relationship (every relation of G_src holds in G_quo) is
    verified to the given word-length horizon before anything is computed.
    """
    if not verify_quotient(G_src, G_quo, horizon, budget):
        raise WreathlabError(
            f"{G_quo.spec()} is not a marked quotient of {G_src.spec()} "
            f"(checked to length {horizon})"
        )
    src_tables = convolution_profile(G_src, mu, t_max, budget)
    quo_tables = convolution_profile(G_quo, mu, t_max, budget)
    rows = []
    for t in range(t_max + 1):
        h_src = src_tables[t].entropy()
        h_quo = quo_tables[t].entropy()
        ret_src = src_tables[t].self_inner_product_at_identity()
        ret_quo = quo_tables[t].self_inner_product_at_identity()
        rows.append(
            {
                "t": t,
                "H_src": h_src,
                "H_quo": h_quo,
                "H_gap": h_src - h_quo,
                "return_src": ret_src,
                "return_quo": ret_quo,
            }
        )
    return {
        "src": G_src.spec(),
        "quo": G_quo.spec(),
        "horizon": horizon,
        "rows": rows,
    }


def kernel_conditional_measure(
    G_big: DiagonalMarked,
    mu: StepDistribution,
    t: int,
    truncate_radius: Optional[int] = None,
    budget: int = DEFAULT_CONV_BUDGET,
) -> DistributionTable:
    """Distribution of the second coordinate at time t conditioned on the
    first coordinate being the identity; optionally truncated to word length
    <= truncate_radius in the second factor and renormalized."""
    if not isinstance(G_big, DiagonalMarked):
        raise InvalidConfigError("kernel measure needs a diagonal product")
    table = exact_convolution(G_big, mu, t, budget)
    left, right = G_big.left, G_big.right
    probs: dict = {}
    elems: dict = {}
    for key, p in table.probs.items():
        x = table.elems[key]
        if not left.is_identity(x[0]):
            continue
        yk = right.elem_key(x[1])
        if yk in probs:
            probs[yk] += p
        else:
            probs[yk] = p
            elems[yk] = x[1]
    mass = sum(probs.values())
    if not mass:
        raise WreathlabError("conditioning event has zero mass")
    if truncate_radius is not None:
        trunc_ball = ball(right, truncate_radius, budget)
        probs = {k: p for k, p in probs.items() if k in trunc_ball.dist}
        elems = {k: elems[k] for k in probs}
        mass = sum(probs.values())
        if not mass:
            raise WreathlabError("truncation removed all mass")
    probs = {k: p / mass for k, p in probs.items()}
    return DistributionTable(right, t, probs, elems)


def self_convolution_return(
    Q: DistributionTable, m: int, budget: int = DEFAULT_CONV_BUDGET
):
    """Mass at the identity of the 2m-fold self-convolution of Q."""
    acc = DistributionTable.point_mass(Q.group, Q.is_rational())
    for _ in range(2 * m):
        acc = acc.convolve_table(Q, budget)
    return acc.mass_at_identity()
