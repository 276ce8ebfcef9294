"""Buchberger completion for binomial ideals.

Monomials are exponent vectors packed into one Python int, 16 bits per
variable: 15 value bits plus a guard bit used by the divisibility and lcm
tricks. Exponents at or above 2**15 raise ExponentOverflow.

The term order is a block order: the first block of variables is compared
first (graded reverse lexicographic), ties go to grevlex on the second block.
It is encoded as an integer weight ``omega(m) = sum e_i w_i`` such that
``m1 > m2`` iff ``omega(m1) > omega(m2)``. Because omega is additive, every
product and quotient updates the weight without unpacking.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Sequence

FIELD = 16
VALUE_MASK = (1 << (FIELD - 1)) - 1
# order-key layout uses wider fields so degree sums never carry
_KEY_FIELD = 24


class ExponentOverflow(OverflowError):
    pass


class GroebnerTimeout(TimeoutError):
    def __init__(self, elapsed: float, basis_size: int, pairs_left: int):
        super().__init__(
            f"Groebner completion exceeded its deadline after {elapsed:.1f}s "
            f"({basis_size} generators, {pairs_left} pairs pending)"
        )
        self.elapsed = elapsed
        self.basis_size = basis_size
        self.pairs_left = pairs_left


class Ring:
    """Packed-monomial arithmetic for ``nvars`` variables split into two blocks.

    Variables ``0 .. nfirst-1`` form the dominant block. ``grading`` gives the
    positive per-variable weights used by :meth:`degree` (pair selection
    only; the term order always uses plain grevlex degrees within blocks).
    """

    def __init__(self, nvars: int, nfirst: int, grading: Sequence[int] | None = None):
        self.nvars = nvars
        self.nfirst = nfirst
        self.guard = sum(1 << (FIELD * i + FIELD - 1) for i in range(nvars))
        self.ones = sum(1 << (FIELD * i) for i in range(nvars))
        self.nz_add = self.ones * VALUE_MASK
        self.weights = self._order_weights()
        grading = [1] * nvars if grading is None else [int(w) for w in grading]
        if len(grading) != nvars or min(grading) < 1:
            raise ValueError("grading needs one positive weight per variable")
        self._grade_mult = sum(w << (FIELD * (nvars - 1 - i)) for i, w in enumerate(grading))

    def _order_weights(self) -> list[int]:
        # key, most significant first:
        #   deg(block1), -e[nfirst-1], ..., -e[0], deg(block2), -e[n-1], ..., -e[nfirst]
        # Higher key = larger monomial; the -e fields realise "smaller exponent
        # in the last differing variable wins".
        blocks = [range(0, self.nfirst), range(self.nfirst, self.nvars)]
        w = [0] * self.nvars
        pos = 0
        for block in reversed(blocks):
            for i in block:  # lowest field holds the first variable of the block
                w[i] -= 1 << (_KEY_FIELD * pos)
                pos += 1
            deg_weight = 1 << (_KEY_FIELD * pos)
            for i in block:
                w[i] += deg_weight
            pos += 1
        return w

    def pack(self, exps: Sequence[int]) -> int:
        p = 0
        for i, e in enumerate(exps):
            if e < 0 or e > VALUE_MASK:
                raise ExponentOverflow(f"exponent {e} outside 0..{VALUE_MASK}")
            p |= int(e) << (FIELD * i)
        return p

    def unpack(self, p: int) -> tuple[int, ...]:
        return tuple((p >> (FIELD * i)) & VALUE_MASK for i in range(self.nvars))

    def omega(self, exps: Sequence[int]) -> int:
        return sum(int(e) * w for e, w in zip(exps, self.weights) if e)

    def divides(self, a: int, b: int) -> bool:
        g = self.guard
        return ((b | g) - a) & g == g

    def lcm(self, a: int, b: int) -> int:
        ge = (((a | self.guard) - b) & self.guard) >> (FIELD - 1)
        m = ge * VALUE_MASK
        return (a & m) | (b & ~m)

    def nonzero(self, a: int) -> int:
        return (a + self.nz_add) & self.guard

    def degree(self, a: int) -> int:
        """Weighted degree; the product's top field collects sum e_i w_i."""
        return ((a * self._grade_mult) >> (FIELD * (self.nvars - 1))) & ((1 << FIELD) - 1)

    def lowest_var(self, a: int) -> int:
        nz = self.nonzero(a)
        return (nz & -nz).bit_length() // FIELD - 1

    def check(self, a: int):
        if a & self.guard:
            raise ExponentOverflow("exponent overflow in monomial arithmetic")


@dataclass(frozen=True)
class Binomial:
    """``x^plus - x^minus`` with ``plus`` the leading term.

    ``delta = omega(minus) - omega(plus)`` is negative.
    """

    plus: int
    minus: int
    delta: int


@dataclass
class GroebnerStats:
    pairs_created: int = 0
    pairs_reduced: int = 0
    zero_reductions: int = 0
    elapsed: float = 0.0
    full_basis_size: int = 0


class BinomialBuchberger:
    """Gebauer-Moeller pair management with normal (lcm-degree) selection."""

    def __init__(self, ring: Ring, deadline: float | None = None):
        self.ring = ring
        self.deadline = deadline
        self.polys: list[Binomial] = []
        self.active: list[int] = []
        # active generators filed under the lowest variable of their lead term
        self.buckets: list[list[int]] = [[] for _ in range(ring.nvars)]
        self.stats = GroebnerStats()

    def _set_active(self, indices: list[int]):
        self.active = list(indices)
        self.buckets = [[] for _ in range(self.ring.nvars)]
        for k in self.active:
            self.buckets[self.ring.lowest_var(self.polys[k].plus)].append(k)

    # -- reduction ----------------------------------------------------------

    def normal_form(self, m: int, w: int) -> tuple[int, int]:
        """Reduce monomial ``m`` (with relative weight ``w``) to normal form."""
        g = self.ring.guard
        nz_add = self.ring.nz_add
        polys = self.polys
        buckets = self.buckets
        while True:
            nz = (m + nz_add) & g
            reduced = False
            while nz and not reduced:
                low = nz & -nz
                nz ^= low
                for k in buckets[low.bit_length() // FIELD - 1]:
                    p = polys[k]
                    if ((m | g) - p.plus) & g == g:
                        m = m - p.plus + p.minus
                        w += p.delta
                        reduced = True
                        break
            if not reduced:
                return m, w

    def _make(self, a: int, wa: int, b: int, wb: int) -> Binomial | None:
        if a == b:
            return None
        if wa == wb:
            raise AssertionError("distinct monomials with equal order weight")
        self.ring.check(a)
        self.ring.check(b)
        if wa > wb:
            return Binomial(a, b, wb - wa)
        return Binomial(b, a, wa - wb)

    def reduce_binomial(self, a: int, wa: int, b: int, wb: int) -> Binomial | None:
        a, wa = self.normal_form(a, wa)
        b, wb = self.normal_form(b, wb)
        return self._make(a, wa, b, wb)

    def spoly(self, i: int, j: int) -> Binomial | None:
        f, h = self.polys[i], self.polys[j]
        lcm = self.ring.lcm(f.plus, h.plus)
        a = lcm - f.plus + f.minus
        b = lcm - h.plus + h.minus
        # omega(lcm) cancels when comparing the two sides
        r = self.reduce_binomial(a, f.delta, b, h.delta)
        # toric closure: S-polynomials of binomials stay binomial or vanish
        assert r is None or isinstance(r, Binomial)
        return r

    # -- pair handling ------------------------------------------------------

    def _update(self, queue: list, h_idx: int):
        """Gebauer-Moeller update after adding generator ``h_idx``.

        The lcm of (h, g) is ``h * q`` with ``q = g / gcd(h, g)``, so comparing
        new-pair lcms by divisibility only needs the quotients ``q``. A new
        pair survives when its quotient is minimal among all new quotients and
        no coprime pair shares it; one pair is kept per surviving lcm.
        """
        ring = self.ring
        guard = ring.guard
        polys = self.polys
        hp = polys[h_idx].plus
        groups: dict[int, list] = {}
        for k in self.active:
            gp = polys[k].plus
            h_ge = ((((hp | guard) - gp) & guard) >> (FIELD - 1)) * VALUE_MASK
            common = (gp & h_ge) | (hp & ~h_ge)
            q = gp - common
            entry = groups.get(q)
            if entry is None:
                groups[q] = [k, common == 0]
            else:
                entry[0] = k
                entry[1] = entry[1] or common == 0
        minimal: list[int] = []
        fresh = []
        for q in sorted(groups, key=ring.degree):
            qg = q | guard
            if any((qg - m) & guard == guard for m in minimal):
                continue
            minimal.append(q)
            k, coprime = groups[q]
            if not coprime:
                fresh.append((k, hp + q))
        # criterion B: an old pair (i, j) is redundant when lead(h) divides
        # its lcm and neither (i, h) nor (j, h) has that same lcm
        new_queue = []
        for item in queue:
            lcm = item[1]
            if ((lcm | guard) - hp) & guard == guard:
                if ring.lcm(polys[item[2]].plus, hp) != lcm and ring.lcm(polys[item[3]].plus, hp) != lcm:
                    continue
            new_queue.append(item)
        for k, lcm in fresh:
            self.stats.pairs_created += 1
            new_queue.append((ring.degree(lcm), lcm, min(k, h_idx), max(k, h_idx)))
        heapq.heapify(new_queue)
        keep = []
        for k in self.active:
            if ((polys[k].plus | guard) - hp) & guard == guard:
                self.buckets[ring.lowest_var(polys[k].plus)].remove(k)
            else:
                keep.append(k)
        keep.append(h_idx)
        self.active = keep
        self.buckets[ring.lowest_var(hp)].append(h_idx)
        return new_queue

    def add(self, queue: list, b: Binomial) -> list:
        self.polys.append(b)
        return self._update(queue, len(self.polys) - 1)

    def run(self, gens: list[Binomial]) -> list[Binomial]:
        start = time.monotonic()
        queue: list = []
        for b in gens:
            r = self.reduce_binomial(b.plus, 0, b.minus, b.delta)
            if r is not None:
                queue = self.add(queue, r)
        while queue:
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.stats.elapsed = time.monotonic() - start
                raise GroebnerTimeout(self.stats.elapsed, len(self.active), len(queue))
            _, _, i, j = heapq.heappop(queue)
            self.stats.pairs_reduced += 1
            r = self.spoly(i, j)
            if r is None:
                self.stats.zero_reductions += 1
                continue
            queue = self.add(queue, r)
        self.stats.elapsed = time.monotonic() - start
        return self.reduced()

    def reduced(self) -> list[Binomial]:
        """Interreduce the active generators into the reduced Groebner basis."""
        ring = self.ring
        leads = [self.polys[k] for k in self.active]
        minimal = [
            p for p in leads
            if not any(q is not p and ring.divides(q.plus, p.plus) for q in leads)
        ]
        # leads are now pairwise non-dividing, so only trailing terms reduce;
        # a lead never divides its own (smaller) trailing term
        self.polys = list(minimal)
        self._set_active(list(range(len(minimal))))
        out = []
        for p in minimal:
            m, w = self.normal_form(p.minus, p.delta)
            out.append(Binomial(p.plus, m, w))
        return out


def groebner_basis(ring: Ring, gens: Sequence[tuple[Sequence[int], Sequence[int]]],
                   deadline_secs: float | None = None) -> tuple[list[Binomial], GroebnerStats]:
    """Reduced Groebner basis of the ideal generated by ``x^a - x^b`` pairs."""
    deadline = None if deadline_secs is None else time.monotonic() + deadline_secs
    eng = BinomialBuchberger(ring, deadline)
    start = []
    for a, b in gens:
        pa, pb = ring.pack(a), ring.pack(b)
        wa, wb = ring.omega(a), ring.omega(b)
        r = eng._make(pa, wa, pb, wb)
        if r is not None:
            start.append(r)
    basis = eng.run(start)
    return basis, eng.stats
