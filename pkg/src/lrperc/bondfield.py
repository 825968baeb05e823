"""Deterministic lazy bond configurations over infinite bond sets.

Nothing is ever stored: each bond's open/closed indicator is recomputed on
demand as a pure function of (seed, replica, canonical bond id).  The id is
packed injectively into 64-bit words and pushed through a splitmix64-style
counter-mode mix; the high 53 bits of the final word give a uniform variate
in [0, 1) which is compared (strict <) against the bond's probability.

Because the uniform depends only on the bond id and not on the truncation
range, configurations at different k are automatically coupled: raising k
only raises probabilities, so every bond open at k stays open at k' >= k.

Id encoding (documented so independent implementations can reproduce
configurations bit-exactly).  Every integer field is biased by 2**31 into a
nonnegative 64-bit word; words are folded left to right into the mix state:

    G-oriented bond    : [0, n, x_1..x_d, axis, displacement]
    Gstar horizontal   : [1, n, u_1, u_2, axis, range]   (u = lexicographic
                         min endpoint, range = |displacement| > 0)
    Gstar vertical     : [2, n, x_1, x_2]                (always to n+1)
    site (Z^2_+ cone)  : [3, m, n]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAG_G = 0
TAG_GSTAR_H = 1
TAG_GSTAR_V = 2
TAG_SITE = 3

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_BIAS = 1 << 31  # shifts signed coordinates into nonnegative words


def _mix(h):
    """splitmix64 finalizer, elementwise on uint64 values (wraps mod 2^64)."""
    with np.errstate(over="ignore"):
        h = (h ^ (h >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        h = (h ^ (h >> _U64(27))) * _U64(0x94D049BB133111EB)
        return h ^ (h >> _U64(31))


def _fold(h, w):
    with np.errstate(over="ignore"):
        return _mix((h ^ w) + _GOLDEN)


@dataclass(frozen=True)
class BondId:
    """Canonical identity of one bond (or one site, for site percolation)."""

    tag: int
    words: tuple

    @staticmethod
    def oriented(x, n: int, axis: int, disp: int) -> "BondId":
        """Bond <(x, n), (x + disp*e_axis, n+1)> of the oriented graph."""
        if disp == 0:
            raise ValueError("oriented bonds have nonzero displacement")
        return BondId(TAG_G, (TAG_G, n, *x, axis, disp))

    @staticmethod
    def star_horizontal(x, n: int, axis: int, disp: int) -> "BondId":
        """Unoriented horizontal bond <(x, n), (x + disp*e_axis, n)>; the two
        endpoint orderings canonicalize to the same id."""
        if disp == 0:
            raise ValueError("horizontal bonds have nonzero displacement")
        y = list(x)
        y[axis - 1] += disp
        u = min(tuple(x), tuple(y))
        return BondId(TAG_GSTAR_H, (TAG_GSTAR_H, n, *u, axis, abs(disp)))

    @staticmethod
    def star_vertical(x, n: int) -> "BondId":
        """Oriented vertical bond <(x, n), (x, n+1)>."""
        return BondId(TAG_GSTAR_V, (TAG_GSTAR_V, n, *x))

    @staticmethod
    def site(m: int, n: int) -> "BondId":
        return BondId(TAG_SITE, (TAG_SITE, m, n))


class BondField:
    """Immutable, seeded source of open/closed indicators.

    All methods are pure; the field may be shared freely across threads.
    Replica derivation is the only sanctioned way to obtain independent
    indicator streams.
    """

    def __init__(self, seed: int, _base=None):
        self.seed = int(seed)
        if _base is None:
            with np.errstate(over="ignore"):
                _base = _mix(_mix(np.asarray(self.seed, dtype=np.int64).astype(np.uint64)) + _GOLDEN)
        self._base = _U64(_base)

    def derive_replica(self, replica: int) -> "BondField":
        """An independent field, deterministic in (this field, replica)."""
        if replica < 0:
            raise ValueError("replica index must be nonnegative")
        w = np.asarray(replica, dtype=np.int64).astype(np.uint64)
        return BondField(self.seed, _base=_fold(self._base, _mix(w + _GOLDEN)))

    # -- scalar interface ---------------------------------------------------

    def uniform(self, bond: BondId) -> float:
        """The bond's own uniform variate in [0, 1)."""
        return self.uniform_words(bond.words)

    def uniform_words(self, words) -> float:
        """Uniform variate for an arbitrary injectively encoded word tuple."""
        h = self._base
        for w in words:
            h = _fold(h, _U64((int(w) + _BIAS) & 0xFFFFFFFFFFFFFFFF))
        return float(h >> _U64(11)) * 2.0**-53

    def is_open(self, bond: BondId, prob: float) -> bool:
        """True with probability `prob`, deterministically per (field, bond)."""
        return self.uniform(bond) < prob

    # -- vectorized interface -----------------------------------------------

    def uniforms(self, word_columns) -> np.ndarray:
        """Uniform variates for a batch of ids.

        `word_columns` is a sequence of equal-shaped integer arrays, one per
        word position of a common encoding (all ids in a batch share a tag
        and word count).  Returns an array of the broadcast shape.
        """
        cols = [np.asarray(c) for c in word_columns]
        shape = np.broadcast_shapes(*(c.shape for c in cols))
        h = np.broadcast_to(self._base, shape).copy()
        for c in cols:
            w = (np.broadcast_to(c, shape).astype(np.int64) + _BIAS).astype(np.uint64)
            h = _fold(h, w)
        return (h >> _U64(11)).astype(np.float64) * 2.0**-53

    def open_mask(self, word_columns, probs) -> np.ndarray:
        """Boolean open-indicators for a batch of ids with probabilities `probs`."""
        return self.uniforms(word_columns) < np.asarray(probs, dtype=np.float64)
