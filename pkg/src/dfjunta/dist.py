"""Sampling oracles over {0,1}^n with exact point weights.

Three distribution kinds cover the experiments: the uniform distribution,
explicit finite-support distributions (the adversarial case; arbitrary
support points with arbitrary weights), and product distributions with
per-coordinate marginals.  All three expose exact ``weight`` so the
brute-force farness certification is never corrupted by sampling noise.

Weights stay exact rationals whenever they are given as rationals
(``fractions.Fraction``, ints, or "p/q" strings); float weights fall back
to float arithmetic with a 1e-12 normalization tolerance.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import (
    CapacityError,
    DimensionMismatch,
    Point,
    as_generator,
    full_truth_table,
    random_point,
)

__all__ = [
    "DistributionSpec",
    "Uniform",
    "FiniteSupport",
    "Product",
    "make_distribution",
    "random_finite_support",
    "disagreement_weight",
]

ENUMERATION_CAP = 24


def _parse_weight(w):
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, str):
        return Fraction(w)
    return float(w)


class DistributionSpec:
    """Common surface: sample points, report exact weights, serialize."""

    n: int

    def sample(self, rng) -> Point:
        raise NotImplementedError

    def weight(self, x: Point):
        raise NotImplementedError

    def sample_values(self, rng, count: int) -> np.ndarray:
        """Batch of packed samples (uint64); requires n <= 63."""
        if self.n > 63:
            raise CapacityError("packed batch sampling needs n <= 63")
        rng = as_generator(rng)
        return np.fromiter(
            (self.sample(rng).value for _ in range(count)),
            dtype=np.uint64, count=count,
        )

    def to_record(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, x: Point) -> None:
        if x.n != self.n:
            raise DimensionMismatch(f"point dimension {x.n} != {self.n}")


class Uniform(DistributionSpec):
    def __init__(self, n: int):
        if n < 0:
            raise ValueError("dimension must be nonnegative")
        self.n = n

    def sample(self, rng) -> Point:
        return random_point(self.n, as_generator(rng))

    def sample_values(self, rng, count: int) -> np.ndarray:
        if self.n > 63:
            raise CapacityError("packed batch sampling needs n <= 63")
        rng = as_generator(rng)
        return rng.integers(0, 1 << self.n, size=count, dtype=np.uint64)

    def weight(self, x: Point) -> Fraction:
        self._check_dim(x)
        return Fraction(1, 1 << self.n)

    def to_record(self) -> dict:
        return {"kind": "uniform", "n": self.n}

    def __repr__(self) -> str:
        return f"Uniform(n={self.n})"


class FiniteSupport(DistributionSpec):
    """Explicit support points with strictly positive weights summing to 1."""

    def __init__(self, points, weights):
        points = tuple(points)
        weights = tuple(_parse_weight(w) for w in weights)
        if not points:
            raise ValueError("support must be nonempty")
        if len(points) != len(weights):
            raise ValueError("points and weights must align")
        n = points[0].n
        seen = set()
        for p in points:
            if p.n != n:
                raise DimensionMismatch("support points have mixed dimensions")
            if p.value in seen:
                raise ValueError(f"duplicate support point {p.to01()}")
            seen.add(p.value)
        if any((w <= 0) for w in weights):
            raise ValueError("weights must be strictly positive")
        exact = all(isinstance(w, Fraction) for w in weights)
        total = sum(weights)
        if exact:
            if total != 1:
                raise ValueError(f"exact weights must sum to 1, got {total}")
        elif abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total}")
        self.n = n
        self.points = points
        self.weights = weights
        self.exact = exact
        self._lookup = {p.value: w for p, w in zip(points, weights)}
        self._cum = np.cumsum(np.array([float(w) for w in weights]))
        self._cum[-1] = 1.0

    def sample(self, rng) -> Point:
        u = as_generator(rng).random()
        i = int(np.searchsorted(self._cum, u, side="right"))
        return self.points[min(i, len(self.points) - 1)]

    def sample_values(self, rng, count: int) -> np.ndarray:
        if self.n > 63:
            raise CapacityError("packed batch sampling needs n <= 63")
        us = as_generator(rng).random(count)
        idx = np.minimum(np.searchsorted(self._cum, us, side="right"),
                         len(self.points) - 1)
        vals = np.array([p.value for p in self.points], dtype=np.uint64)
        return vals[idx]

    def weight(self, x: Point):
        self._check_dim(x)
        w = self._lookup.get(x.value)
        if w is not None:
            return w
        return Fraction(0) if self.exact else 0.0

    def to_record(self) -> dict:
        return {
            "kind": "finite_support",
            "n": self.n,
            "points": [p.to01() for p in self.points],
            "weights": [str(w) if isinstance(w, Fraction) else w
                        for w in self.weights],
        }

    def __repr__(self) -> str:
        return f"FiniteSupport(n={self.n}, size={len(self.points)})"


class Product(DistributionSpec):
    """Independent coordinates; probs[i-1] = Pr[coordinate i equals 1]."""

    def __init__(self, probs):
        probs = tuple(_parse_weight(p) for p in probs)
        for p in probs:
            if not 0 <= p <= 1:
                raise ValueError("marginals must lie in [0, 1]")
        self.n = len(probs)
        self.probs = probs
        self._probs_f = np.array([float(p) for p in probs])
        self.exact = all(isinstance(p, Fraction) for p in probs)

    def sample(self, rng) -> Point:
        bits = as_generator(rng).random(self.n) < self._probs_f
        raw = np.packbits(bits, bitorder="little").tobytes()
        return Point(self.n, int.from_bytes(raw, "little"))

    def sample_values(self, rng, count: int) -> np.ndarray:
        if self.n > 63:
            raise CapacityError("packed batch sampling needs n <= 63")
        bits = as_generator(rng).random((count, self.n)) < self._probs_f
        weights = (np.uint64(1) << np.arange(self.n, dtype=np.uint64))
        return (bits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)

    def weight(self, x: Point):
        self._check_dim(x)
        acc = Fraction(1) if self.exact else 1.0
        for i, p in enumerate(self.probs):
            acc = acc * (p if (x.value >> i) & 1 else 1 - p)
        return acc

    def weight_vector(self) -> np.ndarray:
        """Float weights of all 2^n points, indexed by packed value."""
        if self.n > ENUMERATION_CAP:
            raise CapacityError(f"weight vector needs n <= {ENUMERATION_CAP}")
        w = np.ones(1)
        for p in self._probs_f:
            w = np.concatenate([w * (1.0 - p), w * p])
        return w

    def to_record(self) -> dict:
        return {
            "kind": "product",
            "n": self.n,
            "probs": [str(p) if isinstance(p, Fraction) else p
                      for p in self.probs],
        }

    def __repr__(self) -> str:
        return f"Product(n={self.n})"


def random_finite_support(n: int, size: int, seed) -> FiniteSupport:
    """Adversarial-style distribution: random support, Dirichlet(1) weights."""
    rng = np.random.default_rng(seed)
    seen = set()
    points = []
    while len(points) < size:
        p = random_point(n, rng)
        if p.value not in seen:
            seen.add(p.value)
            points.append(p)
    weights = rng.dirichlet(np.ones(size))
    # Nudge the largest entry so the float total is exactly 1.0.
    weights[np.argmax(weights)] += 1.0 - weights.sum()
    d = FiniteSupport(points, weights.tolist())
    d.seed = seed
    return d


def make_distribution(record: dict) -> DistributionSpec:
    """Build a distribution from its serialized record."""
    try:
        kind = record["kind"]
    except (TypeError, KeyError):
        raise ValueError("distribution record needs a 'kind' field") from None
    if kind == "uniform":
        return Uniform(record["n"])
    if kind == "finite_support":
        points = [Point.from01(s) for s in record["points"]]
        return FiniteSupport(points, record["weights"])
    if kind == "product":
        return Product(record["probs"])
    if kind == "random_support":
        return random_finite_support(record["n"], record["size"], record["seed"])
    raise ValueError(f"unknown distribution kind {kind!r}")


def disagreement_weight(f, g, dist: DistributionSpec, cap: int = ENUMERATION_CAP):
    """Exact Pr_{x ~ dist}[f(x) != g(x)].

    Finite-support distributions enumerate their support at any n; uniform
    and product distributions enumerate all 2^n points and are refused
    above the cap.
    """
    if f.n != g.n or f.n != dist.n:
        raise DimensionMismatch("f, g, and the distribution must share n")
    if isinstance(dist, FiniteSupport):
        acc = Fraction(0) if dist.exact else 0.0
        for p, w in zip(dist.points, dist.weights):
            if f(p) != g(p):
                acc += w
        return acc
    if f.n > cap:
        raise CapacityError(f"refusing 2^{f.n} enumeration (cap n <= {cap})")
    tf = full_truth_table(f, cap=cap)
    tg = full_truth_table(g, cap=cap)
    diff = tf != tg
    if isinstance(dist, Uniform):
        return Fraction(int(np.count_nonzero(diff)), 1 << f.n)
    if isinstance(dist, Product):
        return float(dist.weight_vector()[diff].sum())
    raise TypeError(f"unsupported distribution {dist!r}")
