"""Bit-level substrate for query-driven Boolean function testing.

Assignments over {0,1}^n are packed integers (coordinate i lives at bit
i-1, so coordinates are 1-based like the ambient index set [n]).  On top
of that sit coordinate sets, block partitions, black-box function oracles
with query counting, and the constructors used to build test instances.

Everything here is either immutable or single-writer by design: oracles
and partitions can be shared across concurrent trial workers, while each
trial owns its own ``CountingOracle``.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "CapacityError",
    "ContractViolation",
    "DimensionMismatch",
    "Point",
    "IndexSet",
    "BlockPartition",
    "FunctionOracle",
    "CountingOracle",
    "RestrictionOracle",
    "compose",
    "zero_out",
    "xor",
    "negate_on",
    "random_point",
    "random_partition",
    "restriction_oracle",
    "full_truth_table",
    "constant",
    "literal",
    "parity",
    "truth_table",
    "junta",
    "tribes",
    "random_junta",
    "random_table",
    "make_function",
    "as_generator",
    "ceil_log2",
]


class DimensionMismatch(ValueError):
    """A point, coordinate set, or oracle was used at the wrong dimension."""


class ContractViolation(ValueError):
    """A documented precondition of an operation did not hold."""


class CapacityError(ValueError):
    """An exhaustive enumeration was requested above its size cap."""


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ValueError("ceil_log2 needs a positive integer")
    return (x - 1).bit_length()


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# points and coordinate sets


class Point:
    """An assignment in {0,1}^n, packed into an int (bit i-1 = coordinate i)."""

    __slots__ = ("n", "value")

    def __init__(self, n: int, value: int):
        if n < 0:
            raise DimensionMismatch("dimension must be nonnegative")
        if value < 0 or value >> n:
            raise DimensionMismatch(f"value does not fit in {n} bits")
        self.n = n
        self.value = value

    @classmethod
    def zeros(cls, n: int) -> "Point":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "Point":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Point":
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("bits must be 0/1")
            value |= b << i
        return cls(len(bits), value)

    @classmethod
    def from01(cls, s: str) -> "Point":
        """Parse "x1 x2 ... xn" written left to right, e.g. "1100"."""
        return cls.from_bits([int(c) for c in s])

    def bit(self, i: int) -> int:
        """Coordinate i (1-based)."""
        if not 1 <= i <= self.n:
            raise DimensionMismatch(f"coordinate {i} outside [{self.n}]")
        return (self.value >> (i - 1)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.n))

    def to01(self) -> str:
        return "".join(str((self.value >> i) & 1) for i in range(self.n))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Point)
            and self.n == other.n
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.n, self.value))

    def __repr__(self) -> str:
        return f"Point({self.n}, 0b{self.value:0{max(self.n, 1)}b})"


class IndexSet:
    """A set of coordinates from [n], stored as a bit mask."""

    __slots__ = ("mask",)

    def __init__(self, mask: int = 0):
        if mask < 0:
            raise ValueError("mask must be nonnegative")
        self.mask = mask

    @classmethod
    def from_coords(cls, coords: Iterable[int]) -> "IndexSet":
        mask = 0
        for i in coords:
            if i < 1:
                raise ValueError(f"coordinates are 1-based, got {i}")
            bit = 1 << (i - 1)
            if mask & bit:
                raise ValueError(f"duplicate coordinate {i}")
            mask |= bit
        return cls(mask)

    @classmethod
    def single(cls, i: int) -> "IndexSet":
        return cls.from_coords((i,))

    @classmethod
    def empty(cls) -> "IndexSet":
        return cls(0)

    @classmethod
    def full_range(cls, n: int) -> "IndexSet":
        return cls((1 << n) - 1)

    def coords(self) -> tuple[int, ...]:
        out = []
        mask = self.mask
        while mask:
            low = mask & -mask
            out.append(low.bit_length())
            mask ^= low
        return tuple(out)

    def is_within(self, n: int) -> bool:
        return self.mask >> n == 0

    def complement(self, n: int) -> "IndexSet":
        if not self.is_within(n):
            raise DimensionMismatch(f"set has coordinates outside [{n}]")
        return IndexSet(~self.mask & ((1 << n) - 1))

    def __contains__(self, i: int) -> bool:
        return i >= 1 and (self.mask >> (i - 1)) & 1 == 1

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self):
        return iter(self.coords())

    def __bool__(self) -> bool:
        return self.mask != 0

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask | other.mask)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & other.mask)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & ~other.mask)

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexSet) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(("IndexSet", self.mask))

    def __repr__(self) -> str:
        return f"IndexSet.from_coords({list(self.coords())!r})"


class BlockPartition:
    """r disjoint blocks covering [n]; empty blocks are legal."""

    __slots__ = ("n", "blocks")

    def __init__(self, n: int, blocks: Sequence[IndexSet]):
        blocks = tuple(blocks)
        if not blocks:
            raise ValueError("a partition needs at least one block")
        union = 0
        total = 0
        for b in blocks:
            if not b.is_within(n):
                raise DimensionMismatch("block outside [n]")
            union |= b.mask
            total += len(b)
        if union != (1 << n) - 1 or total != n:
            raise ValueError("blocks must be disjoint and cover [n]")
        self.n = n
        self.blocks = blocks

    @property
    def r(self) -> int:
        return len(self.blocks)

    def block(self, ell: int) -> IndexSet:
        """Block ell (1-based)."""
        if not 1 <= ell <= len(self.blocks):
            raise ValueError(f"block index {ell} outside 1..{len(self.blocks)}")
        return self.blocks[ell - 1]

    def __repr__(self) -> str:
        return f"BlockPartition(n={self.n}, r={self.r})"


# ---------------------------------------------------------------------------
# bit algebra on points


def _check_same_dim(x: Point, y: Point) -> None:
    if x.n != y.n:
        raise DimensionMismatch(f"dimensions differ: {x.n} vs {y.n}")


def _check_set(x: Point, s: IndexSet) -> None:
    if not s.is_within(x.n):
        raise DimensionMismatch(f"coordinate set not within [{x.n}]")


def compose(x: Point, on: IndexSet, y: Point) -> Point:
    """The point that agrees with x on ``on`` and with y elsewhere."""
    _check_same_dim(x, y)
    _check_set(x, on)
    return Point(x.n, (x.value & on.mask) | (y.value & ~on.mask))


def zero_out(x: Point, on: IndexSet) -> Point:
    """x with the coordinates in ``on`` forced to 0."""
    _check_set(x, on)
    return Point(x.n, x.value & ~on.mask)


def xor(x: Point, z: Point) -> Point:
    """Coordinatewise sum mod 2."""
    _check_same_dim(x, z)
    return Point(x.n, x.value ^ z.value)


def negate_on(x: Point, on: IndexSet) -> Point:
    """x with the coordinates in ``on`` flipped."""
    _check_set(x, on)
    return Point(x.n, x.value ^ on.mask)


def random_point(n: int, rng: np.random.Generator) -> Point:
    """Uniformly random point in {0,1}^n."""
    if n == 0:
        return Point(0, 0)
    raw = int.from_bytes(rng.bytes((n + 7) // 8), "little")
    return Point(n, raw & ((1 << n) - 1))


def random_partition(n: int, r: int, rng) -> BlockPartition:
    """Assign every coordinate independently and uniformly to one of r blocks.

    Any two fixed coordinates land in the same block with probability
    exactly 1/r.
    """
    if n < 1 or r < 1:
        raise ValueError("need n >= 1 and r >= 1")
    rng = as_generator(rng)
    assignment = rng.integers(0, r, size=n)
    masks = [0] * r
    for i in range(n):
        masks[assignment[i]] |= 1 << i
    return BlockPartition(n, [IndexSet(m) for m in masks])


# ---------------------------------------------------------------------------
# oracles


class FunctionOracle:
    """Deterministic black box {0,1}^n -> {0,1}.

    ``descriptor`` records how the function was built (kind + parameters,
    JSON-friendly) so instances can be serialized and rebuilt bit-exactly.
    ``batch``, when set, evaluates a uint64 array of packed values at once
    (only possible for n <= 63 constructions).
    """

    __slots__ = ("n", "descriptor", "_fn", "_batch")

    def __init__(self, n: int, fn: Callable[[int], int], descriptor: dict,
                 batch: Callable[[np.ndarray], np.ndarray] | None = None):
        self.n = n
        self._fn = fn
        self.descriptor = descriptor
        self._batch = batch

    def __call__(self, p: Point) -> int:
        if p.n != self.n:
            raise DimensionMismatch(f"oracle is {self.n}-dimensional, point is {p.n}")
        return self._fn(p.value)

    def eval_value(self, value: int) -> int:
        """Evaluate a packed assignment directly."""
        return self._fn(value)

    def eval_many(self, values: np.ndarray) -> np.ndarray:
        if self._batch is not None:
            return self._batch(values)
        fn = self._fn
        return np.fromiter((fn(int(v)) for v in values), dtype=np.uint8,
                           count=len(values))

    def to_record(self) -> dict:
        return dict(self.descriptor)

    def __repr__(self) -> str:
        kind = self.descriptor.get("kind", "?")
        return f"FunctionOracle(n={self.n}, kind={kind!r})"


class CountingOracle:
    """Query-counting wrapper around a function oracle.

    ``count`` is the number of evaluations that reached the wrapped
    oracle.  Inside a :meth:`memo_scope` block, repeated queries of an
    identical point are answered from a scratch memo and not counted;
    the memo is dropped when the scope exits.
    """

    __slots__ = ("inner", "n", "count", "_memo")

    def __init__(self, inner):
        self.inner = inner
        self.n = inner.n
        self.count = 0
        self._memo = None

    def __call__(self, p: Point) -> int:
        memo = self._memo
        if memo is not None:
            hit = memo.get(p.value)
            if hit is not None:
                return hit
            val = self.inner(p)
            self.count += 1
            memo[p.value] = val
            return val
        self.count += 1
        return self.inner(p)

    @property
    def memo_enabled(self) -> bool:
        return self._memo is not None

    @contextmanager
    def memo_scope(self):
        if self._memo is not None:
            raise ContractViolation("memo scopes do not nest")
        self._memo = {}
        try:
            yield self
        finally:
            self._memo = None

    @property
    def descriptor(self) -> dict:
        return self.inner.descriptor

    def __repr__(self) -> str:
        return f"CountingOracle(count={self.count}, inner={self.inner!r})"


def _scatter_tables(coords: tuple[int, ...]) -> list[list[int]]:
    # Byte-indexed scatter tables: table[j][b] spreads byte b of a packed
    # restricted value onto the full-dimension bit positions of coords.
    tables = []
    for j in range(0, len(coords), 8):
        chunk = coords[j:j + 8]
        tbl = [0] * 256
        for b in range(1, 256):
            low = b & -b
            t = low.bit_length() - 1
            if t < len(chunk):
                tbl[b] = tbl[b & (b - 1)] | (1 << (chunk[t] - 1))
            else:
                tbl[b] = tbl[b & (b - 1)]
        tables.append(tbl)
    return tables


class RestrictionOracle(FunctionOracle):
    """f with all coordinates outside ``on`` pinned to a context point.

    The restricted oracle lives on {0,1}^m for m = |on|; its coordinate t
    is the t-th smallest member of ``on``.  Every query is forwarded to
    the parent oracle (and therefore through any query counter wrapped
    around it).
    """

    __slots__ = ("parent", "on", "context", "_tables", "_base")

    def __init__(self, parent, on: IndexSet, context: Point):
        if not on.is_within(parent.n):
            raise DimensionMismatch("restriction set not within [n]")
        if context.n != parent.n:
            raise DimensionMismatch("context point has the wrong dimension")
        coords = on.coords()
        self.parent = parent
        self.on = on
        self.context = context
        self._tables = _scatter_tables(coords)
        self._base = context.value & ~on.mask
        desc = {
            "kind": "restriction",
            "coords": list(coords),
            "context": context.to01(),
            "parent": dict(getattr(parent, "descriptor", {}) or {}),
        }
        super().__init__(len(coords), self._eval, desc)

    def embed(self, value: int) -> Point:
        """Map a packed restricted assignment to its full-dimension point."""
        full = self._base
        j = 0
        while value:
            full |= self._tables[j][value & 0xFF]
            value >>= 8
            j += 1
        return Point(self.parent.n, full)

    def _eval(self, value: int) -> int:
        return self.parent(self.embed(value))


def restriction_oracle(f, on: IndexSet, context: Point) -> RestrictionOracle:
    """Oracle for a ∈ {0,1}^on  ↦  f(a on ``on``, context elsewhere)."""
    return RestrictionOracle(f, on, context)


def full_truth_table(f, cap: int = 20) -> np.ndarray:
    """Evaluate f on all 2^n inputs (uint8 array indexed by packed value)."""
    if f.n > cap:
        raise CapacityError(f"refusing 2^{f.n} enumeration (cap n <= {cap})")
    return f.eval_many(np.arange(1 << f.n, dtype=np.uint64))


# ---------------------------------------------------------------------------
# constructors


def _bits_to_str(bits: Iterable[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def _parse_table(table, length: int) -> bytes:
    if isinstance(table, str):
        vals = [int(c) for c in table]
    else:
        vals = [int(b) for b in table]
    if len(vals) != length or any(b not in (0, 1) for b in vals):
        raise ValueError(f"truth table must be {length} bits of 0/1")
    return bytes(vals)


def constant(n: int, value: int) -> FunctionOracle:
    if value not in (0, 1):
        raise ValueError("constant value must be 0 or 1")
    desc = {"kind": "constant", "n": n, "value": value}
    batch = None
    if n <= 63:
        batch = lambda vs: np.full(len(vs), value, dtype=np.uint8)
    return FunctionOracle(n, lambda v: value, desc, batch)


def literal(n: int, coord: int, negated: bool = False) -> FunctionOracle:
    if not 1 <= coord <= n:
        raise ValueError(f"literal coordinate {coord} outside [{n}]")
    shift = coord - 1
    neg = 1 if negated else 0
    desc = {"kind": "literal", "n": n, "coord": coord, "negated": bool(negated)}
    batch = None
    if n <= 63:
        def batch(vs, _s=shift, _g=neg):
            return (((np.asarray(vs, dtype=np.uint64) >> np.uint64(_s))
                     & np.uint64(1)).astype(np.uint8) ^ _g)
    return FunctionOracle(n, lambda v: ((v >> shift) & 1) ^ neg, desc, batch)


def parity(n: int, coords: Iterable[int]) -> FunctionOracle:
    on = IndexSet.from_coords(coords)
    if not on.is_within(n):
        raise ValueError("parity coordinates outside [n]")
    mask = on.mask
    desc = {"kind": "parity", "n": n, "coords": list(on.coords())}
    batch = None
    if n <= 63:
        batch = lambda vs: _kernels.parity_bits(vs, mask)
    return FunctionOracle(n, lambda v: (v & mask).bit_count() & 1, desc, batch)


def truth_table(n: int, table) -> FunctionOracle:
    tbl = _parse_table(table, 1 << n)
    arr = np.frombuffer(tbl, dtype=np.uint8)
    desc = {"kind": "truth_table", "n": n, "table": _bits_to_str(tbl)}
    return FunctionOracle(
        n, tbl.__getitem__, desc,
        lambda vs: arr[np.asarray(vs, dtype=np.uint64).astype(np.int64)],
    )


def junta(n: int, coords: Iterable[int], table) -> FunctionOracle:
    """Function depending only on ``coords``; the core table is indexed by
    the bits of those coordinates in ascending order (smallest = LSB)."""
    on = IndexSet.from_coords(coords)
    if not on.is_within(n):
        raise ValueError("junta coordinates outside [n]")
    cs = on.coords()
    tbl = _parse_table(table, 1 << len(cs))
    arr = np.frombuffer(tbl, dtype=np.uint8)
    positions = tuple(c - 1 for c in cs)

    def fn(v: int) -> int:
        idx = 0
        for t, p in enumerate(positions):
            idx |= ((v >> p) & 1) << t
        return tbl[idx]

    batch = None
    if n <= 63:
        pos_arr = np.array(positions, dtype=np.int64)

        def batch(vs):
            proj = _kernels.gather_bits(np.asarray(vs, dtype=np.uint64), pos_arr)
            return arr[proj.astype(np.int64)]

    desc = {"kind": "junta", "n": n, "coords": list(cs),
            "table": _bits_to_str(tbl)}
    return FunctionOracle(n, fn, desc, batch)


def tribes(n: int, width: int) -> FunctionOracle:
    """OR of ANDs over consecutive disjoint width-sized coordinate tribes."""
    if width < 1 or width > n:
        raise ValueError("tribe width must be in [1, n]")
    masks = []
    lo = 0
    while lo + width <= n:
        masks.append(((1 << width) - 1) << lo)
        lo += width
    desc = {"kind": "tribes", "n": n, "width": width}

    def fn(v: int) -> int:
        for m in masks:
            if v & m == m:
                return 1
        return 0

    batch = None
    if n <= 63:
        def batch(vs):
            arr = np.asarray(vs, dtype=np.uint64)
            out = np.zeros(len(arr), dtype=np.uint8)
            for m in masks:
                out |= (arr & np.uint64(m)) == np.uint64(m)
            return out.astype(np.uint8)

    return FunctionOracle(n, fn, desc, batch)


def random_junta(n: int, k: int, seed) -> FunctionOracle:
    """Random k-junta: k distinct coordinates and a random core table.

    The realized coordinates and table are recorded in the descriptor, so
    they double as ground truth for the brute-force checks.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    rng = np.random.default_rng(seed)
    cs = sorted(int(c) + 1 for c in rng.choice(n, size=k, replace=False))
    tbl = rng.integers(0, 2, size=1 << k, dtype=np.uint8)
    f = junta(n, cs, tbl.tolist())
    f.descriptor = {"kind": "random_junta", "n": n, "k": k, "seed": seed,
                    "coords": cs, "table": _bits_to_str(tbl)}
    return f


def random_table(n: int, seed, cap: int = 20) -> FunctionOracle:
    """Uniformly random truth table (explicit 2^n storage)."""
    if n > cap:
        raise CapacityError(f"random table needs explicit 2^{n} storage")
    rng = np.random.default_rng(seed)
    tbl = rng.integers(0, 2, size=1 << n, dtype=np.uint8)
    f = truth_table(n, tbl.tolist())
    f.descriptor = {"kind": "random_table", "n": n, "seed": seed,
                    "table": _bits_to_str(tbl)}
    return f


_CONSTRUCTORS = {
    "constant": lambda r: constant(r["n"], r["value"]),
    "literal": lambda r: literal(r["n"], r["coord"], r.get("negated", False)),
    "parity": lambda r: parity(r["n"], r["coords"]),
    "truth_table": lambda r: truth_table(r["n"], r["table"]),
    "junta": lambda r: junta(r["n"], r["coords"], r["table"]),
    "tribes": lambda r: tribes(r["n"], r["width"]),
    "random_junta": lambda r: random_junta(r["n"], r["k"], r["seed"]),
    "random_table": lambda r: random_table(r["n"], r["seed"]),
}


def make_function(record: dict) -> FunctionOracle:
    """Build an oracle from its serialized record (see ``to_record``)."""
    try:
        kind = record["kind"]
    except (TypeError, KeyError):
        raise ValueError("function record needs a 'kind' field") from None
    try:
        ctor = _CONSTRUCTORS[kind]
    except KeyError:
        raise ValueError(f"unknown function kind {kind!r}") from None
    return ctor(record)
