"""Sorting-network genome: representation, layers, zero-one evaluation.

A network on n lines is an ordered sequence of comparators.  Each
comparator touches two distinct lines and places the larger value on its
lower-indexed line, so a fully sorted output is descending from line 0
downward.  Correctness is checked exhaustively over all 2^n zero-one
inputs; the same pass also counts, per line, how many swaps occurred,
which is the behavior vector used for novelty.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

MAX_LINES = 32
MAX_COMPARATORS = 100


class InvalidComparatorError(ValueError):
    pass


class InvalidNetworkError(ValueError):
    pass


class NetworkParseError(ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True, slots=True)
class Comparator:
    first: int
    second: int


def canonicalize(first: int, second: int, lines: int | None = None) -> Comparator:
    """Build a comparator with first < second, validating the leg indices."""
    if first == second:
        raise InvalidComparatorError(f"comparator legs must differ, got ({first}, {second})")
    if first < 0 or second < 0:
        raise InvalidComparatorError(f"negative line index in ({first}, {second})")
    if lines is not None and (first >= lines or second >= lines):
        raise InvalidComparatorError(
            f"comparator ({first}, {second}) out of range for {lines} lines"
        )
    if first > second:
        first, second = second, first
    return Comparator(first, second)


@dataclass(frozen=True, slots=True)
class Network:
    lines: int
    comparators: tuple[Comparator, ...]

    def __post_init__(self):
        if not 2 <= self.lines <= MAX_LINES:
            raise InvalidNetworkError(f"lines must be in [2, {MAX_LINES}], got {self.lines}")
        if len(self.comparators) > MAX_COMPARATORS:
            raise InvalidNetworkError(
                f"at most {MAX_COMPARATORS} comparators allowed, got {len(self.comparators)}"
            )
        for comp in self.comparators:
            if not 0 <= comp.first < comp.second < self.lines:
                raise InvalidNetworkError(
                    f"comparator ({comp.first}, {comp.second}) invalid for {self.lines} lines"
                )

    def __len__(self) -> int:
        return len(self.comparators)


def make_network(lines: int, pairs: Iterable[tuple[int, int]]) -> Network:
    """Convenience constructor from raw (first, second) pairs."""
    return Network(lines, tuple(canonicalize(f, s, lines) for f, s in pairs))


@dataclass(frozen=True, slots=True)
class Evaluation:
    mistakes: int
    layers: int
    comparators: int
    behavior: tuple[int, ...]


def compute_layers(net: Network) -> tuple[int, list[tuple[Comparator, ...]]]:
    """Greedy left-to-right grouping of the sequence into parallel layers.

    A comparator joins the current layer unless one of its lines is
    already used there, in which case it opens a new layer.
    """
    groups: list[tuple[Comparator, ...]] = []
    current: list[Comparator] = []
    used: set[int] = set()
    for comp in net.comparators:
        if comp.first in used or comp.second in used:
            groups.append(tuple(current))
            current = [comp]
            used = {comp.first, comp.second}
        else:
            current.append(comp)
            used.add(comp.first)
            used.add(comp.second)
    if current:
        groups.append(tuple(current))
    return len(groups), groups


@lru_cache(maxsize=None)
def line_masks(n: int) -> tuple[int, ...]:
    """Initial per-line bitmasks over all 2^n inputs.

    Bit x of mask k is the value input x places on line k, i.e. bit k
    of x.  Evaluating every input at once then reduces each comparator
    to a handful of word operations on 2^n-bit integers.
    """
    masks = []
    for k in range(n):
        block = ((1 << (1 << k)) - 1) << (1 << k)  # 2^k zeros then 2^k ones
        period = 1 << (k + 1)
        repeats = ((1 << (1 << n)) - 1) // ((1 << period) - 1)
        masks.append(block * repeats)
    return tuple(masks)


def _simulate_masks(net: Network) -> tuple[list[int], list[int]]:
    """Run the bit-parallel simulation; returns final masks and swap counts."""
    masks = list(line_masks(net.lines))
    behavior = [0] * net.lines
    for comp in net.comparators:
        i, j = comp.first, comp.second
        a, b = masks[i], masks[j]
        swapped = b & ~a  # inputs where line i held 0 and line j held 1
        if swapped:
            count = swapped.bit_count()
            behavior[i] += count
            behavior[j] += count
            masks[i] = a | b
            masks[j] = a & b
    return masks, behavior


def _unsorted_count(masks: Sequence[int]) -> int:
    bad = 0
    for k in range(len(masks) - 1):
        bad |= masks[k + 1] & ~masks[k]  # line k+1 exceeds line k
    return bad.bit_count()


def count_mistakes(net: Network) -> int:
    """Number of zero-one inputs the network fails to sort (descending)."""
    masks, _ = _simulate_masks(net)
    return _unsorted_count(masks)


def behavior_vector(net: Network) -> tuple[int, ...]:
    """Per-line swap counts over the exhaustive zero-one simulation."""
    _, behavior = _simulate_masks(net)
    return tuple(behavior)


def evaluate(net: Network) -> Evaluation:
    """Single-pass evaluation: mistakes, layers, size, behavior vector."""
    masks, behavior = _simulate_masks(net)
    layer_count, _ = compute_layers(net)
    return Evaluation(
        mistakes=_unsorted_count(masks),
        layers=layer_count,
        comparators=len(net.comparators),
        behavior=tuple(behavior),
    )


def evaluate_naive(net: Network) -> Evaluation:
    """Reference evaluation looping over every input individually.

    Slow; kept as the independent cross-check for the bit-parallel path.
    """
    n = net.lines
    mistakes = 0
    behavior = [0] * n
    for x in range(1 << n):
        vals = [(x >> k) & 1 for k in range(n)]
        for comp in net.comparators:
            i, j = comp.first, comp.second
            if vals[i] < vals[j]:
                vals[i], vals[j] = vals[j], vals[i]
                behavior[i] += 1
                behavior[j] += 1
        if any(vals[k] < vals[k + 1] for k in range(n - 1)):
            mistakes += 1
    layer_count, _ = compute_layers(net)
    return Evaluation(mistakes, layer_count, len(net.comparators), tuple(behavior))


def apply_network(net: Network, values: Sequence) -> list:
    """Apply the comparator sequence to arbitrary comparable values."""
    if len(values) != net.lines:
        raise ValueError(f"expected {net.lines} values, got {len(values)}")
    vals = list(values)
    for comp in net.comparators:
        i, j = comp.first, comp.second
        if vals[i] < vals[j]:
            vals[i], vals[j] = vals[j], vals[i]
    return vals


def serialize_network(net: Network) -> str:
    """Text form: `lines <n>` then one `<first> <second>` pair per line."""
    out = [f"lines {net.lines}"]
    out.extend(f"{c.first} {c.second}" for c in net.comparators)
    return "\n".join(out) + "\n"


def parse_network(text: str) -> Network:
    lines_decl: int | None = None
    pairs: list[Comparator] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        fields = stripped.split()
        if lines_decl is None:
            if len(fields) != 2 or fields[0] != "lines":
                raise NetworkParseError("expected header `lines <n>`", lineno)
            try:
                lines_decl = int(fields[1])
            except ValueError:
                raise NetworkParseError(f"bad line count {fields[1]!r}", lineno) from None
            if not 2 <= lines_decl <= MAX_LINES:
                raise NetworkParseError(f"line count {lines_decl} out of range", lineno)
            continue
        if len(fields) != 2:
            raise NetworkParseError(f"expected `<first> <second>`, got {stripped!r}", lineno)
        try:
            first, second = int(fields[0]), int(fields[1])
        except ValueError:
            raise NetworkParseError(f"non-integer comparator {stripped!r}", lineno) from None
        try:
            pairs.append(canonicalize(first, second, lines_decl))
        except InvalidComparatorError as exc:
            raise NetworkParseError(str(exc), lineno) from None
    if lines_decl is None:
        raise NetworkParseError("missing `lines <n>` header", 1)
    try:
        return Network(lines_decl, tuple(pairs))
    except InvalidNetworkError as exc:
        raise NetworkParseError(str(exc), 1) from None
