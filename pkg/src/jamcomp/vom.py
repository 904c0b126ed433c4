"""Variable-order Markov model as a reversed-context prefix tree.

Learning walks every prefix of a sequence right to left from the root,
appending to each visited node a pointer (sequence id, continuation
position).  A node's path therefore spells a context reversed, and its
pointers enumerate every continuation of that context seen so far.
Prediction walks a query context right to left to the deepest matching
node and reads the continuation distribution off the pointer list, so the
effective Markov order grows with the data instead of being fixed.

Symbols only need equality, hashing and a total order (chords order by
id); the tree is reused verbatim for test alphabets of plain strings.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from jamcomp.errors import JamcompError


class EmptySequenceError(JamcompError):
    """learn_sequence was given no symbols."""


@dataclass(frozen=True)
class NextSymbolDistribution:
    """Exact continuation distribution at a matched context.

    support maps symbol -> probability as a Fraction; the probabilities
    are pointer counts over total_pointers and sum to exactly 1.
    """

    support: Dict[object, Fraction]
    total_pointers: int

    def probability(self, symbol) -> Fraction:
        return self.support.get(symbol, Fraction(0))


class _Node:
    __slots__ = ("children", "pointers")

    def __init__(self):
        self.children: Dict[object, _Node] = {}
        self.pointers: List[Tuple[int, int]] = []


class VomTree:
    """Context tree over whole sequences.

    Pointers use 1-indexed positions into the stored sequence.  The final
    prefix of each sequence contributes pointers one past its end; such
    pointers name no continuation and are skipped when distributions are
    read, but they are stored so the tree records every prefix context.
    """

    def __init__(self, max_depth: Optional[int] = None):
        if max_depth is not None and max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {max_depth}")
        self.max_depth = max_depth
        self.root = _Node()
        self.sequences: List[Tuple[object, ...]] = []

    def learn_sequence(self, symbols: Iterable[object]) -> int:
        """Add one sequence and index all its contexts.

        Returns the sequence id.  Learning the same symbols again is not
        deduplicated; pointer counts accumulate.
        """
        seq = tuple(symbols)
        if not seq:
            raise EmptySequenceError("cannot learn an empty sequence")
        sid = len(self.sequences)
        self.sequences.append(seq)
        for prefix_end in range(1, len(seq) + 1):
            self._index_prefix(seq, sid, prefix_end)
        return sid

    def extend_sequence(self, sid: int, symbol) -> None:
        """Append one symbol to a stored sequence and index the new prefix.

        The tree ends up identical to having learned the extended sequence
        in one call: the previously past-the-end pointers become valid and
        now name the appended symbol, and exactly one new prefix walk is
        added.  This makes growing a live sequence O(depth) per symbol.
        """
        if not 0 <= sid < len(self.sequences):
            raise ValueError(f"unknown sequence id: {sid}")
        seq = self.sequences[sid] + (symbol,)
        self.sequences[sid] = seq
        self._index_prefix(seq, sid, len(seq))

    def _index_prefix(self, seq: Tuple[object, ...], sid: int, prefix_end: int) -> None:
        pointer = (sid, prefix_end + 1)
        node = self.root
        depth_limit = prefix_end
        if self.max_depth is not None:
            depth_limit = min(depth_limit, self.max_depth)
        for depth in range(depth_limit):
            symbol = seq[prefix_end - 1 - depth]
            child = node.children.get(symbol)
            if child is None:
                child = _Node()
                node.children[symbol] = child
            child.pointers.append(pointer)
            node = child

    def _valid_pointers(self, node: _Node) -> List[Tuple[int, int]]:
        return [
            (sid, pos)
            for sid, pos in node.pointers
            if pos <= len(self.sequences[sid])
        ]

    def _match(self, context: Sequence[object]) -> Optional[List[Tuple[int, int]]]:
        """Valid pointers of the deepest context node that has any.

        Walks the context right to left as deep as the tree allows, then
        backs up to the nearest ancestor whose pointer list names at least
        one real continuation.  None when even the last symbol is unknown
        or every node on the chain points past sequence ends only.
        """
        context = tuple(context)
        node = self.root
        chain: List[_Node] = []
        for offset in range(1, len(context) + 1):
            child = node.children.get(context[-offset])
            if child is None:
                break
            chain.append(child)
            node = child
        for matched in reversed(chain):
            valid = self._valid_pointers(matched)
            if valid:
                return valid
        return None

    def query_distribution(self, context: Sequence[object]) -> Optional[NextSymbolDistribution]:
        """Continuation distribution for a context, or None on no match."""
        valid = self._match(context)
        if valid is None:
            return None
        counts = Counter(self.sequences[sid][pos - 1] for sid, pos in valid)
        total = len(valid)
        support = {
            symbol: Fraction(count, total)
            for symbol, count in sorted(counts.items())
        }
        return NextSymbolDistribution(support=support, total_pointers=total)

    def predict(self, context: Sequence[object], policy: str = "argmax",
                rng: Optional[random.Random] = None):
        """Pick a continuation symbol, or None when the context is unknown.

        argmax takes the most-pointed symbol, ties to the smallest symbol.
        sample draws one pointer uniformly and needs an rng.
        """
        if policy == "argmax":
            dist = self.query_distribution(context)
            if dist is None:
                return None
            top = max(dist.support.values())
            return min(s for s, p in dist.support.items() if p == top)
        if policy == "sample":
            if rng is None:
                raise ValueError("sample policy needs an rng")
            valid = self._match(context)
            if valid is None:
                return None
            sid, pos = valid[rng.randrange(len(valid))]
            return self.sequences[sid][pos - 1]
        raise ValueError(f"unknown policy: {policy!r}")

    def node_count(self) -> int:
        return sum(1 for _ in self._walk(self.root))

    def pointer_count(self, valid_only: bool = False) -> int:
        if valid_only:
            return sum(len(self._valid_pointers(n)) for n in self._walk(self.root))
        return sum(len(n.pointers) for n in self._walk(self.root))

    def _walk(self, node: _Node):
        for child in node.children.values():
            yield child
            yield from self._walk(child)

    def dump(self) -> str:
        """Deterministic text rendering for debugging and golden tests.

        One line per node: indented symbol followed by its pointers in
        insertion order; children sorted by symbol.
        """
        lines = ["root"]

        def render(node: _Node, depth: int):
            for symbol in sorted(node.children):
                child = node.children[symbol]
                pointers = " ".join(f"({sid},{pos})" for sid, pos in child.pointers)
                pad = "  " * depth
                lines.append(f"{pad}{symbol} {pointers}".rstrip())
                render(child, depth + 1)

        render(self.root, 1)
        return "\n".join(lines)
