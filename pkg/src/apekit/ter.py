"""Translation edit rate with block shifts.

The sentence scorer runs the classic greedy loop: repeatedly apply the
single block shift that most reduces the word-level edit distance to the
reference (unit cost per shift), then charge the remaining edit distance.
An exhaustive desk-scale oracle over bounded shift sequences is included
so the greedy result can be sandwiched in tests:

    oracle cost <= greedy cost <= shift-free edit distance
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

from .tokenizer import TER_NORMALIZED_TOKENIZER, TokenizerConfig, tokenize

MAX_SHIFT_SPAN = 10
MAX_SHIFT_DISTANCE = 50
ORACLE_MAX_TOKENS = 8
ORACLE_MAX_DEPTH = 3


@dataclass(frozen=True)
class TerScore:
    """Edit counts over a sentence or corpus plus the normalized score.

    Counting convention: a deletion is a reference token the hypothesis
    dropped, an insertion is a spurious hypothesis token. An empty
    hypothesis therefore scores ref_len deletions.
    """

    insertions: int
    deletions: int
    substitutions: int
    shifts: int
    ref_len: int
    score: float

    @property
    def total_edits(self) -> int:
        return self.insertions + self.deletions + self.substitutions + self.shifts

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "substitutions": self.substitutions,
            "shifts": self.shifts,
            "ref_len": self.ref_len,
        }


@dataclass(frozen=True)
class ShiftOp:
    """Move hyp tokens [start..end] so the block lands at `destination`
    in the sequence that remains after removing the block."""

    start: int
    end: int
    destination: int


@dataclass(frozen=True)
class EditOp:
    kind: str  # match | sub | ins | del
    hyp_token: str = ""
    ref_token: str = ""


@dataclass(frozen=True)
class EditScript:
    """Shifts followed by aligned edit operations; replays hyp into ref."""

    shifts: Tuple[ShiftOp, ...]
    ops: Tuple[EditOp, ...]

    def apply(self, hyp_tokens: Sequence[str]) -> List[str]:
        tokens = list(hyp_tokens)
        for s in self.shifts:
            tokens = _apply_shift(tokens, s.start, s.end, s.destination)
        out: List[str] = []
        idx = 0
        for op in self.ops:
            if op.kind == "match":
                out.append(tokens[idx])
                idx += 1
            elif op.kind == "sub":
                out.append(op.ref_token)
                idx += 1
            elif op.kind == "ins":
                idx += 1
            elif op.kind == "del":
                out.append(op.ref_token)
            else:
                raise ValueError(f"unknown edit op kind {op.kind!r}")
        if idx != len(tokens):
            raise ValueError("edit script does not consume the hypothesis exactly")
        return out


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Word-level Levenshtein distance with unit costs."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        ai = a[i - 1]
        curr = [i] + [0] * lb
        prev_row = prev
        for j in range(1, lb + 1):
            sub = prev_row[j - 1] + (ai != b[j - 1])
            gap_ref = curr[j - 1] + 1
            gap_hyp = prev_row[j] + 1
            best = sub
            if gap_ref < best:
                best = gap_ref
            if gap_hyp < best:
                best = gap_hyp
            curr[j] = best
        prev = curr
    return prev[lb]


def _align(hyp: Sequence[str], ref: Sequence[str]) -> Tuple[List[EditOp], int]:
    """Full DP alignment with a deterministic backtrace.

    Tie order during backtrace: match, then substitution, then deletion
    (missing ref token), then insertion (spurious hyp token).
    """
    lh, lr = len(hyp), len(ref)
    width = lr + 1
    d = list(range(width))
    rows = [d[:]]
    for i in range(1, lh + 1):
        prev_row = rows[i - 1]
        row = [i] + [0] * lr
        hi = hyp[i - 1]
        for j in range(1, width):
            sub = prev_row[j - 1] + (hi != ref[j - 1])
            best = sub
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            if prev_row[j] + 1 < best:
                best = prev_row[j] + 1
            row[j] = best
        rows.append(row)

    ops: List[EditOp] = []
    i, j = lh, lr
    while i > 0 or j > 0:
        here = rows[i][j]
        if i > 0 and j > 0 and hyp[i - 1] == ref[j - 1] and rows[i - 1][j - 1] == here:
            ops.append(EditOp("match", hyp[i - 1], ref[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and rows[i - 1][j - 1] + 1 == here:
            ops.append(EditOp("sub", hyp[i - 1], ref[j - 1]))
            i, j = i - 1, j - 1
        elif j > 0 and rows[i][j - 1] + 1 == here:
            ops.append(EditOp("del", ref_token=ref[j - 1]))
            j -= 1
        else:
            ops.append(EditOp("ins", hyp_token=hyp[i - 1]))
            i -= 1
    ops.reverse()
    return ops, rows[lh][lr]


def _apply_shift(tokens: Sequence[str], start: int, end: int, destination: int) -> List[str]:
    block = list(tokens[start : end + 1])
    rest = list(tokens[:start]) + list(tokens[end + 1 :])
    return rest[:destination] + block + rest[destination:]


def _shift_candidates(n: int) -> Iterator[Tuple[int, int, int]]:
    """All (start, end, destination) triples within the span and distance caps."""
    for start in range(n):
        for end in range(start, min(start + MAX_SHIFT_SPAN, n)):
            remaining = n - (end - start + 1)
            for destination in range(remaining + 1):
                if destination == start:
                    continue
                if abs(destination - start) > MAX_SHIFT_DISTANCE:
                    continue
                yield start, end, destination


def _best_shift(current: List[str], ref: Sequence[str], current_ed: int):
    """The first shift (in scan order) achieving the largest distance drop."""
    best = None
    best_ed = current_ed
    seen: Dict[tuple, int] = {tuple(current): current_ed}
    for start, end, destination in _shift_candidates(len(current)):
        candidate = _apply_shift(current, start, end, destination)
        key = tuple(candidate)
        ed = seen.get(key)
        if ed is None:
            ed = edit_distance(candidate, ref)
            seen[key] = ed
        if ed < best_ed:
            best = (start, end, destination, candidate)
            best_ed = ed
    return best, best_ed


def ter_sentence(
    hyp: str, ref: str, tok: TokenizerConfig = TER_NORMALIZED_TOKENIZER
) -> Tuple[TerScore, EditScript]:
    """Greedy shift-based TER for one sentence pair.

    Shifts move at most MAX_SHIFT_SPAN tokens over at most
    MAX_SHIFT_DISTANCE positions; each costs 1 and is applied only while
    it strictly reduces the edit distance, so the total never exceeds the
    shift-free edit distance. Iterations are capped at 2 * ref_len.
    """
    hyp_tokens = tokenize(hyp, tok)
    ref_tokens = tokenize(ref, tok)
    if not ref_tokens:
        raise ValueError("TER needs a non-empty reference after tokenization")

    current = list(hyp_tokens)
    current_ed = edit_distance(current, ref_tokens)
    shifts: List[ShiftOp] = []
    while current_ed > 0 and len(shifts) < 2 * len(ref_tokens):
        best, best_ed = _best_shift(current, ref_tokens, current_ed)
        if best is None:
            break
        start, end, destination, current = best
        current_ed = best_ed
        shifts.append(ShiftOp(start, end, destination))

    ops, remaining = _align(current, ref_tokens)
    counts = Counter(op.kind for op in ops)
    ref_len = len(ref_tokens)
    score = (len(shifts) + remaining) / ref_len
    ter = TerScore(
        insertions=counts["ins"],
        deletions=counts["del"],
        substitutions=counts["sub"],
        shifts=len(shifts),
        ref_len=ref_len,
        score=score,
    )
    return ter, EditScript(shifts=tuple(shifts), ops=tuple(ops))


def ter_corpus(
    hyps: Sequence[str], refs: Sequence[str], tok: TokenizerConfig = TER_NORMALIZED_TOKENIZER
) -> TerScore:
    """Corpus TER: summed edit totals over summed reference lengths.

    This is not the mean of per-sentence scores; long references weigh
    more, matching the corpus-level definition.
    """
    if len(hyps) != len(refs):
        raise ValueError(f"hypothesis/reference length mismatch: {len(hyps)} vs {len(refs)}")
    if len(hyps) == 0:
        raise ValueError("corpus TER needs at least one sentence pair")
    ins = dels = subs = shifts = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        score, _ = ter_sentence(hyp, ref, tok)
        ins += score.insertions
        dels += score.deletions
        subs += score.substitutions
        shifts += score.shifts
        ref_len += score.ref_len
    total = ins + dels + subs + shifts
    return TerScore(ins, dels, subs, shifts, ref_len, total / ref_len)


def ter_oracle(
    hyp: str,
    ref: str,
    max_depth: int = ORACLE_MAX_DEPTH,
    tok: TokenizerConfig = TER_NORMALIZED_TOKENIZER,
) -> int:
    """True minimum of (shifts used + edit distance) over all shift
    sequences of length <= max_depth. Desk-scale only: refuses inputs
    longer than ORACLE_MAX_TOKENS tokens.

    Breadth-first over reachable token orderings with two sound prunes:
    states are deduplicated at their first (shallowest) visit, and a level
    is abandoned once depth + floor >= best, where floor is a constant
    lower bound on the edit distance (shifts change neither the token
    multiset nor the length).
    """
    hyp_tokens = tuple(tokenize(hyp, tok))
    ref_tokens = tuple(tokenize(ref, tok))
    if not ref_tokens:
        raise ValueError("TER oracle needs a non-empty reference after tokenization")
    if len(hyp_tokens) > ORACLE_MAX_TOKENS or len(ref_tokens) > ORACLE_MAX_TOKENS:
        raise ValueError(f"oracle inputs must have at most {ORACLE_MAX_TOKENS} tokens")
    if not 0 <= max_depth <= ORACLE_MAX_DEPTH:
        raise ValueError(f"oracle depth bound must be in 0..{ORACLE_MAX_DEPTH}")

    best = edit_distance(hyp_tokens, ref_tokens)
    hyp_counts, ref_counts = Counter(hyp_tokens), Counter(ref_tokens)
    missing = sum((ref_counts - hyp_counts).values())
    extra = sum((hyp_counts - ref_counts).values())
    floor = max(missing, extra, abs(len(hyp_tokens) - len(ref_tokens)))

    visited = {hyp_tokens}
    frontier = [hyp_tokens]
    for depth in range(1, max_depth + 1):
        if depth + floor >= best:
            break
        next_frontier = []
        for state in frontier:
            for start, end, destination in _shift_candidates(len(state)):
                candidate = tuple(_apply_shift(state, start, end, destination))
                if candidate in visited:
                    continue
                visited.add(candidate)
                cost = depth + edit_distance(candidate, ref_tokens)
                if cost < best:
                    best = cost
                next_frontier.append(candidate)
        frontier = next_frontier
    return best
