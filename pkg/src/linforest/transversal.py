"""Independent transversal search over partitioned conflict graphs.

Used to pick one flip edge per path segment so that no two picks touch the
same opposite-colour component. The conflict graph has small maximum degree,
so greedy choice plus conflict repair almost always succeeds; small
instances fall back to exhaustive backtracking.
"""

from __future__ import annotations

from random import Random
from typing import Callable, Optional, Sequence, TypeVar

T = TypeVar("T")


class TransversalFailure(RuntimeError):
    """No independent transversal found within the search budget."""


def find_independent_transversal(
        parts: Sequence[Sequence[T]],
        conflict_keys: Callable[[T], Sequence],
        rng: Random,
        repair_rounds: int = 400,
        exhaustive_limit: int = 20) -> list[T]:
    """Pick one item per part so that no two picks share a conflict key.

    `conflict_keys(item)` returns hashable keys (e.g. ids of the components
    an edge touches); two items conflict iff their key sets intersect.
    Raises TransversalFailure when the budget runs out.
    """
    k = len(parts)
    if k == 0:
        return []
    if any(len(p) == 0 for p in parts):
        raise TransversalFailure("empty candidate set in some part")
    keys = [[tuple(conflict_keys(x)) for x in part] for part in parts]

    if k <= exhaustive_limit:
        order = sorted(range(k), key=lambda i: len(parts[i]))
        chosen: list[Optional[int]] = [None] * k
        used: dict = {}

        def bt(pos: int) -> bool:
            if pos == k:
                return True
            i = order[pos]
            for ci, item_keys in enumerate(keys[i]):
                if any(key in used for key in item_keys):
                    continue
                chosen[i] = ci
                for key in item_keys:
                    used[key] = i
                if bt(pos + 1):
                    return True
                for key in item_keys:
                    del used[key]
                chosen[i] = None
            return False

        if bt(0):
            return [parts[i][chosen[i]] for i in range(k)]
        raise TransversalFailure(f"exhaustive search failed over {k} parts")

    # greedy + repair
    pick = [rng.randrange(len(p)) for p in parts]

    def conflicts(i: int, counts: dict) -> int:
        return sum(counts.get(key, 0) - 1 for key in keys[i][pick[i]]
                   if counts.get(key, 0) > 1)

    counts: dict = {}
    for i in range(k):
        for key in keys[i][pick[i]]:
            counts[key] = counts.get(key, 0) + 1
    for _ in range(repair_rounds):
        dirty = [i for i in range(k) if conflicts(i, counts) > 0]
        if not dirty:
            return [parts[i][pick[i]] for i in range(k)]
        i = dirty[rng.randrange(len(dirty))]
        for key in keys[i][pick[i]]:
            counts[key] -= 1
        best_ci, best_score = None, None
        for ci in range(len(keys[i])):
            score = sum(counts.get(key, 0) for key in keys[i][ci])
            if best_score is None or score < best_score:
                best_ci, best_score = ci, score
        if best_score and best_score > 0:
            # tolerate ties randomly to escape local minima
            if rng.random() < 0.3:
                best_ci = rng.randrange(len(keys[i]))
        pick[i] = best_ci
        for key in keys[i][pick[i]]:
            counts[key] = counts.get(key, 0) + 1
    dirty = [i for i in range(k) if conflicts(i, counts) > 0]
    if not dirty:
        return [parts[i][pick[i]] for i in range(k)]
    raise TransversalFailure(f"repair budget exhausted, {len(dirty)} parts dirty")
