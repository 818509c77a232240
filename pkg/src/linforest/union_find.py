"""Union-find, plus a rollback variant for backtracking searches.

The rollback variant skips path compression so that unions can be undone in
LIFO order; used to track monochromatic path fragments (a union that would
merge two ends of one fragment closes a cycle and is rejected).
"""

from __future__ import annotations


class DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return True


class RollbackDSU:
    """Union by size, no compression; undo() reverts the last union."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.trail: list[tuple[int, int]] = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.trail.append((rx, ry))
        return True

    def undo(self) -> None:
        rx, ry = self.trail.pop()
        self.parent[ry] = ry
        self.size[rx] -= self.size[ry]

    def mark(self) -> int:
        return len(self.trail)

    def rollback_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.undo()
