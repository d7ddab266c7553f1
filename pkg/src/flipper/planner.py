"""Motion planning over the grid.

``shortest_path`` is A* to the nearest of a target set, with fully pinned
tie-breaking (f, then h, then push order with neighbors pushed up, down,
left, right) so plans are reproducible.  ``visit_order`` orders a set of
sites as an open tour: metric closure by per-vertex BFS, minimum spanning
tree, minimum-weight perfect matching on odd-degree vertices (exact up to 20,
greedy beyond), Euler tour, shortcutting, and the cheaper of the two
directions after dropping the edge closing the cycle.

Hand-rolled rather than delegating to a graph library: the tie-breaking
rules above are part of the contract, and trace equality checks depend on
them.
"""
from __future__ import annotations

import heapq
from collections import deque
from itertools import combinations
from typing import Iterable, Optional

from .world import DIRECTION_DELTAS, GridWorld, Point, passable

_DIRS = ("up", "down", "left", "right")


def shortest_path(start: Point, targets: Iterable[Point], w: GridWorld,
                  avoid: Iterable[Point] = ()) -> Optional[list[str]]:
    """Moves to the nearest target, or None.

    Cells in ``avoid`` are never entered, except a target as the final cell;
    the start cell itself is exempt.
    """
    goal = {p for p in targets if passable(w, p)}
    if not goal:
        return None
    if start in goal:
        return []
    avoid_set = set(avoid)

    def h(p: Point) -> int:
        return min(abs(p[0] - t[0]) + abs(p[1] - t[1]) for t in goal)

    counter = 0
    frontier: list[tuple[int, int, int, Point]] = [(h(start), h(start), counter, start)]
    came_from: dict[Point, tuple[Point, str]] = {}
    best_g: dict[Point, int] = {start: 0}
    while frontier:
        f, _, _, pos = heapq.heappop(frontier)
        g = best_g[pos]
        if f > g + h(pos):
            continue  # stale entry
        if pos in goal:
            moves: list[str] = []
            while pos != start:
                pos, d = came_from[pos]
                moves.append(d)
            moves.reverse()
            return moves
        for d in _DIRS:
            dx, dy = DIRECTION_DELTAS[d]
            nxt = (pos[0] + dx, pos[1] + dy)
            if not passable(w, nxt):
                continue
            if nxt in avoid_set and nxt not in goal:
                continue
            ng = g + 1
            if nxt in best_g and best_g[nxt] <= ng:
                continue
            best_g[nxt] = ng
            came_from[nxt] = (pos, d)
            counter += 1
            hn = h(nxt)
            heapq.heappush(frontier, (ng + hn, hn, counter, nxt))
    return None


def bfs_distances(start: Point, w: GridWorld) -> dict[Point, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        for d in _DIRS:
            dx, dy = DIRECTION_DELTAS[d]
            nxt = (pos[0] + dx, pos[1] + dy)
            if passable(w, nxt) and nxt not in dist:
                dist[nxt] = dist[pos] + 1
                queue.append(nxt)
    return dist


def visit_order(start: Point, sites: Iterable[Point],
                w: GridWorld) -> tuple[list[Point], list[Point]]:
    """(ordered reachable sites, dropped unreachable sites)."""
    wanted = sorted(set(sites))
    from_start = bfs_distances(start, w)
    reachable = [p for p in wanted if p in from_start]
    dropped = [p for p in wanted if p not in from_start]
    if not reachable:
        return [], dropped

    vertices = sorted({start, *reachable})
    dist: dict[Point, dict[Point, int]] = {}
    for v in vertices:
        table = from_start if v == start else bfs_distances(v, w)
        dist[v] = {u: table[u] for u in vertices}

    tour = _open_tour(start, vertices, dist)
    order = [p for p in tour if p in set(reachable)]
    return order, dropped


def tour_cost(order: list[Point], start: Point,
              dist: dict[Point, dict[Point, int]]) -> int:
    cost, prev = 0, start
    for p in order:
        cost += dist[prev][p]
        prev = p
    return cost


def _open_tour(start: Point, vertices: list[Point],
               dist: dict[Point, dict[Point, int]]) -> list[Point]:
    if len(vertices) == 1:
        return [start]

    mst = _prim_mst(vertices, dist)
    degree = {v: 0 for v in vertices}
    for a, b in mst:
        degree[a] += 1
        degree[b] += 1
    odd = [v for v in vertices if degree[v] % 2 == 1]
    matching = _min_perfect_matching(odd, dist)

    adj: dict[Point, list[Point]] = {v: [] for v in vertices}
    for a, b in mst + matching:
        adj[a].append(b)
        adj[b].append(a)

    circuit = _euler_circuit(start, adj)
    seen: set[Point] = set()
    closed = [v for v in circuit if not (v in seen or seen.add(v))]

    forward = closed[1:]
    backward = list(reversed(forward))
    if tour_cost(backward, start, dist) < tour_cost(forward, start, dist):
        return [start] + backward
    return [start] + forward


def _prim_mst(vertices: list[Point],
              dist: dict[Point, dict[Point, int]]) -> list[tuple[Point, Point]]:
    in_tree = {vertices[0]}
    edges: list[tuple[Point, Point]] = []
    while len(in_tree) < len(vertices):
        best = None
        for a in sorted(in_tree):
            for b in vertices:
                if b in in_tree:
                    continue
                cand = (dist[a][b], a, b)
                if best is None or cand < best:
                    best = cand
        _, a, b = best
        in_tree.add(b)
        edges.append((a, b))
    return edges


def _min_perfect_matching(odd: list[Point],
                          dist: dict[Point, dict[Point, int]]) -> list[tuple[Point, Point]]:
    odd = sorted(odd)
    if not odd:
        return []
    if len(odd) <= 20:
        return _exact_matching(odd, dist)
    return _greedy_matching(odd, dist)


def _exact_matching(odd: list[Point],
                    dist: dict[Point, dict[Point, int]]) -> list[tuple[Point, Point]]:
    n = len(odd)
    full = (1 << n) - 1
    memo: dict[int, tuple[int, Optional[tuple[int, int]]]] = {0: (0, None)}

    def solve(mask: int) -> int:
        if mask in memo:
            return memo[mask][0]
        i = next(k for k in range(n) if mask & (1 << k))
        best, best_pair = None, None
        for j in range(i + 1, n):
            if not mask & (1 << j):
                continue
            rest = solve(mask & ~(1 << i) & ~(1 << j))
            cost = dist[odd[i]][odd[j]] + rest
            if best is None or cost < best:
                best, best_pair = cost, (i, j)
        memo[mask] = (best, best_pair)
        return best

    solve(full)
    pairs: list[tuple[Point, Point]] = []
    mask = full
    while mask:
        _, pair = memo[mask]
        i, j = pair
        pairs.append((odd[i], odd[j]))
        mask &= ~(1 << i) & ~(1 << j)
    return pairs


def _greedy_matching(odd: list[Point],
                     dist: dict[Point, dict[Point, int]]) -> list[tuple[Point, Point]]:
    unmatched = list(odd)
    pairs: list[tuple[Point, Point]] = []
    while unmatched:
        best = min((dist[a][b], a, b) for a, b in combinations(unmatched, 2))
        _, a, b = best
        pairs.append((a, b))
        unmatched.remove(a)
        unmatched.remove(b)
    return pairs


def _euler_circuit(start: Point, adj: dict[Point, list[Point]]) -> list[Point]:
    remaining = {v: sorted(ns, reverse=True) for v, ns in adj.items()}
    stack = [start]
    circuit: list[Point] = []
    while stack:
        v = stack[-1]
        if remaining[v]:
            u = remaining[v].pop()
            remaining[u].remove(v)  # consume one copy of the undirected edge
            stack.append(u)
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit
