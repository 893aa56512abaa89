"""Dinic max-flow on adjacency lists.

Works for integer capacities (exact) and for real capacities, where residual
capacities at or below ``eps`` are treated as saturated.
"""

from collections import deque


class FlowNetwork:
    def __init__(self, n, eps=0):
        self.n = n
        self.eps = eps
        self.head = []
        self.cap = []
        self.adj = [[] for _ in range(n)]
        self._base = []

    def add_node(self):
        self.adj.append([])
        self.n += 1
        return self.n - 1

    def add_arc(self, u, v, capacity):
        """Add arc ``u -> v``; returns its index for :meth:`flow_on`."""
        idx = len(self.head)
        self.head.append(v)
        self.cap.append(capacity)
        self.adj[u].append(idx)
        self.head.append(u)
        self.cap.append(0 * capacity)
        self.adj[v].append(idx + 1)
        return idx

    def flow_on(self, arc):
        return self._base[arc] - self.cap[arc]

    def _levels(self, s, t):
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        eps = self.eps
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.head[a]
                if level[v] < 0 and self.cap[a] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level

    def _blocking(self, s, t, level):
        eps = self.eps
        it = [0] * self.n
        total = 0
        while True:
            # iterative DFS along the level graph
            path = []
            u = s
            while u != t:
                adj = self.adj[u]
                while it[u] < len(adj):
                    a = adj[it[u]]
                    v = self.head[a]
                    if self.cap[a] > eps and level[v] == level[u] + 1:
                        break
                    it[u] += 1
                else:
                    if u == s:
                        return total
                    level[u] = -1
                    a = path.pop()
                    u = self.head[a ^ 1]
                    it[u] += 1
                    continue
                path.append(a)
                u = self.head[a]
            push = min(self.cap[a] for a in path)
            for a in path:
                self.cap[a] -= push
                self.cap[a ^ 1] += push
            total += push

    def max_flow(self, s, t):
        self._base = list(self.cap)
        total = 0
        while True:
            level = self._levels(s, t)
            if level[t] < 0:
                return total
            total += self._blocking(s, t, level)

    def source_side(self, s):
        """Vertices reachable from ``s`` in the residual network."""
        seen = [False] * self.n
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.head[a]
                if not seen[v] and self.cap[a] > self.eps:
                    seen[v] = True
                    queue.append(v)
        return [v for v in range(self.n) if seen[v]]
