"""Pure-Python traversal kernels. Same contract as the compiled ``_ckernels``.

Adjacency is CSR: the neighbours of net ``n`` are ``idx[ptr[n]:ptr[n+1]]``.
``stop`` marks resolved nets (traversal ends there and records them), ``skip``
marks nets that are ignored entirely (constant-driven).
"""

from collections import deque

BACKEND = "python"


def prepare(arr):
    return arr.tolist()


def bfs_frontier(ptr, idx, stop, skip, start, budget):
    """Nearest ``stop`` nets reachable from ``start`` through non-stop nets.

    Returns ``(found, truncated, visits)``; ``visits`` counts dequeued nets.
    """
    seen = {start}
    found = []
    queue = deque([start])
    visits = 0
    truncated = False
    while queue:
        n = queue.popleft()
        visits += 1
        if visits > budget:
            truncated = True
            break
        for j in range(ptr[n], ptr[n + 1]):
            p = idx[j]
            if skip[p] or p in seen:
                continue
            seen.add(p)
            if stop[p]:
                found.append(p)
            else:
                queue.append(p)
    return found, truncated, visits


def scc_order(ptr, idx, stop, skip):
    """Strongly connected components of the non-stop, non-skip subgraph.

    Components come out dependencies-first (Tarjan emission order when edges
    point from a net to the nets it depends on). Returns ``(order, starts,
    comp)``: members of component ``c`` are ``order[starts[c]:starts[c+1]]``
    and ``comp[n]`` is the component of net ``n`` (-1 if inactive).
    """
    m = len(ptr) - 1
    index = [-1] * m
    low = [0] * m
    onstack = bytearray(m)
    comp = [-1] * m
    stack = []
    order = []
    starts = [0]
    counter = 0
    for root in range(m):
        if stop[root] or skip[root] or index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = 1
        work = [[root, ptr[root]]]
        while work:
            frame = work[-1]
            v, e = frame
            end = ptr[v + 1]
            descended = False
            while e < end:
                w = idx[e]
                e += 1
                if stop[w] or skip[w]:
                    continue
                if index[w] == -1:
                    frame[1] = e
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = 1
                    work.append([w, ptr[w]])
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                c = len(starts) - 1
                while True:
                    w = stack.pop()
                    onstack[w] = 0
                    comp[w] = c
                    order.append(w)
                    if w == v:
                        break
                starts.append(len(order))
    return order, starts, comp


def frontier_sets(ptr, idx, stop, skip, labels):
    """Nearest-stop frontier of every active net, in one dependency-ordered sweep.

    ``result[n]`` is a frozenset of ``labels[p]`` over the stop nets ``p``
    reachable from ``n`` through active nets; ``None`` for stop/skip nets.
    Members of one cycle share a frontier.
    """
    order, starts, comp = scc_order(ptr, idx, stop, skip)
    res = [None] * (len(ptr) - 1)
    empty = frozenset()
    for c in range(len(starts) - 1):
        a, b = starts[c], starts[c + 1]
        direct = None
        sets = []
        for k in range(a, b):
            n = order[k]
            for j in range(ptr[n], ptr[n + 1]):
                p = idx[j]
                if skip[p]:
                    continue
                if stop[p]:
                    if direct is None:
                        direct = set()
                    direct.add(labels[p])
                elif comp[p] != c:
                    sets.append(res[p])
        if direct is None:
            if not sets:
                val = empty
            elif len(sets) == 1:
                val = sets[0]
            else:
                val = empty.union(*sets)
        else:
            for s in sets:
                direct |= s
            val = frozenset(direct)
        for k in range(a, b):
            res[order[k]] = val
    return res
