# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled traversal kernels. Contract identical to ``_pykernels``."""

import numpy as np

BACKEND = "cython"


def prepare(arr):
    return np.ascontiguousarray(arr)


def bfs_frontier(const int[::1] ptr, const int[::1] idx, const unsigned char[::1] stop,
                 const unsigned char[::1] skip, int start, long long budget):
    cdef Py_ssize_t m = ptr.shape[0] - 1
    cdef unsigned char[::1] seen = np.zeros(m, dtype=np.uint8)
    cdef int[::1] queue = np.empty(max(m, 1), dtype=np.int32)
    cdef Py_ssize_t head = 0, tail = 0, j
    cdef int n, p
    cdef long long visits = 0
    cdef bint truncated = False
    found = []
    seen[start] = 1
    queue[tail] = start
    tail += 1
    while head < tail:
        n = queue[head]
        head += 1
        visits += 1
        if visits > budget:
            truncated = True
            break
        for j in range(ptr[n], ptr[n + 1]):
            p = idx[j]
            if skip[p] or seen[p]:
                continue
            seen[p] = 1
            if stop[p]:
                found.append(p)
            else:
                queue[tail] = p
                tail += 1
    return found, truncated, visits


def scc_order(const int[::1] ptr, const int[::1] idx, const unsigned char[::1] stop,
              const unsigned char[::1] skip):
    cdef Py_ssize_t m = ptr.shape[0] - 1
    cdef int[::1] index = np.full(m, -1, dtype=np.int32)
    cdef int[::1] low = np.zeros(m, dtype=np.int32)
    cdef unsigned char[::1] onstack = np.zeros(m, dtype=np.uint8)
    cdef int[::1] comp = np.full(m, -1, dtype=np.int32)
    cdef int[::1] stack = np.empty(max(m, 1), dtype=np.int32)
    cdef int[::1] work_v = np.empty(max(m, 1), dtype=np.int32)
    cdef int[::1] work_e = np.empty(max(m, 1), dtype=np.int32)
    cdef int[::1] order = np.empty(m, dtype=np.int32)
    cdef int[::1] starts = np.empty(m + 1, dtype=np.int32)
    cdef Py_ssize_t sp = 0, wp = 0, op = 0, nc = 0
    cdef int root, v, w, u, e, end, counter = 0
    cdef bint descended
    starts[0] = 0
    for root in range(m):
        if stop[root] or skip[root] or index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = 1
        work_v[wp] = root
        work_e[wp] = ptr[root]
        wp += 1
        while wp > 0:
            v = work_v[wp - 1]
            e = work_e[wp - 1]
            end = ptr[v + 1]
            descended = False
            while e < end:
                w = idx[e]
                e += 1
                if stop[w] or skip[w]:
                    continue
                if index[w] == -1:
                    work_e[wp - 1] = e
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = 1
                    work_v[wp] = w
                    work_e[wp] = ptr[w]
                    wp += 1
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            wp -= 1
            if wp > 0:
                u = work_v[wp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    sp -= 1
                    w = stack[sp]
                    onstack[w] = 0
                    comp[w] = nc
                    order[op] = w
                    op += 1
                    if w == v:
                        break
                nc += 1
                starts[nc] = op
    return (np.asarray(order[:op]), np.asarray(starts[:nc + 1]), np.asarray(comp))


def frontier_sets(const int[::1] ptr, const int[::1] idx, const unsigned char[::1] stop,
                  const unsigned char[::1] skip, labels):
    cdef Py_ssize_t m = ptr.shape[0] - 1
    o, s, cp = scc_order(ptr, idx, stop, skip)
    cdef int[::1] order = o
    cdef int[::1] starts = s
    cdef int[::1] comp = cp
    cdef Py_ssize_t ncomp = starts.shape[0] - 1
    cdef Py_ssize_t c, k, j
    cdef int n, p
    res = [None] * m
    empty = frozenset()
    lab = labels.tolist() if hasattr(labels, "tolist") else labels
    for c in range(ncomp):
        direct = None
        sets = []
        for k in range(starts[c], starts[c + 1]):
            n = order[k]
            for j in range(ptr[n], ptr[n + 1]):
                p = idx[j]
                if skip[p]:
                    continue
                if stop[p]:
                    if direct is None:
                        direct = set()
                    direct.add(lab[p])
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
            for x in sets:
                direct |= x
            val = frozenset(direct)
        for k in range(starts[c], starts[c + 1]):
            res[order[k]] = val
    return res
