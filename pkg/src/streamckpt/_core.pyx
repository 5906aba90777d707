# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels. Semantics must match ``_pycore`` exactly."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset


def fnv1a64(const unsigned char[:] data, uint64_t h=0xCBF29CE484222325ULL):
    cdef Py_ssize_t i, n = data.shape[0]
    cdef uint64_t prime = 0x100000001B3ULL
    for i in range(n):
        h ^= data[i]
        h *= prime
    return h


def strict_reach_marks(Py_ssize_t n_nodes, indptr, indices, roots):
    cdef Py_ssize_t n_roots = len(roots)
    cdef Py_ssize_t n_edges = len(indices)
    cdef int *ip = <int *> malloc((n_nodes + 1) * sizeof(int))
    cdef int *ix = <int *> malloc((n_edges + 1) * sizeof(int))
    cdef int *is_root = <int *> malloc((n_nodes + 1) * sizeof(int))
    cdef char *seen = <char *> malloc(n_nodes + 1)
    cdef int *queue = <int *> malloc((n_nodes + 1) * sizeof(int))
    cdef Py_ssize_t i, k, e, head, tail
    cdef int r, u, v, ku
    marked = [False] * n_roots
    try:
        for i in range(n_nodes + 1):
            ip[i] = indptr[i]
            is_root[i] = -1
        for i in range(n_edges):
            ix[i] = indices[i]
        for k in range(n_roots):
            is_root[<int> roots[k]] = k
        for k in range(n_roots):
            r = roots[k]
            memset(seen, 0, n_nodes + 1)
            head = 0
            tail = 0
            for e in range(ip[r], ip[r + 1]):
                v = ix[e]
                if not seen[v]:
                    seen[v] = 1
                    queue[tail] = v
                    tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                ku = is_root[u]
                if ku >= 0 and ku != k:
                    marked[ku] = True
                for e in range(ip[u], ip[u + 1]):
                    v = ix[e]
                    if not seen[v]:
                        seen[v] = 1
                        queue[tail] = v
                        tail += 1
    finally:
        free(ip)
        free(ix)
        free(is_root)
        free(seen)
        free(queue)
    return marked


def zpath_lowest_intervals(int n_procs, by_sender, int start_proc, long start_interval):
    cdef list best = [None] * n_procs
    cdef list cursor = [0] * n_procs
    cdef list work = [start_proc]
    cdef list msgs
    cdef Py_ssize_t i, n
    cdef long threshold, a, b
    cdef int p, r
    best[start_proc] = start_interval
    while work:
        p = work.pop()
        msgs = by_sender[p]
        threshold = best[p]
        i = cursor[p]
        n = len(msgs)
        while i < n:
            a, r, b = msgs[i]
            if a < threshold:
                break
            if best[r] is None or b < best[r]:
                best[r] = b
                work.append(r)
            i += 1
        cursor[p] = i
    return best
