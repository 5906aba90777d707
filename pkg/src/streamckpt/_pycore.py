"""Pure-Python versions of the hot kernels.

These mirror ``_core.pyx`` one-for-one and are used when the compiled
extension is not available (or ``STREAMCKPT_PURE=1`` is set).
"""

from collections import deque

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data, h=FNV_OFFSET):
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def strict_reach_marks(n_nodes, indptr, indices, roots):
    """For each root, whether it is reachable (by >= 1 edge) from another root.

    The graph is given in CSR form (``indptr``/``indices``).
    """
    is_root = [-1] * n_nodes
    for k, r in enumerate(roots):
        is_root[r] = k
    marked = [False] * len(roots)
    for k, r in enumerate(roots):
        seen = [False] * n_nodes
        queue = deque()
        for e in range(indptr[r], indptr[r + 1]):
            v = indices[e]
            if not seen[v]:
                seen[v] = True
                queue.append(v)
        while queue:
            u = queue.popleft()
            ku = is_root[u]
            if ku >= 0 and ku != k:
                marked[ku] = True
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    return marked


def zpath_lowest_intervals(n_procs, by_sender, start_proc, start_interval):
    """Lowest receive interval reachable at each process by a Z-path.

    ``by_sender[p]`` is a list of ``(send_interval, receiver, recv_interval)``
    sorted by ``send_interval`` descending; unreceived messages are omitted.
    A Z-path may continue from process ``p`` with any message sent in an
    interval >= the lowest interval at which it was entered. Returns a list
    where unreachable processes hold ``None``.
    """
    best = [None] * n_procs
    best[start_proc] = start_interval
    # cursor[p]: number of messages of p already relaxed (prefix of the list)
    cursor = [0] * n_procs
    work = [start_proc]
    while work:
        p = work.pop()
        msgs = by_sender[p]
        threshold = best[p]
        i = cursor[p]
        while i < len(msgs) and msgs[i][0] >= threshold:
            _, r, b = msgs[i]
            if best[r] is None or b < best[r]:
                best[r] = b
                work.append(r)
            i += 1
        cursor[p] = i
    return best
