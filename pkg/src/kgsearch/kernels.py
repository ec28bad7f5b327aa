"""Inner-loop kernels over CSR adjacency, written in nopython-compatible style.

Every function here takes plain numpy arrays and scalar ints only, so the
same source compiles under numba and also runs as-is in plain Python.
``accel`` decides which variant a caller gets.
"""

import numpy as np


def sketch_round(indptr, nbrs, key_order, visited, used, r, landmark, parent, dist):
    """Run one landmark-covering round over a subgraph view.

    ``key_order`` ranks candidate landmarks best-first. ``visited`` must come
    in pre-marked True for vertices absent from the view; it is consumed.
    ``used`` persists across rounds and is updated in place. Outputs are
    written into ``landmark``/``parent``/``dist`` (pre-filled with -1).

    Each selected landmark runs a breadth-first search of depth at most ``r``
    that only enters vertices not yet visited this round, so the visited sets
    of the round's searches partition the view.
    """
    n = indptr.shape[0] - 1
    queue = np.empty(n, np.int64)
    remaining = 0
    for v in range(n):
        if not visited[v]:
            remaining += 1
    ptr = 0
    while remaining > 0:
        lm = -1
        # primary scan: best unvisited and never-used candidate
        p = ptr
        while p < n:
            v = key_order[p]
            if not visited[v] and not used[v]:
                lm = v
                ptr = p
                break
            p += 1
        if lm == -1:
            # every unvisited vertex already served as a landmark; relax the
            # reuse constraint so the round can terminate
            p = 0
            while p < n:
                v = key_order[p]
                if not visited[v]:
                    lm = v
                    break
                p += 1
        used[lm] = True
        visited[lm] = True
        landmark[lm] = lm
        parent[lm] = -1
        dist[lm] = 0
        remaining -= 1
        head = 0
        tail = 0
        queue[tail] = lm
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= r:
                continue
            for j in range(indptr[u], indptr[u + 1]):
                w = nbrs[j]
                if not visited[w]:
                    visited[w] = True
                    dist[w] = du + 1
                    parent[w] = u
                    landmark[w] = lm
                    queue[tail] = w
                    tail += 1
                    remaining -= 1
    return 0


def pll_build(indptr, nbrs, order, r):
    """Build restricted hub labels by pruned BFS in the given vertex order.

    Returns flat label arrays (hub, dist, pred) in insertion order plus a
    per-vertex count; the caller turns them into sorted CSR form. A label
    is only stored when no earlier hub already certifies an equal-or-shorter
    distance, which keeps the index canonical and minimal.
    """
    n = indptr.shape[0] - 1
    cap = 4 * n + 16
    lab_hub = np.empty(cap, np.int64)
    lab_dist = np.empty(cap, np.int64)
    lab_pred = np.empty(cap, np.int64)
    lab_vert = np.empty(cap, np.int64)
    lab_next = np.empty(cap, np.int64)
    head = np.full(n, -1, np.int64)
    count = np.zeros(n, np.int64)
    total = 0

    hub_dist = np.full(n, -1, np.int64)  # scratch: distances to current root's hubs
    dist = np.full(n, -1, np.int64)
    bfs_parent = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)

    for idx in range(n):
        root = order[idx]
        i = head[root]
        while i != -1:
            hub_dist[lab_hub[i]] = lab_dist[i]
            i = lab_next[i]
        head_q = 0
        tail = 0
        queue[tail] = root
        tail += 1
        dist[root] = 0
        bfs_parent[root] = -1
        while head_q < tail:
            u = queue[head_q]
            head_q += 1
            du = dist[u]
            pruned = False
            i = head[u]
            while i != -1:
                h = lab_hub[i]
                if hub_dist[h] != -1 and hub_dist[h] + lab_dist[i] <= du:
                    pruned = True
                    break
                i = lab_next[i]
            if pruned:
                continue
            if total == cap:
                new_cap = cap * 2
                nh = np.empty(new_cap, np.int64)
                nd = np.empty(new_cap, np.int64)
                npd = np.empty(new_cap, np.int64)
                nv = np.empty(new_cap, np.int64)
                nn = np.empty(new_cap, np.int64)
                for t in range(total):
                    nh[t] = lab_hub[t]
                    nd[t] = lab_dist[t]
                    npd[t] = lab_pred[t]
                    nv[t] = lab_vert[t]
                    nn[t] = lab_next[t]
                lab_hub = nh
                lab_dist = nd
                lab_pred = npd
                lab_vert = nv
                lab_next = nn
                cap = new_cap
            lab_hub[total] = root
            lab_dist[total] = du
            lab_pred[total] = bfs_parent[u]
            lab_vert[total] = u
            lab_next[total] = head[u]
            head[u] = total
            count[u] += 1
            total += 1
            if du < r:
                for j in range(indptr[u], indptr[u + 1]):
                    w = nbrs[j]
                    if dist[w] == -1:
                        dist[w] = du + 1
                        bfs_parent[w] = u
                        queue[tail] = w
                        tail += 1
        # reset scratch state touched by this root
        i = head[root]
        while i != -1:
            hub_dist[lab_hub[i]] = -1
            i = lab_next[i]
        for t in range(tail):
            dist[queue[t]] = -1
            bfs_parent[queue[t]] = -1
    return lab_hub[:total], lab_dist[:total], lab_pred[:total], lab_vert[:total], count


def bfs_distances(indptr, nbrs, src, max_depth):
    """Unit-weight BFS distances from ``src``; -1 marks unreachable.

    ``max_depth`` < 0 means unbounded.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    dist[src] = 0
    queue[tail] = src
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if max_depth >= 0 and du >= max_depth:
            continue
        for j in range(indptr[u], indptr[u + 1]):
            w = nbrs[j]
            if dist[w] == -1:
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    return dist
