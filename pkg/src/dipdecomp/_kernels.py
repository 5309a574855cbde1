"""Compiled inner loops for tree growing and prediction."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def level_histograms(B, cols, node_of_row, pos_of_node, r, m, nb):
    """Residual sums and row counts per (active node, feature, bin).

    ``pos_of_node[k]`` is the position of node ``k`` among the ``m`` active
    nodes, or -1 for finished leaves. Also returns the residual sum of
    squares per active node.
    """
    p = cols.shape[0]
    hs = np.zeros((m, p, nb))
    hc = np.zeros((m, p, nb))
    ss = np.zeros(m)
    for i in range(B.shape[0]):
        q = pos_of_node[node_of_row[i]]
        if q < 0:
            continue
        ri = r[i]
        ss[q] += ri * ri
        for k in range(p):
            b = B[i, cols[k]]
            hs[q, k, b] += ri
            hc[q, k, b] += 1.0
    return hs, hc, ss


@njit(cache=True, nogil=True)
def leaf_values(node_of_row, r, n_nodes, lr, step):
    """Shrunken mean residual per leaf; writes each row's leaf value into ``step``."""
    s = np.zeros(n_nodes)
    c = np.zeros(n_nodes)
    for i in range(node_of_row.shape[0]):
        s[node_of_row[i]] += r[i]
        c[node_of_row[i]] += 1.0
    value = np.zeros(n_nodes)
    for k in range(n_nodes):
        if c[k] > 0:
            value[k] = lr * s[k] / c[k]
    for i in range(node_of_row.shape[0]):
        step[i] = value[node_of_row[i]]
    return value


@njit(cache=True, nogil=True)
def route_rows(B, node_of_row, split_col, split_bin, left_child):
    for i in range(B.shape[0]):
        nd = node_of_row[i]
        c = split_col[nd]
        if c >= 0:
            if B[i, c] <= split_bin[nd]:
                node_of_row[i] = left_child[nd]
            else:
                node_of_row[i] = left_child[nd] + 1


@njit(cache=True, nogil=True)
def predict_forest(X, feature, threshold, left, right, value, offsets, out):
    """Add the predictions of every tree to ``out``.

    Trees are stored back to back; tree ``t`` occupies node slots
    ``offsets[t]:offsets[t+1]`` and its child pointers are tree-local.
    """
    n_trees = offsets.shape[0] - 1
    for i in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            base = offsets[t]
            nd = 0
            while feature[base + nd] >= 0:
                if X[i, feature[base + nd]] <= threshold[base + nd]:
                    nd = left[base + nd]
                else:
                    nd = right[base + nd]
            acc += value[base + nd]
        out[i] += acc
