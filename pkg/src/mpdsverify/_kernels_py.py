"""Pure-Python fixpoint kernels; same signatures as the compiled ``_kernels`` module.

Graphs are in CSR form: ``indptr`` (n+1 int64) and ``indices`` (int64).  Node
sets are uint8 masks of length n.
"""
import numpy as np


def ex_image(pred_ptr, pred_idx, target):
    n = len(target)
    out = np.zeros(n, dtype=np.uint8)
    for v in np.flatnonzero(target):
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            out[pred_idx[k]] = 1
    return out


def eu_fix(pred_ptr, pred_idx, hold, goal):
    out = goal.astype(np.uint8, copy=True)
    stack = list(np.flatnonzero(out))
    while stack:
        v = stack.pop()
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if not out[u] and hold[u]:
                out[u] = 1
                stack.append(u)
    return out


def eg_fix(succ_ptr, succ_idx, pred_ptr, pred_idx, hold):
    n = len(hold)
    out = hold.astype(np.uint8, copy=True)
    count = np.zeros(n, dtype=np.int64)
    stack = []
    for v in range(n):
        if not out[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if out[succ_idx[k]]:
                c += 1
        count[v] = c
        if c == 0 and succ_ptr[v + 1] > succ_ptr[v]:
            stack.append(v)
    for v in stack:
        out[v] = 0
    while stack:
        v = stack.pop()
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if out[u]:
                count[u] -= 1
                if count[u] == 0:
                    out[u] = 0
                    stack.append(u)
    return out


def attractor(succ_ptr, succ_idx, pred_ptr, pred_idx, owner, alive, target, player):
    """Nodes of the ``alive`` subgame from which ``player`` can force a visit to ``target``."""
    n = len(alive)
    out = (target & alive).astype(np.uint8)
    count = np.zeros(n, dtype=np.int64)
    for v in range(n):
        if alive[v] and not out[v] and owner[v] != player:
            c = 0
            for k in range(succ_ptr[v], succ_ptr[v + 1]):
                if alive[succ_idx[k]]:
                    c += 1
            count[v] = c
    stack = list(np.flatnonzero(out))
    while stack:
        v = stack.pop()
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if not alive[u] or out[u]:
                continue
            if owner[u] == player:
                out[u] = 1
                stack.append(u)
            else:
                count[u] -= 1
                if count[u] == 0:
                    out[u] = 1
                    stack.append(u)
    return out
