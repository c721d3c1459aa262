# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixpoint kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t idx_t
ctypedef cnp.uint8_t flag_t


def ex_image(idx_t[::1] pred_ptr, idx_t[::1] pred_idx, flag_t[::1] target):
    cdef Py_ssize_t n = target.shape[0], v, k
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    for v in range(n):
        if target[v]:
            for k in range(pred_ptr[v], pred_ptr[v + 1]):
                out[pred_idx[k]] = 1
    return out_arr


def eu_fix(idx_t[::1] pred_ptr, idx_t[::1] pred_idx, flag_t[::1] hold, flag_t[::1] goal):
    cdef Py_ssize_t n = goal.shape[0], v, u, k, top = 0
    out_arr = np.array(goal, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    stack_arr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] stack = stack_arr
    for v in range(n):
        if out[v]:
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if not out[u] and hold[u]:
                out[u] = 1
                stack[top] = u
                top += 1
    return out_arr


def eg_fix(idx_t[::1] succ_ptr, idx_t[::1] succ_idx, idx_t[::1] pred_ptr,
           idx_t[::1] pred_idx, flag_t[::1] hold):
    cdef Py_ssize_t n = hold.shape[0], v, u, k, top = 0
    cdef idx_t c
    out_arr = np.array(hold, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    count_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] count = count_arr
    stack_arr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] stack = stack_arr
    for v in range(n):
        if not out[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if out[succ_idx[k]]:
                c += 1
        count[v] = c
        if c == 0 and succ_ptr[v + 1] > succ_ptr[v]:
            stack[top] = v
            top += 1
    for k in range(top):
        out[stack[k]] = 0
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if out[u]:
                count[u] -= 1
                if count[u] == 0:
                    out[u] = 0
                    stack[top] = u
                    top += 1
    return out_arr


def attractor(idx_t[::1] succ_ptr, idx_t[::1] succ_idx, idx_t[::1] pred_ptr,
              idx_t[::1] pred_idx, flag_t[::1] owner, flag_t[::1] alive,
              flag_t[::1] target, int player):
    cdef Py_ssize_t n = alive.shape[0], v, u, k, top = 0
    cdef idx_t c
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    count_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] count = count_arr
    stack_arr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] stack = stack_arr
    for v in range(n):
        if target[v] and alive[v]:
            out[v] = 1
            stack[top] = v
            top += 1
        elif alive[v] and owner[v] != player:
            c = 0
            for k in range(succ_ptr[v], succ_ptr[v + 1]):
                if alive[succ_idx[k]]:
                    c += 1
            count[v] = c
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if not alive[u] or out[u]:
                continue
            if owner[u] == player:
                out[u] = 1
                stack[top] = u
                top += 1
            else:
                count[u] -= 1
                if count[u] == 0:
                    out[u] = 1
                    stack[top] = u
                    top += 1
    return out_arr
