# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event loop for the GI^X/M/1 queue with negative customers and disasters.

Operation-for-operation twin of ``_simkernel_py.run_replication``.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, log
from libc.stdint cimport int64_t, uint64_t
from numpy.random cimport bitgen_t

cnp.import_array()

cdef enum:
    EV_DISASTER = 0
    EV_NEGATIVE = 1
    EV_SERVICE = 2
    EV_ARRIVAL = 3
    IA_EXP = 0
    IA_ERLANG = 1
    IA_DET = 2


cdef inline double _uniform(bitgen_t *rng) noexcept nogil:
    cdef uint64_t raw = rng.next_uint64(rng.state)
    return <double>(raw >> 11) * (1.0 / 9007199254740992.0)


cdef inline bitgen_t *_ptr(object bg) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")


cdef double _interarrival(int code, int k, const double[::1] vals, int m_hyper,
                          bitgen_t *rng) noexcept nogil:
    cdef double acc, u
    cdef int i, j
    if code == IA_EXP:
        return -log(1.0 - _uniform(rng)) / vals[0]
    if code == IA_ERLANG:
        acc = 0.0
        for i in range(k):
            acc += -log(1.0 - _uniform(rng)) / vals[0]
        return acc
    if code == IA_DET:
        return vals[0]
    u = _uniform(rng)
    j = 0
    while j < m_hyper - 1 and not u < vals[j]:
        j += 1
    return -log(1.0 - _uniform(rng)) / vals[m_hyper + j]


def run_replication(int ia_code, int ia_k, ia_vals, batch_cum, double mu, double eta,
                    double delta, int64_t n_total, int64_t n_warmup, priority, bitgens):
    """Simulate one replication; returns ``(pre_counts, time_hist, counters)``."""
    cdef const double[::1] iav = np.ascontiguousarray(ia_vals, dtype=np.float64)
    cdef const double[::1] cum = np.ascontiguousarray(batch_cum, dtype=np.float64)
    cdef int nb = cum.shape[0]
    cdef int m_hyper = iav.shape[0] // 2
    cdef int prio[4]
    cdef int i
    for i in range(4):
        prio[i] = int(priority[i])

    cdef bitgen_t *g_arr = _ptr(bitgens[0])
    cdef bitgen_t *g_bat = _ptr(bitgens[1])
    cdef bitgen_t *g_srv = _ptr(bitgens[2])
    cdef bitgen_t *g_neg = _ptr(bitgens[3])
    cdef bitgen_t *g_dis = _ptr(bitgens[4])

    cdef Py_ssize_t cap = 256
    pre_arr = np.zeros(cap, dtype=np.int64)
    hist_arr = np.zeros(cap, dtype=np.float64)
    cdef int64_t[::1] pre = pre_arr
    cdef double[::1] hist = hist_arr

    cdef double times[4]
    times[EV_DISASTER] = INFINITY
    times[EV_NEGATIVE] = INFINITY
    times[EV_SERVICE] = INFINITY
    times[EV_ARRIVAL] = _interarrival(ia_code, ia_k, iav, m_hyper, g_arr)
    if eta > 0:
        times[EV_NEGATIVE] = -log(1.0 - _uniform(g_neg)) / eta
    if delta > 0:
        times[EV_DISASTER] = -log(1.0 - _uniform(g_dis)) / delta

    cdef double t = 0.0, tmin, u
    cdef int64_t n = 0, arrivals = 0, kb, n_start = 0, grow
    cdef bint window = False
    cdef int ev, e, k
    cdef int64_t c_batches = 0, c_in = 0, c_srv = 0, c_neg = 0, c_neg0 = 0
    cdef int64_t c_dis = 0, c_dis0 = 0, c_rdis = 0

    while True:
        ev = prio[0]
        tmin = times[ev]
        for k in range(1, 4):
            e = prio[k]
            if times[e] < tmin:
                tmin = times[e]
                ev = e
        if window:
            hist[n] += tmin - t
        t = tmin
        if ev == EV_DISASTER:
            if n > 0:
                if window:
                    c_dis += 1
                    c_rdis += n
                n = 0
                times[EV_SERVICE] = INFINITY
            elif window:
                c_dis0 += 1
            times[EV_DISASTER] = t + -log(1.0 - _uniform(g_dis)) / delta
        elif ev == EV_NEGATIVE:
            if n > 0:
                if window:
                    c_neg += 1
                n -= 1
                if n > 0:
                    times[EV_SERVICE] = t + -log(1.0 - _uniform(g_srv)) / mu
                else:
                    times[EV_SERVICE] = INFINITY
            elif window:
                c_neg0 += 1
            times[EV_NEGATIVE] = t + -log(1.0 - _uniform(g_neg)) / eta
        elif ev == EV_SERVICE:
            if window:
                c_srv += 1
            n -= 1
            if n > 0:
                times[EV_SERVICE] = t + -log(1.0 - _uniform(g_srv)) / mu
            else:
                times[EV_SERVICE] = INFINITY
        else:
            if arrivals == n_warmup:
                window = True
                n_start = n
            if window:
                pre[n] += 1
            u = _uniform(g_bat)
            kb = 0
            while kb < nb - 1 and not u < cum[kb]:
                kb += 1
            kb += 1
            if n == 0:
                times[EV_SERVICE] = t + -log(1.0 - _uniform(g_srv)) / mu
            n += kb
            if window:
                c_batches += 1
                c_in += kb
            arrivals += 1
            if n >= cap:
                grow = max(2 * cap, n + 1) - cap
                pre_arr = np.concatenate([pre_arr, np.zeros(grow, dtype=np.int64)])
                hist_arr = np.concatenate([hist_arr, np.zeros(grow, dtype=np.float64)])
                pre = pre_arr
                hist = hist_arr
                cap += grow
            if arrivals == n_total:
                break
            times[EV_ARRIVAL] = t + _interarrival(ia_code, ia_k, iav, m_hyper, g_arr)

    counters = np.array(
        [c_batches, c_in, c_srv, c_neg, c_neg0, c_dis, c_dis0, c_rdis, n_start, n],
        dtype=np.int64,
    )
    return pre_arr, hist_arr, counters
