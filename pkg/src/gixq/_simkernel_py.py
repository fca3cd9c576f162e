"""Pure-Python event loop; mirrors ``_simkernel.pyx`` operation for operation.

Both kernels draw uniforms as ``(raw64 >> 11) * 2**-53`` from the same
bit generators, so given equal inputs they return bit-identical results.
"""
import math

import numpy as np

INF = math.inf
EV_DISASTER, EV_NEGATIVE, EV_SERVICE, EV_ARRIVAL = 0, 1, 2, 3
IA_EXP, IA_ERLANG, IA_DET, IA_HYPER = 0, 1, 2, 3
N_COUNTERS = 10

_SCALE = 1.0 / 9007199254740992.0
_BLOCK = 4096


class _Uniforms:
    __slots__ = ("bg", "buf", "pos")

    def __init__(self, bg):
        self.bg = bg
        self.buf = []
        self.pos = 0

    def __call__(self):
        if self.pos == len(self.buf):
            raw = self.bg.random_raw(_BLOCK) >> np.uint64(11)
            self.buf = (raw.astype(np.float64) * _SCALE).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def run_replication(ia_code, ia_k, ia_vals, batch_cum, mu, eta, delta,
                    n_total, n_warmup, priority, bitgens):
    """Simulate one replication.

    Returns ``(pre_counts, time_hist, counters)``; see ``simulator`` for the
    counter layout.
    """
    u_arr, u_bat, u_srv, u_neg, u_dis = (_Uniforms(bg) for bg in bitgens)
    log = math.log
    ia_vals = [float(x) for x in ia_vals]
    cum = [float(x) for x in batch_cum]
    nb = len(cum)
    prio = [int(p) for p in priority]
    m_hyper = len(ia_vals) // 2

    def interarrival():
        if ia_code == IA_EXP:
            return -log(1.0 - u_arr()) / ia_vals[0]
        if ia_code == IA_ERLANG:
            acc = 0.0
            for _ in range(ia_k):
                acc += -log(1.0 - u_arr()) / ia_vals[0]
            return acc
        if ia_code == IA_DET:
            return ia_vals[0]
        u = u_arr()
        j = 0
        while j < m_hyper - 1 and not u < ia_vals[j]:
            j += 1
        return -log(1.0 - u_arr()) / ia_vals[m_hyper + j]

    cap = 256
    pre = [0] * cap
    hist = [0.0] * cap
    times = [INF, INF, INF, INF]
    times[EV_ARRIVAL] = interarrival()
    if eta > 0:
        times[EV_NEGATIVE] = -log(1.0 - u_neg()) / eta
    if delta > 0:
        times[EV_DISASTER] = -log(1.0 - u_dis()) / delta

    t = 0.0
    n = 0
    arrivals = 0
    window = False
    # counters: batches, customers_in, served, neg_eff, neg_noop,
    #           dis_eff, dis_noop, removed_by_dis, n_start, n_end
    c_batches = c_in = c_srv = c_neg = c_neg0 = c_dis = c_dis0 = c_rdis = 0
    n_start = 0

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
                times[EV_SERVICE] = INF
            elif window:
                c_dis0 += 1
            times[EV_DISASTER] = t + -log(1.0 - u_dis()) / delta
        elif ev == EV_NEGATIVE:
            if n > 0:
                if window:
                    c_neg += 1
                n -= 1
                if n > 0:
                    times[EV_SERVICE] = t + -log(1.0 - u_srv()) / mu
                else:
                    times[EV_SERVICE] = INF
            elif window:
                c_neg0 += 1
            times[EV_NEGATIVE] = t + -log(1.0 - u_neg()) / eta
        elif ev == EV_SERVICE:
            if window:
                c_srv += 1
            n -= 1
            if n > 0:
                times[EV_SERVICE] = t + -log(1.0 - u_srv()) / mu
            else:
                times[EV_SERVICE] = INF
        else:
            if arrivals == n_warmup:
                window = True
                n_start = n
            if window:
                pre[n] += 1
            u = u_bat()
            kb = 0
            while kb < nb - 1 and not u < cum[kb]:
                kb += 1
            kb += 1
            if n == 0:
                times[EV_SERVICE] = t + -log(1.0 - u_srv()) / mu
            n += kb
            if window:
                c_batches += 1
                c_in += kb
            arrivals += 1
            if n >= cap:
                grow = max(2 * cap, n + 1) - cap
                pre.extend([0] * grow)
                hist.extend([0.0] * grow)
                cap += grow
            if arrivals == n_total:
                break
            times[EV_ARRIVAL] = t + interarrival()

    counters = np.array(
        [c_batches, c_in, c_srv, c_neg, c_neg0, c_dis, c_dis0, c_rdis, n_start, n],
        dtype=np.int64,
    )
    return np.array(pre, dtype=np.int64), np.array(hist, dtype=np.float64), counters
