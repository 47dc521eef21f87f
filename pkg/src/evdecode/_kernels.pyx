# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled labeling kernels.

Mirrors ``_pykernels`` operation for operation so both backends produce
bit-identical fronts; see that module for the candidate order.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    DIRECT = 0
    CHARGE = 1
    DEPOT = 2
    SINGLE = 3


cdef Py_ssize_t _bisect_right(double* a, Py_ssize_t n, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef Py_ssize_t _prune3(const double[::1] d, const double[::1] q, const double[::1] b,
                        const cnp.intp_t[::1] order, cnp.intp_t* keep) noexcept nogil:
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t nkeep = 0, size = 0, t, i, pos, end, k, removed
    cdef double qi, bi
    cdef double* sq = <double*> malloc((n + 1) * sizeof(double))
    cdef double* sb = <double*> malloc((n + 1) * sizeof(double))
    for t in range(n):
        i = order[t]
        qi = q[i]
        bi = b[i]
        pos = _bisect_right(sq, size, qi)
        if pos > 0 and sb[pos - 1] <= bi:
            continue
        keep[nkeep] = i
        nkeep += 1
        end = pos
        while end < size and sb[end] >= bi:
            end += 1
        removed = end - pos
        if removed == 0:
            k = size
            while k > pos:
                sq[k] = sq[k - 1]
                sb[k] = sb[k - 1]
                k -= 1
            size += 1
        elif removed > 1:
            k = end
            while k < size:
                sq[k - removed + 1] = sq[k]
                sb[k - removed + 1] = sb[k]
                k += 1
            size -= removed - 1
        sq[pos] = qi
        sb[pos] = bi
    free(sq)
    free(sb)
    return nkeep


def prune3(d, q, b):
    """Indices of the non-dominated (d, q, b) triples, in (d, q, b) order."""
    cdef cnp.ndarray[double, ndim=1] ad = np.ascontiguousarray(d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] aq = np.ascontiguousarray(q, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] ab = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.lexsort((ab, aq, ad)).astype(np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] keep = np.empty(order.shape[0], dtype=np.intp)
    cdef Py_ssize_t nkeep = _prune3(ad, aq, ab, order, <cnp.intp_t*> keep.data)
    return keep[:nkeep]


def prune2(d, b):
    cdef cnp.ndarray[double, ndim=1] ad = np.ascontiguousarray(d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] ab = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.lexsort((ab, ad)).astype(np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] keep = np.empty(order.shape[0], dtype=np.intp)
    cdef Py_ssize_t t, i, nkeep = 0
    cdef double best = INFINITY
    for t in range(order.shape[0]):
        i = order[t]
        if ab[i] < best:
            keep[nkeep] = i
            nkeep += 1
            best = ab[i]
    return keep[:nkeep]


cdef class FPContext:
    """Per-instance data for joint split-and-charge labeling."""
    cdef double[:, ::1] D
    cdef double[::1] dem
    cdef cnp.intp_t[::1] ch
    cdef double[:, ::1] F
    cdef double Q, B, h
    cdef Py_ssize_t K

    def __init__(self, dist, demand, chargers, fdist, cargo_cap, battery_cap, rate):
        self.D = np.ascontiguousarray(dist, dtype=np.float64).copy()
        self.dem = np.ascontiguousarray(demand, dtype=np.float64).copy()
        self.ch = np.ascontiguousarray(chargers, dtype=np.intp).copy()
        self.F = np.ascontiguousarray(fdist, dtype=np.float64).copy()
        self.Q = cargo_cap
        self.B = battery_cap
        self.h = rate
        self.K = self.ch.shape[0]

    def extend(self, fd, fq, fb, Py_ssize_t prev, Py_ssize_t cur):
        cdef const double[::1] vd = np.ascontiguousarray(fd, dtype=np.float64)
        cdef const double[::1] vq = np.ascontiguousarray(fq, dtype=np.float64)
        cdef const double[::1] vb = np.ascontiguousarray(fb, dtype=np.float64)
        cdef Py_ssize_t nf = vd.shape[0], K = self.K
        cdef Py_ssize_t cap = nf * (1 + 2 * K)
        cd_ = np.empty(cap, dtype=np.float64)
        cq_ = np.empty(cap, dtype=np.float64)
        cb_ = np.empty(cap, dtype=np.float64)
        par_ = np.empty(cap, dtype=np.intp)
        kind_ = np.empty(cap, dtype=np.int8)
        fin_ = np.empty(cap, dtype=np.intp)
        fout_ = np.empty(cap, dtype=np.intp)
        cdef double[::1] cd = cd_, cq = cq_, cb = cb_
        cdef cnp.intp_t[::1] par = par_, fin = fin_, fout = fout_
        cdef signed char[::1] kind = kind_
        cdef Py_ssize_t nc
        with nogil:
            nc = self._extend(vd, vq, vb, prev, cur, cd, cq, cb, par, kind, fin, fout)
        return cd_[:nc], cq_[:nc], cb_[:nc], par_[:nc], kind_[:nc], fin_[:nc], fout_[:nc]

    cdef Py_ssize_t _extend(self, const double[::1] vd, const double[::1] vq, const double[::1] vb,
                            Py_ssize_t prev, Py_ssize_t cur,
                            double[::1] cd, double[::1] cq, double[::1] cb,
                            cnp.intp_t[::1] par, signed char[::1] kind,
                            cnp.intp_t[::1] fin, cnp.intp_t[::1] fout) noexcept nogil:
        cdef Py_ssize_t K = self.K, nf = vd.shape[0]
        cdef double Q = self.Q, B = self.B, h = self.h
        cdef double leg = self.D[prev, cur], dq = self.dem[cur]
        cdef double* out_leg = <double*> malloc(K * sizeof(double))
        cdef double* in_leg = <double*> malloc(K * sizeof(double))
        cdef char* out_ok = <char*> malloc(K * sizeof(char))
        cdef char* reach = <char*> malloc(K * sizeof(char))
        cdef Py_ssize_t a, o, j, arg, nc = 0
        cdef double d, q, b, nq, nb, best, v, f
        for a in range(K):
            out_leg[a] = self.D[self.ch[a], cur]
            out_ok[a] = h * out_leg[a] <= B
            in_leg[a] = self.D[prev, self.ch[a]]
        for j in range(nf):
            d = vd[j]
            q = vq[j]
            b = vb[j]
            nq = q + dq
            nb = b + h * leg
            if nq <= Q and nb <= B:
                cd[nc] = d + leg; cq[nc] = nq; cb[nc] = nb
                par[nc] = j; kind[nc] = DIRECT; fin[nc] = -1; fout[nc] = -1
                nc += 1
            for a in range(K):
                reach[a] = b + h * in_leg[a] <= B
            if nq <= Q:
                for o in range(K):
                    if not out_ok[o]:
                        continue
                    best = INFINITY
                    arg = -1
                    for a in range(K):
                        if reach[a]:
                            f = self.F[a, o]
                            if f < INFINITY:
                                v = d + in_leg[a] + f
                                if v < best:
                                    best = v
                                    arg = a
                    if arg >= 0:
                        cd[nc] = best + out_leg[o]; cq[nc] = nq; cb[nc] = h * out_leg[o]
                        par[nc] = j; kind[nc] = CHARGE; fin[nc] = arg; fout[nc] = o
                        nc += 1
            if dq <= Q:
                best = INFINITY
                arg = -1
                for a in range(K):
                    if reach[a]:
                        f = self.F[a, 0]
                        if f < INFINITY:
                            v = d + in_leg[a] + f
                            if v < best:
                                best = v
                                arg = a
                if arg >= 0:
                    for o in range(K):
                        if out_ok[o] and self.F[0, o] < INFINITY:
                            cd[nc] = best + self.F[0, o] + out_leg[o]; cq[nc] = dq; cb[nc] = h * out_leg[o]
                            par[nc] = j; kind[nc] = DEPOT; fin[nc] = arg; fout[nc] = o
                            nc += 1
        free(out_leg)
        free(in_leg)
        free(out_ok)
        free(reach)
        return nc

    def step(self, fd, fq, fb, Py_ssize_t prev, Py_ssize_t cur):
        """Extend a front to the next node and prune.

        Returns ``(d, q, b, parent, kind, f_in, f_out, generated)``.
        """
        cd, cq, cb, par, kind, fin, fout = self.extend(fd, fq, fb, prev, cur)
        keep = prune3(cd, cq, cb)
        return cd[keep], cq[keep], cb[keep], par[keep], kind[keep], fin[keep], fout[keep], cd.shape[0]


cdef class FRContext:
    """Per-instance data for fixed-route charging (optionally single-stop)."""
    cdef double[:, ::1] D
    cdef cnp.intp_t[::1] ch
    cdef double[:, ::1] F
    cdef double B, h
    cdef Py_ssize_t K
    cdef bint is_single
    cdef cnp.intp_t[::1] single

    def __init__(self, dist, chargers, fdist, battery_cap, rate, single_stops=None):
        self.D = np.ascontiguousarray(dist, dtype=np.float64).copy()
        self.ch = np.ascontiguousarray(chargers, dtype=np.intp).copy()
        self.F = np.ascontiguousarray(fdist, dtype=np.float64).copy()
        self.B = battery_cap
        self.h = rate
        self.K = self.ch.shape[0]
        self.is_single = single_stops is not None
        self.single = np.ascontiguousarray([] if single_stops is None else single_stops, dtype=np.intp)

    def extend(self, fd, fb, Py_ssize_t prev, Py_ssize_t cur):
        cdef const double[::1] vd = np.ascontiguousarray(fd, dtype=np.float64)
        cdef const double[::1] vb = np.ascontiguousarray(fb, dtype=np.float64)
        cdef Py_ssize_t nf = vd.shape[0], K = self.K
        cdef Py_ssize_t cap = nf * (1 + K)
        cd_ = np.empty(cap, dtype=np.float64)
        cb_ = np.empty(cap, dtype=np.float64)
        par_ = np.empty(cap, dtype=np.intp)
        kind_ = np.empty(cap, dtype=np.int8)
        fin_ = np.empty(cap, dtype=np.intp)
        fout_ = np.empty(cap, dtype=np.intp)
        cdef double[::1] cd = cd_, cb = cb_
        cdef cnp.intp_t[::1] par = par_, fin = fin_, fout = fout_
        cdef signed char[::1] kind = kind_
        cdef Py_ssize_t nc
        with nogil:
            nc = self._extend(vd, vb, prev, cur, cd, cb, par, kind, fin, fout)
        return cd_[:nc], cb_[:nc], par_[:nc], kind_[:nc], fin_[:nc], fout_[:nc]

    cdef Py_ssize_t _extend(self, const double[::1] vd, const double[::1] vb,
                            Py_ssize_t prev, Py_ssize_t cur,
                            double[::1] cd, double[::1] cb, cnp.intp_t[::1] par,
                            signed char[::1] kind, cnp.intp_t[::1] fin,
                            cnp.intp_t[::1] fout) noexcept nogil:
        cdef Py_ssize_t K = self.K, nf = vd.shape[0], ns = self.single.shape[0]
        cdef double B = self.B, h = self.h
        cdef double leg = self.D[prev, cur]
        cdef double* out_leg = <double*> malloc(K * sizeof(double))
        cdef double* in_leg = <double*> malloc(K * sizeof(double))
        cdef char* out_ok = <char*> malloc(K * sizeof(char))
        cdef char* reach = <char*> malloc(K * sizeof(char))
        cdef Py_ssize_t a, o, j, t, s, arg, nc = 0
        cdef double d, b, nb, best, v, f
        for a in range(K):
            out_leg[a] = self.D[self.ch[a], cur]
            out_ok[a] = h * out_leg[a] <= B
            in_leg[a] = self.D[prev, self.ch[a]]
        for j in range(nf):
            d = vd[j]
            b = vb[j]
            nb = b + h * leg
            if nb <= B:
                cd[nc] = d + leg; cb[nc] = nb
                par[nc] = j; kind[nc] = DIRECT; fin[nc] = -1; fout[nc] = -1
                nc += 1
            if self.is_single:
                for t in range(ns):
                    s = self.single[t]
                    if out_ok[s] and b + h * in_leg[s] <= B:
                        cd[nc] = d + in_leg[s] + out_leg[s]; cb[nc] = h * out_leg[s]
                        par[nc] = j; kind[nc] = SINGLE; fin[nc] = s; fout[nc] = s
                        nc += 1
                continue
            for a in range(K):
                reach[a] = b + h * in_leg[a] <= B
            for o in range(K):
                if not out_ok[o]:
                    continue
                best = INFINITY
                arg = -1
                for a in range(K):
                    if reach[a]:
                        f = self.F[a, o]
                        if f < INFINITY:
                            v = d + in_leg[a] + f
                            if v < best:
                                best = v
                                arg = a
                if arg >= 0:
                    cd[nc] = best + out_leg[o]; cb[nc] = h * out_leg[o]
                    par[nc] = j; kind[nc] = CHARGE; fin[nc] = arg; fout[nc] = o
                    nc += 1
        free(out_leg)
        free(in_leg)
        free(out_ok)
        free(reach)
        return nc

    def step(self, fd, fb, Py_ssize_t prev, Py_ssize_t cur, bint reset):
        """Extend and prune; ``reset`` zeroes the battery on arrival (depot)."""
        cd, cb, par, kind, fin, fout = self.extend(fd, fb, prev, cur)
        if reset:
            cb = np.zeros_like(cb)
        keep = prune2(cd, cb)
        return cd[keep], cb[keep], par[keep], kind[keep], fin[keep], fout[keep], cd.shape[0]
