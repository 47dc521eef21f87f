"""Pure-Python labeling kernels.

Same interface and bit-identical results as the compiled ``_kernels``
extension; used when the extension is not built or when
``EVDECODE_BACKEND=python`` is set.

Candidate generation order per predecessor label (fixed, both backends):
the direct move, then one charge detour per ``f_out`` in charger order
(the cheapest ``f_in``, smallest index on ties), then one depot detour
per ``f_out``.  For a fixed label and ``f_out`` every charge detour has
the same cargo and battery, so only the cheapest ``f_in`` can survive
pruning; generating just that one leaves the pruned front unchanged.
"""
from __future__ import annotations

import bisect
import math

INF = math.inf

DIRECT, CHARGE, DEPOT, SINGLE = 0, 1, 2, 3


def prune3(d, q, b):
    """Indices of the non-dominated (d, q, b) triples, in (d, q, b) order.

    Exact duplicates keep the earliest index only.
    """
    order = sorted(range(len(d)), key=lambda i: (d[i], q[i], b[i]))
    keep = []
    stair_q: list[float] = []
    stair_b: list[float] = []
    for i in order:
        qi, bi = q[i], b[i]
        pos = bisect.bisect_right(stair_q, qi)
        if pos and stair_b[pos - 1] <= bi:
            continue
        keep.append(i)
        end = pos
        while end < len(stair_q) and stair_b[end] >= bi:
            end += 1
        stair_q[pos:end] = [qi]
        stair_b[pos:end] = [bi]
    return keep


def prune2(d, b):
    order = sorted(range(len(d)), key=lambda i: (d[i], b[i]))
    keep = []
    best_b = INF
    for i in order:
        if b[i] < best_b:
            keep.append(i)
            best_b = b[i]
    return keep


class FPContext:
    """Per-instance data for joint split-and-charge labeling."""

    def __init__(self, dist, demand, chargers, fdist, cargo_cap, battery_cap, rate):
        self.D = [list(map(float, row)) for row in dist]
        self.dem = [float(x) for x in demand]
        self.ch = [int(c) for c in chargers]
        self.F = [list(map(float, row)) for row in fdist]
        self.Q = float(cargo_cap)
        self.B = float(battery_cap)
        self.h = float(rate)

    def extend(self, fd, fq, fb, prev, cur):
        D, F, ch, Q, B, h = self.D, self.F, self.ch, self.Q, self.B, self.h
        K = len(ch)
        Dp, dq = D[prev], self.dem[cur]
        leg = Dp[cur]
        out_leg = [D[c][cur] for c in ch]
        out_ok = [h * x <= B for x in out_leg]
        in_leg = [Dp[c] for c in ch]
        Fdep_in = [F[a][0] for a in range(K)]
        Fdep_out = F[0]
        cd, cq, cb, par, kind, fin, fout = [], [], [], [], [], [], []

        def emit(dd, qq, bb, j, k, a, o):
            cd.append(dd)
            cq.append(qq)
            cb.append(bb)
            par.append(j)
            kind.append(k)
            fin.append(a)
            fout.append(o)

        for j in range(len(fd)):
            d, q, b = fd[j], fq[j], fb[j]
            nq = q + dq
            nb = b + h * leg
            if nq <= Q and nb <= B:
                emit(d + leg, nq, nb, j, DIRECT, -1, -1)
            reach = [b + h * in_leg[a] <= B for a in range(K)]
            if nq <= Q:
                for o in range(K):
                    if not out_ok[o]:
                        continue
                    best, arg = INF, -1
                    for a in range(K):
                        if reach[a]:
                            f = F[a][o]
                            if f < INF:
                                v = d + in_leg[a] + f
                                if v < best:
                                    best, arg = v, a
                    if arg >= 0:
                        emit(best + out_leg[o], nq, h * out_leg[o], j, CHARGE, arg, o)
            if dq <= Q:
                best, arg = INF, -1
                for a in range(K):
                    if reach[a]:
                        f = Fdep_in[a]
                        if f < INF:
                            v = d + in_leg[a] + f
                            if v < best:
                                best, arg = v, a
                if arg >= 0:
                    for o in range(K):
                        if out_ok[o] and Fdep_out[o] < INF:
                            emit(best + Fdep_out[o] + out_leg[o], dq, h * out_leg[o], j, DEPOT, arg, o)
        return cd, cq, cb, par, kind, fin, fout

    def step(self, fd, fq, fb, prev, cur):
        """Extend a front to the next node and prune.

        Returns ``(d, q, b, parent, kind, f_in, f_out, generated)``.
        """
        cd, cq, cb, par, kind, fin, fout = self.extend(fd, fq, fb, prev, cur)
        keep = prune3(cd, cq, cb)
        return (
            [cd[i] for i in keep],
            [cq[i] for i in keep],
            [cb[i] for i in keep],
            [par[i] for i in keep],
            [kind[i] for i in keep],
            [fin[i] for i in keep],
            [fout[i] for i in keep],
            len(cd),
        )


class FRContext:
    """Per-instance data for fixed-route charging.

    ``single_stops`` lists charger positions usable as a single stop; when
    it is not None the context runs the one-station-per-gap restriction.
    """

    def __init__(self, dist, chargers, fdist, battery_cap, rate, single_stops=None):
        self.D = [list(map(float, row)) for row in dist]
        self.ch = [int(c) for c in chargers]
        self.F = [list(map(float, row)) for row in fdist]
        self.B = float(battery_cap)
        self.h = float(rate)
        self.single = None if single_stops is None else [int(s) for s in single_stops]

    def extend(self, fd, fb, prev, cur):
        D, F, ch, B, h = self.D, self.F, self.ch, self.B, self.h
        K = len(ch)
        Dp = D[prev]
        leg = Dp[cur]
        out_leg = [D[c][cur] for c in ch]
        out_ok = [h * x <= B for x in out_leg]
        in_leg = [Dp[c] for c in ch]
        cd, cb, par, kind, fin, fout = [], [], [], [], [], []
        for j in range(len(fd)):
            d, b = fd[j], fb[j]
            nb = b + h * leg
            if nb <= B:
                cd.append(d + leg)
                cb.append(nb)
                par.append(j)
                kind.append(DIRECT)
                fin.append(-1)
                fout.append(-1)
            if self.single is not None:
                for s in self.single:
                    if out_ok[s] and b + h * in_leg[s] <= B:
                        cd.append(d + in_leg[s] + out_leg[s])
                        cb.append(h * out_leg[s])
                        par.append(j)
                        kind.append(SINGLE)
                        fin.append(s)
                        fout.append(s)
                continue
            reach = [b + h * in_leg[a] <= B for a in range(K)]
            for o in range(K):
                if not out_ok[o]:
                    continue
                best, arg = INF, -1
                for a in range(K):
                    if reach[a]:
                        f = F[a][o]
                        if f < INF:
                            v = d + in_leg[a] + f
                            if v < best:
                                best, arg = v, a
                if arg >= 0:
                    cd.append(best + out_leg[o])
                    cb.append(h * out_leg[o])
                    par.append(j)
                    kind.append(CHARGE)
                    fin.append(arg)
                    fout.append(o)
        return cd, cb, par, kind, fin, fout

    def step(self, fd, fb, prev, cur, reset):
        """Extend and prune; ``reset`` zeroes the battery on arrival (depot)."""
        cd, cb, par, kind, fin, fout = self.extend(fd, fb, prev, cur)
        if reset:
            cb = [0.0] * len(cb)
        keep = prune2(cd, cb)
        return (
            [cd[i] for i in keep],
            [cb[i] for i in keep],
            [par[i] for i in keep],
            [kind[i] for i in keep],
            [fin[i] for i in keep],
            [fout[i] for i in keep],
            len(cd),
        )
