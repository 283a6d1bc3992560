"""Compiled inner loops shared by the GA and the evolutionary solver.

Solutions are held as two int64 vectors: ``nodes[k]`` (assigned node) and
``bw[k]`` (bandwidth in MHz). Every function here is usable from Python as
well as from other compiled functions; randomness always comes from an
explicit ``numpy.random.Generator`` so runs are reproducible per seed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from edgesched.problem import CAPACITY_EPS

KIND_TOTAL = 0
KIND_MAKESPAN = 1


@njit(cache=True)
def tx_time(size, signal, noise, b):
    # Same operation order as channel.transmission_time, so results agree bitwise.
    s = signal / (noise * b)
    return size / (b * math.log2(1.0 + s))


@njit(cache=True)
def delays(nodes, bw, size, signal, noise, processing):
    """Return (sum_total, max_total) in request-id order."""
    total = 0.0
    worst = 0.0
    for k in range(nodes.shape[0]):
        t = tx_time(size[k], signal[k, nodes[k]], noise, bw[k]) + processing[k]
        total += t
        if k == 0 or t > worst:
            worst = t
    return total, worst


@njit(cache=True)
def violations(nodes, bw, demand, bcap, ccap):
    """Return (equality violation, inequality violation) of the internal constraints.

    Equality: per occupied node, |sum of bandwidth - capacity|.
    Inequality: per node, compute demand in excess of capacity.
    """
    n_nodes = bcap.shape[0]
    bw_sum = np.zeros(n_nodes, dtype=np.int64)
    count = np.zeros(n_nodes, dtype=np.int64)
    cpu = np.zeros(n_nodes, dtype=np.float64)
    for k in range(nodes.shape[0]):
        v = nodes[k]
        bw_sum[v] += bw[k]
        count[v] += 1
        cpu[v] += demand[k]
    eq = 0.0
    ineq = 0.0
    for v in range(n_nodes):
        if count[v] > 0:
            eq += abs(bw_sum[v] - bcap[v])
        excess = cpu[v] - ccap[v]
        if excess > CAPACITY_EPS:
            ineq += excess
    return eq, ineq


@njit(cache=True)
def score(nodes, bw, size, demand, signal, noise, processing, bcap, ccap, kind, penalty):
    """Return (penalized fitness, raw objective, feasible flag)."""
    total, worst = delays(nodes, bw, size, signal, noise, processing)
    obj = total if kind == KIND_TOTAL else worst
    eq, ineq = violations(nodes, bw, demand, bcap, ccap)
    feasible = eq == 0.0 and ineq == 0.0
    return obj + penalty * (eq + ineq), obj, feasible


@njit(cache=True)
def random_composition(total, parts, rng, out):
    """Fill ``out[:parts]`` with a uniformly random composition of ``total`` into positive parts.

    Falls back to all ones when ``parts > total``.
    """
    if parts <= 0:
        return
    if parts > total:
        for i in range(parts):
            out[i] = 1
        return
    # choose parts-1 distinct cut points from 1..total-1 by partial Fisher-Yates
    pool = np.arange(1, total)
    for i in range(parts - 1):
        j = i + rng.integers(0, total - 1 - i)
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    cuts = np.sort(pool[: parts - 1])
    prev = 0
    for i in range(parts - 1):
        out[i] = cuts[i] - prev
        prev = cuts[i]
    out[parts - 1] = total - prev


@njit(cache=True)
def repair_assignment(nodes, demand, bcap, ccap, rng):
    """Move random requests off overloaded nodes onto nodes where they fit.

    A node is overloaded when its compute demand exceeds capacity or it holds
    more requests than it has MHz of bandwidth. Returns True when no node is
    left overloaded.
    """
    n_nodes = bcap.shape[0]
    n_req = nodes.shape[0]
    count = np.zeros(n_nodes, dtype=np.int64)
    cpu = np.zeros(n_nodes, dtype=np.float64)
    for k in range(n_req):
        count[nodes[k]] += 1
        cpu[nodes[k]] += demand[k]
    members = np.empty(n_req, dtype=np.int64)
    targets = np.empty(n_nodes, dtype=np.int64)
    ok = True
    for v in range(n_nodes):
        failures = 0
        while (cpu[v] - ccap[v] > CAPACITY_EPS or count[v] > bcap[v]) and failures < n_req:
            m = 0
            for k in range(n_req):
                if nodes[k] == v:
                    members[m] = k
                    m += 1
            k = members[rng.integers(0, m)]
            n_t = 0
            for u in range(n_nodes):
                if u != v and count[u] < bcap[u] and cpu[u] + demand[k] - ccap[u] <= CAPACITY_EPS:
                    targets[n_t] = u
                    n_t += 1
            if n_t == 0:
                failures += 1
                continue
            u = targets[rng.integers(0, n_t)]
            nodes[k] = u
            count[v] -= 1
            cpu[v] -= demand[k]
            count[u] += 1
            cpu[u] += demand[k]
        if cpu[v] - ccap[v] > CAPACITY_EPS or count[v] > bcap[v]:
            ok = False
    return ok


@njit(cache=True)
def repair_bandwidth(nodes, bw, bcap, rng):
    """Step random genes by +-1 MHz until each occupied node uses exactly its capacity.

    Genes never drop below 1 MHz. A node holding more requests than it has
    MHz cannot be repaired: its genes are set to 1 and False is returned.
    """
    n_nodes = bcap.shape[0]
    n_req = nodes.shape[0]
    members = np.empty(n_req, dtype=np.int64)
    ok = True
    for v in range(n_nodes):
        m = 0
        total = 0
        for k in range(n_req):
            if nodes[k] == v:
                members[m] = k
                m += 1
                total += bw[k]
        if m == 0:
            continue
        if m > bcap[v]:
            for i in range(m):
                bw[members[i]] = 1
            ok = False
            continue
        delta = total - bcap[v]
        if delta > 0:
            # only genes above the 1 MHz floor may give bandwidth back
            n_c = 0
            for i in range(m):
                if bw[members[i]] > 1:
                    members[n_c] = members[i]
                    n_c += 1
            while delta > 0:
                p = rng.integers(0, n_c)
                k = members[p]
                bw[k] -= 1
                delta -= 1
                if bw[k] == 1:
                    n_c -= 1
                    members[p] = members[n_c]
        while delta < 0:
            k = members[rng.integers(0, m)]
            bw[k] += 1
            delta += 1
    return ok


@njit(cache=True)
def random_individual(nodes, bw, demand, bcap, ccap, rng):
    """Uniform random assignment followed by random per-node bandwidth compositions."""
    n_nodes = bcap.shape[0]
    n_req = nodes.shape[0]
    for k in range(n_req):
        nodes[k] = rng.integers(0, n_nodes)
    repair_assignment(nodes, demand, bcap, ccap, rng)
    members = np.empty(n_req, dtype=np.int64)
    parts = np.empty(n_req, dtype=np.int64)
    for v in range(n_nodes):
        m = 0
        for k in range(n_req):
            if nodes[k] == v:
                members[m] = k
                m += 1
        random_composition(bcap[v], m, rng, parts)
        for i in range(m):
            bw[members[i]] = parts[i]
    return repair_bandwidth(nodes, bw, bcap, rng)


@njit(cache=True)
def rotate_groups(nodes, bw, n_nodes):
    """Left-rotate the bandwidth genes of each node group by one position."""
    n_req = nodes.shape[0]
    for v in range(n_nodes):
        first = -1
        prev = -1
        saved = 0
        for k in range(n_req):
            if nodes[k] == v:
                if first < 0:
                    first = k
                    saved = bw[k]
                else:
                    bw[prev] = bw[k]
                prev = k
        if first >= 0:
            bw[prev] = saved


@njit(cache=True)
def balance_groups(nodes, bw, n_nodes):
    """Per node group: take 1 MHz from the largest gene and give it to the smallest."""
    n_req = nodes.shape[0]
    for v in range(n_nodes):
        hi = -1
        lo = -1
        for k in range(n_req):
            if nodes[k] == v:
                if hi < 0 or bw[k] > bw[hi]:
                    hi = k
                if lo < 0 or bw[k] < bw[lo]:
                    lo = k
        if hi >= 0 and bw[hi] > bw[lo]:
            bw[hi] -= 1
            bw[lo] += 1


@njit(cache=True)
def mutate_inplace(nodes, bw, mu, balance_below, rotate_above, flip_prob, demand, bcap, ccap, rng):
    n_nodes = bcap.shape[0]
    if mu >= rotate_above:
        rotate_groups(nodes, bw, n_nodes)
    elif mu <= balance_below:
        balance_groups(nodes, bw, n_nodes)
    if n_nodes > 1 and flip_prob > 0.0 and rng.random() < flip_prob:
        k = rng.integers(0, nodes.shape[0])
        u = rng.integers(0, n_nodes - 1)
        if u >= nodes[k]:
            u += 1
        nodes[k] = u
        repair_assignment(nodes, demand, bcap, ccap, rng)
        repair_bandwidth(nodes, bw, bcap, rng)


@njit(cache=True)
def ga_run(size, demand, signal, noise, processing, bcap, ccap, kind, penalty,
           pop_size, generations, balance_below, rotate_above, flip_prob, rng):
    n_req = size.shape[0]
    n_pop = pop_size
    pop_nodes = np.empty((2 * n_pop, n_req), dtype=np.int64)
    pop_bw = np.empty((2 * n_pop, n_req), dtype=np.int64)
    fit = np.empty(2 * n_pop, dtype=np.float64)
    best_nodes = np.zeros(n_req, dtype=np.int64)
    best_bw = np.ones(n_req, dtype=np.int64)
    best_obj = np.inf
    curve_evals = np.empty(generations + 1, dtype=np.int64)
    curve_best = np.empty(generations + 1, dtype=np.float64)
    evals = 0

    for i in range(n_pop):
        random_individual(pop_nodes[i], pop_bw[i], demand, bcap, ccap, rng)
        pen, obj, feas = score(pop_nodes[i], pop_bw[i], size, demand, signal, noise,
                               processing, bcap, ccap, kind, penalty)
        fit[i] = pen
        evals += 1
        if feas and obj < best_obj:
            best_obj = obj
            best_nodes[:] = pop_nodes[i]
            best_bw[:] = pop_bw[i]
    curve_evals[0] = evals
    curve_best[0] = best_obj

    for g in range(generations):
        for c in range(n_pop):
            child = n_pop + c
            father = rng.integers(0, n_pop)
            mother = rng.integers(0, n_pop)
            splice = rng.integers(1, n_req) if n_req > 1 else n_req
            for k in range(n_req):
                src = father if k < splice else mother
                pop_nodes[child, k] = pop_nodes[src, k]
                pop_bw[child, k] = pop_bw[src, k]
            repair_assignment(pop_nodes[child], demand, bcap, ccap, rng)
            repair_bandwidth(pop_nodes[child], pop_bw[child], bcap, rng)
            mu = rng.random()
            mutate_inplace(pop_nodes[child], pop_bw[child], mu, balance_below, rotate_above,
                           flip_prob, demand, bcap, ccap, rng)
            pen, obj, feas = score(pop_nodes[child], pop_bw[child], size, demand, signal,
                                   noise, processing, bcap, ccap, kind, penalty)
            fit[child] = pen
            evals += 1
            if feas and obj < best_obj:
                best_obj = obj
                best_nodes[:] = pop_nodes[child]
                best_bw[:] = pop_bw[child]
        # elitist truncation over parents and children; stable so parents win ties
        order = np.argsort(fit, kind="mergesort")[:n_pop]
        keep_nodes = pop_nodes[order].copy()
        keep_bw = pop_bw[order].copy()
        keep_fit = fit[order].copy()
        pop_nodes[:n_pop] = keep_nodes
        pop_bw[:n_pop] = keep_bw
        fit[:n_pop] = keep_fit
        curve_evals[g + 1] = evals
        curve_best[g + 1] = best_obj

    return best_nodes, best_bw, best_obj, pop_nodes[0].copy(), pop_bw[0].copy(), evals, curve_evals, curve_best


@njit(cache=True)
def _insert_sorted(arch_nodes, arch_bw, arch_fit, cand_nodes, cand_bw, cand_fit):
    """Replace the worst archive entry with the candidate and restore ascending order."""
    pos = arch_fit.shape[0] - 1
    while pos > 0 and arch_fit[pos - 1] > cand_fit:
        arch_fit[pos] = arch_fit[pos - 1]
        arch_nodes[pos] = arch_nodes[pos - 1]
        arch_bw[pos] = arch_bw[pos - 1]
        pos -= 1
    arch_fit[pos] = cand_fit
    arch_nodes[pos] = cand_nodes
    arch_bw[pos] = cand_bw


@njit(cache=True)
def evo_run(size, demand, signal, noise, processing, bcap, ccap, kind, penalty,
            budget, archive_size, flip_prob, record_every, rng):
    n_req = size.shape[0]
    n_nodes = bcap.shape[0]
    cap = archive_size
    arch_nodes = np.empty((cap, n_req), dtype=np.int64)
    arch_bw = np.empty((cap, n_req), dtype=np.int64)
    arch_fit = np.empty(cap, dtype=np.float64)
    best_nodes = np.zeros(n_req, dtype=np.int64)
    best_bw = np.ones(n_req, dtype=np.int64)
    best_obj = np.inf
    n_rec = (budget + record_every - 1) // record_every + 1
    curve_evals = np.empty(n_rec, dtype=np.int64)
    curve_best = np.empty(n_rec, dtype=np.float64)
    rec = 0

    cand_nodes = np.empty(n_req, dtype=np.int64)
    cand_bw = np.empty(n_req, dtype=np.int64)
    members = np.empty(n_req, dtype=np.int64)
    for i in range(cap):
        random_individual(cand_nodes, cand_bw, demand, bcap, ccap, rng)
        pen, obj, feas = score(cand_nodes, cand_bw, size, demand, signal, noise,
                               processing, bcap, ccap, kind, penalty)
        if feas and obj < best_obj:
            best_obj = obj
            best_nodes[:] = cand_nodes
            best_bw[:] = cand_bw
        if i == 0:
            arch_fit[0] = pen
            arch_nodes[0] = cand_nodes
            arch_bw[0] = cand_bw
        else:
            # grow the sorted prefix of length i by one
            pos = i
            while pos > 0 and arch_fit[pos - 1] > pen:
                arch_fit[pos] = arch_fit[pos - 1]
                arch_nodes[pos] = arch_nodes[pos - 1]
                arch_bw[pos] = arch_bw[pos - 1]
                pos -= 1
            arch_fit[pos] = pen
            arch_nodes[pos] = cand_nodes
            arch_bw[pos] = cand_bw
    evals = cap
    curve_evals[rec] = evals
    curve_best[rec] = best_obj
    rec += 1

    weight_total = cap * (cap + 1) // 2
    while evals < budget:
        progress = evals / budget
        # rank-weighted parent: rank r has weight cap - r
        u = rng.integers(0, weight_total)
        r = 0
        acc = cap
        while u >= acc:
            r += 1
            acc += cap - r
        cand_nodes[:] = arch_nodes[r]
        cand_bw[:] = arch_bw[r]
        if n_nodes > 1 and rng.random() < flip_prob:
            k = rng.integers(0, n_req)
            j = rng.integers(0, n_req)
            if rng.random() < 0.5 and cand_nodes[j] != cand_nodes[k]:
                # exchange two requests between their nodes, slots included
                tmp = cand_nodes[k]
                cand_nodes[k] = cand_nodes[j]
                cand_nodes[j] = tmp
            else:
                v = rng.integers(0, n_nodes - 1)
                if v >= cand_nodes[k]:
                    v += 1
                m = 1
                for i in range(n_req):
                    if cand_nodes[i] == v:
                        m += 1
                cand_nodes[k] = v
                # arrive with an average slice of the new node
                cand_bw[k] = max(1, bcap[v] // m)
        moves = 1 + rng.integers(0, 2)
        for _ in range(moves):
            # move a step of bandwidth from one request to another on the same node
            k = rng.integers(0, n_req)
            v = cand_nodes[k]
            m = 0
            for j in range(n_req):
                if cand_nodes[j] == v and j != k:
                    members[m] = j
                    m += 1
            if m == 0:
                continue
            j = members[rng.integers(0, m)]
            full = bcap[v] / 4.0
            step = int(round(full * (1.0 - progress) + progress))
            if step < 1:
                step = 1
            delta = 1 + rng.integers(0, step)
            if delta > cand_bw[j] - 1:
                delta = cand_bw[j] - 1
            cand_bw[k] += delta
            cand_bw[j] -= delta
        repair_bandwidth(cand_nodes, cand_bw, bcap, rng)
        pen, obj, feas = score(cand_nodes, cand_bw, size, demand, signal, noise,
                               processing, bcap, ccap, kind, penalty)
        evals += 1
        if feas and obj < best_obj:
            best_obj = obj
            best_nodes[:] = cand_nodes
            best_bw[:] = cand_bw
        if pen < arch_fit[cap - 1]:
            duplicate = False
            for i in range(cap):
                if arch_fit[i] == pen:
                    duplicate = True
                    break
            if not duplicate:
                _insert_sorted(arch_nodes, arch_bw, arch_fit, cand_nodes, cand_bw, pen)
        if evals % record_every == 0 or evals == budget:
            curve_evals[rec] = evals
            curve_best[rec] = best_obj
            rec += 1

    return (best_nodes, best_bw, best_obj, evals, curve_evals[:rec].copy(), curve_best[:rec].copy(),
            arch_nodes, arch_bw, arch_fit)
