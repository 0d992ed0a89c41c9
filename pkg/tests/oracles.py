"""Independent reference computations used to check the package.

Everything here is written with explicit loops or dense matrices and shares no
code path with ``lightcone`` beyond plain numpy.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.linalg import expm


def kron_loops(a, b):
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    out = np.zeros(a.size * b.size, dtype=complex)
    for i in range(a.size):
        for j in range(b.size):
            out[i * b.size + j] = a[i] * b[j]
    return out


def kron_chain(*ops):
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op, site, dims):
    return kron_chain(*[op if k == site else np.eye(d) for k, d in enumerate(dims)])


def multi_index(flat, dims):
    idx = []
    for d in reversed(dims):
        idx.append(flat % d)
        flat //= d
    return tuple(reversed(idx))


def partial_trace_loops(psi, dims, keep):
    """Index-summation partial trace of |psi><psi|; kept sites in increasing order."""
    keep = sorted(keep)
    kd = [dims[k] for k in keep]
    size = math.prod(kd)
    rho = np.zeros((size, size), dtype=complex)
    psi = np.asarray(psi, dtype=complex) / np.linalg.norm(psi)
    for a in range(len(psi)):
        ia = multi_index(a, dims)
        for b in range(len(psi)):
            ib = multi_index(b, dims)
            if any(ia[s] != ib[s] for s in range(len(dims)) if s not in keep):
                continue
            r = c = 0
            for s in keep:
                r = r * dims[s] + ia[s]
                c = c * dims[s] + ib[s]
            rho[r, c] += psi[a] * np.conj(psi[b])
    return rho


def dense_projector(vec, site, dims):
    v = np.asarray(vec, dtype=complex)
    return embed(np.outer(v, v.conj()), site, dims)


def eig_trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def singlet_earth_state(remote_vector):
    """Earth residual when the Callisto half of (|01>-|10>)/sqrt2 is found in ``remote_vector``."""
    b0, b1 = np.conj(remote_vector)
    v = np.array([b1, -b0], dtype=complex)
    return v / np.linalg.norm(v)


def golden_frame_marginal(remote_basis, g=math.pi / 4, duration=0.5):
    """Closed-form X-detector marginal in frame mode for the singlet pair.

    Before the Callisto measurement both halves see the same diagonal field and
    the singlet is invariant under U x U. Afterwards the Earth qubit is pure with
    population p = |<0|phi>|^2, which the sigma_z field conserves, so it picks
    up the relative phase 2 g p * duration.
    """
    if remote_basis is None:
        return np.array([0.5, 0.5])
    plus = 0.0
    for vec in remote_basis:
        phi = singlet_earth_state(vec)
        p = abs(phi[0]) ** 2
        phi = np.array([phi[0] * np.exp(-1j * g * p * duration), phi[1] * np.exp(1j * g * p * duration)])
        plus += 0.5 * abs(phi[0] + phi[1]) ** 2 / 2
    return np.array([plus, 1 - plus])


def nonlinear_branches(
    dims, positions, psi0, events, g, reference, mode, dt, start, n_steps
):
    """Brute-force branch evolution with dense operators and scipy's expm.

    ``events`` is a list of (grid index, particle, basis vectors, forced or None).
    The local state is recomputed from scratch at every step by replaying the
    full history with only in-cone projectors. Returns {outcome tuple: prob}
    together with the final normalized states.
    """
    sz = np.diag([1.0, -1.0]).astype(complex)
    n = len(dims)
    at = {k: (k, p, b, f) for k, p, b, f in events}

    def in_cone(i, k, ev):
        kk, p = ev[0], ev[1]
        dtime = (k - kk) * dt
        dist = math.dist(positions[i], positions[p])
        return dtime >= 0 and dtime * dtime - dist * dist > -1e-12

    branches = [((), 1.0, np.asarray(psi0, dtype=complex), [])]
    for k in range(n_steps + 1):
        if k in at:
            kk, p, basis, forced = at[k]
            nxt = []
            for outs, prob, psi, hist in branches:
                choices = [forced] if forced is not None else range(len(basis))
                for j in choices:
                    proj = dense_projector(basis[j], p, dims)
                    post = proj @ psi
                    pj = float(np.vdot(post, post).real)
                    if pj < 1e-12:
                        if forced is not None:
                            raise ArithmeticError("forced outcome impossible")
                        continue
                    w = prob if forced is not None else prob * pj
                    nxt.append((outs + (j,), w, post / math.sqrt(pj), hist + [("P", at[k], j)]))
            branches = nxt
        if k == n_steps:
            break
        stepped = []
        for outs, prob, psi, hist in branches:
            us = []
            for i in range(n):
                if mode == "frame":
                    src = psi
                else:
                    src = np.asarray(psi0, dtype=complex)
                    for op in hist:
                        if op[0] == "U":
                            src = op[1] @ src
                        elif in_cone(i, k, op[1]):
                            src = dense_projector(op[1][2][op[2]], op[1][1], dims) @ src
                            src = src / np.linalg.norm(src)
                rho = partial_trace_loops(src, dims, [i])
                h = g * rho[reference, reference].real * sz
                us.append(expm(-1j * h * dt))
            big = kron_chain(*us)
            stepped.append((outs, prob, big @ psi, hist + [("U", big)]))
        branches = stepped
    return {outs: (prob, psi) for outs, prob, psi, _ in branches}


def linear_branch_probabilities(dims, psi0, events):
    """Exact joint outcome distribution by brute force over all outcome tuples.

    ``events`` is a processing-ordered list of (particle, basis vectors).
    """
    out = {}
    for outs in itertools.product(*[range(len(b)) for _, b in events]):
        psi = np.asarray(psi0, dtype=complex)
        for (p, basis), j in zip(events, outs):
            psi = dense_projector(basis[j], p, dims) @ psi
        prob = float(np.vdot(psi, psi).real)
        if prob > 1e-12:
            out[outs] = prob
    return out
