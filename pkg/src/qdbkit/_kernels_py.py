"""Pure-Python (numpy) versions of the dense kernels.

Same algorithms and return conventions as the compiled module.  The two
Jacobi kernels use a round-robin pair ordering so that all rotations of a
round act on disjoint index pairs and can be applied as one vectorised
update.
"""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps
TINY = 1e-300


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint pairs covering every pair ``p < q`` once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi_params(app, aqq, mag):
    tau = (aqq - app) / (2.0 * mag)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c, t


def jacobi_eigh(A_in, max_sweeps: int):
    a = np.array(A_in, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    a[np.diag_indices(n)] = a.diagonal().real
    fro = np.linalg.norm(a)
    rounds = _round_robin(n)
    converged = n <= 1
    for _ in range(max_sweeps):
        if converged:
            break
        rotations = 0
        for P, Q in rounds:
            apq = a[P, Q]
            mag = np.abs(apq)
            app = a[P, P].real
            aqq = a[Q, Q].real
            thresh = np.maximum(EPS * np.sqrt(np.abs(app * aqq)), 1e-20 * fro)
            active = (mag > thresh) & (mag > TINY)
            if not active.any():
                continue
            P, Q = P[active], Q[active]
            apq, mag, app, aqq = apq[active], mag[active], app[active], aqq[active]
            rotations += len(P)
            c, s, t = _jacobi_params(app, aqq, mag)
            e = apq / mag
            se, sec = s * e, s * np.conj(e)
            x, y = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = c * x - sec * y
            a[:, Q] = se * x + c * y
            x, y = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = c[:, None] * x - se[:, None] * y
            a[Q, :] = sec[:, None] * x + c[:, None] * y
            x, y = v[:, P].copy(), v[:, Q].copy()
            v[:, P] = c * x - sec * y
            v[:, Q] = se * x + c * y
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            a[P, P] = app - t * mag
            a[Q, Q] = aqq + t * mag
        if rotations == 0:
            converged = True
    return a.diagonal().real.copy(), v, bool(converged)


def jacobi_svd(A_in, max_sweeps: int):
    b = np.array(A_in, dtype=np.complex128, copy=True)
    n = b.shape[1]
    v = np.eye(n, dtype=np.complex128)
    fro2 = np.vdot(b, b).real
    rounds = _round_robin(n)
    converged = n <= 1
    for _ in range(max_sweeps):
        if converged:
            break
        rotations = 0
        for P, Q in rounds:
            x, y = b[:, P], b[:, Q]
            alpha = np.sum(np.abs(x) ** 2, axis=0)
            beta = np.sum(np.abs(y) ** 2, axis=0)
            gam = np.sum(np.conj(x) * y, axis=0)
            mag = np.abs(gam)
            thresh = np.maximum(EPS * np.sqrt(alpha * beta), 1e-30 * fro2)
            active = (mag > thresh) & (mag > TINY)
            if not active.any():
                continue
            P, Q = P[active], Q[active]
            gam, mag, alpha, beta = gam[active], mag[active], alpha[active], beta[active]
            rotations += len(P)
            c, s, _ = _jacobi_params(alpha, beta, mag)
            e = gam / mag
            se, sec = s * e, s * np.conj(e)
            x, y = b[:, P].copy(), b[:, Q].copy()
            b[:, P] = c * x - sec * y
            b[:, Q] = se * x + c * y
            x, y = v[:, P].copy(), v[:, Q].copy()
            v[:, P] = c * x - sec * y
            v[:, Q] = se * x + c * y
        if rotations == 0:
            converged = True
    return b, v, bool(converged)


def hessenberg(A_in):
    h = np.array(A_in, dtype=np.complex128, copy=True)
    n = h.shape[0]
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = h[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        ax0 = abs(x[0])
        phase = x[0] / ax0 if ax0 > 0 else 1.0
        w = x.copy()
        w[0] += phase * xnorm
        w /= np.linalg.norm(w)
        h[k + 1:, k:] -= 2.0 * np.outer(w, np.conj(w) @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ w, np.conj(w))
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ w, np.conj(w))
        h[k + 2:, k] = 0.0
    return h, q


def _givens(x, y):
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        return 1.0, 0.0
    if ax == 0.0:
        return 0.0, np.conj(y) / ay
    r = np.hypot(ax, ay)
    return ax / r, (x / ax) * np.conj(y) / r


def schur_qr(H_in, Q_in, max_iter: int):
    h = np.array(H_in, dtype=np.complex128, copy=True)
    qm = np.array(Q_in, dtype=np.complex128, copy=True)
    n = h.shape[0]
    hnorm = np.abs(h).sum() or 1.0
    hi = n - 1
    its = 0
    converged = True
    while hi >= 1:
        l = hi
        while l >= 1:
            sdiag = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if sdiag == 0.0:
                sdiag = hnorm
            if abs(h[l, l - 1]) <= EPS * sdiag:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter:
            converged = False
            break
        if its % 11 == 0:
            mu = h[hi, hi] + abs(h[hi, hi - 1])
            if hi >= 2:
                mu += abs(h[hi - 1, hi - 2])
        else:
            a, bb, cc, d = h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi]
            delta = (a - d) / 2.0
            disc = np.sqrt(complex(delta * delta + bb * cc))
            if (np.conj(delta) * disc).real < 0:
                disc = -disc
            den = delta + disc
            mu = d if abs(den) == 0.0 else d - bb * cc / den
        x = h[l, l] - mu
        y = h[l + 1, l]
        for k in range(l, hi):
            if k > l:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            c, s = _givens(x, y)
            start = k - 1 if k > l else l
            r1, r2 = h[k, start:].copy(), h[k + 1, start:].copy()
            h[k, start:] = c * r1 + s * r2
            h[k + 1, start:] = -np.conj(s) * r1 + c * r2
            stop = min(k + 2, hi) + 1
            c1, c2 = h[:stop, k].copy(), h[:stop, k + 1].copy()
            h[:stop, k] = c * c1 + np.conj(s) * c2
            h[:stop, k + 1] = -s * c1 + c * c2
            c1, c2 = qm[:, k].copy(), qm[:, k + 1].copy()
            qm[:, k] = c * c1 + np.conj(s) * c2
            qm[:, k + 1] = -s * c1 + c * c2
            if k > l:
                h[k + 1, k - 1] = 0.0
    h = np.triu(h)
    return h, qm, bool(converged)


def tri_solve_shifted(T_in, mu, b_in, small: float):
    t = np.asarray(T_in, dtype=np.complex128)
    y = np.array(b_in, dtype=np.complex128, copy=True)
    n = t.shape[0]
    for i in range(n - 1, -1, -1):
        acc = y[i] - t[i, i + 1:] @ y[i + 1:]
        piv = t[i, i] - mu
        if abs(piv) < small:
            piv = small
        y[i] = acc / piv
    return y
