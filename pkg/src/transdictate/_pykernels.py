"""Pure numpy implementations of the hot loops.

Shared conventions (mirrored exactly by ``_kernels.pyx``):

* ``C`` real classes, ``K = C + 1``.  In the two history slots of a
  trigram table index ``C`` is the sentence boundary; in the successor
  slot index ``C`` is the end-of-sentence event.
* ``trans`` / ``logtrans`` have shape ``(K, K, K)``.
* Per-position emission scores have shape ``(L, C)``.
* A DP state after position ``i`` is ``(c[i-1], c[i])``; arrays over
  states have shape ``(K, C)`` because the first slot may be the boundary.
"""

import numpy as np

NEG_INF = -np.inf


def forward_backward(trans, emit):
    """Scaled forward-backward over a batch of equal-length sentences.

    Parameters
    ----------
    trans : ndarray, shape (K, K, K)
        Trigram class probabilities.
    emit : ndarray, shape (N, L, C)
        Per-position emission probabilities (0 for disallowed classes).

    Returns
    -------
    loglik : ndarray, shape (N,)
        Sentence log-probabilities; ``-inf`` for impossible sentences,
        which contribute nothing to ``counts`` or ``gamma``.
    counts : ndarray, shape (K, K, K)
        Expected trigram counts summed over the batch.
    gamma : ndarray, shape (N, L, C)
        Posterior class marginals per position.
    """
    trans = np.asarray(trans, dtype=np.float64)
    emit = np.asarray(emit, dtype=np.float64)
    N, L, C = emit.shape
    K = C + 1
    B = E = C
    inner = trans[:, :C, :C]
    end = trans[:, :C, E]

    alphas = np.zeros((L, N, K, C))
    scales = np.ones((L, N))
    valid = np.ones(N, dtype=bool)

    alpha = np.zeros((N, K, C))
    alpha[:, B, :] = trans[B, B, :C] * emit[:, 0, :]
    for i in range(L):
        if i > 0:
            nxt = np.zeros((N, K, C))
            nxt[:, :C, :] = np.einsum("nab,abc->nbc", alpha, inner) * emit[:, i, None, :]
            alpha = nxt
        s = alpha.sum(axis=(1, 2))
        dead = s <= 0.0
        valid &= ~dead
        s[dead] = 1.0
        alpha = alpha / s[:, None, None]
        alphas[i] = alpha
        scales[i] = s
    s_end = np.einsum("nab,ab->n", alpha, end)
    valid &= s_end > 0.0
    s_end[~valid] = 1.0

    loglik = np.log(scales).sum(axis=0) + np.log(s_end)
    loglik[~valid] = NEG_INF
    w = valid.astype(np.float64)

    counts = np.zeros((K, K, K))
    gamma = np.zeros((N, L, C))
    beta = np.zeros((N, K, C))
    beta[:] = end[None] / s_end[:, None, None]
    counts[:, :C, E] += np.einsum("nab,ab,n->ab", alphas[L - 1], end, w / s_end)
    for i in range(L - 1, -1, -1):
        gamma[:, i, :] = (alphas[i] * beta).sum(axis=1) * w[:, None]
        if i == 0:
            counts[B, B, :C] += np.einsum("nc,n->c", alphas[0][:, B, :] * beta[:, B, :], w)
            break
        coef = w / scales[i]
        counts[:, :C, :C] += inner * np.einsum(
            "nab,nc,nbc,n->abc", alphas[i - 1], emit[:, i, :], beta[:, :C, :], coef
        )
        prev = np.einsum("abc,nc,nbc->nab", inner, emit[:, i, :], beta[:, :C, :])
        beta = prev / scales[i][:, None, None]
    return loglik, counts, gamma


def _logsumexp(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m_safe), axis=axis, keepdims=True)) + m_safe
    return np.squeeze(out, axis=axis)


def forward_logprob(logtrans, logemit):
    """Log-domain forward sum over class sequences for one sentence."""
    logtrans = np.asarray(logtrans, dtype=np.float64)
    logemit = np.asarray(logemit, dtype=np.float64)
    L, C = logemit.shape
    K = C + 1
    B = E = C
    la = np.full((K, C), NEG_INF)
    la[B, :] = logtrans[B, B, :C] + logemit[0]
    inner = logtrans[:, :C, :C]
    for i in range(1, L):
        nxt = np.full((K, C), NEG_INF)
        # la[a, b] + inner[a, b, c], reduced over a
        nxt[:C, :] = _logsumexp(la[:, :, None] + inner, axis=0) + logemit[i][None, :]
        la = nxt
    total = la + logtrans[:, :C, E]
    return float(_logsumexp(total.reshape(-1), axis=0))


def viterbi(logtrans, logemit, order=None, rel_tol=1e-12):
    """Best class sequence with lexicographic tie-breaking.

    A backward pass computes the best completion score of every state; a
    forward greedy pass then takes, at each position, the first class in
    ``order[i]`` whose best completion reaches the global optimum (within
    ``rel_tol``).  This yields the lexicographically smallest optimal
    sequence with respect to the per-position preference order.

    Returns ``(path, score)``; ``score`` is the left-to-right sum along
    ``path`` and is ``-inf`` when no sequence has positive probability.
    """
    logtrans = np.asarray(logtrans, dtype=np.float64)
    logemit = np.asarray(logemit, dtype=np.float64)
    L, C = logemit.shape
    B = E = C
    if order is None:
        order = np.tile(np.arange(C), (L, 1))
    inner = logtrans[:, :C, :C]

    V = np.empty((L, C + 1, C))
    V[L - 1] = logtrans[:, :C, E]
    for i in range(L - 2, -1, -1):
        # V[i][a, b] = max_c inner[a, b, c] + e[i+1, c] + V[i+1][b, c]
        nxt = V[i + 1][:C, :]
        V[i] = np.max(inner + logemit[i + 1][None, None, :] + nxt[None, :, :], axis=2)

    best = np.max(logtrans[B, B, :C] + logemit[0] + V[0][B, :])
    path = np.zeros(L, dtype=np.int64)
    if not np.isfinite(best):
        return path, NEG_INF
    tol = rel_tol * max(1.0, abs(best))
    prefix = 0.0
    a = b = B
    for i in range(L):
        for c in order[i]:
            step = logtrans[a, b, c] + logemit[i, c]
            if prefix + step + V[i][b, c] >= best - tol:
                path[i] = c
                prefix += step
                a, b = b, c
                break
    return path, float(prefix + logtrans[a, b, E])


def trie_edit_distances(truth, parent, phone):
    """Unit-cost edit distance from ``truth`` to every trie node's prefix.

    Nodes are topologically ordered (parents first); node 0 is the root
    and has ``parent[0] == -1``.
    """
    truth = np.asarray(truth)
    M = len(truth)
    n_nodes = len(parent)
    rows = np.empty((n_nodes, M + 1), dtype=np.int64)
    rows[0] = np.arange(M + 1)
    out = np.empty(n_nodes, dtype=np.int64)
    out[0] = M
    for node in range(1, n_nodes):
        prow = rows[parent[node]]
        sub = prow[:-1] + (truth != phone[node])
        row = rows[node]
        row[0] = prow[0] + 1
        for j in range(1, M + 1):
            row[j] = min(prow[j] + 1, row[j - 1] + 1, sub[j - 1])
        out[node] = row[M]
    return out
