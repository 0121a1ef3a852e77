"""Independent reference implementations the test suite checks the package against.

Everything here is written for clarity, not speed: explicit Python loops,
no code shared with the package, so agreement between the two routes is
evidence rather than tautology.
"""

import math

import numpy as np


# --- logistic negative-sampling loss ------------------------------------------------

def log_sigmoid(x: float) -> float:
    # log sigma(x) = -log(1 + exp(-x)), rewritten to stay finite on both tails
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def bilinear_triple_loop(v_t, T, v_c) -> float:
    """sum_pq v_t[p] T[p][q] v_c[q] with explicit index loops."""
    total = 0.0
    for p in range(len(v_t)):
        for q in range(len(v_c)):
            total += float(v_t[p]) * float(T[p][q]) * float(v_c[q])
    return total


def dot_loop(a, b) -> float:
    return sum(float(x) * float(y) for x, y in zip(a, b))


def reference_loss(v_t, v_c, neg_vecs, T=None) -> float:
    """-log sigma(u_pos) - sum_neg log sigma(-u_neg); bilinear score when T is given."""
    def score(a, b):
        return dot_loop(a, b) if T is None else bilinear_triple_loop(a, T, b)

    loss = -log_sigmoid(score(v_t, v_c))
    for neg in neg_vecs:
        loss -= log_sigmoid(-score(v_t, neg))
    return loss


def finite_difference(f, arrays, h=1e-5):
    """Central-difference gradients of scalar f(list of arrays) per array."""
    grads = []
    for which, arr in enumerate(arrays):
        arr = np.asarray(arr, dtype=np.float64)
        grad = np.zeros(arr.size)
        for pos in range(arr.size):
            plus = [np.array(a, dtype=np.float64) for a in arrays]
            minus = [np.array(a, dtype=np.float64) for a in arrays]
            plus[which].reshape(-1)[pos] += h
            minus[which].reshape(-1)[pos] -= h
            grad[pos] = (f(plus) - f(minus)) / (2.0 * h)
        grads.append(grad.reshape(arr.shape))
    return grads


def gradient_rel_error(got, want) -> float:
    """Norm-wise relative error between a gradient array and its reference.

    Element-wise ratios blow up on saturated-sigmoid instances where the true
    gradient is ~1e-8 while the difference sits at finite-difference noise
    level, so agreement is judged per array, with a denominator floor of 1e-5
    (losses and gradients here are O(1), so smaller arrays are effectively
    zero and get compared absolutely; a sign or formula error on such an
    array would still show up orders of magnitude above the floor).
    """
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    scale = max(np.linalg.norm(want), np.linalg.norm(got), 1e-5)
    return float(np.linalg.norm(got - want) / scale)


# --- parse-graph shortest paths ------------------------------------------------------

def _neighbor_sets(n_tokens, edges):
    nbrs = {i: set() for i in range(1, n_tokens + 1)}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    return nbrs


def bfs_distance_map(n_tokens, edges, start):
    """Layer-by-layer breadth-first distances over an undirected edge list."""
    nbrs = _neighbor_sets(n_tokens, edges)
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for nb in nbrs[node]:
                if nb not in dist:
                    dist[nb] = dist[node] + 1
                    nxt.append(nb)
        frontier = nxt
    return dist


def all_shortest_paths(n_tokens, edges, i, j):
    """Every shortest i..j node path: DFS constrained to the two BFS layerings."""
    if i == j:
        return [[i]]
    from_i = bfs_distance_map(n_tokens, edges, i)
    if j not in from_i:
        return []
    from_j = bfs_distance_map(n_tokens, edges, j)
    nbrs = _neighbor_sets(n_tokens, edges)
    paths = []

    def extend(path):
        node = path[-1]
        if node == j:
            paths.append(list(path))
            return
        for nb in sorted(nbrs[node]):
            if from_i.get(nb) == from_i[node] + 1 and from_j.get(nb) == from_j[node] - 1:
                path.append(nb)
                extend(path)
                path.pop()

    extend([i])
    return paths


def labels_for_node_path(sentence, node_path):
    """Directed label sequence for consecutive steps; upward arcs get the -1 suffix.

    When both arc directions exist between a pair (malformed cyclic parses),
    the downward head->dependent reading wins, matching the stated convention.
    """
    heads = {tok.index: tok.head for tok in sentence.tokens}
    deprels = {tok.index: tok.deprel for tok in sentence.tokens}
    out = []
    for a, b in zip(node_path, node_path[1:]):
        if heads[b] == a:
            out.append(deprels[b])
        else:
            assert heads[a] == b, f"no arc between {a} and {b}"
            label = deprels[a]
            out.append(label[:-2] if label.endswith("-1") else label + "-1")
    return out


# --- rank statistics -----------------------------------------------------------------

def midrank(values):
    """1-based ranks with ties sharing the mean of their positions."""
    order = sorted(range(len(values)), key=lambda idx: values[idx])
    ranks = [0.0] * len(values)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and values[order[end + 1]] == values[order[pos]]:
            end += 1
        shared = (pos + end) / 2.0 + 1.0
        for t in range(pos, end + 1):
            ranks[order[t]] = shared
        pos = end + 1
    return ranks


def pearson(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def midrank_spearman(xs, ys) -> float:
    """Pearson correlation of mid-ranks: the textbook tie-aware Spearman."""
    return pearson(midrank(list(xs)), midrank(list(ys)))


def brute_force_rank(words, vectors, inferred, gold_word) -> int:
    """Rank of the gold word after sorting explicit per-word cosines (no ties assumed)."""
    n_inf = math.sqrt(dot_loop(inferred, inferred))
    sims = {}
    for word, vec in zip(words, vectors):
        n_vec = math.sqrt(dot_loop(vec, vec))
        sims[word] = dot_loop(vec, inferred) / (n_vec * n_inf)
    ordered = sorted(words, key=lambda w: -sims[w])
    return ordered.index(gold_word) + 1


# --- few-shot inference --------------------------------------------------------------

def noise_probs(counts):
    powered = [float(c) ** 0.75 for c in counts]
    z = sum(powered)
    return [p / z for p in powered]


def weighted_vector_sum(probs, vectors):
    """sum_w p_w v_w accumulated one component at a time."""
    dim = len(vectors[0])
    out = [0.0] * dim
    for p, vec in zip(probs, vectors):
        for d in range(dim):
            out[d] += float(p) * float(vec[d])
    return np.array(out)


def reference_infer(sentences, positions, words, counts, vectors,
                    tau, k, n, stopwords, method,
                    matrices=None, reverse=False):
    """Per-occurrence recomputation of all three inference methods.

    ``words`` must already be normalized (the oracle looks forms up lowercased).
    ``matrices`` is a plain dict label -> 2-d array; missing labels mean identity.
    """
    dim = len(vectors[0])
    index = {w: i for i, w in enumerate(words)}
    total_count = float(sum(counts))
    g = weighted_vector_sum(noise_probs(counts), vectors)
    out = [0.0] * dim
    usable = 0
    for sent, tpos in zip(sentences, positions):
        n_tok = len(sent.tokens)
        edges = [(tok.head, tok.index) for tok in sent.tokens if tok.head != 0]
        for tok in sent.tokens:
            if tok.index == tpos:
                continue
            if tok.form.lower() in stopwords:
                continue
            wid = index.get(tok.form.lower())
            if wid is None:
                continue
            usable += 1
            m = abs(tok.index - tpos)
            r = max(0.0, (n - m + 1) / n)
            if r == 0.0:
                continue
            s = min(1.0, math.sqrt(tau * total_count / counts[wid]))
            term = [s * r * (float(vectors[wid][d]) - k * g[d]) for d in range(dim)]
            if method == "dep-additive":
                dist = bfs_distance_map(n_tok, edges, tpos).get(tok.index)
                weight = 1.0 if dist is None else 1.0 + 1.0 / dist
                term = [weight * x for x in term]
            elif method == "dm-additive":
                paths = all_shortest_paths(n_tok, edges, tpos, tok.index)
                if paths:
                    node_path = min(paths)
                    labels = labels_for_node_path(sent, node_path)
                    for label in (reversed(labels) if not reverse else labels):
                        matrix = matrices.get(label)
                        if matrix is not None:
                            term = [dot_loop(matrix[row], term) for row in range(dim)]
            for d in range(dim):
                out[d] += term[d]
    assert usable > 0, "oracle called on an empty context"
    return np.array(out)
