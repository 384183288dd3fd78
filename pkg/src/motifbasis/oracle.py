"""Brute-force reference counters.

Everything here is written for transparency, not speed: plain backtracking
over vertex maps and permutation-based isomorphism, with no shared code
with the production counting paths.  These are the ground truth that the
clever implementations are checked against, so they must stay independent
of the canonical-form machinery and the decomposition-based counting.

Deliberately tiny limits; exceeding them raises LimitError.
"""

from __future__ import annotations

from itertools import combinations, permutations

from .graphs import AnchoredGraph, Graph, LimitError, induced_subgraph

ORACLE_PATTERN_LIMIT = 7
ORACLE_WORK_LIMIT = 10**9


def _check_size(pattern_n: int, host_n: int) -> None:
    if pattern_n > ORACLE_PATTERN_LIMIT:
        raise LimitError(
            f"oracle patterns limited to {ORACLE_PATTERN_LIMIT} vertices,"
            f" got {pattern_n}"
        )
    if host_n ** max(pattern_n, 1) > ORACLE_WORK_LIMIT:
        raise LimitError(
            f"oracle map space {host_n}^{pattern_n} exceeds {ORACLE_WORK_LIMIT}"
        )


def perm_isomorphic(g: Graph, h: Graph) -> bool:
    """Isomorphism by trying every vertex bijection."""
    if g.n != h.n or g.m != h.m:
        return False
    _check_size(g.n, h.n)
    he = set(h.edges)
    for p in permutations(range(h.n)):
        # equal edge counts, so mapping edges into edges is already an iso
        if all(((p[u], p[v]) if p[u] < p[v] else (p[v], p[u])) in he
               for u, v in g.edges):
            return True
    return False


def perm_automorphism_count(g: Graph) -> int:
    """Automorphism group order by trying every permutation."""
    _check_size(g.n, g.n)
    ge = set(g.edges)
    count = 0
    for p in permutations(range(g.n)):
        mapped = {(p[u], p[v]) if p[u] < p[v] else (p[v], p[u]) for u, v in ge}
        if mapped == ge:
            count += 1
    return count


def _count_maps(pattern: Graph, host: Graph, injective: bool,
                anchor: int | None) -> tuple[int, list[int]]:
    """Backtracking count of edge-preserving maps pattern -> host.

    Returns (total, per_anchor_image); the second entry is only meaningful
    when an anchor was given.  Assigns pattern vertices one at a time,
    checking edges back to already-assigned vertices.
    """
    k, n = pattern.n, host.n
    steps = list(range(k))
    if anchor is not None:
        steps.remove(anchor)
        steps.insert(0, anchor)
    earlier = [
        [j for j in range(i) if pattern.has_edge(steps[i], steps[j])]
        for i in range(k)
    ]
    img = [0] * k
    used = [False] * n
    total = 0
    per_anchor = [0] * n

    def rec(i: int) -> None:
        nonlocal total
        if i == k:
            total += 1
            if anchor is not None:
                per_anchor[img[0]] += 1
            return
        for w in range(n):
            if injective and used[w]:
                continue
            if all(host.has_edge(w, img[j]) for j in earlier[i]):
                img[i] = w
                used[w] = injective
                rec(i + 1)
                used[w] = False

    rec(0)
    return total, per_anchor


def brute_hom(pattern: Graph, host: Graph) -> int:
    """Number of homomorphisms pattern -> host."""
    _check_size(pattern.n, host.n)
    if pattern.n == 0:
        return 1
    return _count_maps(pattern, host, injective=False, anchor=None)[0]


def brute_hom_node(pattern: AnchoredGraph, host: Graph) -> list[int]:
    """Homomorphism counts split by the image of the anchor."""
    _check_size(pattern.n, host.n)
    return _count_maps(pattern.graph, host, injective=False,
                       anchor=pattern.anchor)[1]


def brute_inj(pattern: Graph, host: Graph) -> int:
    """Number of injective homomorphisms pattern -> host."""
    _check_size(pattern.n, host.n)
    if pattern.n == 0:
        return 1
    return _count_maps(pattern, host, injective=True, anchor=None)[0]


def _subgraph_copies(pattern: Graph, host: Graph,
                     anchor: int | None) -> tuple[int, set]:
    """Enumerate injections and collect distinct subgraph images.

    A copy is the pair (vertex image set, edge image set); with an anchor it
    additionally remembers which host vertex plays the anchor.  Also returns
    the raw injection count so callers can cross-check.
    """
    k = pattern.n
    injections = 0
    copies = set()
    for p in permutations(range(host.n), k):
        ok = all(host.has_edge(p[u], p[v]) for u, v in pattern.edges)
        if not ok:
            continue
        injections += 1
        edges = frozenset(
            (p[u], p[v]) if p[u] < p[v] else (p[v], p[u])
            for u, v in pattern.edges
        )
        if anchor is None:
            copies.add((frozenset(p), edges))
        else:
            copies.add((frozenset(p), edges, p[anchor]))
    return injections, copies


def brute_sub(pattern: Graph, host: Graph) -> int:
    """Number of subgraphs of host isomorphic to pattern."""
    _check_size(pattern.n, host.n)
    if pattern.n == 0:
        return 1
    injections, copies = _subgraph_copies(pattern, host, None)
    # every copy is hit by exactly |Aut(pattern)| injections
    assert injections == perm_automorphism_count(pattern) * len(copies)
    return len(copies)


def brute_sub_node(pattern: AnchoredGraph, host: Graph) -> list[int]:
    """Anchored subgraph copies per host vertex.

    Entry v counts distinct copies of the pattern in which v plays the
    anchor role; one copy contributes to several vertices when its
    automorphisms move the anchor.
    """
    _check_size(pattern.n, host.n)
    _, copies = _subgraph_copies(pattern.graph, host, pattern.anchor)
    out = [0] * host.n
    for _, _, v in copies:
        out[v] += 1
    return out


def brute_indsub(pattern: Graph, host: Graph) -> int:
    """Number of induced subgraphs of host isomorphic to pattern."""
    _check_size(pattern.n, host.n)
    if pattern.n == 0:
        return 1
    count = 0
    for vs in combinations(range(host.n), pattern.n):
        if perm_isomorphic(induced_subgraph(host, vs), pattern):
            count += 1
    return count
