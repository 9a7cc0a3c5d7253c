"""Rooted binary trees over labeled leaves.

Trees are nested 2-tuples whose leaves are integer leaf ids, e.g.
``((0, 1), (2, 3))``.  Children are kept in canonical order (smaller minimum
leaf first) so structural equality is topology equality.
"""

from __future__ import annotations

from itertools import combinations

Tree = "int | tuple"

# Codes for the resolved topology of a leaf triple (x, y, z) with x < y < z:
# which pair of the triple is joined below the third.
TRIPLET_PAIRS = ((0, 1), (0, 2), (1, 2))


def canonical(tree):
    if isinstance(tree, int):
        return tree
    left, right = canonical(tree[0]), canonical(tree[1])
    if min_leaf(left) > min_leaf(right):
        left, right = right, left
    return (left, right)


def min_leaf(tree):
    while not isinstance(tree, int):
        tree = tree[0]
    return tree


def leaves(tree):
    if isinstance(tree, int):
        return {tree}
    return leaves(tree[0]) | leaves(tree[1])


def _subtree_count(tree):
    if isinstance(tree, int):
        return 1
    return 1 + _subtree_count(tree[0]) + _subtree_count(tree[1])


def _insert_at(tree, pos, leaf):
    """Replace the pos-th subtree (preorder) with (subtree, leaf)."""

    def rec(node, pos):
        if pos == 0:
            return (node, leaf), -1
        if isinstance(node, int):
            return node, pos - 1
        left, pos = rec(node[0], pos - 1)
        if pos < 0:
            return (left, node[1]), -1
        right, pos = rec(node[1], pos)
        if pos < 0:
            return (left, right), -1
        return node, pos

    out, rest = rec(tree, pos)
    assert rest < 0
    return out


def enumerate_trees(n):
    """All rooted binary tree topologies on leaves 0..n-1; (2n-3)!! of them."""
    if n < 1:
        raise ValueError("need at least one leaf")
    trees = [0]
    for leaf in range(1, n):
        grown = []
        for t in trees:
            for pos in range(_subtree_count(t)):
                grown.append(canonical(_insert_at(t, pos, leaf)))
        trees = grown
    return trees


def leaf_paths(tree):
    """Map leaf -> tuple of 0/1 directions from the root."""
    paths = {}

    def walk(node, path):
        if isinstance(node, int):
            paths[node] = path
            return
        walk(node[0], path + (0,))
        walk(node[1], path + (1,))

    walk(tree, ())
    return paths


def _lca_depth(pa, pb):
    d = 0
    for a, b in zip(pa, pb):
        if a != b:
            break
        d += 1
    return d


def triplet_code(paths, x, y, z):
    """Which pair of the sorted triple joins first: index into TRIPLET_PAIRS."""
    trip = sorted((x, y, z))
    depths = [_lca_depth(paths[trip[a]], paths[trip[b]]) for a, b in TRIPLET_PAIRS]
    return max(range(3), key=lambda i: depths[i])


def triplet_token(triple, code, names):
    """Render a topology code as e.g. "ab|c" (joined pair, then outgroup)."""
    trip = sorted(triple)
    a, b = TRIPLET_PAIRS[code]
    out = ({0, 1, 2} - {a, b}).pop()
    return f"{names[trip[a]]}{names[trip[b]]}|{names[trip[out]]}"


def triplet_code_of_token(triple, token, names):
    trip = sorted(triple)
    for code in range(3):
        if triplet_token(trip, code, names) == token:
            return code
    raise ValueError(f"unknown triplet token {token!r} for triple {trip}")


def restrict(tree, keep):
    """Restriction of the tree to the leaf set `keep` (must be nonempty)."""
    if isinstance(tree, int):
        return tree if tree in keep else None
    left = restrict(tree[0], keep)
    right = restrict(tree[1], keep)
    if left is None:
        return right
    if right is None:
        return left
    return (left, right)


def newick(tree, names):
    if isinstance(tree, int):
        return names[tree]
    return f"({newick(tree[0], names)},{newick(tree[1], names)})"


def parse_newick(text, names):
    index = {name: i for i, name in enumerate(names)}
    pos = 0

    def node():
        nonlocal pos
        if text[pos] == "(":
            pos += 1
            left = node()
            if text[pos] != ",":
                raise ValueError(f"expected ',' at {pos} in {text!r}")
            pos += 1
            right = node()
            if text[pos] != ")":
                raise ValueError(f"expected ')' at {pos} in {text!r}")
            pos += 1
            return (left, right)
        start = pos
        while pos < len(text) and text[pos] not in "(),;":
            pos += 1
        name = text[start:pos].strip()
        if name not in index:
            raise ValueError(f"unknown leaf {name!r}")
        return index[name]

    out = node()
    if text[pos:].strip(";").strip():
        raise ValueError(f"trailing text in newick {text!r}")
    return canonical(out)


def all_triples(items):
    return list(combinations(sorted(items), 3))
