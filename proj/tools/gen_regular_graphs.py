#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes connected d-regular graph families as graph6 files.

Graphs are sampled with networkx and deduplicated up to isomorphism until the
known number of isomorphism classes is reached. RegN10D5 is built from
complements of the 4-regular graphs on 10 nodes instead, since sampling rarely
hits K5,5. Output lines are sorted, so
reruns produce identical files.
"""
import argparse
import pathlib
import random
import sys

import networkx as nx

# Number of connected d-regular graphs on n nodes.
KNOWN_COUNTS = {
    (6, 3): 2,
    (7, 4): 2,
    (8, 3): 5,
    (8, 4): 6,
    (8, 5): 3,
    (9, 4): 16,
    (9, 6): 4,
    (10, 3): 19,
    (10, 4): 59,
    (10, 5): 60,
    (10, 6): 21,
    (10, 7): 5,
}


def collect(n, d, seed, max_samples):
    rng = random.Random(seed)
    target = KNOWN_COUNTS[(n, d)]
    buckets = {}
    found = 0
    for _ in range(max_samples):
        g = nx.random_regular_graph(d, n, seed=rng.randrange(2**32))
        if not nx.is_connected(g):
            continue
        # 1-WL cannot split regular graphs, so bucket by triangle counts instead.
        key = tuple(sorted(nx.triangles(g).values()))
        bucket = buckets.setdefault(key, [])
        if any(nx.is_isomorphic(g, h) for h in bucket):
            continue
        bucket.append(g)
        found += 1
        if found == target:
            break
    return [h for b in buckets.values() for h in b], target


def complement_family(n, d, seed, max_samples):
    # A 5-regular graph on 10 nodes is always connected, so its complements
    # are all 4-regular graphs on 10 nodes: the connected ones plus 2K5.
    assert (n, d) == (10, 5)
    base, _ = collect(10, 4, seed, max_samples)
    base.append(nx.disjoint_union(nx.complete_graph(5), nx.complete_graph(5)))
    return [nx.complement(g) for g in base], KNOWN_COUNTS[(n, d)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/regular", help="output directory")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--max-samples", type=int, default=2_000_000)
    parser.add_argument("families", nargs="*", help="e.g. 10:4; default all known families")
    args = parser.parse_args()

    families = sorted(KNOWN_COUNTS) if not args.families else [tuple(map(int, f.split(":"))) for f in args.families]
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for n, d in families:
        build = complement_family if (n, d) == (10, 5) else collect
        graphs, target = build(n, d, args.seed, args.max_samples)
        lines = sorted(nx.to_graph6_bytes(g, header=False).decode().strip() for g in graphs)
        path = out / f"RegN{n}D{d}.g6"
        path.write_text("".join(line + "\n" for line in lines))
        print(f"{path}: {len(lines)} / {target} graphs")
        if len(lines) != target:
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
