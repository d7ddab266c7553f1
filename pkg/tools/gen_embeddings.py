#!/usr/bin/env python3
"""Generate the bundled word-vector file.

Produces a deterministic, seeded stand-in for pretrained 100-dimensional word
vectors: one unit-length Gaussian vector per vocabulary word, written as
whitespace-separated text ("word v1 ... v100").  The vocabulary covers the
command language's keywords plus common words people use when phrasing robot
commands, so similarity scores are meaningful without a huge download.
"""
import argparse
import math
import random

KEYWORDS = """
visit move pick drop strict repeat times foreach point in world containing
item items is has color shape and or not minus every one at robot if while
possible avoiding up down left right
""".split()

COLORS = "red green blue yellow black white".split()
SHAPES = "triangle square circle star".split()
ROOMS = "room room1 room2 room3 room4".split()

VERBS = """
go get put throw gather bring take grab place fetch collect carry sort clean
stack line fill empty deliver store wander return come walk push step turn
start stop find search scan count hold release lift lay set leave keep
""".split()

NOUNS = """
thing things object objects block blocks cell cells grid area areas corner
edge wall walls floor home base spot position location target goal path route
way side middle center top bottom next near far first last second third
everything nothing stuff piece pieces group bunch row column zone region
triangles squares circles stars rooms points toys tools colors shapes
""".split()

MODIFIERS = """
big small new old round sharp dark light bright colored shaped same different
closest nearest farthest leftmost rightmost upper lower twice many several
couple pair
""".split()

NUMERALS = [str(n) for n in range(100)]


def vocabulary() -> list[str]:
    seen = []
    for word in KEYWORDS + COLORS + SHAPES + ROOMS + VERBS + NOUNS + MODIFIERS + NUMERALS:
        if word not in seen:
            seen.append(word)
    return seen


def unit_vector(rng: random.Random, dim: int) -> list[float]:
    v = [rng.gauss(0.0, 1.0) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="src/flipper/data/embeddings-100d.txt")
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    words = vocabulary()
    with open(args.out, "w", encoding="utf-8") as fh:
        for word in words:
            vec = unit_vector(rng, args.dim)
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
    print(f"wrote {len(words)} x {args.dim} vectors to {args.out}")


if __name__ == "__main__":
    main()
