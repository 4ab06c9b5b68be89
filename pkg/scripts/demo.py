"""Walk through the ordered-trees example: count, list, sample, guess a recurrence.

    python scripts/demo.py [--list-size 5] [--random-size 50] [--seed 7]
"""

import argparse
from dataclasses import dataclass

from specc import parse_system
from specc.counter import series
from specc.enumerator import format_structure, list_structures, random_structure
from specc.recurrence import recurrence_for

SPECS = {
    "trees": "T = Prod(Atom, Seq(T))",
    "binary trees (internal nodes)": "B = Union(Epsilon, Prod(Atom, B, B))",
    "binary trees (all nodes)": "B = Union(Atom, Prod(Atom, B, B))",
    "Motzkin": "M = Union(Atom, Prod(Atom, M), Prod(Atom, M, M))",
}


@dataclass
class DemoConfig:
    list_size: int = 5
    random_size: int = 50
    seed: int = 7
    terms: int = 30


def run(cfg: DemoConfig) -> None:
    trees = parse_system(SPECS["trees"])
    print("count(6) =", series(trees, "T", 6)[6])
    items = list_structures(trees, "T", cfg.list_size)
    print(f"list({cfg.list_size}): {len(items)} trees")
    for s in items:
        print("  ", format_structure(s))
    print(f"random({cfg.random_size}, seed={cfg.seed}):")
    print("  ", format_structure(random_structure(trees, "T", cfg.random_size, cfg.seed)))
    print(f"recurrences from {cfg.terms} terms:")
    for name, text in SPECS.items():
        sys_ = parse_system(text)
        rec = recurrence_for(sys_, sys_.root, cfg.terms - 1)
        print(f"  {name:32s} {rec.render() if rec else 'none'}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for field, default in vars(DemoConfig()).items():
        p.add_argument("--" + field.replace("_", "-"), type=int, default=default)
    run(DemoConfig(**vars(p.parse_args())))


if __name__ == "__main__":
    main()
