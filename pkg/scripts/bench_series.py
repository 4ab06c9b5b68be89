"""Time cold counting tables for a few grammars at increasing N.

    python scripts/bench_series.py [--sizes 100 250 500 1000]
"""

import argparse
import time
from dataclasses import dataclass, field

from specc import parse_system
from specc.counter import CountTable, compiled_for

GRAMMARS = {
    "binary trees": "B = Union(Atom, Prod(Atom, B, B))",
    "trees": "T = Prod(Atom, Seq(T))",
    "partitions": "P = MSet(I)\nI = Seq(Atom, card >= 1)",
    "necklaces": "N = Cycle(Union(Atom(a), Atom(b)), card >= 1)",
    "rooted trees": "T = Prod(Atom, MSet(T))",
}


@dataclass
class BenchConfig:
    sizes: list = field(default_factory=lambda: [100, 250, 500])


def bench(text: str, N: int) -> tuple:
    sys_ = parse_system(text)
    c = compiled_for(sys_)
    t0 = time.perf_counter()
    tab = CountTable(c)
    tab.ensure(N)
    root = c.class_node[sys_.root]
    # binary trees vanish at even sizes, so report the larger of the last two terms
    value = max(tab.get(root, N), tab.get(root, N - 1))
    return time.perf_counter() - t0, len(str(value))


def run(cfg: BenchConfig) -> None:
    print(f"{'grammar':14s}" + "".join(f"{'N=' + str(n):>14s}" for n in cfg.sizes))
    for name, text in GRAMMARS.items():
        cells = []
        for N in cfg.sizes:
            dt, digits = bench(text, N)
            cells.append(f"{dt:7.2f}s/{digits:>4d}d")
        print(f"{name:14s}" + "".join(f"{c:>14s}" for c in cells))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=BenchConfig().sizes)
    run(BenchConfig(**vars(p.parse_args())))


if __name__ == "__main__":
    main()
