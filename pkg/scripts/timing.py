"""Wall time of both decompositions on generated instances, by field and size."""

import argparse
import statistics
import time
from dataclasses import dataclass

from perdecomp import idempotent_torsion, torsion_squarezero
from perdecomp.errors import SolverExhausted
from perdecomp.generate import GeneratorConfig, generate
from perdecomp.scalars import Field


@dataclass
class TimingConfig:
    fields: tuple = ("fp:2", "fp:3", "fp:5", "q", "qsqrt:2")
    sizes: tuple = (2, 4, 6, 8)
    seeds: int = 20


def clock(fn, *args):
    t0 = time.perf_counter()
    try:
        fn(*args)
        ok = True
    except SolverExhausted:
        ok = False
    return time.perf_counter() - t0, ok


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=TimingConfig.seeds)
    ap.add_argument("--fields", nargs="*", default=list(TimingConfig.fields))
    ns = ap.parse_args()
    cfg = TimingConfig(fields=tuple(ns.fields), seeds=ns.seeds)
    print(f"{'field':<10}{'n':>3}{'et ms':>10}{'tn ms':>10}{'tn solved':>11}")
    for name in cfg.fields:
        F = Field.from_string(name)
        for n in cfg.sizes:
            et, tn, ok = [], [], 0
            for seed in range(cfg.seeds):
                A = generate(F, GeneratorConfig(size=n, seed=seed, rank_min=True)).A
                et.append(clock(idempotent_torsion, A)[0])
                dt, good = clock(torsion_squarezero, A)
                tn.append(dt)
                ok += good
            print(f"{name:<10}{n:>3}{1000 * statistics.median(et):>10.1f}"
                  f"{1000 * statistics.median(tn):>10.1f}{ok:>7}/{cfg.seeds}")


if __name__ == "__main__":
    main()
