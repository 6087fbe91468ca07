"""Which derogatory chunk shapes does the torsion + square-zero solver handle?

Builds diag(0_z, B) for B a nilpotent Jordan block or a cyclotomic companion block
over Q and reports solved / exhausted for each admissible z.
"""

import argparse
import time
from dataclasses import dataclass

from perdecomp import torsion_squarezero, verify_certificate
from perdecomp.errors import RankTooLow, SolverExhausted
from perdecomp.matcore import Matrix, companion
from perdecomp.polyring import Poly, cyclotomic, euler_phi
from perdecomp.scalars import Field


@dataclass
class CoverageConfig:
    max_nil: int = 7
    max_index: int = 12
    max_size: int = 9


def shapes(cfg, F):
    for k in range(2, cfg.max_nil + 1):
        for z in range(1, k - 1):
            if z + k <= cfg.max_size:
                yield f"0_{z} + N_{k}", z, companion(Poly.x(F, k))
    for e in range(1, cfg.max_index + 1):
        d = euler_phi(e)
        for z in range(1, d + 1):
            if z + d <= cfg.max_size:
                yield f"0_{z} + C(Phi_{e})", z, companion(cyclotomic(e))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-nil", type=int, default=CoverageConfig.max_nil)
    ap.add_argument("--max-index", type=int, default=CoverageConfig.max_index)
    ap.add_argument("--max-size", type=int, default=CoverageConfig.max_size)
    ns = ap.parse_args()
    cfg = CoverageConfig(ns.max_nil, ns.max_index, ns.max_size)
    F = Field.rationals()
    solved = total = 0
    for name, z, B in shapes(cfg, F):
        A = Matrix.block_diag(F, [Matrix.zeros(F, z), B])
        t0 = time.time()
        try:
            cert = torsion_squarezero(A)
            assert verify_certificate(A, cert).ok
            verdict = f"solved  order {cert.torsion_order}"
            solved += 1
        except SolverExhausted as exc:
            verdict = f"exhausted ({exc})"
        except RankTooLow:
            continue
        total += 1
        print(f"{name:<18} {verdict:<40} {time.time() - t0:6.2f}s")
    print(f"\n{solved}/{total} shapes solved")


if __name__ == "__main__":
    main()
