"""Run every cross-identity on the fixed-seed random lattice models."""

import argparse
import time
from dataclasses import dataclass

from mapfluct import zoo
from mapfluct.verify import verify_lattice


@dataclass
class SuiteConfig:
    count: int = 50
    seed: int = zoo.RANDOM_SEED
    horizon: int = 12
    verbose: bool = False


def run(cfg):
    start = time.perf_counter()
    failed = 0
    for i, model in enumerate(zoo.random_models(cfg.count, cfg.seed)):
        table = verify_lattice(model, K=cfg.horizon)
        bad = [r for r in table.rows if not r.passed]
        failed += bool(bad)
        worst = max((r.residual / r.threshold for r in table.rows
                     if not r.skipped and r.threshold > 0), default=0.0)
        print(f"model {i:2d}  N={model.n_phases} M={model.max_jump}  "
              f"{'defective' if model.is_defective else 'conservative':12s}  "
              f"checks={len(table.rows):2d}  worst residual/threshold={worst:.2e}  "
              f"{'ok' if not bad else 'FAIL'}")
        if cfg.verbose or bad:
            for r in table.rows:
                print(f"    {r.as_dict()}")
    print(f"{cfg.count - failed}/{cfg.count} models pass, {time.perf_counter() - start:.1f} s")
    return failed == 0


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=SuiteConfig.count)
    p.add_argument("--seed", type=int, default=SuiteConfig.seed)
    p.add_argument("--horizon", type=int, default=SuiteConfig.horizon)
    p.add_argument("--verbose", action="store_true")
    a = p.parse_args()
    raise SystemExit(0 if run(SuiteConfig(a.count, a.seed, a.horizon, a.verbose)) else 1)


if __name__ == "__main__":
    main()
