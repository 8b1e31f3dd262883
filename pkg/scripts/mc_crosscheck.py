"""Analytic values against lattice Monte Carlo on the benchmark models."""

import argparse
import time
from dataclasses import dataclass

from mapfluct import zoo
from mapfluct.benchmarks import lattice_comparisons


@dataclass
class CrossCheckConfig:
    n_paths: int = 10**6
    seed: int = 2024
    models: tuple = tuple(zoo.mc_models())


def run(cfg):
    models = zoo.mc_models()
    all_ok = True
    for name in cfg.models:
        start = time.perf_counter()
        comps = lattice_comparisons(name, models[name], cfg.n_paths, cfg.seed)
        for c in comps:
            print(c.line(), "" if c.passed else "  <-- outside 4 se")
            all_ok &= c.passed
        print(f"{name}: {time.perf_counter() - start:.1f} s")
    return all_ok


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--paths", type=int, default=CrossCheckConfig.n_paths)
    p.add_argument("--seed", type=int, default=CrossCheckConfig.seed)
    p.add_argument("--model", action="append", choices=sorted(zoo.mc_models()))
    a = p.parse_args()
    cfg = CrossCheckConfig(a.paths, a.seed, tuple(a.model) if a.model else CrossCheckConfig.models)
    raise SystemExit(0 if run(cfg) else 1)


if __name__ == "__main__":
    main()
