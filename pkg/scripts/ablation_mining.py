"""Drop one hypothesis at a time and mine for counterexamples.

Each row says whether some seed in the budget keeps every other hypothesis
yet breaks the conclusion (no convergence, or two different limits).

    python3 scripts/ablation_mining.py --budget 5000 --workers 4
"""

import argparse
import time
from dataclasses import dataclass, field

from relfix import jsonio
from relfix.oracle import DROPS, GeneratorParams, counterexample_mine


@dataclass
class AblationConfig:
    budget: int = 2000
    workers: int = 1
    seed: int = 0
    # generator settings under which each drop is most likely to bite
    settings: dict = field(default_factory=lambda: {
        "transitivity": GeneratorParams(n=4, relation_mode="random", map_mode="unconstrained",
                                        relation_density=0.4),
        "monotonicity-b": GeneratorParams(n=3, map_mode="unconstrained", relation_mode="random"),
        "limit-comparability-c": GeneratorParams(n=4, relation_mode="random",
                                                 relation_density=0.3),
        "contraction-d": GeneratorParams(n=2, map_mode="unconstrained"),
        "condition-e": GeneratorParams(relation_mode="components", metric_mode="geometric-1d",
                                       epsilon_mode="chainable"),
        "none": GeneratorParams(relation_mode="components", metric_mode="geometric-1d",
                                epsilon_mode="chainable"),
    })


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=AblationConfig.budget)
    ap.add_argument("--workers", type=int, default=AblationConfig.workers)
    ap.add_argument("--seed", type=int, default=AblationConfig.seed)
    ap.add_argument("--json", help="write all mining reports to this file")
    args = ap.parse_args()
    cfg = AblationConfig(args.budget, args.workers, args.seed)
    reports = {}
    for drop in DROPS:
        params = cfg.settings[drop]
        params = GeneratorParams(**{**params.__dict__, "seed": cfg.seed})
        t = time.perf_counter()
        rep = counterexample_mine(params, drop, cfg.budget, cfg.workers)
        reports[drop] = rep.to_json()
        outcome = f"found at seed {rep.seed} ({rep.witness['kind']})" if rep.found else "exhausted"
        print(f"{drop:<24} {outcome:<40} {time.perf_counter() - t:6.1f} s")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(jsonio.dumps(reports))


if __name__ == "__main__":
    main()
