"""Two-qubit gate counts for preparing a random stabilizer state against compiling the whole Clifford."""
from dataclasses import dataclass

import numpy as np

from _common import config_from_argv, prepare_out, write_rows
from directrb.clifford import uniform_random
from directrb.connectivity import Connectivity
from directrb.stabilizer import StabilizerState, compile_state_prep, compile_unitary


@dataclass
class Fig7Config:
    n_min: int = 1
    n_max: int = 16
    samples: int = 100
    connectivity: str = "all_to_all"
    seed: int = 7
    out_dir: str = "results/fig7"


def main(argv=None):
    cfg = config_from_argv(Fig7Config, argv)
    out = prepare_out(cfg)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        conn = getattr(Connectivity, cfg.connectivity)(n)
        cs = [uniform_random(n, rng) for _ in range(cfg.samples)]
        cond = np.mean([compile_state_prep(StabilizerState.from_clifford(c), conn).twoq_count for c in cs])
        full = np.mean([compile_unitary(c, conn).twoq_count for c in cs])
        rows.append((n, cond, full))
        print(f"n={n:<3d} conditional {cond:7.1f}  unconditional {full:7.1f}")
    write_rows(out / "twoq_counts.csv", ["n", "conditional", "unconditional"], rows)


if __name__ == "__main__":
    main()
