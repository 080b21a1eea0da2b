"""Error spreading under random layers: mean weight and the delocalization depth."""
from dataclasses import dataclass

import numpy as np

from _common import config_from_argv, prepare_out, write_rows
from directrb.connectivity import Connectivity
from directrb.scramble import k_delocal, propagate_weight_stats


@dataclass
class Fig4Config:
    # even sizes: an odd ring has no two-colour edge partition
    ns: tuple = (6, 10, 20, 30)
    connectivities: tuple = ("ring", "all_to_all")
    k_max: int = 60
    trials: int = 20000
    delta: float = 0.05
    seed: int = 4
    out_dir: str = "results/fig4"


def main(argv=None):
    cfg = config_from_argv(Fig4Config, argv)
    out = prepare_out(cfg)
    rows, summary = [], []
    for cname in cfg.connectivities:
        for n in cfg.ns:
            conn = getattr(Connectivity, cname)(n)
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(n,)))
            rep = propagate_weight_stats(conn, cfg.k_max, cfg.trials, rng, correlated=cname == "ring")
            for j, k in enumerate(rep.ks):
                rows.append((cname, n, int(k), rep.mean_weight[j], *rep.K[:, j]))
            try:
                kd = k_delocal(rep, cfg.delta)
            except ValueError:
                kd = None
            summary.append((cname, n, kd))
            print(f"{cname:10s} n={n:<3d} E[W] at k_max {rep.mean_weight[-1]:.2f} (3n/4 = {0.75 * n:.2f}), "
                  f"k_delocal = {kd}")
    write_rows(out / "weights.csv", ["connectivity", "n", "k", "mean_weight", "K1", "K2", "K3"], rows)
    write_rows(out / "k_delocal.csv", ["connectivity", "n", "k_delocal"], summary)


if __name__ == "__main__":
    main()
