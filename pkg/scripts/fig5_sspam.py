"""Fitted direct RB rates with and without errors in state preparation and measurement."""
from dataclasses import dataclass

import numpy as np

from _common import config_from_argv, prepare_out, write_rows
from directrb.analysis import bootstrap
from directrb.connectivity import Connectivity
from directrb.engine import run_unraveled
from directrb.noise import sample_stochastic_pauli_model
from directrb.protocol import ExperimentDesign, generate_direct_rb
from directrb.sampling import SamplingDistribution


@dataclass
class Fig5Config:
    ns: tuple = (1, 2, 3)
    models_per_n: int = 120
    q_min: float = 0.004
    q_max: float = 0.024
    circuits_per_depth: int = 30
    shots: int = 40
    resamples: int = 100
    seed: int = 5
    out_dir: str = "results/fig5"


def main(argv=None):
    cfg = config_from_argv(Fig5Config, argv)
    out = prepare_out(cfg)
    rows = []
    for n in cfg.ns:
        conn = Connectivity.linear(n)
        omega = SamplingDistribution("edge_grab", {"xi_bar": 0.25 if n > 1 else 0.0, "pool": "x90_y90_i"})
        zs = []
        for i, q in enumerate(np.linspace(cfg.q_min, cfg.q_max, cfg.models_per_n)):
            ss = np.random.SeedSequence(cfg.seed, spawn_key=(n, i))
            rng = np.random.default_rng(ss)
            # one-qubit gates get a tenth of q; on a single qubit the gates carry q itself
            model = sample_stochastic_pauli_model(n, conn.edges, float(q) * (10 if n == 1 else 1), rng)
            design = ExperimentDesign(n, K_d=cfg.circuits_per_depth, N=cfg.shots, omega=omega,
                                      rng_seed=int(rng.integers(2 ** 31)))
            circs = generate_direct_rb(design, conn)
            fits = [bootstrap(run_unraveled(circs, m, cfg.shots, seed=int(rng.integers(2 ** 31))).to_dataset(),
                              cfg.resamples, fix_A=True, seed=i) for m in (model.with_sspam("noisy"), model)]
            noisy, clean = fits
            z = (noisy.r - clean.r) / np.hypot(noisy.sigma_r, clean.sigma_r)
            zs.append(z)
            rows.append((n, float(q), noisy.r, noisy.sigma_r, clean.r, clean.sigma_r, z))
        print(f"n={n}: mean delta/sigma {np.mean(zs):+.3f}, max |delta/sigma| {np.max(np.abs(zs)):.2f}")
    write_rows(out / "sspam.csv", ["n", "q", "r_noisy", "sigma_noisy", "r_perfect", "sigma_perfect", "z"], rows)


if __name__ == "__main__":
    main()
