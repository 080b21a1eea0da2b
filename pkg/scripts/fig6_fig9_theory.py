"""Spectra of the X90/Y90 superoperator pair and predicted against exact rates for random models."""
import json
from dataclasses import dataclass

import numpy as np

from _common import config_from_argv, prepare_out, write_rows
from directrb.circuit import Gate
from directrb.noise import sample_markovian_model
from directrb.superop import ptm_of_unitary
from directrb.theory import NoisyGateSet, build_lmatrix, r_gamma, r_omega_exact


@dataclass
class TheoryConfig:
    over_rotation: float = 0.1
    models: int = 200
    eps_min: float = 0.001
    eps_max: float = 0.01
    seed: int = 6
    out_dir: str = "results/theory"


LAYERS = [(Gate("X90", (0,)),), (Gate("Y90", (0,)),)]


def spectra(cfg):
    ideal = [ptm_of_unitary(Gate(a, (0,), (np.pi / 2,))).m for a in "XY"]
    rotated = [ptm_of_unitary(Gate(a, (0,), (np.pi / 2 + cfg.over_rotation,))).m for a in "XY"]
    out = {}
    for name, noisy in (("perfect", ideal), ("over_rotated", rotated)):
        l = build_lmatrix(NoisyGateSet(1, ideal, noisy, [0.5, 0.5]))
        out[name] = {"eigenvalues": [[float(z.real), float(z.imag)] for z in l.values],
                     "upper_gap": l.upper_gap}
        print(f"{name:13s} moduli {np.round(l.moduli[:4], 4)} upper gap {l.upper_gap:.4f}")
    return out


def main(argv=None):
    cfg = config_from_argv(TheoryConfig, argv)
    out = prepare_out(cfg)
    (out / "spectra.json").write_text(json.dumps(spectra(cfg), indent=2))
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(cfg.models):
        eps = float(rng.uniform(cfg.eps_min, cfg.eps_max))
        gs = NoisyGateSet.from_layers(LAYERS, [0.5, 0.5], sample_markovian_model(eps, rng))
        rg = r_gamma(build_lmatrix(gs))
        ro = r_omega_exact(gs)[0]
        rows.append((i, eps, ro, rg, (rg - ro) / ro))
    rel = np.array([r[-1] for r in rows])
    print(f"{cfg.models} models: max |r_gamma - r_Omega|/r_Omega = {np.max(np.abs(rel)):.2e}")
    write_rows(out / "rate_prediction.csv", ["model", "epsilon", "r_omega", "r_gamma", "relative_difference"], rows)


if __name__ == "__main__":
    main()
