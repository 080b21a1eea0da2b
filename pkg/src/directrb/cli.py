"""Command-line front end.

Every command reads one experiment config (YAML, or JSON which YAML also
parses), writes its outputs under ``output.dir`` and stamps each file with
the output schema version and a hash of the validated config.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import analysis, designs, engine, noise, protocol, scramble, theory
from .circuit import Gate, gate_unitary
from .clifford import single_qubit_table
from .connectivity import Connectivity
from .sampling import SamplerError, SamplingDistribution
from .superop import ptm_from_unitary, ptm_of_clifford

OUTPUT_SCHEMA = "directrb.output/1"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration schema

@dataclass
class SamplerConfig:
    kind: str = "edge_grab"
    xi_bar: float | None = None
    pool: str | None = None
    family: str | None = None
    correlated: bool | None = None
    twoq_gate: str | None = None
    directed: bool | None = None
    layers: list | None = None  # custom_weighted: list of layers, each a list of gate names or {name, qubits}
    weights: list | None = None


@dataclass
class DesignConfig:
    protocol: str = "direct"
    depths: list = field(default_factory=lambda: list(protocol.DEFAULT_DEPTHS))
    K_d: int = 30
    N: int = 40
    randomize_target: bool = True
    sp_compilation: str = "conditional"


@dataclass
class ModelConfig:
    kind: str = "perfect"
    lam: float | None = None
    rate: float | None = None
    rates: list | None = None
    omega1: float | None = None
    epsilon: float | None = None
    q: float | None = None
    rate_table: str | None = None
    sspam_mode: str = "perfect"
    readout_flip: float = 0.0


@dataclass
class RunConfig:
    mode: str = "monte_carlo"
    threads: int = 1
    bookkeeping: bool = False


@dataclass
class AnalysisConfig:
    fix_A: bool = False
    resamples: int = analysis.DEFAULT_RESAMPLES
    weighted: bool = True


@dataclass
class TheoryConfig:
    gates: list = field(default_factory=lambda: ["X90", "Y90"])
    weights: list | None = None
    exact: bool = True
    depths: list | None = None


@dataclass
class ScrambleConfig:
    k_max: int = 20
    trials: int = scramble.DEFAULT_TRIALS
    correlated: bool = False
    delta: float = 0.05
    epsilon: float | None = None
    w: int = 3


@dataclass
class DesignCheckConfig:
    mode: str = "sequence"  # "group" for a finite group, "sequence" for the spectral test
    gates: list = field(default_factory=lambda: ["clifford_group"])
    weights: list | None = None
    k: int | None = None


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class ExperimentConfig:
    seed: int
    n: int = 1
    connectivity: Any = "all_to_all"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    design: DesignConfig = field(default_factory=DesignConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    run: RunConfig = field(default_factory=RunConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    theory: TheoryConfig = field(default_factory=TheoryConfig)
    scramble: ScrambleConfig = field(default_factory=ScrambleConfig)
    designcheck: DesignCheckConfig = field(default_factory=DesignCheckConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        return protocol.canonical_hash(self.to_json())


_SECTIONS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_SECTION_CLASSES = {"sampler": SamplerConfig, "design": DesignConfig, "model": ModelConfig, "run": RunConfig,
                    "analysis": AnalysisConfig, "theory": TheoryConfig, "scramble": ScrambleConfig,
                    "designcheck": DesignCheckConfig, "output": OutputConfig}
_SCALAR_TYPES = {"int": int, "float": (int, float), "bool": bool, "str": str}


def _type_ok(value, annotation: str) -> bool:
    if value is None:
        return "None" in annotation
    for name, typ in _SCALAR_TYPES.items():
        if annotation.startswith(name):
            if name in ("int", "float") and isinstance(value, bool):
                return False
            return isinstance(value, typ)
    if annotation.startswith("list"):
        return isinstance(value, list)
    return True


def _build_section(cls, node, source: str, where: str):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{source}:{node.start_mark.line + 1}: section '{where}' must be a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    values = {}
    for key_node, val_node in node.value:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key not in known:
            raise ConfigError(f"{source}:{line}: unknown key '{key}' in section '{where}' "
                              f"(allowed: {', '.join(sorted(known))})")
        value = yaml.safe_load(yaml.serialize(val_node))
        if not _type_ok(value, str(known[key].type)):
            raise ConfigError(f"{source}:{line}: '{where}.{key}' has the wrong type ({type(value).__name__})")
        values[key] = value
    return cls(**values)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Validate a YAML/JSON config; errors name the offending line."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if root is None or not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{source}:1: config must be a mapping with at least a 'seed' key")
    values: dict = {}
    for key_node, val_node in root.value:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key not in _SECTIONS:
            raise ConfigError(f"{source}:{line}: unknown top-level key '{key}' "
                              f"(allowed: {', '.join(sorted(_SECTIONS))})")
        if key in _SECTION_CLASSES:
            values[key] = _build_section(_SECTION_CLASSES[key], val_node, source, key)
        else:
            value = yaml.safe_load(yaml.serialize(val_node))
            if key in ("seed", "n") and (not isinstance(value, int) or isinstance(value, bool)):
                raise ConfigError(f"{source}:{line}: '{key}' must be an integer")
            values[key] = value
    if "seed" not in values:
        raise ConfigError(f"{source}:1: 'seed' is mandatory")
    cfg = ExperimentConfig(**values)
    _check_semantics(cfg, source)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, str(path))


def _check_semantics(cfg: ExperimentConfig, source: str) -> None:
    def bad(msg):
        raise ConfigError(f"{source}: {msg}")

    if cfg.n < 1:
        bad("n must be positive")
    if cfg.design.protocol not in ("direct", "clifford"):
        bad("design.protocol must be 'direct' or 'clifford'")
    if cfg.run.mode not in ("monte_carlo", "exact", "rmatrix"):
        bad("run.mode must be monte_carlo, exact or rmatrix")
    if cfg.run.threads < 1:
        bad("run.threads must be at least 1")
    if cfg.model.kind not in noise.KINDS + ("perfect", "random_stochastic", "random_markovian"):
        bad(f"unknown model kind {cfg.model.kind!r}")
    xi = cfg.sampler.xi_bar
    if xi is not None and not (0 <= xi <= 1):
        bad(f"sampler.xi_bar = {xi} must lie in [0, 1]")
    if xi and cfg.n < 2:
        bad(f"sampler.xi_bar = {xi} needs at least two qubits; use 0 on one qubit")
    if cfg.designcheck.mode not in ("group", "sequence"):
        bad("designcheck.mode must be 'group' or 'sequence'")


# ---------------------------------------------------------------------------
# building domain objects

def _gate_from(obj, default_qubit: int = 0) -> Gate:
    if isinstance(obj, str):
        return Gate(obj, (default_qubit,))
    return Gate(obj["name"], tuple(obj.get("qubits", (default_qubit,))), tuple(obj.get("params", ())))


def build_connectivity(cfg: ExperimentConfig) -> Connectivity:
    return Connectivity.from_spec(cfg.connectivity, cfg.n)


def build_sampler(cfg: ExperimentConfig) -> SamplingDistribution:
    s = cfg.sampler
    params = {k: v for k, v in dataclasses.asdict(s).items() if k != "kind" and v is not None}
    if s.kind == "edge_grab" and "xi_bar" not in params:
        params["xi_bar"] = 0.25 if cfg.n > 1 else 0.0
    if s.kind == "custom_weighted":
        if not s.layers:
            raise ConfigError("custom_weighted sampler needs 'layers'")
        layers = [tuple(_gate_from(g) for g in (layer if isinstance(layer, list) else [layer]))
                  for layer in s.layers]
        weights = s.weights or [1.0 / len(layers)] * len(layers)
        params = {"layers": layers, "weights": weights}
    return SamplingDistribution(s.kind, params)


def build_model(cfg: ExperimentConfig, rng: np.random.Generator | None = None,
                gate_names: list | None = None) -> noise.ErrorModel:
    """``gate_names`` overrides the gates a random Markovian model covers (default: the sampler's)."""
    m = cfg.model
    n = cfg.n
    rng = rng if rng is not None else np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))

    def need(name):
        v = getattr(m, name)
        if v is None:
            raise ConfigError(f"model kind {m.kind} needs '{name}'")
        return v

    if m.kind == "perfect":
        model = noise.local_depolarizing(n, 0.0)
    elif m.kind == "global_depolarizing":
        model = noise.global_depolarizing(n, need("lam"))
    elif m.kind == "local_depolarizing":
        model = noise.local_depolarizing(n, need("rate"))
    elif m.kind == "weighted_local":
        if m.rates is not None:
            model = noise.ErrorModel("weighted_local", n, {"rates": m.rates})
        else:
            model = noise.weighted_local(noise.WeightProfile.from_omega1(need("omega1"), n, need("epsilon")))
    elif m.kind == "stochastic_pauli":
        model = noise.ErrorModel("stochastic_pauli", n, {"table": noise.load_rate_table(need("rate_table"))})
    elif m.kind == "random_stochastic":
        model = noise.sample_stochastic_pauli_model(n, build_connectivity(cfg).edges, need("q"), rng)
    elif m.kind == "random_markovian":
        if n != 1:
            raise ConfigError("random_markovian models are single-qubit")
        names = gate_names or sorted({g.name for layer, _ in build_sampler(cfg).enumerate(1) for g in layer})
        model = noise.sample_markovian_model(need("epsilon"), rng, names)
    else:
        raise ConfigError(f"model kind {m.kind} cannot be built from a config")
    return noise.ErrorModel(model.kind, model.n, model.params, m.sspam_mode, m.readout_flip)


def build_design(cfg: ExperimentConfig) -> protocol.ExperimentDesign:
    d = cfg.design
    return protocol.ExperimentDesign(cfg.n, d.depths, d.K_d, d.N, build_sampler(cfg), d.randomize_target,
                                     cfg.seed, d.sp_compilation)


def _ptm_of_entry(entry):
    """A gate-set entry: a gate name, ``Z(theta)`` for the rotation family, or a list applied left to right."""
    if entry == "Z(theta)":
        return designs.GateEntry("Z(theta)", family=lambda t: ptm_from_unitary(gate_unitary(Gate("Z", (0,), (t,)))))
    names = entry if isinstance(entry, list) else [entry]
    m = np.eye(4)
    for name in names:
        m = ptm_from_unitary(gate_unitary(_gate_from(name))) @ m
    return designs.GateEntry("*".join(map(str, names)), ptm=m)


# ---------------------------------------------------------------------------
# output helpers

def _stamp(cfg: ExperimentConfig, kind: str) -> dict:
    return {"output_schema": OUTPUT_SCHEMA, "kind": kind, "config_hash": cfg.hash()}


def _outdir(cfg: ExperimentConfig) -> Path:
    p = Path(cfg.output.dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, cfg: ExperimentConfig, kind: str, payload: dict) -> None:
    path.write_text(json.dumps({**_stamp(cfg, kind), **payload}, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _write_csv(path: Path, cfg: ExperimentConfig, kind: str, body: str) -> None:
    s = _stamp(cfg, kind)
    path.write_text(f"# output_schema={s['output_schema']} kind={kind} config_hash={s['config_hash']}\n" + body)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ---------------------------------------------------------------------------
# commands

def _generate(cfg: ExperimentConfig, proto: str | None = None) -> list:
    design = build_design(cfg)
    conn = build_connectivity(cfg)
    if (proto or cfg.design.protocol) == "clifford":
        return protocol.generate_clifford_rb(design, conn)
    return protocol.generate_direct_rb(design, conn)


def _suite_summary(circuits) -> dict:
    sp = [sum(g.is_two_qubit for layer in c.parts()[0] for g in layer) for c in circuits]
    mp = [sum(g.is_two_qubit for layer in c.parts()[2] for g in layer) for c in circuits]
    return {"circuits": len(circuits), "mean_sp_twoq": float(np.mean(sp)) if sp else 0.0,
            "mean_mp_twoq": float(np.mean(mp)) if mp else 0.0}


def cmd_generate(cfg: ExperimentConfig, out: Path | None = None, proto: str | None = None) -> Path:
    circuits = _generate(cfg, proto)
    path = out or _outdir(cfg) / "suite.jsonl"
    header = {"n": cfg.n, **_stamp(cfg, "suite"), "design": build_design(cfg).to_json(),
              "protocol": proto or cfg.design.protocol}
    protocol.write_suite(path, circuits, header)
    summary = _suite_summary(circuits)
    print(f"wrote {summary['circuits']} circuits to {path}; mean two-qubit gates: "
          f"preparation {summary['mean_sp_twoq']:.2f}, measurement {summary['mean_mp_twoq']:.2f}")
    return path


def _run_rmatrix(cfg: ExperimentConfig, model: noise.ErrorModel) -> protocol.RbDataset:
    if cfg.n != 1:
        raise ConfigError("rmatrix mode is single-qubit")
    gs = theory.NoisyGateSet.from_sampler(build_sampler(cfg), model)
    depths = list(cfg.design.depths)
    sd = theory.exact_sd_rmatrix(gs, depths)
    recs = [{"id": f"d{d}", "d": int(d), "target": "0", "shots": 1, "successes": float(s)} for d, s in zip(depths, sd)]
    return protocol.RbDataset(1, recs, {"exact": True, "mode": "rmatrix"})


def cmd_run(cfg: ExperimentConfig, suite: Path | None = None, out: Path | None = None,
            threads: int | None = None) -> Path:
    model = build_model(cfg)
    threads = threads or cfg.run.threads
    path = out or _outdir(cfg) / "dataset.jsonl"
    if cfg.run.mode == "rmatrix":
        ds = _run_rmatrix(cfg, model)
    else:
        suite = suite or _outdir(cfg) / "suite.jsonl"
        if not Path(suite).exists():
            raise ConfigError(f"suite file {suite} does not exist; run 'generate' first")
        header, circuits = protocol.read_suite(suite)
        if int(header["n"]) != model.n:
            raise RuntimeError("model and suite act on different numbers of qubits")
        if cfg.run.mode == "exact":
            res = engine.run_exact(circuits, model)
        else:
            res = engine.run_unraveled(circuits, model, cfg.design.N, cfg.seed, cfg.run.bookkeeping, threads)
        ds = res.to_dataset()
    ds.metadata.update(model=model.kind, sspam_mode=model.sspam_mode)
    ds.save(path, _stamp(cfg, "dataset"))
    print(f"wrote {len(ds.records)} records to {path}")
    return path


def cmd_analyze(cfg: ExperimentConfig, dataset: Path | None = None, prefix: str = "fit") -> analysis.FitResult:
    ds = protocol.RbDataset.load(dataset or _outdir(cfg) / "dataset.jsonl")
    a = cfg.analysis
    groups = ds.by_depth()
    if all(len(s) >= 2 for s, _ in groups.values()) and a.resamples > 0:
        fit = analysis.bootstrap(ds, a.resamples, a.fix_A, cfg.seed, a.weighted)
    else:
        fit = analysis.fit_decay(ds, a.fix_A, a.weighted and not ds.metadata.get("exact"))
    od = _outdir(cfg)
    _write_json(od / f"{prefix}.json", cfg, "fit", fit.to_json())
    _write_csv(od / f"{prefix}_decay.csv", cfg, "decay", analysis.decay_table(fit))
    sig = f" +/- {fit.sigma_r:.3g}" if fit.sigma_r is not None else ""
    print(f"r = {fit.r:.6g}{sig}  (p = {fit.p:.8g}, A = {fit.A:.4g}, B = {fit.B:.4g})")
    return fit


def cmd_theory(cfg: ExperimentConfig) -> theory.TheoryReport:
    if cfg.n != 1:
        raise ConfigError("the theory command is single-qubit")
    t = cfg.theory
    layers = [tuple(_gate_from(g) for g in (e if isinstance(e, list) else [e])) for e in t.gates]
    weights = t.weights or [1.0 / len(layers)] * len(layers)
    names = sorted({g.name for layer in layers for g in layer})
    model = None if cfg.model.kind == "perfect" else build_model(cfg, gate_names=names)
    gs = theory.NoisyGateSet.from_layers(layers, weights, model, 1)
    rep = theory.theory_report(gs, with_exact=t.exact)
    _write_json(_outdir(cfg) / "theory.json", cfg, "theory", rep.to_json())
    print(f"gamma = {rep.gamma:.10g}  r_gamma = {rep.r_gamma:.6g}  upper gap = {rep.upper_gap:.6g}")
    if rep.r_omega is not None:
        print(f"r_Omega (exact curve) = {rep.r_omega:.6g}")
    return rep


def cmd_scramble(cfg: ExperimentConfig, threads: int | None = None) -> scramble.ScramblingReport:
    s = cfg.scramble
    conn = build_connectivity(cfg)
    rep = scramble.propagate_weight_stats(conn, s.k_max, s.trials, np.random.default_rng(cfg.seed), s.correlated)
    od = _outdir(cfg)
    _write_csv(od / "scramble.csv", cfg, "scramble", rep.to_csv())
    summary = rep.summary(s.delta, s.epsilon, s.w)
    _write_json(od / "scramble.json", cfg, "scramble_summary", summary)
    print(json.dumps(summary))
    return rep


def cmd_designcheck(cfg: ExperimentConfig) -> dict:
    dc = cfg.designcheck
    if cfg.n != 1:
        raise ConfigError("designcheck builds single-qubit gate sets")
    if dc.mode == "group":
        names = dc.gates
        if names == ["clifford_group"]:
            elems = [ptm_of_clifford(c) for c in single_qubit_table().elements]
        elif names == ["pauli_group"]:
            elems = [ptm_from_unitary(gate_unitary(Gate(p, (0,)))) for p in ("I", "X", "Y", "Z")]
        else:
            elems = designs.closure([_ptm_of_entry(e).ptm for e in names])
        verdict = designs.is_unitary_2design(elems, cfg.n)
        payload = verdict.to_json()
    else:
        entries = [_ptm_of_entry(e) for e in dc.gates]
        gs = designs.GateSet(cfg.n, entries)
        verdict = designs.is_sequence_asymptotic_2design(gs, dc.weights)
        payload = verdict.to_json()
        if dc.k is not None:
            pv, order = designs.sequence_power_check(gs, dc.weights, dc.k)
            payload["power_check"] = {"k": dc.k, "group_order": order, **pv.to_json()}
    _write_json(_outdir(cfg) / "designcheck.json", cfg, "designcheck", payload)
    print(f"verdict: {payload['verdict']}" + (f" ({payload['notes']})" if payload.get("notes") else ""))
    if "power_check" in payload:
        pc = payload["power_check"]
        print(f"length-{pc['k']} products generate a group of order {pc['group_order']}: 2-design {pc['verdict']}")
    return payload


def cmd_compare(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    od = _outdir(cfg)
    out = {}
    for proto in ("direct", "clifford"):
        suite = cmd_generate(cfg, od / f"suite_{proto}.jsonl", proto)
        ds = cmd_run(cfg, suite, od / f"dataset_{proto}.jsonl", threads)
        fit = cmd_analyze(cfg, ds, prefix=f"fit_{proto}")
        out[proto] = {"r": fit.r, "sigma_r": fit.sigma_r, "p": fit.p}
    _write_json(od / "compare.json", cfg, "compare", out)
    return out


def gnuplot_script(csv_path: Path) -> str:
    """A gnuplot script that plots the data columns of a CSV written by this tool."""
    header = [l for l in csv_path.read_text().splitlines() if l and not l.startswith("#")][0].split(",")
    name = csv_path.name
    lines = ["set datafile separator ','", "set key outside", f"set title '{csv_path.stem}'"]
    if header[:2] == ["d", "S_d"]:
        lines += ["set xlabel 'd'", "set ylabel 'success probability'",
                  f"plot '{name}' every ::1 using 1:2:3 with yerrorbars title 'mean', "
                  f"'' every ::1 using 1:4 with lines title 'fit'"]
    else:
        cols = [f"'{name}' every ::1 using 1:{i + 1} with linespoints title '{h}'"
                for i, h in enumerate(header[1:], start=1) if not h.endswith(("_se", "_upper"))]
        lines += [f"set xlabel '{header[0]}'", "plot " + ", ".join(cols)]
    return "\n".join(lines) + "\n"


def cmd_gnuplot(csv_path: Path) -> Path:
    if not csv_path.exists():
        raise ConfigError(f"{csv_path} does not exist")
    out = csv_path.with_suffix(".gp")
    out.write_text(gnuplot_script(csv_path))
    print(f"wrote {out}")
    return out


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="directrb", description="Direct randomized benchmarking toolkit")
    p.add_argument("--threads", type=int, default=None, help="cap on worker threads (results do not change)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("generate", "run", "analyze", "theory", "scramble", "designcheck", "compare"):
        sp = sub.add_parser(name)
        sp.add_argument("config", type=Path)
        sp.add_argument("--out-dir", type=Path, default=None, help="override output.dir")
        if name == "run":
            sp.add_argument("--suite", type=Path, default=None)
        if name == "analyze":
            sp.add_argument("--dataset", type=Path, default=None)
    g = sub.add_parser("gnuplot", help="emit a gnuplot script next to a CSV table")
    g.add_argument("csv", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gnuplot":
            cmd_gnuplot(args.csv)
            return EXIT_OK
        cfg = load_config(args.config)
        if args.out_dir is not None:
            cfg.output.dir = str(args.out_dir)
        if args.command == "generate":
            cmd_generate(cfg)
        elif args.command == "run":
            cmd_run(cfg, args.suite, threads=args.threads)
        elif args.command == "analyze":
            cmd_analyze(cfg, args.dataset)
        elif args.command == "theory":
            cmd_theory(cfg)
        elif args.command == "scramble":
            cmd_scramble(cfg, args.threads)
        elif args.command == "designcheck":
            cmd_designcheck(cfg)
        elif args.command == "compare":
            cmd_compare(cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SamplerError as exc:
        print(f"config error: sampler settings do not fit the connectivity: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced to the shell as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
