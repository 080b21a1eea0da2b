"""Shared plumbing for the experiment scripts: dataclass configs become CLI flags."""
import argparse
import csv
import dataclasses
import json
from pathlib import Path


def _parse_value(text, default):
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, (list, tuple)):
        kind = type(default[0]) if default else float
        return tuple(kind(v) for v in text.split(","))
    return type(default)(text)


def config_from_argv(cls, argv=None, description=None):
    """Build a ``cls`` instance, letting ``--field value`` override each default."""
    p = argparse.ArgumentParser(description=description or cls.__doc__)
    defaults = cls()
    for f in dataclasses.fields(cls):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                       help=f"default: {getattr(defaults, f.name)!r}")
    args = p.parse_args(argv)
    kw = {}
    for f in dataclasses.fields(cls):
        raw = getattr(args, f.name)
        if raw is not None:
            kw[f.name] = _parse_value(raw, getattr(defaults, f.name))
    return cls(**kw)


def prepare_out(cfg) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(dataclasses.asdict(cfg), indent=2, default=list))
    return out


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
