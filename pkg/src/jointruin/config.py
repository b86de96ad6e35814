"""Experiment configuration: loading, defaults, validation and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .claims import ClaimDistribution, claim_from_spec
from .model import ModelParams

FINITE_KINDS = ("psi1", "psi2", "min", "both_events", "max_simultaneous")

DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "output": {"dir": "out"},
    "simulate": {"n": 1000, "kinds": list(FINITE_KINDS), "dump_paths": 1},
    "solve": {
        "s": 0.5, "kind": "min", "n_core": 41, "vmax": 12.0, "tol": 1e-3, "max_iter": 500, "h": None,
        "boundary_n": 1_000_000, "probes": [], "probe_n": 1_000_000, "bias_budget": 1e-6,
        "closure_shape": [9, 13], "resume": None,
    },
    "asymptotics": {"kind": "min", "n": 100_000, "budget": None, "threshold": 0.1},
}

# keys that change where or how fast a run happens but not its data
_UNHASHED = ("workers", "output")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    raw: dict
    source: str | None = None
    errors: list = field(default_factory=list)

    @property
    def params(self) -> ModelParams:
        return ModelParams(**{k: float(v) for k, v in self.raw["model"].items()})

    @property
    def claim(self) -> ClaimDistribution:
        return claim_from_spec(self.raw["claim"])

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def workers(self) -> int:
        return int(self.raw["workers"])

    def section(self, name: str) -> dict:
        return self.raw.get(name) or {}

    def canonical(self) -> dict:
        return {k: v for k, v in self.raw.items() if k not in _UNHASHED}

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path, seed: int | None = None, workers: int | None = None) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return from_dict(data, seed, workers, source=str(path))


def from_dict(data: dict, seed: int | None = None, workers: int | None = None, source=None) -> ExperimentConfig:
    raw = _merge(DEFAULTS, {k: v for k, v in data.items() if k not in ("simulate", "solve", "asymptotics")})
    for name in ("simulate", "solve", "asymptotics"):
        if name in data:
            raw[name] = _merge(DEFAULTS.get(name, {}), data[name])
        else:
            raw.pop(name, None)
    if seed is not None:
        raw["seed"] = int(seed)
    if workers is not None:
        raw["workers"] = int(workers)
    cfg = ExperimentConfig(raw, source)
    cfg.errors = validate_config(cfg)
    return cfg


def _positive(errors, where, value, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value) and value > 0
    if ok and integer and int(value) != value:
        ok = False
    if not ok:
        errors.append(f"{where} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return ok


def validate_config(cfg: ExperimentConfig) -> list[str]:
    errors = []
    raw = cfg.raw
    model = raw.get("model")
    need = ("r", "lam", "c1", "c2", "delta1", "delta2")
    if not isinstance(model, dict) or any(k not in model for k in need):
        errors.append(f"model section needs keys {', '.join(need)}")
    else:
        extra = set(model) - set(need)
        if extra:
            errors.append(f"unknown model keys: {sorted(extra)}")
        else:
            try:
                errors += [f"model: {v.message}" for v in cfg.params.violations()]
            except (TypeError, ValueError) as exc:
                errors.append(f"model: {exc}")
    try:
        cfg.claim
    except Exception as exc:  # claim constructors raise several types
        errors.append(f"claim: {exc}")
    if not isinstance(raw.get("seed"), int) or raw["seed"] < 0:
        errors.append("seed must be a non-negative integer")
    _positive(errors, "workers", raw.get("workers"), integer=True)

    if "simulate" in raw:
        sim = raw["simulate"]
        res = sim.get("reserves")
        if not res or not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in res):
            errors.append("simulate.reserves must be a list of [u1, u2] pairs")
        else:
            for p in res:
                if not all(isinstance(x, (int, float)) and x >= 0 for x in p):
                    errors.append(f"simulate.reserves entries must be non-negative, got {p}")
        Ts = sim.get("T")
        Ts = Ts if isinstance(Ts, list) else [Ts]
        for T in Ts:
            _positive(errors, "simulate.T", T)
        _positive(errors, "simulate.n", sim.get("n"), integer=True)
        bad = [k for k in sim.get("kinds", []) if k not in FINITE_KINDS]
        if bad:
            errors.append(f"simulate.kinds: unknown {bad}")
        if not isinstance(sim.get("dump_paths"), int) or sim["dump_paths"] < 0:
            errors.append("simulate.dump_paths must be a non-negative integer")

    if "solve" in raw:
        sv = raw["solve"]
        _positive(errors, "solve.s", sv.get("s"))
        _positive(errors, "solve.vmax", sv.get("vmax"))
        _positive(errors, "solve.max_iter", sv.get("max_iter"), integer=True)
        if not (isinstance(sv.get("n_core"), int) and sv["n_core"] >= 3):
            errors.append("solve.n_core must be an integer >= 3")
        if sv.get("kind") not in ("min", "max"):
            errors.append("solve.kind must be 'min' or 'max'")
        if sv.get("h") is not None:
            _positive(errors, "solve.h", sv["h"])
        _positive(errors, "solve.bias_budget", sv.get("bias_budget"))
        if _positive(errors, "solve.tol", sv.get("tol")) & _positive(
                errors, "solve.boundary_n", sv.get("boundary_n"), integer=True):
            # a mean of [0, 1] values has standard deviation at most 1/2
            worst = 0.5 / math.sqrt(sv["boundary_n"])
            if worst > sv["tol"]:
                errors.append(
                    f"solve.tol {sv['tol']} must dominate the boundary standard error "
                    f"(up to {worst:.2e} with boundary_n={sv['boundary_n']})"
                )
        _positive(errors, "solve.probe_n", sv.get("probe_n"), integer=True)
        probes = sv.get("probes") or []
        if not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in probes):
            errors.append("solve.probes must be a list of [u1, u2] pairs")

    if "asymptotics" in raw:
        asy = raw["asymptotics"]
        _positive(errors, "asymptotics.T", asy.get("T"))
        _positive(errors, "asymptotics.n", asy.get("n"), integer=True)
        if asy.get("budget") is not None:
            _positive(errors, "asymptotics.budget", asy["budget"], integer=True)
        xs = asy.get("x")
        if not isinstance(xs, list) or not xs:
            errors.append("asymptotics.x must be a non-empty list")
        else:
            keys = [tuple(x) if isinstance(x, (list, tuple)) else (x, x) for x in xs]
            if any(b <= a for a, b in zip(keys, keys[1:])):
                errors.append("asymptotics.x must be increasing")
        if asy.get("kind") not in ("min", "max", "max_simultaneous", "psi1", "psi2"):
            errors.append("asymptotics.kind must be min, max_simultaneous, psi1 or psi2")
    return errors
