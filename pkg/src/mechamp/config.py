"""Scenario configuration: flat key/value text with dotted sections.

Format (versioned, `schema = 1` required)::

    schema = 1
    scenario = fig3_g2_sweep
    out_dir = out/fig3
    run.threads = 1
    model.g = 0.1
    sweep.db = 20, 30

'#' starts a comment.  Unknown keys are errors.  Values are typed per the
scenario schema: int, float, bool, str, or list-of-float ("floats").
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ConfigError

SCENARIO_IDS = (
    "fig2_td",
    "fig3_g2_sweep",
    "fig4_wigner_protocol",
    "figS1_gaussian_compare",
    "figS2_decay",
    "figS3_squeezed_cavity",
    "analytics_tables",
    "validate",
)

# key -> (type, default); None default means required
COMMON_KEYS = {
    "schema": ("int", None),
    "scenario": ("str", None),
    "out_dir": ("str", "out"),
    "run.threads": ("int", 0),  # 0 -> MECHAMP_THREADS env or 1
    "run.truncation_check": ("bool", True),
    "run.rtol": ("float", 1e-8),
    "run.atol": ("float", 1e-10),
}

SCENARIO_KEYS: dict[str, dict] = {
    "fig2_td": {
        "model.amplification_db": ("float", 20.0),
        "model.gamma_over_e_beta": ("float", 1e-4),
        "model.n_th": ("float", 0.0),
        "pulse.tau_on_e_beta": ("float", 0.1),  # units 1/E_beta
        "pulse.shape": ("str", "gaussian"),
        "run.t_end_e_beta": ("float", 0.2),
        "dims.mech_td": ("int", 40),
        "dims.mech_sudden": ("int", 300),
    },
    "fig3_g2_sweep": {
        "sweep.g": ("floats", [0.1]),
        "sweep.db": ("floats", [20.0]),
        "model.eps": ("float", 0.01),
        "model.gamma_beta": ("float", 0.001),
        "model.keep_h_prime": ("bool", False),
        "dims.photon": ("int", 5),
        "dims.anti": ("int", 3),
        "dims.mech": ("int", 12),
        "opt.maxiter": ("int", 80),
        "opt.fatol": ("float", 1e-3),
        "opt.seed_scan": ("bool", True),
    },
    "fig4_wigner_protocol": {
        # the reported observables (min W, fidelity) need ~1e-3 accuracy, so
        # the integrator runs at looser tolerances than the library default
        "run.rtol": ("float", 1e-6),
        "run.atol": ("float", 1e-9),
        "model.g": ("float", 0.3),
        "model.amplification_db": ("float", 30.0),
        "model.e_beta_over_gtilde": ("float", 2.0),
        "model.gamma": ("float", 1e-4),
        "model.n_th": ("float", 0.5),
        "model.alpha1": ("float", 1.0),
        "pulse.tau_on_frac": ("float", 0.0025),  # fraction of tau_int (1/400)
        "decay.delta_mech": ("float", 40.0),
        "decay.t_end": ("float", 0.0),  # 0 -> skip the decay phase
        "decay.n_samples": ("int", 16),
        "dims.cav1": ("int", 8),
        "dims.cav2": ("int", 6),
        "dims.mech": ("int", 11),
        "wigner.extent": ("float", 3.6),
        "wigner.points": ("int", 61),
    },
    "figS2_decay": {
        "run.rtol": ("float", 1e-6),
        "run.atol": ("float", 1e-9),
        "model.g": ("float", 0.3),
        "model.amplification_db": ("float", 30.0),
        "model.e_beta_over_gtilde": ("float", 2.0),
        "model.gamma": ("float", 1e-4),
        "model.n_th": ("float", 0.5),
        "model.alpha1": ("float", 1.0),
        "pulse.tau_on_frac": ("float", 0.0025),
        "decay.delta_mech": ("float", 40.0),
        "decay.t_end": ("float", 4.0),
        "decay.n_samples": ("int", 16),
        "dims.cav1": ("int", 8),
        "dims.cav2": ("int", 6),
        "dims.mech": ("int", 10),
    },
    "figS1_gaussian_compare": {
        "sweep.g": ("floats", [0.01, 0.05, 0.1, 0.2, 0.3, 0.5]),
        "model.amplification_db": ("float", 20.0),
        "model.eps": ("float", 0.01),
        "model.gamma_beta": ("float", 0.001),
        "dims.photon": ("int", 5),
        "dims.mech": ("int", 12),
        "opt.maxiter": ("int", 80),
        "opt.fatol": ("float", 1e-3),
    },
    "figS3_squeezed_cavity": {
        "sweep.g": ("floats", [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0]),
        "model.amplification_db": ("float", 15.0),
        "model.omega_m": ("float", 50.0),
        "model.eps": ("float", 0.001),
        "model.gamma": ("float", 1e-4),
        "dims.alpha": ("int", 8),
        "dims.mech": ("int", 8),
    },
    "analytics_tables": {
        "model.amplification_db": ("float", 20.0),
        "model.g": ("float", 0.1),
        "model.gamma": ("float", 1e-3),
        "model.n_th": ("float", 0.5),
        "model.e_beta": ("float", 1.0),
        "grid.omega_max_e_beta": ("float", 3.0),
        "grid.points": ("int", 601),
    },
    "validate": {},
}


@dataclass
class RunConfig:
    scenario: str
    values: dict
    out_dir: str
    threads: int
    raw: dict

    def __getitem__(self, key):
        return self.values[key]


def _parse_value(kind: str, text: str, key: str):
    text = text.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind == "floats":
            items = [p for p in text.split(",") if p.strip()]
            if not items:
                raise ValueError("empty list")
            return [float(p) for p in items]
        return text
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {text!r} as {kind}") from exc


def parse_config_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def resolve_config(
    raw: dict, overrides: dict | None = None, out_dir: str | None = None, threads: int | None = None
) -> RunConfig:
    raw = dict(raw)
    for k, v in (overrides or {}).items():
        raw[k] = v
    if "schema" not in raw:
        raise ConfigError("missing required key 'schema'")
    if _parse_value("int", raw["schema"], "schema") != 1:
        raise ConfigError(f"unsupported schema version {raw['schema']!r}")
    if "scenario" not in raw:
        raise ConfigError("missing required key 'scenario'")
    scenario = raw["scenario"].strip()
    if scenario not in SCENARIO_IDS:
        raise ConfigError(f"unknown scenario {scenario!r}; valid: {', '.join(SCENARIO_IDS)}")
    schema = dict(COMMON_KEYS)
    schema.update(SCENARIO_KEYS[scenario])
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for scenario {scenario}: {', '.join(unknown)}")
    values = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            values[key] = _parse_value(kind, raw[key], key)
        elif default is None:
            raise ConfigError(f"missing required key {key!r}")
        else:
            values[key] = default
    resolved_threads = threads if threads is not None else values["run.threads"]
    if resolved_threads == 0:
        resolved_threads = int(os.environ.get("MECHAMP_THREADS", "1"))
    if resolved_threads < 1:
        raise ConfigError("thread count must be >= 1")
    resolved_out = out_dir if out_dir is not None else values["out_dir"]
    return RunConfig(
        scenario=scenario,
        values=values,
        out_dir=resolved_out,
        threads=resolved_threads,
        raw=raw,
    )


def load_config(path: str, overrides=None, out_dir=None, threads=None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return resolve_config(parse_config_text(text), overrides, out_dir, threads)
