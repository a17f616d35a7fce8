"""TOML experiment configuration: parsing, validation and object construction.

Units: exponents (L_N, kappa, c) are in nats, scales N and grid sizes K are
counts, energies E are in the units of the potential.  Every key is checked
against :data:`SCHEMA` before any computation starts; unknown keys are errors.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cocycle import QuadratureSpec
from .errors import InputError
from .freqlib import Frequency, construct_omega_eta
from .gevrey import GevreyFunction, MatrixFunction

JOBS = ("classify", "le", "ldt", "calibrate", "schedule", "twoscale", "extrapolate", "probe")

_num = (int, float)
_ratio = (int, float, str)

SCHEMA = {
    "": {"job": str, "seed": int, "frequency": dict, "cocycle": dict, "bundle": dict, "quadrature": dict,
         **{j: dict for j in JOBS}},
    "frequency": {"preset": str, "coeffs": list, "period": list, "label": str, "generator": dict},
    "frequency.generator": {"kind": str, "eta": _num, "C": _num, "depth": int, "seed": int, "max_bits": int,
                            "tail": list},
    "cocycle": {"kind": str, "E": _num, "lam": _num, "potential": list, "matrix": list, "entries": list,
                "s": _num, "rho": _num, "label": str},
    "bundle": {"s": _ratio, "eta": _ratio, "kappa": (int, float, str), "kappa_N_ref": int,
               "sigma_start": _ratio, "shrink": _ratio, "max_iter": int, "zeta": _ratio, "c": _ratio,
               "C1": _ratio, "C2": _ratio, "C0": _ratio, "eps": _ratio, "q0_min": int},
    "quadrature": {"K": int, "precision_bits": int},
    "classify": {"n": int, "eta": _num, "tau": _num, "C": _num},
    "le": {"Ns": list},
    "ldt": {"N": int, "kappa": _num, "q": int, "waive_window": bool, "method": str, "samples": int},
    "calibrate": {"q": list, "kappa": _num},
    "schedule": {"q0_index": (int, str), "depth": int, "N0": (int, str), "stop_on_failure": bool,
                 "max_index": int},
    "twoscale": {"N": int, "m": list, "q": int},
    "extrapolate": {"q0": list, "depth": (int, str), "max_N": int, "mesh_ratio": _num},
    "probe": {"E": (list, dict), "q0": int, "hs": list},
    "probe.E": {"start": _num, "stop": _num, "num": int},
}

COCYCLE_KINDS = ("schrodinger", "almost_mathieu", "constant", "rotation", "coeffs")
PRESETS = ("golden", "silver")


def _check(section: str, table: dict):
    allowed = SCHEMA[section]
    where = section or "top level"
    for k, v in table.items():
        if k not in allowed:
            raise InputError(f"unknown key {k!r} in [{where}]; allowed: {sorted(allowed)}")
        t = allowed[k]
        if isinstance(v, bool) and t is not bool and not (isinstance(t, tuple) and bool in t):
            raise InputError(f"[{where}] {k} must be {_tname(t)}, got a boolean")
        if not isinstance(v, t):
            raise InputError(f"[{where}] {k} must be {_tname(t)}, got {type(v).__name__}")
        sub = f"{section}.{k}" if section else k
        if isinstance(v, dict) and sub in SCHEMA:
            _check(sub, v)


def _tname(t) -> str:
    if isinstance(t, tuple):
        return " or ".join(x.__name__ for x in t)
    return t.__name__


@dataclass(frozen=True)
class ExperimentConfig:
    job: str
    raw: dict
    path: str = ""
    sha256: str = ""
    seed: int = 0
    overrides: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    # -- builders ----------------------------------------------------------

    def frequency(self) -> Frequency:
        return build_frequency(self.section("frequency"))

    def cocycle(self, E: float | None = None) -> MatrixFunction:
        return build_cocycle(self.section("cocycle"), E)

    def potential(self) -> GevreyFunction:
        return build_potential(self.section("cocycle"))

    def quadrature(self) -> QuadratureSpec:
        q = self.section("quadrature")
        K = self.overrides.get("grid") or q.get("K", 4096)
        kw = {"K": int(K), "threads": self.overrides.get("threads")}
        if "precision_bits" in q:
            kw["precision_bits"] = q["precision_bits"]
        return QuadratureSpec(**kw)


def load_config(path, job: str | None = None, threads: int | None = None, grid: int | None = None) -> ExperimentConfig:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}") from e
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"config {path} is not valid TOML: {e}") from e
    return parse_config(raw, job, threads, grid, str(p), hashlib.sha256(data).hexdigest())


def parse_config(raw: dict, job: str | None = None, threads: int | None = None, grid: int | None = None,
                 path: str = "", sha256: str = "") -> ExperimentConfig:
    _check("", raw)
    name = job or raw.get("job")
    if name is None:
        raise InputError("no job given (subcommand or top-level 'job' key)")
    if name not in JOBS:
        raise InputError(f"unknown job {name!r}; expected one of {JOBS}")
    if job and raw.get("job") not in (None, job):
        raise InputError(f"config job {raw['job']!r} disagrees with subcommand {job!r}")
    if threads is not None and threads < 1:
        raise InputError("--threads must be >= 1")
    cfg = ExperimentConfig(name, raw, path, sha256, int(raw.get("seed", 0)), {"threads": threads, "grid": grid})
    # validate builders up front so no computation starts on a bad config
    cfg.quadrature()
    if name != "classify" or "frequency" in raw:
        cfg.frequency()
    if name not in ("classify", "schedule"):
        cfg.cocycle(E=0.0 if name == "probe" else None)
    return cfg


def build_frequency(sec: dict) -> Frequency:
    chosen = [k for k in ("preset", "coeffs", "generator") if k in sec]
    if len(chosen) != 1:
        raise InputError(f"[frequency] needs exactly one of preset, coeffs, generator; got {chosen or 'none'}")
    label = sec.get("label", "")
    if "preset" in sec:
        name = sec["preset"]
        if name not in PRESETS:
            raise InputError(f"[frequency] preset must be one of {PRESETS}, got {name!r}")
        f = Frequency.golden() if name == "golden" else Frequency.silver()
    elif "coeffs" in sec:
        coeffs, period = sec["coeffs"], sec.get("period", [])
        if not all(isinstance(a, int) and a >= 1 for a in coeffs + period):
            raise InputError("[frequency] coefficients must be positive integers")
        f = Frequency.from_coeffs(coeffs, label or "coeffs", period)
    else:
        g = dict(sec["generator"])
        if g.pop("kind", "omega_eta") != "omega_eta":
            raise InputError("[frequency.generator] kind must be 'omega_eta'")
        for k in ("eta", "C", "depth"):
            if k not in g:
                raise InputError(f"[frequency.generator] missing {k}")
        if "tail" in g:
            g["tail"] = tuple(g["tail"])
        f = construct_omega_eta(**g)
    if label and f.label != label:
        import dataclasses

        f = dataclasses.replace(f, label=label)
    return f


def build_potential(sec: dict) -> GevreyFunction:
    s, rho = sec.get("s", 1.5), sec.get("rho", 0.1)
    kind = sec.get("kind", "schrodinger")
    if kind == "almost_mathieu":
        return GevreyFunction.cosine(2 * float(sec.get("lam", 1.0)), 1, s, rho)
    if kind != "schrodinger":
        raise InputError(f"a potential needs cocycle kind schrodinger or almost_mathieu, got {kind!r}")
    pot = sec.get("potential", [])
    if not all(isinstance(v, _num) and not isinstance(v, bool) for v in pot):
        raise InputError("[cocycle] potential must be a list of cosine coefficients")
    return GevreyFunction.from_cosine_series([float(v) for v in pot] or [0.0], s, rho)


def build_cocycle(sec: dict, E: float | None = None) -> MatrixFunction:
    kind = sec.get("kind")
    if kind not in COCYCLE_KINDS:
        raise InputError(f"[cocycle] kind must be one of {COCYCLE_KINDS}, got {kind!r}")
    s, rho = sec.get("s", 1.5), sec.get("rho", 0.1)
    if kind == "almost_mathieu":
        energy = float(sec.get("E", 0.0) if E is None else E)
        return MatrixFunction.almost_mathieu(energy, float(sec.get("lam", 1.0)), s, rho)
    if kind == "schrodinger":
        energy = float(sec.get("E", 0.0) if E is None else E)
        return MatrixFunction.schrodinger(energy, build_potential(sec))
    if kind == "rotation":
        return MatrixFunction.rotation(s, rho)
    if kind == "constant":
        m = sec.get("matrix")
        if not (isinstance(m, list) and len(m) == 4):
            raise InputError("[cocycle] constant kind needs matrix = [a, b, c, d]")
        return MatrixFunction.constant(*(float(x) for x in m), s=s, rho=rho)
    ent = sec.get("entries")
    if not (isinstance(ent, list) and len(ent) == 4):
        raise InputError("[cocycle] coeffs kind needs four entries tables {k: coefficient}")
    parsed = []
    for e in ent:
        if not isinstance(e, dict):
            raise InputError("[cocycle] each entry must be a table mapping mode index to [re, im]")
        parsed.append({int(k): _complex(v) for k, v in e.items()})
    return MatrixFunction.from_coeffs(parsed, s, rho, sec.get("label", "coeffs"))


def _complex(v) -> complex:
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, _num) and not isinstance(v, bool):
        return complex(float(v))
    raise InputError(f"mode coefficient must be a number or [re, im], got {v!r}")
