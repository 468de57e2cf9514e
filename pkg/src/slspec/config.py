"""Run configuration loaded from YAML.

Example::

    bc:
      canonical: {family: T1, sigma: 1, p: 3, r: 2}
    potential:
      kind: cosine
      params: {k: 1}
    n_range: [5, 40]
    regime: auto

Raw conditions use the six coefficients of
``a1 y'(0) + b1 y'(1) + a0 y(0) + b0 y(1) = 0``,
``c0 y(0) + d0 y(1) = 0``; complex numbers are written as ``[re, im]``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .bc_model import CanonicalBC, Family, GeneralBC, reduce_to_canonical
from .errors import BCError, ConfigError
from .potential import CATALOG, Potential, Smoothness, from_samples

REGIMES = ("auto", "Unperturbed", "L1", "AC")
VARIANTS = ("printed", "corrected")
RAW_KEYS = ("a1", "b1", "a0", "b0", "c0", "d0")


def parse_complex(value: Any, name: str = "value") -> complex:
    """Scalar or two-element [re, im]."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{name}: complex numbers are [re, im], got {value!r}")
        return complex(_float(value[0], name), _float(value[1], name))
    return complex(_float(value, name), 0.0)


def _float(value: Any, name: str) -> float:
    # PyYAML reads "1e-11" (no dot) as a string
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: not a number: {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{name}: must be finite")
    return out


def _positive(value: Any, name: str) -> float:
    out = _float(value, name)
    if out <= 0:
        raise ConfigError(f"{name}: must be positive, got {out}")
    return out


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer")
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
    if out != _float(value, name):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return out


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class BCSpec:
    raw: GeneralBC | None
    canonical: CanonicalBC

    @classmethod
    def parse(cls, block: Any) -> "BCSpec":
        if not isinstance(block, dict):
            raise ConfigError("bc: expected a mapping with 'raw' or 'canonical'")
        if ("raw" in block) == ("canonical" in block):
            raise ConfigError("bc: give exactly one of 'raw' or 'canonical'")
        if "raw" in block:
            raw = block["raw"]
            if not isinstance(raw, dict) or set(raw) != set(RAW_KEYS):
                raise ConfigError(f"bc.raw: needs exactly the keys {', '.join(RAW_KEYS)}")
            gbc = GeneralBC(*(parse_complex(raw[k], f"bc.raw.{k}") for k in RAW_KEYS))
            return cls(gbc, reduce_to_canonical(gbc))
        can = block["canonical"]
        if not isinstance(can, dict) or set(can) - {"family", "sigma", "p", "r", "adjoint"}:
            raise ConfigError("bc.canonical: keys are family, sigma, p, r")
        try:
            family = Family(str(can.get("family")))
        except ValueError:
            raise ConfigError(f"bc.canonical.family: expected T1 or T2, got {can.get('family')!r}") from None
        sigma = _int(can.get("sigma"), "bc.canonical.sigma")
        if sigma not in (0, 1):
            raise ConfigError("bc.canonical.sigma: must be 0 or 1")
        cbc = CanonicalBC(family, sigma, parse_complex(can.get("p"), "bc.canonical.p"),
                          parse_complex(can.get("r", 0.0), "bc.canonical.r"))
        return cls(None, cbc)

    def to_dict(self) -> dict:
        c = self.canonical
        out: dict = {"canonical": {"family": c.family.value, "sigma": c.sigma,
                                   "p": _pair(c.p), "r": _pair(c.r), "adjoint": bool(c.adjoint)}}
        if self.raw is not None:
            out["raw"] = {k: _pair(getattr(self.raw, k)) for k in RAW_KEYS}
        return out


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    params: dict = field(default_factory=dict)
    values: tuple = ()
    smoothness: str = "L1"

    @classmethod
    def parse(cls, block: Any) -> "PotentialSpec":
        if block is None:
            return cls("zero")
        if not isinstance(block, dict) or "kind" not in block:
            raise ConfigError("potential: expected a mapping with 'kind'")
        kind = str(block["kind"])
        if kind == "samples":
            vals = block.get("values")
            if not isinstance(vals, list) or len(vals) < 2:
                raise ConfigError("potential.values: need a list of at least two samples")
            values = tuple(_float(v, "potential.values") for v in vals)
            sm = str(block.get("smoothness", "L1"))
            if sm not in ("L1", "AC", "AbsolutelyContinuous"):
                raise ConfigError("potential.smoothness: L1 or AbsolutelyContinuous")
            return cls(kind, {}, values, "AbsolutelyContinuous" if sm == "AC" else sm)
        if kind not in CATALOG:
            raise ConfigError(f"potential.kind: unknown {kind!r}; choose from {', '.join(sorted(CATALOG))} or samples")
        params = block.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("potential.params: expected a mapping")
        return cls(kind, dict(params))

    def build(self) -> Potential:
        if self.kind == "samples":
            return from_samples(self.values, Smoothness(self.smoothness))
        try:
            return CATALOG[self.kind](**self.params)
        except TypeError as exc:
            raise ConfigError(f"potential.params for {self.kind}: {exc}") from None

    def to_dict(self) -> dict:
        if self.kind == "samples":
            return {"kind": "samples", "values": list(self.values), "smoothness": self.smoothness}
        return {"kind": self.kind, "params": dict(self.params)}


@dataclass(frozen=True)
class Tolerances:
    ode: float = 1e-11
    quad: float = 1e-12
    eig: float = 1e-8

    @classmethod
    def parse(cls, block: Any) -> "Tolerances":
        block = block or {}
        if not isinstance(block, dict) or set(block) - {"ode", "quad", "eig"}:
            raise ConfigError("tolerances: keys are ode, quad, eig")
        d = cls()
        return cls(*(_positive(block.get(k, getattr(d, k)), f"tolerances.{k}") for k in ("ode", "quad", "eig")))


@dataclass(frozen=True)
class SolverSettings:
    n0: int = 5
    n_out: int = 2049
    half_width: float = math.pi / 2
    tau_mult: float = 1e-4
    low: bool = True

    @classmethod
    def parse(cls, block: Any) -> "SolverSettings":
        block = block or {}
        d = cls()
        if not isinstance(block, dict) or set(block) - set(asdict(d)):
            raise ConfigError(f"solver: keys are {', '.join(asdict(d))}")
        n0 = _int(block.get("n0", d.n0), "solver.n0")
        n_out = _int(block.get("n_out", d.n_out), "solver.n_out")
        if n0 < 1:
            raise ConfigError("solver.n0: must be at least 1")
        if n_out < 5 or n_out % 2 == 0:
            raise ConfigError("solver.n_out: must be odd and at least 5")
        hw = _positive(block.get("half_width", d.half_width), "solver.half_width")
        if hw >= math.pi:
            raise ConfigError("solver.half_width: windows must not overlap (half_width < pi)")
        return cls(n0, n_out, hw, _positive(block.get("tau_mult", d.tau_mult), "solver.tau_mult"),
                   bool(block.get("low", d.low)))


@dataclass(frozen=True)
class OracleSettings:
    N: int = 2000
    n_max: int = 8
    method: str = "recurrence"
    safety: float = 2.0

    @classmethod
    def parse(cls, block: Any) -> "OracleSettings":
        block = block or {}
        d = cls()
        if not isinstance(block, dict) or set(block) - set(asdict(d)):
            raise ConfigError(f"oracle: keys are {', '.join(asdict(d))}")
        N = _int(block.get("N", d.N), "oracle.N")
        if N < 10:
            raise ConfigError("oracle.N: must be at least 10")
        n_max = _int(block.get("n_max", d.n_max), "oracle.n_max")
        if n_max < 0:
            raise ConfigError("oracle.n_max: must be non-negative")
        method = str(block.get("method", d.method))
        if method not in ("recurrence", "lu"):
            raise ConfigError("oracle.method: recurrence or lu")
        return cls(N, n_max, method, _positive(block.get("safety", d.safety), "oracle.safety"))


@dataclass(frozen=True)
class RunConfig:
    bc: BCSpec
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("zero"))
    n_min: int = 5
    n_max: int = 40
    regime: str = "auto"
    variant: str = "printed"
    tolerances: Tolerances = field(default_factory=Tolerances)
    solver: SolverSettings = field(default_factory=SolverSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    out: str = "out"

    def __post_init__(self):
        if self.n_min < 0 or self.n_max < self.n_min:
            raise ConfigError(f"n_range: need 0 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if self.regime not in REGIMES:
            raise ConfigError(f"regime: one of {', '.join(REGIMES)}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant: one of {', '.join(VARIANTS)}")

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a mapping")
        known = {"bc", "potential", "n_range", "regime", "variant", "tolerances", "solver", "oracle", "out"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"config: unknown keys {', '.join(sorted(extra))}")
        if "bc" not in data:
            raise ConfigError("config: missing 'bc' block")
        try:
            bc = BCSpec.parse(data["bc"])
        except BCError as exc:
            raise ConfigError(f"bc: {exc}") from exc
        nr = data.get("n_range", [5, 40])
        if not isinstance(nr, (list, tuple)) or len(nr) != 2:
            raise ConfigError("n_range: expected [n_min, n_max]")
        pot = PotentialSpec.parse(data.get("potential"))
        pot.build()  # surface parameter errors at load time
        return cls(
            bc=bc, potential=pot,
            n_min=_int(nr[0], "n_range"), n_max=_int(nr[1], "n_range"),
            regime=str(data.get("regime", "auto")), variant=str(data.get("variant", "printed")),
            tolerances=Tolerances.parse(data.get("tolerances")),
            solver=SolverSettings.parse(data.get("solver")),
            oracle=OracleSettings.parse(data.get("oracle")),
            out=str(data.get("out", "out")),
        )

    def to_dict(self) -> dict:
        return {
            "bc": self.bc.to_dict(),
            "potential": self.potential.to_dict(),
            "n_range": [self.n_min, self.n_max],
            "regime": self.regime,
            "variant": self.variant,
            "tolerances": asdict(self.tolerances),
            "solver": asdict(self.solver),
            "oracle": asdict(self.oracle),
            "out": self.out,
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return RunConfig.from_dict(data)
