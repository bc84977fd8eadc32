"""Problem definition: material data, scenarios, and tuning formulas.

The stabilized sequential iteration holds an artificial volumetric mean
total stress fixed during the flow half step. Its tuning parameter has the
analysis-optimal value b^2 / (2 lambda), with per-iteration contraction
factor L M / (L M + 1); both formulas live here together with the
benchmark scenario on the L-shaped domain.
"""

import configparser
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InvalidInput, InvalidMaterial

LOW_ORDER_FLOW_TOL = 1e-14
HIGH_ORDER_FLOW_TOL = 1e-12
MECHANICS_TOL = 1e-12


@dataclass(frozen=True)
class MaterialParams:
    """Physical coefficients of the quasi-static poroelastic system.

    `biot_coefficient` may be zero to decouple flow from mechanics in
    structural tests; all other moduli must be strictly positive.
    `permeability` is the (viscosity-scaled) 2x2 tensor.
    """

    biot_modulus: float
    biot_coefficient: float
    shear_modulus: float
    lame_lambda: float
    permeability: np.ndarray
    bulk_density: float = 1.0

    def __post_init__(self):
        if self.biot_modulus <= 0:
            raise InvalidMaterial("biot_modulus must be positive")
        if self.biot_coefficient < 0:
            raise InvalidMaterial("biot_coefficient must be nonnegative")
        if self.shear_modulus <= 0 or self.lame_lambda <= 0:
            raise InvalidMaterial("Lame parameters must be positive")
        K = np.asarray(self.permeability, dtype=float)
        if K.shape == ():
            K = K * np.eye(2)
        if K.shape != (2, 2) or abs(K[0, 1] - K[1, 0]) > 1e-14:
            raise InvalidMaterial("permeability must be a symmetric 2x2 tensor")
        if np.linalg.eigvalsh(K).min() <= 0:
            raise InvalidMaterial("permeability must be positive definite")
        object.__setattr__(self, "permeability", K)


def lame_from_engineering(youngs_modulus, poisson_ratio):
    """Lame parameters (mu, lambda) from Young's modulus and Poisson ratio."""
    if youngs_modulus <= 0:
        raise InvalidMaterial("Young's modulus must be positive")
    if not 0 <= poisson_ratio < 0.5:
        raise InvalidMaterial("Poisson ratio must lie in [0, 0.5)")
    mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio))
    lam = youngs_modulus * poisson_ratio / ((1.0 - 2.0 * poisson_ratio) * (1.0 + poisson_ratio))
    return mu, lam


def optimal_tuning(material):
    """Stabilization value minimizing the contraction constant: b^2/(2 lambda)."""
    return material.biot_coefficient**2 / (2.0 * material.lame_lambda)


def contraction_factor(material, tuning):
    """Theoretical contraction constant L M / (L M + 1) in (0, 1)."""
    if tuning <= 0:
        raise InvalidInput("tuning parameter must be positive")
    lm = tuning * material.biot_modulus
    return lm / (lm + 1.0)


@dataclass(frozen=True)
class TimePolynomial:
    """Polynomial in t with ascending coefficients; used for traction data."""

    coefficients: tuple

    def __call__(self, t):
        out = 0.0
        for c in reversed(self.coefficients):
            out = out * t + c
        return out


BENCHMARK_TRACTION = TimePolynomial((0.0, 0.0, -640.0, 2560.0, -2560.0))


@dataclass(frozen=True)
class BoundaryCondition:
    """Per-tag boundary behavior.

    flow: "noflow" constrains q . n = 0; "open" leaves the natural
    condition with zero pressure datum. fix: displacement components held
    at zero ("", "x", "y" or "xy"). traction: optional vertical traction
    amplitude h(t); the applied traction vector is (0, h(t)).
    """

    flow: str = "noflow"
    fix: str = ""
    traction: TimePolynomial | None = None

    def __post_init__(self):
        if self.flow not in ("noflow", "open"):
            raise ConfigError(f"flow condition must be noflow|open, got {self.flow!r}")
        if self.fix not in ("", "x", "y", "xy"):
            raise ConfigError(f"fix must be one of '', x, y, xy, got {self.fix!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, file-representable description of one simulation."""

    mesh_kind: str                      # "lshape" | "rectangle"
    material: MaterialParams
    t_end: float
    tau: float
    scheme: str                         # "cgp" | "dg"
    time_degree: int
    space_degree: int
    boundaries: dict = field(default_factory=dict)
    mesh_level: int = 1                 # lshape refinement level
    extent: tuple = (0.0, 1.0, 0.0, 1.0)
    subdivisions: tuple = (1, 1)
    fluid_source: float = 0.0           # uniform volumetric source
    gravity: tuple = (0.0, 0.0)
    omega: float | None = 1.0           # multiplier on the optimal tuning value
    tuning: float | None = None         # explicit stabilization parameter
    tol_fixed: float = 1e-8
    tol_flow: float = LOW_ORDER_FLOW_TOL
    tol_mechanics: float = MECHANICS_TOL
    max_fixed_iters: int = 500

    def __post_init__(self):
        if self.t_end <= 0 or self.tau <= 0:
            raise ConfigError("time interval and step must be positive")
        n = round(self.t_end / self.tau)
        if n < 1 or abs(n * self.tau - self.t_end) > 1e-9 * self.t_end:
            raise ConfigError("step must divide the time interval")
        if self.scheme not in ("cgp", "dg"):
            raise ConfigError(f"scheme must be cgp|dg, got {self.scheme!r}")
        if self.scheme == "cgp" and self.time_degree < 1:
            raise ConfigError("continuous scheme needs time degree >= 1")
        if self.scheme == "dg" and self.time_degree < 0:
            raise ConfigError("discontinuous scheme needs time degree >= 0")
        if self.space_degree < 0:
            raise ConfigError("space degree must be >= 0")
        if min(self.tol_fixed, self.tol_flow, self.tol_mechanics) <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_fixed_iters < 2:
            raise ConfigError("max_fixed_iters must be at least 2")
        if self.tuning is None and (self.omega is None or self.omega <= 0):
            raise ConfigError("either omega > 0 or an explicit tuning value is required")
        if self.tuning is not None and self.tuning < 0:
            raise ConfigError("tuning parameter must be nonnegative")

    @property
    def n_slabs(self):
        return round(self.t_end / self.tau)

    def tuning_value(self):
        """Effective stabilization parameter: explicit value or omega * optimum."""
        if self.tuning is not None:
            return float(self.tuning)
        return self.omega * optimal_tuning(self.material)

    def with_omega(self, omega):
        return replace(self, omega=omega, tuning=None)


def benchmark_material():
    mu, lam = lame_from_engineering(100.0, 0.35)
    return MaterialParams(
        biot_modulus=100.0,
        biot_coefficient=100.0,
        shear_modulus=mu,
        lame_lambda=lam,
        permeability=0.1 * np.eye(2),
    )


def benchmark_scenario(level=1, tau=0.01, scheme="dg", time_degree=0, space_degree=0, omega=1.0):
    """L-shaped consolidation benchmark on the interval (0, 0.5].

    Open-flow/traction on the top edge, undrained everywhere else,
    traction-free re-entrant corner edges, symmetry conditions on the
    remaining outer edges, homogeneous initial conditions, no source.
    """
    low_order = (scheme, time_degree) in (("dg", 0), ("cgp", 1))
    return ScenarioConfig(
        mesh_kind="lshape",
        mesh_level=level,
        material=benchmark_material(),
        t_end=0.5,
        tau=tau,
        scheme=scheme,
        time_degree=time_degree,
        space_degree=space_degree,
        omega=omega,
        boundaries={
            "top": BoundaryCondition(flow="open", fix="", traction=BENCHMARK_TRACTION),
            "bottom": BoundaryCondition(flow="noflow", fix="y"),
            "left": BoundaryCondition(flow="noflow", fix="x"),
            "right": BoundaryCondition(flow="noflow", fix="x"),
            "reentrant": BoundaryCondition(flow="noflow", fix=""),
        },
        tol_fixed=1e-8,
        tol_flow=LOW_ORDER_FLOW_TOL if low_order else HIGH_ORDER_FLOW_TOL,
        tol_mechanics=MECHANICS_TOL,
    )


# -- scenario file format ------------------------------------------------------

_KNOWN_KEYS = {
    "mesh": {"kind", "level", "extent", "subdivisions"},
    "material": {
        "biot_modulus",
        "biot_coefficient",
        "youngs_modulus",
        "poisson_ratio",
        "shear_modulus",
        "lame_lambda",
        "permeability",
        "bulk_density",
    },
    "time": {"t_end", "step", "scheme", "degree"},
    "space": {"degree"},
    "source": {"fluid", "gravity"},
    "tuning": {"omega", "parameter"},
    "tolerances": {"fixed_stress", "flow", "mechanics", "max_fixed_iterations"},
}
_BOUNDARY_SUBKEYS = {"flow", "fix", "traction"}


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip decimal form
    return str(value)


def scenario_to_text(config):
    """Serialize a scenario to the sectioned key=value format."""
    mat = config.material
    K = mat.permeability
    lines = ["[mesh]", f"kind = {config.mesh_kind}"]
    if config.mesh_kind == "lshape":
        lines.append(f"level = {config.mesh_level}")
    else:
        lines.append("extent = " + " ".join(_fmt(float(v)) for v in config.extent))
        lines.append("subdivisions = " + " ".join(str(int(v)) for v in config.subdivisions))
    lines += [
        "",
        "[material]",
        f"biot_modulus = {_fmt(mat.biot_modulus)}",
        f"biot_coefficient = {_fmt(mat.biot_coefficient)}",
        f"shear_modulus = {_fmt(mat.shear_modulus)}",
        f"lame_lambda = {_fmt(mat.lame_lambda)}",
        f"permeability = {_fmt(K[0, 0])} {_fmt(K[0, 1])} {_fmt(K[1, 1])}",
        f"bulk_density = {_fmt(mat.bulk_density)}",
        "",
        "[time]",
        f"t_end = {_fmt(config.t_end)}",
        f"step = {_fmt(config.tau)}",
        f"scheme = {config.scheme}",
        f"degree = {config.time_degree}",
        "",
        "[space]",
        f"degree = {config.space_degree}",
        "",
        "[source]",
        f"fluid = {_fmt(config.fluid_source)}",
        "gravity = " + " ".join(_fmt(float(g)) for g in config.gravity),
        "",
        "[boundary]",
    ]
    for tag in sorted(config.boundaries):
        bc = config.boundaries[tag]
        lines.append(f"{tag}.flow = {bc.flow}")
        lines.append(f"{tag}.fix = {bc.fix}")
        if bc.traction is not None:
            lines.append(
                f"{tag}.traction = " + " ".join(_fmt(float(c)) for c in bc.traction.coefficients)
            )
    lines += ["", "[tuning]"]
    if config.tuning is not None:
        lines.append(f"parameter = {_fmt(config.tuning)}")
    else:
        lines.append(f"omega = {_fmt(config.omega)}")
    lines += [
        "",
        "[tolerances]",
        f"fixed_stress = {_fmt(config.tol_fixed)}",
        f"flow = {_fmt(config.tol_flow)}",
        f"mechanics = {_fmt(config.tol_mechanics)}",
        f"max_fixed_iterations = {config.max_fixed_iters}",
        "",
    ]
    return "\n".join(lines)


def _floats(text):
    return tuple(float(v) for v in text.split())


def parse_scenario(text):
    """Parse the sectioned key=value format; unknown keys are an error."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from exc

    for section in parser.sections():
        if section == "boundary":
            continue
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in section [{section}]")
    for section in _KNOWN_KEYS:
        if section not in parser:
            raise ConfigError(f"missing section [{section}]")

    def get(section, key, default=None):
        return parser[section].get(key, default)

    mesh_kind = get("mesh", "kind")
    if mesh_kind not in ("lshape", "rectangle"):
        raise ConfigError(f"mesh kind must be lshape|rectangle, got {mesh_kind!r}")

    msec = parser["material"]
    if "youngs_modulus" in msec or "poisson_ratio" in msec:
        if "shear_modulus" in msec or "lame_lambda" in msec:
            raise ConfigError("give either engineering constants or Lame parameters, not both")
        mu, lam = lame_from_engineering(
            float(msec["youngs_modulus"]), float(msec["poisson_ratio"])
        )
    else:
        mu, lam = float(msec["shear_modulus"]), float(msec["lame_lambda"])
    kvals = _floats(msec.get("permeability", "1"))
    if len(kvals) == 1:
        K = kvals[0] * np.eye(2)
    elif len(kvals) == 3:
        K = np.array([[kvals[0], kvals[1]], [kvals[1], kvals[2]]])
    else:
        raise ConfigError("permeability needs 1 (isotropic) or 3 (kxx kxy kyy) values")
    material = MaterialParams(
        biot_modulus=float(msec["biot_modulus"]),
        biot_coefficient=float(msec["biot_coefficient"]),
        shear_modulus=mu,
        lame_lambda=lam,
        permeability=K,
        bulk_density=float(msec.get("bulk_density", "1")),
    )

    boundaries = {}
    if "boundary" in parser:
        grouped = {}
        for key, value in parser["boundary"].items():
            if "." not in key:
                raise ConfigError(f"boundary key {key!r} must look like <tag>.<property>")
            tag, prop = key.rsplit(".", 1)
            if prop not in _BOUNDARY_SUBKEYS:
                raise ConfigError(f"unknown boundary property {prop!r} for tag {tag!r}")
            grouped.setdefault(tag, {})[prop] = value
        for tag, props in grouped.items():
            traction = None
            if props.get("traction"):
                traction = TimePolynomial(_floats(props["traction"]))
            boundaries[tag] = BoundaryCondition(
                flow=props.get("flow", "noflow"),
                fix=props.get("fix", ""),
                traction=traction,
            )

    tsec = parser["tuning"]
    if "parameter" in tsec and "omega" in tsec:
        raise ConfigError("give either omega or an explicit tuning parameter, not both")
    omega = float(tsec["omega"]) if "omega" in tsec else None
    tuning = float(tsec["parameter"]) if "parameter" in tsec else None

    tol = parser["tolerances"]
    return ScenarioConfig(
        mesh_kind=mesh_kind,
        mesh_level=int(get("mesh", "level", "1")),
        extent=_floats(get("mesh", "extent", "0 1 0 1")),
        subdivisions=tuple(int(v) for v in get("mesh", "subdivisions", "1 1").split()),
        material=material,
        t_end=float(get("time", "t_end")),
        tau=float(get("time", "step")),
        scheme=get("time", "scheme"),
        time_degree=int(get("time", "degree")),
        space_degree=int(get("space", "degree")),
        fluid_source=float(get("source", "fluid", "0")),
        gravity=_floats(get("source", "gravity", "0 0")),
        boundaries=boundaries,
        omega=omega,
        tuning=tuning,
        tol_fixed=float(tol["fixed_stress"]),
        tol_flow=float(tol["flow"]),
        tol_mechanics=float(tol["mechanics"]),
        max_fixed_iters=int(tol["max_fixed_iterations"]),
    )


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


def save_scenario(config, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(scenario_to_text(config))
