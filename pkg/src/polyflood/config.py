"""Run configuration: sectioned key=value text, validation, presets.

A run is fully described by a flat INI-style text with the sections

    [run]       dimension, flux, order, theta, cfl_safety, t_final,
                snapshot_times
    [physics]   m, mu_o, viscosity, viscosity_base, adsorption_base,
                adsorption_slope, rho_w_g, rho_o_g, gravity, c_max
    [grid]      n, x_lo, x_hi, direction, v, K        (one dimension)
                nx, ny                                 (two dimensions)
    [initial]   s_left, c_left, s_right, c_right, jump (one dimension)
                s0, c0                                 (two dimensions)
    [boundary]  s_left, c_left, s_right, c_right       (1D ghost states)
                layout, p_in, p_out, inlet_fraction, outlet_fraction,
                inlet_c                                (two dimensions)
    [field]     kind, value, n_sites, seed, bump_width, clip_lo,
                clip_hi, rock_radius, rock_value, background_value
    [output]    outdir, format

Every key has a default except run.dimension; unknown sections and keys
are rejected.  Lists are comma separated.  ``theta = auto`` selects the
limiter default for the chosen flux and order.  parse(serialize(config))
reproduces the config exactly.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math

from . import fields

_FLUXES = ("dflu", "godunov", "upstream")
_VISCOSITIES = ("linear-sum", "sqrt-sum")
_DIRECTIONS = ("vertical", "horizontal")
_LAYOUTS = ("strip", "quarter-five-spot")
_FORMATS = ("csv", "vtk", "both")


class ConfigError(ValueError):
    """Invalid configuration text; carries the full error list."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclasses.dataclass
class RunConfig:
    """One experiment, fully determined."""

    # run
    dimension: int = 0          # required; 0 means "not given"
    flux: str = "dflu"
    order: int = 2
    theta: float | None = None  # None = limiter default for flux/order
    cfl_safety: float = 1.0
    t_final: float = 1.0
    snapshot_times: tuple = ()  # empty = final time only

    # physics
    m: int = 2
    mu_o: float = 1.0
    viscosity: str = "linear-sum"
    viscosity_base: float = 0.5
    adsorption_base: float = 1.0
    adsorption_slope: float = 0.5
    rho_w_g: float = 2.0
    rho_o_g: float = 1.0
    gravity: bool = True
    c_max: float = 1.0

    # grid
    n: int = 100
    x_lo: float = 0.0
    x_hi: float = 1.0
    direction: str = "vertical"
    v: float = 0.2
    K: float = 1.0
    nx: int = 100
    ny: int = 100

    # initial data
    s_left: float = 0.1
    c_left: tuple = (1.0, 0.6)
    s_right: float = 1.0
    c_right: tuple = (0.0, 0.0)
    jump: float = 0.4
    s0: float = 0.0
    c0: tuple = (0.0, 0.0)

    # boundary (1D ghost states default to the initial end states)
    bc_s_left: float | None = None
    bc_c_left: tuple | None = None
    bc_s_right: float | None = None
    bc_c_right: tuple | None = None
    layout: str = "quarter-five-spot"
    p_in: float = 8.0
    p_out: float = 1.0
    inlet_fraction: float = 0.1
    outlet_fraction: float = 0.1
    inlet_c: tuple = (0.0, 0.0)

    # permeability field (2D)
    field_kind: str = "constant"
    field_value: float = 1.0
    field_sites: int = 100
    field_seed: int = 0
    bump_width: float = 0.05
    clip_lo: float = 0.5
    clip_hi: float = 1.5
    rock_radius: float = 0.0015
    rock_value: float = 0.01
    background_value: float = 1.0

    # output
    outdir: str = "out"
    format: str = "csv"

    def field_spec(self):
        return fields.FieldSpec(
            kind=self.field_kind, n_sites=self.field_sites,
            seed=self.field_seed, value=self.field_value,
            bump_width=self.bump_width, clip_lo=self.clip_lo,
            clip_hi=self.clip_hi, rock_radius=self.rock_radius,
            rock_value=self.rock_value,
            background_value=self.background_value)

    def boundary_states(self):
        """1D ghost states (s_left, c_left, s_right, c_right)."""
        return (
            self.s_left if self.bc_s_left is None else self.bc_s_left,
            self.c_left if self.bc_c_left is None else self.bc_c_left,
            self.s_right if self.bc_s_right is None else self.bc_s_right,
            self.c_right if self.bc_c_right is None else self.bc_c_right,
        )

    def output_times(self):
        times = self.snapshot_times or (self.t_final,)
        return tuple(sorted({t for t in times if t > 0.0}))


# ---------------------------------------------------------------------------
# parsing


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected a boolean, got %r" % (text,))


def _parse_floats(text):
    t = text.strip()
    if not t:
        return ()
    return tuple(float(part) for part in t.split(","))


def _parse_theta(text):
    t = text.strip().lower()
    if t in ("auto", "none", ""):
        return None
    return float(t)


_int, _float, _str, _bool = int, float, str.strip, _parse_bool

# section -> key -> (config attribute, converter)
_SCHEMA = {
    "run": {
        "dimension": ("dimension", _int),
        "flux": ("flux", _str),
        "order": ("order", _int),
        "theta": ("theta", _parse_theta),
        "cfl_safety": ("cfl_safety", _float),
        "t_final": ("t_final", _float),
        "snapshot_times": ("snapshot_times", _parse_floats),
    },
    "physics": {
        "m": ("m", _int),
        "mu_o": ("mu_o", _float),
        "viscosity": ("viscosity", _str),
        "viscosity_base": ("viscosity_base", _float),
        "adsorption_base": ("adsorption_base", _float),
        "adsorption_slope": ("adsorption_slope", _float),
        "rho_w_g": ("rho_w_g", _float),
        "rho_o_g": ("rho_o_g", _float),
        "gravity": ("gravity", _bool),
        "c_max": ("c_max", _float),
    },
    "grid": {
        "n": ("n", _int),
        "x_lo": ("x_lo", _float),
        "x_hi": ("x_hi", _float),
        "direction": ("direction", _str),
        "v": ("v", _float),
        "k": ("K", _float),
        "nx": ("nx", _int),
        "ny": ("ny", _int),
    },
    "initial": {
        "s_left": ("s_left", _float),
        "c_left": ("c_left", _parse_floats),
        "s_right": ("s_right", _float),
        "c_right": ("c_right", _parse_floats),
        "jump": ("jump", _float),
        "s0": ("s0", _float),
        "c0": ("c0", _parse_floats),
    },
    "boundary": {
        "s_left": ("bc_s_left", _float),
        "c_left": ("bc_c_left", _parse_floats),
        "s_right": ("bc_s_right", _float),
        "c_right": ("bc_c_right", _parse_floats),
        "layout": ("layout", _str),
        "p_in": ("p_in", _float),
        "p_out": ("p_out", _float),
        "inlet_fraction": ("inlet_fraction", _float),
        "outlet_fraction": ("outlet_fraction", _float),
        "inlet_c": ("inlet_c", _parse_floats),
    },
    "field": {
        "kind": ("field_kind", _str),
        "value": ("field_value", _float),
        "n_sites": ("field_sites", _int),
        "seed": ("field_seed", _int),
        "bump_width": ("bump_width", _float),
        "clip_lo": ("clip_lo", _float),
        "clip_hi": ("clip_hi", _float),
        "rock_radius": ("rock_radius", _float),
        "rock_value": ("rock_value", _float),
        "background_value": ("background_value", _float),
    },
    "output": {
        "outdir": ("outdir", _str),
        "format": ("format", _str),
    },
}


def parse_config(text):
    """Parse and validate config text; raise ConfigError listing problems."""
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",), interpolation=None, strict=True)
    errors = []
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(["config text: %s" % (err,)]) from err

    config = RunConfig()
    seen_dimension = False
    for section in parser.sections():
        schema = _SCHEMA.get(section)
        if schema is None:
            errors.append("%s: unknown section" % section)
            continue
        for key, raw in parser[section].items():
            entry = schema.get(key)
            if entry is None:
                errors.append("%s.%s: unknown key" % (section, key))
                continue
            attr, convert = entry
            try:
                value = convert(raw)
            except ValueError as err:
                errors.append("%s.%s: %s" % (section, key, err))
                continue
            setattr(config, attr, value)
            if attr == "dimension":
                seen_dimension = True
    if not seen_dimension or config.dimension == 0:
        errors.append("missing required: dimension")
    errors.extend(validate(config))
    if errors:
        raise ConfigError(errors)
    return config


def validate(config):
    """All invariant violations in a config, as key-path messages."""
    errors = []
    bad = errors.append
    c = config

    if c.dimension not in (0, 1, 2):
        bad("run.dimension: must be 1 or 2")
    if c.flux not in _FLUXES:
        bad("run.flux: unknown flux %r" % (c.flux,))
    if c.order not in (1, 2):
        bad("run.order: must be 1 or 2")
    if c.theta is not None and not 1.0 <= c.theta <= 2.0:
        bad("run.theta: theta out of [1,2]")
    if not 0.0 < c.cfl_safety <= 1.0:
        bad("run.cfl_safety: must lie in (0, 1]")
    if c.t_final < 0.0:
        bad("run.t_final: must be nonnegative")
    if any(t < 0.0 for t in c.snapshot_times):
        bad("run.snapshot_times: times must be nonnegative")
    if any(t > c.t_final for t in c.snapshot_times):
        bad("run.snapshot_times: times must not exceed t_final")

    if c.m < 0:
        bad("physics.m: must be nonnegative")
    if c.mu_o <= 0.0:
        bad("physics.mu_o: must be positive")
    if c.viscosity not in _VISCOSITIES:
        bad("physics.viscosity: unknown law %r" % (c.viscosity,))
    if c.viscosity_base <= 0.0:
        bad("physics.viscosity_base: must be positive")
    if c.adsorption_slope <= 0.0:
        bad("physics.adsorption_slope: must be positive")
    if c.c_max <= 0.0:
        bad("physics.c_max: must be positive")

    def check_c(path, values, maximum=True):
        if len(values) != c.m:
            bad("%s: expected %d values" % (path, c.m))
            return
        if any(not math.isfinite(x) or x < 0.0 for x in values):
            bad("%s: concentrations must be nonnegative" % path)
        elif maximum and any(x > c.c_max for x in values):
            bad("physics.c_max: must cover the concentrations in %s" % path)

    if c.dimension == 1:
        if c.n < 1:
            bad("grid.n: need at least one cell")
        if not c.x_lo < c.x_hi:
            bad("grid.x_hi: domain must have positive length")
        if c.direction not in _DIRECTIONS:
            bad("grid.direction: must be vertical or horizontal")
        if not math.isfinite(c.v):
            bad("grid.v: must be finite")
        if c.K <= 0.0:
            bad("grid.k: permeability must be positive")
        if not 0.0 <= c.s_left <= 1.0:
            bad("initial.s_left: saturation outside [0,1]")
        if not 0.0 <= c.s_right <= 1.0:
            bad("initial.s_right: saturation outside [0,1]")
        check_c("initial.c_left", c.c_left)
        check_c("initial.c_right", c.c_right)
        if not c.x_lo < c.jump < c.x_hi:
            bad("initial.jump: must lie inside the domain")
        bs_l, bc_l, bs_r, bc_r = c.boundary_states()
        if not 0.0 <= bs_l <= 1.0:
            bad("boundary.s_left: saturation outside [0,1]")
        if not 0.0 <= bs_r <= 1.0:
            bad("boundary.s_right: saturation outside [0,1]")
        check_c("boundary.c_left", bc_l)
        check_c("boundary.c_right", bc_r)
    elif c.dimension == 2:
        if c.nx < 2 or c.ny < 2:
            bad("grid.nx: need at least two cells per direction")
        if not 0.0 <= c.s0 <= 1.0:
            bad("initial.s0: saturation outside [0,1]")
        check_c("initial.c0", c.c0)
        if c.layout not in _LAYOUTS:
            bad("boundary.layout: unknown layout %r" % (c.layout,))
        if not c.p_in > c.p_out:
            bad("boundary.p_in: inlet pressure must exceed outlet")
        if not 0.0 < c.inlet_fraction <= 1.0:
            bad("boundary.inlet_fraction: must lie in (0, 1]")
        if not 0.0 < c.outlet_fraction <= 1.0:
            bad("boundary.outlet_fraction: must lie in (0, 1]")
        check_c("boundary.inlet_c", c.inlet_c)
        try:
            c.field_spec()
        except ValueError as err:
            bad("field: %s" % (err,))

    if c.flux == "godunov":
        if c.order == 2 and c.theta is not None and c.theta > 1.0:
            bad("run.theta: the exact interface flux requires theta=1")
        if c.dimension == 2 and c.field_kind != "constant":
            bad("run.flux: the exact interface solution requires a "
                "constant permeability field")

    if c.format not in _FORMATS:
        bad("output.format: must be csv, vtk or both")
    return errors


# ---------------------------------------------------------------------------
# serialization


def _format_value(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join("%.17g" % x for x in value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def serialize(config):
    """Config text that parses back to an equal config."""
    out = io.StringIO()
    for section, schema in _SCHEMA.items():
        out.write("[%s]\n" % section)
        for key, (attr, _) in schema.items():
            value = getattr(config, attr)
            if value is None and attr.startswith("bc_"):
                continue  # "inherit the initial data" has no literal form
            out.write("%s = %s\n" % (key, _format_value(value)))
        out.write("\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# presets


def _table1(flux):
    return RunConfig(
        dimension=1, flux=flux, order=2,
        n=100, x_lo=0.0, x_hi=1.0, direction="vertical", v=0.2, K=1.0,
        s_left=0.1, c_left=(1.0, 0.6), s_right=1.0, c_right=(0.0, 0.0),
        jump=0.4, t_final=1.0, outdir="out/table1-%s" % flux)


def _experiment(name, inlet_c, field_kind, gravity, viscosity, c_max):
    return RunConfig(
        dimension=2, flux="dflu", order=2,
        nx=100, ny=100, t_final=1.0,
        viscosity=viscosity, gravity=gravity, c_max=c_max,
        s0=0.0, c0=(0.0, 0.0), inlet_c=inlet_c,
        layout="quarter-five-spot", p_in=8.0, p_out=1.0,
        field_kind=field_kind, field_sites=100, field_seed=0,
        outdir="out/%s" % name)


def _presets():
    table = {}
    for flux in _FLUXES:
        table["table1-%s" % flux] = _table1(flux)
    table["expt1"] = _experiment(
        "expt1", (7.0, 0.0), "gaussian-bumps", False, "linear-sum", 7.0)
    table["expt1-nopolymer"] = _experiment(
        "expt1-nopolymer", (0.0, 0.0), "gaussian-bumps", False,
        "linear-sum", 7.0)
    table["expt2"] = _experiment(
        "expt2", (5.0, 3.0), "hard-rock", True, "linear-sum", 5.0)
    table["expt2-nopolymer"] = _experiment(
        "expt2-nopolymer", (0.0, 0.0), "hard-rock", True, "linear-sum", 5.0)
    table["expt3-gravity"] = _experiment(
        "expt3-gravity", (7.0, 0.0), "hard-rock", True, "linear-sum", 7.0)
    table["expt3-nogravity"] = _experiment(
        "expt3-nogravity", (7.0, 0.0), "hard-rock", False, "linear-sum", 7.0)
    table["expt4-single"] = _experiment(
        "expt4-single", (49.0, 0.0), "hard-rock", False, "sqrt-sum", 49.0)
    table["expt4-multi"] = _experiment(
        "expt4-multi", (25.0, 24.0), "hard-rock", False, "sqrt-sum", 49.0)
    return table


def preset_names():
    return sorted(_presets())


def preset(name):
    """A fresh validated RunConfig for a named built-in experiment."""
    table = _presets()
    if name not in table:
        raise KeyError(
            "unknown preset %r; available: %s"
            % (name, ", ".join(sorted(table))))
    config = table[name]
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    return config
