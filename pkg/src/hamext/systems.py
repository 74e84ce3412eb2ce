"""Builtin systems, their printed fixtures, and config-file loading."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import jsonschema

from .errors import ParseError, SystemConfigError
from .extension import ExtensionSpec, cg_residual
from .phasespace import CanonicalChart, MomentumPoly
from .symexpr import expr as E
from .symexpr.laurent import Laurent
from .symexpr.numeric import SampleWindow, as_window
from .symexpr.parser import parse

__all__ = [
    "Fixture", "SystemDef", "oscillator", "calogero", "three_sphere", "three_sphere_geodesic",
    "BUILTINS", "get_system", "load_system", "system_to_config", "CONFIG_SCHEMA",
]

MOMENTUM_WINDOW = (-2.0, 2.0)
PARAM_WINDOW = (0.5, 2.0)
POLE_MARGIN = 0.3


@dataclass(frozen=True)
class Fixture:
    """A printed expression kept as source text.

    ``kind`` is ``"G"`` (``index = (n,)``) or ``"K"`` (``index = (m, n)``).
    ``printed`` holds the verbatim text when it differs from ``text``
    (a corrected misprint); ``note`` says what changed.
    """

    name: str
    kind: str
    index: tuple[int, ...]
    text: str
    kappa: float | None = None
    printed: str | None = None
    note: str = ""


@dataclass(frozen=True)
class SystemDef:
    name: str
    chart: CanonicalChart
    L: MomentumPoly
    G: MomentumPoly
    c_tilde: E.Expr
    L0_tilde: E.Expr
    parameters: Mapping[str, tuple[float, float]]
    windows: Mapping[str, SampleWindow]
    A: E.Expr = E.ONE
    kappa: float = 0.0
    u_window: SampleWindow = SampleWindow(-2.0, 2.0)
    momentum_window: tuple[float, float] = MOMENTUM_WINDOW
    fixtures: Mapping[str, Fixture] = field(default_factory=dict)
    domain: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    description: str = ""
    _lambda_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(self.parameters)

    def with_kappa(self, kappa: float) -> "SystemDef":
        return dataclasses.replace(self, kappa=float(kappa))

    def spec(self, m: int, n: int, kappa: float | None = None) -> ExtensionSpec:
        k = self.kappa if kappa is None else kappa
        return ExtensionSpec(m, n, self.c_tilde, self.L0_tilde, E.const(_fraction(k)), self.A)

    def _u_window(self) -> SampleWindow:
        w = self.u_window
        c = self.c_tilde
        if c == E.ZERO or self.kappa <= 0 or not isinstance(c, E.Const):
            return w
        # S_kappa(c u) vanishes at u = j pi / (c sqrt(kappa))
        period = math.pi / (abs(float(c.value)) * math.sqrt(self.kappa))
        poles = list(w.poles)
        j = 1
        while j * period - POLE_MARGIN <= max(abs(w.lo), abs(w.hi)):
            poles += [(j * period, POLE_MARGIN), (-j * period, POLE_MARGIN)]
            j += 1
        return SampleWindow(w.lo, w.hi, tuple(poles))

    def sampling_windows(self) -> dict[str, SampleWindow]:
        out: dict[str, SampleWindow] = {}
        for name, rng in self.parameters.items():
            out[name] = as_window(rng)
        for q in self.chart.coordinates:
            out[q] = self.windows[q]
        for p in self.chart.momenta:
            out[p] = as_window(self.windows.get(p, self.momentum_window))
        out["u"] = self._u_window()
        out["p_u"] = as_window(self.momentum_window)
        return out

    def integration_bounds(self, margin: float = 1e-3) -> dict[str, tuple[float, float]]:
        """Open domain of the chart (and u) shrunk by ``margin``; RK4 stops outside it."""
        out = {k: (lo + margin, hi - margin) for k, (lo, hi) in self.domain.items()}
        c = self.c_tilde
        if c != E.ZERO and isinstance(c, E.Const):
            top = math.inf
            if self.kappa > 0:
                top = math.pi / (abs(float(c.value)) * math.sqrt(self.kappa))
            out["u"] = (margin, top - margin)
        return out

    def default_start(self, seed: int | None = 0) -> dict[str, float]:
        """A seeded random point of the sampling windows (chart, u, p_u, parameters)."""
        import numpy as np
        rng = np.random.default_rng(seed)
        return {k: float(w.sample(rng, 1)[0]) for k, w in sorted(self.sampling_windows().items())}

    def fixture(self, name: str, printed: bool = False) -> MomentumPoly:
        """Parse a fixture onto the matching chart (extended for K fixtures)."""
        fx = self.fixtures[name]
        text = fx.printed if printed and fx.printed else fx.text
        chart = self.chart if fx.kind == "G" else self.chart.extend("u", "p_u")
        e = parse(text, self.parameter_names + ("kappa",))
        k = self.kappa if fx.kappa is None else fx.kappa
        e = E.subs(e, {"kappa": E.const(_fraction(k))})
        return MomentumPoly(Laurent.from_expr(e), chart)


def _fraction(x):
    from fractions import Fraction
    return Fraction(x).limit_denominator(10 ** 12) if isinstance(x, float) else Fraction(x)


def _window(lo, hi, poles=()):
    return SampleWindow(float(lo), float(hi), tuple(poles))


def _fixtures(*items: Fixture) -> dict[str, Fixture]:
    return {f.name: f for f in items}


def oscillator() -> SystemDef:
    """L = p_x^2/2 + omega^2 x^2 with G = x (c = 0, L0 = omega^2, A = 1)."""
    chart = CanonicalChart.of(("x", "p_x"))
    params = ("omega",)
    fx = _fixtures(
        Fixture("G1", "G", (1,), "x"),
        Fixture("G2", "G", (2,), "2*x*p_x"),
        Fixture("G3", "G", (3,), "3*x*p_x^2 - 2*omega^2*x^3"),
        Fixture("G4", "G", (4,), "4*x*p_x^3 - 8*omega^2*x^3*p_x"),
        Fixture("G5", "G", (5,), "5*x*p_x^4 - 20*omega^2*x^3*p_x^2 + 4*omega^4*x^5"),
        Fixture("K11", "K", (1, 1), "x*p_u - u*p_x"),
        Fixture("K12", "K", (1, 2), "2*x*p_x*p_u - u*(1/2*p_x^2 - omega^2*x^2)"),
        Fixture("K22", "K", (2, 2), "2*(x*p_u - u*p_x)*(p_x*p_u + 2*omega^2*x*u)"),
        Fixture("K32", "K", (3, 2),
                "2*x*p_x*p_u^3 - 9/2*u*p_x^2*p_u^2 + 9*omega^2*x^2*u*p_u^2"
                " - 27*omega^2*x*u^2*p_x*p_u + 27/4*omega^2*u^3*p_x^2 - 27/2*omega^4*x^2*u^3"),
    )
    return SystemDef(
        name="oscillator",
        chart=chart,
        L=MomentumPoly.parse("1/2*p_x^2 + omega^2*x^2", chart, params),
        G=MomentumPoly.parse("x", chart, params),
        c_tilde=E.ZERO,
        L0_tilde=parse("omega^2", params),
        parameters={"omega": PARAM_WINDOW},
        windows={"x": _window(-2, 2)},
        u_window=_window(-2, 2),
        fixtures=fx,
        description="two uncoupled oscillators",
    )


def calogero(kappa: float = 0.0) -> SystemDef:
    """L = p_phi^2/2 + a/sin^2(phi) with G = cos(phi) (c = 1, L0 = 0)."""
    chart = CanonicalChart.of(("phi", "p_phi"))
    params = ("a",)
    fx = _fixtures(
        Fixture("G1", "G", (1,), "cos(phi)"),
        Fixture("G2", "G", (2,), "-sin(2*phi)*p_phi"),
        Fixture("G3", "G", (3,), "-cos(3*phi)*p_phi^2 - 2*a*cos(phi)^3/sin(phi)^2"),
        Fixture("G4", "G", (4,), "sin(4*phi)*p_phi^3 + 8*a*cos(phi)^3/sin(phi)*p_phi",
                printed="sin(4*phi)*p_phi^3 - 8*a*cos(phi)^3/sin(phi)*p_phi",
                note="sign of the p_phi term"),
        Fixture("G5", "G", (5,),
                "cos(5*phi)*p_phi^4 + 4*a*(6*cos(phi)^2 - 5)*cos(phi)^3/sin(phi)^2*p_phi^2"
                " + 4*a^2*cos(phi)^5/sin(phi)^4"),
        Fixture("K23", "K", (2, 3),
                "-cos(3*phi)*p_u^2*p_phi^2 + 4/(3*u)*sin(phi)*(4*cos(phi)^2 - 1)*p_u*p_phi^3"
                " + 4*cos(3*phi)/(9*u^2)*p_phi^4 - 2*a*cos(phi)^3/sin(phi)^2*p_u^2"
                " + 8*a*cos(phi)^2/(u*sin(phi))*p_u*p_phi"
                " + 8*a*(5*cos(phi)^2 - 3)*cos(phi)/(9*u^2*sin(phi)^2)*p_phi^2"
                " + 16*a^2*cos(phi)^3/(9*u^2*sin(phi)^4)",
                kappa=0.0),
    )
    return SystemDef(
        name="calogero",
        chart=chart,
        L=MomentumPoly.parse("1/2*p_phi^2 + a/sin(phi)^2", chart, params),
        G=MomentumPoly.parse("cos(phi)", chart, params),
        c_tilde=E.ONE,
        L0_tilde=E.ZERO,
        parameters={"a": PARAM_WINDOW},
        windows={"phi": _window(POLE_MARGIN, math.pi - POLE_MARGIN)},
        kappa=float(kappa),
        u_window=_window(0.5, 3),
        fixtures=fx,
        domain={"phi": (0.0, math.pi)},
        description="Calogero-type system",
    )


_SPHERE_CHART = CanonicalChart.of(("eta", "p_eta"), ("xi1", "p_xi1"), ("xi2", "p_xi2"))
_SPHERE_GEODESIC = "1/2*(p_eta^2 + p_xi1^2/sin(eta)^2 + p_xi2^2/cos(eta)^2)"
_SPHERE_WINDOWS = {
    "eta": _window(POLE_MARGIN, math.pi / 2 - POLE_MARGIN),
    "xi1": _window(POLE_MARGIN, math.pi - POLE_MARGIN),
    "xi2": _window(POLE_MARGIN, math.pi / 2 - POLE_MARGIN),
}

_SPHERE_DOMAIN = {"eta": (0.0, math.pi / 2), "xi2": (-math.pi / 2, math.pi / 2)}


def three_sphere(kappa: float = 0.0) -> SystemDef:
    """Geodesic L on S^3 plus V = sin(xi1)/(cos(xi2) cos(eta) sin(eta)), G = sin(xi2) cos(eta)."""
    chart = _SPHERE_CHART
    inner = ("-1/2*cos(2*eta)*sin(xi2)^2*p_eta^2"
             " - sin(eta)*cos(xi2)*sin(xi2)/cos(eta)*p_eta*p_xi2"
             " - cos(eta)^2*sin(xi2)^2/(2*sin(eta)^2)*p_xi1^2"
             " + (cos(xi2)^2 - cos(eta)^2*sin(xi2)^2)/(2*cos(eta)^2)*p_xi2^2"
             " - sin(xi2)^2*sin(xi1)*cos(eta)/(sin(eta)*cos(xi2))")
    k12 = "1/Tk(u, kappa)*({}) {} *sin(2*eta)*sin(xi2)^2*p_u*p_eta + 2*sin(xi2)*cos(xi2)*p_u*p_xi2"
    fx = _fixtures(
        Fixture("G1", "G", (1,), "sin(xi2)*cos(eta)"),
        Fixture("G2", "G", (2,), "-sin(2*eta)*sin(xi2)^2*p_eta + 2*sin(xi2)*cos(xi2)*p_xi2"),
        Fixture("G3", "G", (3,),
                "-cos(3*eta)*sin(xi2)^3*p_eta^2 - 6*sin(eta)*sin(xi2)^2*cos(xi2)*p_eta*p_xi2"
                " - cos(eta)^3/sin(eta)^2*sin(xi2)^3*p_xi1^2"
                " + sin(xi2)*(3*cos(xi2)^2 - cos(eta)^2*sin(xi2)^2)/cos(eta)*p_xi2^2"
                " - 2*sin(xi2)^3*sin(xi1)*cos(eta)^2/(cos(xi2)*sin(eta))"),
        Fixture("K12", "K", (1, 2), k12.format(inner, "- 1"),
                printed=k12.format(inner, "- 2"),
                note="coefficient of the p_u p_eta term"),
    )
    return SystemDef(
        name="sphere3",
        chart=chart,
        L=MomentumPoly.parse(_SPHERE_GEODESIC + " + sin(xi1)/(cos(xi2)*cos(eta)*sin(eta))", chart),
        G=MomentumPoly.parse("sin(xi2)*cos(eta)", chart),
        c_tilde=E.ONE,
        L0_tilde=E.ZERO,
        parameters={},
        windows=dict(_SPHERE_WINDOWS),
        kappa=float(kappa),
        u_window=_window(0.5, 3),
        fixtures=fx,
        domain=dict(_SPHERE_DOMAIN),
        description="three-sphere with a compatible potential",
    )


def three_sphere_geodesic() -> SystemDef:
    """Geodesic L on S^3 with the four-parameter G = a4 x + a3 y + a2 z + a1 t."""
    chart = _SPHERE_CHART
    params = ("a1", "a2", "a3", "a4")
    G = ("(a3*sin(xi1) + a4*cos(xi1))*sin(eta) + (a1*sin(xi2) + a2*cos(xi2))*cos(eta)")
    return SystemDef(
        name="sphere3-geodesic",
        chart=chart,
        L=MomentumPoly.parse(_SPHERE_GEODESIC, chart, params),
        G=MomentumPoly.parse(G, chart, params),
        c_tilde=E.ONE,
        L0_tilde=E.ZERO,
        parameters={p: (-2.0, 2.0) for p in params},
        windows=dict(_SPHERE_WINDOWS),
        u_window=_window(0.5, 3),
        domain=dict(_SPHERE_DOMAIN),
        description="geodesic three-sphere, complete G",
    )


BUILTINS = {
    "oscillator": oscillator,
    "calogero": calogero,
    "sphere3": three_sphere,
}
_ALIASES = {"three_sphere": "sphere3", "three-sphere": "sphere3", "sphere": "sphere3"}


def get_system(name: str, kappa: float | None = None) -> SystemDef:
    key = _ALIASES.get(name, name)
    if key not in BUILTINS:
        raise SystemConfigError(f"unknown system {name!r}; builtins: {', '.join(BUILTINS)}")
    system = BUILTINS[key]()
    return system if kappa is None else system.with_kappa(kappa)


# ---------------------------------------------------------------------------
# config files

_interval = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_scalar = {"type": ["string", "number"]}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["name", "coordinates", "L", "G", "c_tilde", "L0_tilde"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "coordinates": {
            "type": "array", "minItems": 1,
            "items": {"type": "array", "items": {"type": "string", "minLength": 1},
                      "minItems": 2, "maxItems": 2},
        },
        "L": {"type": "string"},
        "G": {"type": "string"},
        "c_tilde": _scalar,
        "L0_tilde": _scalar,
        "A": _scalar,
        "kappa": {"type": "number"},
        "parameters": {"type": "object", "additionalProperties": _interval},
        "windows": {"type": "object", "additionalProperties": _interval},
        "poles": {"type": "object",
                  "additionalProperties": {"type": "array", "items": {"type": "number"}}},
        "pole_radius": {"type": "number", "exclusiveMinimum": 0},
        "u_window": _interval,
        "momentum_window": _interval,
    },
}


def _read_config(path: Path) -> dict:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SystemConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        try:
            return tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as exc:
            raise SystemConfigError(f"{path}: invalid TOML: {exc}") from exc
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SystemConfigError(f"{path}: invalid JSON: {exc}") from exc


def _const_expr(value, params, what: str) -> E.Expr:
    try:
        e = E.as_expr(_fraction(value)) if isinstance(value, (int, float)) else parse(str(value), params)
    except ParseError as exc:
        raise SystemConfigError(f"{what}: {exc}") from exc
    if e.variables():
        raise SystemConfigError(f"{what} must be constant, got {e}")
    return e


def system_from_config(cfg: dict, *, check: bool = True, trials: int = 50,
                       tol: float = 1e-9, seed: int | None = 0) -> SystemDef:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SystemConfigError(f"schema error at {where}: {exc.message}") from None
    try:
        chart = CanonicalChart(tuple(tuple(p) for p in cfg["coordinates"]))
    except ValueError as exc:
        raise SystemConfigError(str(exc)) from None
    parameters = {k: tuple(map(float, v)) for k, v in cfg.get("parameters", {}).items()}
    params = tuple(parameters)
    clash = set(params) & set(chart.names) | ({"u", "p_u"} & (set(params) | set(chart.names)))
    if clash:
        raise SystemConfigError(f"reserved or clashing names: {sorted(clash)}")

    radius = float(cfg.get("pole_radius", POLE_MARGIN))
    poles = cfg.get("poles", {})
    windows: dict[str, SampleWindow] = {}
    raw_windows = cfg.get("windows", {})
    for name in list(raw_windows) + list(poles):
        if name not in chart.names:
            raise SystemConfigError(f"window/pole given for unknown variable {name!r}")
    for q in chart.coordinates:
        if q not in raw_windows:
            raise SystemConfigError(f"missing sampling window for coordinate {q!r}")
    for name, (lo, hi) in raw_windows.items():
        centers = poles.get(name, ())
        try:
            w = SampleWindow(float(lo), float(hi), tuple((float(c), radius) for c in centers))
        except ValueError as exc:
            raise SystemConfigError(f"window for {name}: {exc}") from None
        _check_window(name, w)
        windows[name] = w
    for name in poles:
        if name not in raw_windows:
            raise SystemConfigError(f"poles declared for {name!r} without a window")

    def poly(key):
        try:
            return MomentumPoly.parse(cfg[key], chart, params)
        except ParseError as exc:
            raise SystemConfigError(f"{key}: {exc}") from None
        except Exception as exc:  # momentum misuse, unbound names, ...
            raise SystemConfigError(f"{key}: {exc}") from None

    L, G = poly("L"), poly("G")
    known = set(chart.names) | set(params)
    for key, p in (("L", L), ("G", G)):
        unknown = p.free_symbols() - known
        if unknown:
            raise SystemConfigError(f"{key} uses undeclared symbols {sorted(unknown)}")

    kw = {}
    if "u_window" in cfg:
        kw["u_window"] = _window(*cfg["u_window"])
    if "momentum_window" in cfg:
        kw["momentum_window"] = tuple(map(float, cfg["momentum_window"]))
    system = SystemDef(
        name=cfg["name"],
        chart=chart,
        L=L,
        G=G,
        c_tilde=_const_expr(cfg["c_tilde"], params, "c_tilde"),
        L0_tilde=_const_expr(cfg["L0_tilde"], params, "L0_tilde"),
        A=_const_expr(cfg.get("A", 1), params, "A"),
        kappa=float(cfg.get("kappa", 0.0)),
        parameters=parameters,
        windows=windows,
        **kw,
    )
    if check:
        res = cg_residual(system, system.G, trials=trials, tol=tol, seed=seed)
        if not res.passed:
            raise SystemConfigError(
                f"CG condition violated for {system.name!r} (max residual {res.max_ratio:.3g})")
    return system


def _check_window(name: str, w: SampleWindow):
    import numpy as np
    grid = np.linspace(w.lo, w.hi, 1001)
    if not w.contains(grid).any():
        raise SystemConfigError(f"window for {name} is entirely excluded by its poles")


def load_system(path, **kwargs) -> SystemDef:
    """Load and CG-validate a system from a JSON or TOML file."""
    path = Path(path)
    return system_from_config(_read_config(path), **kwargs)


def system_to_config(system: SystemDef) -> dict:
    """Inverse of :func:`load_system` (JSON-ready; fixtures are not exported)."""
    windows, poles = {}, {}
    for q, w in system.windows.items():
        windows[q] = [w.lo, w.hi]
        if w.poles:
            poles[q] = [c for c, _ in w.poles]
    cfg = {
        "name": system.name,
        "coordinates": [list(p) for p in system.chart.pairs],
        "L": str(system.L),
        "G": str(system.G),
        "c_tilde": str(system.c_tilde),
        "L0_tilde": str(system.L0_tilde),
        "A": str(system.A),
        "kappa": system.kappa,
        "parameters": {k: list(v) for k, v in system.parameters.items()},
        "windows": windows,
        "u_window": [system.u_window.lo, system.u_window.hi],
        "momentum_window": list(system.momentum_window),
    }
    if poles:
        cfg["poles"] = poles
    return cfg
