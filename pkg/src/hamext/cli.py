"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field

from .errors import HamextError, SamplingError, SystemConfigError
from .extension import (construct, first_integral_pd, gn_closed, gn_recursive, lambda_of,
                        cg_residual)
from .phasespace import MomentumPoly, numeric_difference
from .systems import SystemDef, get_system, load_system
from .symexpr.numeric import zero_test
from .verify import bracket_residual, conservation_drift

log = logging.getLogger("hamext")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SCHEMA = 1


class UsageError(Exception):
    pass


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamext", description="(m,n)-extensions of Hamiltonian systems")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mn_help="extension indices m n"):
        sp.add_argument("args", nargs="*", metavar="ARG",
                        help=f"<system> {mn_help}; omit <system> with --system-file")
        sp.add_argument("--system-file", metavar="PATH", help="JSON or TOML system config")
        sp.add_argument("--kappa", type=float, default=0.0)
        sp.add_argument("--format", choices=("plain", "latex", "json"), default=None)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    common(sub.add_parser("construct", help="print G_n, H_{m,n}, K_{m,n}"))
    v = common(sub.add_parser("verify", help="run the verification suite for one (m, n)"))
    v.add_argument("--trials", type=positive_int, default=100)
    v.add_argument("--tol", type=positive_float, default=1e-8)
    v.add_argument("--self-test-negate", action="store_true",
                   help="flip the sign of one term of K and the fixtures (negative control)")
    i = common(sub.add_parser("integrate", help="RK4 conservation run"))
    i.add_argument("--t-end", type=positive_float, default=10.0)
    i.add_argument("--dt", type=positive_float, default=1e-3)
    i.add_argument("--drift-tol", type=positive_float, default=1e-6)
    i.add_argument("--start", metavar="NAME=VALUE,...", help="initial state and parameter values")
    s = common(sub.add_parser("sweep", help="degree/residual table over an (m, n) grid"),
               "max_m max_n")
    s.add_argument("--trials", type=positive_int, default=100)
    s.add_argument("--tol", type=positive_float, default=1e-8)
    return p


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.detail}


def _resolve(ns) -> tuple[SystemDef, list[int]]:
    args = list(ns.args)
    if ns.system_file:
        system = load_system(ns.system_file, seed=ns.seed)
        system = system.with_kappa(ns.kappa)
    else:
        if not args:
            raise UsageError("missing <system>")
        name = args.pop(0)
        if name.endswith((".json", ".toml")):
            system = load_system(name, seed=ns.seed).with_kappa(ns.kappa)
        else:
            system = get_system(name, ns.kappa)
    if len(args) != 2:
        raise UsageError(f"expected two integers after the system, got {args}")
    try:
        nums = [positive_int(a) for a in args]
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None
    return system, nums


def _emit(obj: dict, fmt: str, plain_lines: list[str]):
    if fmt == "json":
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print("\n".join(plain_lines))


# ---------------------------------------------------------------------------
# construct


def cmd_construct(ns) -> int:
    system, (m, n) = _resolve(ns)
    fmt = ns.format or "plain"
    c = construct(system, system.spec(m, n))
    bound = m + n * (1 + system.G.degree()) - 1
    items = [("G_n", f"G_{n}", f"G_{{{n}}}", c.G_n), ("H", f"H_{m},{n}", f"H_{{{m},{n}}}", c.H),
             ("K", f"K_{m},{n}", f"K_{{{m},{n}}}", c.K)]
    degrees = {"G_n": c.G_n.degree(), "K": c.K.degree(), "K_bound": bound}
    if fmt == "json":
        obj = {"schema": SCHEMA, "command": "construct", "system": system.name, "m": m, "n": n,
               "kappa": system.kappa, "degrees": degrees,
               "expressions": {k: {"text": p.to_text(), "latex": p.to_latex()}
                               for k, _, _, p in items}}
        _emit(obj, fmt, [])
    elif fmt == "latex":
        for _, _, tex, p in items:
            print(f"{tex} = {p.to_latex()}")
    else:
        print(f"# {system.name}  (m, n) = ({m}, {n})  kappa = {system.kappa:g}")
        for _, label, _, p in items:
            print(f"{label} = {p.to_text()}")
        print(f"degree(G_{n}) = {degrees['G_n']}  degree(K) = {degrees['K']}  bound = {bound}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def tamper(f: MomentumPoly) -> MomentumPoly:
    """Flip the sign of the leading momentum group (a detectable corruption)."""
    idx, coef = f._ordered_groups()[0]
    chart = f.chart
    mono = MomentumPoly.constant(1, chart)
    for p, k in zip(chart.momenta, idx):
        if k:
            mono = mono * MomentumPoly.momentum(p, chart) ** k
    return f - (mono * coef).scale(2)


def run_verify(system: SystemDef, m: int, n: int, *, trials: int = 100, tol: float = 1e-8,
               seed: int = 0, negate: bool = False) -> list[Check]:
    checks: list[Check] = []

    def zt(name, poly, tol_=tol, **extra):
        res = zero_test(poly, system.sampling_windows(), trials, tol_, seed=seed)
        checks.append(Check(name, res.passed, {"max_residual": res.max_ratio, **extra}))

    cg = cg_residual(system, system.G, trials=trials, tol=tol, seed=seed)
    checks.append(Check("cg_condition", cg.passed, {"max_residual": cg.max_ratio}))

    Gn = gn_recursive(system.G, system.L, n)
    zt("gn_routes", (Gn - gn_closed(system.G, system.L, lambda_of(system), n)).poly)

    c = construct(system, system.spec(m, n))
    K = tamper(c.K) if negate else c.K
    zt("k_routes", (K - first_integral_pd(system, c.spec, Gn)).poly)

    ok, worst = bracket_residual(c.H, K, system, trials, tol, seed=seed)
    checks.append(Check("bracket_H_K", ok, {"max_residual": worst}))
    ok, worst = bracket_residual(c.H, c.L, system, trials, tol, seed=seed)
    checks.append(Check("bracket_H_L", ok, {"max_residual": worst}))

    bound = m + n * (1 + system.G.degree()) - 1
    checks.append(Check("degree_bound", c.K.degree() <= bound,
                        {"degree": c.K.degree(), "bound": bound}))

    for name, fx in system.fixtures.items():
        if fx.kind == "G" and fx.index == (n,):
            got = Gn
        elif fx.kind == "K" and fx.index == (m, n) and fx.kappa in (None, system.kappa):
            got = c.K
        else:
            continue
        ref = system.fixture(name)
        if negate:
            ref = tamper(ref)
        res = numeric_difference(got, ref, system, 50, 1e-9, seed=seed)
        checks.append(Check(f"fixture_{name}", res.passed, {"max_residual": res.max_ratio}))
    return checks


def cmd_verify(ns) -> int:
    system, (m, n) = _resolve(ns)
    checks = run_verify(system, m, n, trials=ns.trials, tol=ns.tol, seed=ns.seed,
                        negate=ns.self_test_negate)
    passed = all(ch.passed for ch in checks)
    obj = {"schema": SCHEMA, "command": "verify", "system": system.name, "m": m, "n": n,
           "kappa": system.kappa, "trials": ns.trials, "tol": ns.tol, "seed": ns.seed,
           "negated": ns.self_test_negate, "passed": passed,
           "checks": [ch.to_dict() for ch in checks]}
    lines = [f"{'PASS' if ch.passed else 'FAIL'}  {ch.name:<16} "
             + " ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in ch.detail.items()) for ch in checks]
    lines.append(f"{system.name} ({m},{n}): {'PASS' if passed else 'FAIL'}")
    _emit(obj, ns.format or "json", lines)
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# integrate


def _parse_start(text: str | None) -> dict[str, float]:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad --start item {item!r}; expected NAME=VALUE")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad value in --start: {item!r}") from None
    return out


def cmd_integrate(ns) -> int:
    system, (m, n) = _resolve(ns)
    c = construct(system, system.spec(m, n))
    start = system.default_start(ns.seed)
    overrides = _parse_start(ns.start)
    unknown = set(overrides) - set(start)
    if unknown:
        raise UsageError(f"unknown names in --start: {sorted(unknown)}")
    start.update(overrides)
    report = conservation_drift(c.H, {"H": c.H, "L": c.L, "K": c.K}, start, ns.t_end, ns.dt,
                                threshold=ns.drift_tol, bounds=system.integration_bounds())
    obj = report.to_dict()
    obj.update({"command": "integrate", "system": system.name, "m": m, "n": n,
                "kappa": system.kappa, "start": start})
    lines = [f"{d.name}: drift {d.drift:.3e} ({'ok' if d.conserved else 'NOT conserved'})"
             for d in report.integrals]
    lines.append(f"steps {report.steps}  t {report.t_reached:g}/{report.t_end:g}"
                 + ("  TRUNCATED" if report.truncated else ""))
    _emit(obj, ns.format or "json", lines)
    return EXIT_OK if report.all_conserved else EXIT_FAIL


# ---------------------------------------------------------------------------
# sweep


def _oscillator_factor_check(system, c22, c11, trials, tol, seed):
    # K_{2,2} = 2 K_{1,1} (p_x p_u + 2 omega^2 x u)
    chart = c22.K.chart
    fac = MomentumPoly.parse("p_x*p_u + 2*omega^2*x*u", chart, ("omega",))
    diff = c22.K - c11.K * fac.scale(2)
    return zero_test(diff.poly, system.sampling_windows(), trials, tol, seed=seed).passed


def cmd_sweep(ns) -> int:
    system, (max_m, max_n) = _resolve(ns)
    rows = []
    built = {}
    for m in range(1, max_m + 1):
        for n in range(1, max_n + 1):
            c = construct(system, system.spec(m, n))
            built[m, n] = c
            ok, worst = bracket_residual(c.H, c.K, system, ns.trials, ns.tol, seed=ns.seed)
            rows.append({"m": m, "n": n, "degree": c.K.degree(),
                         "bound": m + n * (1 + system.G.degree()) - 1,
                         "terms": len(c.K), "max_residual": worst, "passed": ok})
    factor = None
    if system.name == "oscillator" and (2, 2) in built:
        factor = _oscillator_factor_check(system, built[2, 2], built[1, 1], ns.trials, ns.tol, ns.seed)
    passed = all(r["passed"] for r in rows) and factor is not False
    obj = {"schema": SCHEMA, "command": "sweep", "system": system.name, "kappa": system.kappa,
           "rows": rows, "factorization_2_2": factor, "passed": passed}
    lines = [f"{'m':>2} {'n':>2} {'deg':>4} {'bound':>5} {'terms':>6} {'residual':>10}  status"]
    for r in rows:
        lines.append(f"{r['m']:>2} {r['n']:>2} {r['degree']:>4} {r['bound']:>5} {r['terms']:>6} "
                     f"{r['max_residual']:>10.2e}  {'PASS' if r['passed'] else 'FAIL'}")
    if factor is not None:
        lines.append(f"K_2,2 = 2 K_1,1 (p_x p_u + 2 omega^2 x u): {'PASS' if factor else 'FAIL'}")
    _emit(obj, ns.format or "plain", lines)
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify,
            "integrate": cmd_integrate, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        print(f"hamext {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemConfigError as exc:
        print(f"hamext: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SamplingError as exc:
        print(f"hamext: sampling failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HamextError as exc:
        print(f"hamext: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
