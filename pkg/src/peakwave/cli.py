"""Command-line interface: ``peakwave <command> [options]``.

Every output starts with a header recording the package version, the full
effective configuration and the seed.  Numbers are written with 17
significant digits so doubles round-trip exactly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 breaking guard tripped during time integration.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BlowUpError, PeakwaveError
from .evolution import (
    EvolutionState,
    LinearizedModel,
    NonlinearModel,
    h1_norm,
    integrate,
    random_admissible_perturbation,
    track_orbit,
)
from .functionals import mass_along_family, mass_derivative
from .phase_plane import (
    C_STAR,
    LevelEnergy,
    bifurcation_diagram,
    critical_speeds,
    first_integral,
    peaked_profile,
    period,
    period_singular,
    period_smooth,
    reconstruct_profile,
    solve_level_for_speed,
)
from .spectral_ops import K, T_inv, hilbert, ilw_K, tilde_K, tilde_T_inv
from .stability import (
    build_L_for_level,
    constrained_inertia,
    constraint_matrix,
    inertia,
    spectral_stability,
)

__all__ = ["RunConfig", "ConfigError", "parse_config", "run", "main"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BLOWUP = 0, 2, 3, 4


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.params[name]
        except KeyError:
            raise AttributeError(name) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return v
    conv.__name__ = kind.__name__
    return conv


def _even_grid(text):
    n = _positive(int)(text)
    if n % 2 or n < 16:
        raise argparse.ArgumentTypeError(f"N must be even and at least 16, got {text!r}")
    return n


def _depth(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return _positive(float)(text)


def build_parser() -> _Parser:
    p = _Parser(prog="peakwave", description="Traveling waves of the local shallow-water model.")
    p.add_argument("--version", action="version", version=f"peakwave {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, fmt="csv"):
        sp.add_argument("--config", help="key=value file; flags given on the command line win")
        sp.add_argument("--output", default="-", help="output file ('-' for stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)

    sp = sub.add_parser("bifurcation", help="roots of T(E, c) = 2 pi on all branches")
    common(sp)
    sp.add_argument("--c-min", type=_positive(float), default=0.2)
    sp.add_argument("--c-max", type=_positive(float), default=1.6)
    sp.add_argument("--points", type=_positive(int), default=200)

    sp = sub.add_parser("profile", help="sampled wave profile")
    common(sp)
    sp.add_argument("--c", type=_positive(float), default=1.05)
    sp.add_argument("--branch", choices=("smooth", "singular_lower", "singular_upper", "peaked"),
                    default="smooth")
    sp.add_argument("--N", type=_even_grid, default=512)

    sp = sub.add_parser("period", help="period function T(E, c)")
    common(sp)
    sp.add_argument("--c", type=_positive(float), default=1.05)
    sp.add_argument("--E", type=_positive(float), default=None,
                    help="single level; otherwise a midpoint sweep over (0, e-max * E_c)")
    sp.add_argument("--e-max", type=_positive(float), default=3.0)
    sp.add_argument("--points", type=_positive(int), default=200)

    sp = sub.add_parser("stability", help="inertia and spectral stability report")
    common(sp, fmt="json")
    sp.add_argument("--c", type=_positive(float), default=1.05)
    sp.add_argument("--N", type=_even_grid, default=256)
    sp.add_argument("--zero-tol", type=_positive(float), default=None,
                    help="absolute zero tolerance (default 1e-6 * ||L||)")

    sp = sub.add_parser("evolve", help="time integration of the nonlinear or linearized model")
    common(sp)
    sp.add_argument("--c", type=_positive(float), default=1.05)
    sp.add_argument("--N", type=_even_grid, default=512)
    sp.add_argument("--dt", type=_positive(float), default=1e-3)
    sp.add_argument("--t-final", type=_positive(float), default=10.0)
    sp.add_argument("--record-every", type=_positive(float), default=0.1)
    sp.add_argument("--mode", choices=("nonlinear", "linear"), default="nonlinear")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--perturbation", type=float, default=0.0,
                    help="amplitude of the seeded admissible perturbation (L2 norm)")
    sp.add_argument("--initial", choices=("wave", "peaked"), default="wave",
                    help="start from the smooth wave at --c, or (experimental) the peaked wave")

    sp = sub.add_parser("operators", help="Fourier symbols of the nonlocal operators")
    common(sp)
    sp.add_argument("--h", type=_depth, default=1.0)
    sp.add_argument("--N", type=_even_grid, default=64)

    sp = sub.add_parser("report", help="write every figure-equivalent dataset to a directory")
    sp.add_argument("--config")
    sp.add_argument("--output", default="report")
    sp.add_argument("--N", type=_even_grid, default=512)
    sp.add_argument("--points", type=_positive(int), default=200)
    return p


def _read_config_file(path, subparser):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    known = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = action
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in known or key in ("config", "help"):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        tokens += [f"--{key}", value]
    return tokens


def parse_config(argv) -> RunConfig:
    """Parse flags, merging an optional --config file underneath them."""
    argv = list(argv)
    parser = build_parser()
    if not argv:
        raise ConfigError(parser.format_usage().strip())
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise ConfigError(parser.format_usage().strip())
    if getattr(ns, "config", None):
        sub = parser._subparsers._group_actions[0].choices[ns.command]
        file_tokens = _read_config_file(ns.config, sub)
        ns = parser.parse_args([ns.command] + file_tokens + argv[1:])
    params = {k: v for k, v in vars(ns).items() if k != "command"}
    cfg = RunConfig(ns.command, params)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    p = cfg.params
    if cfg.command == "bifurcation":
        if not p["c_max"] > p["c_min"]:
            raise ConfigError("--c-max must exceed --c-min")
        if p["points"] < 2:
            raise ConfigError("--points must be at least 2")
    if cfg.command == "evolve":
        n = p["t_final"] / p["dt"]
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ConfigError("--t-final must be an integer multiple of --dt")
        if p["mode"] == "linear" and p["perturbation"] == 0.0:
            p["perturbation"] = 1e-2
        if p["initial"] == "peaked":
            if p["mode"] == "linear":
                raise ConfigError("the linearized flow needs a smooth background; use --initial wave")
            p["c"] = C_STAR
    if cfg.command == "profile" and p["branch"] == "peaked" and abs(p["c"] - C_STAR) > 1e-3:
        raise ConfigError(f"the peaked wave exists only at c = {C_STAR:.16g}")
    if cfg.command == "period" and p["points"] < 2:
        raise ConfigError("--points must be at least 2")


# ----------------------------------------------------------------- output

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    return str(x)


def _header(cfg: RunConfig, extra=None) -> dict:
    conf = {k: v for k, v in cfg.params.items() if k not in ("output",)}
    h = {"version": __version__, "command": cfg.command}
    h.update({f"config.{k}": ("inf" if isinstance(v, float) and math.isinf(v) else v)
              for k, v in sorted(conf.items())})
    h["seed"] = cfg.params.get("seed", "none")
    if extra:
        h.update(extra)
    return h


def render_csv(header: dict, columns, rows) -> str:
    buf = io.StringIO(newline="")
    for k, v in header.items():
        buf.write(f"# {k} = {_fmt(v) if v is not None else 'none'}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def render_json(header: dict, body: dict) -> str:
    return json.dumps(_jsonable({"header": header, **body}), indent=2, sort_keys=False) + "\n"


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _emit(cfg, columns, rows, extra=None):
    header = _header(cfg, extra)
    if cfg.params.get("format", "csv") == "json":
        body = {"columns": list(columns), "rows": [list(r) for r in rows]}
        return render_json(header, body)
    return render_csv(header, columns, rows)


def _workers():
    raw = os.environ.get("PEAKWAVE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"PEAKWAVE_THREADS must be an integer, got {raw!r}") from None


# --------------------------------------------------------------- commands

BIFURCATION_COLUMNS = ("c", "branch", "E", "sup_norm", "max_abs_eta")


def _bifurcation_rows(c_min, c_max, points):
    rows = bifurcation_diagram(c_min, c_max, points, workers=_workers())
    return [(c, b, E, sup, math.sqrt(2.0 * E)) for c, b, E, sup in rows]


def cmd_bifurcation(cfg):
    rows = _bifurcation_rows(cfg.c_min, cfg.c_max, cfg.points)
    c_star, c_inf = critical_speeds()
    return _emit(cfg, BIFURCATION_COLUMNS, rows, {"c_star": c_star, "c_infinity": c_inf})


def _profile(c, branch, N):
    if branch == "peaked":
        return peaked_profile(N)
    return reconstruct_profile(solve_level_for_speed(c, branch), N)


def cmd_profile(cfg):
    p = _profile(cfg.c, cfg.branch, cfg.N)
    rows = list(zip(p.u, p.eta))
    extra = {"kind": p.kind, "c": p.c, "E": p.E}
    return _emit(cfg, ("u", "eta"), rows, extra)


def _period_rows(c, e_max, points):
    Ec = c ** 4 / 8.0
    rows = []
    for E in Ec * e_max * (np.arange(points) + 0.5) / points:
        L = LevelEnergy(float(E), c)
        if L.E < L.E_c:
            q = period_smooth(L)
        else:
            q = period_singular(L)
        ell = period(L.E, c)
        rows.append((L.E, q.T, ell, q.error, L.regime))
    return rows


def cmd_period(cfg):
    cols = ("E", "T_quadrature", "T_elliptic", "quadrature_error", "regime")
    if cfg.E is not None:
        L = LevelEnergy(cfg.E, cfg.c)
        q = period_smooth(L) if L.E < L.E_c else period_singular(L)
        rows = [(L.E, q.T, period(L.E, cfg.c), q.error, L.regime)]
    else:
        rows = _period_rows(cfg.c, cfg.e_max, cfg.points)
    return _emit(cfg, cols, rows, {"E_c": cfg.c ** 4 / 8.0})


def _counts(prefix, r):
    return {f"{prefix}_n_neg": r.n_neg, f"{prefix}_n_zero": r.n_zero, f"{prefix}_n_pos": r.n_pos,
            f"{prefix}_zero_tol": r.zero_tol, f"{prefix}_lowest_eigenvalues": r.eigenvalues[:5]}


def stability_report(c: float, N: int, zero_tol=None) -> dict:
    """Flat report: inertia with and without constraints, A, and the skew spectrum."""
    L = solve_level_for_speed(c, "smooth")
    Lm = build_L_for_level(L, N)
    coer = constrained_inertia(Lm, zero_tol, project_kernel=True)
    A = constraint_matrix(Lm, zero_tol)
    spec = spectral_stability(Lm)
    v = Lm.to_basis(Lm.eta_u)
    report = {"c": c, "n": N, "energy_level": L.E}
    report.update(_counts("unconstrained", inertia(Lm, zero_tol)))
    report.update(_counts("constrained", constrained_inertia(Lm, zero_tol)))
    report.update(_counts("coercive", coer))
    report["coercive_min_eigenvalue"] = coer.eigenvalues[0]
    report["kernel_residual"] = float(np.linalg.norm(Lm.entries @ v) / np.linalg.norm(v))
    report["constraint_matrix"] = A.matrix
    report["det_a"] = A.det
    report["trace_a"] = A.trace
    if 1.0 < c - 1e-5 and c + 1e-5 < C_STAR:
        md = mass_derivative(c)
        report["mass_derivative"] = md
        report["det_a_from_mass_derivative"] = -math.pi * md / (2.0 * c)
    report["spectral_max_abs_real"] = spec.max_abs_real
    report["spectral_max_abs"] = spec.max_abs
    report["spectral_eigenvalues"] = [[float(z.real), float(z.imag)]
                                      for z in np.sort_complex(spec.eigenvalues)]
    return report


def cmd_stability(cfg):
    body = stability_report(cfg.c, cfg.N, cfg.zero_tol)
    if cfg.format == "json":
        return render_json(_header(cfg), body)
    flat = []
    for key, x in body.items():
        arr = np.asarray(x)
        if key == "spectral_eigenvalues":
            flat += [(f"{key}.{i}", re, im) for i, (re, im) in enumerate(arr)]
        elif arr.ndim:
            flat += [(f"{key}.{i}", float(v), 0.0) for i, v in enumerate(arr.ravel())]
        else:
            flat.append((key, x, 0.0))
    return render_csv(_header(cfg), ("key", "value", "imag"), flat)


def evolve_rows(c, N, dt, t_final, record_every, mode, seed, perturbation, initial="wave"):
    if initial == "peaked":
        wave = peaked_profile(N)
    else:
        wave = reconstruct_profile(solve_level_for_speed(c, "smooth", tol=0.0), N)
    if mode == "nonlinear":
        model = NonlinearModel(N, c)
        base = model.coefficients(wave.eta)
        a0 = base.copy()
        if perturbation:
            if initial == "peaked":
                raise ConfigError("--perturbation needs a smooth background")
            lin = LinearizedModel(wave)
            a0 = a0 + model.coefficients(random_admissible_perturbation(lin, seed, amplitude=perturbation))
        run = integrate(EvolutionState(0.0, a0, c), model, dt, t_final, record_every)
        ep = np.fft.irfft(model.dk * base, N)
        epn = float(ep @ ep)
        rows = []
        for s in run:
            d = s.values() - np.fft.irfft(base, N)
            a = float(d @ ep) / epn
            res = h1_norm(np.fft.rfft(d - a * ep), N)
            rows.append((s.t, s.ledger.M, s.ledger.Q, s.ledger.H, float(np.max(np.abs(s.values()))),
                         res, a, s.diagnostics["tail_energy"]))
        return ("t", "M", "Q", "H", "sup_norm", "residual_norm", "a", "tail_energy"), rows
    model = LinearizedModel(wave)
    w0 = random_admissible_perturbation(model, seed, amplitude=perturbation)
    run = integrate(EvolutionState(0.0, model.coefficients(w0), c), model, dt, t_final, record_every)
    track = track_orbit(run, model)
    rows = []
    for i, s in enumerate(run):
        d = s.diagnostics
        rows.append((s.t, s.ledger.M, s.ledger.Q, s.ledger.H, float(np.max(np.abs(s.values()))),
                     track.residual_norm[i], track.a[i], track.a_dot[i],
                     d["mean_constraint"], d["curvature_constraint"], d["energy"]))
    cols = ("t", "M", "Q", "H", "sup_norm", "residual_norm", "a", "a_dot",
            "mean_constraint", "curvature_constraint", "energy")
    return cols, rows


def cmd_evolve(cfg):
    cols, rows = evolve_rows(cfg.c, cfg.N, cfg.dt, cfg.t_final, cfg.record_every, cfg.mode,
                             cfg.seed, cfg.perturbation, cfg.initial)
    extra = {"experimental": "true"} if cfg.initial == "peaked" else None
    return _emit(cfg, cols, rows, extra)


def cmd_operators(cfg):
    h, N = cfg.h, cfg.N
    n = np.arange(0, N // 2 + 1, dtype=float)
    cols = ["n", "K", "T_inv_imag", "hilbert_imag"]
    data = [n, K(h)(n).real, T_inv(h)(n).imag, hilbert()(n).imag]
    if math.isfinite(h):
        cols += ["tilde_K", "tilde_T_inv_imag", "ilw_K", "shallow_limit_K"]
        data += [tilde_K(h)(n).real, tilde_T_inv(h)(n).imag, ilw_K(h)(n).real, h * n * n / 3.0]
    rows = [tuple([int(r[0])] + list(r[1:])) for r in zip(*data)]
    return _emit(cfg, cols, rows)


def cmd_report(cfg):
    """Datasets behind every figure: profiles, bifurcation diagram, phase portrait,
    period curves and the (E, M) family along the smooth branch."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    N, points = cfg.N, cfg.points
    c_star, c_inf = critical_speeds()
    written = []

    def put(name, cols, rows, extra=None):
        header = _header(cfg, {"dataset": name, **(extra or {})})
        _write(str(out / name), render_csv(header, cols, rows))
        written.append(name)

    rows = []
    for c in (1.02, 1.05, 1.08, 1.10):
        p = _profile(c, "smooth", N)
        rows += [(c, "smooth", u, e) for u, e in zip(p.u, p.eta)]
    p = peaked_profile(N)
    rows += [(p.c, "peaked", u, e) for u, e in zip(p.u, p.eta)]
    for c in (1.12, 1.15, 1.18):
        p = _profile(c, "singular_lower", N)
        rows += [(c, "singular_lower", u, e) for u, e in zip(p.u, p.eta)]
    put("profiles.csv", ("c", "branch", "u", "eta"), rows)

    put("bifurcation.csv", BIFURCATION_COLUMNS, _bifurcation_rows(0.2, 1.6, points),
        {"c_star": c_star, "c_infinity": c_inf})

    eta = np.linspace(-1.0, 0.75, 141)
    deta = np.linspace(-1.5, 1.5, 121)
    rows = [(x, y, first_integral(x, y, 1.0)) for x in eta for y in deta]
    put("phase_portrait.csv", ("eta", "eta_prime", "E"), rows, {"c": 1.0})

    for c in (1.05, 1.1):
        put(f"period_c{c:.2f}.csv", ("E", "T_quadrature", "T_elliptic", "quadrature_error", "regime"),
            _period_rows(c, 3.0, points), {"c": c, "E_c": c ** 4 / 8.0})

    rows = []
    for c in np.linspace(1.0, c_star, points + 2)[1:-1]:
        c = float(c)
        L = solve_level_for_speed(c, "smooth")
        rows.append((c, L.E, mass_along_family(c)))
    put("family.csv", ("c", "E", "M"), rows,
        {"E_at_c_star": math.pi ** 4 / 512.0, "M_at_c_star": -math.pi ** 3 / 24.0})
    return "".join(f"{out / name}\n" for name in written)


_DISPATCH = {
    "bifurcation": cmd_bifurcation,
    "profile": cmd_profile,
    "period": cmd_period,
    "stability": cmd_stability,
    "evolve": cmd_evolve,
    "operators": cmd_operators,
    "report": cmd_report,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit status."""
    try:
        text = _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (PeakwaveError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.command == "report":
        sys.stdout.write(text)
    else:
        _write(cfg.output, text)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
