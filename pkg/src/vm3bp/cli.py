"""Command-line harness: ``vm3bp {equilibria,propagate,simulate,verify,sweep}``.

Exit codes: 0 success, 1 usage or configuration error, 2 solver or
integration failure, 3 verification threshold exceeded.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, RunConfig, convert_value, load_config
from .emit import atomic_write, write_csv, write_json, write_svg_polyline
from .equilibria import (
    LABELS,
    EquilibriumPoint,
    collinear,
    coplanar,
    find_points,
    kappa_bound,
    label_key,
    ring,
    triangular,
)
from .errors import DomainError
from .mass_laws import KappaLaw, parse_law
from .odecore import IntegrationError
from .primary import PrimaryEphemeris, SystemConfig, propagate
from .third_body import seed_state, self_similarity_residual, simulate

log = logging.getLogger("vm3bp")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_THRESHOLD = 0, 1, 2, 3
NEAR_LIMIT = 1e-6  # kappa - 1 below this is flagged in sweeps
EQ_HEADER = ["nu", "kappa", "label", "xi", "eta", "zeta", "residual"]
EPH_HEADER = ["t", "u", "R", "Rdot", "theta", "omega"]
TRAJ_HEADER = ["t", "x", "y", "z", "vx", "vy", "vz"]
COPLANAR_LABELS = LABELS[6:12]


class SolverFailure(RuntimeError):
    """An integration or root solve did not produce a usable result."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# -- shared plumbing -------------------------------------------------------------


def _prepare(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    atomic_write(os.path.join(cfg.out, "config.ini"), cfg.to_ini())
    return cfg.out


def _law(cfg: RunConfig):
    try:
        return parse_law(cfg.mass_law, kappa=cfg.kappa, G=cfg.G, t_span=cfg.t_span,
                         settings=cfg.settings)
    except ArithmeticError as exc:
        raise SolverFailure(str(exc)) from exc


def _system(cfg: RunConfig, law=None) -> SystemConfig:
    return SystemConfig(cfg.nu, cfg.G, cfg.mode, law if law is not None else _law(cfg))


def _ephemeris(cfg: RunConfig, system: SystemConfig) -> PrimaryEphemeris:
    eph = propagate(system, cfg.t_span, cfg.settings)
    if not eph.solution.success:
        raise SolverFailure(f"primary propagation failed: {eph.solution.message}")
    return eph


def _dense_times(solution, n=501):
    return np.union1d(solution.t, np.linspace(solution.t0, solution.t_end, n))


def _points(cfg: RunConfig, law) -> list[tuple[str, np.ndarray]]:
    """Selected seeds as ``(label, (xi, eta, zeta))`` after the mode and law guards."""
    labels = list(cfg.points)
    wants_coplanar = [lab for lab in labels if lab in COPLANAR_LABELS]
    if wants_coplanar and not isinstance(law, KappaLaw):
        raise ConfigError("points", f"{', '.join(wants_coplanar)} exist only under the kappa mass law")
    if wants_coplanar and cfg.mode != "rotating":
        raise ConfigError("points", "coplanar points belong to the rotating mode")
    if "L0" in labels and cfg.mode != "collinear":
        raise ConfigError("points", "the ring L0 exists only in collinear mode")
    out = []
    for p in find_points(labels, cfg.nu, cfg.kappa, cfg.ring_phase):
        out.append((p.label, p.position))
    for i, xyz in enumerate(cfg.explicit_points, 1):
        out.append((f"P{i}", np.asarray(xyz, float)))
    if not out:
        raise ConfigError("points", "no points selected")
    return out


def _eq_row(p: EquilibriumPoint, kappa=None):
    k = p.kappa if p.kappa is not None else kappa
    return [p.nu, k, p.label, p.xi, p.eta, p.zeta, p.residual_norm]


# -- subcommands -----------------------------------------------------------------


def run_equilibria(cfg: RunConfig) -> int:
    """Solve the requested equilibrium families and write JSON and CSV."""
    out = _prepare(cfg)
    pts: list[EquilibriumPoint] = []
    for fam in cfg.families:
        if fam == "collinear":
            pts += collinear(cfg.nu)
        elif fam == "triangular":
            pts += triangular(cfg.nu)
        elif fam == "coplanar":
            if cfg.kappa is None:
                raise ConfigError("kappa", "the coplanar family needs a kappa value")
            pts += coplanar(cfg.nu, cfg.kappa)
        elif fam == "ring":
            pts.append(ring(cfg.nu).equilibrium(cfg.ring_phase))
    pts.sort(key=lambda p: label_key(p.label))
    write_json(os.path.join(out, "equilibria.json"), [p.to_dict() for p in pts])
    write_csv(os.path.join(out, "equilibria.csv"), EQ_HEADER, [_eq_row(p) for p in pts])
    for p in pts:
        print(f"{p.label:6s} xi={p.xi:+.12f} eta={p.eta:+.12f} zeta={p.zeta:+.12f} "
              f"residual={p.residual_norm:.2e}")
    return EXIT_OK


def run_propagate(cfg: RunConfig) -> int:
    """Propagate the primaries and write the ephemeris table."""
    out = _prepare(cfg)
    eph = _ephemeris(cfg, _system(cfg))
    t = _dense_times(eph.solution)
    table = eph.table(t)
    write_csv(os.path.join(out, "ephemeris.csv"), EPH_HEADER, table)
    if cfg.svg:
        write_svg_polyline(os.path.join(out, "ephemeris.svg"), [(table[:, 0], table[:, 2])],
                           title=f"R(t), {cfg.mode}, {cfg.mass_law}")
    print(f"status={eph.status} t_end={eph.t_end!r} steps={eph.solution.n_steps}")
    return EXIT_OK


def _simulate_points(cfg: RunConfig):
    law = _law(cfg)
    system = _system(cfg, law)
    pts = _points(cfg, law)
    eph = _ephemeris(cfg, system)
    results = []
    for label, p in pts:
        traj = simulate(system, eph, seed_state(eph, p), settings=cfg.settings)
        if not traj.solution.success:
            raise SolverFailure(f"{label}: {traj.solution.message}")
        results.append((label, p, traj))
    return law, eph, results


def run_simulate(cfg: RunConfig) -> int:
    """Integrate the third body from each selected point."""
    _, _, results = _simulate_points(cfg)
    out = _prepare(cfg)
    for label, _, traj in results:
        table = traj.table(_dense_times(traj.solution))
        write_csv(os.path.join(out, f"trajectory_{label}.csv"), TRAJ_HEADER, table)
        if cfg.svg:
            write_svg_polyline(os.path.join(out, f"trajectory_{label}.svg"),
                               [(table[:, 1], table[:, 2])], title=f"{label} x-y",
                               equal_aspect=True)
        print(f"{label}: status={traj.status} t_end={traj.t_end!r} steps={traj.solution.n_steps}")
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    """Measure self-similarity residuals; exit 3 above the threshold."""
    law, eph, results = _simulate_points(cfg)
    out = _prepare(cfg)
    report = []
    worst = 0.0
    for label, p, traj in results:
        res = self_similarity_residual(traj, eph, p)
        worst = res if not res < worst else worst
        report.append({
            "point_label": label,
            "xi": float(p[0]),
            "eta": float(p[1]),
            "zeta": float(p[2]),
            "law": law.to_spec(),
            "t_end": traj.t_end,
            "residual": res,
        })
        ok = res < cfg.threshold
        print(f"{label}: residual={res:.3e} {'ok' if ok else 'EXCEEDS'} ({cfg.threshold:g})")
    write_json(os.path.join(out, "residuals.json"), report)
    return EXIT_OK if worst < cfg.threshold else EXIT_THRESHOLD


def _sweep_cell(nu: float, kappa: float | None):
    """Rows and flags for one ``(nu, kappa)`` cell; failures become flags."""
    rows, flags = [], []
    try:
        for p in collinear(nu) + triangular(nu):
            rows.append(_eq_row(p, kappa))
        if kappa is not None:
            cop = coplanar(nu, kappa)
            rows += [_eq_row(p) for p in cop]
            if kappa - 1.0 < NEAR_LIMIT:
                zmax = max((abs(p.zeta) for p in cop), default=math.nan)
                flags.append([nu, kappa, "near-limit", f"max|zeta|={zmax!r}"])
            if not cop:
                flags.append([nu, kappa, "no-coplanar", ""])
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        flags.append([nu, kappa, "failed", str(exc).replace(",", ";")])
    return rows, flags


def _bound_cell(nu: float):
    try:
        return nu, kappa_bound(nu), ""
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return nu, math.nan, str(exc).replace(",", ";")


def run_sweep(cfg: RunConfig) -> int:
    """Equilibria over a (nu, kappa) grid plus the kappa bound summary."""
    out = _prepare(cfg)
    nus = sorted(set(cfg.nu_grid or (cfg.nu,)))
    kappas = sorted(set(cfg.kappa_grid)) or ([cfg.kappa] if cfg.kappa is not None else [None])
    cells = [(nu, k) for nu in nus for k in kappas]
    with_kappa = any(k is not None for k in kappas)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            cell_results = list(pool.map(_sweep_cell, *zip(*cells)))
            bounds = list(pool.map(_bound_cell, nus)) if with_kappa else []
    else:
        cell_results = [_sweep_cell(nu, k) for nu, k in cells]
        bounds = [_bound_cell(nu) for nu in nus] if with_kappa else []

    rows = [r for rs, _ in cell_results for r in rs]
    flags = [f for _, fs in cell_results for f in fs]
    kkey = lambda k: -math.inf if k is None else k  # noqa: E731
    rows.sort(key=lambda r: (r[0], kkey(r[1]), label_key(r[2])))
    flags.sort(key=lambda f: (f[0], kkey(f[1]), f[2]))
    write_csv(os.path.join(out, "sweep.csv"), EQ_HEADER, rows)
    write_csv(os.path.join(out, "flags.csv"), ["nu", "kappa", "flag", "detail"], flags)
    if with_kappa:
        summary = [[nu, "none" if kb is None else kb, msg] for nu, kb, msg in bounds]
        write_csv(os.path.join(out, "kappa_bound.csv"), ["nu", "kappa_max", "detail"], summary)
        for nu, kb, _ in bounds:
            print(f"nu={nu!r}: kappa_max={'none (no off-axis coplanar family)' if kb is None else kb}")
    print(f"{len(rows)} rows, {len(flags)} flags over {len(cells)} cells")
    failed = sum(1 for f in flags if f[2] == "failed")
    return EXIT_SOLVER if cells and failed == len(cells) else EXIT_OK


COMMANDS = {
    "equilibria": run_equilibria,
    "propagate": run_propagate,
    "simulate": run_simulate,
    "verify": run_verify,
    "sweep": run_sweep,
}


# -- argument parsing ------------------------------------------------------------

# flag -> config field; values are parsed with the config grammar
_FLAGS = {
    "--nu": "nu",
    "--G": "G",
    "--kappa": "kappa",
    "--mass-law": "mass_law",
    "--t0": "t0",
    "--t-end": "t_end",
    "--rtol": "rtol",
    "--atol": "atol",
    "--max-steps": "max_steps",
    "--points": "points",
    "--explicit": "explicit_points",
    "--ring-phase": "ring_phase",
    "--mode": "mode",
    "--out": "out",
    "--families": "families",
    "--threshold": "threshold",
    "--nu-grid": "nu_grid",
    "--kappa-grid": "kappa_grid",
    "--workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vm3bp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0])
        p.add_argument("--config", help="INI run configuration (flags override it)")
        for flag, field_name in _FLAGS.items():
            p.add_argument(flag, dest=field_name, default=None, metavar=field_name.upper())
        p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    return parser


def config_from_args(args) -> RunConfig:
    overrides = {}
    for field_name in _FLAGS.values():
        raw = getattr(args, field_name)
        if raw is not None:
            overrides[field_name] = convert_value(field_name, raw)
    if args.svg:
        overrides["svg"] = True
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, IntegrationError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
