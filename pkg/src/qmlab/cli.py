"""Command-line front end.

Every subcommand takes ``--config FILE`` (flat key = value) plus flag
overrides, writes its tables and prints a one-line summary. Exit codes:
0 success, 2 configuration error, 3 numerical non-convergence.
"""

import argparse
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, constants, coupled, dynamics, grid1d, hyperfine, ising, pimc
from .io import ConfigError, ResultTable, parse_config, parse_list, parse_range, write_array_csv, write_table
from .linalg import ConvergenceError, expm_action

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # float | int | str | range | floats | ints | pair
    default: object
    help: str = ""


def _convert(p, value):
    try:
        if p.kind == "float":
            return float(value)
        if p.kind == "int":
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if p.kind == "str":
            return str(value)
        if p.kind == "range":
            return parse_range(value)
        if p.kind == "floats":
            return parse_list(value, float)
        if p.kind == "ints":
            return parse_list(value, int)
        if p.kind == "pair":
            v = parse_list(value, float) if isinstance(value, str) else [float(x) for x in value]
            if len(v) != 2:
                raise ValueError
            return tuple(v)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{p.name}: cannot read {value!r} as {p.kind}") from e
    raise ConfigError(f"{p.name}: unknown kind {p.kind}")


COMMON = [
    Param("out", "str", None, "output path (or prefix for multi-file commands)"),
    Param("seed", "int", pimc.DEFAULT_SEED, "RNG seed"),
]

SCHEMAS = {
    "hyperfine-levels": [
        Param("bz", "range", "0:3000:10", "field sweep in gauss, min:max:step"),
    ],
    "magic-field": [
        Param("bracket", "pair", (0.5, 6.0), "field search interval in gauss"),
        Param("level_i", "ints", "2 1", "upper level F M_F"),
        Param("level_j", "ints", "1 -1", "lower level F M_F"),
        Param("offset", "float", None, "energy subtracted from E_i - E_j (default 2A)"),
    ],
    "ising-scan": [
        Param("n", "int", 10, "number of sites"),
        Param("s", "float", 0.5, "spin length"),
        Param("b", "range", "-3:3:0.015625", "field sweep"),
        Param("m", "int", 2, "eigenstates per point"),
        Param("kind", "str", "ising", "ising | xy | heisenberg"),
    ],
    "stepwell": [
        Param("omega", "float", 2.0, "step height in units of E1"),
        Param("n_max", "range", "8:32:2", "resolutions"),
    ],
    "dynamics-1d": [
        Param("n_max", "int", 50, "grid size"),
        Param("omega", "float", 100.0, "harmonic trap strength; W = omega^2 (x-1/2)^2"),
        Param("g", "float", 0.0, "non-linear coupling"),
        Param("dt", "float", 0.01, "total propagation time"),
        Param("steps", "ints", "8 16 32 64 128", "split-step counts"),
        Param("x0", "float", 0.4, "initial packet centre"),
        Param("width", "float", 0.05, "initial packet width"),
    ],
    "gpe-ground": [
        Param("n_max", "int", None, "grid size (default 200 in 1D, 41 in 3D)"),
        Param("db", "float", 0.001, "imaginary time step"),
        Param("tol", "float", None, "convergence threshold on successive states"),
        Param("max_iter", "int", 1000000, "iteration cap"),
        Param("omega", "float", 100.0, "1D: harmonic trap strength"),
        Param("g", "float", 0.0, "1D: non-linear coupling"),
        Param("n_atoms", "int", 1000, "3D: atom number"),
        Param("freqs", "floats", "115 540 540", "3D: trap frequencies in Hz"),
        Param("a_s", "float", 100.4, "3D: scattering length in Bohr radii"),
        Param("box", "float", 10e-6, "3D: box size in metres"),
    ],
    "twobody": [
        Param("n_max", "int", 10, "grid size per particle"),
        Param("omega", "float", 0.0, "harmonic trap strength"),
        Param("g", "floats", "-2 0 5", "interaction strengths"),
        Param("kind", "str", "contact", "contact | truncated_coulomb"),
        Param("delta", "float", None, "Coulomb truncation (default one grid spacing)"),
    ],
    "spinspace": [
        Param("n_max", "int", 20, "grid size"),
        Param("omega", "float", 100.0, "trap strength"),
        Param("f", "float", 1e4, "spin-dependent force"),
        Param("bx", "float", 1e3, "transverse field"),
    ],
    "pimc-ho": [
        Param("zeta", "float", 1.0, "inverse temperature beta hbar w"),
        Param("slices", "int", None, "beads per ring (default grows with zeta)"),
        Param("sweeps", "int", 100000, "recorded sweeps (M moves each)"),
        Param("d1", "float", None, "single-bead step"),
        Param("d2", "float", None, "whole-ring step"),
        Param("f_mix", "float", 0.5, "probability of a single-bead move"),
        Param("burn_in", "float", pimc.BURN_IN, "discarded fraction"),
        Param("bins", "int", None, "histogram bins (default Freedman-Diaconis)"),
        Param("x_start", "float", 0.0, "initial bead position"),
    ],
    "mc-demo": [
        Param("samples", "int", 10000, "draws per estimate"),
        Param("d", "float", 0.015, "Metropolis step"),
    ],
}

DEFAULT_OUT = {
    "hyperfine-levels": "hyperfine_levels.csv",
    "magic-field": "magic.json",
    "ising-scan": "ising_scan.csv",
    "stepwell": "stepwell.csv",
    "dynamics-1d": "dynamics_1d.csv",
    "gpe-ground": "gpe_ground.csv",
    "twobody": "twobody.csv",
    "spinspace": "spinspace.csv",
    "pimc-ho": "pimc_ho",
    "mc-demo": "mc_demo.csv",
}


def resolve(command, file_values, overrides):
    """Merge defaults, config-file values and flag overrides; reject unknown keys."""
    schema = {p.name: p for p in SCHEMAS[command] + COMMON}
    unknown = set(file_values) - set(schema)
    if unknown:
        raise ConfigError(f"unknown keys for {command}: {', '.join(sorted(unknown))}")
    out = {}
    for name, p in schema.items():
        if overrides.get(name) is not None:
            raw = overrides[name]
        elif name in file_values:
            raw = file_values[name]
        else:
            raw = p.default
        out[name] = None if raw is None else _convert(p, raw)
    if out["out"] is None:
        out["out"] = DEFAULT_OUT[command]
    return out


def threads():
    try:
        n = int(os.environ.get("QMLAB_THREADS", "1"))
    except ValueError as e:
        raise ConfigError("QMLAB_THREADS must be an integer") from e
    return max(1, n)


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _meta(command, cfg, **extra):
    m = {
        "command": command,
        "parameters": {k: v for k, v in cfg.items() if k != "out"},
        "seed": cfg["seed"],
        "version": __version__,
        "constants": constants.table(),
    }
    m.update(extra)
    return m


# subcommands ---------------------------------------------------------------------


def cmd_hyperfine_levels(cfg, _):
    model = hyperfine.HyperfineModel()
    bz = cfg["bz"]
    _need(len(bz) >= 1, "empty field range")
    energies, labels, worst = hyperfine.track_levels(model, bz)
    cols = ["bz"] + [f"E_F{f}_M{m:+d}" for f, m in labels]
    t = ResultTable(cols, [[b, *e] for b, e in zip(bz, energies)], _meta("hyperfine-levels", cfg))
    t.metadata["min_tracking_overlap"] = float(worst.min()) if len(worst) else 1.0
    write_table(t, cfg["out"])
    return f"{len(bz)} fields, 8 levels -> {cfg['out']}"


def cmd_magic_field(cfg, _):
    model = hyperfine.HyperfineModel()
    li, lj = tuple(cfg["level_i"]), tuple(cfg["level_j"])
    _need(len(li) == 2 and len(lj) == 2, "levels are given as F M_F")
    bz, val = hyperfine.magic_field(model, li, lj, cfg["bracket"], cfg["offset"])
    offset = cfg["offset"] if cfg["offset"] is not None else 2 * model.A
    t = ResultTable(["bz", "value"], [[bz, val]], _meta("magic-field", cfg, offset=offset))
    write_table(t, cfg["out"])
    return f"Bz* = {bz:.6f} G, E_i - E_j - offset = {val:.8g} MHz -> {cfg['out']}"


def cmd_ising_scan(cfg, _):
    _need(cfg["n"] >= 3, "n must be >= 3")
    _need(cfg["s"] > 0 and float(2 * cfg["s"]).is_integer(), "s must be a positive half-integer")
    _need(cfg["m"] >= 1, "m must be >= 1")
    _need(cfg["kind"] in ising.KINDS, f"kind must be one of {ising.KINDS}")
    model = ising.RingModel(cfg["s"], cfg["n"], cfg["kind"])
    bs = cfg["b"]
    half = cfg["n"] // 2
    cols = ["b", "E0", "E1", "gap", "overlap_minus_inf", "overlap_plus_inf", "overlap_cat_sum", "mx", "mz"]
    cols += [f"C_{d}" for d in range(1, half + 1)] + ["entropy"]

    def row(b):
        o = ising.observables(model, b, cfg["m"])
        return [
            b, o["E0"], o["E1"], o["gap"], o["overlap_minus_inf"], o["overlap_plus_inf"],
            o["overlap_cat_sum"], float(np.mean(o["mx"])), float(np.mean(o["mz"])), *o["C"], o["entropy"],
        ]  # fmt: skip

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        rows = list(pool.map(row, bs))
    t = ResultTable(cols, rows, _meta("ising-scan", cfg))
    write_table(t, cfg["out"])
    return f"{len(bs)} fields, N={cfg['n']}, S={cfg['s']} -> {cfg['out']}"


def cmd_stepwell(cfg, _):
    ns = [int(round(v)) for v in cfg["n_max"]]
    _need(all(n >= 1 for n in ns), "n_max must be positive")
    sol = grid1d.stepwell_analytic(cfg["omega"])
    rows = []
    for n in ns:
        em, um = grid1d.stepwell_ground_momentum(cfg["omega"], n)
        ep, vp = grid1d.stepwell_ground_position(cfg["omega"], n)
        rows.append(
            [n, em, grid1d.overlap_deficit(sol, um), ep, grid1d.overlap_deficit(sol, grid1d.to_momentum(vp))]
        )
    cols = ["n_max", "E_momentum", "deficit_momentum", "E_position", "deficit_position"]
    t = ResultTable(cols, rows, _meta("stepwell", cfg, k1=sol.k1, k2=sol.k2, A=sol.A, B=sol.B, energy=sol.energy))
    write_table(t, cfg["out"])
    return f"k2 = {sol.k2:.10f}, E = {sol.energy:.10f} -> {cfg['out']}"


def _harmonic(omega):
    return lambda x: omega**2 * (x - 0.5) ** 2


def cmd_dynamics_1d(cfg, _):
    _need(cfg["n_max"] >= 2, "n_max must be >= 2")
    _need(all(s >= 2 for s in cfg["steps"]), "steps must be >= 2")
    _need(cfg["width"] > 0, "width must be positive")
    g = grid1d.Grid1D(cfg["n_max"])
    plan = dynamics.plan_1d(g, _harmonic(cfg["omega"]), cfg["g"])
    psi = np.exp(-(((g.x - cfg["x0"]) / (2 * cfg["width"])) ** 2)).astype(complex)
    psi /= np.linalg.norm(psi)
    if cfg["g"] == 0:
        h = grid1d.kinetic_position(g) + grid1d.potential_position(g, _harmonic(cfg["omega"]))
        ref = expm_action(h, -1j * cfg["dt"], psi)
        ref_kind = "exact exponential"
    else:
        ref = dynamics.propagate_real(plan, psi, cfg["dt"], 8 * max(cfg["steps"]))
        ref_kind = f"split-step with {8 * max(cfg['steps'])} steps"
    rows = []
    for s in cfg["steps"]:
        out = dynamics.propagate_real(plan, psi, cfg["dt"], s)
        rows.append([s, float(np.linalg.norm(out - ref)), float(np.linalg.norm(out))])
    t = ResultTable(["steps", "error", "norm"], rows, _meta("dynamics-1d", cfg, reference=ref_kind))
    write_table(t, cfg["out"])
    return f"{len(rows)} step counts, finest error {rows[-1][1]:.3e} -> {cfg['out']}"


def cmd_gpe_ground(cfg, dim):
    _need(cfg["db"] > 0, "db must be positive")
    if dim == "1d":
        n = cfg["n_max"] or 200
        _need(n >= 2, "n_max must be >= 2")
        g = grid1d.Grid1D(n)
        plan = dynamics.plan_1d(g, _harmonic(cfg["omega"]), cfg["g"])
        gs = dynamics.ground_imag(plan, cfg["db"], cfg["tol"], seed=cfg["seed"], max_iter=cfg["max_iter"])
        dens = grid1d.interpolate_density(g, gs.gamma)
        t = ResultTable(["x", "density"], dens.tolist(), _meta("gpe-ground", cfg, dim=dim, mu=gs.mu, iterations=gs.iterations))
    else:
        n = cfg["n_max"] or 41
        _need(n >= 2, "n_max must be >= 2")
        _need(len(cfg["freqs"]) == 3 and all(f > 0 for f in cfg["freqs"]), "need three positive trap frequencies")
        _need(cfg["n_atoms"] >= 1 and cfg["box"] > 0, "n_atoms and box must be positive")
        trap = dynamics.TrapParams(
            box=cfg["box"], freqs_hz=tuple(cfg["freqs"]), a_s_bohr=cfg["a_s"], n_atoms=cfg["n_atoms"]
        )
        grid = dynamics.Grid3D.from_trap(trap, n)
        gs = dynamics.ground_imag(grid.plan(), cfg["db"], cfg["tol"], seed=cfg["seed"], max_iter=cfg["max_iter"])
        mom = dynamics.moments_3d(gs.gamma, grid)
        d = np.abs(gs.gamma) ** 2
        marg = [d.sum(axis=tuple(a for a in range(3) if a != ax)) * (n + 1) for ax in range(3)]
        rows = np.column_stack([grid.xval, *marg]).tolist()
        extra = dict(dim=dim, mu=gs.mu, iterations=gs.iterations, widths=mom["widths"], omegas=grid.omegas, gamma=grid.gamma)
        t = ResultTable(["x", "density_x", "density_y", "density_z"], rows, _meta("gpe-ground", cfg, **extra))
    write_table(t, cfg["out"])
    return f"mu = {gs.mu:.6f} after {gs.iterations} iterations -> {cfg['out']}"


def cmd_twobody(cfg, _):
    _need(cfg["n_max"] >= 2, "n_max must be >= 2")
    _need(cfg["kind"] in coupled.KINDS, f"kind must be one of {coupled.KINDS}")
    pot = _harmonic(1.0) if cfg["omega"] else None
    grid = grid1d.Grid1D(cfg["n_max"])

    def row(g):
        m = coupled.TwoBodyModel(cfg["n_max"], cfg["omega"] ** 2, g, cfg["kind"], cfg["delta"], pot)
        r = coupled.two_body_ground(m)
        st = coupled.interparticle_stats(r.psi, grid)
        return [g, r.energy, r.diagonal_density, st["mean"], st["var"], r.parity]

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        rows = list(pool.map(row, cfg["g"]))
    cols = ["g", "energy", "diagonal_density", "mean_separation", "var_separation", "exchange_parity"]
    write_table(ResultTable(cols, rows, _meta("twobody", cfg)), cfg["out"])
    return f"{len(rows)} couplings -> {cfg['out']}"


def cmd_spinspace(cfg, _):
    _need(cfg["n_max"] >= 2, "n_max must be >= 2")
    _need(cfg["omega"] > 0, "omega must be positive")
    m = coupled.SpinSpaceModel(cfg["n_max"], cfg["omega"], cfg["f"], cfg["bx"])
    r = coupled.spinspace_ground(m)
    rows = np.column_stack(
        [m.xval, np.diag(r.rho_up).real, np.diag(r.rho_down).real, np.diag(r.rho_x).real, r.spin_profile]
    ).tolist()
    extra = dict(
        rho_s=[[r.rho_s[0, 0].real, r.rho_s[0, 1].real], [r.rho_s[1, 0].real, r.rho_s[1, 1].real]],
        gap=r.gap,
        perturbative_gap=coupled.perturbative_gap(cfg["omega"], cfg["f"], cfg["bx"]),
        energies=r.energies,
    )
    cols = ["x", "rho_up", "rho_down", "rho_x", "spin_profile"]
    write_table(ResultTable(cols, rows, _meta("spinspace", cfg, **extra)), cfg["out"])
    return f"gap = {r.gap:.6g}, rho_s off-diagonal = {r.rho_s[0, 1].real:.6f} -> {cfg['out']}"


def cmd_pimc_ho(cfg, _):
    z = cfg["zeta"]
    _need(z > 0, "zeta must be positive")
    M = cfg["slices"] or pimc.default_slices(z)
    _need(M >= 2, "slices must be >= 2")
    _need(cfg["sweeps"] >= 2, "sweeps must be >= 2")
    _need(0 <= cfg["f_mix"] <= 1, "f_mix must lie in [0, 1]")
    _need(0 <= cfg["burn_in"] < 1, "burn_in must lie in [0, 1)")
    d1, d2 = pimc.default_steps(z, M)
    d1 = cfg["d1"] or d1
    d2 = cfg["d2"] or d2
    _need(d1 > 0 and d2 > 0, "step sizes must be positive")
    rng = pimc.make_rng(cfg["seed"])
    ens = pimc.sample_closed_paths(cfg["x_start"], M, z, d1, d2, cfg["f_mix"], cfg["sweeps"], rng, cfg["burn_in"])
    prefix = cfg["out"]
    sweeps, beads = np.meshgrid(np.arange(ens.rings.shape[0]), np.arange(M), indexing="ij")
    write_array_csv(
        prefix + "_samples.csv",
        ["sweep", "bead", "value"],
        np.column_stack([sweeps.ravel(), beads.ravel(), ens.rings.ravel()]),
        int_columns=2,
    )
    centres, dens, edges = pimc.density_from_rings(ens.rings, cfg["bins"])
    write_array_csv(
        prefix + "_hist.csv",
        ["bin_center", "density", "analytic_density"],
        np.column_stack([centres, dens, pimc.ho_diag(z, centres)]),
    )
    probs = pimc.gaussian_bin_probs(edges, pimc.ho_variance(z))
    chi = pimc.chi2_rings(ens.rings, edges, probs)
    second = float(np.mean(ens.rings**2))
    stats = ResultTable(
        ["quantity", "value"],
        [
            ["second_moment", second],
            ["second_moment_exact", pimc.ho_variance(z)],
            ["second_moment_discrete", pimc.ring_variance(z, M)],
            ["chi2", chi.chi2],
            ["chi2_dof", chi.dof],
            ["chi2_p", chi.p_value],
            ["autocorrelation_inflation", chi.inflation],
        ],
        _meta("pimc-ho", cfg, slices=M, d1=d1, d2=d2, acceptance=ens.stats.as_dict()),
    )
    write_table(stats, prefix + "_stats.json")
    acc = ens.stats.as_dict()
    return (
        f"zeta={z}, M={M}: <x^2> = {second:.5f} (exact {pimc.ho_variance(z):.5f}), chi2 p = {chi.p_value:.3g}, "
        f"acceptance bead {acc['bead']['ratio']:.3f} ring {acc['ring']['ratio']:.3f} -> {prefix}_*"
    )


def cmd_mc_demo(cfg, _):
    n = cfg["samples"]
    _need(n >= 2, "samples must be >= 2")
    _need(cfg["d"] > 0, "d must be positive")
    rng = pimc.make_rng(cfg["seed"])
    p = lambda x: 101 * x**100  # noqa: E731
    f = lambda x: x * (1 - x)  # noqa: E731
    rows = []
    m, e = pimc.mc_integrate(f, n, rng)
    rows.append(["uniform f", m, e, 1 / 6])
    m, e = pimc.mc_integrate(lambda x: f(x) * p(x), n, rng)
    rows.append(["uniform f p", m, e, 101 / 10506])
    m, e = pimc.mc_integrate_weighted(f, lambda z: z ** (1 / 101), n, rng)
    rows.append(["weighted f p", m, e, 101 / 10506])
    chain, st = pimc.mh_chain(p, 1.0, cfg["d"], n, rng)
    rows.append(["metropolis f p", float(np.mean(f(chain))), float("nan"), 101 / 10506])
    t = ResultTable(["estimate", "value", "stderr", "exact"], rows, _meta("mc-demo", cfg, acceptance=st.ratio("step")))
    write_table(t, cfg["out"])
    return f"acceptance {st.ratio('step'):.4f}, weighted stderr {rows[2][2]:.3g} vs {rows[1][2]:.3g} -> {cfg['out']}"


COMMANDS = {
    "hyperfine-levels": cmd_hyperfine_levels,
    "magic-field": cmd_magic_field,
    "ising-scan": cmd_ising_scan,
    "stepwell": cmd_stepwell,
    "dynamics-1d": cmd_dynamics_1d,
    "gpe-ground": cmd_gpe_ground,
    "twobody": cmd_twobody,
    "spinspace": cmd_spinspace,
    "pimc-ho": cmd_pimc_ho,
    "mc-demo": cmd_mc_demo,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="qmlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        if name == "gpe-ground":
            sp.add_argument("dim", choices=("1d", "3d"))
        sp.add_argument("--config", help="flat key = value file")
        for p in schema + COMMON:
            flag = "--" + p.name.replace("_", "-")
            nargs = 2 if p.kind == "pair" else "+" if p.kind in ("floats", "ints") else None
            default = f" (default {p.default})" if p.default is not None else ""
            sp.add_argument(flag, dest=p.name, nargs=nargs, default=None, help=p.help + default)
    return parser


def _glue_negative_ranges(argv):
    # argparse reads "-3:3:0.5" as an option; attach such values to their flag
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.match(r"^-[\d.].*:", tok):
            out[-1] = out[-1] + "=" + tok
        else:
            out.append(tok)
    return out


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_ranges(sys.argv[1:] if argv is None else list(argv)))
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG
        file_values = parse_config(args.config) if args.config else {}
        overrides = {p.name: getattr(args, p.name) for p in SCHEMAS[args.command] + COMMON}
        for p in SCHEMAS[args.command]:
            if p.kind in ("floats", "ints") and overrides[p.name] is not None:
                overrides[p.name] = " ".join(overrides[p.name])
        cfg = resolve(args.command, file_values, overrides)
        start = time.perf_counter()
        summary = COMMANDS[args.command](cfg, getattr(args, "dim", None))
    except ConvergenceError as e:
        print(f"qmlab: not converged: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ConfigError, ValueError) as e:
        print(f"qmlab: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"qmlab: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: {summary} [{time.perf_counter() - start:.2f} s]")
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
