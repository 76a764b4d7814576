"""Command-line front end: reproducible experiments with file outputs.

Subcommands: ``stats``, ``ldoa``, ``correlator``, ``entropy``,
``dump-hamiltonian``, ``dump-circuit``.  Options may come from a config file
(plain ``key=value`` lines or JSON) via ``--config``; command-line flags
override file values.  Every output embeds the fully resolved configuration
and seed (JSON outputs as a ``config`` object, CSV outputs as a leading
``# …`` comment line), so runs are reproducible from their artifacts alone.

Exit codes: 0 on success, 2 on configuration errors, 3 on resource-limit
errors (e.g. requesting simulation beyond the statevector cap).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .circuit import STATS_CSV_HEADER, circuit_to_text, lower_to_cz, stats
from .entropy import RMConfig, estimate_purity, exact_renyi2
from .ldoa import (
    AnsatzTemplate,
    NonDiagonalCircuitError,
    diagonal_phase_of_circuit,
    flavor_template,
    residual_unitary_norm,
    solve_ansatz,
)
from .model import (
    LatticeParams,
    build_hamiltonian,
    build_quadratic,
    build_quartic,
    hamiltonian_to_csv,
)
from .simulate import (
    SimulationSizeError,
    SparseHamiltonian,
    Statevector,
    default_initial_bits,
    exact_evolve,
    run_correlator_experiment,
    simulate,
)
from .trotter import build_evolution, build_int_ladder, make_plan

OUTPUT_DIR_ENV = "GNSIM_OUTPUT_DIR"


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line (expected key=value): {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _add_opt(parser: argparse.ArgumentParser, *names, default=None, **kwargs):
    """add_argument with a recorded default.  The argparse default stays None
    so that explicitly passed flags are distinguishable; the recorded default
    is applied after config-file merging (flag > config file > default)."""
    arg = parser.add_argument(*names, default=None, **kwargs)
    if not hasattr(parser, "_recorded_defaults"):
        parser._recorded_defaults = {}
    parser._recorded_defaults[arg.dest] = (default, getattr(arg, "type", None))
    return arg


def _resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Merge config-file values and recorded defaults into unset options."""
    recorded = getattr(parser, "_recorded_defaults", {})
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for key in cfg:
        if key not in recorded:
            raise ConfigError(f"unknown config key {key!r}")
    for dest, (default, conv) in recorded.items():
        if getattr(args, dest, None) is not None:
            continue
        if dest in cfg:
            val = cfg[dest]
            if isinstance(default, bool):
                val = str(val).lower() in ("1", "true", "yes")
            elif conv is not None and isinstance(val, str):
                val = conv(val)
            setattr(args, dest, val)
        else:
            setattr(args, dest, default)


def _resolve_output(args: argparse.Namespace, default_name: str) -> str | None:
    if args.output == "-":
        return None
    if args.output:
        return args.output
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        return os.path.join(out_dir, default_name)
    return None


def _metadata(args: argparse.Namespace) -> dict:
    cfg = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "parser") and v is not None
    }
    return {
        "config": cfg,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv_with_meta(args, header: str, rows: list[str]) -> str:
    meta = json.dumps(_metadata(args), sort_keys=True)
    return "\n".join([f"# {meta}", header, *rows]) + "\n"


def _params(args) -> LatticeParams:
    try:
        return LatticeParams(L=args.L, N=args.N, g=args.g, a=args.a)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_stats(args) -> int:
    params = _params(args)
    rows = []
    for r in range(1, args.r_max + 1):
        plan = make_plan(params, args.dt * r, r, args.order, args.ldoa)
        st = stats(build_evolution(params, plan))
        rows.append(f"{r},{st.total_depth},{st.cz_depth},{st.cz_count}")
    _emit(
        _csv_with_meta(args, STATS_CSV_HEADER, rows),
        _resolve_output(args, "stats.csv"),
    )
    return 0


def _load_template(path: str) -> AnsatzTemplate:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    gates = tuple(
        (str(g["kind"]).upper(), int(g["q1"]), int(g["q2"]), int(g["param"]))
        for g in data["gates"]
    )
    m = 1 + max(g[3] for g in gates)
    return AnsatzTemplate(int(data["n_qubits"]), gates, m)


def cmd_ldoa(args) -> int:
    kind = args.kind.upper()
    ladder = build_int_ladder(args.flavors, args.theta_g)
    target = diagonal_phase_of_circuit(ladder)
    if args.template:
        template = _load_template(args.template)
        if template.n_qubits != target.n_qubits:
            raise ConfigError(
                f"template spans {template.n_qubits} qubits, target {target.n_qubits}"
            )
    else:
        template = flavor_template(args.flavors, kind)
    from .ldoa import assemble_system, pseudoinverse_solve

    system = assemble_system(target, template)
    sol = pseudoinverse_solve(system)
    report = {
        "ansatz": kind if not args.template else args.template,
        "N": args.flavors,
        "theta_g": args.theta_g,
        "x": [float(v) for v in sol.x],
        "residual_phase": sol.residual_phase_norm,
        "residual_unitary": sol.residual_unitary_norm,
    }
    report.update(_metadata(args))
    _emit(
        json.dumps(report, indent=2, sort_keys=True) + "\n",
        _resolve_output(args, "ldoa.json"),
    )
    if args.dump_system:
        header = ",".join(
            ["basis_index"] + [f"a{k}" for k in range(system.A.shape[1])] + ["b"]
        )
        rows = [
            ",".join([str(int(idx))] + [_fmt(v) for v in row] + [_fmt(rhs)])
            for idx, row, rhs in zip(system.row_index_map, system.A, system.b)
        ]
        _emit(_csv_with_meta(args, header, rows), args.dump_system)
    if args.sweep:
        rows = []
        for theta in np.linspace(0.0, np.pi / 2.0, 101):
            tgt = diagonal_phase_of_circuit(build_int_ladder(args.flavors, theta))
            s = solve_ansatz(tgt, template)
            rows.append(
                f"{_fmt(theta)},{_fmt(s.residual_phase_norm)},"
                f"{_fmt(s.residual_unitary_norm)}"
            )
        _emit(
            _csv_with_meta(args, "theta_g,residual_phase,residual_unitary", rows),
            args.sweep,
        )
    return 0


def cmd_correlator(args) -> int:
    params = _params(args)
    j = args.j if args.j is not None else params.L // 2 - 2
    jp = args.jp if args.jp is not None else params.L // 2
    times = (
        [float(x) for x in args.times.split(",")]
        if args.times
        else [k * args.dt for k in range(int(round(args.t_max / args.dt)) + 1)]
    )
    r0 = max(1, round(times[-1] / args.dt)) if times[-1] > 0 else 1
    plan = make_plan(params, r0 * args.dt, r0, args.order, args.ldoa)
    points = run_correlator_experiment(
        params,
        plan,
        j,
        jp,
        times,
        initial_bitstring=args.initial,
        include_exact=not args.no_exact,
    )
    rows = []
    for p in points:
        ex = "" if p.c_exact is None else _fmt(p.c_exact)
        rows.append(f"{_fmt(p.t)},{_fmt(p.c_trotter)},{ex}")
    _emit(
        _csv_with_meta(args, "t,C_trotter,C_exact", rows),
        _resolve_output(args, "correlator.csv"),
    )
    return 0


def _parse_subsystem(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def cmd_entropy(args) -> int:
    params = _params(args)
    if params.n_qubits > 24:
        raise SimulationSizeError("entropy runs need simulation (width <= 24)")
    subsystem = (
        _parse_subsystem(args.subsystem)
        if args.subsystem
        else tuple(range(params.n_qubits // 2))
    )
    bits = args.initial or default_initial_bits(params)
    r = max(1, round(args.t / args.dt))
    plan = make_plan(params, args.t, r, args.order, args.ldoa)

    h = SparseHamiltonian(build_hamiltonian(params))
    exact_state = exact_evolve(h, Statevector.from_bitstring(bits), args.t)
    s2_exact = exact_renyi2(exact_state, subsystem)

    trotter_state = simulate(build_evolution(params, plan), bits)
    s2_statevector = exact_renyi2(trotter_state, subsystem)

    est = estimate_purity(
        trotter_state,
        RMConfig(
            subsystem=subsystem,
            n_unitaries=args.n_unitaries,
            shots=args.shots,
            seed=args.seed,
        ),
    )
    report = {
        "N_U": args.n_unitaries,
        "shot_mode": "exact-probabilities" if args.shots is None else args.shots,
        "X_bar": est.x_bar,
        "S2": est.s2,
        "std_error": est.std_error,
        "seed": args.seed,
        "s2_exact_evolution": s2_exact,
        "s2_trotter_statevector": s2_statevector,
        "subsystem": list(subsystem),
    }
    if est.warning:
        report["warning"] = est.warning
    report.update(_metadata(args))
    _emit(
        json.dumps(report, indent=2, sort_keys=True) + "\n",
        _resolve_output(args, "entropy.json"),
    )
    if args.dump_x:
        rows = [f"{i},{_fmt(x)}" for i, x in enumerate(est.x_values)]
        _emit(_csv_with_meta(args, "draw,X", rows), args.dump_x)
    return 0


def cmd_dump_hamiltonian(args) -> int:
    params = _params(args)
    build = {
        "full": build_hamiltonian,
        "quadratic": build_quadratic,
        "quartic": build_quartic,
    }[args.part]
    _emit(hamiltonian_to_csv(build(params)), _resolve_output(args, "hamiltonian.csv"))
    return 0


def cmd_dump_circuit(args) -> int:
    params = _params(args)
    plan = make_plan(params, args.t, args.r, args.order, args.ldoa)
    circ = build_evolution(params, plan)
    if args.lower:
        circ = lower_to_cz(circ)
    _emit(circuit_to_text(circ), _resolve_output(args, "circuit.txt"))
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value or JSON config file")
    _add_opt(p, "--seed", type=int, default=0)
    _add_opt(p, "--format", choices=("csv", "json"), default=None,
             help="accepted for config compatibility; each command has a native format")
    _add_opt(p, "-o", "--output", default=None,
             help="output file ('-' forces stdout; default: stdout, or "
                  f"${OUTPUT_DIR_ENV} when set)")


def _add_lattice(p: argparse.ArgumentParser) -> None:
    _add_opt(p, "--L", type=int, default=10, help="staggered site count (even)")
    _add_opt(p, "--N", type=int, default=2, help="flavor count")
    _add_opt(p, "--a", type=float, default=1.0, help="lattice spacing")
    _add_opt(p, "--g", type=float, default=0.5, help="quartic coupling")


def _add_plan(p: argparse.ArgumentParser, default_order: str = "first") -> None:
    _add_opt(p, "--order", choices=("first", "second", "second_optimized"),
             default=default_order)
    _add_opt(p, "--ldoa", choices=("none", "cp", "rzz"), default="none")
    _add_opt(p, "--dt", type=float, default=0.5, help="Trotter step size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnsim",
        description="Trotter circuits and observables for the lattice Gross-Neveu model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="circuit depth / CZ statistics vs step count")
    _add_lattice(p)
    _add_plan(p)
    _add_opt(p, "--r-max", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=cmd_stats, parser=p)

    p = sub.add_parser("ldoa", help="solve the diagonal-block ansatz parameters")
    _add_opt(p, "--flavors", type=int, default=2)
    _add_opt(p, "--kind", choices=("cp", "rzz"), default="cp")
    _add_opt(p, "--theta-g", type=float, default=1.0)
    _add_opt(p, "--template", help="JSON ansatz template file")
    _add_opt(p, "--sweep", help="write a 101-point residual sweep CSV here")
    _add_opt(p, "--dump-system", help="write the assembled A|b system as CSV here")
    _add_common(p)
    p.set_defaults(func=cmd_ldoa, parser=p)

    p = sub.add_parser("correlator", help="density-density correlator time series")
    _add_lattice(p)
    _add_plan(p)
    _add_opt(p, "--t-max", type=float, default=4.0)
    _add_opt(p, "--times", help="comma-separated times (overrides --t-max grid)")
    _add_opt(p, "--j", type=int, help="first site (default L/2-2)")
    _add_opt(p, "--jp", type=int, help="second site (default L/2)")
    _add_opt(p, "--initial", help="initial bitstring (default half-filled pattern)")
    _add_opt(p, "--no-exact", action="store_true", default=False,
             help="skip the exact column")
    _add_common(p)
    p.set_defaults(func=cmd_correlator, parser=p)

    p = sub.add_parser("entropy", help="Renyi-2 entropy: exact and randomized-measurement")
    _add_lattice(p)
    _add_plan(p, default_order="second_optimized")
    _add_opt(p, "--t", type=float, default=4.0)
    _add_opt(p, "--subsystem", help="qubits like '0-9' or '0,1,2' (default left half)")
    _add_opt(p, "--n-unitaries", type=int, default=60)
    _add_opt(p, "--shots", type=int,
             help="shots per unitary (default: exact probabilities)")
    _add_opt(p, "--initial", help="initial bitstring")
    _add_opt(p, "--dump-x", help="write the per-draw X values as CSV here")
    _add_common(p)
    p.set_defaults(func=cmd_entropy, parser=p)

    p = sub.add_parser("dump-hamiltonian", help="write the Hamiltonian as CSV")
    _add_lattice(p)
    _add_opt(p, "--part", choices=("full", "quadratic", "quartic"), default="full")
    _add_common(p)
    p.set_defaults(func=cmd_dump_hamiltonian, parser=p)

    p = sub.add_parser("dump-circuit", help="write an evolution circuit as text")
    _add_lattice(p)
    _add_plan(p)
    _add_opt(p, "--t", type=float, default=0.5)
    _add_opt(p, "--r", type=int, default=1)
    _add_opt(p, "--lower", action="store_true", default=False,
             help="lower to the CZ basis first")
    _add_common(p)
    p.set_defaults(func=cmd_dump_circuit, parser=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve_config(args, args.parser)
        return args.func(args)
    except SimulationSizeError as exc:
        # Subclass of ValueError; must be caught before the config branch.
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, NonDiagonalCircuitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
