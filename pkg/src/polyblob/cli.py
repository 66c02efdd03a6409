"""Command-line interface: scenario runs, the reference solve, and the
invariant battery.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (details
land in <out>/diagnostics.txt).
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from .errors import (
    ConfigError,
    DegenerateEnsemble,
    FeasibilityViolation,
    LinearSolveFailure,
    OptimizerDivergence,
    PolyblobError,
    RejectionOverflow,
    SizeMismatch,
)
from . import io as pio

NUMERICAL_ERRORS = (
    LinearSolveFailure,
    OptimizerDivergence,
    FeasibilityViolation,
    RejectionOverflow,
    DegenerateEnsemble,
    SizeMismatch,
    FloatingPointError,
)

SCENARIOS = ("couette-hookean", "fene-extension", "fene-shear", "cavity")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyblob", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark scenario")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--config", help="flat key = value config file; flags override")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--n-particles", type=int, default=None)
    run.add_argument("--dt", type=float, default=None)
    run.add_argument("--t-end", type=float, default=None)
    run.add_argument("--out", default="out")
    run.add_argument("--rate", type=float, default=None, help="extension strain rate")
    run.add_argument("--ly", type=float, default=None, help="cavity height")
    run.add_argument("--wi", type=float, default=None, help="cavity relaxation number")
    run.add_argument("--mode", choices=("startup", "constant"), default=None,
                     help="extension forcing protocol")
    run.add_argument("--threads", type=int, default=0)
    run.add_argument("--output-every", type=int, default=None)

    ref = sub.add_parser("reference", help="closed-form constitutive reference")
    ref.add_argument("model", choices=("oldroyd-b",))
    ref.add_argument("--re", type=float, default=0.11)
    ref.add_argument("--wi", type=float, default=0.1)
    ref.add_argument("--eta-s", type=float, default=0.11)
    ref.add_argument("--eps-p", type=float, default=0.89)
    ref.add_argument("--m-fine", type=int, default=400)
    ref.add_argument("--dt-fine", type=float, default=1e-4)
    ref.add_argument("--t-end", type=float, default=1.0)
    ref.add_argument("--out", default="out")

    sub.add_parser("verify", help="run the fast invariant battery")
    return p


def _merge_config(args) -> dict:
    """File values under CLI flags; returns the effective scenario options."""
    eff: dict = {}
    if args.config:
        raw = pio.read_config_file(args.config)
        casts = {
            "seed": int, "n_particles": int, "output_every": int,
            "dt": float, "t_end": float, "rate": float, "ly": float, "wi": float,
        }
        for key, val in raw.items():
            if key in ("scenario", "out", "mode"):
                eff[key] = val
            elif key in casts:
                try:
                    eff[key] = casts[key](val)
                except ValueError as exc:
                    raise ConfigError(f"config key {key}: {exc}") from exc
            else:
                raise ConfigError(f"unknown config key {key!r}")
    for key in ("seed", "n_particles", "dt", "t_end", "rate", "ly", "wi", "mode",
                "output_every"):
        val = getattr(args, key, None)
        if val is not None:
            eff[key] = val
    return eff


def _run_scenario(args) -> int:
    from . import scenarios

    eff = _merge_config(args)
    out = Path(eff.pop("out", args.out))
    out.mkdir(parents=True, exist_ok=True)
    scenario = eff.pop("scenario", args.scenario)
    if scenario != args.scenario and args.scenario:
        scenario = args.scenario
    threads = args.threads
    common = {k: eff[k] for k in ("seed", "n_particles", "dt", "t_end", "output_every")
              if k in eff}

    if scenario == "couette-hookean":
        res = scenarios.run_couette_hookean(num_threads=threads, **common)
        pio.write_probes_csv(out / "probes.csv", res.series,
                             scenarios.COUETTE_HOOKEAN_DEFAULTS["probes"], False)
        pio.write_energy_csv(out / "energy.csv", res.diagnostics.energy)
        diag = res.diagnostics
    elif scenario == "fene-shear":
        res = scenarios.run_fene_shear(num_threads=threads, **common)
        pio.write_probes_csv(out / "probes.csv", res.series,
                             scenarios.FENE_SHEAR_DEFAULTS["probes"], True)
        pio.write_energy_csv(out / "energy.csv", res.diagnostics.energy)
        diag = res.diagnostics
    elif scenario == "fene-extension":
        mode = eff.pop("mode", None) or "startup"
        rate = eff.pop("rate", None)
        if rate is None:
            raise ConfigError("fene-extension requires --rate")
        res = scenarios.run_fene_extension(mode, rate, num_threads=threads, **common)
        pio.write_hysteresis_csv(out / "hysteresis.csv", res.series)
        for t_snap, ens in sorted(res.snapshots.items()):
            pio.write_particles_csv(out / f"particles_t{t_snap:g}.csv", ens)
        pio.write_energy_csv(out / "energy.csv", res.diagnostics.energy)
        diag = res.diagnostics
    elif scenario == "cavity":
        ly = eff.pop("ly", None)
        wi = eff.pop("wi", None)
        if ly is None or wi is None:
            raise ConfigError("cavity requires --ly and --wi")
        res = scenarios.run_cavity(ly, wi, num_threads=threads, **common)
        pio.write_metrics_csv(out / "metrics.csv", res.metrics)
        pio.write_field_csv(
            out / f"field_t{res.config.t_end:g}.csv",
            res.mesh_pair.fine, res.macro.u, res.psi, res.macro.tau,
        )
        pio.write_energy_csv(out / "energy.csv", res.diagnostics.energy)
        diag = res.diagnostics
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")

    echo = dict(eff)
    echo.update(scenario=scenario, out=str(out), threads=threads)
    echo["config_hash"] = res.config.config_hash()
    echo["stability_violations"] = diag.stability_violations
    pio.echo_config(out / "config.txt", echo)
    print(f"{scenario}: done; stability violations = {diag.stability_violations}")
    if diag.stability_violations:
        print("warning: energy-stability violations detected", file=sys.stderr)
    return 0


def _run_reference(args) -> int:
    from .reference import oldroyd_b_reference

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = oldroyd_b_reference(
        Re=args.re, Wi=args.wi, eta_s=args.eta_s, eps_p=args.eps_p,
        m_fine=args.m_fine, dt_fine=args.dt_fine, t_end=args.t_end,
    )
    probes = (0.2, 0.4, 0.6, 0.8)
    pio.write_probes_csv(out / "probes.csv", series, probes, False)
    print(f"oldroyd-b reference written to {out / 'probes.csv'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run_scenario(args)
        if args.command == "reference":
            return _run_reference(args)
        if args.command == "verify":
            from .verify import run_verification

            failures = run_verification(sys.stdout)
            return 3 if failures else 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        out = Path(getattr(args, "out", "out"))
        out.mkdir(parents=True, exist_ok=True)
        diag_path = out / "diagnostics.txt"
        with open(diag_path, "w") as f:
            f.write(f"command: {' '.join(sys.argv[1:]) if argv is None else ' '.join(argv)}\n")
            f.write(f"error: {type(exc).__name__}: {exc}\n")
            f.write(traceback.format_exc())
        print(f"numerical failure: {exc} (details in {diag_path})", file=sys.stderr)
        return 3
    except PolyblobError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
