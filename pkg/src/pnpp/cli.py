"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 budget exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .core import BudgetError, format_instance, hamiltonian, parse_instance
from .enumeration import MAX_SCAN_N, full_scan
from .experiments import (
    ConfigError,
    ExperimentConfig,
    Table,
    config_from_mapping,
    read_config_file,
    run,
    trial_instance,
)
from .heuristics import get_algorithm
from .sampler import PlantedSpec, sample_planted, sample_unplanted

# subcommand -> experiment
EXPERIMENT_COMMANDS = {
    "zeta": "zeta_scaling",
    "isolate": "isolation",
    "ogp": "level_set_ogp",
    "interpolate": "interpolation_trajectory",
    "chaos": "chaos",
    "stability": "stability",
    "distinguish": "distinguish",
    "predict": "predict",
}
_SKIP_FIELDS = {"experiment", "output_dir", "n_list", "seed", "base_c", "planted"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, config_flags: bool = True) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default: main CSV to stdout)")
    if config_flags:
        p.add_argument("--n", dest="n_list", help="n, or a list like 16,18 or 16:26:2")
        p.add_argument("--n-list", dest="n_list")
        p.add_argument("--c", "--base-c", dest="base_c")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--planted", dest="planted", action="store_const", const="true")
        g.add_argument("--unplanted", dest="planted", action="store_const", const="false")
        for f in dataclasses.fields(ExperimentConfig):
            if f.name not in _SKIP_FIELDS:
                flags = {"--" + f.name.replace("_", "-"), "--" + f.name.lower().replace("_", "-")}
                p.add_argument(*sorted(flags), dest=f.name)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pnpp", description="Planted number partitioning experiments.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("sample", help="draw one instance")
    _common(p, config_flags=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--frac-bits", type=int, default=128)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--planted", dest="planted", action="store_true", default=True)
    g.add_argument("--unplanted", dest="planted", action="store_false")

    p = sub.add_parser("solve", help="run a solver on an instance file")
    p.add_argument("instance")
    p.add_argument("--algorithm", default="ldm")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("scan", help="exact scan: zeta profile for one n, or ground-state scaling")
    _common(p)

    for name in EXPERIMENT_COMMANDS:
        _common(sub.add_parser(name, help=f"{EXPERIMENT_COMMANDS[name]} experiment"))
    return parser


def _config(args, experiment: str) -> ExperimentConfig:
    mapping = read_config_file(args.config) if args.config else {}
    mapping["experiment"] = experiment
    for key, value in vars(args).items():
        if key in ("command", "config", "out") or value is None:
            continue
        mapping[key] = str(value)
    if args.out:
        mapping["output_dir"] = args.out
    return config_from_mapping(mapping)


def _emit(record, out) -> None:
    if out:
        record.write(out)
    else:
        sys.stdout.write(record.table.to_csv())


def _cmd_sample(args) -> None:
    if args.seed is None:
        raise ConfigError("sample: --seed is required")
    if args.planted:
        inst = sample_planted(PlantedSpec(args.n, args.seed, base_c=args.c, frac_bits=args.frac_bits))
    else:
        inst = sample_unplanted(args.n, args.seed, args.frac_bits)
    text = format_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> None:
    try:
        inst = parse_instance(Path(args.instance).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"solve: cannot read instance: {exc}") from exc
    try:
        alg = get_algorithm(args.algorithm)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.algorithm == "random" and args.seed is None:
        raise ConfigError("solve: --seed is required for the random algorithm")
    if args.algorithm == "exact" and inst.n > MAX_SCAN_N:
        raise BudgetError(f"n={inst.n} exceeds the exhaustive scan limit {MAX_SCAN_N}")
    sigma = alg(inst, args.seed or 0)
    e = hamiltonian(sigma, inst)
    sys.stdout.write(f"partition={sigma}\ninner={e.inner}\nlog2_energy={format(e.log2_value, '.17g')}\n")


def _cmd_scan(args) -> None:
    mapping_n = args.n_list
    single = mapping_n is not None and "," not in mapping_n and ":" not in mapping_n
    cfg = _config(args, "ground_state_scaling")
    if not single:
        _emit(run(cfg), args.out)
        return
    n = cfg.n_list[0]
    inst = trial_instance(cfg, n, 0)
    res = full_scan(inst)
    rows = [
        (k, res.zeta[k].inner, res.zeta[k].log2_value, str(res.zeta_argmin[k]))
        for k in range(1, n)
    ]
    table = Table(("k", "zeta_inner", "log2_zeta", "argmin"), rows)
    part, e = res.global_min_excl if cfg.planted else res.global_min
    summary = (
        f"n={n}\nplanted={int(cfg.planted)}\nground_inner={e.inner}\n"
        f"ground_log2={format(e.log2_value, '.17g')}\nground_argmin={part}\n"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "scan.csv").write_text(table.to_csv())
        (out / "scan_summary.txt").write_text(summary)
    else:
        sys.stdout.write(table.to_csv())
        sys.stderr.write(summary)


def _cmd_predict(args) -> None:
    cfg = _config(args, "predict")
    record = run(cfg)
    text = "".join(f"{k}={v}\n" for k, v in (
        (k, format(v, ".17g") if isinstance(v, float) else v) for k, v in record.table.rows
    ))
    if args.out:
        record.write(args.out)
    sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required")
        if args.command == "sample":
            _cmd_sample(args)
        elif args.command == "solve":
            _cmd_solve(args)
        elif args.command == "scan":
            _cmd_scan(args)
        elif args.command == "predict":
            _cmd_predict(args)
        else:
            _emit(run(_config(args, EXPERIMENT_COMMANDS[args.command])), args.out)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
