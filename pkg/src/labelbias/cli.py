"""Command-line entry point: ``labelbias <subcommand> --seed N --out PATH``."""
from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .criterion import ProxyProblem, corollary_signs, theorem1_condition
from .data import Dataset
from .errors import InvalidConfigError, LabelBiasError
from .experiments import (
    generate_arrest_surrogate,
    load_health_dataset,
    run_beta_sweep,
    run_enrollment,
    run_rho_sweep,
)
from .experiments.arrests import COHORT_SIZE, SYNTHETIC_NOTE, ArrestConfig
from .experiments.health import DEFAULT_CAPACITIES, DEFAULT_RIDGE, ColumnMap
from .seeding import derive_seed
from .sem import StylizedParams

# execution-only settings; excluded from the metadata echo so outputs do not depend on them
_EXECUTION_KEYS = {"jobs", "config", "func", "command"}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def read_config(path: str | Path) -> list[str]:
    """Turn a ``key = value`` file into argv tokens (``--key value``)."""
    argv: list[str] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{lineno}: expected `key = value`")
        key, value = (s.strip() for s in line.split("=", 1))
        argv.append(f"--{key.replace('_', '-')}={value}")
    return argv


def _add_common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed for every random stream (required)")
    p.add_argument("--out", type=Path, required=out_required, help="output CSV path")
    p.add_argument("--jobs", type=int, default=1, help="parallel grid points; results do not depend on it")
    p.add_argument("--config", type=Path, default=None, help="key = value file supplying option values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelbias", description=__doc__)
    parser.add_argument("--version", action="version", version=f"labelbias {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sem-sweep", help="simple vs complex RMSE across beta on the stylized model")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--gamma", type=float, default=0.4)
    p.add_argument("--delta", type=float, default=0.4)
    p.add_argument("--betas", type=_floats, default=None, help="comma-separated beta grid")
    p.add_argument("--n-train", type=int, default=100_000)
    p.add_argument("--n-test", type=int, default=100_000)
    p.set_defaults(func=cmd_sem_sweep)

    p = sub.add_parser("arrest-sweep", help="AUC across rho on the arrest cohort")
    _add_common(p)
    p.add_argument("--data", type=Path, default=None, help="cohort CSV (age, A0, Z, A1); generated if omitted")
    p.add_argument("--n", type=int, default=COHORT_SIZE, help="size of the generated cohort")
    p.add_argument("--rhos", type=_floats, default=None, help="comma-separated rho grid")
    p.add_argument("--n-sim", type=int, default=20)
    p.add_argument("--kappa", type=float, default=ArrestConfig.kappa)
    p.add_argument("--p-high-policing", type=float, default=ArrestConfig.p_high_policing)
    p.set_defaults(func=cmd_arrest_sweep)

    p = sub.add_parser("health-enroll", help="care-management enrollment curves")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True, help="healthcare CSV")
    p.add_argument("--column-map", type=Path, default=None, help="column map file (default: shipped map)")
    p.add_argument("--capacities", type=_floats, default=list(DEFAULT_CAPACITIES))
    p.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    p.set_defaults(func=cmd_health_enroll)

    p = sub.add_parser("criterion-check", help="print the feature-exclusion report as JSON")
    _add_common(p, out_required=False)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--data", type=Path, default=None, help="CSV for empirical mode")
    p.add_argument("--true", dest="true_label", default=None)
    p.add_argument("--proxy", default=None)
    p.add_argument("--retained", type=_names, default=None)
    p.add_argument("--candidate", default=None)
    p.add_argument("--assume-cov-y-z", type=float, default=None,
                   help="assumed Cov(Y, Z | X) when the true label is unobserved")
    p.add_argument("--additive-noise", action="store_true",
                   help="declare the proxy to be the true label plus independent noise")
    p.add_argument("--basis", choices=("corollary1", "theorem1"), default="corollary1")
    p.set_defaults(func=cmd_criterion_check)
    return parser


def _effective_config(args: argparse.Namespace) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _EXECUTION_KEYS:
            continue
        if k == "out" and v is not None:
            v = Path(v).name  # directory is not part of the run's identity
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _write_metadata(args: argparse.Namespace, extra: dict | None = None) -> None:
    meta = {
        "command": args.command,
        "config": _effective_config(args),
        "versions": {
            "labelbias": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        meta.update(extra)
    Path(f"{args.out}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_sem_sweep(args: argparse.Namespace) -> int:
    for beta in args.betas or []:
        StylizedParams(args.alpha, beta, args.gamma, args.delta)
    result = run_beta_sweep(
        args.betas, args.alpha, args.gamma, args.delta, args.n_train, args.n_test, args.seed, args.jobs
    )
    if args.betas is None:
        args.betas = result.grid
    result.to_csv(args.out)
    _write_metadata(args)
    return 0


def cmd_arrest_sweep(args: argparse.Namespace) -> int:
    if args.data is not None:
        data = Dataset.from_csv(args.data)
        note = f"cohort loaded from {args.data.name}"
    else:
        config = ArrestConfig(p_high_policing=args.p_high_policing, kappa=args.kappa)
        data = generate_arrest_surrogate(args.n, derive_seed(args.seed, "surrogate"), config)
        note = SYNTHETIC_NOTE
    result = run_rho_sweep(args.rhos, data, args.n_sim, args.seed, args.jobs)
    if args.rhos is None:
        args.rhos = result.grid
    result.to_csv(args.out)
    _write_metadata(args, {"data": note})
    return 0


def cmd_health_enroll(args: argparse.Namespace) -> int:
    cmap = ColumnMap.from_file(args.column_map) if args.column_map else None
    dataset = load_health_dataset(args.data, cmap)
    curves = run_enrollment(dataset, args.capacities, args.seed, args.ridge)
    curves.to_csv(args.out)
    _write_metadata(args, {"rows_dropped": dataset.n_dropped, "curves": curves.rows})
    return 0


def cmd_criterion_check(args: argparse.Namespace) -> int:
    if args.data is not None:
        missing = [f"--{n}" for n in ("proxy", "retained", "candidate") if getattr(args, n) is None]
        if missing:
            raise InvalidConfigError(f"empirical mode needs {', '.join(missing)}")
        d = Dataset.from_csv(args.data)
        problem = ProxyProblem(
            proxy_label=args.proxy, retained=args.retained, candidate=args.candidate,
            true_label=args.true_label, dataset=d, assumed_cov_y_z_given_x=args.assume_cov_y_z,
            additive_noise=args.additive_noise,
        )
    else:
        values = [args.alpha, args.beta, args.gamma, args.delta]
        if any(v is None for v in values):
            raise InvalidConfigError("analytic mode needs --alpha --beta --gamma --delta (or --data)")
        problem = ProxyProblem.stylized(StylizedParams(*values), additive_noise=args.additive_noise)
    check = corollary_signs if args.basis == "corollary1" else theorem1_condition
    text = check(problem).to_json(indent=2) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        Path(args.out).write_text(text)
        _write_metadata(args)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            extra = read_config(args.config)
        except (OSError, LabelBiasError) as exc:
            print(f"labelbias: error: {exc}", file=sys.stderr)
            return 1
        # file values first so explicit flags on the command line win
        args = parser.parse_args([argv[0], *extra, *argv[1:]])
    if args.seed is None:
        if args.command != "criterion-check":
            sub_usage = f"usage: labelbias {args.command} --seed SEED --out OUT [options]"
            print(sub_usage, file=sys.stderr)
            print(f"labelbias {args.command}: error: --seed is required", file=sys.stderr)
            return 2
        args.seed = 0
    if args.jobs < 1:
        print("labelbias: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (LabelBiasError, OSError, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"labelbias {args.command}: error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
