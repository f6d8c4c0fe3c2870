"""Command-line front end.

Subcommands: ``synth`` (generate + export an ensemble), ``sound``
(estimation-error study), ``focus`` (focusing maps and two-user
interference), ``ber`` (BER sweep), ``validate`` (built-in invariant
battery). Exit codes: 0 success, 2 configuration error (bad flags, missing
or invalid scenario), 1 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .channel import export_ensemble
from .errors import ConfigurationError, TrLinkError
from .harness import (
    Scenario,
    load_scenario,
    run_ber_sweep,
    run_focusing_experiment,
    run_sounding_study,
    run_validation_suite,
)

_EXIT_OK = 0
_EXIT_RUNTIME = 1
_EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trlink",
        description="Time-reversal precoding link simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext, needs_scenario in (
        ("synth", "synthesise a channel ensemble and export it as JSON+CSV", True),
        ("sound", "channel-estimation error vs time-bandwidth product", True),
        ("focus", "spatiotemporal focusing maps and two-user interference", True),
        ("ber", "Monte-Carlo BER sweep over (scheme, spacing, SNR)", True),
        ("validate", "run the built-in invariant battery", False),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--scenario", required=needs_scenario, default=None,
                         help="scenario JSON file")
        cmd.add_argument("--out", default="results", help="output directory")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the scenario master seed")
    return parser


def _load(args: argparse.Namespace) -> Scenario:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, master_seed=args.seed)
    return scenario


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "validate":
            seed = args.seed if args.seed is not None else 0
            if args.scenario is not None:
                _load(args)  # config check only
            results = run_validation_suite(seed)
            failed = 0
            for name, passed, detail in results:
                status = "PASS" if passed else "FAIL"
                print(f"{status} {name}: {detail}")
                failed += 0 if passed else 1
            if failed:
                print(f"{failed}/{len(results)} checks failed")
                return _EXIT_RUNTIME
            print(f"all {len(results)} checks passed")
            return _EXIT_OK

        scenario = _load(args)
        out_dir = Path(args.out)

        if args.command == "synth":
            out_dir.mkdir(parents=True, exist_ok=True)
            ensemble = scenario.ensemble_for_trial(0)
            target = out_dir / "ensemble.json"
            export_ensemble(ensemble, target)
            print(f"wrote {target} and {target.with_suffix('.csv')}")
        elif args.command == "sound":
            rows = run_sounding_study(scenario, out_dir)
            for tb, snr_db, err in rows:
                print(f"TB={tb}  probe_snr_db={snr_db}  error={err:.3e}")
            print(f"wrote {out_dir / 'sounding_error.csv'}")
        elif args.command == "focus":
            reports = run_focusing_experiment(scenario, out_dir)
            print(f"wrote {len(reports)} focusing CSVs to {out_dir}")
        elif args.command == "ber":
            records = run_ber_sweep(scenario, out_dir)
            files = {(r.scheme, r.d) for r in records}
            print(f"wrote {len(files)} BER CSVs ({len(records)} records) to {out_dir}")
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigurationError(f"unknown command {args.command!r}")
        return _EXIT_OK
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except TrLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
