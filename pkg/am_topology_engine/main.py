"""
AM Topology Engine - Main Entry Point
Comparative topological analysis of voxelized designs against their as-manufactured shapes.

Usage:
    python main.py family  --design part.binvox --mmn sphere:2 --lambdas 0.5,0.9,0.95 --out out/family
    python main.py cta     --design part.binvox --manufactured mfg.binvox --out out/cta [--vtk]
    python main.py correct --design part.binvox --mmn cube:1 --lambda 0.95 --out out/correct
    python main.py slice   --design part.binvox --axis z --mmn cube:1 --lambda 0.95 --out out/slices
    python main.py runs    --limit 20
"""
import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4


def setup_logging(verbose: bool = False):
    """Configure logging for the engine."""
    from src.core.config import Settings

    log_file = Settings.log_path()
    log_file.parent.mkdir(parents=True, exist_ok=True)

    formatter = logging.Formatter(
        "%(asctime)s [%(levelname)8s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    file_handler = logging.FileHandler(log_file)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if verbose else getattr(logging, Settings.LOG_LEVEL.upper(), logging.INFO))
    console_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in [h for h in root_logger.handlers if getattr(h, "_engine_handler", False)]:
        root_logger.removeHandler(handler)
        handler.close()
    file_handler._engine_handler = True
    console_handler._engine_handler = True
    root_logger.addHandler(file_handler)
    root_logger.addHandler(console_handler)

    return root_logger


def print_banner(command: str):
    """Print engine banner."""
    from src import __version__

    print("\n" + "=" * 70)
    print(f"AM TOPOLOGY ENGINE v{__version__} - {command.upper()}")
    print("=" * 70)
    print(f"Started: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 70 + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="AM Topology Engine - comparative topological analysis for additive manufacturing",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exit codes:
  0  success
  2  input error (unreadable or malformed grid, frame mismatch, bad MMN or lambda)
  3  numeric failure (FFT precision, direct work bound)
  4  internal consistency failure (ledger identity)
  5  correction stopped without a clean ledger
        """
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose logging")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: WORKERS)")
    parser.add_argument("--record", action="store_true", help="Record this run in the run database")
    parser.add_argument("--quiet", "-q", action="store_true", help="No console summary")
    sub = parser.add_subparsers(dest="command")

    family = sub.add_parser("family", help="As-manufactured family over a lambda list")
    family.add_argument("--design", required=True, type=Path)
    family.add_argument("--mmn", required=True, help="MMN spec, e.g. sphere:2, cube:1, cylinder:1,3")
    family.add_argument("--lambdas", required=True, help="Ascending comma-separated lambdas, e.g. 0.5,3/4,0.95")
    family.add_argument("--out", required=True, type=Path)
    family.add_argument("--vtk", action="store_true", help="Write members as VTK instead of binvox")
    family.add_argument("--dump-field", action="store_true", help="Also write overlap and OMR fields as VTK")

    cta = sub.add_parser("cta", help="Comparative topological analysis of two grids")
    cta.add_argument("--design", required=True, type=Path)
    cta.add_argument("--manufactured", type=Path, help="Manufactured grid (or give --mmn and --lambda)")
    cta.add_argument("--mmn", help="MMN spec used to compute the manufactured shape")
    cta.add_argument("--lambda", dest="lam", help="Threshold used to compute the manufactured shape")
    cta.add_argument("--out", required=True, type=Path, help="Output directory, or a *.json report path")
    cta.add_argument("--vtk", action="store_true", help="Write ecc and feature-label VTK volumes")
    cta.add_argument("--no-global", action="store_true", help="Skip the Betti comparison")

    correct = sub.add_parser("correct", help="Iterative OMRT correction")
    correct.add_argument("--design", required=True, type=Path)
    correct.add_argument("--mmn", required=True)
    correct.add_argument("--lambda", dest="lam", help="Initial uniform threshold")
    correct.add_argument("--config", type=Path, help="CorrectionConfig JSON file")
    correct.add_argument("--step", help="Bump increment")
    correct.add_argument("--max-iters", type=int)
    correct.add_argument("--budget", type=float, help="Deviation budget as a fraction of design volume")
    correct.add_argument("--out", required=True, type=Path)
    correct.add_argument("--vtk", action="store_true")

    slc = sub.add_parser("slice", help="Layer-by-layer 2D pipeline")
    slc.add_argument("--design", required=True, type=Path)
    slc.add_argument("--axis", choices=("x", "y", "z"), default="z")
    slc.add_argument("--mmn", required=True, help="2D MMN spec, e.g. cube:1 or sphere:2")
    slc.add_argument("--lambda", dest="lam", required=True)
    slc.add_argument("--out", required=True, type=Path)

    runs = sub.add_parser("runs", help="List recorded runs")
    runs.add_argument("--limit", type=int, default=20)
    return parser


def dispatch(args):
    """Run one subcommand. Returns its RunManifest (None for `runs`)."""
    if args.command == "family":
        from src.orchestration.run_family import run_family
        return run_family(args.design, args.mmn, args.lambdas, args.out,
                          fmt="vtk" if args.vtk else "binvox", dump_field=args.dump_field,
                          workers=args.workers, quiet=args.quiet)
    if args.command == "cta":
        from src.orchestration.run_cta import run_cta
        return run_cta(args.design, args.out, manufactured_path=args.manufactured,
                       mmn_text=args.mmn, lam=args.lam, vtk=args.vtk,
                       with_global=not args.no_global, workers=args.workers, quiet=args.quiet)
    if args.command == "correct":
        from src.orchestration.run_correct import run_correct
        overrides = {"initial_lambda": args.lam, "step": args.step,
                     "max_iters": args.max_iters, "deviation_budget": args.budget}
        return run_correct(args.design, args.mmn, args.out, config_path=args.config,
                           overrides=overrides, vtk=args.vtk, workers=args.workers,
                           quiet=args.quiet)
    if args.command == "slice":
        from src.orchestration.run_slice import run_slice
        return run_slice(args.design, args.mmn, args.lam, args.out, axis=args.axis,
                         workers=args.workers)
    if args.command == "runs":
        from src.storage.runs import recent_runs
        for run in recent_runs(args.limit):
            print(f"{run.started_at:%Y-%m-%d %H:%M:%S}  {run.command:<8} exit {run.exit_code}  "
                  f"{run.status:<10} {run.output_dir or ''}  {run.run_id}")
        return None
    raise ValueError(f"unknown command {args.command!r}")


def exit_code_for(exc: BaseException) -> int:
    from src.core.errors import (
        DegenerateMmnError, FrameMismatchError, GridParseError,
        InternalConsistencyError, InvalidThresholdError, PrecisionFailureError,
        WorkBoundExceededError,
    )
    from pydantic import ValidationError

    if isinstance(exc, (GridParseError, FrameMismatchError, DegenerateMmnError,
                        InvalidThresholdError, OSError, ValidationError)):
        return EXIT_INPUT
    if isinstance(exc, (PrecisionFailureError, WorkBoundExceededError)):
        return EXIT_NUMERIC
    if isinstance(exc, InternalConsistencyError):
        return EXIT_INTERNAL
    return EXIT_FAILURE


def main(argv=None) -> int:
    """Main entry point. Returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "cta" and args.manufactured is None and not (args.mmn and args.lam):
        parser.error("cta needs --manufactured, or both --mmn and --lambda")

    if not args.command:
        parser.print_help()
        print("\n⚠️  Error: No command specified. Use family, cta, correct, slice or runs\n")
        return EXIT_FAILURE

    from src.core.config import Settings

    logger = setup_logging(args.verbose)
    if not args.quiet:
        print_banner(args.command)

    manifest = None
    try:
        Settings.validate()
        manifest = dispatch(args)
        code = manifest.exit_code if manifest is not None else EXIT_OK

    except KeyboardInterrupt:
        print("\n\n⚠️  Interrupted by user\n")
        return EXIT_FAILURE

    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_FAILURE:
            logger.error(f"Fatal error: {e}", exc_info=True)
        else:
            logger.error(f"{type(e).__name__}: {e}")
            diagnostics = getattr(e, "diagnostics", None)
            if diagnostics:
                logger.debug(f"Diagnostics: {diagnostics}")
        print(f"\n❌ Error: {e}\n", file=sys.stderr)
        print(f"Check logs at {Settings.log_path()} for details\n", file=sys.stderr)

    if manifest is not None and (args.record or Settings.RECORD_RUNS):
        try:
            from src.storage.runs import record_run
            record_run(manifest, output_dir=str(getattr(args, "out", "")))
        except Exception as e:
            logger.warning(f"Could not record run: {e}")

    if code == EXIT_OK and not args.quiet:
        print("\n" + "=" * 70)
        print("✅ Execution completed successfully")
        print("=" * 70 + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
