"""
LSBuck - Command Line Driver

Usage:
    python driver_cli.py run          --config cases/ellipse_convergence.yaml
    python driver_cli.py sweep        --config cases/circle_radius_cccc.yaml --out results/radius
    python driver_cli.py export-modes --config cases/clover_stiffened.yaml --modes 5
    python driver_cli.py validate     --config cases/clover_stiffened.yaml

Exit codes: 0 success, 2 invalid model file, 3 analysis/solver failure.
"""

import argparse
import sys
from pathlib import Path

from analysis import mesh_report, results_table, run_analysis, sweep, write_eigenvalues
from errors import EXIT_OK, EXIT_VALIDATION, ConfigValidationError, LSBuckError, exit_code
from mode_export import export_modes
from model_config import load_config, load_runtime_config, with_overrides
from utils.logging_config import get_logger, setup_logging

logger = get_logger('cli')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='lsbuck',
        description="Thermal buckling of stiffened composite plates with level-set cutouts",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", required=True, help="Model file (YAML/JSON)")
    common.add_argument("--out", "-o", default=None, help="Output directory override")
    common.add_argument("--refinement", "-r", type=int, default=None,
                        help="Plate refinement level override (>= 1)")
    common.add_argument("--modes", "-m", type=int, default=None,
                        help="Number of buckling modes override")
    common.add_argument("--runtime-config", default='config.yaml',
                        help="Runtime defaults (logging, solver, outputs)")

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('run', parents=[common], help="Solve one model and write result tables")
    p_sweep = sub.add_parser('sweep', parents=[common], help="Run the model's parametric sweep")
    p_sweep.add_argument("--workers", type=int, default=1, help="Concurrent sweep points")
    p_export = sub.add_parser('export-modes', parents=[common],
                              help="Solve and export mode shapes (CSV/VTK)")
    p_export.add_argument("--grid", type=int, default=None, help="Grid points per direction")
    sub.add_parser('validate', parents=[common], help="Check a model file and list all errors")
    return parser


def _output_dir(config) -> Path:
    return Path(config.outputs.directory) / config.name


def cmd_run(config, runtime) -> int:
    result = run_analysis(config, runtime)
    out = _output_dir(config)
    results_table(result).write_csv(out / 'results.csv')
    write_eigenvalues(result, out / 'eigenvalues.csv')
    mesh_report(result.discretization).write_csv(out / 'mesh.csv')
    print(f"{config.name}: lambda* = {result.row['lambda_star']}  "
          f"(nDoF={result.row['n_dof']}, extra={result.row['extra_dof']})")
    print(f"Results written to {out}")
    return EXIT_OK


def cmd_sweep(config, runtime, workers: int = 1) -> int:
    table = sweep(config, runtime=runtime, workers=workers)
    path = table.write_csv(_output_dir(config) / 'sweep.csv')
    for row in table.rows:
        print(f"  {row['axis']}={row['value']}: {row['status']}  lambda*={row['lambda_star']}")
    print(f"Sweep table written to {path}")
    return EXIT_OK


def cmd_export(config, runtime, grid=None) -> int:
    result = run_analysis(config, runtime)
    if not result.run.solution.buckled:
        print(f"{config.name}: no buckling mode to export")
        return EXIT_OK
    paths = export_modes(result.discretization, result.run.full_modes(),
                         _output_dir(config) / 'modes',
                         grid_resolution=grid or config.outputs.mode_grid,
                         formats=config.outputs.formats)
    print(f"Exported {len(paths)} file(s) to {_output_dir(config) / 'modes'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.runtime_config)
    runtime = load_runtime_config(args.runtime_config)

    try:
        config = load_config(args.config, runtime)
        config = with_overrides(config, refinement=args.refinement,
                                n_modes=args.modes, out=args.out)
    except ConfigValidationError as exc:
        print(f"Invalid model file {args.config}:", file=sys.stderr)
        for path, message in exc.problems:
            print(f"  {path}: {message}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == 'validate':
        print(f"{args.config}: OK (case '{config.name}')")
        return EXIT_OK

    try:
        if args.command == 'run':
            return cmd_run(config, runtime)
        if args.command == 'sweep':
            return cmd_sweep(config, runtime, args.workers)
        return cmd_export(config, runtime, args.grid)
    except LSBuckError as exc:
        logger.error(f"Analysis failed: {exc}")
        print(f"Analysis failed: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
