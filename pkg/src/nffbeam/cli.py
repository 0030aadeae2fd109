"""``nffbeam`` command line: synth | field | compare | steer.

Exit codes: 0 success, 2 invalid configuration or input, 3 runtime
failure (singularity, I/O). Failures also print a one-line JSON error
record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import compare_methods, default_compare_grid, default_steer_grid, focal_report, steer_sweep
from .config import ScenarioConfig, load_config
from .errors import InvalidInputError, NffBeamError
from .field_engine import total_field
from .serialize import write_excitations_csv, write_field_map, write_json, write_summary
from .synthesis import normalize_phases, quantize_phases, synthesize

COMMANDS = ("synth", "field", "compare", "steer")
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


@dataclass
class RunSummary:
    command: str
    config: dict
    layout_hash: str
    reports: dict = field(default_factory=dict)
    comparison: dict | None = None
    timing_s: float = 0.0
    files: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "layout_hash": self.layout_hash,
            "reports": self.reports,
            "comparison": self.comparison,
            "timing_s": self.timing_s,
            "files": self.files,
            "version": self.version,
        }


def _single_target(cfg: ScenarioConfig, command: str):
    targets = cfg.focal_targets()
    if len(targets) != 1:
        raise InvalidInputError(f"'{command}' needs exactly one target, got {len(targets)}")
    return targets[0]


def _excitation(cfg, method, layout, target, freq):
    exc = synthesize(method, layout, target, freq)
    if cfg.quantization_bits is not None:
        exc = quantize_phases(exc, cfg.quantization_bits)
    return exc


def _map_files(fmap, out: Path, stem: str, formats) -> list[Path]:
    return [write_field_map(fmap, out / f"{stem}.{fmt}", fmt) for fmt in formats]


def run_scenario(cfg: ScenarioConfig, command: str, out_dir=None, workers: int | None = None) -> RunSummary:
    """Execute one subcommand and write its artifacts into ``out_dir``.

    ``summary.json`` holds wall-clock timing; every other artifact is
    byte-stable across runs and worker counts.
    """
    if command not in COMMANDS:
        raise InvalidInputError(f"unknown command {command!r}; expected one of {COMMANDS}")
    t0 = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.output_directory)
    freq, layout, model = cfg.frequency(), cfg.layout(), cfg.element_model()
    summary = RunSummary(command=command, config=cfg.to_dict(), layout_hash=layout.layout_hash())
    files: list[Path] = []

    if command == "synth":
        rows, sets = [], []
        for ti, target in enumerate(cfg.focal_targets()):
            for method in cfg.methods:
                exc = _excitation(cfg, method, layout, target, freq)
                norm = normalize_phases(exc, 0)
                sets.append(
                    {
                        "target_index": ti,
                        "target": target.r_s.tolist(),
                        "method": method,
                        "phases_rad": exc.phases.tolist(),
                        "normalized_phases_rad": norm.phases.tolist(),
                        "amplitudes": exc.amplitudes.tolist(),
                        "reference_index": 0,
                        "quantization_bits": cfg.quantization_bits,
                    }
                )
                for n in range(len(exc)):
                    rows.append(
                        {
                            "target_index": ti,
                            "method": method,
                            "element": n,
                            "phase_rad": exc.phases[n],
                            "normalized_phase_rad": norm.phases[n],
                            "amplitude": exc.amplitudes[n],
                        }
                    )
        if "json" in cfg.output_formats:
            files.append(write_json({"excitations": sets}, out / "excitations.json"))
        if "csv" in cfg.output_formats:
            files.append(write_excitations_csv(rows, out / "excitations.csv"))

    elif command == "field":
        targets = cfg.focal_targets()
        for ti, target in enumerate(targets):
            grid = cfg.grid.resolve(target) if cfg.grid is not None else default_compare_grid(target)
            for method in cfg.methods:
                exc = _excitation(cfg, method, layout, target, freq)
                fmap = total_field(layout, exc, model, grid, freq, workers)
                stem = f"field_{method}" if len(targets) == 1 else f"field_t{ti}_{method}"
                files += _map_files(fmap, out, stem, cfg.output_formats)
                if grid.kind != "points":
                    key = method if len(targets) == 1 else f"t{ti}:{method}"
                    summary.reports[key] = focal_report(fmap, target, layout, exc, freq).to_dict()

    elif command == "compare":
        target = _single_target(cfg, command)
        grid = cfg.grid.resolve(target) if cfg.grid is not None else None
        report = compare_methods(
            layout, target, freq, model, grid, cfg.methods, workers, quantization_bits=cfg.quantization_bits
        )
        for method, fmap in report.maps.items():
            files += _map_files(fmap, out, f"field_{method}", cfg.output_formats)
        files.append(write_json(report.to_dict(), out / "comparison.json"))
        summary.reports = {m: r.to_dict() for m, r in report.reports.items()}
        summary.comparison = {k: v for k, v in report.to_dict().items() if k != "reports"}

    else:
        targets = cfg.focal_targets()
        grid = (lambda t: cfg.grid.resolve(t)) if cfg.grid is not None else default_steer_grid
        reports, maps = steer_sweep(
            layout, targets, freq, model, grid, workers, return_maps=True, quantization_bits=cfg.quantization_bits
        )
        for ti, fmap in enumerate(maps):
            files += _map_files(fmap, out, f"steer_t{ti}", cfg.output_formats)
        files.append(write_json({"reports": [r.to_dict() for r in reports]}, out / "steer.json"))
        summary.reports = {f"t{i}": r.to_dict() for i, r in enumerate(reports)}

    summary.timing_s = time.perf_counter() - t0
    summary.files = [p.name for p in files] + ["summary.json"]
    write_summary(summary.to_dict(), out / "summary.json")
    return summary


def _error_record(exc: Exception, code: int) -> str:
    rec = {"status": "error", "exit_code": code, "error_type": type(exc).__name__, "message": str(exc)}
    for attr in ("point_index", "line", "column", "path"):
        value = getattr(exc, attr, None)
        if value is not None:
            rec[attr] = value
    return json.dumps(rec, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nffbeam", description="Near-field focused phased-array simulator")
    ap.add_argument("--version", action="version", version=f"nffbeam {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="scenario YAML file")
    ap.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    ap.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        summary = run_scenario(cfg, args.command, args.out)
    except InvalidInputError as exc:
        print(_error_record(exc, EXIT_INVALID), file=sys.stderr)
        return EXIT_INVALID
    except (NffBeamError, OSError) as exc:
        print(_error_record(exc, EXIT_RUNTIME), file=sys.stderr)
        return EXIT_RUNTIME

    if not args.quiet:
        print(f"nffbeam {args.command}: layout {summary.layout_hash}, {summary.timing_s:.3f} s")
        for key, rep in summary.reports.items():
            pk = ", ".join(f"{v:.4f}" for v in rep["peak_position"])
            print(f"  {key:>12}: peak ({pk}) m  |E| {rep['peak_magnitude']:.6g}")
        if summary.comparison:
            for name, ok in summary.comparison["checks"].items():
                print(f"  check {name}: {'pass' if ok else 'FAIL'}")
        print(f"  wrote {len(summary.files)} files to {args.out or cfg.output_directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
