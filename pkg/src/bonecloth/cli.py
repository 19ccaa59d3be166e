# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth.cli — Command-line interface
======================================

Usage:
    python -m bonecloth gen-assets --kind hanging-swatch --out assets/swatch
    python -m bonecloth train --assets assets/swatch --out runs/swatch
    python -m bonecloth preprocess --assets assets/swatch --model runs/swatch/model.bnck --out swatch.bidc
    python -m bonecloth simulate --assets assets/swatch --model runs/swatch/model.bnck \\
        --poses assets/swatch/poses/heldout_000.bpos --out out/swatch.btrj
    python -m bonecloth metrics --assets assets/swatch --trajectory out/swatch.btrj \\
        --poses assets/swatch/poses/heldout_000.bpos --out out/metrics
    python -m bonecloth bench --assets assets/swatch --model runs/swatch/model.bnck --out out/bench
    python -m bonecloth ablate-bones --assets assets/skirt --out runs/ablate-bones
    python -m bonecloth ablate --assets assets/skirt --out runs/ablate
    python -m bonecloth config --dump

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime
failure. Failures print one line on stderr:

    error=<kind> command=<command> reason=<text>

Configuration comes only from ``--config`` (JSON); environment variables
are never read. Every command with an output location writes
``effective_config.json`` (config + version) next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import __version__
from .config import RunConfig, load_config, override
from .errors import BoneClothError
from .error_formatter import format_error_line
from .metrics import format_report
from ._assets.bundle import gen_assets, read_bundle, write_bundle
from ._assets.experiments import BONE_COUNTS, VARIANTS, ablate, ablate_bones, format_ablation
from ._kinematics.poses import PoseSequence, read_poses
from ._networks.model import GarmentModel
from ._runtime.bench import bench, format_bench, teacher_frame_ms
from ._runtime.cache import build_identity_cache, read_identity_cache, write_identity_cache
from ._runtime.evaluate import evaluate_trajectory
from ._runtime.session import simulate
from ._runtime.trajectory import read_trajectory, write_obj_frames, write_trajectory
from ._shared.binio import atomic_write_text
from ._shared.logging_config import log_error, setup_logging
from ._shared.logging_formatters import disable_quiet_mode, enable_quiet_mode
from ._training.identity import prepare_identity
from ._training.trainer import train

logger = logging.getLogger("bonecloth.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_EXIT_CODES = {"validation": EXIT_VALIDATION, "runtime": EXIT_RUNTIME}


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1 and the one-line failure record."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        command = self.prog.split()[-1] if " " in self.prog else "-"
        sys.stderr.write(format_error_line("usage", command, message) + "\n")
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to JSON config file (defaults when omitted)")
    common.add_argument("--seed", type=int, help="Override the config seed")
    common.add_argument("--quiet", action="store_true", help="Suppress terminal logging (the log file is kept)")

    parser = _Parser(
        prog="bonecloth",
        description="Bone-driven neural garment simulation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Run 'bonecloth <command> --help' for the options of one command.",
    )
    parser.add_argument("--version", action="version", version=f"bonecloth {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True

    p = sub.add_parser("gen-assets", parents=[common], help="Generate a body, garment, drape and pose sequences")
    p.add_argument("--kind", choices=["capsule-biped", "swing-arm", "hanging-swatch", "skirt-tube"])
    p.add_argument("--out", required=True, help="Asset directory to create")

    p = sub.add_parser("preprocess", parents=[common], help="Build the identity cache (BIDC)")
    p.add_argument("--assets", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="Cache file to write")

    p = sub.add_parser("train", parents=[common], help="Two-phase training")
    p.add_argument("--assets", required=True, nargs="+", help="One asset directory per identity")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", help="Training-state file to continue from")

    p = sub.add_parser("simulate", parents=[common], help="Run the pose deformer over a pose sequence")
    p.add_argument("--assets", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cache", help="Identity cache; built in memory when omitted")
    p.add_argument("--poses", required=True)
    p.add_argument("--out", required=True, help="BTRJ file, or a directory with --format obj")
    p.add_argument("--format", choices=["btrj", "obj"], default="btrj")

    p = sub.add_parser("metrics", parents=[common], help="Edge, area and collision errors of a trajectory")
    p.add_argument("--assets", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--trajectory", help="BTRJ file to evaluate (needs --poses)")
    source.add_argument("--rest", action="store_true", help="Evaluate the rest template on the rest-pose body")
    p.add_argument("--poses")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", parents=[common], help="Per-stage timing of the frame kernel")
    p.add_argument("--assets", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cache")
    p.add_argument("--poses", help="Pose sequence (default: first held-out sequence)")
    p.add_argument("--frames", type=int, help="Measured frames (default: runtime.bench_frames)")
    p.add_argument("--teacher-frames", type=int, default=20, help="Dynamics-teacher frames to time (0 skips)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("ablate-bones", parents=[common], help="Train and evaluate at several bone counts")
    p.add_argument("--assets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bones", type=int, nargs="+", default=list(BONE_COUNTS))

    p = sub.add_parser("ablate", parents=[common], help="Loss and architecture ablations")
    p.add_argument("--assets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variants", nargs="+", choices=list(VARIANTS), default=list(VARIANTS))

    p = sub.add_parser("config", parents=[common], help="Show the effective configuration")
    p.add_argument("--dump", action="store_true", required=True)
    return parser


def write_effective_config(directory: Path, config: RunConfig) -> None:
    payload = {"version": __version__, "config": config.model_dump(mode="json")}
    atomic_write_text(directory / "effective_config.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=1) + "\n")


def _load_model(path: str, config: RunConfig) -> GarmentModel:
    return GarmentModel.load(path, config.networks, config.seed)


def _cache(args: argparse.Namespace, model: GarmentModel, bundle, config: RunConfig):
    if args.cache:
        return read_identity_cache(args.cache, bundle, config)
    return build_identity_cache(model, bundle, config)


# ── commands ──────────────────────────────────────────────────


def cmd_gen_assets(args: argparse.Namespace, config: RunConfig) -> int:
    if args.kind:
        config = override(config, assets={"kind": args.kind})
    out = Path(args.out)
    write_bundle(out, gen_assets(config))
    write_effective_config(out, config)
    print(f"assets={out} kind={config.assets.kind}")
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace, config: RunConfig) -> int:
    bundle = read_bundle(args.assets)
    cache = build_identity_cache(_load_model(args.model, config), bundle, config)
    out = Path(args.out)
    write_identity_cache(out, cache)
    write_effective_config(out.parent, config)
    print(f"cache={out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, config: RunConfig) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_effective_config(out, config)
    result = train(config, args.assets, out, resume=args.resume)
    print(f"model={result.model_path} loss_log={result.loss_log}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    bundle = read_bundle(args.assets)
    model = _load_model(args.model, config)
    poses = read_poses(args.poses, bundle.body.joint_count)
    positions = simulate(model, _cache(args, model, bundle, config), poses)
    out = Path(args.out)
    if args.format == "obj":
        write_obj_frames(out, bundle.canonical, positions)
        write_effective_config(out, config)
    else:
        write_trajectory(out, positions)
        write_effective_config(out.parent, config)
    print(f"frames={len(positions)} out={out}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace, config: RunConfig) -> int:
    bundle = read_bundle(args.assets)
    if args.rest:
        poses = PoseSequence(bundle.body.skeleton.identity_pose()[None], config.physics.dt)
        positions = bundle.template.vertices[None]
    else:
        poses = read_poses(args.poses, bundle.body.joint_count)
        positions = read_trajectory(args.trajectory)
    report = evaluate_trajectory(bundle, poses, positions)
    out = Path(args.out)
    _write_json(out / "metrics.json", report)
    atomic_write_text(out / "metrics.txt", format_report(report) + "\n")
    write_effective_config(out, config)
    print(format_report(report))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, config: RunConfig) -> int:
    bundle = read_bundle(args.assets)
    model = _load_model(args.model, config)
    poses = read_poses(args.poses, bundle.body.joint_count) if args.poses else (bundle.heldout or bundle.train)[0]
    teacher_ms = 0.0
    if args.teacher_frames > 0:
        identity = prepare_identity(Path(args.assets).name, bundle, config)
        teacher_ms = teacher_frame_ms(model, identity, config, args.teacher_frames)
    report = bench(
        model,
        _cache(args, model, bundle, config),
        poses,
        frames=args.frames or config.runtime.bench_frames,
        warmup_frames=config.runtime.bench_warmup_frames,
        teacher_ms=teacher_ms,
    )
    out = Path(args.out)
    _write_json(out / "bench.json", report)
    write_effective_config(out, config)
    print(format_bench(report))
    return EXIT_OK


def cmd_ablate_bones(args: argparse.Namespace, config: RunConfig) -> int:
    out = Path(args.out)
    report = ablate_bones(config, args.assets, out, args.bones)
    _write_json(out / "ablation.json", report)
    write_effective_config(out, config)
    print(format_ablation(report))
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace, config: RunConfig) -> int:
    out = Path(args.out)
    report = ablate(config, args.assets, out, args.variants)
    _write_json(out / "ablation.json", report)
    write_effective_config(out, config)
    print(format_ablation(report))
    return EXIT_OK


def cmd_config(args: argparse.Namespace, config: RunConfig) -> int:
    print(json.dumps({"version": __version__, "config": config.model_dump(mode="json")}, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "gen-assets": cmd_gen_assets,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "simulate": cmd_simulate,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
    "ablate-bones": cmd_ablate_bones,
    "ablate": cmd_ablate,
    "config": cmd_config,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "metrics" and args.trajectory and not args.poses:
        parser.error("metrics: --trajectory requires --poses")
    command = args.command
    if args.quiet:
        enable_quiet_mode()
    else:
        disable_quiet_mode()
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = override(config, seed=args.seed)
        setup_logging(config.log_file, getattr(logging, config.log_level))
        return COMMANDS[command](args, config)
    except BoneClothError as e:
        log_error(e)
        sys.stderr.write(format_error_line(e.exit_kind, command, str(e)) + "\n")
        return _EXIT_CODES.get(e.exit_kind, EXIT_RUNTIME)
    except OSError as e:
        logger.error(f"{command} failed: {e}")
        sys.stderr.write(format_error_line("runtime", command, str(e)) + "\n")
        return EXIT_RUNTIME
    except Exception as e:
        wrapped = BoneClothError(f"{type(e).__name__}: {e}", operation=command, details={"exception": type(e).__name__})
        log_error(wrapped)
        logger.debug(f"{command} traceback", exc_info=True)
        sys.stderr.write(format_error_line(wrapped.exit_kind, command, str(wrapped)) + "\n")
        return EXIT_RUNTIME
