"""Command-line surface: `python -m src.module_6_io_cli <command> ...`.

Exit codes: 0 success, 1 invalid input (bad shapes, bad files, bad config),
2 a numerical check (oracle or gradient) exceeded its tolerance.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from src.module_1_propagation import Activation, activate, propagate_bundle
from src.module_2_oracle import equivalence_report
from src.module_3_metrics import evaluate
from src.module_4_autograd import gradcheck
from src.module_5_synth import SceneKind, SceneSpec, build_synthetic_bundle, constant_schedule, far_decay_schedule
from src.shared import (
    AttentionStack,
    CheckFailure,
    DepthGrid,
    Precision,
    PropagationConfig,
    ValidationError,
    Variant,
    build_neighborhood,
    validate_bundle,
)
from src.shared.neighborhood import describe_rings

from .atomic import atomic_write_text
from .experiments import run_ablation, run_bench
from .pgm import read_depth_pgm, write_depth_pgm
from .run_config import SCHEDULES, RunConfig, environment, resolve_run_config
from .tensor_file import read_tensor, write_tensor

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2

# RunConfig keys that may come from command-line flags.
_CONFIG_FLAGS = (
    "variant",
    "steps",
    "epsilon",
    "precision",
    "reference",
    "suppression",
    "threads",
    "activation",
    "seed",
    "scene",
    "height",
    "width",
    "rate",
    "sigma",
    "schedule",
    "depth",
    "affinity",
    "attention",
    "offsets",
    "output",
)


# -----------------------------------------------------------------------------
# Setup helpers
# -----------------------------------------------------------------------------


def configure_logging(level: Optional[str] = None) -> None:
    """--log-level, else DYSPN_LOG_LEVEL from the environment or .env, else INFO."""
    name = (level or environment().get("DYSPN_LOG_LEVEL") or "INFO").upper()
    if name not in LOG_LEVELS:
        name = "INFO"
    logging.basicConfig(level=name, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(name)


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for key in _CONFIG_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = str(value)
    return resolve_run_config(getattr(args, "config", None), overrides)


def _require(config: RunConfig, *keys: str) -> None:
    missing = [key for key in keys if getattr(config, key) is None]
    if missing:
        flags = ", ".join(f"--{key}" for key in missing)
        raise ValidationError(f"missing required setting(s): {flags} (or set them in --config)")


def _variants(choice: str) -> List[Variant]:
    return list(Variant) if choice == "all" else [Variant(choice)]


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    config = _run_config(args)
    _require(config, "output")
    out = Path(config.output)

    scene = SceneSpec(kind=config.scene, height=config.height, width=config.width, seed=config.seed)
    schedule = constant_schedule(1.0) if config.schedule == "constant" else far_decay_schedule()
    synthetic = build_synthetic_bundle(
        config.variant,
        scene,
        rate=config.rate,
        schedule=schedule,
        sigma=config.sigma,
        config=config.propagation_config(),
        edge_aware=config.schedule == "far_decay_edges",
    )
    bundle = synthetic.bundle

    write_depth_pgm(out / "gt.pgm", synthetic.gt)
    write_depth_pgm(out / "sparse.pgm", synthetic.sparse)
    write_depth_pgm(out / "initial.pgm", bundle.depth)
    write_tensor(out / "guidance.dyt", synthetic.guidance)
    write_tensor(out / "affinity.dyt", bundle.affinity.weights)
    write_tensor(out / "attention.dyt", bundle.attention.values)
    offsets = None
    if bundle.spec.offset_field is not None:
        offsets = str(out / "offsets.dyt")
        write_tensor(offsets, bundle.spec.offset_field)

    resolved = replace(
        config,
        activation=Activation.IDENTITY,
        depth=str(out / "initial.pgm"),
        affinity=str(out / "affinity.dyt"),
        attention=str(out / "attention.dyt"),
        offsets=offsets,
    )
    resolved.write(out)
    print(f"{scene.kind.value} {scene.height}x{scene.width}: {synthetic.sparse.valid_count()} samples")
    for line in describe_rings(bundle.spec):
        print(f"  {line}")
    print(f"wrote synthetic inputs to {out}")
    return EXIT_OK


def cmd_propagate(args: argparse.Namespace) -> int:
    config = _run_config(args)
    _require(config, "depth", "affinity", "attention", "output")
    pconfig = config.propagation_config()

    # Everything is read and validated before anything is written.
    depth = read_depth_pgm(config.depth)
    affinity = read_tensor(config.affinity)
    raw_attention = read_tensor(config.attention)
    offset_field = None
    if config.variant is Variant.DEFORMABLE:
        _require(config, "offsets")
        offset_field = read_tensor(config.offsets)

    spec = build_neighborhood(config.variant, depth.height, depth.width, offset_field)
    if config.activation is Activation.IDENTITY:
        attention = AttentionStack(raw_attention)
    else:
        attention = activate(raw_attention, config.activation)
    bundle = validate_bundle(depth, affinity, attention, spec, pconfig)

    tape = propagate_bundle(bundle)
    refined = DepthGrid.from_refined(tape.final)

    out = Path(config.output)
    write_depth_pgm(out / "depth.pgm", refined)
    if args.tape:
        write_tensor(out / "tape.dyt", tape.states)
    config.write(out)
    print(f"propagated {config.variant.value} for {pconfig.steps} step(s); wrote {out / 'depth.pgm'}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    pred = read_depth_pgm(args.pred)
    gt = read_depth_pgm(args.gt)
    if pred.shape != gt.shape:
        raise ValidationError(f"{args.pred}: shape {pred.shape} does not match {args.gt} shape {gt.shape}")
    report = evaluate(pred, gt)
    label = Path(args.pred).name
    csv_text = report.to_csv(label=label)
    print(report.format_text(label=label))
    print()
    print(csv_text, end="")
    if args.csv:
        atomic_write_text(args.csv, csv_text)
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    config = PropagationConfig(precision=Precision(args.precision))
    failed = []
    for variant in _variants(args.variant):
        report = equivalence_report(
            variant,
            sizes=((args.height, args.width),),
            steps=args.steps,
            seeds=range(args.seed, args.seed + args.seeds),
            config=config,
        )
        print(report.summary())
        if not report.passed:
            failed.append(variant.value)
    if failed:
        raise CheckFailure(f"kernel and oracle disagree beyond tolerance for: {', '.join(failed)}")
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    failed = []
    for variant in _variants(args.variant):
        for steps in args.steps:
            report = gradcheck(
                variant,
                height=args.height,
                width=args.width,
                steps=steps,
                seeds=range(args.seed, args.seed + args.seeds),
                tolerance=args.tolerance,
            )
            print(report.summary())
            if not report.passed:
                failed.append(f"{variant.value} N={steps}")
    if failed:
        raise CheckFailure(f"gradient check failed for: {', '.join(failed)}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    table = run_bench(args.height, args.width, args.steps, args.repeats, args.threads, args.seed)
    print(f"{args.height}x{args.width}, {args.steps} steps x {args.repeats} repeats, {args.threads} thread(s)")
    print(table.to_string(index=False, float_format=lambda x: f"{x:.3f}"))
    return EXIT_OK


def cmd_ablation(args: argparse.Namespace) -> int:
    scene = SceneSpec(kind=SceneKind(args.scene), height=args.height, width=args.width, seed=args.seed)
    table = run_ablation(Variant(args.variant), scene, rate=args.rate, sigma=args.sigma)
    print(f"{scene.kind.value} {scene.height}x{scene.width}, rate {args.rate:g}, {args.variant}")
    print(table.to_string(float_format=lambda x: f"{x:.1f}"))
    return EXIT_OK


# -----------------------------------------------------------------------------
# Parser
# -----------------------------------------------------------------------------


def _add_propagation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value run config file")
    parser.add_argument("--variant", choices=[v.value for v in Variant])
    parser.add_argument("--steps", type=int)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--precision", choices=[p.value for p in Precision])
    parser.add_argument("--threads", type=int)
    parser.add_argument("--reference", action="store_const", const="true", help="exact eps = 0 mode")
    parser.add_argument(
        "--no-suppression", dest="suppression", action="store_const", const="false", help="hold pi_0 at 1"
    )
    parser.add_argument("--output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyspn", description="Dynamic spatial propagation for depth completion")
    parser.add_argument("--log-level", choices=LOG_LEVELS, help="default: DYSPN_LOG_LEVEL or INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="refine a depth map with affinity and attention tensors")
    _add_propagation_flags(p)
    p.add_argument("--depth", help="initial depth PGM")
    p.add_argument("--affinity", help="affinity tensor [K, H, W]")
    p.add_argument("--attention", help="attention tensor [T, R+1, H, W]")
    p.add_argument("--offsets", help="deformable offset tensor [2, 8, 2, H, W]")
    p.add_argument("--activation", choices=[a.value for a in Activation], help="treat attention as logits")
    p.add_argument("--tape", action="store_true", help="also write every state h_0..h_N to tape.dyt")
    p.set_defaults(handler=cmd_propagate)

    p = sub.add_parser("synth", help="write a synthetic scene and its propagation inputs")
    _add_propagation_flags(p)
    p.add_argument("--scene", choices=[k.value for k in SceneKind])
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--rate", type=float, help="fraction of pixels kept as sparse samples")
    p.add_argument("--sigma", type=float, help="affinity sigma (default 0.1 of guidance range)")
    p.add_argument("--schedule", choices=SCHEDULES, help="far_decay_edges also dims the far rings along guidance edges")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("eval", help="metrics of a predicted depth PGM against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--csv", help="also write the CSV report to this file")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("oracle-check", help="compare the kernel with the dense-matrix oracle")
    p.add_argument("--variant", default="all", choices=["all"] + [v.value for v in Variant])
    p.add_argument("--height", type=int, default=8)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--steps", type=int, nargs="+", default=[6])
    p.add_argument("--seeds", type=int, default=5, help="number of random bundles per setting")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--precision", default=Precision.F64.value, choices=[q.value for q in Precision])
    p.set_defaults(handler=cmd_oracle_check)

    p = sub.add_parser("gradcheck", help="certify analytic gradients with finite differences")
    p.add_argument("--variant", default="all", choices=["all"] + [v.value for v in Variant])
    p.add_argument("--height", type=int, default=5)
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--steps", type=int, nargs="+", default=[1, 3])
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser("bench", help="steps per second for each variant")
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("ablation", help="CSPN vs DySPN study on a synthetic scene")
    p.add_argument("--variant", default=Variant.RING_7X7.value, choices=[v.value for v in Variant])
    p.add_argument("--scene", default=SceneKind.STEP_EDGE.value, choices=[k.value for k in SceneKind])
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--rate", type=float, default=0.05)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_ablation)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for failed checks here.
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    configure_logging(args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except CheckFailure as exc:
        logger.error("%s", exc)
        return EXIT_CHECK_FAILED
    except (ValidationError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
