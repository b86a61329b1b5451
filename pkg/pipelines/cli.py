"""
Command-line entry point: generate, train, rollout, verify and exp.

Exit codes: 0 success, 1 runtime failure, 2 usage error,
3 verification threshold violated.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

# Add project root to path
sys.path.append(str(Path(__file__).parent.parent))

from flowdata import Box, load_dataset, sample_pairs, sample_trajectory, save_dataset
from integrators import IntegratorConfig
from models import Fnn, SympNet, load_model, save_model
from phase import SYSTEMS, get_system
from phase.base import InvalidArgumentError, PhaseError
from pipelines.presets import coordinate_names, default_box, load_catalog, load_defaults
from pipelines.run_experiment import (
    build_model,
    history_paths,
    manifest_failed,
    rollout_frame,
    run_experiment,
)
from training import TrainConfig, train
from verification import (
    ThresholdViolation,
    assert_below,
    energy_drift,
    gradient_check,
    symplectic_residual,
    write_frame,
    write_json,
    write_symplectic_report,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_THRESHOLD = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CHECKS = ("symplectic", "gradients", "energy")


class UsageError(InvalidArgumentError):
    """Raised for flag combinations argparse cannot express."""
    pass


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def vector(value) -> np.ndarray:
    """Parse "0,1.0" (flags) or [0, 1.0] (config files) into a float vector."""
    if isinstance(value, str):
        try:
            value = [float(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise InvalidArgumentError(f"Expected comma-separated numbers, got {value!r}") from None
    return np.asarray(value, dtype=np.float64)


def int_list(value) -> List[int]:
    if isinstance(value, str):
        return [int(v) for v in value.split(",") if v.strip()]
    return [int(v) for v in value]


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required flag(s) {', '.join(missing)}")


def _integrator(args: argparse.Namespace, defaults: Dict[str, Any]) -> IntegratorConfig:
    cfg = dict(defaults["integrator"])
    if args.scheme is not None:
        cfg["scheme"] = args.scheme
    if args.substeps is not None:
        cfg["substeps"] = args.substeps
    return IntegratorConfig(**cfg)


def _box(args: argparse.Namespace, system_name: str, d: int, defaults: Dict[str, Any]) -> Box:
    if args.box_lower is not None or args.box_upper is not None:
        _require(args, "box_lower", "box_upper")
        return Box(lower=vector(args.box_lower), upper=vector(args.box_upper))
    if system_name is not None:
        return default_box(system_name, defaults)
    return Box(lower=-np.ones(2 * d), upper=np.ones(2 * d))


# -- commands ------------------------------------------------------------

def cmd_generate(args: argparse.Namespace, defaults: Dict[str, Any]) -> int:
    _require(args, "system")
    system = get_system(args.system)
    integ = _integrator(args, defaults)
    if args.task == "solve":
        dataset = sample_pairs(system, _box(args, args.system, system.d, defaults), args.n, args.h,
                               args.seed, integ)
    else:
        _require(args, "start")
        dataset = sample_trajectory(system, vector(args.start), args.n, args.h, integ)
    save_dataset(dataset, Path(args.out))
    print(f"Wrote {len(dataset)} pairs to {args.out}")
    for key, value in dataset.meta.items():
        print(f"  {key}: {json.dumps(value)}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, defaults: Dict[str, Any]) -> int:
    _require(args, "model", "data")
    dataset = load_dataset(Path(args.data))
    test = load_dataset(Path(args.test)) if args.test else None
    h = args.h if args.h is not None else dataset.meta.get("h")
    if h is None:
        raise UsageError("train: dataset has no 'h' in its meta block; pass --h")
    task = dataset.meta.get("task", "solve")

    t = defaults["train"]
    if args.epochs is not None:
        epochs = args.epochs
    else:
        epochs = t["full_epochs"] if args.paper_scale else t["epochs"]
    lr = args.lr if args.lr is not None else t["lr"].get(task, t["lr"]["solve"])

    model = build_model(
        args.model, dataset.d, float(h), defaults, seed=args.seed,
        k=args.k, sublayers=args.sublayers, activation=args.activation,
        trainable_gates=args.trainable_gates or None, shear_start=args.shear_start,
        hidden=int_list(args.hidden) if args.hidden is not None else None,
    )
    cfg = TrainConfig(epochs=epochs, lr=lr, seed=args.seed, w_penalty=args.w_penalty,
                      log_every=args.log_every or t["log_every"],
                      track_symplectic=args.track_symplectic,
                      beta1=t["beta1"], beta2=t["beta2"], eps=t["eps"])
    result = train(model, dataset, cfg, test=test)

    out = Path(args.out)
    save_model(result.model, out)
    loss_dir = Path(args.loss_dir) if args.loss_dir else out.parent
    history_paths(result.history, loss_dir, out.stem)

    print(f"Parameters: {result.summary['parameters']}")
    print(f"Train MSE: {result.summary['train_mse']:.6e}")
    if "test_mse" in result.summary:
        print(f"Test MSE: {result.summary['test_mse']:.6e}")
    return EXIT_OK


def _rollout_starts(args: argparse.Namespace) -> List[np.ndarray]:
    starts = [vector(s) for s in (args.start or [])]
    if args.from_data:
        starts.append(load_dataset(Path(args.from_data)).final_point)
    if not starts:
        raise UsageError("rollout: pass --start or --from-data")
    return starts


def _rollout_paths(out: Path, count: int) -> List[Path]:
    if count == 1:
        return [out]
    return [out.with_name(f"{out.stem}_{i}{out.suffix}") for i in range(count)]


def cmd_rollout(args: argparse.Namespace, defaults: Dict[str, Any]) -> int:
    _require(args, "model")
    model = load_model(Path(args.model))
    needs_system = args.with_reference or args.with_energy
    system = None
    if needs_system:
        _require(args, "system")
        system = get_system(args.system)
        if system.d != model.d:
            raise InvalidArgumentError(f"Model has d={model.d} but {system.name} has d={system.d}")
    h = args.h if args.h is not None else getattr(model, "h", None)
    if args.with_reference and h is None:
        raise UsageError("rollout: --with-reference needs --h for models without a step size")

    starts = _rollout_starts(args)
    for start in starts:
        if start.shape != (2 * model.d,):
            raise InvalidArgumentError(f"Start {start.tolist()} does not match model dimension {2 * model.d}")

    integ = _integrator(args, defaults)
    for start, path in zip(starts, _rollout_paths(Path(args.out), len(starts))):
        frame = rollout_frame(model, start, args.steps, model.d, system, h, integ,
                              with_reference=args.with_reference, with_energy=args.with_energy)
        write_frame(frame, path)
        print(f"Wrote {len(frame)} states to {path}")
    return EXIT_OK


def gradient_fixture(kind: str, seed: int = 0):
    """
    Small model and batch for the gradient oracle, with parameters large
    enough that every gradient entry is well above the comparison floor.
    """
    rng = np.random.default_rng(seed)
    if kind == "sympnet":
        model = SympNet(d=1, h=0.5, k=2, n=3, seed=seed, trainable_gates=True)
    else:
        model = Fnn(d=1, hidden=(5, 5), seed=seed)
    for value in model.params.values():
        value[...] = rng.uniform(-0.5, 0.5, size=value.shape)
    x = rng.uniform(-1.0, 1.0, size=(8, 2))
    y = rng.uniform(-1.0, 1.0, size=(8, 2))
    return model, x, y


def cmd_verify(args: argparse.Namespace, defaults: Dict[str, Any]) -> int:
    v = defaults["verification"]
    out_dir = Path(args.out_dir)
    model = load_model(Path(args.model)) if args.model else None

    if args.check == "symplectic":
        _require(args, "model")
        box = _box(args, args.system, model.d, defaults)
        rng = np.random.default_rng(args.seed)
        points = rng.uniform(box.lower, box.upper, size=(args.points, box.dim))
        report = symplectic_residual(model, points, eps=args.eps or v["eps"])
        write_symplectic_report(report, out_dir, "symplectic")
        print(f"Symplectic residual: max {report.max_residual:.3e}, mean {report.mean_residual:.3e}")
        threshold = args.threshold if args.threshold is not None else v["symplectic_threshold"]
        assert_below("max symplectic residual", report.max_residual, threshold)

    elif args.check == "gradients":
        if model is not None:
            rng = np.random.default_rng(args.seed)
            x = rng.uniform(-1.0, 1.0, size=(8, 2 * model.d))
            y = rng.uniform(-1.0, 1.0, size=(8, 2 * model.d))
        else:
            _require(args, "model_kind")
            model, x, y = gradient_fixture(args.model_kind, args.seed)
        error = gradient_check(model, x, y)
        write_json({"kind": model.kind, "max_relative_error": error}, out_dir / "gradients.json")
        print(f"Gradient check ({model.kind}): max relative error {error:.3e}")
        threshold = args.threshold if args.threshold is not None else v["gradient_threshold"]
        assert_below("gradient relative error", error, threshold)

    else:
        _require(args, "model", "system", "start")
        system = get_system(args.system)
        frame = rollout_frame(model, vector(args.start), args.steps, model.d)
        drift, worst = energy_drift(system, frame[coordinate_names(model.d)].to_numpy())
        write_json({"system": system.name, "steps": args.steps, "max_energy_drift": worst,
                    "final_energy_drift": float(drift[-1])}, out_dir / "energy.json")
        print(f"Energy drift over {args.steps} steps: max {worst:.3e}")
        if args.threshold is not None:
            assert_below("max energy drift", worst, args.threshold)
    return EXIT_OK


def cmd_exp(args: argparse.Namespace, defaults: Dict[str, Any]) -> int:
    presets = load_catalog()
    preset = presets[args.preset]
    t = defaults["train"]
    if args.epochs is not None:
        epochs = args.epochs
    else:
        epochs = t["full_epochs"] if args.paper_scale else t["epochs"]
    out_dir = Path(args.out) if args.out else Path("runs") / preset.id
    manifest = run_experiment(preset, out_dir, epochs, defaults, log_every=args.log_every)

    for kind, m in manifest["metrics"].items():
        parts = [f"{key}={value:.3e}" for key, value in m.items() if isinstance(value, float)]
        print(f"{kind}: {', '.join(parts)}")
    print(f"Manifest: {out_dir / 'manifest.json'}")
    return EXIT_FAILURE if manifest_failed(manifest) else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "rollout": cmd_rollout,
    "verify": cmd_verify,
    "exp": cmd_exp,
}


# -- parser --------------------------------------------------------------

def _add_integrator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", choices=["implicit-midpoint", "gauss4"], help="Reference integrator")
    parser.add_argument("--substeps", type=positive_int, help="Reference substeps per step")


def _add_box_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--box-lower", help="Comma-separated lower corner of the sampling box")
    parser.add_argument("--box-upper", help="Comma-separated upper corner of the sampling box")


def build_parser(config: Optional[Dict[str, Any]] = None) -> argparse.ArgumentParser:
    """
    Build the argument parser. `config` values become defaults of every
    subcommand that has a flag of the same name.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying any flag by its long name")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--verbose", action="store_true", help="Debug logging")
    noise.add_argument("--quiet", action="store_true", help="Warnings and errors only")

    parser = argparse.ArgumentParser(prog="sympflow", description="Learn Hamiltonian phase flows with SympNets")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    gen = sub.add_parser("generate", parents=[common], help="Generate a training or test dataset")
    gen.add_argument("--system", choices=sorted(SYSTEMS))
    gen.add_argument("--task", choices=["solve", "predict"], default="solve")
    gen.add_argument("--n", type=positive_int, default=10000, help="Number of pairs")
    gen.add_argument("--h", type=float, default=0.1, help="Time step")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--start", help="Trajectory start for --task predict, e.g. 1,0,0,1")
    gen.add_argument("--out", default="dataset.csv")
    _add_box_flags(gen)
    _add_integrator_flags(gen)

    tr = sub.add_parser("train", parents=[common], help="Train a SympNet or FNN")
    tr.add_argument("--model", choices=["sympnet", "fnn"])
    tr.add_argument("--data", help="Training dataset CSV")
    tr.add_argument("--test", help="Optional test dataset CSV")
    tr.add_argument("--out", default="model.json")
    tr.add_argument("--loss-dir", help="Directory for the loss history (default: next to --out)")
    tr.add_argument("--k", type=non_negative_int, help="SympNet gate units")
    tr.add_argument("--sublayers", type=positive_int, help="Shears per SympNet linear unit")
    tr.add_argument("--activation", choices=["sigmoid", "tanh"])
    tr.add_argument("--trainable-gates", action="store_true")
    tr.add_argument("--shear-start", choices=["up", "low"])
    tr.add_argument("--hidden", help="FNN hidden widths, e.g. 50,50")
    tr.add_argument("--lr", type=float)
    tr.add_argument("--epochs", type=positive_int)
    tr.add_argument("--paper-scale", "--full-scale", dest="paper_scale", action="store_true",
                    help="Use the full 1e6-epoch schedule")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--h", type=float, help="Step size (default: from the dataset meta)")
    tr.add_argument("--w-penalty", type=float, default=0.0, help="FNN symplectic penalty weight")
    tr.add_argument("--log-every", type=positive_int)
    tr.add_argument("--track-symplectic", action="store_true", help="Record MSE_s in the loss history")

    ro = sub.add_parser("rollout", parents=[common], help="Roll a trained model out")
    ro.add_argument("--model", help="Model JSON")
    ro.add_argument("--start", action="append", help="Start point, repeatable")
    ro.add_argument("--from-data", help="Dataset whose final observed point starts the rollout")
    ro.add_argument("--steps", type=non_negative_int, default=1000)
    ro.add_argument("--system", choices=sorted(SYSTEMS))
    ro.add_argument("--h", type=float, help="Reference step (default: the SympNet's h)")
    ro.add_argument("--with-reference", action="store_true")
    ro.add_argument("--with-energy", action="store_true")
    ro.add_argument("--out", default="rollout.csv")
    _add_integrator_flags(ro)

    ve = sub.add_parser("verify", parents=[common], help="Run a verification check")
    ve.add_argument("--check", choices=CHECKS, default="symplectic")
    ve.add_argument("--model", help="Model JSON")
    ve.add_argument("--model-kind", choices=["sympnet", "fnn"], help="Built-in fixture for --check gradients")
    ve.add_argument("--points", type=positive_int, default=100)
    ve.add_argument("--threshold", type=float)
    ve.add_argument("--eps", type=float)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--system", choices=sorted(SYSTEMS))
    ve.add_argument("--start", help="Rollout start for --check energy")
    ve.add_argument("--steps", type=non_negative_int, default=1000)
    ve.add_argument("--out-dir", default="reports")
    _add_box_flags(ve)

    ex = sub.add_parser("exp", parents=[common], help="Run an experiment preset end to end")
    ex.add_argument("preset", choices=list(load_catalog()))
    ex.add_argument("--epochs", type=positive_int)
    ex.add_argument("--paper-scale", "--full-scale", dest="paper_scale", action="store_true",
                    help="Use the full 1e6-epoch schedule")
    ex.add_argument("--log-every", type=positive_int)
    ex.add_argument("--out", help="Output directory (default: runs/<preset>)")

    if config:
        for subparser in (gen, tr, ro, ve, ex):
            dests = {action.dest for action in subparser._actions}
            subparser.set_defaults(**{k: v for k, v in config.items() if k in dests})
    return parser


def _config_values(argv: Sequence[str]) -> Dict[str, Any]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise UsageError(f"{known.config}: config must be a JSON object")
    return {key.lstrip("-").replace("-", "_"): value for key, value in raw.items()}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse flags, with --config values as defaults under explicit flags."""
    argv = list(sys.argv[1:] if argv is None else argv)
    return build_parser(_config_values(argv)).parse_args(argv)


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except (OSError, json.JSONDecodeError, UsageError) as e:
        print(f"sympflow: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    configure_logging(args)

    try:
        return COMMANDS[args.command](args, load_defaults())
    except ThresholdViolation as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_THRESHOLD
    except InvalidArgumentError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except (PhaseError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
