"""Command-line surface: gen-data, train, eval, latents, gradcheck."""

import argparse
import sys
from pathlib import Path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcsim", description="Point-cloud-conditioned mesh simulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic beam dataset")
    gen.add_argument("--config", required=True, help="dataset config JSON")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--ood", action="store_true", help="hold out Poisson-ratio tails as the ood split")

    tr = sub.add_parser("train", help="train a model variant")
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--model", choices=["peach", "oracle", "nocontext"], required=True)
    tr.add_argument("--seed", type=int, required=True)
    tr.add_argument("--no-aux-param", action="store_true")
    tr.add_argument("--no-aux-sdf", action="store_true")
    tr.add_argument("--no-augment", action="store_true")
    tr.add_argument("--steps", type=int, default=2000)
    tr.add_argument("--batch", type=int, default=1)
    tr.add_argument("--lr", type=float, default=5.0e-5)
    tr.add_argument("--val-every", type=int, default=100)

    ev = sub.add_parser("eval", help="evaluate a checkpoint")
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--split", choices=["test", "ood"], default="test")
    ev.add_argument("--context", type=int, default=8, choices=range(1, 9), metavar="1..8")
    ev.add_argument("--report", required=True)
    ev.add_argument("--metric", choices=["mse", "p2m"], default="mse")

    la = sub.add_parser("latents", help="export aggregated latents with PCA coordinates")
    la.add_argument("--ckpt", required=True)
    la.add_argument("--data", required=True)
    la.add_argument("--out", required=True)

    gc = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--component", default="all")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, KeyError, FileNotFoundError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "gen-data":
        from .data import DatasetConfig, build_dataset

        config = DatasetConfig.from_json(args.config)
        manifest = build_dataset(config, args.out, seed=args.seed, ood=args.ood)
        counts = {k: len(v) for k, v in manifest.splits.items()}
        print(f"dataset written to {args.out}: {counts}")
        return 0

    if args.command == "train":
        from .training import ModelConfig, TrainConfig, train

        cfg = TrainConfig(
            steps=args.steps,
            batch_size=args.batch,
            learning_rate=args.lr,
            seed=args.seed,
            model=ModelConfig(variant=args.model),
            aux_param=not args.no_aux_param,
            aux_sdf=not args.no_aux_sdf,
            augment_enabled=not args.no_augment,
            val_every=args.val_every,
        )
        result = train(cfg, args.data, args.out)
        print(f"trained {args.model}: best val {result.best_val:.6e} -> {result.best_checkpoint}")
        return 0

    if args.command == "eval":
        from .evaluation import evaluate_model
        from .training import load_dataset, load_model

        model, _ = load_model(args.ckpt)
        ds = load_dataset(args.data, splits=("train", args.split))
        report = evaluate_model(model, ds, args.split, args.context, metric=args.metric)
        report.save(args.report)
        print(f"{report.variant} {args.split} {args.metric} C={args.context}: {report.mean:.6e} +/- {report.std:.6e}")
        return 0

    if args.command == "latents":
        from .evaluation import export_latents
        from .training import load_dataset, load_model

        model, _ = load_model(args.ckpt)
        ds = load_dataset(args.data, splits=("train", "test"))
        export_latents(model, ds, args.out)
        print(f"latent table written to {args.out}")
        return 0

    if args.command == "gradcheck":
        from .training import COMPONENTS, grad_check

        components = COMPONENTS if args.component == "all" else (args.component,)
        ok = True
        for comp in components:
            rep = grad_check(comp, seed=args.seed)
            status = "pass" if rep.passed else "FAIL"
            print(f"{comp}: max rel err {rep.max_rel_err:.3e} [{status}]")
            ok &= rep.passed
        return 0 if ok else 1

    raise ValueError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
