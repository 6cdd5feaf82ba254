"""Command-line entry point.

Exit codes: 0 on success, 1 on invalid input, 2 on runtime failure.
"""

import argparse
import logging
import sys

import torch

from . import pipeline as pl
from . import rng as rngmod
from .circuit import dump_circuits, load_circuits
from .diffusion import TrainConfig, make_schedule
from .errors import DiffAnsatzError, StageError, ValidationError
from .vqe import VqeConfig, random_baseline

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def cmd_gen_dataset(a):
    circuits_path = a.circuits or a.out + ".circuits.json"
    pl.stage_generate(a.qubits, a.count, a.seed, circuits_path, a.out)


def cmd_train(a):
    cfg = TrainConfig(steps=a.steps, batch_size=a.batch, learning_rate=a.lr, seed=a.seed,
                      T=a.timesteps, log_every=a.log_every)
    _, losses = pl.stage_train(a.dataset, a.denoiser, make_schedule(a.timesteps), cfg, a.out,
                               a.losses)
    print(f"final loss {losses[-1]:.6f}")


def cmd_sample(a):
    pl.stage_sample(a.ckpt, make_schedule(a.timesteps), a.count, a.seed, a.out)


def cmd_decode(a):
    circuits = pl.stage_decode(a.images, a.qubits, a.out)
    ok = sum(c is not None for c in circuits)
    print(f"decoded {ok}/{len(circuits)}")


def cmd_vqe(a):
    h = pl.load_hamiltonian(a.ham)
    config = VqeConfig(max_iters=a.iters, learning_rate=a.lr, restarts=a.restarts)
    rows = pl.evaluate_circuits(load_circuits(a.circuits), h, config, a.seed, a.source,
                                a.traces, a.workers)
    pl.write_rows(rows, a.out)


def cmd_baseline(a):
    if a.like:
        pl.make_baselines(load_circuits(a.like), a.qubits, a.seed, a.out)
        return
    if a.gates is None:
        raise ValidationError("baseline needs --gates or --like")
    circuits = [random_baseline(a.qubits, a.gates, rngmod.stream(a.seed, "baseline", i))
                for i in range(a.count)]
    dump_circuits(circuits, a.out)


def cmd_compare(a):
    cand = pl.parse_report(a.candidates).rows
    base = pl.parse_report(a.baselines).rows
    exact = pl.exact_energy(pl.load_hamiltonian(a.ham)) if a.ham else None
    report = pl.compare_populations(cand, base, exact)
    pl.emit_report(report, a.out)
    for key, value in report.summary.items():
        print(f"{key}={value}")


def cmd_exact(a):
    print(f"{pl.exact_energy(pl.load_hamiltonian(a.ham)):.17g}")


def cmd_pipeline(a):
    config = pl.PipelineConfig(
        n_qubits=a.qubits, corpus_count=a.corpus_count, denoiser=a.denoiser,
        timesteps=a.timesteps, train_steps=a.steps, batch_size=a.batch, learning_rate=a.lr,
        sample_count=a.samples, vqe_iters=a.iters, vqe_lr=a.vqe_lr, vqe_restarts=a.vqe_restarts,
        seed=a.seed,
        hamiltonian=a.ham, workdir=a.workdir, workers=a.workers)
    report = pl.run_pipeline(config, resume=a.resume)
    for key, value in report.summary.items():
        print(f"{key}={value}")


def build_parser():
    p = argparse.ArgumentParser(prog="diffansatz", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--threads", type=int, default=1, help="torch intra-op threads")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-dataset", help="sample a UCC corpus and write its images")
    s.add_argument("--qubits", type=int, required=True)
    s.add_argument("--count", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="image container path")
    s.add_argument("--circuits", help="circuit JSON path (default: <out>.circuits.json)")
    s.set_defaults(func=cmd_gen_dataset)

    s = sub.add_parser("train", help="train a denoiser on an image container")
    s.add_argument("--dataset", required=True)
    s.add_argument("--denoiser", default="mlp-small")
    s.add_argument("--timesteps", type=int, default=1000)
    s.add_argument("--steps", type=int, default=2000)
    s.add_argument("--batch", type=int, default=64)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="checkpoint path")
    s.add_argument("--losses", help="loss trace CSV path")
    s.add_argument("--log-every", type=int, default=0)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="draw images from a checkpoint")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--count", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timesteps", type=int, default=1000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("decode", help="decode images into circuits")
    s.add_argument("--images", required=True)
    s.add_argument("--qubits", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("vqe", help="run VQE on every circuit of a JSON file")
    s.add_argument("--circuits", required=True)
    s.add_argument("--ham", required=True)
    s.add_argument("--iters", type=int, default=100)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--restarts", type=int, default=1, help="initialisations per circuit")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--source", default="diffusion", choices=("diffusion", "random"))
    s.add_argument("--traces", help="directory for per-circuit energy traces")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_vqe)

    s = sub.add_parser("baseline", help="random circuits")
    s.add_argument("--qubits", type=int, required=True)
    s.add_argument("--gates", type=int)
    s.add_argument("--count", type=int, default=16)
    s.add_argument("--like", help="pair with these circuits at twice their gate count")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("compare", help="merge two VQE result files into a report")
    s.add_argument("--candidates", required=True)
    s.add_argument("--baselines", required=True)
    s.add_argument("--ham")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("exact", help="print the exact ground energy")
    s.add_argument("--ham", required=True)
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("pipeline", help="run every stage end to end")
    s.add_argument("--qubits", type=int, default=2)
    s.add_argument("--corpus-count", type=int, default=10000)
    s.add_argument("--denoiser", default="unet-small")
    s.add_argument("--timesteps", type=int, default=1000)
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--batch", type=int, default=64)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--samples", type=int, default=16)
    s.add_argument("--iters", type=int, default=100)
    s.add_argument("--vqe-lr", type=float, default=0.1)
    s.add_argument("--vqe-restarts", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ham", default="toy_zz.ham")
    s.add_argument("--workdir", default="run")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--resume", action="store_true", help="skip stages whose artifacts exist")
    s.set_defaults(func=cmd_pipeline)
    return p


def exit_code(exc):
    if isinstance(exc, StageError):
        exc = exc.cause
    return EXIT_INVALID if isinstance(exc, ValueError) else EXIT_RUNTIME


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    torch.set_num_threads(args.threads)
    try:
        args.func(args)
    except (DiffAnsatzError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
