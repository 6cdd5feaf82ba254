"""End-to-end workflow: corpus -> images -> diffusion -> decode -> VQE -> report.

Every stage reads its inputs from and writes its outputs to files under a
work directory, so any stage can be rerun alone (the CLI subcommands call
the same functions). All randomness comes from the master seed through the
named streams ``corpus``, ``train``, ``sample``, ``vqe-init`` and ``baseline``.
"""

import csv
import logging
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .circuit import dump_circuits, load_circuits
from .codec import (decode_image, encode_circuit, normalize_to_28, read_images,
                    unnormalize, write_images)
from .diffusion import (TrainConfig, init_params, load_checkpoint, make_schedule,
                        sample, save_checkpoint, train)
from .diffusion.train import write_losses
from .errors import (DiffAnsatzError, EmptyDecode, EmptyPopulation, ParseError,
                     QubitMismatch, StageError, ValidationError)
from .simulator import GROUND_MAX_QUBITS, ground_energy, read_ham
from .ucc import DatasetSpec, generate_corpus
from .vqe import VqeConfig, random_baseline, run_vqe, write_trace

log = logging.getLogger(__name__)

REPORT_HEADER = ("id", "source", "gate_count", "param_count", "best_energy", "iterations")
BUNDLED_HAMILTONIANS = ("toy_zz.ham", "h2_like.ham")


def bundled_hamiltonian(name):
    """Path of a Hamiltonian shipped with the package."""
    if name not in BUNDLED_HAMILTONIANS:
        raise ValidationError(f"no bundled Hamiltonian {name!r}; have {BUNDLED_HAMILTONIANS}")
    return Path(str(resources.files("diffansatz") / "data" / name))


def load_hamiltonian(path):
    """Read a ``.ham`` file; bare bundled names resolve to the package copy."""
    path = Path(path)
    if not path.exists() and path.name == str(path) and path.name in BUNDLED_HAMILTONIANS:
        path = bundled_hamiltonian(path.name)
    return read_ham(path)


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class ReportRow:
    id: str
    source: str
    gate_count: int
    param_count: int
    best_energy: float
    iterations: int


@dataclass
class ComparisonReport:
    rows: list
    summary: dict = field(default_factory=dict)


def _median(values):
    return float(statistics.median(values)) if values else float("nan")


def compare_populations(cand, base, exact=None, extra=None):
    """Merge candidate and baseline rows and summarise each population."""
    if not cand or not base:
        raise EmptyPopulation("both populations need at least one row")
    rows = sorted(list(cand) + list(base), key=lambda r: (r.source, r.id))
    summary = {}
    for source, pop in (("diffusion", cand), ("random", base)):
        energies = [r.best_energy for r in pop]
        summary[f"n_{source}"] = len(pop)
        summary[f"min_{source}"] = min(energies)
        summary[f"median_{source}"] = _median(energies)
    if exact is not None:
        summary["exact"] = float(exact)
        summary["gap_diffusion"] = summary["min_diffusion"] - exact
        summary["gap_random"] = summary["min_random"] - exact
    summary.update(extra or {})
    return ComparisonReport(rows, summary)


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_rows(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        _write_rows(rows, f)


def _write_rows(rows, f):
    w = csv.writer(f, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow([r.id, r.source, r.gate_count, r.param_count, _fmt(float(r.best_energy)),
                    r.iterations])


def emit_report(report, path):
    """CSV rows followed by the summary as ``# key=value`` comment lines."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        _write_rows(report.rows, f)
        for key, value in report.summary.items():
            f.write(f"# {key}={_fmt(value)}\n")


def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_report(path):
    """Inverse of ``emit_report`` (also reads plain row files)."""
    rows, summary = [], {}
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or tuple(lines[0].split(",")) != REPORT_HEADER:
        raise ParseError(f"{path}: missing report header")
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            summary[key] = _parse_value(value)
            continue
        parts = line.split(",")
        if len(parts) != len(REPORT_HEADER):
            raise ParseError(f"expected {len(REPORT_HEADER)} fields", lineno)
        try:
            rows.append(ReportRow(parts[0], parts[1], int(parts[2]), int(parts[3]),
                                  float(parts[4]), int(parts[5])))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return ComparisonReport(rows, summary)


# ---------------------------------------------------------------- stages

def stage_generate(n_qubits, count, seed, corpus_path, images_path):
    """Sample the UCC corpus and write circuits plus their normalized images."""
    corpus = generate_corpus(DatasetSpec(n_qubits, count, seed))
    dump_circuits(corpus, corpus_path)
    imgs = np.stack([unnormalize(normalize_to_28(encode_circuit(c))) for c in corpus])
    write_images(images_path, imgs, sidecar={"n_qubits": n_qubits, "seed": seed})
    return corpus


def stage_train(images_path, config_id, schedule, train_config, ckpt_path, loss_path=None):
    images = read_images(images_path).astype(float) / 127.5 - 1.0
    params = init_params(config_id, rngmod.stream(train_config.seed, "train", "init"))
    params, opt_state, losses = train(params, images, schedule, train_config)
    save_checkpoint(params, opt_state, ckpt_path)
    if loss_path is not None:
        write_losses(losses, loss_path)
    return params, losses


def stage_sample(ckpt_path, schedule, count, seed, out_path):
    params, _ = load_checkpoint(ckpt_path)
    x = sample(params, schedule, count, seed)
    imgs = unnormalize(x)
    write_images(out_path, imgs)
    return imgs


def stage_decode(images_path, n_qubits, out_path):
    """Decode every image; undecodable ones become ``null`` entries."""
    images = read_images(images_path)
    circuits = []
    for img in images:
        try:
            circuits.append(decode_image(img.astype(float) / 127.5 - 1.0, n_qubits))
        except EmptyDecode:
            circuits.append(None)
    dump_circuits(circuits, out_path)
    return circuits


def _vqe_job(args):
    circuit, h, config, seed, path = args
    result = run_vqe(circuit, h, config, rngmod.stream(*seed))
    if path is not None:
        write_trace(result, path)
    return result


def evaluate_circuits(circuits, h, config, seed, source, trace_dir=None, workers=1):
    """VQE on each non-null circuit; row ids are ``<source>-<index>``.

    Circuit ``i`` draws its initial parameters from stream
    ``(seed, "vqe-init", source, i)``. With ``workers > 1`` runs fan out to
    processes; results are collected in input order.
    """
    jobs, ids = [], []
    for i, c in enumerate(circuits):
        if c is None:
            continue
        if c.n_qubits != h.n_qubits:
            raise QubitMismatch(f"circuit {i} has {c.n_qubits} qubits, Hamiltonian {h.n_qubits}")
        rid = f"{source}-{i:04d}"
        path = None if trace_dir is None else os.path.join(trace_dir, f"{rid}.csv")
        jobs.append((c, h, config, (seed, "vqe-init", source, i), path))
        ids.append((rid, c))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_vqe_job, jobs))
    else:
        results = [_vqe_job(j) for j in jobs]
    return [ReportRow(rid, source, len(c.gates), c.n_params, float(r.best_energy), r.iterations_run)
            for (rid, c), r in zip(ids, results)]


def make_baselines(candidates, n_qubits, seed, out_path):
    """One random circuit per candidate slot, twice the candidate's gate count."""
    out = []
    for i, c in enumerate(candidates):
        if c is None:
            out.append(None)
            continue
        out.append(random_baseline(n_qubits, 2 * len(c.gates), rngmod.stream(seed, "baseline", i)))
    dump_circuits(out, out_path)
    return out


def exact_energy(h):
    return ground_energy(h) if h.n_qubits <= GROUND_MAX_QUBITS else None


# ---------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class PipelineConfig:
    n_qubits: int = 2
    corpus_count: int = 10000
    denoiser: str = "unet-small"
    timesteps: int = 1000
    train_steps: int = 10000
    batch_size: int = 64
    learning_rate: float = 1e-3
    sample_count: int = 16
    vqe_iters: int = 100
    vqe_lr: float = 0.1
    vqe_restarts: int = 1
    seed: int = 0
    hamiltonian: str = "toy_zz.ham"
    workdir: str = "run"
    workers: int = 1

    def __post_init__(self):
        for name in ("n_qubits", "corpus_count", "timesteps", "train_steps", "batch_size",
                     "sample_count", "vqe_iters", "vqe_restarts", "workers"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.learning_rate <= 0 or self.vqe_lr <= 0:
            raise ValidationError("learning rates must be positive")

    def path(self, name):
        return os.path.join(self.workdir, name)


ARTIFACTS = {
    "corpus": "corpus.json",
    "dataset": "dataset.qcim",
    "checkpoint": "model.qdnm",
    "losses": "losses.csv",
    "samples": "samples.qcim",
    "candidates": "candidates.json",
    "baselines": "baselines.json",
    "report": "report.csv",
}


def _stage(name, fn, *args):
    log.info("stage %s", name)
    try:
        return fn(*args)
    except DiffAnsatzError as exc:
        raise StageError(name, exc) from exc
    except OSError as exc:
        raise StageError(name, exc) from exc


def run_pipeline(config, resume=False):
    """Run all stages and return the ``ComparisonReport``.

    With ``resume`` a stage whose artifact already exists is not rerun;
    its file is read back instead.
    """
    h = load_hamiltonian(config.hamiltonian)
    if h.n_qubits != config.n_qubits:
        raise QubitMismatch(f"Hamiltonian acts on {h.n_qubits} qubits, config says {config.n_qubits}")
    os.makedirs(config.path("traces"), exist_ok=True)
    p = {k: config.path(v) for k, v in ARTIFACTS.items()}

    def have(*keys):
        return resume and all(os.path.exists(p[k]) for k in keys)

    schedule = make_schedule(config.timesteps)
    if not have("corpus", "dataset"):
        _stage("generate", stage_generate, config.n_qubits, config.corpus_count, config.seed,
               p["corpus"], p["dataset"])
    if not have("checkpoint"):
        tc = TrainConfig(steps=config.train_steps, batch_size=config.batch_size,
                         learning_rate=config.learning_rate, seed=config.seed, T=config.timesteps)
        _stage("train", stage_train, p["dataset"], config.denoiser, schedule, tc,
               p["checkpoint"], p["losses"])
    if not have("samples"):
        _stage("sample", stage_sample, p["checkpoint"], schedule, config.sample_count,
               config.seed, p["samples"])
    if have("candidates"):
        candidates = load_circuits(p["candidates"])
    else:
        candidates = _stage("decode", stage_decode, p["samples"], config.n_qubits, p["candidates"])
    if have("baselines"):
        baselines = load_circuits(p["baselines"])
    else:
        baselines = _stage("baseline", make_baselines, candidates, config.n_qubits, config.seed,
                           p["baselines"])

    vqe_config = VqeConfig(max_iters=config.vqe_iters, learning_rate=config.vqe_lr,
                           restarts=config.vqe_restarts)
    cand_rows = _stage("vqe", evaluate_circuits, candidates, h, vqe_config, config.seed,
                       "diffusion", config.path("traces"), config.workers)
    base_rows = _stage("vqe", evaluate_circuits, baselines, h, vqe_config, config.seed,
                       "random", config.path("traces"), config.workers)

    decoded = [c for c in candidates if c is not None]
    extra = {
        "decode_valid_rate": sum(c.n_params > 0 for c in decoded) / len(candidates),
        "empty_decodes": len(candidates) - len(decoded),
        "no_parameter_candidates": sum(c.n_params == 0 for c in decoded),
    }
    report = _stage("report", compare_populations, cand_rows, base_rows, exact_energy(h), extra)
    emit_report(report, p["report"])
    return report
