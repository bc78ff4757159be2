"""Command-line entry point.

Subcommands: verify, sample, threshold, train-mlp, eval, replay.  Every
run writes a JSON manifest with the full configuration and SHA-256
hashes of its outputs; `replay` re-executes a manifest and confirms the
outputs reproduce byte-identically.

Exit codes: 0 success, 1 verification/replay failure, 2 no result in
window, 3+ usage or I/O errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import multiprocessing
import os
import sys

import numpy as np

from semionsim import __version__, experiments, mlp as mlp_module, noise
from semionsim.dataset_io import (
    NOISE_KINDS,
    DatasetHeader,
    export_csv,
    read_dataset,
    syndrome_to_image,
    write_dataset,
)
from semionsim.decoders import decode_and_label
from semionsim.experiments import (
    NoCrossingInWindow,
    curriculum_records,
    derive_seed,
    estimate_rate,
    labeled_records,
    make_model,
    paired_mlp_eval,
    threshold_scan,
    write_rate_csv,
)
from semionsim.lattice import build_lattice
from semionsim.verify import run_checks


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(3)


class UsageError(Exception):
    pass


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(command: str, config: dict, outputs: list[str]) -> str:
    main_out = outputs[0]
    manifest = {
        "version": __version__,
        "command": command,
        "config": config,
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    path = f"{main_out}.manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def default_workers() -> int:
    return int(os.environ.get("SEMION_WORKERS", "1"))


def _parse_grid(spec: str) -> list[float]:
    """Grid syntax: lo:hi:count or a comma-separated list."""
    if ":" in spec:
        lo, hi, count = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi),
                                              int(count))]
    return [float(v) for v in spec.split(",")]


def _resolve_p(args) -> float:
    if (args.p_eff is None) == (args.p0 is None):
        raise UsageError("give exactly one of --p-eff / --p0")
    if args.p0 is not None:
        if args.noise != "independent":
            raise UsageError("--p0 only applies to independent noise")
        p_eff = 2 * args.p0 - args.p0 ** 2
        print(f"converted p0={args.p0} to p_eff={p_eff:.6f}")
        return p_eff
    return args.p_eff


# -- subcommands ----------------------------------------------------------------


def cmd_verify(args) -> int:
    try:
        results = run_checks(args.only)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, detail in results:
        mark = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {mark}  {detail}")
        failed += not ok
    return 1 if failed else 0


def _sample_chunk(job) -> bytes:
    (d, kind, p_eff, decoder, code, seed, start, stop) = job
    lat = experiments._get_lattice(d)
    model = make_model(kind, p_eff)
    sampler = noise.get_sampler(lat)
    blob = bytearray()
    for i in range(start, stop):
        synd, label = decode_and_label(lat, model, seed, i, decoder, code,
                                       sampler)
        grid = syndrome_to_image(d, synd.vertex_bits, synd.plaquette_bits)
        blob += grid.tobytes()
        blob.append(label.label)
    return bytes(blob)


def cmd_sample(args) -> int:
    p_eff = _resolve_p(args)
    config = dict(d=args.d, noise=args.noise, p_eff=p_eff, n=args.n,
                  seed=args.seed, decoder=args.decoder, code=args.code,
                  out=str(args.out))
    if args.csv:
        config["csv"] = str(args.csv)
    jobs = [(args.d, args.noise, p_eff, args.decoder, args.code, args.seed,
             s, min(s + experiments.CHUNK, args.n))
            for s in range(0, args.n, experiments.CHUNK)]
    header = DatasetHeader(args.d, NOISE_KINDS[args.noise], p_eff, args.n)
    from semionsim.dataset_io import pack_header
    with open(args.out, "wb") as fh:
        fh.write(pack_header(header))
        if args.workers > 1 and len(jobs) > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(args.workers) as pool:
                for blob in pool.imap(_sample_chunk, jobs, chunksize=1):
                    fh.write(blob)
        else:
            for job in jobs:
                fh.write(_sample_chunk(job))
    outputs = [str(args.out)]
    hdr, records = read_dataset(args.out)
    hist = np.bincount(records[:, -1], minlength=16) if len(records) else \
        np.zeros(16, dtype=int)
    print(f"wrote {hdr.count} records to {args.out}")
    print("label histogram:", hist.tolist())
    if args.csv:
        n_cells = 4 * args.d * args.d
        export_csv(((rec[:n_cells], int(rec[-1])) for rec in records),
                   args.csv)
        outputs.append(str(args.csv))
    manifest = write_manifest("sample", config, outputs)
    print(f"manifest: {manifest}")
    return 0


def cmd_threshold(args) -> int:
    grid = _parse_grid(args.grid)
    distances = [int(v) for v in args.distances.split(",")]
    if len(distances) < 2:
        raise UsageError("need at least two distances")
    config = dict(noise=args.noise, decoder=args.decoder, code=args.code,
                  distances=distances, grid=grid, n=args.n, seed=args.seed,
                  out=str(args.out))

    def progress(point):
        print(f"  d={point.d} p_eff={point.p_eff:.4f} "
              f"p_bar={point.p_bar:.5f} "
              f"[{point.wilson_low:.5f}, {point.wilson_high:.5f}] "
              f"fallback={point.fallback_fraction:.4%}")

    try:
        est = threshold_scan(args.noise, args.decoder, distances, grid,
                             n=args.n, seed=args.seed, code=args.code,
                             workers=args.workers, progress=progress)
    except NoCrossingInWindow as exc:
        print(f"no crossing: {exc}")
        return 2
    write_rate_csv(est.points, args.out)
    manifest = write_manifest("threshold", config, [str(args.out)])
    for pair, value in est.crossings.items():
        print(f"crossing d{pair}: p_eff = {value:.5f}")
    print(f"threshold({args.code}, {args.decoder}, {args.noise}) = "
          f"{est.value:.5f} +- {est.spread:.5f}")
    print(f"manifest: {manifest}")
    return 0


def cmd_train_mlp(args) -> int:
    p_eff = _resolve_p(args)
    config = dict(d=args.d, noise=args.noise, p_eff=p_eff, n=args.n,
                  hidden=args.hidden, nodes=args.nodes, batch=args.batch,
                  warmup_frac=args.warmup_frac, step_size=args.step_size,
                  lr_schedule=args.lr_schedule, seed=args.seed,
                  out=str(args.out))
    lat = build_lattice(args.d)
    model = make_model(args.noise, p_eff)
    cfg = mlp_module.MLPConfig(
        input_dim=3 * args.d * args.d, hidden_layers=args.hidden,
        nodes=args.nodes, batch_size=args.batch, step_size=args.step_size,
        lr_schedule=args.lr_schedule, seed=args.seed)
    stream = curriculum_records(lat, model, args.seed, args.n,
                                warmup_fraction=args.warmup_frac)

    def progress(step, loss):
        print(f"  step {step}: loss {loss:.4f}", flush=True)

    state = mlp_module.train(cfg, stream, log_every=args.log_every,
                             progress=progress,
                             total_steps=args.n // args.batch)
    print(f"trained {state.step} steps, "
          f"{state.parameter_count()} parameters")
    mlp_module.save_checkpoint(state, args.out)
    manifest = write_manifest("train-mlp", config, [str(args.out)])
    print(f"checkpoint: {args.out}\nmanifest: {manifest}")
    return 0


def cmd_eval(args) -> int:
    p_eff = _resolve_p(args)
    config = dict(checkpoint=str(args.checkpoint), d=args.d,
                  noise=args.noise, p_eff=p_eff, n=args.n, seed=args.seed,
                  out=str(args.out))
    if not os.path.exists(args.checkpoint):
        print(f"error: checkpoint {args.checkpoint} not found",
              file=sys.stderr)
        return 4
    state = mlp_module.load_checkpoint(args.checkpoint)
    lat = build_lattice(args.d)
    if state.config.input_dim != 3 * args.d * args.d:
        print("error: checkpoint input width does not match distance",
              file=sys.stderr)
        return 4
    model = make_model(args.noise, p_eff)
    res = paired_mlp_eval(lat, model, state, args.n, args.seed)
    print(f"n={res['n']}  p_eff={p_eff:.4f}")
    print(f"MLP : accuracy {res['mlp_accuracy']:.4f}  "
          f"p_bar {res['mlp_p_bar']:.5f} "
          f"[{res['mlp_interval'][0]:.5f}, {res['mlp_interval'][1]:.5f}]")
    print(f"MWPM: accuracy {res['mwpm_accuracy']:.4f}  "
          f"p_bar {res['mwpm_p_bar']:.5f} "
          f"[{res['mwpm_interval'][0]:.5f}, {res['mwpm_interval'][1]:.5f}]")
    print(f"simple decoder p_bar {res['simple_p_bar']:.5f}")
    with open(args.out, "w") as fh:
        fh.write("metric,value\n")
        for key in ("n", "mlp_accuracy", "mlp_p_bar", "mwpm_accuracy",
                    "mwpm_p_bar", "simple_p_bar"):
            fh.write(f"{key},{res[key]}\n")
    manifest = write_manifest("eval", config, [str(args.out)])
    print(f"manifest: {manifest}")
    return 0


def cmd_replay(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    command = manifest["command"]
    config = manifest["config"]
    argv = [command]
    for key, value in config.items():
        if value is None:
            continue
        if key in ("distances", "grid"):
            argv += [f"--{key}", ",".join(str(v) for v in value)]
        elif key == "noise":
            argv += ["--noise", value]
        elif key == "p_eff":
            argv += ["--p-eff", str(value)]
        elif key in ("warmup_frac", "step_size", "lr_schedule"):
            argv += [f"--{key.replace('_', '-')}", str(value)]
        else:
            argv += [f"--{key}", str(value)]
    argv += ["--workers", str(args.workers)]
    code = main(argv)
    if code != 0:
        return code
    ok = True
    for path, digest in manifest["outputs"].items():
        now = _sha256(path)
        match = "identical" if now == digest else "DIFFERS"
        ok = ok and now == digest
        print(f"{path}: {match}")
    return 0 if ok else 1


def build_parser() -> Parser:
    parser = Parser(prog="semionsim",
                    description="semion code simulator and decoder workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the exact verification suite")
    p.add_argument("--only", default=None, help="run a single named check")
    p.set_defaults(fn=cmd_verify)

    def common(p, with_decoder=True):
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--noise", choices=("independent", "depolarizing"),
                       default="independent")
        p.add_argument("--p-eff", dest="p_eff", type=float, default=None)
        p.add_argument("--p0", type=float, default=None)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=default_workers())
        if with_decoder:
            p.add_argument("--decoder", choices=("simple", "mwpm"),
                           default="simple")
            p.add_argument("--code", choices=("semion", "ktc"),
                           default="semion")

    p = sub.add_parser("sample", help="write a labeled SEMD dataset")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("threshold", help="threshold scan over a p_eff grid")
    p.add_argument("--noise", choices=("independent", "depolarizing"),
                   default="independent")
    p.add_argument("--decoder", choices=("simple", "mwpm"), default="mwpm")
    p.add_argument("--code", choices=("semion", "ktc"), default="semion")
    p.add_argument("--distances", required=True,
                   help="comma-separated code distances")
    p.add_argument("--grid", required=True,
                   help="p_eff grid: lo:hi:count or comma list")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("train-mlp", help="train the MLP classifier")
    common(p, with_decoder=False)
    p.add_argument("--hidden", type=int, default=6)
    p.add_argument("--nodes", type=int, default=900)
    p.add_argument("--batch", type=int, default=10_000)
    p.add_argument("--warmup-frac", dest="warmup_frac", type=float,
                   default=0.1)
    p.add_argument("--step-size", dest="step_size", type=float, default=1e-3)
    p.add_argument("--lr-schedule", dest="lr_schedule",
                   choices=("constant", "cosine"), default="constant")
    p.add_argument("--log-every", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_mlp)

    p = sub.add_parser("eval", help="paired MLP-vs-MWPM evaluation")
    common(p, with_decoder=False)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("replay", help="re-run a manifest and verify outputs")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int, default=default_workers())
    p.set_defaults(fn=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
