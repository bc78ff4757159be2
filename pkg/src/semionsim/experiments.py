"""Monte-Carlo orchestration: rate curves, thresholds, suppression fits.

Every estimate is reproducible bit-exactly from its metadata: the
per-sample random streams are keyed by (master seed, sample index), and
parallel runs split the index range into fixed-size chunks whose
partial counts are integers, so results are independent of the worker
count and scheduling.
"""

from __future__ import annotations

import csv
import multiprocessing
from dataclasses import dataclass, field, asdict

import numpy as np

from semionsim import noise
from semionsim.dataset_io import syndrome_bits, syndrome_to_image
from semionsim.decoders import decode_and_label
from semionsim.lattice import CodeLattice, build_lattice
from semionsim.mlp import wilson_interval
from semionsim.noise import NoiseModel
from semionsim.rng import make_state

CHUNK = 10_000


class NoCrossingInWindow(Exception):
    pass


class NonPositiveRates(Exception):
    pass


def derive_seed(master_seed: int, *parts: int) -> int:
    """Stable sub-seed for a grid point, independent of run order."""
    z = int(make_state(master_seed, 0)[0])
    for part in parts:
        z = int(make_state(z, part + 1)[1])
    return z


def make_model(kind: str, p_eff: float) -> NoiseModel:
    if kind == "independent":
        return NoiseModel.independent(p_eff=p_eff)
    if kind == "depolarizing":
        return NoiseModel.depolarizing(p_eff)
    raise ValueError(f"unknown noise kind {kind!r}")


@dataclass
class RatePoint:
    d: int
    noise_kind: str
    p_eff: float
    decoder: str
    code: str
    n_samples: int
    failures: int
    p_bar: float
    wilson_low: float
    wilson_high: float
    fallback_fraction: float
    wrapped_fraction: float
    master_seed: int

    @classmethod
    def from_counts(cls, d, noise_kind, p_eff, decoder, code, n, failures,
                    fallback, wrapped, master_seed):
        lo, hi = wilson_interval(failures, n)
        return cls(d, noise_kind, p_eff, decoder, code, n, failures,
                   failures / n if n else 0.0, lo, hi,
                   fallback / n if n else 0.0, wrapped / n if n else 0.0,
                   master_seed)


@dataclass
class ThresholdEstimate:
    decoder: str
    noise_kind: str
    code: str
    crossings: dict[str, float]
    value: float
    spread: float
    points: list[RatePoint] = field(default_factory=list)


# -- worker machinery ---------------------------------------------------------

_WORKER_LATTICES: dict[int, CodeLattice] = {}


def _get_lattice(d: int) -> CodeLattice:
    lat = _WORKER_LATTICES.get(d)
    if lat is None:
        lat = build_lattice(d)
        _WORKER_LATTICES[d] = lat
    return lat


def _count_chunk(args) -> tuple[int, int, int]:
    (d, kind, p_eff, decoder, code, seed, start, stop) = args
    lat = _get_lattice(d)
    model = make_model(kind, p_eff)
    sampler = noise.get_sampler(lat)
    failures = fallback = wrapped = 0
    for i in range(start, stop):
        synd, label = decode_and_label(lat, model, seed, i, decoder, code,
                                       sampler)
        failures += label.label != 0
        fallback += synd.used_fallback
        wrapped += synd.wrapped_component
    return failures, fallback, wrapped


def _map_chunks(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(workers) as pool:
        return pool.map(fn, jobs, chunksize=1)


def estimate_rate(
    d: int,
    model: NoiseModel,
    decoder: str,
    p_eff: float | None = None,
    n: int = 100_000,
    seed: int = 0,
    code: str = "semion",
    workers: int = 1,
) -> RatePoint:
    """Logical error rate of one decoder at one operating point."""
    p = model.p_eff if p_eff is None else p_eff
    jobs = [(d, model.kind, p, decoder, code, seed, s, min(s + CHUNK, n))
            for s in range(0, n, CHUNK)]
    parts = _map_chunks(_count_chunk, jobs, workers)
    failures = sum(p[0] for p in parts)
    fallback = sum(p[1] for p in parts)
    wrapped = sum(p[2] for p in parts)
    return RatePoint.from_counts(d, model.kind, p, decoder, code, n,
                                 failures, fallback, wrapped, seed)


def _quadratic(ps, rates):
    return np.polyfit(np.asarray(ps, dtype=float),
                      np.asarray(rates, dtype=float), 2)


def _crossing(coef_a, coef_b, window):
    diff = np.polysub(coef_a, coef_b)
    roots = np.roots(diff)
    real = [float(r.real) for r in roots
            if abs(r.imag) < 1e-9 and window[0] <= r.real <= window[1]]
    if not real:
        return None
    # with several candidates keep the one nearest the window center
    mid = 0.5 * (window[0] + window[1])
    return min(real, key=lambda r: abs(r - mid))


def threshold_scan(
    noise_kind: str,
    decoder: str,
    distances: list[int],
    p_grid: list[float],
    n: int = 100_000,
    seed: int = 0,
    code: str = "semion",
    workers: int = 1,
    progress=None,
) -> ThresholdEstimate:
    """Threshold from pairwise crossings of quadratic-fit rate curves."""
    if len(distances) < 2:
        raise ValueError("need at least two distances")
    if len(p_grid) < 5:
        raise ValueError("need at least five grid points")
    points: list[RatePoint] = []
    rates: dict[int, list[float]] = {}
    for di, d in enumerate(distances):
        rates[d] = []
        for pi, p in enumerate(p_grid):
            model = make_model(noise_kind, p)
            point = estimate_rate(
                d, model, decoder, n=n,
                seed=derive_seed(seed, di, pi), code=code, workers=workers)
            points.append(point)
            rates[d].append(point.p_bar)
            if progress:
                progress(point)
    window = (min(p_grid), max(p_grid))
    fits = {d: _quadratic(p_grid, rates[d]) for d in distances}
    crossings = {}
    for a, b in zip(distances, distances[1:]):
        root = _crossing(fits[a], fits[b], window)
        if root is not None:
            crossings[f"{a}-{b}"] = root
    if not crossings:
        raise NoCrossingInWindow(
            f"no curve crossings inside {window} for {decoder}/{noise_kind}")
    values = list(crossings.values())
    value = float(np.mean(values))
    spread = float((max(values) - min(values)) / 2)
    return ThresholdEstimate(decoder, noise_kind, code, crossings, value,
                             spread, points)


def suppression_fit(points: list[RatePoint]) -> tuple[float, float, float]:
    """Fit p_bar = A * exp(-alpha * d); returns (A, alpha, R^2)."""
    if len(points) < 3:
        raise ValueError("need at least three distances")
    ds = np.array([p.d for p in points], dtype=float)
    rates = np.array([p.p_bar for p in points], dtype=float)
    if (rates <= 0).any():
        raise NonPositiveRates("zero logical error rate in suppression fit")
    logs = np.log(rates)
    slope, intercept = np.polyfit(ds, logs, 1)
    pred = slope * ds + intercept
    ss_res = float(((logs - pred) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(np.exp(intercept)), float(-slope), r2


# -- record streams for training and evaluation --------------------------------

def labeled_records(lat: CodeLattice, model: NoiseModel, seed: int, n: int,
                    decoder: str = "simple", code: str = "semion",
                    start_index: int = 0, as_image: bool = False,
                    sampler=None):
    """Stream of (flat stabilizer bits | image grid, class label)."""
    if sampler is None:
        sampler = noise.get_sampler(lat)
    for i in range(start_index, start_index + n):
        synd, label = decode_and_label(lat, model, seed, i, decoder, code,
                                       sampler)
        if as_image:
            yield syndrome_to_image(
                lat.d, synd.vertex_bits, synd.plaquette_bits), label.label
        else:
            yield syndrome_bits(
                lat, synd.vertex_bits, synd.plaquette_bits), label.label


def curriculum_records(lat: CodeLattice, model: NoiseModel, seed: int,
                       n: int, warmup_fraction: float = 0.1):
    """Warm-up at half the target rate, then the target rate."""
    n_warm = int(n * warmup_fraction)
    warm_model = make_model(model.kind, model.p_eff / 2)
    yield from labeled_records(lat, warm_model, derive_seed(seed, 0),
                               n_warm)
    yield from labeled_records(lat, model, derive_seed(seed, 1), n - n_warm)


def paired_mlp_eval(lat: CodeLattice, model: NoiseModel, state, n: int,
                    seed: int) -> dict:
    """Paired comparison of the classifier against MWPM on shared samples.

    Each sample is drawn once and decoded both ways; the MWPM
    "accuracy" is the fraction of samples it corrects outright.
    """
    from semionsim import mlp as mlp_module
    from semionsim.decoders import logical_class, mwpm_decode, simple_decode
    from semionsim.noise import sample_error, sample_rng, sample_syndrome

    mlp_wrong = 0
    mwpm_fail = 0
    simple_fail = 0
    sampler = noise.get_sampler(lat)
    for start in range(0, n, CHUNK):
        stop = min(start + CHUNK, n)
        xs = []
        ys = []
        for i in range(start, stop):
            rng = sample_rng(seed, i)
            frame = sample_error(model, lat, rng)
            synd = sample_syndrome(lat, frame, rng, sampler, seed, i)
            simple_label = logical_class(
                lat, frame, synd.residual_zq, simple_decode(lat, synd)).label
            mwpm_label = logical_class(
                lat, frame, synd.residual_zq, mwpm_decode(lat, synd)).label
            xs.append(syndrome_bits(lat, synd.vertex_bits,
                                    synd.plaquette_bits))
            ys.append(simple_label)
            simple_fail += simple_label != 0
            mwpm_fail += mwpm_label != 0
        pred = mlp_module.predict(state, np.asarray(xs, dtype=np.float64))
        mlp_wrong += int((pred != np.asarray(ys)).sum())
    return {
        "n": n,
        "mlp_accuracy": 1 - mlp_wrong / n,
        "mlp_p_bar": mlp_wrong / n,
        "mlp_interval": wilson_interval(mlp_wrong, n),
        "mwpm_accuracy": 1 - mwpm_fail / n,
        "mwpm_p_bar": mwpm_fail / n,
        "mwpm_interval": wilson_interval(mwpm_fail, n),
        "simple_p_bar": simple_fail / n,
    }


def capacity_scan(d: int, model: NoiseModel, budget: int,
                  grid: list[tuple[int, int]], seed: int = 0,
                  eval_n: int = 20_000, batch_size: int = 1000) -> list[dict]:
    """Train one classifier per (layers, nodes) cell at a fixed budget."""
    from semionsim import mlp as mlp_module
    lat = build_lattice(d)
    rows = []
    for ci, (hidden, nodes) in enumerate(grid):
        cfg = mlp_module.MLPConfig(
            input_dim=3 * d * d, hidden_layers=hidden, nodes=nodes,
            batch_size=batch_size, seed=derive_seed(seed, ci))
        state = mlp_module.train(
            cfg, labeled_records(lat, model, derive_seed(seed, ci, 1),
                                 budget))
        acc, p_bar, _, _ = mlp_module.evaluate(
            state, labeled_records(lat, model, derive_seed(seed, ci, 2),
                                   eval_n))
        rows.append({"hidden_layers": hidden, "nodes": nodes,
                     "parameters": state.parameter_count(),
                     "accuracy": acc, "p_bar": p_bar})
    return rows


# -- result files ---------------------------------------------------------------

RATE_COLUMNS = ["d", "noise_kind", "p_eff", "decoder", "code", "n_samples",
                "failures", "p_bar", "wilson_low", "wilson_high",
                "fallback_fraction", "wrapped_fraction", "master_seed"]


def write_rate_csv(points: list[RatePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RATE_COLUMNS)
        writer.writeheader()
        for point in points:
            writer.writerow(asdict(point))


def read_rate_csv(path) -> list[RatePoint]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RatePoint(
                d=int(row["d"]), noise_kind=row["noise_kind"],
                p_eff=float(row["p_eff"]), decoder=row["decoder"],
                code=row["code"], n_samples=int(row["n_samples"]),
                failures=int(row["failures"]), p_bar=float(row["p_bar"]),
                wilson_low=float(row["wilson_low"]),
                wilson_high=float(row["wilson_high"]),
                fallback_fraction=float(row["fallback_fraction"]),
                wrapped_fraction=float(row["wrapped_fraction"]),
                master_seed=int(row["master_seed"])))
    return out
