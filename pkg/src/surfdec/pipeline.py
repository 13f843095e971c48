"""End-to-end decoding and the three experiment harnesses.

Every trial draws its error from ``derive_seed(master, d_index, p_index,
trial)``, so results do not depend on how trials are spread over worker
processes. Workers return per-chunk results that are merged in chunk order.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cnn.infer import decode_pass
from .cnn.net import ConvNet
from .config import Directive, parse_float_list, parse_int_list, read_directives, iter_directives
from .errors import ConfigError, ContractViolationError
from .hdrg import hdrg_decode
from .lattice import Board, build_square_board, logical_representatives
from .noise import compose, derive_seed, sample_depolarizing, symplectic_product
from .syndrome import extract_syndrome


class DecoderMode(enum.Enum):
    HDRG_ONLY = "hdrg"
    ANN_PLUS_HDRG = "ann+hdrg"

    @classmethod
    def _missing_(cls, value):
        aliases = {"hdrgonly": cls.HDRG_ONLY, "annplushdrg": cls.ANN_PLUS_HDRG}
        return aliases.get(str(value).lower().replace("_", ""))


@dataclass(frozen=True)
class SweepConfig:
    distances: tuple[int, ...] = (9, 13, 17, 25)
    error_rates: tuple[float, ...] = (0.08, 0.09, 0.10, 0.11, 0.12, 0.13, 0.14)
    trials_per_point: int = 2000
    n_ann_passes: int = 5
    master_seed: int = 0
    decoder_mode: DecoderMode = DecoderMode.HDRG_ONLY
    chunk_size: int = 250

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.n_ann_passes < 0:
            raise ValueError("n_ann_passes must be >= 0")
        if not self.distances or any(d < 2 for d in self.distances):
            raise ValueError("distances must be a non-empty list of integers >= 2")
        if not self.error_rates or any(not 0.0 <= p <= 1.0 for p in self.error_rates):
            raise ValueError("error rates must lie in [0, 1]")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")

    @property
    def passes(self) -> int:
        return self.n_ann_passes if self.decoder_mode is DecoderMode.ANN_PLUS_HDRG else 0


def sweep_config_from_directives(directives: Sequence[Directive], source: str = "<string>") -> SweepConfig:
    kw: dict[str, object] = {}
    for d in directives:
        if d.key == "distances":
            kw["distances"] = tuple(parse_int_list(d))
        elif d.key == "error_rates":
            kw["error_rates"] = tuple(parse_float_list(d))
        elif d.key in ("trials_per_point", "n_ann_passes", "master_seed", "chunk_size"):
            d.arity(1)
            kw[d.key] = d.convert(0, int, "integer")
        elif d.key == "decoder_mode":
            d.arity(1)
            kw[d.key] = d.convert(0, DecoderMode, "decoder mode")
        else:
            raise d.error(f"unknown sweep option '{d.key}'")
    try:
        return SweepConfig(**kw)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None


def parse_sweep_config(text: str, source: str = "<string>") -> SweepConfig:
    return sweep_config_from_directives(list(iter_directives(text, source)), source)


def load_sweep_config(path: str | Path) -> SweepConfig:
    return sweep_config_from_directives(read_directives(path), str(path))


# -- single trial ------------------------------------------------------------------------

@dataclass
class StageTimings:
    ann_ns: int = 0
    hdrg_ns: int = 0
    total_ns: int = 0


@dataclass
class TrialResult:
    d: int
    p: float
    seed: int | None
    passes_used: int
    residual_fraction: float
    logical_failure: bool | None
    timings: StageTimings = field(default_factory=StageTimings)
    flips_per_pass: tuple[int, ...] = ()


def logical_failure(board: Board, frame: np.ndarray, correction: np.ndarray) -> bool:
    """True if frame * correction is a nontrivial logical operator."""
    residual = compose(frame, correction)
    if not extract_syndrome(board, residual).is_empty():
        raise ContractViolationError("correction does not reproduce the syndrome of the error")
    lx, lz = logical_representatives(board)
    return bool(symplectic_product(residual, lx) or symplectic_product(residual, lz))


def full_decode(board: Board, frame: np.ndarray, net: ConvNet | None = None, n_passes: int = 0,
                p: float = float("nan"), seed: int | None = None,
                check_logical: bool = True) -> tuple[np.ndarray, TrialResult]:
    """ANN passes (if a net is given and n_passes > 0) followed by the HDRG mop-up.

    Timings cover the decode stages only, not syndrome extraction of the input.
    """
    syn = extract_syndrome(board, frame)
    original = syn.count()
    counts = []
    t0 = time.perf_counter_ns()
    total = np.zeros(board.shape, np.uint8)
    residual = syn
    used = 0
    if net is not None:
        for _ in range(n_passes):
            if residual.is_empty():
                break
            total = compose(total, decode_pass(net, board, residual))
            residual = syn ^ extract_syndrome(board, total)
            used += 1
            counts.append(residual.count())
    t1 = time.perf_counter_ns()
    after_ann = residual.count()
    total = compose(total, hdrg_decode(board, residual))
    t2 = time.perf_counter_ns()
    failure = logical_failure(board, frame, total) if check_logical else None
    result = TrialResult(
        d=board.distance, p=p, seed=seed, passes_used=used,
        residual_fraction=after_ann / max(1, original), logical_failure=failure,
        timings=StageTimings(t1 - t0, t2 - t1, t2 - t0), flips_per_pass=tuple(counts))
    return total, result


# -- parallel plumbing -------------------------------------------------------------------

_WORKER_NET: ConvNet | None = None
_WARMUP = 2**32 - 1  # trial index reserved for warm-up decodes


def _init_worker(net):
    global _WORKER_NET
    _WORKER_NET = net


@lru_cache(maxsize=16)
def _square(d: int) -> Board:
    return build_square_board(d)


def default_workers() -> int:
    raw = os.environ.get("SURFDEC_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SURFDEC_WORKERS must be an integer, got {raw!r}", "environment") from None
    return max(1, n)


def _chunks(cfg: SweepConfig):
    for di, d in enumerate(cfg.distances):
        for pi, p in enumerate(cfg.error_rates):
            for start in range(0, cfg.trials_per_point, cfg.chunk_size):
                yield di, pi, start, min(cfg.trials_per_point, start + cfg.chunk_size)


def _threshold_chunk(args):
    cfg, di, pi, start, stop = args
    d, p = cfg.distances[di], cfg.error_rates[pi]
    board = _square(d)
    failures = 0
    for t in range(start, stop):
        seed = derive_seed(cfg.master_seed, di, pi, t)
        frame = sample_depolarizing(board, p, seed)
        _, res = full_decode(board, frame, _WORKER_NET, cfg.passes, p, seed)
        failures += int(res.logical_failure)
    return failures


def _sparsity_chunk(args):
    cfg, di, pi, start, stop = args
    d, p = cfg.distances[di], cfg.error_rates[pi]
    board = _square(d)
    net = _WORKER_NET
    out = np.zeros((stop - start, max(cfg.n_ann_passes, 1)), np.float64)
    for row, t in enumerate(range(start, stop)):
        seed = derive_seed(cfg.master_seed, di, pi, t)
        frame = sample_depolarizing(board, p, seed)
        syn = extract_syndrome(board, frame)
        original = max(1, syn.count())
        total = np.zeros(board.shape, np.uint8)
        residual = syn
        for k in range(cfg.n_ann_passes):
            if not residual.is_empty():
                total = compose(total, decode_pass(net, board, residual))
                residual = syn ^ extract_syndrome(board, total)
            out[row, k] = residual.count() / original
    return out


def _run(fn, cfg: SweepConfig, net: ConvNet | None, workers: int | None):
    tasks = [(cfg, *c) for c in _chunks(cfg)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1:
        _init_worker(net)
        try:
            return tasks, [fn(t) for t in tasks]
        finally:
            _init_worker(None)
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(net,)) as pool:
        return tasks, list(pool.map(fn, tasks))


# -- harnesses ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdRow:
    d: int
    p: float
    trials: int
    failures: int

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        """Two-standard-deviation normal-approximation binomial interval, clipped to [0, 1]."""
        r = self.rate
        half = 2.0 * math.sqrt(r * (1.0 - r) / self.trials)
        return max(0.0, r - half), min(1.0, r + half)


def estimate_logical_error_rate(cfg: SweepConfig, net: ConvNet | None = None,
                                workers: int | None = None) -> list[ThresholdRow]:
    if cfg.decoder_mode is DecoderMode.ANN_PLUS_HDRG and net is None:
        raise ValueError("ann+hdrg mode needs a network")
    tasks, results = _run(_threshold_chunk, cfg, net if cfg.passes else None, workers)
    failures: dict[tuple[int, int], int] = {}
    for (_, di, pi, _, _), f in zip(tasks, results):
        failures[di, pi] = failures.get((di, pi), 0) + f
    return [ThresholdRow(d, p, cfg.trials_per_point, failures[di, pi])
            for di, d in enumerate(cfg.distances) for pi, p in enumerate(cfg.error_rates)]


@dataclass(frozen=True)
class SparsityRow:
    d: int
    p: float
    passes: int
    mean_residual: float
    std: float


def sparsity_curve(cfg: SweepConfig, net: ConvNet, workers: int | None = None) -> list[SparsityRow]:
    """Mean and standard deviation of the residual fraction after 1..n_ann_passes passes."""
    if cfg.n_ann_passes < 1:
        raise ValueError("sparsity curves need n_ann_passes >= 1")
    tasks, results = _run(_sparsity_chunk, cfg, net, workers)
    per_point: dict[tuple[int, int], list[np.ndarray]] = {}
    for (_, di, pi, _, _), arr in zip(tasks, results):
        per_point.setdefault((di, pi), []).append(arr)
    rows = []
    for di, d in enumerate(cfg.distances):
        for pi, p in enumerate(cfg.error_rates):
            data = np.concatenate(per_point[di, pi])
            for k in range(cfg.n_ann_passes):
                rows.append(SparsityRow(d, p, k + 1, float(data[:, k].mean()), float(data[:, k].std())))
    return rows


@dataclass(frozen=True)
class BenchRow:
    d: int
    p: float
    mode: str
    stage: str
    mean_ns: float
    std_ns: float


def bench_decode(cfg: SweepConfig, net: ConvNet | None = None, repeats: int | None = None,
                 modes: Iterable[DecoderMode] | None = None) -> list[BenchRow]:
    """Wall-clock time of each decode stage, per (d, p, mode); one warm-up decode is discarded.

    Runs in-process so timings are not disturbed by other workers.
    """
    repeats = cfg.trials_per_point if repeats is None else repeats
    if modes is None:
        modes = [cfg.decoder_mode]
    rows = []
    for di, d in enumerate(cfg.distances):
        board = _square(d)
        for pi, p in enumerate(cfg.error_rates):
            for mode in modes:
                use_net = net if mode is DecoderMode.ANN_PLUS_HDRG else None
                if mode is DecoderMode.ANN_PLUS_HDRG and net is None:
                    raise ValueError("ann+hdrg mode needs a network")
                passes = cfg.n_ann_passes if use_net is not None else 0
                warm = sample_depolarizing(board, p, derive_seed(cfg.master_seed, di, pi, _WARMUP))
                full_decode(board, warm, use_net, passes, check_logical=False)
                times = np.zeros((repeats, 3), np.float64)
                for t in range(repeats):
                    frame = sample_depolarizing(board, p, derive_seed(cfg.master_seed, di, pi, t))
                    _, res = full_decode(board, frame, use_net, passes, p, check_logical=False)
                    times[t] = res.timings.ann_ns, res.timings.hdrg_ns, res.timings.total_ns
                stages = ("ann", "hdrg", "total") if use_net is not None else ("hdrg", "total")
                for stage in stages:
                    col = times[:, ("ann", "hdrg", "total").index(stage)]
                    rows.append(BenchRow(d, p, mode.value, stage, float(col.mean()), float(col.std())))
    return rows


def ann_pass_times(net: ConvNet, board: Board, p: float, repeats: int, seed: int = 0) -> np.ndarray:
    """Wall time (ns) of single ANN passes on fresh syndromes at error rate p."""
    syn = extract_syndrome(board, sample_depolarizing(board, p, derive_seed(seed, _WARMUP)))
    decode_pass(net, board, syn)
    out = np.empty(repeats, np.int64)
    for t in range(repeats):
        syn = extract_syndrome(board, sample_depolarizing(board, p, derive_seed(seed, t)))
        t0 = time.perf_counter_ns()
        decode_pass(net, board, syn)
        out[t] = time.perf_counter_ns() - t0
    return out


# -- crossing estimate -------------------------------------------------------------------

def pairwise_crossing(ps: Sequence[float], low_d: Sequence[float], high_d: Sequence[float]) -> float | None:
    """First p where the larger-distance curve rises above the smaller one (linear interpolation).

    Below threshold the larger code fails less often; returns None when the
    curves do not cross inside the sampled range.
    """
    diff = np.asarray(low_d, float) - np.asarray(high_d, float)
    for i in range(len(ps) - 1):
        if diff[i] > 0 >= diff[i + 1]:
            return float(ps[i] + (ps[i + 1] - ps[i]) * diff[i] / (diff[i] - diff[i + 1]))
    return None


def crossing_points(rows: Sequence[ThresholdRow]) -> dict[tuple[int, int], float | None]:
    """Crossing of every pair of consecutive distances."""
    ds = sorted({r.d for r in rows})
    ps = sorted({r.p for r in rows})
    rate = {(r.d, r.p): r.rate for r in rows}
    out = {}
    for a, b in zip(ds, ds[1:]):
        out[a, b] = pairwise_crossing(ps, [rate[a, p] for p in ps], [rate[b, p] for p in ps])
    return out


def estimate_threshold(rows: Sequence[ThresholdRow]) -> float | None:
    """Mean of the consecutive-distance crossings; None if any pair fails to cross."""
    points = list(crossing_points(rows).values())
    if not points or any(x is None for x in points):
        return None
    return float(np.mean(points))


# -- CSV ---------------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


THRESHOLD_HEADER = ("d", "p", "trials", "failures", "rate", "ci_low", "ci_high")
SPARSITY_HEADER = ("d", "p", "passes", "mean_residual", "std")
BENCH_HEADER = ("d", "p", "mode", "stage", "mean_ns", "std_ns")


def threshold_csv(rows: Sequence[ThresholdRow]) -> str:
    return _csv(THRESHOLD_HEADER, ((r.d, r.p, r.trials, r.failures, r.rate, *r.ci) for r in rows))


def sparsity_csv(rows: Sequence[SparsityRow]) -> str:
    return _csv(SPARSITY_HEADER, ((r.d, r.p, r.passes, r.mean_residual, r.std) for r in rows))


def bench_csv(rows: Sequence[BenchRow]) -> str:
    return _csv(BENCH_HEADER, ((r.d, r.p, r.mode, r.stage, r.mean_ns, r.std_ns) for r in rows))
