"""Staged training of the convolutional decoder."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from ..config import Directive, iter_directives, read_directives
from ..errors import ConfigError, TrainingDivergenceError
from ..lattice import Board, build_square_board, carve_defects, random_double_zcut
from ..noise import compose, derive_seed, sample_depolarizing, x_bits, z_bits
from ..syndrome import assemble_input, extract_syndrome
from ..targets import canonicalize_target
from .grad import Loss, batch_forward, loss_and_grads
from .infer import probabilities_to_frame
from .net import ConvNet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Stage:
    """``steps`` minibatches with error rates drawn uniformly from [p_low, p_high].

    With ``feedback`` set, each sampled error is first decoded by the current
    net and the example becomes (residual syndrome, canonical residual error).
    """

    p_low: float
    p_high: float
    steps: int
    loss: Loss = Loss.BCE
    feedback: bool = False

    def validate(self) -> None:
        if not (0.0 <= self.p_low <= self.p_high <= 1.0):
            raise ValueError(f"stage error-rate range [{self.p_low}, {self.p_high}] must lie within [0, 1]")
        if self.steps < 0:
            raise ValueError("stage step count must be non-negative")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-3
    loss: Loss = Loss.BCE
    stages: tuple[Stage, ...] = (Stage(0.01, 0.03, 1000),)
    seed: int = 0
    distance: int = 17
    defect_distance: int = 0
    optimizer: str = "sgd"
    feedback_passes: int = 1
    checkpoint_every: int = 0
    checkpoint_path: str | None = None
    log_every: int = 100

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValueError("learning_rate must be a positive finite number")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.distance < 2:
            raise ValueError("training distance must be >= 2")
        if self.defect_distance < 0 or self.feedback_passes < 1:
            raise ValueError("defect_distance must be >= 0 and feedback_passes >= 1")
        for stage in self.stages:
            stage.validate()

    @property
    def steps(self) -> int:
        return sum(s.steps for s in self.stages)

    @property
    def samples(self) -> int:
        return self.steps * self.batch_size

    @property
    def error_rate_schedule(self) -> list[tuple[int, tuple[float, float]]]:
        return [(i + 1, (s.p_low, s.p_high)) for i, s in enumerate(self.stages)]

    @classmethod
    def full_scale(cls) -> "TrainConfig":
        """Roughly 50 million distance-33 boards with double Z-cut defects of distance 8."""
        batch = 100
        per_stage = 50_000_000 // (3 * batch)
        return cls(batch_size=batch, learning_rate=1e-3, distance=33, defect_distance=8, optimizer="adam",
                   stages=(Stage(0.01, 0.03, per_stage, Loss.BCE),
                           Stage(0.09, 0.10, per_stage, Loss.BCE),
                           Stage(0.01, 0.10, per_stage, Loss.MSE, feedback=True)))

    @classmethod
    def desk_scale(cls) -> "TrainConfig":
        return cls(batch_size=32, learning_rate=2e-3, distance=17, optimizer="adam", seed=2024,
                   stages=(Stage(0.01, 0.03, 2500, Loss.BCE),
                           Stage(0.03, 0.10, 2500, Loss.BCE),
                           Stage(0.02, 0.08, 2500, Loss.MSE, feedback=True)))


_STAGE_USAGE = "stage P_LOW P_HIGH STEPS [bce|mse] [feedback]"


def _parse_stage(d: Directive) -> Stage:
    if not 3 <= len(d.args) <= 5:
        raise d.error(f"expected '{_STAGE_USAGE}'")
    lo, hi = d.convert(0, float, "error rate"), d.convert(1, float, "error rate")
    steps = d.convert(2, int, "step count")
    loss, feedback = Loss.BCE, False
    for extra in d.args[3:]:
        if extra.lower() in ("bce", "mse"):
            loss = Loss(extra.lower())
        elif extra.lower() == "feedback":
            feedback = True
        else:
            raise d.error(f"unknown stage option {extra!r}; expected '{_STAGE_USAGE}'")
    stage = Stage(lo, hi, steps, loss, feedback)
    try:
        stage.validate()
    except ValueError as exc:
        raise d.error(str(exc)) from None
    return stage


_SCALARS: dict[str, Callable[[str], object]] = {
    "batch_size": int, "learning_rate": float, "seed": int, "distance": int, "defect_distance": int,
    "optimizer": str, "feedback_passes": int, "checkpoint_every": int, "checkpoint_path": str,
    "log_every": int, "loss": lambda s: Loss(s.lower()),
}


def train_config_from_directives(directives: Sequence[Directive], source: str = "<string>") -> TrainConfig:
    kw: dict[str, object] = {}
    stages: list[Stage] = []
    for d in directives:
        if d.key == "stage":
            stages.append(_parse_stage(d))
        elif d.key in _SCALARS:
            d.arity(1)
            kw[d.key] = d.convert(0, _SCALARS[d.key], d.key)
        else:
            raise d.error(f"unknown training option '{d.key}'")
    if stages:
        kw["stages"] = tuple(stages)
    try:
        return TrainConfig(**kw)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None


def parse_train_config(text: str, source: str = "<string>") -> TrainConfig:
    return train_config_from_directives(list(iter_directives(text, source)), source)


def load_train_config(path: str | Path) -> TrainConfig:
    return train_config_from_directives(read_directives(path), str(path))


# -- examples ----------------------------------------------------------------------------

def target_planes(board: Board, frame: np.ndarray) -> np.ndarray:
    """(2, H, W) float32 X/Z indicator planes of the canonical form of ``frame``."""
    canon = canonicalize_target(board, frame)
    return np.stack([x_bits(canon), z_bits(canon)]).astype(np.float32)


def make_example(board: Board, frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return assemble_input(board, extract_syndrome(board, frame)), target_planes(board, frame)


def _training_board(cfg: TrainConfig, base: Board, rng: np.random.Generator) -> Board:
    if cfg.defect_distance <= 0:
        return base
    return carve_defects(base, random_double_zcut(base, cfg.defect_distance, rng))


def example_stream(cfg: TrainConfig, stage_index: int, net: ConvNet | None = None) -> Iterator[tuple[Board, np.ndarray, np.ndarray]]:
    """Endless (board, input, target) examples for one stage, deterministic in cfg.seed."""
    stage = cfg.stages[stage_index]
    base = build_square_board(cfg.distance)
    rng = np.random.default_rng(derive_seed(cfg.seed, stage_index))
    while True:
        board = _training_board(cfg, base, rng)
        p = rng.uniform(stage.p_low, stage.p_high)
        frame = sample_depolarizing(board, p, rng)
        if not stage.feedback:
            yield (board, *make_example(board, frame))
            continue
        if net is None:
            raise ValueError("feedback stages need the network being trained")
        syn = extract_syndrome(board, frame)
        if syn.is_empty():
            continue
        total = np.zeros(board.shape, np.uint8)
        residual = syn
        for _ in range(cfg.feedback_passes):
            probs = batch_forward(net, assemble_input(board, residual)[None])[0]
            total = compose(total, probabilities_to_frame(board, probs))
            residual = syn ^ extract_syndrome(board, total)
            if residual.is_empty():
                break
        if residual.is_empty():
            continue
        rest = compose(frame, total)
        yield board, assemble_input(board, residual), target_planes(board, rest)


# -- optimisation ------------------------------------------------------------------------

@dataclass
class Optimizer:
    """Plain SGD or Adam over ``net.params()`` (updated in place)."""

    kind: str = "sgd"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        lr = self.learning_rate
        if self.kind == "sgd":
            for p, g in zip(params, grads):
                p -= (lr * g).astype(p.dtype)
            return
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= (lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(p.dtype)


def _stack(batch, dtype):
    boards = [b[0] for b in batch] if len(batch[0]) == 3 else None
    xs = np.stack([b[-2] for b in batch]).astype(dtype)
    ts = np.stack([b[-1] for b in batch]).astype(dtype)
    if boards is None:
        mask = None
    else:
        mask = np.stack([b.data_mask for b in boards])[:, None].astype(dtype)
    return xs, ts, mask


def train_step(net: ConvNet, batch: Sequence[tuple], cfg: TrainConfig, loss: Loss | None = None,
               optimizer: Optimizer | None = None) -> tuple[ConvNet, float]:
    """One gradient update on ``batch``; returns the (in-place updated) net and the pre-update loss.

    Batch items are ``(input, target)`` or ``(board, input, target)``; with a
    board the loss only counts its data qubits.
    """
    if not batch:
        raise ValueError("empty batch")
    xs, ts, mask = _stack(batch, net.dtype)
    value, grads = loss_and_grads(net, xs, ts, mask, loss or cfg.loss)
    if not math.isfinite(value) or not all(np.isfinite(g).all() for g in grads):
        raise TrainingDivergenceError(f"non-finite loss or gradient (loss={value})")
    opt = optimizer or Optimizer(cfg.optimizer, cfg.learning_rate)
    opt.step(net.params(), grads)
    return net, value


def train(net: ConvNet, cfg: TrainConfig,
          data: Callable[[TrainConfig, int, ConvNet], Iterator[tuple]] = example_stream,
          on_log: Callable[[int, int, float], None] | None = None) -> ConvNet:
    """Run every stage of ``cfg`` in order; ``net`` is updated in place and returned."""
    opt = Optimizer(cfg.optimizer, cfg.learning_rate)
    step = 0
    for si, stage in enumerate(cfg.stages):
        stream = data(cfg, si, net)
        running = []
        for _ in range(stage.steps):
            batch = [next(stream) for _ in range(cfg.batch_size)]
            _, value = train_step(net, batch, cfg, stage.loss, opt)
            running.append(value)
            step += 1
            if cfg.log_every and step % cfg.log_every == 0:
                mean = float(np.mean(running))
                running.clear()
                log.info("stage %d step %d loss %.5f", si + 1, step, mean)
                if on_log:
                    on_log(si + 1, step, mean)
            if cfg.checkpoint_every and cfg.checkpoint_path and step % cfg.checkpoint_every == 0:
                from .io import save_weights
                save_weights(net, cfg.checkpoint_path)
    return net


def with_stages(cfg: TrainConfig, stages: Sequence[Stage]) -> TrainConfig:
    return replace(cfg, stages=tuple(stages))
