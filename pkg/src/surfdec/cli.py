"""``surfdec`` command-line interface."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import SurfdecError
from .lattice import Board, build_square_board, load_board
from .noise import format_frame, parse_frame, sample_depolarizing
from .syndrome import SyndromeImage, extract_syndrome, format_syndrome, parse_syndrome

MODES = ("hdrg", "ann+hdrg")


class CliError(SurfdecError):
    pass


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} file {path!r} ({exc.strerror})") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path!r} ({exc.strerror})") from None


def _board(args) -> Board:
    if args.board:
        return load_board(args.board)
    if args.d is not None:
        return build_square_board(args.d)
    raise CliError("a board is required: pass --board PATH or --d INT")


def _net(path: str | None, required: bool):
    from .cnn.io import load_weights

    if path is None:
        if required:
            raise CliError("this mode needs --weights PATH")
        return None
    return load_weights(path)


# -- subcommands -------------------------------------------------------------------------

def cmd_sample(args) -> int:
    board = _board(args)
    frame = sample_depolarizing(board, args.p, args.seed)
    syn = extract_syndrome(board, frame)
    if args.out:
        _write(args.out + ".frame", format_frame(frame))
        _write(args.out + ".syn", format_syndrome(syn))
    else:
        _write(None, format_frame(frame) + "\n" + format_syndrome(syn))
    return 0


def cmd_train(args) -> int:
    from .cnn.io import save_weights
    from .cnn.net import init_net
    from .cnn.train import load_train_config, train

    cfg = load_train_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is None:
        raise CliError("train needs --out PATH for the weight file")
    log_path = args.log or args.out + ".log"
    lines = ["stage,step,loss"]

    def on_log(stage, step, loss):
        lines.append(f"{stage},{step},{loss:.6g}")
        print(f"stage {stage} step {step} loss {loss:.5f}", file=sys.stderr, flush=True)

    net = _net(args.weights, False) or init_net(seed=cfg.seed)
    if cfg.checkpoint_every and not cfg.checkpoint_path:
        cfg = replace(cfg, checkpoint_path=args.out)
    train(net, cfg, on_log=on_log)
    save_weights(net, args.out)
    _write(log_path, "\n".join(lines) + "\n")
    return 0


def cmd_decode(args) -> int:
    from .hdrg import hdrg_decode
    from .pipeline import full_decode

    board = _board(args)
    net = _net(args.weights, args.mode == "ann+hdrg")
    if args.frame:
        frame = parse_frame(_read_text(args.frame, "frame"), board.shape)
        syn = extract_syndrome(board, frame)
    elif args.syndrome:
        frame = None
        syn = parse_syndrome(_read_text(args.syndrome, "syndrome"), board)
    else:
        raise CliError("decode needs --frame PATH or --syndrome PATH")
    passes = args.passes if args.mode == "ann+hdrg" else 0
    report = [f"flips: {syn.count()}"]
    if frame is not None:
        correction, res = full_decode(board, frame, net if passes else None, passes)
        report += [f"after ANN pass {i + 1}: {n}" for i, n in enumerate(res.flips_per_pass)]
        report.append(f"logical failure: {'yes' if res.logical_failure else 'no'}")
        report.append(f"time ns: ann {res.timings.ann_ns} hdrg {res.timings.hdrg_ns} total {res.timings.total_ns}")
    else:
        from .cnn.infer import decode_pass
        from .noise import compose

        correction = np.zeros(board.shape, np.uint8)
        residual = syn
        for i in range(passes):
            if residual.is_empty():
                break
            correction = compose(correction, decode_pass(net, board, residual))
            residual = syn ^ extract_syndrome(board, correction)
            report.append(f"after ANN pass {i + 1}: {residual.count()}")
        correction = compose(correction, hdrg_decode(board, residual))
    report.append(f"final residual flips: {(syn ^ extract_syndrome(board, correction)).count()}")
    _write(args.out, format_frame(correction))
    print("\n".join(report), file=sys.stderr)
    return 0


def _sweep(args):
    from .pipeline import DecoderMode, load_sweep_config

    cfg = load_sweep_config(args.config)
    if args.mode:
        cfg = replace(cfg, decoder_mode=DecoderMode(args.mode))
    if args.passes is not None:
        cfg = replace(cfg, n_ann_passes=args.passes)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def cmd_threshold(args) -> int:
    from .pipeline import DecoderMode, crossing_points, estimate_logical_error_rate, estimate_threshold, threshold_csv

    cfg = _sweep(args)
    net = _net(args.weights, cfg.decoder_mode is DecoderMode.ANN_PLUS_HDRG)
    rows = estimate_logical_error_rate(cfg, net, args.workers)
    _write(args.out or "threshold.csv", threshold_csv(rows))
    for (a, b), x in crossing_points(rows).items():
        print(f"crossing d={a}/d={b}: {'none in range' if x is None else f'{x:.4f}'}", file=sys.stderr)
    est = estimate_threshold(rows)
    print(f"threshold estimate: {'n/a' if est is None else f'{est:.4f}'}", file=sys.stderr)
    return 0


def cmd_sparsity(args) -> int:
    from .pipeline import sparsity_csv, sparsity_curve

    cfg = _sweep(args)
    rows = sparsity_curve(cfg, _net(args.weights, True), args.workers)
    _write(args.out or "sparsity.csv", sparsity_csv(rows))
    return 0


def cmd_bench(args) -> int:
    from .pipeline import DecoderMode, bench_csv, bench_decode

    cfg = _sweep(args)
    net = _net(args.weights, cfg.decoder_mode is DecoderMode.ANN_PLUS_HDRG)
    modes = [cfg.decoder_mode] if args.mode or net is None else list(DecoderMode)
    rows = bench_decode(cfg, net, modes=modes)
    _write(args.out or "bench.csv", bench_csv(rows))
    return 0


def cmd_render(args) -> int:
    from .render import render_svg

    board = _board(args)
    frame = parse_frame(_read_text(args.frame, "frame"), board.shape) if args.frame else None
    if args.syndrome:
        syn = parse_syndrome(_read_text(args.syndrome, "syndrome"), board)
    elif frame is not None:
        syn = extract_syndrome(board, frame)
    else:
        syn = SyndromeImage.empty(board)
    _write(args.out, render_svg(board, frame, syn))
    return 0


# -- parser ------------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfdec", description="Convolutional + HDRG surface-code decoding toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def board_flags(p):
        p.add_argument("--board", metavar="PATH", help="board spec file")
        p.add_argument("--d", type=int, metavar="INT", help="plain square board of this distance")

    p = sub.add_parser("sample", help="sample a depolarizing error and its syndrome")
    board_flags(p)
    p.add_argument("--p", type=float, required=True, metavar="FLOAT")
    p.add_argument("--seed", type=int, default=0, metavar="INT")
    p.add_argument("--out", metavar="PATH", help="write PATH.frame and PATH.syn instead of stdout")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train a decoder from a training config")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH", help="weight file to write")
    p.add_argument("--weights", metavar="PATH", help="start from these weights instead of a fresh init")
    p.add_argument("--seed", type=int, metavar="INT", help="override the config seed")
    p.add_argument("--log", metavar="PATH", help="loss log (default: OUT.log)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="decode one frame or syndrome")
    board_flags(p)
    p.add_argument("--frame", metavar="PATH")
    p.add_argument("--syndrome", metavar="PATH")
    p.add_argument("--weights", metavar="PATH")
    p.add_argument("--mode", choices=MODES, default="hdrg")
    p.add_argument("--passes", type=_positive_int, default=5, metavar="INT")
    p.add_argument("--out", metavar="PATH", help="correction frame (default: stdout)")
    p.set_defaults(func=cmd_decode)

    for name, func, help_ in (("threshold", cmd_threshold, "logical error rate sweep"),
                              ("sparsity", cmd_sparsity, "residual syndrome after ANN passes"),
                              ("bench", cmd_bench, "decode timings")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, metavar="PATH", help="sweep config file")
        p.add_argument("--weights", metavar="PATH")
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--passes", type=_positive_int, metavar="INT")
        p.add_argument("--seed", type=int, metavar="INT", help="override the master seed")
        p.add_argument("--workers", type=_positive_int, metavar="INT",
                       help="worker processes (default: $SURFDEC_WORKERS or 1)")
        p.add_argument("--out", metavar="PATH", help=f"CSV output (default: {name}.csv)")
        p.set_defaults(func=func)

    p = sub.add_parser("render", help="draw a board, frame and syndrome as SVG")
    board_flags(p)
    p.add_argument("--frame", metavar="PATH")
    p.add_argument("--syndrome", metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="SVG output (default: stdout)")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SurfdecError as exc:
        print(f"surfdec {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"surfdec {args.command}: error: {exc}", file=sys.stderr)
        return 1


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
