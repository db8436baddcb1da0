"""Command-line interface: prune / segment / budget / eval / synth subcommands.

Exit codes: 0 on success, 1 on any input or usage error, 2 when the requested
budget is infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .budgeting import allocate, order_segments
from .core import PruneConfig, normalize
from .errors import InfeasibleBudgetError, InvalidInputError, VidpruneError
from .evaluation import SyntheticSpec, generate_synthetic
from .pipeline import (
    compute_metrics,
    config_echo,
    dumps_document,
    prune_video,
    result_document,
)
from .segmentation import find_boundaries, segment_video
from .tensorfile import read_tokens, write_tokens


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2 for
    # infeasible budgets, so remap usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_config_flags(p: argparse.ArgumentParser, with_budget: bool = True) -> None:
    if with_budget:
        p.add_argument("--ratio", type=float, required=True, help="global retention ratio in (0, 1]")
        p.add_argument("--min-ratio", type=float, default=None,
                       help="per-segment floor (default: half of --ratio)")
        p.add_argument("--lambda", dest="lam", type=float, default=0.5,
                       help="representativeness/diversity balance in [0, 1]")
        p.add_argument("--knn", type=int, default=5, help="density neighborhood size")
        p.add_argument("--beta", type=float, default=1.0, help="redundancy weight for metrics")
    p.add_argument("--tau", type=float, default=0.95, help="adjacent-frame similarity threshold")
    p.add_argument("--no-normalize", action="store_true",
                   help="skip unit-normalizing tokens before processing")


def _config_from(args, ratio: float | None = None) -> PruneConfig:
    return PruneConfig(
        retention_ratio=args.ratio if ratio is None else ratio,
        min_ratio=getattr(args, "min_ratio", None),
        tau=args.tau,
        lam=getattr(args, "lam", 0.5),
        beta=getattr(args, "beta", 1.0),
        knn=getattr(args, "knn", 5),
        normalize_tokens=not args.no_normalize,
    )


def _emit(args, doc: dict) -> None:
    text = dumps_document(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vidprune",
                     description="Prune video visual-token tensors under a retention budget.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="run the full pipeline and write kept indices")
    p.add_argument("--input", "-i", required=True, help="input tensor file")
    p.add_argument("--output", "-o", default=None, help="output JSON (default: stdout)")
    _add_config_flags(p)

    p = sub.add_parser("segment", help="stage 1 only: boundaries and segments")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None)
    _add_config_flags(p, with_budget=False)

    p = sub.add_parser("budget", help="stages 1-2: segment ordering and budgets")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None)
    _add_config_flags(p)

    p = sub.add_parser("eval", help="prune and report selection metrics")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--metrics", action="store_true",
                   help="include coverage/redundancy/quality in the output")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic tensor from a spec file")
    p.add_argument("--spec", required=True, help="JSON synthetic spec")
    p.add_argument("--out", required=True, help="output tensor file")
    p.add_argument("--truth", default=None, help="optional JSON file for the ground truth")

    return parser


def _cmd_prune(args) -> int:
    tokens = read_tokens(args.input)
    config = _config_from(args)
    result = prune_video(tokens, config)
    _emit(args, result_document(tokens, config, result))
    return 0


def _cmd_segment(args) -> int:
    tokens = read_tokens(args.input)
    config = PruneConfig(retention_ratio=1.0, tau=args.tau,
                         normalize_tokens=not args.no_normalize)
    work = normalize(tokens) if config.normalize_tokens else tokens
    boundaries = find_boundaries(work, config.tau)
    seg = segment_video(tokens, config)
    doc = {
        "config": {"tau": config.tau, "normalize": config.normalize_tokens},
        "input": {"frames": tokens.frames, "tokens_per_frame": tokens.tokens_per_frame,
                  "dim": tokens.dim},
        "boundaries": boundaries,
        "segments": [{"start": s, "end": e} for s, e in seg.segments],
    }
    _emit(args, doc)
    return 0


def _cmd_budget(args) -> int:
    tokens = read_tokens(args.input)
    config = _config_from(args)
    seg = segment_video(tokens, config)
    order, mv = order_segments(seg, config.lam)
    alloc = allocate(mv, seg, config, tokens.tokens_per_frame, tokens.total_tokens, order=order)
    doc = {
        "config": config_echo(config),
        "input": {"frames": tokens.frames, "tokens_per_frame": tokens.tokens_per_frame,
                  "dim": tokens.dim},
        "order": alloc.order,
        "segments": [
            {
                "start": s,
                "end": e,
                "ratio": alloc.ratios[k],
                "per_frame_count": alloc.base_counts[k],
                "marginal_value": alloc.mv[k],
            }
            for k, (s, e) in enumerate(seg.segments)
        ],
    }
    _emit(args, doc)
    return 0


def _cmd_eval(args) -> int:
    tokens = read_tokens(args.input)
    config = _config_from(args)
    result = prune_video(tokens, config)
    metrics = compute_metrics(tokens, config, result) if args.metrics else None
    _emit(args, result_document(tokens, config, result, metrics=metrics))
    return 0


def _cmd_synth(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"synthetic spec is not valid JSON: {exc}") from exc
    spec = SyntheticSpec.from_dict(payload)
    tokens, boundaries, novel = generate_synthetic(spec)
    write_tokens(args.out, tokens)
    if args.truth:
        truth = {"boundaries": boundaries, "novel": [[f, p] for f, p in novel]}
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump(truth, fh, indent=2)
            fh.write("\n")
    return 0


_COMMANDS = {
    "prune": _cmd_prune,
    "segment": _cmd_segment,
    "budget": _cmd_budget,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except InfeasibleBudgetError as exc:
        print(f"vidprune: infeasible budget: {exc}", file=sys.stderr)
        return 2
    except (InvalidInputError, VidpruneError) as exc:
        print(f"vidprune: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"vidprune: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
