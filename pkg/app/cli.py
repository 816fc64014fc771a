"""
Command-line front end.

    carve  scan an image and extract recovered files with a manifest
    bench  time backends/worker counts/chunk sizes on one image
    gen    write a synthetic image plus its ground truth
    eval   score a manifest against a ground truth
    sigs   print a built-in signature set in config format
    serve  run the HTTP API

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 internal invariant
violation. Diagnostics go to stderr, data to files or stdout.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from app.carver import read_manifest
from app.config import settings, setup_logging
from app.corpus import evaluate, generate_image, read_truth, write_truth
from app.errors import (
    ImageMismatchError,
    InvalidArgumentError,
    InvariantViolation,
    ManifestExistsError,
    SanitizationError,
)
from app.pipeline import carve_image, run_bench
from app.search import Backend
from app.signatures import builtin_canonical_set, builtin_paper_set, dump_signatures

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

ALGORITHMS = [b.value for b in Backend]


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; usage errors here are exit 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(value: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def _algorithm_list(value: str) -> list[str]:
    algorithms = [part for part in value.split(",") if part]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown or not algorithms:
        raise argparse.ArgumentTypeError(f"algorithms must be drawn from {','.join(ALGORITHMS)}")
    return algorithms


def cmd_carve(args: argparse.Namespace) -> int:
    manifest_path = args.manifest or Path(args.output_dir) / settings.manifest_name
    outcome = carve_image(
        args.image,
        signatures=args.signatures,
        algorithm=args.algorithm,
        workers=args.threads,
        chunk_size=args.chunk_size,
        output_dir=args.output_dir,
        manifest_path=manifest_path,
        extract_failed=args.extract_failed,
        force=args.force,
        executor=args.executor,
    )
    print(f"regions={len(outcome.manifest.records)} manifest={outcome.manifest_path}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    report = run_bench(
        args.image,
        algorithms=args.algorithms,
        thread_counts=args.threads,
        chunk_sizes=args.chunk_sizes,
        repeat=args.repeat,
        signatures=args.signatures,
        signature_counts=args.signature_counts,
        executor=args.executor,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")

    for row in report.rows:
        print(
            f"{row.algorithm} workers={row.workers} chunk={row.chunk_size} sigs={row.signature_count} "
            f"seconds={row.duration_seconds:.3f} mb_s={row.throughput_mb_s:.2f} matches={row.match_count}"
        )
    for ratio in report.ratios:
        print(
            f"ac/bm workers={ratio.workers} chunk={ratio.chunk_size} patterns={ratio.pattern_count} "
            f"ratio={ratio.ac_over_bm:.3f}"
        )
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    signatures = builtin_canonical_set() if args.signatures == "canonical" else builtin_paper_set()
    if args.types:
        signatures = signatures.subset(t for t in args.types.split(",") if t)

    image, truth = generate_image(
        signatures,
        file_count=args.files,
        size_range=(args.min_file_size, args.max_file_size),
        image_length=args.size,
        seed=args.seed,
        adversarial=args.adversarial,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(image)
    write_truth(truth, args.truth)
    print(f"image={out} truth={args.truth} planted={len(truth.planted)} decoys={len(truth.decoys)}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    report = evaluate(read_truth(args.truth), read_manifest(args.manifest))
    print(report.summary())
    return EXIT_OK


def cmd_sigs(args: argparse.Namespace) -> int:
    signatures = builtin_canonical_set() if args.set == "canonical" else builtin_paper_set()
    sys.stdout.write(dump_signatures(signatures))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parcarve", description="Parallel signature-based file carver")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    carve = commands.add_parser("carve", help="Carve files out of a raw image")
    carve.add_argument("--image", required=True)
    carve.add_argument("--signatures", default=None, help="paper, canonical, or a config file path")
    carve.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    carve.add_argument("--threads", type=int, default=None)
    carve.add_argument("--chunk-size", type=int, default=None)
    carve.add_argument("--output-dir", default=settings.output_dir)
    carve.add_argument("--manifest", default=None)
    carve.add_argument("--extract-failed", action="store_true")
    carve.add_argument("--force", action="store_true", help="Overwrite an existing manifest")
    carve.add_argument("--executor", choices=["process", "thread"], default=None)
    carve.set_defaults(handler=cmd_carve)

    bench = commands.add_parser("bench", help="Benchmark scan configurations")
    bench.add_argument("--image", required=True)
    bench.add_argument("--algorithms", type=_algorithm_list, default=["ac", "bm"])
    bench.add_argument("--threads", type=_int_list, default=[1])
    bench.add_argument("--chunk-sizes", type=_int_list, default=[settings.chunk_size])
    bench.add_argument("--repeat", type=int, default=3)
    bench.add_argument("--out", required=True)
    bench.add_argument("--signatures", default=None)
    bench.add_argument("--signature-counts", type=_int_list, default=None)
    bench.add_argument("--executor", choices=["process", "thread"], default=None)
    bench.set_defaults(handler=cmd_bench)

    gen = commands.add_parser("gen", help="Generate a synthetic image and ground truth")
    gen.add_argument("--out", required=True)
    gen.add_argument("--truth", required=True)
    gen.add_argument("--size", type=int, required=True)
    gen.add_argument("--files", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--signatures", choices=["paper", "canonical"], default="canonical")
    gen.add_argument("--types", default=None, help="Comma-separated signature ids to plant")
    gen.add_argument("--min-file-size", type=int, default=512)
    gen.add_argument("--max-file-size", type=int, default=64 * 1024)
    gen.add_argument("--adversarial", action="store_true")
    gen.set_defaults(handler=cmd_gen)

    ev = commands.add_parser("eval", help="Score a manifest against ground truth")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--manifest", required=True)
    ev.set_defaults(handler=cmd_eval)

    sigs = commands.add_parser("sigs", help="Print a built-in signature set")
    sigs.add_argument("--set", choices=["paper", "canonical"], default="paper")
    sigs.set_defaults(handler=cmd_sigs)

    serve = commands.add_parser("serve", help="Run the HTTP API")
    serve.add_argument("--host", default=settings.api_host)
    serve.add_argument("--port", type=int, default=settings.api_port)
    serve.set_defaults(handler=cmd_serve)

    return parser


def _run(handler: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    try:
        return handler(args)
    except InvariantViolation as e:
        logger.error("Invariant violation: %s", e)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidArgumentError, ImageMismatchError, ManifestExistsError, SanitizationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        settings.log_level = args.log_level
    setup_logging()
    return _run(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
