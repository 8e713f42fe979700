"""Command-line interface.

    tokennet run MODEL.yaml --out result.csv
    tokennet run --builtin bread --length 90 --dt 1 --report-every 1 --out bread.csv
    tokennet validate MODEL.yaml
    tokennet examples

Data goes only to ``--out`` (``-`` for stdout); diagnostics go to stderr.
Exit status is 0 on success and 1 on any failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import engine
from .errors import DocumentSyntaxError, PetriNetError
from .model_io import BUILTINS, Defaults, build_net, builtin, load_model
from .reporting import iter_records, write_csv, write_json
from .rules import fmt_number


class CliError(Exception):
    pass


def _diagnostic(exc: BaseException, source: str) -> str:
    line = getattr(exc, "line", None)
    col = getattr(exc, "column", None)
    msg = exc.message if isinstance(exc, DocumentSyntaxError) else str(exc)
    if line is not None:
        return f"{source}:{line}:{col or 1}: {type(exc).__name__}: {msg}"
    return f"{source}: {type(exc).__name__}: {msg}"


def _load(args):
    """Returns (net, defaults, label used in diagnostics)."""
    if args.builtin and args.model:
        raise CliError("give either a model file or --builtin, not both")
    if args.builtin:
        try:
            doc = builtin(args.builtin)
        except KeyError as exc:
            raise CliError(exc.args[0]) from None
        return build_net(doc), doc.defaults, f"<builtin {args.builtin}>"
    if not args.model:
        raise CliError("no model given; pass a model file or --builtin NAME")
    path = Path(args.model)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read model file {args.model}: {exc.strerror or exc}") from None
    net, defaults = load_model(text)
    return net, defaults, args.model


def _config(args, defaults: Defaults):
    length = args.length if args.length is not None else defaults.length
    dt = args.dt if args.dt is not None else defaults.timestep
    every = args.report_every if args.report_every is not None else defaults.report_frequency
    if every is None:
        every = 1
    if length is None:
        raise CliError("no simulation length: pass --length or set defaults.length in the model")
    if dt is None:
        raise CliError("no time step: pass --dt or set defaults.timestep in the model")
    return length, dt, every


def cmd_run(args) -> int:
    try:
        net, defaults, source = _load(args)
    except PetriNetError as exc:
        print(_diagnostic(exc, args.model or "<builtin>"), file=sys.stderr)
        return 1
    length, dt, every = _config(args, defaults)
    writer = write_json if args.format == "json" else write_csv

    def produce(sink):
        if args.stream:
            history = engine.stream_history(net, length, dt, every)
            writer(iter_records(history), sink)
        else:
            writer(engine.simulate(net, length, dt, every), sink)

    try:
        if args.out == "-":
            produce(sys.stdout)
            sys.stdout.flush()
        else:
            out = Path(args.out)
            # write beside the target and rename, so a failed run leaves no partial file
            fd, tmp = tempfile.mkstemp(dir=out.parent or Path("."), prefix=f".{out.name}.")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    produce(fh)
                os.replace(tmp, out)
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise
    except PetriNetError as exc:
        print(_diagnostic(exc, source), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{args.out}: cannot write output: {exc.strerror or exc}", file=sys.stderr)
        return 1
    print(f"{source}: {net.step_index} steps executed, final clock {fmt_number(net.clock)}",
          file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    try:
        net, _, source = _load(args)
    except PetriNetError as exc:
        print(_diagnostic(exc, args.model or "<builtin>"), file=sys.stderr)
        return 1
    try:
        net.check_ready()
    except PetriNetError as exc:
        print(_diagnostic(exc, source), file=sys.stderr)
        return 1
    print(f"{source}: {len(net.user_places())} places, {len(net.rules)} rules")
    return 0


def cmd_examples(args) -> int:
    for name in BUILTINS:
        d = builtin(name).defaults
        print(f"{name}\tlength={fmt_number(d.length)} timestep={fmt_number(d.timestep)} "
              f"report_frequency={d.report_frequency}")
    return 0


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("model", nargs="?", help="YAML model file")
    p.add_argument("--builtin", metavar="NAME", help=f"built-in model: {', '.join(BUILTINS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokennet", description="Time-step Petri net simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a model and write the token time series")
    _model_args(run)
    run.add_argument("--length", type=float, help="simulated time (overrides model default)")
    run.add_argument("--dt", type=float, help="time step (overrides model default)")
    run.add_argument("--report-every", type=int, help="record every N-th step")
    run.add_argument("--out", default="-", help="output file, '-' for stdout (default)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--stream", action="store_true",
                     help="use the streaming engine; rows are written as they are produced")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="load and check a model without simulating")
    _model_args(val)
    val.set_defaults(func=cmd_validate)

    ex = sub.add_parser("examples", help="list built-in models and their default settings")
    ex.set_defaults(func=cmd_examples)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"tokennet: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
