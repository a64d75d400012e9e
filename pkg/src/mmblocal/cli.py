"""Command-line entry point: ``mmblocal <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data or model error.  Errors are
also written to stderr as one JSON object ``{"error": ..., "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .ci import CiError, Dataset, FisherZCI, OracleCI
from .driver import run_mmb_by_mmb
from .evaluation import score_local
from .experiment import bench, load_spec, records_csv, resolve_network
from .formats import graph_from_json, graph_to_json, read_json, result_to_json, write_json
from .graph import Dag, GraphError, as_mag, pag_from_mag, read_graph
from .simgen import parameterize, sample

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _latents(s: str) -> list[str]:
    return [v.strip() for v in s.split(",") if v.strip()]


def _load_net(name: str):
    return read_graph(resolve_network(name))


def cmd_generate(args) -> int:
    dag = Dag.of(_load_net(args.net))
    latents = set(args.latents)
    for v in latents:
        if v not in dag:
            raise GraphError(f"unknown latent: {v}")
    observed = [v for v in dag.nodes if v not in latents]
    scm = parameterize(dag, args.seed, args.noise_std)
    sample(scm, args.n, observed, args.seed).to_csv(args.out)
    return 0


def _emit(obj, out: Optional[str]) -> None:
    if out:
        write_json(obj, out)
    else:
        print(json.dumps(obj, indent=2))


def cmd_run(args) -> int:
    data = Dataset.from_csv(args.data)
    b = FisherZCI(data, args.alpha)
    r = run_mmb_by_mmb(b, None, args.target, r3=args.r3)
    _emit(result_to_json(r), args.out)
    return 0


def cmd_oracle(args) -> int:
    b = OracleCI(_load_net(args.net), args.latents)
    r = run_mmb_by_mmb(b, None, args.target, r3=args.r3)
    _emit(result_to_json(r), args.out)
    return 0


def cmd_truth(args) -> int:
    mag = as_mag(_load_net(args.net), args.latents)
    _emit(graph_to_json(pag_from_mag(mag)), args.out)
    return 0


def cmd_eval(args) -> int:
    pred_obj = read_json(args.pred)
    pred = graph_from_json(pred_obj)
    truth = graph_from_json(read_json(args.truth))
    target = args.target or pred_obj.get("target")
    if not target:
        raise UsageError("eval: --target is required when the prediction has none")
    if target not in truth:
        raise GraphError(f"target {target} is not in the truth graph")
    m = score_local(pred, truth, target, n_tests=int(pred_obj.get("n_tests", 0)))
    print(json.dumps({"target": target, **m.as_dict()}, indent=2))
    return 0


def cmd_bench(args) -> int:
    spec = load_spec(args.spec)
    if args.workers is not None:
        spec.workers = args.workers
        spec.validate()
    report, records, _ = bench(spec)
    Path(args.out).write_text(report)
    if args.records:
        Path(args.records).write_text(records_csv(records))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmblocal", description="Local causal discovery around a target with latent variables.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a linear-Gaussian dataset from a DAG")
    g.add_argument("--net", required=True, help="graph file or packaged network name (fig1)")
    g.add_argument("--latents", type=_latents, default=[], help="comma-separated hidden nodes")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise-std", type=float, default=1.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="learn around a target from data (Fisher-z)")
    r.add_argument("--data", required=True)
    r.add_argument("--target", required=True)
    r.add_argument("--alpha", type=float, default=0.05)
    r.add_argument("--r3", choices=["sound", "arrowhead"], default="sound")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="learn around a target with an m-separation oracle")
    o.add_argument("--net", required=True)
    o.add_argument("--latents", type=_latents, default=[])
    o.add_argument("--target", required=True)
    o.add_argument("--r3", choices=["sound", "arrowhead"], default="sound")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("truth", help="write the PAG of the projected network")
    t.add_argument("--net", required=True)
    t.add_argument("--latents", type=_latents, default=[])
    t.add_argument("--out")
    t.set_defaults(func=cmd_truth)

    e = sub.add_parser("eval", help="score a result against a truth PAG")
    e.add_argument("--pred", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--target")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run a seeded sweep from a TOML/JSON spec")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--records", help="also write one row per run")
    b.add_argument("--workers", type=int)
    b.set_defaults(func=cmd_bench)
    return p


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except (GraphError, CiError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DATA)
    except (ValueError, KeyError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
