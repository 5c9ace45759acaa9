"""Command-line interface: ``genassoc build | analyze | flow | verify``.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 a resource cap
refused the computation.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from .combinatorics import DEFAULT_ENUMERATION_CAP, EnumerationLimitError, Family, check_size, count_vertices
from .decomposition import IsomorphismFailure, class_iso_witness, classes, projection_graph
from .flipgraph import FlipGraph, build_graph, default_workers, validate_graph
from .graphio import GraphFormatError, atomic_write, read_graph, write_graph
from .report import AnalysisReport
from .spectra import (
    BRUTE_FORCE_CAP,
    EXACT_THRESHOLD,
    ThresholdExceeded,
    brute_force_expansion,
    exact_mixing_time,
    mixing_bound_sinclair,
    spectral_gap,
    type_B_half_cut,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
METRICS = ("counts", "regularity", "classes", "projection", "gap", "mixing", "expansion", "halfcut")
FLOW_METHODS = ("baseline", "pipeline", "hierarchical", "compose")
SUITE_CHOICES = ("counts", "decomposition", "flows", "spectra", "all")


class UsageError(Exception):
    """Invalid combination of inputs detected after argument parsing."""


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    n: int | None = None
    output: str | None = None
    seed: int = 0
    eps: Fraction = Fraction(1, 4)
    method: str | None = None
    workers: int = 1
    threshold: int = EXACT_THRESHOLD
    cap: int | None = DEFAULT_ENUMERATION_CAP

    def echo(self) -> dict:
        return {k: ("none" if v is None else v) for k, v in asdict(self).items()}


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("eps must lie in (0, 1)")
    return value


def _cap(text: str) -> int | None:
    if text.lower() == "none":
        return None
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("cap must be positive or 'none'")
    return value


def _metrics(values: list[str]) -> list[str]:
    out = []
    for v in values:
        for name in v.split(","):
            name = name.strip()
            if name not in METRICS:
                raise UsageError(f"unknown metric {name!r}; choose from {', '.join(METRICS)}")
            if name not in out:
                out.append(name)
    return out


def _starts(text: str):
    if text == "all":
        return "all"
    try:
        return sorted({int(x) for x in text.split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError("starts must be 'all' or a comma list of vertex indices")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_build(cfg: RunConfig) -> int:
    try:
        family = check_size(cfg.family, cfg.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    g = build_graph(family, cfg.n, cap=cfg.cap, workers=cfg.workers)
    write_graph(g, cfg.output)
    print(f"family={family.value} n={cfg.n} vertices={g.order} edges={g.edge_count} out={cfg.output}")
    return EXIT_OK


def _load(path: str) -> FlipGraph:
    try:
        return read_graph(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except GraphFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _need_family(g: FlipGraph, allowed, what: str) -> None:
    if g.family not in allowed:
        names = "/".join(f.value for f in allowed)
        raise UsageError(f"{what} needs a type {names} graph, got type {g.family.value}")


def _analyze_metric(name: str, g: FlipGraph, rep: AnalysisReport, args) -> None:
    if name == "counts":
        expected = count_vertices(g.family, g.n)
        rep.add("counts", "closed-form vertex counts", "|V| equals the closed-form count",
                g.order == expected, vertices=g.order, expected=expected, edges=g.edge_count)
    elif name == "regularity":
        for c in validate_graph(g):
            rep.add(f"regularity/{c.name}", "flip graphs are connected and n-regular", c.name, c.passed,
                    detail=c.detail or "none")
    elif name == "classes":
        _need_family(g, (Family.B, Family.D), "metric 'classes'")
        cover = classes(g)
        rep.record("classes.k", cover.k)
        rep.record("classes.sizes", [len(m) for m in cover.members])
        for cid in cover.ids:
            try:
                class_iso_witness(g, cid, cover)
                ok, detail = True, "ok"
            except IsomorphismFailure as exc:
                ok, detail = False, str(exc)
            rep.add(f"classes/{cid.label()}", "classes are type-A associahedra",
                    "explicit isomorphism onto a_(n-1)", ok, detail=detail)
    elif name == "projection":
        _need_family(g, (Family.B, Family.D), "metric 'projection'")
        pg = projection_graph(g, classes(g))
        rep.record("projection.k", pg.k)
        rep.record("projection.e_min", pg.e_min)
        rep.record("projection.gamma", pg.gamma)
        rep.record("projection.connected", pg.is_connected())
    elif name == "gap":
        gap = spectral_gap(g)
        rep.record("gap.value", gap.gap)
        rep.record("gap.lambda2", gap.lambda2)
        rep.record("gap.residual", gap.residual)
        rep.record("gap.iterations", gap.iterations)
        rep.add("gap/converged", "power iteration residual", "residual below tolerance", gap.converged,
                residual=gap.residual)
    elif name == "mixing":
        if args.starts != "all" and any(not 0 <= s < g.order for s in args.starts):
            raise UsageError(f"start vertices must lie in 0..{g.order - 1}")
        m = exact_mixing_time(g, args.eps, args.starts, threshold=args.threshold)
        rep.record("mixing.eps", m.eps)
        rep.record("mixing.tau", m.tau)
        rep.record("mixing.worst_start", m.worst_start)
        rep.record("mixing.lower_bound_only", m.lower_bound)
        rep.record("mixing.tv_curve", m.curve)
    elif name == "expansion":
        est = brute_force_expansion(g, cap=args.brute_cap)
        rep.record("expansion.h", est.exact)
        rep.record("expansion.witness", est.witness)
        rep.record("expansion.convention", "ceil((2/phi^2)(ln|V| + ln(1/eps))) with phi = h/(2 Delta)")
        rep.record("expansion.sinclair_bound", mixing_bound_sinclair(est.exact, g.max_degree, g.order, args.eps))
    elif name == "halfcut":
        _need_family(g, (Family.B,), "metric 'halfcut'")
        cut = type_B_half_cut(g.n, g)
        rep.record("halfcut.size", len(cut.subset))
        rep.record("halfcut.boundary", cut.boundary)
        rep.record("halfcut.ratio", cut.ratio)
        rep.add("halfcut/formula", "half cut by central diagonals",
                "|dS| equals the sum of C(d-1) C(n-d)", cut.boundary == cut.metadata["predicted_boundary"],
                predicted=cut.metadata["predicted_boundary"])


def cmd_analyze(cfg: RunConfig, args) -> AnalysisReport:
    metrics = _metrics(args.metric or list(METRICS[:2]))
    g = _load(args.graph)
    cfg.family, cfg.n = g.family.value, g.n
    rep = AnalysisReport("analyze", {**cfg.echo(), "graph": args.graph, "metrics": ",".join(metrics)})
    for name in metrics:
        _analyze_metric(name, g, rep, args)
    return rep


def cmd_flow(cfg: RunConfig, args) -> AnalysisReport:
    from .flows import baseline_uniform_mcf, compose_flows, hierarchical_flow_typeB, pipeline_flow_typeB

    g = _load(args.graph)
    cfg.family, cfg.n = g.family.value, g.n
    method = args.method
    if method in ("pipeline", "hierarchical"):
        _need_family(g, (Family.B,), f"method '{method}'")
    if method == "compose":
        _need_family(g, (Family.B, Family.D), "method 'compose'")
    rep = AnalysisReport("flow", {**cfg.echo(), "graph": args.graph, "class_method": args.class_method,
                                  "variant": args.variant})
    if method == "baseline":
        r = baseline_uniform_mcf(g)
    elif method == "compose":
        r = compose_flows(g, classes(g), method=args.class_method)
    elif method == "pipeline":
        r = pipeline_flow_typeB(g.n, method=args.class_method)
    else:
        r = hierarchical_flow_typeB(g.n, args.variant, method=args.class_method)
    rep.record("flow.phi_max", r.phi_max)
    rep.record("flow.argmax", list(r.argmax) if r.argmax else "none")
    rep.record("flow.expansion_lower_bound", r.expansion_lower_bound)
    for key, v in r.stages.items():
        rep.record(f"flow.stage.{key}", v)
    for i, v in enumerate(r.levels, 1):
        rep.record(f"flow.level{i}", v)
    for key, v in sorted(r.details.items()):
        if key == "transmit_per_pair_edge":
            v = max(v.values()) if v else 0
            key = "transmit_per_pair_edge_max"
        rep.record(f"flow.{key}", v)
    rep.add("flow/valid", "flows conserve mass exactly",
            "every validated stage passes with zero tolerance", r.valid,
            validated=sum(r.validations.values()), failures=len(r.failures))
    if "emin_bound" in r.details:
        rep.add("flow/emin-bound", "composed congestion against the E_min bound",
                "phi_max <= (2 gamma |V|/E_min + 1) k rho", r.phi_max <= r.details["emin_bound"],
                phi_max=r.phi_max, bound=r.details["emin_bound"])
        rep.add("flow/projection-bound", "composed congestion against the projection bound",
                "phi_max <= (2 gamma k rho_bar + 1) rho", r.phi_max <= r.details["projection_bound"],
                phi_max=r.phi_max, bound=r.details["projection_bound"])
    return rep


def cmd_verify(cfg: RunConfig, args) -> AnalysisReport:
    from .suites import run_suite

    rep = AnalysisReport("verify", {**cfg.echo(), "suite": args.suite})
    return run_suite(args.suite, rep)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $GENASSOC_THREADS or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled diagnostics (none feed checks)")
    common.add_argument("--format", choices=("text", "json"), default="text", help="stdout report format")
    common.add_argument("--json", dest="json_out", metavar="PATH", help="also write the JSON report to PATH")

    p = argparse.ArgumentParser(prog="genassoc", description="Flip graphs of associahedra, cyclohedra and type-D analogues.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="enumerate a flip graph and write a .gag file")
    b.add_argument("--family", required=True, type=str.upper, choices=[f.value for f in Family])
    b.add_argument("--n", required=True, type=int)
    b.add_argument("--out", required=True)
    b.add_argument("--cap", type=_cap, default=DEFAULT_ENUMERATION_CAP, help="enumeration cap or 'none'")

    a = sub.add_parser("analyze", parents=[common], help="compute metrics of a graph file")
    a.add_argument("graph")
    a.add_argument("--metric", action="append", metavar="NAME",
                   help=f"repeatable or comma separated: {', '.join(METRICS)}")
    a.add_argument("--eps", type=_fraction, default=Fraction(1, 4))
    a.add_argument("--starts", type=_starts, default="all")
    a.add_argument("--threshold", type=int, default=EXACT_THRESHOLD, help="largest |V| for exact all-start mixing")
    a.add_argument("--brute-cap", type=int, default=BRUTE_FORCE_CAP, help="largest |V| for brute-force expansion")

    f = sub.add_parser("flow", parents=[common], help="construct and validate a uniform multicommodity flow")
    f.add_argument("graph")
    f.add_argument("--method", required=True, choices=FLOW_METHODS)
    f.add_argument("--class-method", choices=("product", "pairwise"), default=None,
                   help="in-class flows (default: pairwise for pipeline/hierarchical, product for compose)")
    f.add_argument("--variant", choices=("hierarchical", "naive"), default="hierarchical")

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", choices=SUITE_CHOICES, default="all")
    return p


def _emit(rep: AnalysisReport, args) -> None:
    text = rep.to_json() if args.format == "json" else rep.to_text()
    sys.stdout.write(text)
    if args.json_out:
        atomic_write(args.json_out, rep.to_json())


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(command=args.command, workers=workers, seed=args.seed)
    if args.command == "build":
        cfg.family, cfg.n, cfg.output, cfg.cap = args.family, args.n, args.out, args.cap
    if args.command == "analyze":
        cfg.eps, cfg.threshold = args.eps, args.threshold
    if args.command == "flow":
        if args.class_method is None:
            args.class_method = "product" if args.method in ("compose", "baseline") else "pairwise"
        cfg.method = args.method
    started = time.perf_counter()
    try:
        if args.command == "build":
            code = cmd_build(cfg)
        else:
            runner = {"analyze": cmd_analyze, "flow": cmd_flow, "verify": cmd_verify}[args.command]
            rep = runner(cfg, args)
            _emit(rep, args)
            code = EXIT_OK if rep.passed else EXIT_FAIL
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ThresholdExceeded, EnumerationLimitError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    print(f"elapsed={time.perf_counter() - started:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
