"""Command-line entry point: gen, assemble, spectrum, classify, verify."""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .discretization.dec import AssemblyError
from .discretization.mesh import MeshError
from .io import InputError, read_mesh, read_spectrum_csv, write_json, write_mesh, write_operator, write_spectrum_csv
from .models.meshgen import MeshRecipe
from .spectral import SolverError, eig_lowest
from .verify.classify import classify_spectrum, killing_number
from .verify.context import ManifoldContext, Thresholds
from .verify.report import DEFAULT_SUITE, full_report

OPERATORS = ("yano", "hodge", "bochner", "ric")
EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    manifolds: list = field(default_factory=list)
    tol: float = 1e-8
    count: int = 12
    thresholds: Thresholds = field(default_factory=Thresholds)
    output: str | None = None
    seed_label: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        th = self.thresholds
        low = [k for k in ("kernel_band", "class_residual", "equality") if getattr(th, k) < self.tol]
        if low:
            raise ValueError(f"thresholds below the solver tolerance: {', '.join(low)}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = self.thresholds.as_dict()
        d.pop("output")
        return d


def _operator(ctx: ManifoldContext, name: str):
    return {"yano": lambda: ctx.yano, "hodge": lambda: ctx.dec.hodge_L1, "bochner": lambda: ctx.bochner, "ric": lambda: ctx.ric}[name]()


def _load(path: str, cfg: RunConfig) -> ManifoldContext:
    return ManifoldContext(
        read_mesh(path), tol=cfg.tol, count=cfg.count, thresholds=cfg.thresholds, name=Path(path).name, seed_label=cfg.seed_label
    )


def cmd_gen(args, cfg: RunConfig) -> int:
    try:
        recipe = MeshRecipe.parse(args.recipe)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    mesh = recipe.build()
    write_mesh(args.output, mesh, cfg.as_dict())
    print(f"{recipe}: V={mesh.n_vertices} E={mesh.n_edges} F={mesh.n_faces} chi={mesh.euler_characteristic}")
    return EXIT_OK


def cmd_assemble(args, cfg: RunConfig) -> int:
    ctx = _load(args.mesh, cfg)
    op = _operator(ctx, args.op)
    k_path, m_path = write_operator(args.output, op, cfg.as_dict())
    print(f"{op.label}: dim {op.dim}, nnz {op.K.nnz}; wrote {k_path} and {m_path}")
    return EXIT_OK


def cmd_spectrum(args, cfg: RunConfig) -> int:
    ctx = _load(args.mesh, cfg)
    op = _operator(ctx, args.op)
    label = f"{cfg.seed_label}/{op.label}" if cfg.seed_label else op.label
    spec = eig_lowest(op, cfg.count, cfg.tol, label, signed=args.signed, gap_tol=cfg.thresholds.cluster_gap)
    write_spectrum_csv(args.output, spec, cfg.as_dict())
    for i, lam in enumerate(spec.values):
        print(f"{i:3d} {lam: .10g}")
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    stored, rows = read_spectrum_csv(args.spectrum)
    if stored.get("extra", {}).get("op", "yano") != "yano":
        raise InputError("classify needs a spectrum of the yano operator")
    tol = stored.get("tol", cfg.tol)
    cfg = RunConfig([args.mesh], tol, len(rows) or cfg.count, cfg.thresholds, None, stored.get("seed_label", ""), {"op": "yano"})
    ctx = _load(args.mesh, cfg)
    pairs = classify_spectrum(ctx)
    values = np.array([r["lambda"] for r in rows])
    if len(values) != len(pairs) or not np.allclose(sorted(values), sorted(p.value for p in pairs), rtol=1e-6, atol=1e-6 * ctx.lam_scale):
        raise InputError("spectrum file does not match the recomputed spectrum of this mesh")
    out = {
        "manifold": ctx.summary(),
        "eigenforms": [
            {"index": p.index, "lambda": p.value, "cluster": p.cluster, "residual": p.residual, **p.classification.to_dict()}
            for p in pairs
        ],
        "killing_number": killing_number(ctx, pairs),
        "thresholds": cfg.thresholds.as_dict(),
    }
    write_json(args.output, out, cfg.as_dict())
    for p in pairs:
        print(f"{p.index:3d} {p.value: .6f} {p.classification.kind:20s} {','.join(sorted(p.classification.tags))}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    items = []
    for entry in args.suite:
        if entry == "default":
            items.extend(DEFAULT_SUITE)
        elif entry.endswith(".json"):
            items.append(_load(entry, cfg))
        else:
            try:
                items.append(MeshRecipe.parse(entry))
            except ValueError as exc:
                raise InputError(str(exc)) from None
    report = full_report(items, cfg.tol, cfg.count, cfg.thresholds, cfg.seed_label)
    config = cfg.as_dict()
    config["manifolds"] = [str(getattr(i, "name", i)) for i in items]
    write_json(args.output, report.document(config), config)
    for line in report.summary_lines():
        print(line)
    for err in report.errors:
        print(f"error: {err}", file=sys.stderr)
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="eigensolver residual tolerance")
    common.add_argument("-k", "--count", type=int, default=12, help="number of eigenpairs")
    common.add_argument("--seed-label", default="", help="prefix for the deterministic Lanczos start vector")
    common.add_argument("--kernel-band", type=float, default=Thresholds.kernel_band)
    common.add_argument("--class-threshold", type=float, default=Thresholds.class_residual)
    common.add_argument("--equality", type=float, default=Thresholds.equality)

    p = argparse.ArgumentParser(prog="symlap", description=__doc__)
    p.add_argument("--version", action="version", version=f"symlap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a mesh")
    g.add_argument("recipe", help="icosphere:<level>[:<radius>], torus-grid:<m>, hyperbolic-genus2:<depth>[:<scale>]")
    g.add_argument("-o", "--output", required=True)

    a = sub.add_parser("assemble", parents=[common], help="export an operator as Matrix Market")
    a.add_argument("mesh")
    a.add_argument("--op", choices=OPERATORS, required=True)
    a.add_argument("-o", "--output", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="lowest eigenpairs to CSV")
    s.add_argument("mesh")
    s.add_argument("--op", choices=OPERATORS, default="yano")
    s.add_argument("--signed", action="store_true", help="order by lambda instead of |lambda|")
    s.add_argument("-o", "--output", required=True)

    c = sub.add_parser("classify", parents=[common], help="tag the eigenforms of a yano spectrum")
    c.add_argument("mesh")
    c.add_argument("spectrum")
    c.add_argument("-o", "--output", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the theorem suite")
    v.add_argument("--suite", nargs="+", default=["default"], help="'default', mesh JSON files or recipes")
    v.add_argument("-o", "--output", required=True)
    return p


COMMANDS = {"gen": cmd_gen, "assemble": cmd_assemble, "spectrum": cmd_spectrum, "classify": cmd_classify, "verify": cmd_verify}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        th = Thresholds(kernel_band=args.kernel_band, class_residual=args.class_threshold, equality=args.equality)
        extra = {"op": args.op} if hasattr(args, "op") else {}
        cfg = RunConfig([], args.tol, args.count, th, args.output, args.seed_label, extra)
        return COMMANDS[args.command](args, cfg)
    except (InputError, MeshError, ValueError, OSError) as exc:
        print(f"symlap {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SolverError, AssemblyError) as exc:
        print(f"symlap {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
