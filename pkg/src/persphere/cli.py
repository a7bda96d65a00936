"""``persphere`` command line.

Every command writes into ``--out DIR`` together with one ``manifest.json``
that records the argument vector, resolved parameters and SHA-256 digests of
inputs and outputs; ``persphere replay`` re-runs a manifest and verifies the
digests.  Exit codes: 0 ok, 1 usage, 2 data error, 3 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    METRICS,
    DistanceMatrix,
    average_linkage,
    cut,
    distance_matrix,
    fda_dataset,
    fda_metric_options,
    matrix_correlation,
    pp_dataset,
    pp_metric_options,
    rand_index,
    read_labels,
    write_labels,
)
from .baselines import ImageWeight, image_geometry_for, power_of_ten_pixel
from .figures import FIGURES
from .generators import FDA_SCENARIOS, PP_FAMILIES, PpConfig
from .homology import write_point_cloud
from .measures import parse_weight_scheme, read_diagram, reweight, write_diagram
from .selftest import run_selftest
from .sphere import SphereGrid, sample_sphere, write_sphere_function

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SELFTEST = 0, 1, 2, 3
MANIFEST = "manifest.json"
IMAGE_WEIGHTS = ("pers", "pers2", "pers4", "pers8", "flat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# argument types

def _grid(text):
    try:
        g = SphereGrid.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like LATxLON, got {text!r}") from None
    return g


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _image_weight(text):
    if text in IMAGE_WEIGHTS:
        return text
    if text.startswith("arctan:"):
        try:
            w = ImageWeight.parse(text)
        except ValueError:
            w = None
        if w is not None and w.scale > 0:
            return text
    raise argparse.ArgumentTypeError(f"weight must be one of {', '.join(IMAGE_WEIGHTS)} or arctan:SCALE")


def _reweight(text):
    try:
        parse_weight_scheme(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("value must be positive")
    return v


# --------------------------------------------------------------------------
# output helpers

@contextmanager
def _atomic(path: Path):
    """Yield a temporary sibling path and move it into place on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_text(path: Path, text: str) -> None:
    with _atomic(path) as tmp:
        tmp.write_text(text, encoding="utf-8")


def _write_with(path: Path, writer, obj) -> None:
    with _atomic(path) as tmp:
        writer(obj, tmp)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(x, ".17g") if isinstance(x, (float, np.floating)) else x for x in r])
    _write_text(path, buf.getvalue())


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out: Path, args, argv, inputs=(), results=None) -> None:
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != MANIFEST and not p.name.startswith("."))
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    params = {k: (str(v) if isinstance(v, (SphereGrid, Path)) else v) for k, v in params.items()}
    manifest = {
        "tool": "persphere",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "inputs": {str(Path(p).resolve()): _sha256(p) for p in inputs},
        "outputs": {str(p.relative_to(out)): _sha256(p) for p in files},
        "results": results or {},
    }
    _write_text(out / MANIFEST, json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


# --------------------------------------------------------------------------
# commands

def cmd_sphere(args, argv):
    mu = read_diagram(args.diagram)
    f = sample_sphere(mu, args.grid)
    out = Path(args.out)
    _write_with(out / (Path(args.diagram).stem + ".sphere.csv"), write_sphere_function, f)
    _write_manifest(out, args, argv, inputs=[args.diagram])
    return EXIT_OK


def _image_kwargs(measures, args):
    pts = [m.points for m in measures if len(m)]
    if args.pixel is not None:
        pixel = args.pixel
    elif pts:
        allp = np.concatenate(pts)
        side = float(min(np.ptp(allp[:, 0]), np.ptp(allp[:, 1])))
        pixel = power_of_ten_pixel(side if side > 0 else 1.0)
    else:
        pixel = 1.0
    sigma = args.sigma if args.sigma is not None else 10.0 * pixel
    geom = image_geometry_for(measures, pixel, sigma, anchor=args.anchor)
    return dict(image_geometry=geom, image_weight=args.weight, image_anchor=args.anchor)


def cmd_dist(args, argv):
    measures = [read_diagram(p) for p in args.diagrams]
    if args.reweight:
        measures = [reweight(m, args.reweight) for m in measures]
    kw = _image_kwargs(measures, args) if args.metric == "image-L2" else {}
    D = distance_matrix(measures, args.metric, args.grid, seed=args.seed, n_dirs=args.n_dirs,
                        workers=args.workers, **kw)
    out = Path(args.out)
    _write_with(out / "distances.csv", DistanceMatrix.write, D)
    _write_text(out / "files.txt", "".join(f"{p}\n" for p in args.diagrams))
    _write_manifest(out, args, argv, inputs=args.diagrams)
    return EXIT_OK


def cmd_figures(args, argv):
    fn = FIGURES[args.name]
    if args.name in ("decay", "deletion"):
        cols = fn(grid=args.grid)
    elif args.name == "pi-saturation":
        cols = fn(sigma=args.sigma or 1.0)
    else:
        cols = fn()
    out = Path(args.out)
    names = list(cols)
    _write_csv(out / f"{args.name}.csv", names, zip(*(cols[c] for c in names)))
    _write_manifest(out, args, argv)
    return EXIT_OK


def _analyze(out, diagrams, labels, k, options, seed, grid, tag=""):
    """Distance matrices for every metric, UPGMA cut at ``k`` and Rand indices."""
    results = {}
    mats = {}
    for metric in METRICS:
        items, kw = options(metric)
        D = distance_matrix(items, metric, grid, seed=seed, **kw)
        mats[metric] = D
        _write_with(out / "matrices" / f"{tag}{metric}.csv", DistanceMatrix.write, D)
        pred = cut(average_linkage(D), k)
        _write_with(out / "labels" / f"{tag}{metric}.csv", write_labels, pred)
        results[f"{tag}rand:{metric}"] = rand_index(labels, pred)
    for metric in METRICS[1:]:
        try:
            results[f"{tag}corr:pot1:{metric}"] = matrix_correlation(mats["pot1"], mats[metric])
        except ValueError:
            results[f"{tag}corr:pot1:{metric}"] = None
    return results


def cmd_simulate(args, argv):
    out = Path(args.out)
    results = {}
    if args.model.startswith("fda-"):
        cfg = FDA_SCENARIOS[args.model]
        if args.sigma is not None:
            cfg = replace(cfg, sigma=args.sigma)
        if args.replicates is not None:
            cfg = replace(cfg, replicates=args.replicates)
        diagrams, labels, records = fda_dataset(cfg, args.seed)
        rows = []
        for dgm, rec in zip(diagrams, records):
            name = f"diagrams/class{rec['class']}_rep{rec['replicate']:03d}.csv"
            _write_with(out / name, write_diagram, dgm)
            rows.append([args.seed, rec["stream"], rec["class"], rec["replicate"], rec["n"], cfg.sigma, name])
        _write_csv(out / "replicates.csv", ["seed", "stream", "class", "replicate", "n", "sigma", "file"], rows)
        _write_with(out / "labels.csv", write_labels, labels)
        config = cfg.to_dict()
        if args.analyze:
            results = _analyze(out, diagrams, labels, 2, lambda m: fda_metric_options(diagrams, cfg, m),
                               args.seed, args.grid)
    else:
        cfg = PpConfig(n=args.n if args.n is not None else 200, cap_mult=args.cap)
        families = tuple(PP_FAMILIES) if args.model == "pp" else (args.model,)
        per = args.replicates if args.replicates is not None else 30
        clouds, h0, h1, labels, records = pp_dataset(cfg, args.seed, per, families)
        rows = []
        for pc, d0, d1, rec in zip(clouds, h0, h1, records):
            stem = f"{rec['family']}_rep{rec['replicate']:03d}.csv"
            _write_with(out / "clouds" / stem, write_point_cloud, pc)
            _write_with(out / "h0" / stem, write_diagram, d0)
            _write_with(out / "h1" / stem, write_diagram, d1)
            rows.append([args.seed, rec["stream"], rec["family"], rec["replicate"], cfg.n, cfg.L, f"clouds/{stem}"])
        _write_csv(out / "replicates.csv", ["seed", "stream", "class", "replicate", "n", "L", "file"], rows)
        _write_with(out / "labels.csv", write_labels, labels)
        config = {**cfg.to_dict(), "families": list(families)}
        if args.analyze and len(families) > 1:
            for deg, dg in ((0, h0), (1, h1)):
                results.update(_analyze(out, dg, labels, len(families),
                                        lambda m, dg=dg, deg=deg: pp_metric_options(dg, cfg, m, deg, args.h0_anchor),
                                        args.seed, args.grid, tag=f"h{deg}-"))
    _write_text(out / "config.json", json.dumps(config, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, args, argv, results=results)
    for key, val in sorted(results.items()):
        print(f"{key}\t{val}")
    return EXIT_OK


def cmd_cluster(args, argv):
    D = DistanceMatrix.read(args.matrix)
    if not 1 <= args.k <= D.n:
        raise UsageError(f"k must lie in [1, {D.n}]")
    pred = cut(average_linkage(D), args.k)
    out = Path(args.out)
    _write_with(out / "labels.csv", write_labels, pred)
    results = {}
    inputs = [args.matrix]
    if args.labels:
        truth = read_labels(args.labels)
        results["rand_index"] = rand_index(truth, pred)
        inputs.append(args.labels)
        print(f"rand_index\t{results['rand_index']:.6f}")
    _write_manifest(out, args, argv, inputs=inputs, results=results)
    return EXIT_OK


def cmd_selftest(args, argv):
    report = run_selftest(mutate=args.mutate)
    for name, ok, detail in report:
        print(f"{'PASS' if ok else 'FAIL'}  {name:32s} {detail}")
    n_fail = sum(not ok for _, ok, _ in report)
    print(f"{len(report) - n_fail}/{len(report)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_SELFTEST


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    old_argv = list(manifest["argv"])
    out = Path(args.out) if args.out else Path(args.manifest).parent
    if "--out" in old_argv:
        old_argv[old_argv.index("--out") + 1] = str(out)
    else:
        old_argv += ["--out", str(out)]
    code = main(old_argv)
    if code != EXIT_OK:
        return code
    fresh = json.loads((out / MANIFEST).read_text(encoding="utf-8"))["outputs"]
    mismatched = [k for k, v in manifest["outputs"].items() if fresh.get(k) != v]
    if mismatched or set(fresh) != set(manifest["outputs"]):
        print("replay differs: " + ", ".join(sorted(mismatched) or ["file set"]), file=sys.stderr)
        return EXIT_DATA
    print(f"reproduced {len(fresh)} output files")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="persphere", description="Persistence spheres, partial transport and baselines.")
    p.add_argument("--version", action="version", version=f"persphere {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid=True, seed=False):
        sp.add_argument("--out", required=True, help="output directory")
        if grid:
            sp.add_argument("--grid", type=_grid, default=SphereGrid(), help="sphere grid LATxLON (default 100x200)")
        if seed:
            sp.add_argument("--seed", type=_seed, default=0, help="root seed (unsigned 64-bit)")

    sp = sub.add_parser("sphere", help="sample S(mu) on the polar grid")
    sp.add_argument("diagram")
    common(sp)
    sp.set_defaults(func=cmd_sphere)

    sp = sub.add_parser("dist", help="pairwise distance matrix between diagram files")
    sp.add_argument("diagrams", nargs="+")
    sp.add_argument("--metric", choices=METRICS, required=True)
    sp.add_argument("--n-dirs", type=int, default=50, help="sliced Wasserstein directions")
    sp.add_argument("--sigma", type=_positive, help="image bandwidth (default 10 pixels)")
    sp.add_argument("--pixel", type=_positive, help="image pixel size (default: 1/500 of the data box, power of ten)")
    sp.add_argument("--weight", type=_image_weight, default="flat", help="image weight scheme")
    sp.add_argument("--anchor", type=float, help="add a diagonal anchor atom at (A, A) to every image")
    sp.add_argument("--reweight", type=_reweight, help="reweight measures before any metric (pers2, arctan:S, ...)")
    sp.add_argument("--workers", type=int, default=1)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_dist, seed=None)

    sp = sub.add_parser("figures", help="curve data for the drift experiments")
    sp.add_argument("name", choices=sorted(FIGURES))
    sp.add_argument("--sigma", type=_positive, help="image bandwidth for pi-saturation (default 1)")
    common(sp)
    sp.set_defaults(func=cmd_figures)

    sp = sub.add_parser("simulate", help="generate a seeded dataset and optionally analyse it")
    sp.add_argument("model", choices=[*FDA_SCENARIOS, *PP_FAMILIES, "pp"])
    sp.add_argument("--replicates", type=int, help="replicates per class (FDA: 50, point processes: 30)")
    sp.add_argument("--sigma", type=float, help="FDA noise level (default 10)")
    sp.add_argument("--n", type=int, help="points per cloud (default 200)")
    sp.add_argument("--cap", type=_positive, default=7.0, help="Rips diameter cap in units of s")
    sp.add_argument("--h0-anchor", action="store_true", help="add the (s/10, s/10) anchor to H0 images")
    sp.add_argument("--analyze", action="store_true", help="also compute matrices, clusters and Rand indices")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("cluster", help="average-linkage clustering of a distance matrix")
    sp.add_argument("matrix")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--labels", help="true labels, one integer per line")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("selftest", help="run the invariant suite")
    sp.add_argument("--mutate", action="store_true", help="corrupt the deletion cost; checks must fail")
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    sp.add_argument("manifest")
    sp.add_argument("--out", help="directory for the re-run (default: the manifest's directory)")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "simulate":
            if args.replicates is not None and args.replicates < 1:
                raise UsageError("--replicates must be at least 1")
            if args.n is not None and args.n < 1:
                raise UsageError("--n must be at least 1")
        return args.func(args, argv)
    except UsageError as exc:
        print(f"persphere: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"persphere: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
