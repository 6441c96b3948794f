"""Command-line driver: encode / simulate / evaluate / info / serve / fixture."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import baselines as bl
from . import container, encoder, evaluation, fixtures, ldpc, service
from .geom import Direction, PlaneImage, ViewportSpec
from .incremental import MODE_PRACTICAL, MODE_THEORETICAL
from .ordering import ORDER_GREEDY_COUNT, ORDER_GREEDY_RATE, ORDER_SNAKE

DEFAULT_QPS = (22, 27, 32, 37, 42)

_ORDER_FLAGS = {
    "snake": ORDER_SNAKE,
    "greedycount": ORDER_GREEDY_COUNT,
    "greedyrate": ORDER_GREEDY_RATE,
}


def _spec_args(p: argparse.ArgumentParser):
    p.add_argument("--fov", type=float, default=90.0,
                   help="field of view in degrees (default 90)")
    p.add_argument("--vp", type=int, nargs=2, default=(256, 256),
                   metavar=("W", "H"), help="viewport raster (default 256 256)")


def _spec_from(args, direction=None) -> ViewportSpec:
    fov = math.radians(args.fov)
    return ViewportSpec(direction or Direction(0.0, 0.0), fov, fov,
                        args.vp[0], args.vp[1])


def cmd_encode(args) -> int:
    img = PlaneImage.load(args.image)
    seed = int(os.environ.get("OIC_SEED", ldpc.DEFAULT_SEED))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    for qp in args.qp:
        enc = encoder.encode_image(
            img, qp=qp, mode=args.mode, block_size=args.block_size, seed=seed,
            placement_spec=_spec_from(args), strategy=args.strategy)
        path = out_dir / f"{stem}_qp{qp}_{args.mode}.oic"
        container.save(enc, path)
        rep = container.storage_report(enc)
        print(f"{path}: S = {rep.total_bits} bits "
              f"({rep.total_bytes / 1024:.1f} KiB), "
              f"|A| = {len(enc.access.blocks)}, P = {enc.n_planes}")
    return 0


def cmd_simulate(args) -> int:
    enc = container.load(args.container)
    trace = container.load_trace(args.trace)
    original = PlaneImage.load(args.image) if args.image else None
    rows = service.simulate(
        enc, trace, fov=math.radians(args.fov), vp_dims=tuple(args.vp),
        baseline=args.baseline, order_algorithm=_ORDER_FLAGS[args.order],
        original=original)
    service.write_log(args.out, rows)
    total = sum(r["bits"] for r in rows)
    print(f"{args.out}: {len(rows)} requests, {total} bits total")
    return 0


def _method_storage_bytes(method: str, enc) -> float:
    if method == "ours":
        return container.storage_report(enc).total_bytes
    if method == "es":
        return bl.es_encode(enc).storage_bits / 8.0
    layout = bl.layout_from_tag(enc.grid, method)
    return bl.tile_encode(enc, layout).storage_bits / 8.0


def cmd_evaluate(args) -> int:
    with open(args.manifest) as fh:
        entries = json.load(fh)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_method: dict = {}
    for e in entries:
        enc = container.load(e["container"])
        log = service.read_log(e["log"])
        if not log:
            raise SystemExit(f"empty log {e['log']}")
        # expectation over requests: mean across all (user, request) pairs
        r_bits = sum(r["bits"] for r in log) / len(log)
        psnr = sum(r["psnr_db"] for r in log) / len(log)
        by_method.setdefault(e["method"], []).append(evaluation.SRDPoint(
            qp=int(e["qp"]),
            s_bytes=_method_storage_bytes(e["method"], enc),
            r_bytes=r_bits / 8.0,
            psnr_db=psnr))
    curves = {m: evaluation.SRDCurve(m, pts) for m, pts in by_method.items()}
    evaluation.write_curves(out_dir / "curves.csv", curves.values())

    ref_name = args.ref if args.ref in curves else next(iter(curves))
    ref = curves[ref_name]
    bd_rows = []
    for name, curve in curves.items():
        if name == ref_name:
            continue
        bd_rows.append((ref_name, name, "R", None,
                        evaluation.bd_delta(ref, curve, "R").delta_pct))
        bd_rows.append((ref_name, name, "S", None,
                        evaluation.bd_delta(ref, curve, "S").delta_pct))
        for lam in args.lam:
            bd_rows.append((ref_name, name, "weighted", lam,
                            evaluation.bd_delta(ref, curve, "weighted",
                                                lam=lam).delta_pct))
    evaluation.write_bd_report(out_dir / "bd_report.csv", bd_rows)

    import csv

    with open(out_dir / "iso_report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "axis", "value", "qp", "S_bytes",
                         "R_bytes", "psnr_db"])
        for value in args.iso_psnr:
            for name, curve in curves.items():
                try:
                    pt = evaluation.iso_points(curve, "D", value)
                except ValueError:
                    continue
                writer.writerow([name, "D", value, f"{pt.qp:.2f}",
                                 f"{pt.s_bytes:.3f}", f"{pt.r_bytes:.3f}",
                                 f"{pt.psnr_db:.6f}"])

    # per-request plot data for accumulated-rate and usefulness figures
    with open(out_dir / "accumulated_rate.csv", "w", newline="") as fh_a, \
            open(out_dir / "usefulness.csv", "w", newline="") as fh_u:
        wa = csv.writer(fh_a)
        wu = csv.writer(fh_u)
        wa.writerow(["method", "qp", "user", "request_idx", "accum_bits"])
        wu.writerow(["method", "qp", "user", "request_idx", "usefulness"])
        for e in entries:
            for row in service.read_log(e["log"]):
                wa.writerow([e["method"], e["qp"], row["user"],
                             row["request_idx"], row["accum_bits"]])
                wu.writerow([e["method"], e["qp"], row["user"],
                             row["request_idx"], f"{row['usefulness']:.9f}"])
    print(f"wrote {out_dir}/curves.csv, bd_report.csv, iso_report.csv, "
          f"accumulated_rate.csv, usefulness.csv")
    return 0


def cmd_info(args) -> int:
    enc = container.load(args.container)
    rep = container.storage_report(enc)
    print(f"container: {args.container}")
    print(f"  {enc.width}x{enc.height}, block {enc.block_size}, qp {enc.qp}, "
          f"mode {enc.mode}, planes {enc.n_planes}, seed {enc.seed}")
    print(f"  access blocks ({enc.access.strategy}): {list(enc.access.blocks)}")
    print(f"  S = {rep.total_bits} bits ({rep.total_bytes/1024:.1f} KiB)")
    print(f"    headers    {rep.header_bits}")
    print(f"    payload    {rep.payload_bits}")
    print(f"    completion {rep.completion_bits}")
    if rep.transport_excess_bits:
        print(f"  lossless transport excess (not charged): "
              f"{rep.transport_excess_bits} bits")
    return 0


def cmd_serve(args) -> int:
    enc = container.load(args.container)
    original = PlaneImage.load(args.image) if args.image else None
    host, _, port = args.bind.rpartition(":")
    server = service.serve(enc, (host or "127.0.0.1", int(port)), original,
                           _ORDER_FLAGS[args.order])
    print(f"serving {args.container} on {args.bind} "
          f"(length-prefixed JSON / WebSocket)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def cmd_fixture(args) -> int:
    if args.image:
        fixtures.synthetic_equirect(args.width, args.height,
                                    seed=args.seed).save(args.image)
        print(f"wrote {args.image} ({args.width}x{args.height})")
    if args.trace:
        rows = fixtures.synthetic_trace(args.users, args.requests,
                                        seed=args.seed + 1)
        fixtures.write_trace(args.trace, rows)
        print(f"wrote {args.trace} ({args.users} users x {args.requests})")
    if not args.image and not args.trace:
        print("nothing to do: pass --image and/or --trace", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oic360",
        description="Interactive 360-degree image codec with block-level "
                    "random access")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode an equirectangular image")
    p.add_argument("image")
    p.add_argument("--qp", type=int, action="append", required=True)
    p.add_argument("--mode", choices=(MODE_THEORETICAL, MODE_PRACTICAL),
                   default=MODE_THEORETICAL)
    p.add_argument("--strategy", choices=("fixed", "content"), default="fixed")
    p.add_argument("--block-size", type=int, default=32)
    p.add_argument("--out-dir", default=".")
    _spec_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("simulate", help="replay a head trace against a container")
    p.add_argument("container")
    p.add_argument("--trace", required=True)
    p.add_argument("--image", help="original image for distortion metrics")
    p.add_argument("--order", choices=tuple(_ORDER_FLAGS), default="snake")
    p.add_argument("--baseline", default="ours",
                   help="ours | es | t1x1 | t2x2 | ... | topt")
    p.add_argument("--out", default="log.csv")
    _spec_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="S-R-D curves, BD and iso reports")
    p.add_argument("manifest", help="JSON list of "
                   "{method, qp, container, log}")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--ref", default="t1x1")
    p.add_argument("--lambda", dest="lam", type=float, action="append",
                   default=None)
    p.add_argument("--iso-psnr", type=float, action="append", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("info", help="print container header and storage")
    p.add_argument("container")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("serve", help="run the interactive session service")
    p.add_argument("container")
    p.add_argument("--bind", default="127.0.0.1:8360")
    p.add_argument("--image", help="original image for distortion metrics")
    p.add_argument("--order", choices=tuple(_ORDER_FLAGS), default="snake")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixture", help="write synthetic image/trace fixtures")
    p.add_argument("--image")
    p.add_argument("--trace")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--users", type=int, default=3)
    p.add_argument("--requests", type=int, default=10)
    p.set_defaults(func=cmd_fixture)

    args = parser.parse_args(argv)
    if getattr(args, "lam", None) is None and args.command == "evaluate":
        args.lam = list(evaluation.DEFAULT_LAMBDAS)
    if getattr(args, "iso_psnr", None) is None and args.command == "evaluate":
        args.iso_psnr = [37.0]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
