"""Command-line front end: parameter sweeps, block-scaling
verification, transfer-map computation and perturbation studies.

Exit codes: 0 success, 1 verification/tolerance failure, 2 usage or
configuration error.  All numeric output uses 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import evolve_ed, evolve_ff, family, perturb
from .errors import BlockscaleError
from .qmat import ChainSpec

LAMBDA_TOL = 1e-3
RESIDUAL_TOL = 2e-3


def _fmt(x):
    return f"{float(x):.17g}"


def _threads():
    try:
        return max(1, int(os.environ.get("BLOCKSCALE_THREADS", "1")))
    except ValueError:
        return 1


def _pick_backend(name, n_sites):
    if name == "auto":
        return "ed" if n_sites <= evolve_ed.ED_LIMIT else "ff"
    return name


def _transfer_for(spec, backend):
    if backend == "ed":
        return evolve_ed.transfer_supermatrix(spec)
    return evolve_ff.transfer_supermatrix_ff(spec)


def _family_sidecar(f):
    return {
        "case": f.case_id,
        "n_sites": f.n_sites,
        "lambda0": f.lambda0,
        "lambda1": f.lambda1,
        "lambda2": f.lambda2,
        "transfer_time": f.transfer_time,
        "b_field": f.b_field,
        "c1_max": f.c1_max,
        "c2_max": f.c2_max,
    }


def _write_rows(path, header, rows, fmt):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(payload, indent=1) + "\n")
    else:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")


def cmd_family(args):
    f = family.load_family(args.case, args.n)
    sweep = family.grid_sweep(f, args.grid)
    rows = list(zip(sweep.c1, sweep.c2, sweep.conc_sender, sweep.conc_receiver))
    _write_rows(args.out, ["c1", "c2", "C_S", "C_R"], rows, args.format)
    Path(str(args.out) + ".meta.json").write_text(
        json.dumps(_family_sidecar(f), indent=1) + "\n"
    )
    print(f"wrote {len(rows)} grid points to {args.out}")
    return 0


def _expected_lambdas(f):
    out = {0: f.lambda0}
    if f.lambda1 is not None:
        out[1] = f.lambda1
    if f.lambda2 is not None:
        out[2] = f.lambda2
    return out


def cmd_verify(args):
    f = family.load_family(args.case, args.n)
    backend = _pick_backend(args.backend, f.n_sites)
    transfer = _transfer_for(f.chain_spec, backend)
    report = evolve_ed.verify_block_scaling(f, transfer=transfer)
    expected = _expected_lambdas(f)
    blocks = {}
    ok = True
    for n, lam_hat in report.fitted.items():
        diff = abs(lam_hat - expected[n])
        res = report.residuals[n]
        good = diff <= LAMBDA_TOL and res <= RESIDUAL_TOL
        ok = ok and good
        blocks[str(n)] = {
            "fitted": lam_hat,
            "expected": expected[n],
            "diff": diff,
            "residual": res,
            "ok": good,
        }
    payload = {
        "case": f.case_id,
        "n_sites": f.n_sites,
        "backend": backend,
        "lambda_tol": LAMBDA_TOL,
        "residual_tol": RESIDUAL_TOL,
        "blocks": blocks,
        "ok": ok,
    }
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(payload, indent=1) + "\n")
    for n, blk in sorted(blocks.items()):
        status = "ok" if blk["ok"] else "FAIL"
        print(
            f"block {n}: fitted {blk['fitted']:.6f} expected {blk['expected']:.6f} "
            f"(diff {blk['diff']:.2e}, residual {blk['residual']:.2e}) {status}"
        )
    return 0 if ok else 1


def cmd_transfer(args):
    if args.case:
        f = family.load_family(args.case, args.n)
        spec = f.chain_spec
    else:
        spec = ChainSpec(
            n_sites=args.n,
            b_field=args.b if args.b is not None else 0.0,
            transfer_time=args.t if args.t is not None else 0.0,
        )
    if args.t is not None or args.b is not None:
        spec = ChainSpec(
            n_sites=spec.n_sites,
            coupling=spec.coupling,
            b_field=args.b if args.b is not None else spec.b_field,
            transfer_time=args.t if args.t is not None else spec.transfer_time,
        )
    backend = _pick_backend(args.backend, spec.n_sites)
    transfer = _transfer_for(spec, backend)
    checks = evolve_ed.check_invariants(transfer)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(transfer.to_json() + "\n")
    Path(str(args.out) + ".checks.json").write_text(json.dumps(checks, indent=1) + "\n")
    print(
        f"wrote transfer map ({backend}) for N={spec.n_sites}, "
        f"t={spec.transfer_time}, b={spec.b_field}; invariants ok={checks['ok']}"
    )
    return 0


def _eps_tag(eps):
    return f"{eps:g}".replace(".", "p")


def cmd_perturb(args):
    f = family.load_family(args.case, args.n)
    backend = _pick_backend(args.backend, f.n_sites)
    transfer = _transfer_for(f.chain_spec, backend)
    eps_set = tuple(args.eps) if args.eps else perturb.default_epsilons(f)
    n_samples = args.samples if args.samples else perturb.default_samples(f)
    cfg = perturb.MCStudyConfig(
        family=f,
        epsilon_set=eps_set,
        n_samples=n_samples,
        resolution=args.grid,
        seed=args.seed,
        shared_sigma=args.shared_sigma,
    )
    t0 = time.time()
    result = perturb.mc_mean_concurrence(cfg, transfer, threads=_threads())
    header = [
        "c1",
        "c2",
        "C_S_mean",
        "C_S_stderr",
        "C_R_mean",
        "C_R_stderr",
        "rejections",
    ]
    out = Path(args.out)
    files = []
    for g in result.grids:
        rows = list(
            zip(
                g.c1,
                g.c2,
                g.mean_sender,
                g.stderr_sender,
                g.mean_receiver,
                g.stderr_receiver,
                g.rejections,
            )
        )
        path = out.parent / f"{out.name}_eps{_eps_tag(g.epsilon)}.{args.format}"
        _write_rows(path, header, rows, args.format)
        files.append(str(path))
    manifest = {
        "case": f.case_id,
        "n_sites": f.n_sites,
        "backend": backend,
        "seed": args.seed,
        "n_samples": n_samples,
        "epsilons": list(eps_set),
        "resolution": args.grid,
        "shared_sigma": args.shared_sigma,
        "rejections": {
            _fmt(g.epsilon): int(g.rejections.sum()) for g in result.grids
        },
        "min_accepted": {
            _fmt(g.epsilon): int(g.accepted.min()) for g in result.grids
        },
        "wall_time_s": time.time() - t0,
        "files": files,
    }
    manifest_path = out.parent / f"{out.name}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {len(files)} grids and manifest {manifest_path}")
    return 0


def run_paper_figures(out_dir, grid_1d=201, grid_2d=15, samples=None, seed=12345):
    """Reproduce the data behind all eight figure groups with
    paper-default settings, one directory per figure."""
    out_dir = Path(out_dir)
    figure_cases = {
        "fig1": ("I", "family"),
        "fig2": ("II", "family"),
        "fig3": ("III", "family"),
        "fig4": ("IV", "family"),
        "fig5": ("I", "perturb"),
        "fig6": ("II", "perturb"),
        "fig7": ("III", "perturb"),
        "fig8": ("IV", "perturb"),
    }
    for fig, (case, kind) in figure_cases.items():
        for n in family.CHAIN_LENGTHS:
            f = family.load_family(case, n)
            two_d = f.has_order1 and f.has_order2
            res = grid_2d if two_d else grid_1d
            fig_dir = out_dir / fig
            fig_dir.mkdir(parents=True, exist_ok=True)
            if kind == "family":
                sweep = family.grid_sweep(f, res)
                rows = list(
                    zip(sweep.c1, sweep.c2, sweep.conc_sender, sweep.conc_receiver)
                )
                _write_rows(
                    fig_dir / f"case{case}_N{n}.csv", ["c1", "c2", "C_S", "C_R"], rows, "csv"
                )
                continue
            backend = _pick_backend("auto", n)
            transfer = _transfer_for(f.chain_spec, backend)
            n_samples = samples if samples else perturb.default_samples(f)
            cfg = perturb.MCStudyConfig(
                family=f,
                epsilon_set=(0.0,) + perturb.default_epsilons(f),
                n_samples=n_samples,
                resolution=res,
                seed=seed,
            )
            result = perturb.mc_mean_concurrence(cfg, transfer, threads=_threads())
            for g in result.grids:
                rows = list(
                    zip(
                        g.c1,
                        g.c2,
                        g.mean_sender,
                        g.stderr_sender,
                        g.mean_receiver,
                        g.stderr_receiver,
                        g.rejections,
                    )
                )
                _write_rows(
                    fig_dir / f"case{case}_N{n}_eps{_eps_tag(g.epsilon)}.csv",
                    [
                        "c1",
                        "c2",
                        "C_S_mean",
                        "C_S_stderr",
                        "C_R_mean",
                        "C_R_stderr",
                        "rejections",
                    ],
                    rows,
                    "csv",
                )
            if two_d:
                ext = [
                    {
                        "epsilon": e.epsilon,
                        "side": e.side,
                        "c_min": e.c_min,
                        "c_max": e.c_max,
                        "argmin": e.argmin,
                        "argmax": e.argmax,
                    }
                    for e in perturb.extrema_scan(result)
                ]
                (fig_dir / f"case{case}_N{n}_extrema.json").write_text(
                    json.dumps(ext, indent=1) + "\n"
                )
    print(f"figure data written under {out_dir}")
    return 0


def _add_common(p, with_backend=True):
    p.add_argument("--case", choices=family.CASES, help="family case")
    p.add_argument("--n", type=int, default=6, help="chain length")
    if with_backend:
        p.add_argument("--backend", choices=["ed", "ff", "auto"], default="auto")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser():
    p = argparse.ArgumentParser(
        prog="blockscale",
        description="Block-scaled two-qubit state transfer through XX chains",
    )
    p.add_argument(
        "--paper-figures",
        metavar="DIR",
        help="write the full figure-reproduction dataset into DIR and exit",
    )
    p.add_argument("--config", help="JSON file with default values for all flags")
    sub = p.add_subparsers(dest="command")

    pf = sub.add_parser("family", help="unperturbed concurrence sweep")
    _add_common(pf, with_backend=False)
    pf.add_argument("--grid", type=int, default=200, help="grid resolution")

    pv = sub.add_parser("verify", help="fit block scale factors by evolution")
    _add_common(pv)

    pt = sub.add_parser("transfer", help="compute and serialize the transfer map")
    _add_common(pt)
    pt.add_argument("--t", type=float, default=None, help="transfer time override")
    pt.add_argument("--b", type=float, default=None, help="background field override")

    pp = sub.add_parser("perturb", help="Monte-Carlo perturbation study")
    _add_common(pp)
    pp.add_argument("--grid", type=int, default=25, help="grid resolution")
    pp.add_argument("--eps", type=float, nargs="*", default=None)
    pp.add_argument("--samples", type=int, default=None)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--shared-sigma", action="store_true")
    return p


_DISPATCH = {
    "family": cmd_family,
    "verify": cmd_verify,
    "transfer": cmd_transfer,
    "perturb": cmd_perturb,
}


def _apply_config(args, parser):
    if not args.config:
        return args
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, parser.get_default(attr)):
            setattr(args, attr, value)
    return args


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, parser)
    try:
        if args.paper_figures:
            return run_paper_figures(args.paper_figures)
        if not args.command:
            parser.print_help()
            return 2
        if args.command in ("family", "verify", "perturb") and not args.case:
            parser.error(f"{args.command} requires --case")
        if args.out is None:
            args.out = {
                "family": "family.csv",
                "verify": None,
                "transfer": "transfer.json",
                "perturb": "perturb",
            }[args.command]
        return _DISPATCH[args.command](args)
    except BlockscaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
