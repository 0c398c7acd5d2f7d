"""Command-line interface: ``hitrun {sample,spectra,ginibre,density,test,theta}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from decimal import Decimal

import numpy as np

from . import io
from . import quantum as qc
from .analysis import bounds, densities, spectra, stats
from .bodies import body_from_descriptor
from .errors import HitRunError, NumericalError, ValidationError
from .kernels import BACKEND
from .sampler import (
    GINIBRE_STREAM,
    ChainConfig,
    _iter_chains,
    _is_matrix_body,
    derived_rng,
    load_checkpoint,
    save_checkpoint,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _body_from_args(args):
    kind = args.body
    if kind in ("ball", "cube", "square", "disk", "circle", "interval"):
        desc = {"kind": kind}
        if args.dim is not None:
            desc["d"] = args.dim
        elif kind in ("ball", "cube"):
            raise ValidationError(f"--body {kind} needs --dim")
    elif kind in ("simplex", "quantum"):
        if args.n is None:
            raise ValidationError(f"--body {kind} needs --n")
        desc = {"kind": kind, "N": args.n}
    elif kind == "ppt":
        if args.k is None:
            raise ValidationError("--body ppt needs --k")
        desc = {"kind": kind, "K": args.k}
    else:
        raise ValidationError(f"unknown body {kind!r}")
    return body_from_descriptor(desc)


def _add_body_flags(p, required=True):
    p.add_argument("--body", required=required,
                   choices=["ball", "cube", "simplex", "quantum", "ppt", "square", "disk", "circle", "interval"])
    p.add_argument("--dim", type=int, help="dimension d (ball, cube)")
    p.add_argument("--n", type=int, help="N (simplex: number of outcomes; quantum: matrix size)")
    p.add_argument("--k", type=int, help="local dimension K (ppt)")


def _open_out(path, mode="w"):
    try:
        return open(path, mode, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None


def _truncate_lines(path, nlines):
    with open(path, "r+", encoding="utf-8") as fh:
        for _ in range(nlines):
            if not fh.readline():
                raise ValidationError(f"{path} is shorter than the checkpoint says")
        fh.truncate(fh.tell())


# ---------------------------------------------------------------- sample

def cmd_sample(args, argv):
    body = _body_from_args(args)
    start = tuple(float(v) for v in args.start.split(",")) if args.start else None
    config = ChainConfig(args.steps, args.burnin, args.thin, args.seed, start).resolve(body)
    chains = args.chains
    if chains < 1:
        raise ValidationError("--chains must be >= 1")
    matrix = _is_matrix_body(body)
    if args.checkpoint_every and chains > 1 and not matrix:
        raise ValidationError("checkpointing several Euclidean chains is not supported; use --chains 1")
    out = args.out
    parts = [f"{out}.part{c}" for c in range(chains)]
    ck_path = f"{out}.checkpoint.json"
    resume = load_checkpoint(args.resume) if args.resume else None
    rows = [0] * chains
    if resume is not None:
        rows = list(resume.get("rows", [0] * chains))
        for p, n in zip(parts, rows):
            _truncate_lines(p, n)
    manifest = io.RunManifest(command=list(argv), body=body.descriptor(), config=config.to_dict(), seed=config.seed,
                              started=_now())
    handles = [_open_out(p, "a" if resume is not None else "w") for p in parts]

    def emit(c, block):
        rows_ = io.encode_matrices(block) if matrix else block
        w = csv.writer(handles[c], lineterminator="\n")
        for r in rows_:
            w.writerow([repr(float(v)) for v in r])
        rows[c] += len(rows_)

    def make_saver(first):
        def save(ck):
            for h in handles:
                h.flush()
            ck["rows"] = rows if matrix else [rows[first]]
            save_checkpoint(ck_path, ck)
        return save

    try:
        if matrix:
            for block in _iter_chains(body, config, chains, 0, resume, args.checkpoint_every, make_saver(0)):
                for c in range(chains):
                    emit(c, block[:, c])
        else:
            for c in range(chains):
                res = resume if (resume is not None and c == 0) else None
                for block in _iter_chains(body, config, 1, c, res, args.checkpoint_every, make_saver(c)):
                    emit(c, block[:, 0])
    finally:
        for h in handles:
            h.close()
    header = io.matrix_header(body.N) if matrix else io.vector_header(body.dim)
    with _open_out(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        idx = 0
        for p in parts:
            with open(p, encoding="utf-8") as src:
                for line in src:
                    fh.write(f"{idx},{line}")
                    idx += 1
    for p in parts:
        os.remove(p)
    if os.path.exists(ck_path):
        os.remove(ck_path)
    manifest.finished = _now()
    manifest.add_output(out)
    manifest.extra = {
        "chains": chains,
        "retained": idx,
        "backend": BACKEND,
        "burn_in_is_default": args.burnin is None,
        "sampling_note": "burn-in and thinning are repository choices; default burn-in is ceil(10 d), thin 1",
    }
    manifest.write(io.manifest_path(out))
    print(f"wrote {idx} samples to {out}", file=sys.stderr)


# ---------------------------------------------------------------- spectra

def cmd_spectra(args, argv):
    f = io.read_samples_csv(args.input)
    if f.kind != "matrix":
        raise ValidationError(f"{args.input} does not hold density matrices")
    shape = None
    if args.k is not None:
        shape = qc.BipartiteShape(args.k)
        if shape.N != f.N:
            raise ValidationError(f"--k {args.k} does not match matrices of size {f.N}")
    elif args.transpose == "partial":
        shape = qc.BipartiteShape.from_dim(f.N)
    transform = "partialTranspose" if args.transpose == "partial" else "identity"
    sample = spectra.spectral_statistics(f.matrices, rescale=args.rescale, transform=transform, shape=shape)
    try:
        io.write_spectra_csv(args.out, sample.values)
    except OSError as exc:
        raise ValidationError(f"cannot write {args.out}: {exc.strerror}") from None
    manifest = io.RunManifest(command=list(argv), started=_now(), finished=_now())
    manifest.extra = {"input": os.path.basename(args.input), "input_sha256": io.sha256_file(args.input),
                      "N": f.N, "states": sample.states, "transpose": args.transpose, "rescale": args.rescale}
    manifest.add_output(args.out)
    manifest.write(io.manifest_path(args.out))
    print(f"wrote {sample.values.size} eigenvalues of {sample.states} states to {args.out}", file=sys.stderr)


# ---------------------------------------------------------------- ginibre

def ginibre_batch(n, samples, seed, filt="all", shape=None, batch=8192):
    """Hilbert-Schmidt random states, optionally keeping only PPT or NPT ones.

    Returns ``(states, draws)``; ``samples`` counts draws, not accepted states.
    """
    rng = derived_rng(seed, GINIBRE_STREAM)
    kept = []
    left = samples
    while left > 0:
        m = min(batch, left)
        rho = qc.wishart_state(qc.ginibre_sample(n, rng, size=m))
        if filt != "all":
            mask = spectra.ppt_mask(rho, shape)
            rho = rho[mask if filt == "ppt" else ~mask]
        kept.append(rho)
        left -= m
    states = np.concatenate(kept) if kept else np.empty((0, n, n), dtype=complex)
    return states, samples


def cmd_ginibre(args, argv):
    if args.samples < 0:
        raise ValidationError("--samples must be >= 0")
    shape = None
    if args.filter != "all":
        if args.k is None:
            shape = qc.BipartiteShape.from_dim(args.n)
        else:
            shape = qc.BipartiteShape(args.k)
            if shape.N != args.n:
                raise ValidationError(f"--k {args.k} does not match --n {args.n}")
    states, draws = ginibre_batch(args.n, args.samples, args.seed, args.filter, shape)
    try:
        io.write_samples_csv(args.out, states, kind="matrix")
    except OSError as exc:
        raise ValidationError(f"cannot write {args.out}: {exc.strerror}") from None
    frac = len(states) / draws if draws else math.nan
    manifest = io.RunManifest(command=list(argv), seed=args.seed, started=_now(), finished=_now())
    manifest.extra = {"n": args.n, "draws": draws, "kept": len(states), "filter": args.filter,
                      "acceptance_fraction": None if math.isnan(frac) else frac}
    manifest.add_output(args.out)
    manifest.write(io.manifest_path(args.out))
    print(json.dumps({"draws": draws, "kept": len(states), "acceptance_fraction": manifest.extra["acceptance_fraction"]}))


# ---------------------------------------------------------------- density

def _grid(spec):
    try:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise ValidationError(f"--grid must look like min:max:count, got {spec!r}") from None
    if count < 1 or hi < lo:
        raise ValidationError("--grid needs count >= 1 and max >= min")
    return np.linspace(lo, hi, count)


def cmd_density(args, argv):
    law = args.law
    if law == "hz":
        L = densities.dm_edge(args.z)
        x = _grid(args.grid) if args.grid else np.linspace(0.0, L, 201)
        y = densities.dm_wall_density(x, args.z)
        print(f"# support edge L({args.z}) = {L!r}", file=sys.stderr)
    elif law == "pn":
        if args.n is None:
            raise ValidationError("--law pn needs --n")
        x = _grid(args.grid) if args.grid else np.linspace(0.0, float(args.n), 401)
        if args.coefficients:
            with open(args.coefficients, encoding="utf-8") as fh:
                table = json.load(fh)
            y = densities.finite_n_density(x, args.n, "coefficients", coefficients=table)
        else:
            y = densities.finite_n_density(x, args.n, samples=args.samples, seed=args.seed)
    else:
        f, (lo, hi) = densities.LAWS[law]
        x = _grid(args.grid) if args.grid else np.linspace(lo, hi, 401)
        y = f(x)
    y = np.atleast_1d(y)
    if args.out and args.out != "-":
        with _open_out(args.out) as fh:
            io.write_curve_csv(fh, x, y)
    else:
        io.write_curve_csv(sys.stdout, x, y)


# ---------------------------------------------------------------- test

def cmd_test(args, argv):
    if args.test == "chi2-uniform":
        f = io.read_samples_csv(args.input)
        if f.kind == "matrix" or f.data.shape[1] != 2:
            raise ValidationError("chi2-uniform needs a file of 2-D points")
        res = stats.chi2_uniformity_test(f.data, args.bin_side, args.confidence, args.region)
        report = {"test": "chi2-uniform", "region": args.region, "binSide": args.bin_side,
                  "confidence": args.confidence, **res.to_dict()}
    else:
        if not args.input2:
            raise ValidationError("ks needs --in2")
        a = io.read_column(args.input, args.column)
        b = io.read_column(args.input2, args.column)
        res = stats.ks_two_sample(a, b)
        report = {"test": "ks", **res.to_dict(), "reject": bool(res.pvalue < 1.0 - args.confidence),
                  "confidence": args.confidence}
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out and args.out != "-":
        with _open_out(args.out) as fh:
            fh.write(text + "\n")
    print(text)


# ---------------------------------------------------------------- theta

def cmd_theta(args, argv):
    if args.body:
        body = _body_from_args(args)
        r, R, kappa = body.radii()
        d = body.dim
        source = body.descriptor()
    else:
        if args.r is None or args.R is None or args.d is None:
            raise ValidationError("give --r, --R and --d, or --body")
        r, R, d = args.r, args.R, args.d
        kappa = r / R
        source = None
    lt = bounds.log_theta(r, R, d)
    th = bounds.theta_bound(r, R, d)
    report = {"r": r, "R": R, "d": d, "kappa": kappa, "log_theta": lt, "theta": th,
              "theta_decimal": str(bounds.theta_decimal(r, R, d, 20))}
    if source:
        report["body"] = source
    if args.n_steps is not None:
        if args.n_steps < 0:
            raise ValidationError("--n-steps must be >= 0")
        report["n_steps"] = args.n_steps
        if th > 0:
            report["tv_bound"] = bounds.tv_bound(th, args.n_steps)
            ltv = bounds.log_tv_bound(th, args.n_steps)
        else:
            ltv = -args.n_steps * math.exp(lt)  # log1p(-theta) ~ -theta
        report["log_tv_bound"] = ltv if math.isfinite(ltv) else None
    if args.eps is not None:
        n = bounds.steps_for_tv(th, args.eps, log_theta_value=lt)
        report["steps_for_eps"] = n if n < 2**53 else f"{Decimal(n):.6e}"
        report["eps"] = args.eps
    print(json.dumps(report, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hitrun", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="run hit-and-run chains and write samples as CSV")
    _add_body_flags(s)
    s.add_argument("--steps", type=int, required=True, help="iterations per chain, burn-in included")
    s.add_argument("--burnin", type=int, default=None, help="default ceil(10 d)")
    s.add_argument("--thin", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--chains", type=int, default=1)
    s.add_argument("--start", help="comma-separated start coordinates (default: body center)")
    s.add_argument("--out", required=True)
    s.add_argument("--checkpoint-every", type=int, default=None, help="write OUT.checkpoint.json every that many steps")
    s.add_argument("--resume", help="continue from a checkpoint file")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("spectra", help="eigenvalues of sampled states")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--transpose", choices=["none", "partial"], default="none")
    s.add_argument("--rescale", choices=["none", "byN"], default="byN")
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_spectra)

    s = sub.add_parser("ginibre", help="Hilbert-Schmidt random states from Ginibre matrices")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", type=int, required=True, help="number of draws")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--filter", choices=["all", "ppt", "npt"], default="all")
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_ginibre)

    s = sub.add_parser("density", help="tabulate a level-density law as CSV")
    s.add_argument("--law", choices=["mp", "ssc", "g", "hz", "pn"], required=True)
    s.add_argument("--z", type=float, default=0.0)
    s.add_argument("--n", type=int)
    s.add_argument("--grid", help="min:max:count")
    s.add_argument("--samples", type=int, default=100_000, help="Monte Carlo states for --law pn")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--coefficients", help="JSON table {m: a_m} for --law pn")
    s.add_argument("--out")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("test", help="goodness-of-fit tests")
    s.add_argument("--test", choices=["chi2-uniform", "ks"], required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--in2", dest="input2")
    s.add_argument("--column")
    s.add_argument("--region", choices=["square", "disk"], default="square")
    s.add_argument("--bin-side", type=float, default=0.05)
    s.add_argument("--confidence", type=float, default=0.999)
    s.add_argument("--out")
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("theta", help="convergence-rate bound")
    _add_body_flags(s, required=False)
    s.add_argument("--r", type=float)
    s.add_argument("--R", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--n-steps", type=int)
    s.add_argument("--eps", type=float)
    s.set_defaults(func=cmd_theta)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        args.func(args, ["hitrun"] + argv)
    except ValidationError as exc:
        print(f"hitrun: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hitrun: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HitRunError as exc:
        print(f"hitrun: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"hitrun: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
