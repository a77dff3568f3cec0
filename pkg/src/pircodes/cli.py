"""Command-line front end: ``pircodes <subcommand> ...``.

Exit status: 0 success / valid, 1 invalid / infeasible, 2 budget exhausted
or undecided, 3 usage error.  Output is deterministic: the same arguments
print the same bytes.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from typing import List, Optional, Sequence

from .bounds import BoundsEngine, NTable, TableFormatError, default_engine, render_table
from .constructions import catalog, fixtures, lengthen_search, remove_lines, simplex
from .gf2core import GeneratorMatrix, MatrixFormatError, min_distance, parse_matrix
from .recovery import (
    CertificateFormatError,
    RecoveryCertificate,
    certificate_from_json,
    combine_certificates,
    decide_k_pir,
    validate_certificate,
)

OK, INVALID, UNKNOWN, USAGE = 0, 1, 2, 3

NODES_ENV = "PIRCODES_NODES"
SECONDS_ENV = "PIRCODES_SECONDS"
DEFAULT_NODES = 10_000_000
DEFAULT_SECONDS = 60.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _env_number(name: str, default, cast):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = cast(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a number") from None
    if value <= 0:
        raise UsageError(f"{name} must be positive")
    return value


def _budgets(args):
    nodes = args.nodes if args.nodes is not None else _env_number(NODES_ENV, DEFAULT_NODES, int)
    seconds = args.time if args.time is not None else _env_number(SECONDS_ENV, DEFAULT_SECONDS, float)
    if nodes <= 0 or seconds <= 0:
        raise UsageError("budgets must be positive")
    return nodes, seconds


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _load_matrix(path: str) -> GeneratorMatrix:
    try:
        return parse_matrix(_read(path))
    except MatrixFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_cert(path: str) -> RecoveryCertificate:
    try:
        return certificate_from_json(_read(path))
    except CertificateFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit(out, G: GeneratorMatrix, cert: Optional[RecoveryCertificate], prefix: Optional[str]) -> None:
    """Matrix and certificate to PREFIX.txt / PREFIX.cert.json, or to stdout."""
    if prefix:
        _write(prefix + ".txt", G.to_text())
        out.write(f"matrix: {prefix}.txt ({G.s}x{G.n})\n")
        if cert is not None:
            _write(prefix + ".cert.json", cert.to_json())
            out.write(f"certificate: {prefix}.cert.json (k={cert.k})\n")
        return
    out.write(G.to_text())
    if cert is not None:
        out.write(cert.to_json())


def _profiles(out, cert: RecoveryCertificate) -> None:
    for i in range(cert.s):
        out.write(f"  e_{i + 1}: {cert.profile_str(i)}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args, out) -> int:
    G = _load_matrix(args.matrix)
    try:
        G.require_pir_ready()
    except ValueError as exc:
        out.write(f"{args.k}-PIR: no ({exc})\n")
        return INVALID
    if args.cert:
        cert = _load_cert(args.cert)
        report = validate_certificate(G, args.k, cert)
        for line in report.lines():
            out.write(line + "\n")
        out.write(f"{args.k}-PIR: {'yes' if report.valid else 'certificate rejected'}\n")
        if report.valid:
            _profiles(out, cert)
        return OK if report.valid else INVALID
    nodes, _ = _budgets(args)
    dec = decide_k_pir(G, args.k, budget=nodes, max_lam=args.lam)
    out.write(f"{args.k}-PIR: {dec.answer}\n")
    if dec.reason:
        out.write(f"  {dec.reason}\n")
    if G.s <= 24 and not dec.reason.startswith("minimum distance"):
        out.write(f"  minimum distance {min_distance(G)}\n")
    if dec.certificate is not None:
        _profiles(out, dec.certificate)
        if args.cert_out:
            _write(args.cert_out, dec.certificate.to_json())
    return {"yes": OK, "no": INVALID}.get(dec.answer, UNKNOWN)


def cmd_construct(args, out) -> int:
    if args.kind == "simplex":
        G, cert = simplex(_need(args, "s"))
    elif args.kind == "remove-lines":
        try:
            G, cert = remove_lines(_need(args, "s"), _need(args, "lines"))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif args.kind == "best":
        s, k = _need(args, "s"), _need(args, "k")
        built = default_engine().materialize(s, k)
        if built is None:
            out.write(f"no construction on record for ({s},{k})\n")
            return UNKNOWN
        G, cert = built
    else:
        pairs = [(_load_matrix(m), _load_cert(c)) for m, c in zip(args.matrix or [], args.cert or [])]
        need = 1 if args.kind == "parity_extend" else 2
        if len(pairs) != need or len(args.matrix) != len(args.cert or []):
            raise UsageError(f"{args.kind} needs {need} --matrix/--cert pair(s)")
        try:
            G, cert = combine_certificates(args.kind, pairs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not validate_certificate(G, cert.k, cert):
        raise AssertionError("construction produced an invalid certificate")
    _emit(out, G, cert, args.out)
    out.write(f"n={G.n} s={G.s} k={cert.k}\n" if args.out else "")
    return OK


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"--{name} is required here")
    return v


def _engine(args) -> BoundsEngine:
    if not args.ntable:
        return default_engine()
    try:
        return BoundsEngine(table=NTable.load(args.ntable, base=NTable.embedded()))
    except TableFormatError as exc:
        raise UsageError(f"{args.ntable}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {args.ntable}: {exc.strerror}") from None


def cmd_bounds(args, out) -> int:
    lo, up = _engine(args).bounds(args.s, args.k)
    out.write(f"lower {lo.value} upper {up.value}\n")
    for res in (lo, up):
        for line in res.lines():
            out.write(line + "\n")
    return OK


def cmd_table(args, out) -> int:
    out.write(render_table(_engine(args), s_max=args.s_max))
    return OK


def _generators(specs: Sequence[str], s: int) -> List[List[int]]:
    """'(1 2 3)(4 5)' cycle notation -> image lists."""
    from .ilp import cyclic_generator

    gens = []
    for spec in specs:
        if not re.fullmatch(r"\s*(\(\s*\d+(\s+\d+)*\s*\)\s*)+", spec):
            raise UsageError(f"bad generator {spec!r}; use cycle notation like '(1 2 3)(4 5)'")
        cycles = [[int(a) for a in body.split()] for body in re.findall(r"\(([^)]*)\)", spec)]
        flat = [a for c in cycles for a in c]
        if len(set(flat)) != len(flat) or any(not 1 <= a <= s for a in flat):
            raise UsageError(f"generator {spec!r} is not a product of disjoint cycles on 1..{s}")
        gens.append(cyclic_generator(s, cycles))
    return gens


def _build_model(args):
    from .ilp import ModelError, apply_symmetry, build_exact, build_lower

    if args.s < 1 or args.k < 1 or args.lam < 1:
        raise UsageError("s, k and lambda must be positive")
    if args.mode == "exact":
        m = build_exact(args.s, args.k, args.lam, args.systematic, args.projective,
                        args.mult_cap, args.order_units)
    else:
        if args.systematic or args.projective or args.mult_cap or args.order_units:
            raise UsageError("structure flags apply to exact mode only")
        m = build_lower(args.s, args.k, args.lam)
    if args.generator:
        try:
            m = apply_symmetry(m, _generators(args.generator, args.s))
        except ModelError as exc:
            raise UsageError(str(exc)) from None
    return m


def cmd_ilp_build(args, out) -> int:
    from .ilp import export_lp

    text = export_lp(_build_model(args))
    if args.out:
        _write(args.out, text)
        out.write(f"model: {args.out}\n")
    else:
        out.write(text)
    return OK


def cmd_ilp_solve(args, out) -> int:
    from .ilp import EXACT, ExtractionError, ModelError, extract_code, parse_lp, restore_keys, solve

    if args.lp:
        try:
            model = parse_lp(_read(args.lp))
        except ModelError as exc:
            raise UsageError(f"{args.lp}: {exc}") from None
        restore_keys(model)
    else:
        for name in ("s", "k"):
            _need(args, name)
        model = _build_model(args)
    nodes, seconds = _budgets(args)
    res = solve(model, max_nodes=nodes, time_limit=seconds)
    meta = model.meta
    if res.status == "optimal":
        mode = meta.get("mode")
        if mode == EXACT:
            s, lam = int(meta["s"]), int(meta["lambda"])
            label = "exact value" if lam >= s else "upper bound with certificate"
        elif mode is not None:
            label = "lower bound"
        else:
            label = "optimum"
        if meta.get("reduced") and mode == EXACT:
            label = "upper bound with certificate"
        elif meta.get("reduced"):
            label = "optimum of the reduced model"
        out.write(f"{label}: {res.objective}\n")
        if meta.get("mode") == EXACT and model.keys:
            try:
                G, cert = extract_code(model, res)
            except ExtractionError as exc:
                out.write(f"extraction failed: {exc}\n")
                out.write(res.trailer() + "\n")
                return INVALID
            if args.matrix_out:
                _emit(out, G, cert, args.matrix_out)
    elif res.status == "infeasible":
        out.write("infeasible\n")
    else:
        lo = "none" if res.lower is None else res.lower
        up = "none" if res.objective is None else res.objective
        out.write(f"undecided: objective in [{lo}, {up}]\n")
    out.write(res.trailer() + "\n")
    return {"optimal": OK, "infeasible": INVALID}.get(res.status, UNKNOWN)


def cmd_lengthen(args, out) -> int:
    G = _load_matrix(args.matrix)
    cert = _load_cert(args.cert)
    nodes, _ = _budgets(args)
    try:
        found = lengthen_search(G, cert, args.t, budget=nodes, max_row_weight=args.max_row_weight)
    except ValueError as exc:
        out.write(f"{exc}\n")
        return INVALID
    if not found:
        out.write("no extension found within budget\n")
        return UNKNOWN
    ext = found[0]
    bits = "".join("1" if (ext.row >> j) & 1 else "0" for j in range(G.n))
    out.write(f"row {bits}\n")
    out.write(f"n={ext.matrix.n} s={ext.matrix.s} k={ext.certificate.k}\n")
    _emit(out, ext.matrix, ext.certificate, args.out)
    return OK


def cmd_catalog(args, out) -> int:
    entries = {e.id: e for e in catalog()}
    refs = fixtures()
    if args.action == "list":
        for e in entries.values():
            out.write(f"{e.id}  s={e.s} k={e.k} n={e.n}  {e.provenance}\n")
        for name, (G, prov) in refs.items():
            out.write(f"{name}  s={G.s} n={G.n}  reference only  {prov}\n")
        return OK
    if not args.id:
        raise UsageError("catalog dump needs an entry id")
    if args.id in entries:
        e = entries[args.id]
        _emit(out, e.matrix, e.certificate, args.out)
        return OK
    if args.id in refs:
        _emit(out, refs[args.id][0], None, args.out)
        return OK
    raise UsageError(f"unknown catalog id {args.id!r}")


# ---------------------------------------------------------------------------
# parser


def _budget_flags(p) -> None:
    p.add_argument("--nodes", type=int, help=f"search node budget (default {DEFAULT_NODES}, env {NODES_ENV})")
    p.add_argument("--time", type=float, help=f"seconds (default {DEFAULT_SECONDS:g}, env {SECONDS_ENV})")
    p.add_argument("--jobs", type=int, default=1, help="worker count; searches run in one process")
    p.add_argument("--deterministic", action="store_true", help="accepted; output is always reproducible")


def _model_flags(p, required: bool) -> None:
    p.add_argument("--s", type=int, required=required)
    p.add_argument("--k", type=int, required=required)
    p.add_argument("--lam", "--lambda", dest="lam", type=int, default=2)
    p.add_argument("--mode", choices=("exact", "lower"), default="exact")
    p.add_argument("--systematic", action="store_true")
    p.add_argument("--projective", action="store_true")
    p.add_argument("--mult-cap", action="store_true")
    p.add_argument("--order-units", action="store_true")
    p.add_argument("--generator", action="append", help="symmetry generator in cycle notation, repeatable")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="pircodes", description="Binary PIR codes: verify, construct, bound, solve.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify", help="check a matrix (and optional certificate) for k-PIR")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cert")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lam", type=int, help="largest recovery-set size to try")
    p.add_argument("--cert-out")
    _budget_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="simplex, line removal, surgery or best-known codes")
    p.add_argument("kind", choices=("simplex", "remove-lines", "best", "direct_sum", "juxtapose", "parity_extend"))
    p.add_argument("--s", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--lines", type=int)
    p.add_argument("--matrix", action="append")
    p.add_argument("--cert", action="append")
    p.add_argument("--out", help="write PREFIX.txt and PREFIX.cert.json")
    _budget_flags(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("bounds", help="best lower and upper bound with traces")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ntable", help="file of 's k N' lines overriding the embedded code table")
    _budget_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("table", help="render the best-known grid")
    p.add_argument("--s-max", type=int, default=10)
    p.add_argument("--ntable")
    _budget_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("ilp-build", help="write the integer program in LP format")
    _model_flags(p, required=True)
    p.add_argument("--out")
    _budget_flags(p)
    p.set_defaults(func=cmd_ilp_build)

    p = sub.add_parser("ilp-solve", help="solve a built or parsed integer program")
    p.add_argument("--lp", help="LP file written by ilp-build")
    _model_flags(p, required=False)
    p.add_argument("--matrix-out", help="write the optimal code as PREFIX.txt / PREFIX.cert.json")
    _budget_flags(p)
    p.set_defaults(func=cmd_ilp_solve)

    p = sub.add_parser("lengthen", help="search for a one-row extension with t new columns")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--max-row-weight", type=int)
    p.add_argument("--out")
    _budget_flags(p)
    p.set_defaults(func=cmd_lengthen)

    p = sub.add_parser("catalog", help="list or dump embedded matrices")
    p.add_argument("action", choices=("list", "dump"))
    p.add_argument("id", nargs="?")
    p.add_argument("--out")
    _budget_flags(p)
    p.set_defaults(func=cmd_catalog)
    return top


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be positive")
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
