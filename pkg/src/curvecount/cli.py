"""Command-line orchestration: exact counts vs predictions, tables, census.

Commands
--------
count        exact and/or virtual count for one class or (a, a', k)
tamagawa     truncated Tamagawa number for (r, q, D)
scan         table over all cone classes with height <= hmax
converge     ratio #Mor(m*alpha)/q^(m h) against the Tamagawa value
audit-upper  regime upper-bound audit over all classes with height <= hmax
limits       diagonal limit report for the inner sums
cones        lattice census: (-1)-classes, conics, blow-down data, index values
admissible   large-field hypothesis report for one (q, class)

Output is deterministic: stable row order, exact rationals serialized as
``num/den`` strings, LF line endings, and 12-significant-digit decimal
companions derived from the exact values.  Every artifact embeds the resolved
configuration; the parallelism degree (--jobs) is intentionally not part of
it, so runs differing only in --jobs are byte-identical.

Exit codes: 0 ok, 2 configuration error, 3 work budget exceeded,
4 invalid model.  Errors are written to stderr as one-line JSON records.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import counting, forms, lattice, sieve
from .counting import BudgetExceeded, CountRequest, ModelInvalid
from .exact import BigRat, decimal_string, rational_string
from .forms import SurfaceModel
from .lattice import ConeSpec, DivisorClass

SCHEMA = "curvecount/v1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_MODEL = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvecount", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, model=True):
        p.add_argument("--config", help="flat key=value config file; flags override it")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--budget", type=int, default=counting.DEFAULT_BUDGET,
                       help="work budget in candidate section pairs")
        if model:
            p.add_argument("--model", help="model file (see README for the format)")
            p.add_argument("--q", type=int, help="field size for a default model")
            p.add_argument("--r", type=int, help="number of blow-up points")

    p = sub.add_parser("count", help="count one class")
    add_common(p)
    p.add_argument("--cls", help="class string 'r; f f' e1 ... er'")
    p.add_argument("--a", type=int)
    p.add_argument("--a-prime", dest="a_prime", type=int)
    p.add_argument("--k", help="comma-separated profile, e.g. 1,1,1")
    p.add_argument("--mode", choices=("naive", "accelerated"), default="accelerated")
    p.add_argument("--D", type=int, help="point-degree cutoff for predictions "
                   "(default: smallest D with q^D >= 2^10)")

    p = sub.add_parser("tamagawa", help="truncated Tamagawa number")
    add_common(p, model=False)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--D", type=int, required=True)

    p = sub.add_parser("scan", help="table over cone classes up to a height bound")
    add_common(p)
    p.add_argument("--hmax", type=int, required=True)
    p.add_argument("--cone", default="full-nef", help="full-nef | eps:FRAC | phi:IDX:FRAC")
    p.add_argument("--include-zero", dest="include_zero", action="store_true")
    p.add_argument("--mode", choices=("naive", "accelerated"), default="accelerated")
    p.add_argument("--D", type=int, help="prediction cutoff (default scales with q)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("converge", help="trend of #Mor(m alpha)/q^(m h) toward tau")
    add_common(p)
    p.add_argument("--cls", required=True)
    p.add_argument("--mmax", type=int, required=True)
    p.add_argument("--mode", choices=("naive", "accelerated"), default="accelerated")
    p.add_argument("--D", type=int, help="cutoff for the reference tau "
                   "(default: smallest D with q^D >= 2^12)")

    p = sub.add_parser("audit-upper", help="regime upper-bound audit")
    add_common(p)
    p.add_argument("--hmax", type=int, required=True)
    p.add_argument("--mode", choices=("naive", "accelerated"), default="accelerated")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("limits", help="diagonal limit report for the inner sums")
    add_common(p, model=False)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--D", type=int, help="cutoff (default scales with q)")

    p = sub.add_parser("cones", help="lattice census for one r")
    add_common(p, model=False)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--list-data", dest="list_data", action="store_true",
                   help="add one row per blow-down datum (r <= 5)")

    p = sub.add_parser("admissible", help="large-field hypothesis report")
    add_common(p, model=False)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--cls", required=True)

    return parser


def _config_path(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a file argument")
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Parse argv, honoring a flat key=value --config file as defaults.

    The file values are injected before the explicit flags, so flags given on
    the command line win.
    """
    cfg = _config_path(argv)
    if cfg is None:
        return parser.parse_args(argv)
    path = Path(cfg)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    base = []
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        flag = "--" + key.strip().replace("_", "-")
        if value.strip().lower() in ("true", "false"):
            if value.strip().lower() == "true":
                base.append(flag)
        else:
            base.extend([flag, value.strip()])
    insert_at = 1 if argv else 0  # keep the subcommand first
    return parser.parse_args(argv[:insert_at] + base + argv[insert_at:])


def _parse_cone(text: str, r: int) -> ConeSpec:
    text = text.strip()
    if text == "full-nef":
        return ConeSpec.full_nef()
    if text.startswith("eps:"):
        return ConeSpec.eps_cone(Fraction(text[4:]))
    if text.startswith("phi:"):
        _, idx, eps = text.split(":")
        data = lattice.blow_down_data(r)
        i = int(idx)
        if not 0 <= i < len(data):
            raise ConfigError(f"blow-down datum index {i} out of range 0..{len(data) - 1}")
        return ConeSpec.fixed_phi_cone(Fraction(eps), data[i])
    raise ConfigError(f"unknown cone spec {text!r}")


def _load_model(args) -> SurfaceModel:
    if getattr(args, "model", None):
        path = Path(args.model)
        if not path.exists():
            raise ConfigError(f"model file not found: {path}")
        try:
            return forms.parse_model(path.read_text())
        except ValueError as exc:
            raise ModelInvalid(str(exc)) from exc
    if getattr(args, "q", None) and getattr(args, "r", None):
        if args.q == 2 and args.r == 3:
            return forms.canonical_model_q2_r3()
        return forms.default_model(args.q, args.r)
    raise ConfigError("provide either --model FILE or both --q and --r")


# ---------------------------------------------------------------------------
# row assembly
# ---------------------------------------------------------------------------

_CLASS_COLUMNS = [
    "class", "h", "a", "a_prime", "k",
    "sections", "morphisms",
    "virtual_sections", "virtual_sections_dec",
    "virtual_morphisms", "virtual_morphisms_dec",
    "ratio", "ratio_dec", "tau_dec",
    "bound", "bound_dec",
    "regime_2a", "regime_2a_prime",
    "hyp_q_exp_gt_C", "hyp_q_gt_C3", "note",
]


def _class_row(model, alpha, result, zeta, tau, note=""):
    q = model.q
    inv = lattice.invariants(alpha)
    vsec, vmor = sieve.virtual_count(inv.a, inv.a_prime, inv.k, zeta)
    ratio = Fraction(result.morphisms, q**inv.h) if inv.h > 0 else None
    bound = counting.upper_bound_morphisms(q, inv.h, model.r)
    hyp_exp = ""
    if not alpha.is_zero() and model.r <= 5 and lattice.is_nef(alpha):
        rep = lattice.admissibility(q, alpha)
        hyp_exp = rep.exponent_flag
    return {
        "class": alpha.serialize(),
        "h": inv.h,
        "a": inv.a,
        "a_prime": inv.a_prime,
        "k": ",".join(str(v) for v in inv.k),
        "sections": result.raw,
        "morphisms": result.morphisms,
        "virtual_sections": rational_string(vsec),
        "virtual_sections_dec": decimal_string(vsec),
        "virtual_morphisms": rational_string(vmor),
        "virtual_morphisms_dec": decimal_string(vmor),
        "ratio": rational_string(ratio) if ratio is not None else "",
        "ratio_dec": decimal_string(ratio) if ratio is not None else "",
        "tau_dec": decimal_string(tau.value),
        "bound": rational_string(bound),
        "bound_dec": decimal_string(bound),
        "regime_2a": result.regime_a,
        "regime_2a_prime": result.regime_a_prime,
        "hyp_q_exp_gt_C": hyp_exp,
        "hyp_q_gt_C3": q > lattice.FIELD_SIZE_THRESHOLD,
        "note": note,
    }


def _count_class(model, alpha, mode, budget):
    inv = lattice.invariants(alpha)
    req = CountRequest(model=model, a=inv.a, a_prime=inv.a_prime, k=inv.k, mode=mode)
    return counting.count_sections(req, budget=budget)


def _worker_count(payload):
    model_text, coeffs, r, mode, budget = payload
    model = forms.parse_model(model_text)
    alpha = DivisorClass(r, coeffs)
    res = _count_class(model, alpha, mode, budget)
    return res.raw, res.morphisms, res.regime_a, res.regime_a_prime


def _count_many(model, classes, mode, budget, jobs):
    """Count several classes, optionally with a process pool; the output list
    matches the input order whatever the parallelism degree."""
    if jobs <= 1 or len(classes) <= 1:
        return [_count_class(model, alpha, mode, budget) for alpha in classes]
    text = forms.serialize_model(model)
    payloads = [(text, alpha.coeffs, alpha.r, mode, budget) for alpha in classes]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        raws = list(pool.map(_worker_count, payloads))
    out = []
    for raw, mor, ra, rap in raws:
        out.append(
            counting.CountResult(
                raw=raw, morphisms=mor, regime_a=ra, regime_a_prime=rap,
                mode=mode, work_pairs=0, seconds=0.0,
            )
        )
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_count(args):
    model = _load_model(args)
    if args.cls:
        alpha = DivisorClass.parse(args.cls)
        if alpha.r != model.r:
            raise ConfigError(f"class r = {alpha.r} does not match model r = {model.r}")
        inv = lattice.invariants(alpha)
        a, ap, k = inv.a, inv.a_prime, inv.k
    elif args.a is not None and args.a_prime is not None and args.k:
        a, ap = args.a, args.a_prime
        k = tuple(int(t) for t in args.k.split(","))
        alpha = lattice.class_from_invariants(model.r, a, ap, k)
    else:
        raise ConfigError("provide --cls or all of --a, --a-prime, --k")
    res = counting.count_sections(
        CountRequest(model=model, a=a, a_prime=ap, k=k, mode=args.mode), budget=args.budget
    )
    base_d = args.D if args.D is not None else sieve.default_cutoff(model.q, 10)
    D = max(base_d, max(k) if k else 0, 1)
    zeta = sieve.virtual_zeta(model.r, model.q, k, D)
    tau = sieve.tamagawa(model.r, model.q, D)
    rows = [_class_row(model, alpha, res, zeta, tau)]
    meta = _tau_meta(tau)
    return _resolved_config(args, model=model, D=D), rows, _CLASS_COLUMNS, meta


def _tau_meta(tau):
    return {
        "tau": rational_string(tau.value),
        "tau_dec": decimal_string(tau.value),
        "tau_D": tau.D,
        "tau_tail_log_bound": rational_string(tau.tail),
    }


def _cmd_tamagawa(args):
    res = sieve.tamagawa(args.r, args.q, args.D)
    rows = [{
        "r": args.r,
        "q": args.q,
        "D": args.D,
        "tau": rational_string(res.value),
        "tau_dec": decimal_string(res.value),
        "tail_log_bound": rational_string(res.tail),
        "tail_log_bound_dec": decimal_string(res.tail),
        "hyp_q_gt_C3": args.q > lattice.FIELD_SIZE_THRESHOLD,
    }]
    cols = ["r", "q", "D", "tau", "tau_dec", "tail_log_bound", "tail_log_bound_dec",
            "hyp_q_gt_C3"]
    return _resolved_config(args), rows, cols, {}


def _cmd_scan(args):
    model = _load_model(args)
    cone = _parse_cone(args.cone, model.r)
    classes = lattice.enumerate_in_cone(cone, model.r, args.hmax, include_zero=args.include_zero)
    caps = tuple(
        max((lattice.invariants(c).k[i] for c in classes), default=0)
        for i in range(model.r)
    )
    base_d = args.D if args.D is not None else sieve.default_cutoff(model.q, 10)
    D = max(base_d, max(caps, default=0), 1)
    zeta = sieve.virtual_zeta(model.r, model.q, caps, D)
    tau = sieve.tamagawa(model.r, model.q, D)
    results = _count_many(model, classes, args.mode, args.budget, args.jobs)
    rows = []
    for alpha, res in zip(classes, results):
        note = "model count (constants avoiding centers)" if alpha.is_zero() else ""
        rows.append(_class_row(model, alpha, res, zeta, tau, note=note))
    meta = _tau_meta(tau)
    meta["total_morphisms"] = sum(r["morphisms"] for r in rows)
    return _resolved_config(args, model=model, D=D, cone=cone.describe()), rows, _CLASS_COLUMNS, meta


def _cmd_converge(args):
    model = _load_model(args)
    alpha = DivisorClass.parse(args.cls)
    if alpha.r != model.r:
        raise ConfigError(f"class r = {alpha.r} does not match model r = {model.r}")
    inv = lattice.invariants(alpha)
    if inv.h <= 0:
        raise ConfigError("converge needs a class of positive height")
    D = args.D if args.D is not None else sieve.default_cutoff(model.q, 12)
    tau = sieve.tamagawa(model.r, model.q, D)
    rows = []
    cols = ["m", "class", "h", "sections", "morphisms", "ratio", "ratio_dec",
            "abs_gap", "abs_gap_dec", "depth_margin"]
    for m in range(1, args.mmax + 1):
        malpha = m * alpha
        minv = lattice.invariants(malpha)
        res = _count_class(model, malpha, args.mode, args.budget)
        ratio = BigRat(res.morphisms, model.q**minv.h)
        gap = abs(ratio - tau.value)
        depth = Fraction(
            min(2 * minv.a - sum(minv.k), 2 * minv.a_prime - sum(minv.k)), 8
        ) - Fraction(1, 2)
        rows.append({
            "m": m,
            "class": malpha.serialize(),
            "h": minv.h,
            "sections": res.raw,
            "morphisms": res.morphisms,
            "ratio": rational_string(ratio),
            "ratio_dec": decimal_string(ratio),
            "abs_gap": rational_string(gap),
            "abs_gap_dec": decimal_string(gap),
            "depth_margin": rational_string(depth),
        })
    return _resolved_config(args, model=model), rows, cols, _tau_meta(tau)


def _cmd_audit_upper(args):
    model = _load_model(args)
    cone = ConeSpec.full_nef()
    classes = []
    for alpha in lattice.enumerate_in_cone(cone, model.r, args.hmax):
        inv = lattice.invariants(alpha)
        if 2 * inv.a >= sum(inv.k) and 2 * inv.a_prime >= sum(inv.k):
            classes.append(alpha)
    results = _count_many(model, classes, args.mode, args.budget, args.jobs)
    rows = []
    violations = 0
    for alpha, res in zip(classes, results):
        inv = lattice.invariants(alpha)
        bound = counting.upper_bound_morphisms(model.q, inv.h, model.r)
        ok = Fraction(res.morphisms) <= bound
        if not ok:
            violations += 1
        rows.append({
            "class": alpha.serialize(),
            "h": inv.h,
            "a": inv.a,
            "a_prime": inv.a_prime,
            "k": ",".join(str(v) for v in inv.k),
            "morphisms": res.morphisms,
            "bound": rational_string(bound),
            "bound_dec": decimal_string(bound),
            "ok": ok,
        })
    cols = ["class", "h", "a", "a_prime", "k", "morphisms", "bound", "bound_dec", "ok"]
    return _resolved_config(args, model=model), rows, cols, {"violations": violations}


def _cmd_limits(args):
    rep = sieve.limit_check(args.r, args.q, args.n_max, D=args.D)
    rows = []
    for n, gap in enumerate(rep.gaps, start=1):
        rows.append({
            "n": n,
            "k": ",".join([str(n)] * args.r),
            "gap": rational_string(gap),
            "gap_dec": decimal_string(gap),
        })
    cols = ["n", "k", "gap", "gap_dec"]
    meta = {
        "passed": rep.passed,
        "constant": rational_string(rep.constant),
        "constant_dec": decimal_string(rep.constant),
        "D": rep.D,
        "hyp_q_gt_C3": args.q > lattice.FIELD_SIZE_THRESHOLD,
    }
    return _resolved_config(args, D=rep.D), rows, cols, meta


def _cmd_cones(args):
    r = args.r
    minus = lattice.minus_one_classes(r)
    conics = lattice.conic_classes(r)
    rows = [{
        "r": r,
        "minus_one_classes": len(minus),
        "conic_classes": len(conics),
        "blow_down_data": len(lattice.blow_down_data(r)) if r <= 5 else "",
        "ell_minus_k": rational_string(lattice.stability_index(lattice.anticanonical(r)))
        if r <= 5 else "",
        "anticanonical_square": 8 - r,
    }]
    cols = ["r", "minus_one_classes", "conic_classes", "blow_down_data",
            "ell_minus_k", "anticanonical_square"]
    meta = {}
    if args.list_data and r <= 5:
        mk = lattice.anticanonical(r)
        data_rows = []
        for i, datum in enumerate(lattice.blow_down_data(r)):
            data_rows.append({
                "index": i,
                "fc": datum.fc.serialize(),
                "fcp": datum.fcp.serialize(),
                "ec": " | ".join(c.serialize() for c in datum.ec),
                "fiber_margin_minus_k": lattice.fiber_margin(datum, mk),
                "min_mult_minus_k": lattice.min_exceptional_multiplicity(datum, mk),
            })
        meta["blow_down_rows"] = data_rows
    return _resolved_config(args), rows, cols, meta


def _cmd_admissible(args):
    alpha = DivisorClass.parse(args.cls)
    rep = lattice.admissibility(args.q, alpha)
    row = rep.row()
    row["ell"] = rational_string(row["ell"])
    row["ell_ratio"] = rational_string(row["ell_ratio"])
    row["eps_alpha"] = rational_string(row["eps_alpha"])
    row["depth_margin"] = rational_string(row["depth_margin"])
    cols = ["q", "class", "h", "ell", "ell_ratio", "eps_alpha", "depth_margin",
            "hyp_q_exp_gt_C", "hyp_q_gt_C3", "note"]
    return _resolved_config(args), [row], cols, {}


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _resolved_config(args, model=None, **extra) -> dict:
    cfg = {}
    skip = {"config", "out", "jobs"}  # jobs must not affect output bytes
    for key, val in sorted(vars(args).items()):
        if key in skip or val is None:
            continue
        cfg[key] = val
    for key, val in extra.items():
        cfg[key] = val
    if model is not None:
        cfg["q"] = model.q
        cfg["r"] = model.r
        cfg["model_points"] = " ".join(
            f"{p.x},{p.y},{pp.x},{pp.y}" for p, pp in model.points
        )
    return cfg


def emit(config: dict, rows: list[dict], columns: list[str], meta: dict, fmt: str) -> str:
    """Serialize a report; the same inputs always produce the same bytes."""
    if fmt == "json":
        doc = {"schema": SCHEMA, "config": config, "meta": meta, "rows": rows}
        return json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        for key in sorted(config):
            buf.write(f"# {key}={config[key]}\n")
        for key in sorted(meta):
            if key == "blow_down_rows":
                continue
            buf.write(f"# meta:{key}={meta[key]}\n")
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n",
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(row.get(k, "")) for k in columns})
        return buf.getvalue()
    raise ConfigError(f"unknown format {fmt!r}")


def _json_default(value):
    raise TypeError(f"non-serializable value in report: {value!r}")


def _csv_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def parse_report(text: str) -> tuple[dict, list[dict]]:
    """Parse an emitted report back into (config, rows); JSON or CSV."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        return doc["config"], doc["rows"]
    config = {}
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            config[key] = val
        else:
            body.append(line)
    reader = csv.DictReader(body)
    return config, list(reader)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "count": _cmd_count,
    "tamagawa": _cmd_tamagawa,
    "scan": _cmd_scan,
    "converge": _cmd_converge,
    "audit-upper": _cmd_audit_upper,
    "limits": _cmd_limits,
    "cones": _cmd_cones,
    "admissible": _cmd_admissible,
}


def _error_record(code: int, kind: str, message: str, **extra) -> str:
    return json.dumps({"error": {"code": code, "kind": kind, "message": message, **extra}},
                      sort_keys=True)


def main(argv: list[str] | None = None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout if stdout is not None else sys.stdout
    parser = _build_parser()
    try:
        try:
            args = _apply_config_file(argv, parser)
        except SystemExit as exc:  # argparse reports usage errors itself
            return EXIT_CONFIG if exc.code else EXIT_OK
        config, rows, columns, meta = _COMMANDS[args.command](args)
        text = emit(config, rows, columns, meta, args.format)
    except BudgetExceeded as exc:
        print(_error_record(EXIT_BUDGET, "budget", str(exc), estimate=exc.needed),
              file=sys.stderr)
        return EXIT_BUDGET
    except ModelInvalid as exc:
        print(_error_record(EXIT_MODEL, "model", str(exc)), file=sys.stderr)
        return EXIT_MODEL
    except (ConfigError, ValueError) as exc:
        print(_error_record(EXIT_CONFIG, "config", str(exc)), file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "out", None):
        Path(args.out).write_bytes(text.encode("utf-8"))
    else:
        stdout.write(text)
    return EXIT_OK


def main_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
