"""Command line front end: ground, diag, criteria, simulate, scan, table.

Every subcommand takes flat key=value tokens, either on the command line or
in a file given with --config (one pair per line, '#' starts a comment).
Command-line tokens override the file.  Exit codes: 0 success, 1 usage error,
2 domain error, 3 inconclusive scan.
"""
import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field as dc_field, fields

import numpy as np

from . import criteria, scan, tables
from .groundstate import GroundStateError, default_ground_state, solve_ground_state
from .grid import DEFAULT_GRID, RadialGrid
from .profiles import (KEY_ALIASES, QProfile, ResolutionError, closed_form_diagnostics, format_profile, param_names,
                       parse_profile, sample)
from .quantities import RadialField, compute_diagnostics
from .solver import EvolveParams, evolve_profile

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INCONCLUSIVE = 0, 1, 2, 3
PARAM_KEYS = {f.name for f in fields(EvolveParams)}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    values: dict = dc_field(default_factory=dict)
    options: dict = dc_field(default_factory=dict)
    seed: int | None = None  # reserved; the solver is deterministic


# formatting and output

def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_atomic(path, text):
    """Write to a temp file in the target directory, then rename over the target."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def kv_table(d):
    width = max(len(k) for k in d)
    return "\n".join(f"{k:<{width}}  {fmt(v)}" for k, v in d.items())


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def dumps(d):
    return json.dumps(_jsonable(d), indent=2, sort_keys=True) + "\n"


# config handling

def parse_tokens(tokens):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise UsageError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        k = k.strip()
        if not k:
            raise UsageError(f"empty key in {tok!r}")
        out[k] = v.strip()
    return out


def read_config(path):
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    toks = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            toks.append(line)
    return parse_tokens(toks)


def _split(values, allowed_extra=()):
    """Separate profile keys, EvolveParams overrides and extra keys; reject anything else."""
    values = dict(values)
    family = values.pop("family", None)
    prof, par, extra = {}, {}, {}
    names = set()
    if family is not None:
        try:
            from .profiles import ALIASES

            names = set(param_names(ALIASES.get(family, family)))
        except KeyError:
            raise UsageError(f"unknown family {family!r}") from None
    for k, v in values.items():
        key = KEY_ALIASES.get(k, k)
        if key in names:
            prof[key] = v
        elif k in PARAM_KEYS:
            par[k] = v
        elif k in allowed_extra:
            extra[k] = v
        else:
            raise UsageError(f"unknown key {k!r}")
    return family, prof, par, extra


def _profile(family, prof):
    if family is None:
        raise UsageError("a profile needs family=...")
    return parse_profile([f"family={family}"] + [f"{k}={v}" for k, v in prof.items()])


def _params(overrides):
    kw = {}
    for f in fields(EvolveParams):
        if f.name in overrides:
            raw = overrides[f.name]
            if f.type in (bool, "bool"):
                if raw.lower() not in ("true", "false", "1", "0"):
                    raise UsageError(f"{f.name} must be true or false")
                kw[f.name] = raw.lower() in ("true", "1")
            elif f.type in (int, "int"):
                kw[f.name] = int(raw)
            else:
                kw[f.name] = float(raw)
    return EvolveParams(**kw)


# subcommands

def cmd_ground(cfg):
    _, _, _, extra = _split(cfg.values, ("tol", "dr", "r_max"))
    if extra:
        grid = RadialGrid(float(extra.get("dr", DEFAULT_GRID.dr)), float(extra.get("r_max", DEFAULT_GRID.r_max)))
        gs = solve_ground_state(grid, float(extra.get("tol", 1e-10)))
    else:
        gs = default_ground_state()
    info = {
        "q0": gs.q0, "mass_sq": gs.mass_sq, "grad_sq": gs.grad_sq, "l4_fourth": gs.l4_fourth,
        "var": gs.var, "hhalf_sq": gs.hhalf_sq, "energy": gs.energy,
        "pohozhaev_grad_over_mass": gs.grad_sq / gs.mass_sq, "pohozhaev_l4_over_mass": gs.l4_fourth / gs.mass_sq,
        "tail_c": gs.tail_c, "tail_k": gs.tail_k, "dr": gs.dr, "r_max": gs.r[-1],
    }
    print(kv_table(info))
    if cfg.options.get("csv"):
        write_atomic(cfg.options["csv"], csv_text(["r", "Q"], zip(gs.r, gs.samples)))
        print(f"wrote {cfg.options['csv']}")
    return EXIT_OK


def _read_field(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read field {path}: {exc}") from exc
    r = data[:, 0]
    u = data[:, 1] + (1j * data[:, 2] if data.shape[1] > 2 else 0)
    dr = r[1] - r[0]
    if abs(r[0]) > 1e-12 * dr or not np.allclose(np.diff(r), dr, rtol=1e-9, atol=0):
        raise ValueError("field CSV must sample r = 0, dr, 2 dr, ... uniformly")
    return RadialField(dr, u)


def _diagnostics(cfg):
    family, prof, _, extra = _split(cfg.values, ("field", "mode"))
    if "field" in extra or cfg.options.get("field"):
        field = _read_field(extra.get("field") or cfg.options["field"])
        return None, compute_diagnostics(field)
    profile = _profile(family, prof)
    if extra.get("mode", "closed") == "sampled":
        return profile, compute_diagnostics(sample(profile))
    return profile, closed_form_diagnostics(profile)


def cmd_diag(cfg):
    profile, d = _diagnostics(cfg)
    rec = d.as_dict()
    if profile is not None:
        rec = {"profile": format_profile(profile), **rec}
    text = dumps(rec) if cfg.options.get("json") else kv_table(rec) + "\n"
    sys.stdout.write(text)
    if cfg.options.get("out"):
        write_atomic(cfg.options["out"], text)
    return EXIT_OK


def cmd_criteria(cfg):
    profile, d = _diagnostics(cfg)
    verdicts = criteria.evaluate_all(d)
    if profile is not None and not isinstance(profile, QProfile):
        try:
            verdicts.append(criteria.mass_concentration(sample(profile)))
        except criteria.InapplicableError:
            pass
    header = ["criterion", "verdict", "witnesses"]
    rows = [[v.criterion.value, v.verdict.value,
             ";".join(f"{k}={fmt(x)}" for k, x in sorted(v.witnesses.items()))] for v in verdicts]
    if profile is not None:
        print(f"# {format_profile(profile)}")
    if cfg.options.get("csv"):
        sys.stdout.write(csv_text(header, rows))
    else:
        for r in rows:
            print(f"{r[0]:<18} {r[1]:<13} {r[2]}")
    if cfg.options.get("out"):
        write_atomic(cfg.options["out"], csv_text(header, rows))
    return EXIT_OK


SERIES_COLUMNS = (("t", "t"), ("M", "mass"), ("E", "energy"), ("grad_sq", "grad_sq"), ("l4_fourth", "l4_fourth"),
                  ("V", "variance"), ("amp_max", "amp_max"), ("eta", "eta"))


def cmd_simulate(cfg):
    family, prof, par, _ = _split(cfg.values)
    profile = _profile(family, prof)
    params = _params(par)
    out = evolve_profile(profile, params=params)
    record = {
        "profile": format_profile(profile),
        "params": asdict(out.params),
        **out.summary(),
        "notes": list(out.notes),
    }
    print(f"{format_profile(profile)}: {out.classification.value} at t={fmt(out.t_end)} ({out.reason})")
    if cfg.options.get("json_out"):
        write_atomic(cfg.options["json_out"], dumps(record))
    if cfg.options.get("csv_out"):
        s = out.series
        cols = [getattr(s, attr) for _, attr in SERIES_COLUMNS]
        write_atomic(cfg.options["csv_out"], csv_text([c for c, _ in SERIES_COLUMNS], zip(*cols)))
    return EXIT_OK


def cmd_scan(cfg):
    o = cfg.options
    if not o.get("family") or not o.get("vary") or not o.get("bracket"):
        raise UsageError("scan needs --family, --vary and --bracket")
    fixed = parse_tokens(o.get("fix") or [])
    fam, prof, par, _ = _split({"family": o["family"], **fixed, **cfg.values})
    try:
        lo, hi = (float(x) for x in o["bracket"].split(":"))
    except ValueError:
        raise UsageError("--bracket must look like lo:hi") from None
    vary = KEY_ALIASES.get(o["vary"], o["vary"])
    _profile(fam, {**prof, vary: hi})  # validates family and parameters
    params = _params(par)
    results = scan.sweep(fam, [{k: float(v) for k, v in prof.items()}], vary, (lo, hi), float(o.get("tol") or 0.01),
                         params, workers=o.get("workers"))
    header, rows = scan.sweep_rows(results)
    text = csv_text(header, rows)
    sys.stdout.write(text)
    if o.get("out"):
        write_atomic(o["out"], text)
    for r in results:
        for n in r.notes:
            print(f"# {n}", file=sys.stderr)
    if any(r.status == "failed" for r in results):
        return EXIT_DOMAIN
    return EXIT_INCONCLUSIVE if any(r.inconclusive for r in results) else EXIT_OK


def cmd_table(cfg):
    tid = cfg.options.get("table_id")
    if tid not in tables.TABLE_IDS:
        raise UsageError(f"unknown table {tid!r}; known: {', '.join(tables.TABLE_IDS)}")
    rows = tables.compute_table(tid)
    text = csv_text(["table", "param", "row", "computed", "reference", "abs_diff"],
                    [[r.table, r.param, r.row, r.computed, r.reference, r.abs_diff] for r in rows])
    sys.stdout.write(text)
    if cfg.options.get("out"):
        write_atomic(cfg.options["out"], text)
    return EXIT_OK


COMMANDS = {"ground": cmd_ground, "diag": cmd_diag, "criteria": cmd_criteria, "simulate": cmd_simulate,
            "scan": cmd_scan, "table": cmd_table}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="nls-collapse", description="Blow-up and scattering criteria for radial 3D cubic NLS")
    sub = p.add_subparsers(dest="subcommand")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("tokens", nargs="*", help="key=value settings")
        sp.add_argument("--config", help="file of key=value lines")
        return sp

    sp = add("ground", "ground state norms")
    sp.add_argument("--csv", help="write samples (r, Q) here")
    sp = add("diag", "diagnostics of a profile or field CSV")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--field", help="CSV with columns r, re u[, im u]")
    sp.add_argument("--out")
    sp = add("criteria", "verdict of every criterion")
    sp.add_argument("--csv", action="store_true", help="machine-readable rows on stdout")
    sp.add_argument("--field")
    sp.add_argument("--out")
    sp = add("simulate", "evolve a profile")
    sp.add_argument("--json-out", dest="json_out")
    sp.add_argument("--csv-out", dest="csv_out")
    sp = add("scan", "bisect for a threshold")
    sp.add_argument("--family")
    sp.add_argument("--fix", nargs="*", default=[])
    sp.add_argument("--vary")
    sp.add_argument("--bracket")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out")
    sp = add("table", "regenerate a reference table; give the table id as the first token")
    sp.add_argument("--out")
    return p


def config_from_args(argv):
    ns = build_parser().parse_args(argv)
    if not ns.subcommand:
        raise UsageError("no subcommand given")
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "tokens", "config")}
    if ns.subcommand == "table":
        ids = [t for t in ns.tokens if "=" not in t]
        if len(ids) > 1:
            raise UsageError("table takes one table id")
        if ids:
            opts["table_id"] = ids[0]
            ns.tokens = [t for t in ns.tokens if "=" in t]
    values = read_config(ns.config) if ns.config else {}
    values.update(parse_tokens(ns.tokens))
    seed = values.pop("seed", None)
    for key in ("out", "json_out", "csv_out", "workers", "tol", "vary", "bracket", "table_id", "field"):
        if key in values and opts.get(key) in (None, False, []):
            opts[key] = values.pop(key)
    if "workers" in opts and isinstance(opts["workers"], str):
        opts["workers"] = int(opts["workers"])
    if ns.subcommand == "scan" and "family" in values and not opts.get("family"):
        opts["family"] = values.pop("family")
    return RunConfig(ns.subcommand, values, opts, seed)


def run(config: RunConfig):
    return COMMANDS[config.subcommand](config)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, GroundStateError, ResolutionError, scan.BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
