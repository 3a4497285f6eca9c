"""Command-line entry points: run scenarios and emit JSON (or text) reports.

Exit codes: 0 all comparisons pass, 1 some comparison failed, 2 bad config.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import jsonschema
import numpy as np

from . import __version__
from .scenarios import ORACLE_TOL, RUNNERS, SERIES_TOL, Report, seed

REPORT_SCHEMA = "superperiod-report/1"

_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": ["even", "plus_plus", "minus_minus", "hyperelliptic", "oracle", "suite"]},
        "tau1": _complex,
        "tau2": _complex,
        "taut1": _complex,
        "taut2": _complex,
        "q": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "q_phase": {"type": "number"},
        "N": {"type": "integer", "minimum": 1, "maximum": 12},
        "q_terms": {"type": "integer", "minimum": 4, "maximum": 512},
        "quad_order": {"type": "integer", "minimum": 8, "maximum": 4096},
        "tol_series": {"type": "number", "exclusiveMinimum": 0},
        "tol_oracle": {"type": "number", "exclusiveMinimum": 0},
        "task": {"enum": ["compare", "periods", "probe"]},
        "points": {"type": "array", "items": _complex, "minItems": 4, "maxItems": 6},
        "merge_type": {"enum": ["uu", "uv"]},
        "gaps": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
        "suite": {"enum": ["grassmann", "elliptic", "mumford"]},
        "rounds": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
}

DEFAULTS = {
    "tau1": [0.0, 1.7],
    "tau2": [0.3, 2.1],
    "taut1": None,
    "taut2": None,
    "q": [1e-3, 5e-4],
    "q_phase": float(np.pi / 5),
    "N": 4,
    "q_terms": 64,
    "quad_order": 64,
    "tol_series": SERIES_TOL,
    "tol_oracle": ORACLE_TOL,
    "task": "compare",
    "points": None,
    "merge_type": "uu",
    "gaps": [1e-2, 1e-3, 1e-4],
    "suite": "grassmann",
    "rounds": 200,
    "output": None,
}

SUBCOMMANDS = {
    "expand-even": {"mode": "even"},
    "expand-super": {"mode": "plus_plus"},
    "expand-mm": {"mode": "minus_minus"},
    "periods": {"mode": "oracle", "task": "periods"},
    "mumford": {"mode": "hyperelliptic"},
    "oracle-compare": {"mode": "oracle", "task": "compare"},
    "probe-log": {"mode": "oracle", "task": "probe"},
    "suite": {"mode": "suite"},
}


class ConfigError(ValueError):
    pass


def _to_complex(x):
    if x is None:
        return None
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def resolve_config(raw: dict) -> dict:
    """Validate against the schema and fill every default explicitly."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"invalid config: {e.message}") from e
    if "mode" not in raw:
        raise ConfigError("invalid config: 'mode' is required")
    cfg = dict(DEFAULTS)
    cfg.update(raw)
    cfg.setdefault("seed", seed())
    if cfg["mode"] == "oracle" and cfg["task"] == "periods" and not cfg["points"]:
        raise ConfigError("invalid config: task 'periods' needs 'points'")
    for k in ("tau1", "tau2", "taut1", "taut2"):
        z = _to_complex(cfg[k])
        if z is not None and k.startswith("tau") and not k.startswith("taut") and z.imag <= 0:
            raise ConfigError(f"invalid config: {k} must have positive imaginary part")
        if z is not None and k.startswith("taut") and z.imag >= 0:
            raise ConfigError(f"invalid config: {k} lives in the conjugate sector (Im < 0)")
    return cfg


def _runtime(cfg: dict) -> dict:
    rt = dict(cfg)
    for k in ("tau1", "tau2", "taut1", "taut2"):
        rt[k] = _to_complex(cfg[k])
    if cfg["points"] is not None:
        rt["points"] = [_to_complex(p) for p in cfg["points"]]
    return rt


# -- suites ----------------------------------------------------------------------------------


def run_suite(cfg) -> Report:
    from .elliptic import EllipticContext, wp_laurent
    from .laws import run_laws

    rep = Report()
    rng = np.random.default_rng(cfg["seed"])
    name = cfg["suite"]
    if name == "grassmann":
        tally = run_laws(rng, cfg["rounds"])
        rep.tables["laws"] = {"checks": tally.checks, "failures": tally.failures, "worst": tally.worst}
        rep.compare("law failures", "TRIVIAL", tally.failures, 0, 0)
    elif name == "elliptic":
        for _ in range(cfg["rounds"] if cfg["rounds"] < 50 else 10):
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 3))
            c = EllipticContext(tau, cfg["q_terms"])
            rep.compare(f"Legendre at {tau:.3f}", "PAPER", tau * c.eta1 - c.eta2, 2j * np.pi, 1e-12)
            e1, e2, e3 = c.e
            rep.compare(f"4 e1 e2 e3 = g3 at {tau:.3f}", "PAPER", 4 * e1 * e2 * e3 / c.g3, 1, 1e-10)
            w = wp_laurent(c, 16)
            rep.compare(f"wp z^2 coefficient at {tau:.3f}", "DERIVED", 20 * w.coeff("1", 2), c.g2, 1e-10)
    elif name == "mumford":
        from .hyperelliptic import SPINS, genus1_mumford_coefficient

        for _ in range(10):
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5))
            cs = [genus1_mumford_coefficient(tau, s, cfg["q_terms"]) for s in SPINS]
            rep.compare(f"spin sum at {tau:.3f}", "PAPER", sum(cs) / max(abs(x) for x in cs), 0, 1e-12)
    return rep


RUNNERS_ALL = dict(RUNNERS, suite=run_suite)


# -- serialization -----------------------------------------------------------------------------


def encode(x):
    """JSON-ready form: complex -> [re, im], arrays -> nested lists, stable key order."""
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return encode(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def decode_complex(x):
    """Inverse of ``encode`` on [re, im] leaves (used by round-trip checks)."""
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, float) for v in x):
        return complex(x[0], x[1])
    if isinstance(x, list):
        return [decode_complex(v) for v in x]
    if isinstance(x, dict):
        return {k: decode_complex(v) for k, v in x.items()}
    return x


def build_report(cfg: dict, rep: Report, elapsed: float, timestamp: bool) -> dict:
    out = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "config": encode(cfg),
        "ok": rep.ok,
        "comparisons": [
            {"name": c.name, "source": c.source, "value": encode(c.value), "expected": encode(c.expected),
             "error": c.error, "tolerance": c.tolerance, "pass": c.passed}
            for c in rep.comparisons
        ],
        "failures": [c.name for c in rep.comparisons if not c.passed],
        "series": encode(rep.series),
        "tables": encode(rep.tables),
    }
    if timestamp:
        out["timing"] = {"seconds": elapsed}
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    return out


def render_text(report: dict) -> str:
    lines = [f"{report['schema']}  ok={report['ok']}"]
    for c in report["comparisons"]:
        mark = "PASS" if c["pass"] else "FAIL"
        lines.append(f"{mark}  [{c['source']}] {c['name']}: error {c['error']:.3e} (tol {c['tolerance']:.1e})")
    for name, table in report["series"].items():
        lines.append(f"series {name}:")
        for mono, entry in table.items():
            lines.append(f"  {mono}: low={entry['low']} coeffs={json.dumps(entry['coeffs'])}")
    if "timing" in report:
        lines.append(f"elapsed {report['timing']['seconds']:.3f} s")
    return "\n".join(lines) + "\n"


def run_scenario(raw: dict, timestamp: bool = True) -> tuple[dict, int]:
    cfg = resolve_config(raw)
    start = time.perf_counter()
    rep = RUNNERS_ALL[cfg["mode"]](_runtime(cfg))
    report = build_report(cfg, rep, time.perf_counter() - start, timestamp)
    return report, 0 if rep.ok else 1


def _run_item(args):
    raw, timestamp = args
    return run_scenario(raw, timestamp)


# -- entry point -------------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superperiod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        if name == "suite":
            sp.add_argument("name", choices=["grassmann", "elliptic", "mumford"])
        sp.add_argument("--config", help="JSON scenario config (a list runs several)")
        sp.add_argument("--out", help="report path (default stdout)")
        sp.add_argument("--format", choices=["json", "text"], default="json")
        sp.add_argument("--no-timestamp", action="store_true", help="omit timestamp and timing")
        sp.add_argument("--jobs", type=int, default=1)
    return p


def _load(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        loaded = _load(args.config)
        items = loaded if isinstance(loaded, list) else [loaded]
        raws = []
        for item in items:
            if not isinstance(item, dict):
                raise ConfigError("config must be an object or a list of objects")
            raw = dict(item)
            raw.update(SUBCOMMANDS[args.command])
            if args.command == "suite":
                raw["suite"] = args.name
            raws.append(raw)
        for raw in raws:
            resolve_config(raw)
    except ConfigError as e:
        print(f"superperiod: {e}", file=sys.stderr)
        return 2
    stamp = not args.no_timestamp
    work = [(raw, stamp) for raw in raws]
    if args.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_item, work))
    else:
        results = [_run_item(w) for w in work]
    reports = [r for r, _ in results]
    code = max(c for _, c in results)
    doc = reports[0] if len(reports) == 1 else {"schema": REPORT_SCHEMA, "reports": reports}
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = "".join(render_text(r) for r in reports)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as e:
            print(f"superperiod: cannot write report {args.out}: {e.strerror}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    if code:
        for r in reports:
            for name in r["failures"]:
                print(f"superperiod: comparison failed: {name}", file=sys.stderr)
    return code


__all__ = ["CONFIG_SCHEMA", "DEFAULTS", "ConfigError", "resolve_config", "run_scenario", "encode",
           "decode_complex", "render_text", "main"]
