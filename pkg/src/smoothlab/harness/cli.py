"""Command line entry point: ``smoothlab {list-estimates, verify, sweep, selftest}``.

Exit codes: 0 pass, 2 acceptance failure, 3 configuration or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError, DomainError, NumericError, UsageError
from . import registry
from .report import write_outcome

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 2, 3


def parse_overrides(tokens) -> dict:
    """``["--m", "2", "--eta-min", "1e-4", "--negative-control"]`` to a dict (bare flags mean true)."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise ConfigError(f"unexpected argument {tok!r}; parameters look like --name value")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens) and not tokens[i + 1].startswith("--"):
            value = tokens[i + 1]
            i += 2
        else:
            value = "true"
            i += 1
        out[key.replace("-", "_")] = value
    return out


def read_config(path) -> dict:
    """A JSON object, or flat ``key = value`` lines (``#`` starts a comment)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        data[key.replace("-", "_")] = value
    return data


def _report(outcome, out_dir, stream):
    if outcome.negative_control:
        status = "CONTROL"
    else:
        status = "PASS" if outcome.passed else "FAIL"
    shown = {k: v for k, v in outcome.metrics.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}
    detail = " ".join(f"{k}={v:.4g}" for k, v in shown.items())
    print(f"{status} {outcome.estimate_id} {detail}".rstrip(), file=stream)
    if out_dir is not None:
        csv_path, json_path = write_outcome(outcome, out_dir)
        print(f"  wrote {csv_path} and {json_path}", file=stream)
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def cmd_list(args, extra):
    width = max(len(k) for k in registry.REGISTRY)
    for e in registry.REGISTRY.values():
        print(f"{e.id:<{width}}  {e.kind:<10}  {e.statement}")
    return EXIT_PASS


def cmd_verify(args, extra):
    entry = registry.get(args.estimate_id)
    outcome = entry.run(parse_overrides(extra))
    return _report(outcome, args.out, sys.stdout)


def cmd_sweep(args, extra):
    if extra:
        raise ConfigError(f"sweep takes no extra parameters, got {extra}")
    data = read_config(args.config)
    eid = data.pop("estimate", None) or data.pop("estimate_id", None)
    if eid is None:
        raise ConfigError("config must name an estimate (estimate = <id>)")
    outcome = registry.get(str(eid)).run(data, explicit=True)
    return _report(outcome, args.out, sys.stdout)


def cmd_selftest(args, extra):
    if extra:
        raise ConfigError(f"selftest takes no extra parameters, got {extra}")
    code = EXIT_PASS
    for eid in registry.identity_ids():
        if _report(registry.get(eid).run(), args.out, sys.stdout) != EXIT_PASS:
            code = EXIT_FAIL
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothlab", allow_abbrev=False,
        description="Numerical checks of smoothing, resolvent and trace estimates for dispersive multipliers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, allow_abbrev=False, help=help_text)
        p.set_defaults(func=func)
        return p

    add("list-estimates", cmd_list, "list registry ids with the statement each one checks")
    p = add("verify", cmd_verify, "run one estimate; extra --name value pairs override defaults")
    p.add_argument("estimate_id")
    p.add_argument("--out", default=None, help="directory for the CSV rows and JSON summary")
    p = add("sweep", cmd_sweep, "run an estimate from a key=value or JSON config")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p = add("selftest", cmd_selftest, "run every identity-class check")
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        return args.func(args, extra)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
