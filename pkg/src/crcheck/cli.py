"""Command line front end.

Four subcommands: run executes the selected suites and writes the JSON
report, explain replays one identity with its rewrite trace, parse
echoes the canonical form of an expression, and catalog lists what the
data files contain.

Exit codes: 0 all selected checks pass, 1 a check failed, 2 the
configuration or command line is unusable, 3 a catalog file is broken.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import CatalogError, ConfigError, EngineError, UnknownIdentity
from .notation import format_expression, parse_expression
from .report import SUITES, RunConfig, run_to_report, summary_lines
from .suites import IdentityScript, load_adjudications, load_suite, run_script

_MODES = ("cr", "riemannian")
_INTERNAL_MODE = {"cr": "cr", "riemannian": "riem"}


# ---- flat key-value config files ----


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split_list(text: str) -> list[str]:
    return [p for p in text.replace(",", " ").split() if p]


_COERCE = {
    "suites": lambda s: tuple(_split_list(s)),
    "m_values": lambda s: tuple(int(p) for p in _split_list(s)),
    "n_values": lambda s: tuple(int(p) for p in _split_list(s)),
    "samples": int,
    "fields": int,
    "seed": int,
    "jobs": int,
    "tolerance_first_order": float,
    "tolerance_higher_order": float,
    "out": str,
    "catalog": str,
    "fail_fast": _parse_bool,
}


def parse_config_file(path: str | Path) -> dict:
    """Read a flat key = value file into RunConfig field overrides.

    Keys match the command line flags, with either hyphens or
    underscores; blank lines and # comments are skipped.
    """
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    overrides: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        field = key.strip().replace("-", "_")
        coerce = _COERCE.get(field)
        if coerce is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key.strip()!r}")
        try:
            overrides[field] = coerce(value.strip())
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: bad value for {key.strip()}: {err}") from err
    return overrides


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config is not None:
        config = replace(config, **parse_config_file(args.config))
    flags: dict = {}
    for field in _COERCE:
        value = getattr(args, field, None)
        if value is None:
            continue
        flags[field] = tuple(value) if isinstance(value, list) else value
    if flags:
        config = replace(config, **flags)
    return config


# ---- subcommands ----


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = run_to_report(config)
    for line in summary_lines(report):
        print(line)
    print(f"report written to {config.out}")
    return 0 if report["pass"] else 1


def _find_script(name: str, catalog: str | None) -> tuple[str, IdentityScript]:
    for mode in _MODES:
        _, scripts = load_suite(mode, catalog)
        if mode == "cr":
            scripts = scripts + load_adjudications(catalog)
        for script in scripts:
            if script.name == name:
                return mode, script
    raise UnknownIdentity(f"no identity named {name!r} in the catalog")


def _condensed_trace(trace) -> list[str]:
    # consecutive applications of one rule collapse to a single line
    lines: list[str] = []
    run_rule, run_len, last_terms = None, 0, 0
    for rule_name, terms in trace:
        if rule_name == run_rule:
            run_len, last_terms = run_len + 1, terms
            continue
        if run_rule is not None:
            times = f" x{run_len}" if run_len > 1 else ""
            lines.append(f"  {run_rule}{times} -> {last_terms} terms")
        run_rule, run_len, last_terms = rule_name, 1, terms
    if run_rule is not None:
        times = f" x{run_len}" if run_len > 1 else ""
        lines.append(f"  {run_rule}{times} -> {last_terms} terms")
    return lines


def _cmd_explain(args: argparse.Namespace) -> int:
    mode, script = _find_script(args.name, args.catalog)
    rules, _ = load_suite(mode, args.catalog)
    print(f"{script.name}  ({script.citation})")
    if script.ops != ("-",):
        print(f"applied first: {', '.join(script.ops)}")
    print(f"  {script.lhs_text}")
    print(f"    => {script.rhs_text}")
    result = run_script(rules, script)
    print("trace:")
    for line in _condensed_trace(result.check.trace):
        print(line)
    terms = len(result.check.normal_form.terms)
    print(f"normal form: {terms} terms ({result.check.verdict}, expected {script.expected})")
    return 0 if result.ok else 1


def _cmd_parse(args: argparse.Namespace) -> int:
    rules, _ = load_suite(args.mode, args.catalog)
    try:
        expr = parse_expression(_INTERNAL_MODE[args.mode], args.expression, rules.licenses)
    except CatalogError:
        raise
    except EngineError as err:
        raise ConfigError(f"cannot parse expression: {err}") from err
    print(format_expression(expr))
    return 0


def _cmd_catalog(args: argparse.Namespace) -> int:
    for mode in _MODES:
        rules, scripts = load_suite(mode, args.catalog)
        print(f"{mode} rules:")
        for rule in rules.entries:
            print(f"  {rule.name:<10} {rule.kind:<11} {rule.citation}")
        print(f"{mode} identities:")
        for script in scripts:
            print(f"  {script.name:<24} {script.citation}")
    print("cr adjudications:")
    for script in load_adjudications(args.catalog):
        print(f"  {script.name:<24} expected {script.expected}; {script.citation}")
    return 0


# ---- argument parsing ----


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crcheck",
        description="verify the sphere and CR-sphere identity catalogs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run suites and write the JSON report")
    run.add_argument("--config", help="flat key = value file; flags override it")
    run.add_argument("--suites", type=_split_list, metavar="NAMES",
                     help=f"comma separated subset of: {', '.join(SUITES)}")
    run.add_argument("--m-values", dest="m_values", type=lambda s: [int(p) for p in _split_list(s)],
                     metavar="INTS", help="CR sphere dimensions S^(2m+1)")
    run.add_argument("--n-values", dest="n_values", type=lambda s: [int(p) for p in _split_list(s)],
                     metavar="INTS", help="round sphere dimensions S^n")
    run.add_argument("--samples", type=int, help="sample points per field")
    run.add_argument("--fields", type=int, help="random test fields per check")
    run.add_argument("--seed", type=int, help="base seed for every random stream")
    run.add_argument("--tolerance-first-order", dest="tolerance_first_order", type=float)
    run.add_argument("--tolerance-higher-order", dest="tolerance_higher_order", type=float)
    run.add_argument("--out", help="report path (default report.json)")
    run.add_argument("--fail-fast", dest="fail_fast", action=argparse.BooleanOptionalAction,
                     default=None, help="stop at the first failing job")
    run.add_argument("--jobs", type=int, help="worker threads (default 4)")
    run.add_argument("--catalog", help="directory with the rule and identity files")
    run.set_defaults(handler=_cmd_run)

    explain = sub.add_parser("explain", help="replay one identity with its trace")
    explain.add_argument("name", help="identity or adjudication name")
    explain.add_argument("--catalog")
    explain.set_defaults(handler=_cmd_explain)

    parse = sub.add_parser("parse", help="echo the canonical form of an expression")
    parse.add_argument("expression")
    parse.add_argument("--mode", choices=_MODES, default="cr")
    parse.add_argument("--catalog")
    parse.set_defaults(handler=_cmd_parse)

    catalog = sub.add_parser("catalog", help="list rules and identities with citations")
    catalog.add_argument("--catalog")
    catalog.set_defaults(handler=_cmd_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except UnknownIdentity as err:
        print(f"UnknownIdentity: {err}", file=sys.stderr)
        return 2
    except CatalogError as err:
        print(f"catalog error: {err}", file=sys.stderr)
        return 3
    except EngineError as err:
        # a check blew up instead of failing cleanly; still a failed run
        print(f"check error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
