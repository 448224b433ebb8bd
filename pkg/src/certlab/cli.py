"""Command-line harness.

    certlab run --config experiment.cfg [--seed N] [--out DIR] [--threads N]
    certlab report --manifest out/manifest.json --format md|svg
    certlab verify-all --out DIR [--seed N] [--threads N]

Exit codes: 0 all checks passed, 2 configuration error, 3 check failure,
4 I/O error.  The environment variable CERTLAB_THREADS overrides
--threads when set.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ExperimentConfig, build_config, config_hash, parse_config_text
from .errors import CertlabError, ConfigError, ReportError
from .experiments import EXPERIMENTS, default_params
from .manifest import RunManifest, load_manifest, write_csv, write_text_file
from .report import emit_markdown, emit_svg_charts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECKS = 3
EXIT_IO = 4


def _thread_count(cli_value: int | None) -> int:
    env = os.environ.get("CERTLAB_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"CERTLAB_THREADS must be an integer, got {env!r}") from exc
    return max(1, cli_value or 1)


def _execute(config: ExperimentConfig, threads: int) -> RunManifest:
    manifest = RunManifest(
        experiment=config.experiment,
        config_hash=config_hash(config),
        seed=config.seed,
        started_at=RunManifest.timestamp(),
    )
    result = EXPERIMENTS[config.experiment].runner(config.seed, config.params, threads)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for filename, (header, rows) in sorted(result.tables.items()):
        path = out_dir / filename
        digest = write_csv(path, header, rows)
        manifest.add_file(path, digest)
    for filename, text in sorted(result.texts.items()):
        path = out_dir / filename
        manifest.add_file(path, write_text_file(path, text))
    manifest.add_checks(result.checks)
    manifest.finished_at = RunManifest.timestamp()
    manifest.save(out_dir / "manifest.json")
    return manifest


def _summarize(manifest: RunManifest, stream) -> None:
    failed = [c for c in manifest.checks if not c["passed"]]
    for check in manifest.checks:
        status = "PASS" if check["passed"] else "FAIL"
        detail = f" -- {check['detail']}" if check.get("detail") else ""
        print(f"[{status}] {manifest.experiment}: {check['name']}{detail}", file=stream)
    verdict = "ALL CHECKS PASSED" if not failed else f"{len(failed)} CHECK(S) FAILED"
    print(f"{manifest.experiment}: {verdict}", file=stream)


def cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        raw = parse_config_text(text)
        if raw.experiment is None:
            raise ConfigError("run.experiment is required")
        schema = EXPERIMENTS[raw.experiment].schema if raw.experiment in EXPERIMENTS else {}
        config = build_config(
            raw,
            schema,
            experiment_names=set(EXPERIMENTS),
            seed_override=args.seed,
            out_override=args.out,
        )
        threads = _thread_count(args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = _execute(config, threads)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CertlabError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _summarize(manifest, sys.stdout)
    print(f"manifest: {Path(config.output_dir) / 'manifest.json'}")
    return EXIT_OK if manifest.all_passed else EXIT_CHECKS


def cmd_report(args) -> int:
    try:
        manifest = load_manifest(Path(args.manifest))
        base = Path(args.manifest).parent
        if args.format == "md":
            path = emit_markdown(manifest, base / "report.md")
            print(f"report: {path}")
        else:
            for path in emit_svg_charts(manifest, base):
                print(f"chart: {path}")
    except ReportError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_verify_all(args) -> int:
    try:
        threads = _thread_count(args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_root = Path(args.out)
    all_ok = True
    try:
        for name in sorted(EXPERIMENTS):
            config = ExperimentConfig(
                experiment=name,
                seed=args.seed,
                params=default_params(name),
                output_dir=str(out_root / name),
            )
            manifest = _execute(config, threads)
            _summarize(manifest, sys.stdout)
            all_ok &= manifest.all_passed
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print("verify-all: " + ("ALL CHECKS PASSED" if all_ok else "CHECK FAILURES"))
    return EXIT_OK if all_ok else EXIT_CHECKS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="certlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment from a config file")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--threads", type=int, default=None)
    run_p.set_defaults(func=cmd_run)

    report_p = sub.add_parser("report", help="render a report from a manifest")
    report_p.add_argument("--manifest", required=True)
    report_p.add_argument("--format", choices=("md", "svg"), required=True)
    report_p.set_defaults(func=cmd_report)

    verify_p = sub.add_parser("verify-all", help="run every experiment with defaults")
    verify_p.add_argument("--out", required=True)
    verify_p.add_argument("--seed", type=int, default=0)
    verify_p.add_argument("--threads", type=int, default=None)
    verify_p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
