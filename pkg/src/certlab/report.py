"""Reports from run manifests: markdown check tables and SVG line charts.

SVG output is generated directly (header, axes, tick marks, polylines) so
the artifact has zero rendering dependencies.  Chart builders read the CSVs
referenced by the manifest back from disk; a missing file is a ReportError
naming it.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ReportError
from .manifest import RunManifest, read_csv

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_markdown(manifest: RunManifest, out_path: Path) -> Path:
    lines = [
        f"# Run report: {manifest.experiment}",
        "",
        f"- config hash: `{manifest.config_hash}`",
        f"- seed: {manifest.seed}",
        f"- artifact version: {manifest.version}",
        f"- started: {manifest.started_at}",
        f"- finished: {manifest.finished_at}",
        "",
        "## Checks",
        "",
        "| check | status | detail |",
        "|---|---|---|",
    ]
    for check in manifest.checks:
        status = "pass" if check["passed"] else "FAIL"
        detail = check.get("detail", "").replace("|", "\\|")
        lines.append(f"| {check['name']} | {status} | {detail} |")
    failures = [c for c in manifest.checks if not c["passed"]]
    lines.append("")
    if failures:
        lines.append(f"**{len(failures)} CHECK(S) FAILED**")
    else:
        lines.append("**ALL CHECKS PASSED**")
    lines += ["", "## Files", ""]
    for entry in manifest.files:
        path = Path(entry["path"])
        if not path.exists():
            raise ReportError(f"manifest references a missing file: {path}")
        lines.append(f"- `{entry['path']}` (sha256 `{entry['sha256'][:16]}...`)")
    out_path.write_text("\n".join(lines) + "\n")
    return out_path


def _svg_line_chart(
    series: list[tuple[str, list[float], list[float]]],
    title: str,
    x_label: str,
    y_label: str,
    out_path: Path,
    log_x: bool = False,
) -> Path:
    import math

    width, height = 640, 400
    left, right, top, bottom = 70, 20, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom

    def xform(x: float) -> float:
        return math.log10(x) if log_x else x

    xs_all = [xform(x) for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(ys_all), max(ys_all)
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    def px(x: float) -> float:
        return left + (xform(x) - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return top + (y_max - y) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">{x_label}</text>',
        f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{y_label}</text>',
    ]
    for i in range(5):
        tick_x = x_min + i * (x_max - x_min) / 4
        tick_y = y_min + i * (y_max - y_min) / 4
        sx = left + i * plot_w / 4
        sy = top + plot_h - i * plot_h / 4
        x_text = f"1e{tick_x:.1f}" if log_x else f"{tick_x:.3g}"
        parts.append(f'<line x1="{sx:.1f}" y1="{top + plot_h}" x2="{sx:.1f}" y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{sx:.1f}" y="{top + plot_h + 18}" text-anchor="middle" font-size="10">{x_text}</text>'
        )
        parts.append(f'<line x1="{left - 5}" y1="{sy:.1f}" x2="{left}" y2="{sy:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{left - 8}" y="{sy + 3:.1f}" text-anchor="end" font-size="10">{tick_y:.3g}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        parts.append(
            f'<text x="{left + plot_w - 4}" y="{top + 14 + 14 * idx}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    out_path.write_text("\n".join(parts) + "\n")
    return out_path


def _find_csv(manifest: RunManifest, suffix: str) -> Path | None:
    for entry in manifest.files:
        if entry["path"].endswith(suffix):
            return Path(entry["path"])
    return None


def emit_svg_charts(manifest: RunManifest, out_dir: Path) -> list[Path]:
    """Line charts for the sweep-style CSVs of the known experiments."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def load(suffix: str):
        path = _find_csv(manifest, suffix)
        if path is None:
            return None
        header, rows = read_csv(path)
        return header, [[_maybe_float(cell) for cell in row] for row in rows]

    if manifest.experiment == "accuracy-sweep":
        table = load("accuracy_sweep.csv")
        if table is None:
            raise ReportError("accuracy-sweep manifest lists no accuracy_sweep.csv")
        _, rows = table
        xs = [r[0] for r in rows]
        written.append(
            _svg_line_chart(
                [("analytic", xs, [r[1] for r in rows]), ("empirical", xs, [r[2] for r in rows])],
                "Ranking retention vs noise scale",
                "sigma", "retention", out_dir / "accuracy_sweep.svg", log_x=True,
            )
        )
    elif manifest.experiment == "error-accumulation":
        table = load("error_accumulation.csv")
        if table is None:
            raise ReportError("error-accumulation manifest lists no error_accumulation.csv")
        _, rows = table
        dims = sorted({r[2] for r in rows})
        pick = dims[len(dims) // 2]
        series = []
        for lf in sorted({r[0] for r in rows}):
            pts = sorted((r[1], r[5]) for r in rows if r[0] == lf and r[2] == pick)
            series.append((f"L={lf:g}", [p[0] for p in pts], [p[1] for p in pts]))
        written.append(
            _svg_line_chart(
                series, f"Final squared error vs steps (dim {pick:g})",
                "steps", "mean squared error", out_dir / "error_accumulation.svg",
            )
        )
    elif manifest.experiment == "curriculum":
        table = load("curriculum_sweep.csv")
        if table is None:
            raise ReportError("curriculum manifest lists no curriculum_sweep.csv")
        _, rows = table
        series = []
        for provenance in ("biased", "curriculum"):
            pts = sorted((r[0], r[2]) for r in rows if r[1] == provenance)
            if pts:
                series.append((provenance, [p[0] for p in pts], [p[1] for p in pts]))
        written.append(
            _svg_line_chart(
                series, "Expert gap vs sample size", "n", "mean gap",
                out_dir / "curriculum_sweep.svg", log_x=True,
            )
        )
    elif manifest.experiment == "cib-frontier":
        table = load("cib_frontier.csv")
        if table is None:
            raise ReportError("cib-frontier manifest lists no cib_frontier.csv")
        _, rows = table
        pts = sorted((r[1], r[2]) for r in rows)
        written.append(
            _svg_line_chart(
                [("frontier", [p[0] for p in pts], [p[1] for p in pts])],
                "Information plane frontier", "retained past information",
                "predictive information", out_dir / "cib_frontier.svg",
            )
        )
    elif manifest.experiment == "divergence-asymptote":
        table = load("divergence_asymptote.csv")
        if table is None:
            raise ReportError("divergence-asymptote manifest lists no divergence_asymptote.csv")
        _, rows = table
        xs = [r[0] for r in rows]
        written.append(
            _svg_line_chart(
                [("exact", xs, [r[1] for r in rows]), ("asymptote", xs, [r[2] for r in rows])],
                "Explorer divergence vs concentration", "kappa", "divergence (nats)",
                out_dir / "divergence_asymptote.svg", log_x=True,
            )
        )
    elif manifest.experiment == "tradeoff-scan":
        table = load("tradeoff_scan.csv")
        if table is None:
            raise ReportError("tradeoff-scan manifest lists no tradeoff_scan.csv")
        _, rows = table
        series = []
        for b in sorted({r[1] for r in rows}):
            pts = sorted((r[0], r[2]) for r in rows if r[1] == b)
            series.append((f"bound B={b:g}", [p[0] for p in pts], [p[1] for p in pts]))
            pts_emp = sorted((r[0], r[3]) for r in rows if r[1] == b)
            series.append((f"oracle B={b:g}", [p[0] for p in pts_emp], [p[1] for p in pts_emp]))
        written.append(
            _svg_line_chart(
                series, "Certainty cost floor vs top probability",
                "top probability", "divergence (nats)", out_dir / "tradeoff_scan.svg",
            )
        )
    elif manifest.experiment == "dag-exploration":
        table = load("dag_divergence.csv")
        if table is None:
            raise ReportError("dag-exploration manifest lists no dag_divergence.csv")
        _, rows = table
        xs = [r[0] for r in rows]
        written.append(
            _svg_line_chart(
                [("mean divergence", xs, [r[1] for r in rows])],
                "Exploration divergence vs concentration", "kappa", "divergence (nats)",
                out_dir / "dag_divergence.svg", log_x=True,
            )
        )
    # noise-discrete has no sweep-shaped table; nothing to chart
    return written


def _maybe_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return cell
