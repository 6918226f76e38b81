"""Rank-table reports: per-tau means CSV and colour-grouped SVG heatmaps.

Layout follows the comparison figures this harness reproduces: methods on the
vertical axis, the 18 models on the horizontal axis, lighter cells for more
competitive rank groups, and a legend row from "Less competitive" to "More
competitive".  SVG output is plain deterministic XML.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .models import PROXY_MODEL_IDS
from .simulate import ErrorRecord, RankRow, mean_errors, rank_methods

LIGHT_RGB = (247, 251, 255)
DARK_RGB = (8, 48, 107)

CELL_W = 46
CELL_H = 30
LEFT_PAD = 110
TOP_PAD = 58
FOOT_PAD = 54


@dataclass(frozen=True)
class RankCell:
    method: str
    mean: float
    stderr: float
    group: int
    groups_total: int


def method_order(records: Sequence[ErrorRecord]) -> list[str]:
    """Methods in order of first appearance (the config order)."""
    seen: list[str] = []
    for r in records:
        if r.method not in seen:
            seen.append(r.method)
    return seen


def rank_table(records: Sequence[ErrorRecord], alpha: float
               ) -> dict[tuple[int, float], list[RankCell]]:
    """Rank grouping for every (model, tau) cell present in the records."""
    cells = sorted({(r.model_id, r.tau) for r in records})
    out: dict[tuple[int, float], list[RankCell]] = {}
    for model_id, tau in cells:
        methods = sorted({r.method for r in records
                          if r.model_id == model_id and r.tau == tau})
        if len(methods) >= 2:
            rows = rank_methods(records, model_id, tau, alpha)
        else:
            mean, stderr, _ = mean_errors(records, model_id, methods[0], tau)
            rows = [RankRow(methods[0], mean, stderr, 1)]
        total = max(r.group for r in rows)
        out[(model_id, tau)] = [RankCell(r.method, r.mean, r.stderr, r.group, total)
                                for r in rows]
    return out


MEANS_HEADER = "model,method,tau,mean,stderr,group"


def means_csv(records: Sequence[ErrorRecord], alpha: float) -> str:
    table = rank_table(records, alpha)
    lines = [MEANS_HEADER]
    for (model_id, tau), rows in sorted(table.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        for row in rows:
            lines.append(f"{model_id},{row.method},{tau!r},{row.mean!r},{row.stderr!r},{row.group}")
    return "\n".join(lines) + "\n"


def _shade(group: int, total: int) -> str:
    """Lighter = better; a lone group stays lightest."""
    frac = 0.0 if total <= 1 else (group - 1) / (total - 1)
    rgb = tuple(round(l + frac * (d - l)) for l, d in zip(LIGHT_RGB, DARK_RGB))
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def heatmap_svg(records: Sequence[ErrorRecord], tau: float, alpha: float) -> str:
    """One tau's comparison grid as deterministic SVG."""
    sub = [r for r in records if r.tau == tau]
    if not sub:
        raise ValueError(f"no records for tau={tau!r}")
    methods = method_order(sub)
    models = sorted({r.model_id for r in sub})
    table = rank_table(sub, alpha)
    cell_of = {(mid, row.method): row for (mid, t), rows in table.items() for row in rows}

    width = LEFT_PAD + CELL_W * len(models) + 20
    height = TOP_PAD + CELL_H * len(methods) + FOOT_PAD
    missing: list[str] = []
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" '
        'stroke="#999999" stroke-width="2"/></pattern></defs>',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{LEFT_PAD}" y="16" font-size="13">Comparison at tau={tau:g} '
        f'(methods vs models; lighter is more competitive)</text>',
    ]
    # legend gradient: dark (less competitive) to light (more competitive)
    steps = 24
    lg_w, lg_y = 10, 26
    lg_x = LEFT_PAD
    for i in range(steps):
        frac = 1.0 - i / (steps - 1)
        rgb = tuple(round(l + frac * (d - l)) for l, d in zip(LIGHT_RGB, DARK_RGB))
        color = f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"
        parts.append(f'<rect x="{lg_x + i * lg_w}" y="{lg_y}" width="{lg_w}" '
                     f'height="12" fill="{color}"/>')
    parts.append(f'<text x="{lg_x}" y="{lg_y + 24}" font-size="10">Less competitive</text>')
    parts.append(f'<text x="{lg_x + steps * lg_w}" y="{lg_y + 24}" font-size="10" '
                 f'text-anchor="end">More competitive</text>')

    for col, mid in enumerate(models):
        x = LEFT_PAD + col * CELL_W + CELL_W // 2
        parts.append(f'<text x="{x}" y="{TOP_PAD - 6}" font-size="11" '
                     f'text-anchor="middle">{mid}</text>')
    for row, method in enumerate(methods):
        y = TOP_PAD + row * CELL_H + CELL_H // 2 + 4
        parts.append(f'<text x="{LEFT_PAD - 8}" y="{y}" font-size="11" '
                     f'text-anchor="end">{_xml_escape(method)}</text>')
        for col, mid in enumerate(models):
            x = LEFT_PAD + col * CELL_W
            ytop = TOP_PAD + row * CELL_H
            cell = cell_of.get((mid, method))
            if cell is None:
                fill = "url(#hatch)"
                missing.append(f"model {mid} / {method}")
            else:
                fill = _shade(cell.group, cell.groups_total)
            parts.append(f'<rect x="{x}" y="{ytop}" width="{CELL_W}" height="{CELL_H}" '
                         f'fill="{fill}" stroke="#444444" stroke-width="0.5"/>')

    footer = [
        f"Rank groups from paired two-sided t-tests on replicate-aligned errors, alpha={alpha:g}, "
        "no multiplicity correction; adjacent means merge when equality is not rejected.",
    ]
    proxies = sorted(set(models) & set(PROXY_MODEL_IDS))
    if proxies:
        footer.append(f"Models {', '.join(str(p) for p in proxies)} use documented "
                      "proxy density parameterizations.")
    if missing:
        footer.append("Missing cells (hatched): " + "; ".join(missing) + ".")
    ybase = TOP_PAD + CELL_H * len(methods) + 16
    for i, line in enumerate(footer):
        parts.append(f'<text x="{LEFT_PAD}" y="{ybase + 13 * i}" font-size="9" '
                     f'fill="#333333">{_xml_escape(line)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml_escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
