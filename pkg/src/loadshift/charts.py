"""Hand-rolled SVG bar charts for attributions.

String assembly only, with fixed float formatting, so identical input
yields byte-identical output.
"""

from __future__ import annotations

from .explainers import Attribution

POSITIVE_FILL = "#ff0d57"
NEGATIVE_FILL = "#1e88e5"

_WIDTH = 640
_LABEL_X = 12
_PLOT_LEFT = 200.0
_PLOT_RIGHT = 620.0
_ROW_HEIGHT = 30
_BAR_HEIGHT = 18
_TOP_PAD = 14


def attribution_chart_svg(attr: Attribution, top: int = 6) -> str:
    """Horizontal bars for the largest |phi| features, signed around a zero line."""
    order = sorted(
        range(len(attr.contributions)),
        key=lambda i: (-abs(float(attr.contributions[i])), i),
    )[:top]
    scale = max((abs(float(attr.contributions[i])) for i in order), default=0.0)
    if scale == 0.0:
        scale = 1.0
    center = (_PLOT_LEFT + _PLOT_RIGHT) / 2.0
    half = (_PLOT_RIGHT - _PLOT_LEFT) / 2.0
    height = _TOP_PAD + _ROW_HEIGHT * len(order) + _TOP_PAD

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
        f'viewBox="0 0 {_WIDTH} {height}">',
        f'<line x1="{center:.1f}" y1="{_TOP_PAD:.1f}" x2="{center:.1f}" '
        f'y2="{height - _TOP_PAD:.1f}" stroke="#888888" stroke-width="1"/>',
    ]
    for row, i in enumerate(order):
        phi = float(attr.contributions[i])
        y = _TOP_PAD + row * _ROW_HEIGHT
        bar_y = y + (_ROW_HEIGHT - _BAR_HEIGHT) / 2.0
        width = abs(phi) / scale * half
        if phi >= 0:
            x = center
            fill = POSITIVE_FILL
            text_x = center + width + 6.0
            anchor = "start"
        else:
            x = center - width
            fill = NEGATIVE_FILL
            text_x = center - width - 6.0
            anchor = "end"
        label_y = y + _ROW_HEIGHT / 2.0 + 4.0
        parts.append(
            f'<text x="{_LABEL_X}" y="{label_y:.1f}" font-family="sans-serif" '
            f'font-size="13">{_escape(attr.feature_names[i])}</text>'
        )
        parts.append(
            f'<rect x="{x:.1f}" y="{bar_y:.1f}" width="{width:.1f}" '
            f'height="{_BAR_HEIGHT}" fill="{fill}"/>'
        )
        parts.append(
            f'<text x="{text_x:.1f}" y="{label_y:.1f}" font-family="sans-serif" '
            f'font-size="12" text-anchor="{anchor}">{phi:+.3f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
