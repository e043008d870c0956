"""Dependency-free SVG scatter of normalized triples on the cone slice."""

from __future__ import annotations

from . import cone

__all__ = ["render_slice_svg"]

_SIZE = 800
_HALF_EXTENT = 0.5  # chart units shown on each side of the origin

# slice-triangle corners: where one side vanishes (a=0, b=0, c=0)
_CORNERS = [(0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)]


def _to_px(xy):
    x, y = xy
    px = (x / _HALF_EXTENT * 0.5 + 0.5) * _SIZE
    py = (0.5 - y / _HALF_EXTENT * 0.5) * _SIZE
    return px, py


def render_slice_svg(triples, defects=None, tol: float = 1e-9) -> str:
    """SVG scatter of simplex-normalized triples.

    The boundary of the cone slice (the degenerate triples) is drawn as
    a triangle; points with defect <= tol are colored distinctly.
    """
    triples = list(triples)
    if defects is None:
        defects = [cone.defect(t) for t in triples]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
    ]
    corner_px = [_to_px(cone.simplex_project(c)) for c in _CORNERS]
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in corner_px)
    parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="2"/>')
    cx, cy = _to_px((0.0, 0.0))
    parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="black"/>')
    degenerate = 0
    for t, d in zip(triples, defects):
        x, y = _to_px(cone.simplex_project(t))
        if d <= tol:
            color = "#d62728"
            degenerate += 1
        else:
            color = "#1f77b4"
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}" fill-opacity="0.6"/>')
    parts.append(
        f'<text x="10" y="{_SIZE - 12}" font-family="monospace" font-size="14">'
        f"{len(triples)} triples, {degenerate} degenerate (tol {tol:g})</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
