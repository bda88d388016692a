"""Minimal static SVG emission: scatter plots, boxes, and level-set contours.

Plots are views; every figure has a CSV holding the full underlying data.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SvgCanvas", "contour_segments"]


class SvgCanvas:
    """Maps a data window onto a fixed-size SVG viewport (y axis flipped)."""

    def __init__(
        self,
        x_range: tuple[float, float],
        y_range: tuple[float, float],
        width: int = 640,
        height: int = 480,
        margin: int = 45,
        title: str = "",
    ):
        self.width = width
        self.height = height
        self.margin = margin
        self.x0, self.x1 = float(x_range[0]), float(x_range[1])
        self.y0, self.y1 = float(y_range[0]), float(y_range[1])
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self._elems: list[str] = []
        if title:
            self.text(0.5 * (self.x0 + self.x1), None, title, anchor="middle", px_y=margin - 20)

    def _px(self, x: float) -> float:
        span = self.width - 2 * self.margin
        return self.margin + (x - self.x0) / (self.x1 - self.x0) * span

    def _py(self, y: float) -> float:
        span = self.height - 2 * self.margin
        return self.height - self.margin - (y - self.y0) / (self.y1 - self.y0) * span

    def frame(self, x_label: str = "", y_label: str = ""):
        self.rect(self.x0, self.y0, self.x1, self.y1, stroke="#000", fill="none")
        if x_label:
            self.text(0.5 * (self.x0 + self.x1), None, x_label, anchor="middle",
                      px_y=self.height - 10)
        if y_label:
            px, py = self.margin - 30, self.height / 2
            self._elems.append(
                f'<text x="{px:.2f}" y="{py:.2f}" text-anchor="middle" font-size="13" '
                f'transform="rotate(-90 {px:.2f} {py:.2f})">{y_label}</text>'
            )

    def rect(self, xa, ya, xb, yb, stroke="#000", fill="none", width=1.5, dash=""):
        x, y = self._px(min(xa, xb)), self._py(max(ya, yb))
        w = abs(self._px(xb) - self._px(xa))
        h = abs(self._py(yb) - self._py(ya))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._elems.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'stroke="{stroke}" fill="{fill}" stroke-width="{width}"{extra}/>'
        )

    def circle(self, x, y, r=3.0, stroke="#1f77b4", fill="none"):
        self._elems.append(
            f'<circle cx="{self._px(x):.2f}" cy="{self._py(y):.2f}" r="{r}" '
            f'stroke="{stroke}" fill="{fill}" stroke-width="1.2"/>'
        )

    def cross(self, x, y, r=3.0, stroke="#d62728"):
        px, py = self._px(x), self._py(y)
        self._elems.append(
            f'<path d="M {px - r:.2f} {py - r:.2f} L {px + r:.2f} {py + r:.2f} '
            f'M {px - r:.2f} {py + r:.2f} L {px + r:.2f} {py - r:.2f}" '
            f'stroke="{stroke}" stroke-width="1.2" fill="none"/>'
        )

    def polyline(self, xs, ys, stroke="#000", width=1.8, dash=""):
        pts = " ".join(f"{self._px(x):.2f},{self._py(y):.2f}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._elems.append(
            f'<polyline points="{pts}" stroke="{stroke}" stroke-width="{width}" '
            f'fill="none"{extra}/>'
        )

    def segments(self, segs, stroke="#d62728", width=1.8, dash="6,4"):
        """Draw disconnected segments ((x1, y1), (x2, y2)) as one path."""
        if not segs:
            return
        parts = [
            f"M {self._px(ax):.2f} {self._py(ay):.2f} L {self._px(bx):.2f} {self._py(by):.2f}"
            for (ax, ay), (bx, by) in segs
        ]
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._elems.append(
            f'<path d="{" ".join(parts)}" stroke="{stroke}" stroke-width="{width}" '
            f'fill="none"{extra}/>'
        )

    def text(self, x, y, content, anchor="start", size=13, px_y=None):
        px = self._px(x)
        py = self._py(y) if px_y is None else px_y
        self._elems.append(
            f'<text x="{px:.2f}" y="{py:.2f}" text-anchor="{anchor}" '
            f'font-size="{size}">{content}</text>'
        )

    def to_string(self) -> str:
        body = "\n".join(self._elems)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="#fff"/>\n'
            f"{body}\n</svg>\n"
        )

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_string())


def contour_segments(xs, ys, values, level):
    """Marching-squares segments of the level set of a grid function.

    ``values[iy, ix]`` is the function at (xs[ix], ys[iy]).  Returns a list
    of ((x1, y1), (x2, y2)) segments; saddle cells are disambiguated by the
    cell-center average.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    Z = np.asarray(values, dtype=np.float64)
    if Z.shape != (len(ys), len(xs)):
        raise ValueError("values must have shape (len(ys), len(xs))")
    segs = []
    for iy in range(len(ys) - 1):
        for ix in range(len(xs) - 1):
            corners = [
                (xs[ix], ys[iy], Z[iy, ix]),
                (xs[ix + 1], ys[iy], Z[iy, ix + 1]),
                (xs[ix + 1], ys[iy + 1], Z[iy + 1, ix + 1]),
                (xs[ix], ys[iy + 1], Z[iy + 1, ix]),
            ]
            above = [z >= level for _, _, z in corners]
            if all(above) or not any(above):
                continue
            crossings = []
            for k in range(4):
                xa, ya, za = corners[k]
                xb, yb, zb = corners[(k + 1) % 4]
                if above[k] != above[(k + 1) % 4]:
                    t = (level - za) / (zb - za)
                    crossings.append((xa + t * (xb - xa), ya + t * (yb - ya)))
            if len(crossings) == 2:
                segs.append((crossings[0], crossings[1]))
            elif len(crossings) == 4:
                # Saddle: pair crossings against the center sign.
                center_above = np.mean([z for _, _, z in corners]) >= level
                if above[0] == center_above:
                    segs.append((crossings[0], crossings[3]))
                    segs.append((crossings[1], crossings[2]))
                else:
                    segs.append((crossings[0], crossings[1]))
                    segs.append((crossings[2], crossings[3]))
    return segs
