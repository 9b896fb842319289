"""Minimal SVG builder: direct tag emission, stable attribute order."""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr


def _num(v: float) -> str:
    # fixed precision keeps output byte-stable across platforms
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class SVG:
    def __init__(self, width: float, height: float, tag: str) -> None:
        self.width = width
        self.height = height
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f"<!-- {tag} -->",
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" '
            f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
        ]

    @staticmethod
    def _attrs(attrs: dict) -> str:
        out = []
        for k, v in attrs.items():
            if v is None:
                continue
            if isinstance(v, float):
                v = _num(v)
            out.append(f"{k.rstrip('_').replace('_', '-')}={quoteattr(str(v))}")
        return " ".join(out)

    def el(self, name: str, text: str | None = None, **attrs) -> None:
        a = self._attrs(attrs)
        head = f"<{name} {a}" if a else f"<{name}"
        if text is None:
            self.parts.append(head + "/>")
        else:
            self.parts.append(f"{head}>{escape(text)}</{name}>")

    def rect(self, x: float, y: float, w: float, h: float, fill: str, **attrs) -> None:
        self.el("rect", x=float(x), y=float(y), width=float(w), height=float(h), fill=fill, **attrs)

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "#000", **attrs) -> None:
        self.el("line", x1=float(x1), y1=float(y1), x2=float(x2), y2=float(y2), stroke=stroke, **attrs)

    def text(self, x: float, y: float, s: str, size: float = 11.0, **attrs) -> None:
        self.el("text", s, x=float(x), y=float(y), font_size=float(size), font_family="sans-serif", **attrs)

    def polyline(self, points: list[tuple[float, float]], stroke: str, **attrs) -> None:
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
        self.el("polyline", points=pts, fill="none", stroke=stroke, **attrs)

    def raw(self, s: str) -> None:
        self.parts.append(s)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"
