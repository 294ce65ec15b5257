"""CSV, SVG and manifest writers shared by the CLI and the experiment harness."""

from __future__ import annotations

import csv
import io
import platform
from pathlib import Path

import numpy as np
import scipy

from gafzeros import __version__


def fmt(x) -> str:
    """Doubles with 17 significant digits (lossless round trip)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def header_line(command: str, params: dict) -> str:
    parts = [f"{k}={v}" for k, v in params.items()]
    return f"# gafzeros {__version__} {command} " + " ".join(parts)


def csv_text(header: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\r\n")
    w = csv.writer(buf)
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_text(path, text: str):
    # newline="" keeps the CRLF record terminators byte-exact on every platform
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_csv(path, header: str, columns, rows):
    write_text(path, csv_text(header, columns, rows))


def read_csv(path):
    """Rows of a file written by :func:`write_csv`, header comment skipped."""
    with open(Path(path), encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rdr = csv.reader(lines)
    columns = next(rdr)
    return columns, [row for row in rdr]


def zeros_svg(zero_sets, r: float, title: str = "", size: int = 400) -> str:
    """Scatter of zeros with the unit circle and the working circle ``|z| = r``."""
    half = size / 2.0
    scale = 0.45 * size

    def xy(z):
        return half + scale * z.real, half - scale * z.imag

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<title>{title}</title>",
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<circle cx="{half:.3f}" cy="{half:.3f}" r="{scale:.3f}" fill="none" stroke="black"/>',
        f'<circle cx="{half:.3f}" cy="{half:.3f}" r="{scale * r:.3f}" fill="none" stroke="gray" stroke-dasharray="4 3"/>',
    ]
    for zs in zero_sets:
        for z in np.asarray(zs, dtype=complex):
            x, y = xy(z)
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def versions() -> dict:
    return {
        "gafzeros": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def manifest_text(entries: dict) -> str:
    lines = [f"{k} = {v}" for k, v in {**versions(), **entries}.items()]
    return "\n".join(lines) + "\n"
