"""
Static SVG figures of anchor sets and their arrangements
Disks are outlined circles (one <g id="disk-i"> group each), anchors are dots, face
representatives are colored by a hash of their signature and the domain square is drawn
"""
import logging
import zlib
from pathlib import Path
from typing import Iterable, Optional, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from app.models.schemas import AnchorSet, Point, Signature  # noqa: E402

logger = logging.getLogger(__name__)

PALETTE = plt.get_cmap("tab20")


def signature_color(sig: Signature):
    """Stable color per signature"""
    digest = zlib.crc32(",".join(str(i) for i in sig.members).encode("ascii"))
    return PALETTE(digest % PALETTE.N)


def render_svg(
    path: str,
    anchors: AnchorSet,
    R: float,
    side: float,
    representatives: Optional[Iterable[Tuple[Point, Signature]]] = None,
    title: Optional[str] = None,
) -> Path:
    """Write the figure to `path`; output is deterministic for identical inputs"""
    plt.rcParams["svg.hashsalt"] = "colander"
    fig, ax = plt.subplots(figsize=(6, 6))
    try:
        ax.add_patch(Rectangle((0.0, 0.0), side, side, fill=False, edgecolor="black", linewidth=1.2, gid="domain"))

        pts = anchors.as_array()
        for i, (x, y) in enumerate(pts):
            ax.add_patch(Circle((x, y), R, fill=False, edgecolor="tab:blue", linewidth=0.6, alpha=0.6, gid=f"disk-{i}"))
        if len(pts):
            ax.scatter(pts[:, 0], pts[:, 1], s=6, color="black", zorder=3, gid="anchors")

        for k, (rep, sig) in enumerate(representatives or []):
            ax.scatter([rep.x], [rep.y], s=10, marker="s", color=signature_color(sig), zorder=4, gid=f"rep-{k}")

        pad = R if len(pts) else 0.05 * side
        lo = min(0.0, float(pts.min())) - pad if len(pts) else -pad
        hi = max(side, float(pts.max())) + pad if len(pts) else side + pad
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)

        out = Path(path)
        fig.savefig(out, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info(f"✅ SVG with {len(pts)} disks written to {out}")
    return out
