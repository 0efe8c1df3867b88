"""SVG flight-path figures from episode logs."""

from __future__ import annotations

from pathlib import Path

from jinja2 import Environment, PackageLoader, select_autoescape

from gridcover.core.constants import PATH_PALETTE
from gridcover.core.logging import get_logger
from gridcover.io.episode_log import EpisodeLog

logger = get_logger(__name__)

_env = Environment(
    loader=PackageLoader("gridcover", "templates"),
    autoescape=select_autoescape(["svg", "xml"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


def agent_color(agent_id: int) -> str:
    return PATH_PALETTE[agent_id % len(PATH_PALETTE)]


def render_paths(log: EpisodeLog, out_path: str | Path | None = None, cell_px: int = 24) -> str:
    """Grid, obstacle glyphs, one coloured polyline per agent, start/end markers.

    NRL logs that carry a region map get a translucent Voronoi underlay.
    """
    header = log.header
    size = header.world.grid_size
    extent = size * cell_px
    half = cell_px / 2

    def centre(cell: tuple[int, int]) -> dict[str, float]:
        return {"x": cell[1] * cell_px + half, "y": cell[0] * cell_px + half}

    agents = []
    for i, path in enumerate(log.paths()):
        points = " ".join(f"{c[1] * cell_px + half:g},{c[0] * cell_px + half:g}" for c in path)
        agents.append(
            {
                "id": i,
                "color": agent_color(i),
                "points": points,
                "start": centre(path[0]),
                "end": centre(path[-1]),
            }
        )

    regions = []
    if header.regions is not None:
        for r, row in enumerate(header.regions):
            for c, owner in enumerate(row):
                regions.append(
                    {"x": c * cell_px, "y": r * cell_px, "color": agent_color(owner)}
                )

    svg = _env.get_template("flight_paths.svg").render(
        title=f"{header.algorithm} seed {header.seed}",
        width=extent,
        height=extent,
        cell_px=cell_px,
        grid_lines=[i * cell_px for i in range(size + 1)],
        obstacles=[{"x": c * cell_px, "y": r * cell_px} for r, c in header.obstacles],
        regions=regions,
        agents=agents,
        stroke=max(cell_px // 8, 2),
        marker=max(cell_px // 5, 3),
    )
    if out_path is not None:
        out = Path(out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(svg, encoding="utf-8")
        logger.info("paths_rendered", path=str(out), agents=len(agents))
    return svg
