"""Tests for gridcover.io.render — SVG flight-path figures."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from gridcover.agents.nrl import NrlPolicy
from gridcover.core.constants import PATH_PALETTE
from gridcover.evaluation.harness import record_episode
from gridcover.io.render import agent_color, render_paths
from gridcover.sim.world import generate_world

SVG = "{http://www.w3.org/2000/svg}"


def _log(tiny, seed: int = 21):
    return record_episode(NrlPolicy(), generate_world(seed, tiny.world))


class TestRender:
    def test_valid_svg(self, tiny):
        root = ET.fromstring(render_paths(_log(tiny)))
        assert root.tag == f"{SVG}svg"
        assert root.get("width") == str(6 * 24)

    def test_one_group_per_agent(self, tiny):
        root = ET.fromstring(render_paths(_log(tiny)))
        groups = [g for g in root.iter(f"{SVG}g") if g.get("class") == "agent"]
        assert [g.get("id") for g in groups] == ["agent-0", "agent-1"]
        polyline = groups[0].find(f"{SVG}polyline")
        assert polyline is not None
        assert polyline.get("stroke") == agent_color(0)

    def test_obstacles_drawn(self, tiny):
        log = _log(tiny)
        root = ET.fromstring(render_paths(log))
        obstacles = [r for r in root.iter(f"{SVG}rect") if r.get("class") == "obstacle"]
        assert len(obstacles) == len(log.header.obstacles)

    def test_region_underlay_for_nrl(self, tiny):
        root = ET.fromstring(render_paths(_log(tiny)))
        regions = [g for g in root.iter(f"{SVG}g") if g.get("class") == "regions"]
        assert len(regions) == 1
        assert len(list(regions[0])) == 36

    def test_no_underlay_without_regions(self, tiny):
        log = _log(tiny)
        log.header.regions = None
        assert 'class="regions"' not in render_paths(log)

    def test_path_points_follow_log(self, tiny):
        log = _log(tiny)
        root = ET.fromstring(render_paths(log, cell_px=10))
        polyline = next(root.iter(f"{SVG}polyline"))
        points = polyline.get("points").split()
        r, c = log.paths()[0][0]
        assert points[0] == f"{c * 10 + 5},{r * 10 + 5}"
        assert len(points) == len(log.paths()[0])

    def test_writes_file(self, tiny, tmp_path):
        out = tmp_path / "figs" / "paths.svg"
        svg = render_paths(_log(tiny), out)
        assert out.read_text() == svg

    def test_palette_wraps(self):
        assert agent_color(len(PATH_PALETTE)) == agent_color(0)
