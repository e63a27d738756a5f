"""Shipped demonstration scenes and the demo region set.

Two standing postures are bundled: a normal stance and the same stance with
a metatarsal pressure hotspot on the right foot (the callus pattern: the
affected foot carries more load and shows elevated forefoot pressure).
Amplitudes are tuned so the resulting reports land in clinically plausible
bands, not to reproduce any subject's data.
"""

from __future__ import annotations

import json
from importlib import resources

from .metrics import Region, RegionSet
from .simulate import Blob, Scene

LEFT_X = 10.0
RIGHT_X = 22.0
HEEL_Y = 4.2
MET_Y = 12.2


def _foot_blobs(side: str, x0: float, weight: float) -> list[Blob]:
    """One foot: heel, first/second metatarsal, fifth metatarsal, midfoot.

    ``medial`` points toward the body midline (x = 16), so the met1-2 blob
    sits medial and the met5 blob lateral.
    """
    medial = 1.0 if side == "L" else -1.0
    return [
        Blob(f"heel-{side}", (x0, HEEL_Y), 235.0 * weight, (1.6, 1.9)),
        Blob(f"met1-2-{side}", (x0 + 1.3 * medial, MET_Y), 240.0 * weight, (1.3, 1.2)),
        Blob(f"met5-{side}", (x0 - 1.9 * medial, MET_Y - 0.7), 170.0 * weight, (1.0, 1.0)),
        Blob("midfoot", (x0 - 0.5 * medial, 8.2), 70.0 * weight, (1.4, 2.4)),
    ]


def normal_stance(noise_sigma: float = 2.0, sway_amplitude: float = 0.1) -> Scene:
    """Quiet standing, slightly right-dominant (healthy subjects rarely load
    50/50)."""
    blobs = _foot_blobs("L", LEFT_X, 0.96) + _foot_blobs("R", RIGHT_X, 1.04)
    return Scene(blobs=tuple(blobs), noise_sigma=noise_sigma,
                 sway_amplitude=sway_amplitude, sway_frequency=0.4)


def callus_stance(noise_sigma: float = 2.0) -> Scene:
    """Standing with a right-foot metatarsal callus: the calloused foot
    takes over half the load and its forefoot pressure is elevated."""
    blobs = _foot_blobs("L", LEFT_X, 0.92) + _foot_blobs("R", RIGHT_X, 1.18)
    for i, blob in enumerate(blobs):
        if blob.label == "met1-2-R":
            blobs[i] = Blob(blob.label, blob.center, blob.amplitude + 120.0, blob.scales)
    hotspot = Blob("callus-hotspot", (RIGHT_X - 1.3, MET_Y + 0.2), 160.0, (0.8, 0.8))
    return Scene(blobs=tuple(blobs) + (hotspot,), noise_sigma=noise_sigma)


def empty_scene() -> Scene:
    return Scene(blobs=())


def demo_region_set() -> RegionSet:
    """Rectangular annotations matching the bundled stances."""

    def rect(label, x0, x1, y0, y1):
        return Region(label, ((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    return RegionSet((
        rect("foot-L", 4.0, 15.4, 0.2, 15.3),
        rect("foot-R", 16.6, 28.0, 0.2, 15.3),
        rect("heel-L", 4.5, 15.0, 0.6, 7.2),
        rect("heel-R", 17.0, 27.5, 0.6, 7.2),
        rect("metatarsal-L", 4.5, 15.0, 9.6, 14.8),
        rect("metatarsal-R", 17.0, 27.5, 9.6, 14.8),
    ))


def scene_foot_centers(scene: Scene) -> dict[str, tuple[float, float]]:
    """Analytic pressure centroid of each foot's blobs (ground truth for
    centroid checks).  Blobs are assigned to a foot by centre position."""
    sums = {"L": [0.0, 0.0, 0.0], "R": [0.0, 0.0, 0.0]}
    for blob in scene.blobs:
        mass = blob.amplitude * blob.scales[0] * blob.scales[1]
        side = "L" if blob.center[0] < 16.0 else "R"
        sums[side][0] += mass * blob.center[0]
        sums[side][1] += mass * blob.center[1]
        sums[side][2] += mass
    return {side: (s[0] / s[2], s[1] / s[2]) for side, s in sums.items() if s[2] > 0}


_BUILDERS = {
    "normal_stance": normal_stance,
    "callus_stance": callus_stance,
    "empty": empty_scene,
}


def demo_scene(name: str) -> Scene:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown demo scene {name!r}; have {sorted(_BUILDERS)}") from None


def demo_scene_names() -> list[str]:
    return sorted(_BUILDERS)


def data_path(kind: str, name: str):
    """Path to a bundled data file, e.g. data_path('scenes', 'normal_stance.json')."""
    return resources.files("pressmat") / "data" / kind / name


def load_bundled_scene(name: str) -> Scene:
    doc = json.loads(data_path("scenes", f"{name}.json").read_text(encoding="utf-8"))
    return Scene.from_json(doc)


def load_bundled_regions() -> RegionSet:
    doc = json.loads(data_path("rois", "demo_roi.json").read_text(encoding="utf-8"))
    return RegionSet.from_json(doc)
