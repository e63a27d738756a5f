"""Regenerate the UI test fixtures from the primary stack.

Every fixture is a real server payload: actual hello/field/report messages
produced by the pressmat stream code paths on seeded captures, so the UI
tests exercise true wire shapes.

Run from the repository root:  python3 frontend/tests/fixtures/generate.py
"""

import json
import pathlib

import numpy as np

from pressmat.calibration import build_curve, sweep_samples
from pressmat.geometry import reconstruct_grid
from pressmat.metrics import RegionSet, full_report
from pressmat.pipeline import field_to_json, process_capture
from pressmat.scenes import callus_stance, demo_region_set, normal_stance
from pressmat.simulate import MatSimulator
from pressmat.stream import PROTOCOL_VERSION, StreamServer, SimulatorSource, ServeOptions

out = pathlib.Path(__file__).parent


def write(name, doc):
    (out / name).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print("wrote", name)


curve = build_curve(sweep_samples())
regions = demo_region_set()

sim = MatSimulator(normal_stance(), seed=11)
server = StreamServer(SimulatorSource(sim), curve, regions, ServeOptions())
write("hello.json", server._hello_message())

frames = list(sim.run(60))
write("field_standing.json", server._field_message(frames[0], "processed"))

import base64

zero = server._field_message(frames[0], "processed")
zero_grid = reconstruct_grid(sim.layout, np.zeros(1024))
zero["seq"] = 1
zero["timestamp_us"] = 6452
zero["values_b64"] = base64.b64encode(
    np.ascontiguousarray(zero_grid.values, dtype="<f4").tobytes()).decode("ascii")
write("field_zero.json", zero)


def report_message(scene, seed, region_set, capture_id):
    s = MatSimulator(scene, seed=seed)
    window = list(s.run(50))
    field = process_capture(window, curve)
    return {
        "type": "report",
        "protocol_version": PROTOCOL_VERSION,
        "capture_id": capture_id,
        "n_frames": 50,
        "first_seq": 0,
        "field": field_to_json(field),
        "report": full_report(field, region_set).to_json(),
    }


write("report_normal.json", report_message(normal_stance(), 11, regions, 1))
write("report_callus.json", report_message(callus_stance(), 11, regions, 2))

# The same normal capture analyzed after the metatarsal-R ROI is moved onto
# empty mat: the scripted-server oracle for the ROI submit -> capture loop.
moved = demo_region_set().to_json()
for feat in moved["features"]:
    if feat["properties"]["label"] == "metatarsal-R":
        feat["geometry"]["coordinates"] = [[[26.2, 13.0], [27.8, 13.0],
                                            [27.8, 15.2], [26.2, 15.2]]]
write("roi_moved.json", moved)
write("report_moved_roi.json", report_message(normal_stance(), 11,
                                              RegionSet.from_json(moved), 2))

# A short recorded message log for the deterministic-replay test.
status = server._status_message(level="info", note="roi-accepted")
log = [server._hello_message(),
       server._field_message(frames[0], "processed"),
       server._field_message(frames[5], "processed"),
       status,
       json.loads((out / "report_normal.json").read_text()),
       server._field_message(frames[3], "processed"),  # stale seq: must be ignored
       server._field_message(frames[9], "processed")]
write("message_log.json", log)
