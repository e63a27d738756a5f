"""The live service end to end, in one process.

Starts the WebSocket server on an ephemeral port with the simulated mat as
its source, connects a client, watches a few live fields arrive, triggers a
50-frame capture and prints the resulting report.

For the interactive version with the browser UI, run instead:

    pressmat serve --scene normal_stance --with-ui frontend/dist

Run:  python3 demos/07_live_service.py
"""

import asyncio
import base64
import json

import numpy as np
from websockets.asyncio.client import connect

from pressmat import MetricsReport, build_curve, sweep_samples
from pressmat.scenes import demo_region_set, normal_stance
from pressmat.simulate import MatSimulator
from pressmat.store import render_table
from pressmat.stream import ServeOptions, SimulatorSource, StreamServer


async def main():
    sim = MatSimulator(normal_stance(), seed=11)
    curve = build_curve(sweep_samples(sim.model, sim.divider), sim.divider)
    server = StreamServer(SimulatorSource(sim), curve, demo_region_set(),
                          ServeOptions(display_rate_hz=20.0))
    await server.serve("127.0.0.1", 0)
    print(f"server up on ws://127.0.0.1:{server.port}")

    async with connect(f"ws://127.0.0.1:{server.port}", max_size=None) as ws:
        hello = json.loads(await ws.recv())
        print(f"hello: {hello['channels']} channels, field {hello['field_shape']}, "
              f"source {hello['source_rate_hz']:g} Hz decimated to "
              f"{hello['display_rate_hz']:g} Hz")

        fields_seen = 0
        while fields_seen < 5:
            message = json.loads(await ws.recv())
            if message["type"] == "field":
                fields_seen += 1
                values = np.frombuffer(base64.b64decode(message["values_b64"]),
                                       dtype=message["dtype"])
                print(f"  field seq {message['seq']:4d}: peak {values.max():6.1f} kPa")

        print("\nrequesting a 50-frame capture...")
        await ws.send(json.dumps({"type": "capture", "n_frames": 50}))
        while True:
            message = json.loads(await ws.recv())
            if message["type"] == "report":
                break
        report = MetricsReport.from_json(message["report"])
        print(f"capture {message['capture_id']} over frames "
              f"{message['first_seq']}..{message['first_seq'] + message['n_frames'] - 1}:")
        print(render_table(report))
        detail = message["field"]
        print(f"\nembedded full-resolution field: {detail['dims']} cells at "
              f"{detail['pitch_cm']:g} cm ({' -> '.join(detail['provenance'])})")

    await server.close()


if __name__ == "__main__":
    asyncio.run(main())
