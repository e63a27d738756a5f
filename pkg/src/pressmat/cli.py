"""Operator command line.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 bench gate failure.
Every subcommand is deterministic given an explicit --seed and no
--wallclock.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import socket
import sys
import time
from pathlib import Path

from . import schemas
from .bench import run_bench
from .calibration import (CalibrationCurve, CalibrationError, build_curve,
                          samples_from_csv, samples_to_csv, sweep_samples)
from .geometry import SensorLayout
from .metrics import (DEFAULT_CONTACT_THRESHOLD, MetricsReport, RegionError,
                      RegionSet, auto_split_regions, full_report)
from .pipeline import process_capture, save_png
from .protocol import encode_frame
from .scenes import demo_scene, demo_scene_names, load_bundled_regions
from .simulate import (SCAN_RATE_HZ, DividerConfig, MatSimulator, Scene,
                       SensorModel)
from .store import (SessionFormatError, SessionWriter, export_report,
                    read_session, write_session)
from .stream import (ReplaySource, ServeOptions, SimulatorSource,
                     StreamServer, TcpByteSource)


class DataError(Exception):
    """Input/content problem: exits with code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pressmat", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the mat simulator into a session file or TCP socket")
    p.add_argument("--scene", required=True,
                   help=f"scene JSON path or bundled name ({', '.join(demo_scene_names())})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=10.0, help="seconds of mat time")
    p.add_argument("--rate", type=float, default=SCAN_RATE_HZ, help="scan rate in Hz")
    p.add_argument("--out", help="session file to write")
    p.add_argument("--listen", help="HOST:PORT to stream wire bytes over TCP instead")
    p.add_argument("--curve", help="calibration curve JSON to embed in the session header")
    p.add_argument("--wallclock", action="store_true",
                   help="pace frames against the wall clock (non-deterministic timing)")

    p = sub.add_parser("analyze", help="run the 50-frame capture pipeline on a session")
    p.add_argument("session")
    p.add_argument("--roi", help="region-set JSON (default: session annotations)")
    p.add_argument("--capture-at", type=int, default=0, help="first frame of the capture")
    p.add_argument("--frames", type=int, default=50)
    p.add_argument("--curve", help="calibration curve JSON (default: session header)")
    p.add_argument("--threshold", type=float, default=DEFAULT_CONTACT_THRESHOLD)
    p.add_argument("--columns", help="report column labels, e.g. 'Calloused Foot,Normal Foot'")
    p.add_argument("--report", help="output path prefix (writes .json/.csv/.txt)")
    p.add_argument("--png", help="also render the processed field to this PNG")

    p = sub.add_parser("bench", help="measure end-to-end throughput against the 155 Hz gate")
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("calibrate", help="build a calibration curve")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help="CSV of pressure_kpa,count,branch rows")
    src.add_argument("--from-model", action="store_true",
                     help="sweep the built-in sensor model instead of a CSV")
    p.add_argument("--model", help="sensor model JSON (with --from-model)")
    p.add_argument("--out", required=True, help="curve JSON output path")
    p.add_argument("--dump-samples", help="also write the sweep samples as CSV")

    p = sub.add_parser("replay", help="re-stream a session's frames")
    p.add_argument("session")
    p.add_argument("--listen", help="HOST:PORT to serve wire bytes over TCP")
    p.add_argument("--out", help="re-encode intact frames to a new session file")
    p.add_argument("--wallclock", action="store_true")

    p = sub.add_parser("serve", help="live WebSocket service for UI clients")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scene", help="simulate this scene (path or bundled name)")
    src.add_argument("--session", help="replay this session file")
    src.add_argument("--connect", metavar="HOST:PORT",
                     help="consume a raw TCP byte stream (e.g. simulate --listen)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=SCAN_RATE_HZ)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--display-rate", type=float, default=20.0)
    p.add_argument("--loop", action="store_true", help="loop a replayed session")
    p.add_argument("--frames", type=int, help="stop after this many frames")
    p.add_argument("--curve", help="calibration curve JSON (default: derive from model)")
    p.add_argument("--roi", help="initial region-set JSON (default: bundled demo ROI)")
    p.add_argument("--record", help="record the served frames to this session file")
    p.add_argument("--with-ui", nargs="?", const="frontend/dist", metavar="DIR",
                   help="serve the web UI's static files on the same port")

    p = sub.add_parser("report", help="re-render a stored report JSON")
    p.add_argument("report_json")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--columns", help="override column labels, e.g. 'Calloused Foot,Normal Foot'")

    p = sub.add_parser("roi-init", help="seed a region set from a session's contact footprint")
    p.add_argument("session")
    p.add_argument("--capture-at", type=int, default=0)
    p.add_argument("--frames", type=int, default=50)
    p.add_argument("--curve", help="calibration curve JSON (default: session header)")
    p.add_argument("--threshold", type=float, default=DEFAULT_CONTACT_THRESHOLD)
    p.add_argument("--out", required=True)
    return parser


# -- input loading --------------------------------------------------------------


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}")


def _load_scene(spec: str) -> Scene:
    if spec in demo_scene_names():
        return demo_scene(spec)
    doc = _load_json(spec, "scene")
    try:
        schemas.validate(doc, schemas.SCENE_SCHEMA, source=spec)
        return Scene.from_json(doc)
    except (schemas.SchemaError, ValueError) as exc:
        raise DataError(str(exc))


def _load_curve(path: str | None, header: dict | None = None) -> CalibrationCurve:
    if path:
        doc = _load_json(path, "curve")
        schemas.validate(doc, schemas.CURVE_SCHEMA, source=path)
        return CalibrationCurve.from_json(doc)
    if header and header.get("calibration"):
        return CalibrationCurve.from_json(header["calibration"])
    raise DataError("no calibration curve: pass --curve or embed one in the session header")


def _load_roi(path: str | None, annotations: dict | None = None) -> RegionSet:
    if path:
        doc = _load_json(path, "roi")
        schemas.validate(doc, schemas.ROI_SCHEMA, source=path)
        try:
            return RegionSet.from_json(doc)
        except RegionError as exc:
            raise DataError(f"{path}: {exc}")
    if annotations and annotations.get("regions"):
        return RegionSet.from_json(annotations["regions"])
    raise DataError("no regions: pass --roi or use a session with annotations")


def _session_header(args, scene: Scene, curve_doc: dict | None) -> dict:
    header = {
        "layout": SensorLayout().to_json(),
        "scene": scene.to_json(),
        "seed": args.seed,
        "rate_hz": args.rate,
        "start_time": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        if args.wallclock else None,
    }
    if curve_doc is not None:
        header["calibration"] = curve_doc
    return header


# -- subcommands ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    if not args.out and not args.listen:
        raise DataError("simulate needs --out or --listen")
    scene = _load_scene(args.scene)
    curve_doc = None
    if args.curve:
        curve_doc = _load_json(args.curve, "curve")
        schemas.validate(curve_doc, schemas.CURVE_SCHEMA, source=args.curve)
    sim = MatSimulator(scene, seed=args.seed, rate_hz=args.rate)
    n_frames = round(args.duration * args.rate)
    header = _session_header(args, scene, curve_doc)

    if args.out:
        start = time.perf_counter()
        with SessionWriter(args.out, header) as writer:
            for k, frame in enumerate(sim.run(n_frames)):
                if args.wallclock:
                    lag = k / args.rate - (time.perf_counter() - start)
                    if lag > 0:
                        time.sleep(lag)
                writer.write_frame(frame)
        print(f"wrote {n_frames} frames to {args.out}")
        return 0

    host, port = _parse_hostport(args.listen)
    with socket.create_server((host, port)) as server:
        print(f"listening on {host}:{server.getsockname()[1]}; waiting for one client")
        conn, peer = server.accept()
        with conn:
            start = time.perf_counter()
            for k, frame in enumerate(sim.run(n_frames)):
                if args.wallclock:
                    lag = sim.frame_time(k) - (time.perf_counter() - start)
                    if lag > 0:
                        time.sleep(lag)
                conn.sendall(encode_frame(frame))
        print(f"streamed {n_frames} frames to {peer}")
    return 0


def _parse_hostport(spec: str) -> tuple[str, int]:
    host, _, port = spec.rpartition(":")
    if not host or not port.isdigit():
        raise DataError(f"expected HOST:PORT, got {spec!r}")
    return host, int(port)


def _load_capture(args):
    try:
        session = read_session(args.session)
    except (FileNotFoundError, SessionFormatError) as exc:
        raise DataError(str(exc))
    start, want = args.capture_at, args.frames
    available = len(session.frames) - start
    if start < 0 or available < want:
        raise DataError(
            f"cannot capture {want} frames at index {start}: only "
            f"{max(available, 0)} of {len(session.frames)} frames available"
        )
    layout = SensorLayout.from_json(session.header["layout"]) \
        if "layout" in session.header else SensorLayout()
    return session, session.frames[start:start + want], layout


def cmd_analyze(args) -> int:
    session, frames, layout = _load_capture(args)
    curve = _load_curve(args.curve, session.header)
    regions = _load_roi(args.roi, session.annotations)
    field = process_capture(frames, curve, layout)
    columns = tuple(args.columns.split(",")) if args.columns else ("Left", "Right")
    if len(columns) != 2:
        raise DataError("--columns needs exactly two comma-separated labels")
    try:
        report = full_report(field, regions, args.threshold, column_labels=columns)
    except RegionError as exc:
        raise DataError(str(exc))
    sys.stdout.write(export_report(report, "table").decode())
    if args.report:
        prefix = Path(args.report)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        for fmt, suffix in (("json", ".json"), ("csv", ".csv"), ("table", ".txt")):
            prefix.with_suffix(suffix).write_bytes(export_report(report, fmt))
        print(f"report written to {prefix.with_suffix('.json')} (.csv, .txt)")
    if args.png:
        save_png(field, args.png)
        print(f"heatmap written to {args.png}")
    return 0


def cmd_bench(args) -> int:
    result = run_bench(seconds=args.seconds, seed=args.seed)
    print(result.summary())
    if result.fps < SCAN_RATE_HZ:
        print(f"FAIL: {result.fps:.1f} fps < {SCAN_RATE_HZ:g} fps gate", file=sys.stderr)
        return 3
    print(f"PASS: sustained {result.fps:.1f} fps >= {SCAN_RATE_HZ:g} fps")
    return 0


def cmd_calibrate(args) -> int:
    divider = DividerConfig()
    try:
        if args.samples:
            samples = samples_from_csv(Path(args.samples).read_text(encoding="utf-8"))
        else:
            if args.model:
                doc = _load_json(args.model, "model")
                schemas.validate(doc, schemas.MODEL_SCHEMA, source=args.model)
                model = SensorModel.from_json(doc)
            else:
                model = SensorModel()
            samples = sweep_samples(model, divider)
        curve = build_curve(samples, divider)
    except FileNotFoundError as exc:
        raise DataError(str(exc))
    except CalibrationError as exc:
        raise DataError(f"calibration failed: {exc}")
    Path(args.out).write_text(json.dumps(curve.to_json(), indent=2) + "\n", encoding="utf-8")
    if args.dump_samples:
        Path(args.dump_samples).write_text(samples_to_csv(samples), encoding="utf-8")
    lo, hi = curve.valid_range
    print(f"curve with {len(curve.knot_counts)} knots over counts [{lo}, {hi}] "
          f"-> [{curve.evaluate(lo):.1f}, {curve.evaluate(hi):.1f}] kPa; wrote {args.out}")
    return 0


def cmd_replay(args) -> int:
    if not args.out and not args.listen:
        raise DataError("replay needs --out or --listen")
    try:
        session = read_session(args.session)
    except (FileNotFoundError, SessionFormatError) as exc:
        raise DataError(str(exc))
    rate = session.header.get("rate_hz", SCAN_RATE_HZ)
    if args.out:
        write_session(args.out, session.header, session.frames, session.annotations)
        print(f"re-encoded {len(session.frames)} frames to {args.out}")
        return 0
    host, port = _parse_hostport(args.listen)
    with socket.create_server((host, port)) as server:
        print(f"listening on {host}:{server.getsockname()[1]}")
        conn, peer = server.accept()
        with conn:
            start = time.perf_counter()
            for k, frame in enumerate(session.frames):
                if args.wallclock:
                    lag = k / rate - (time.perf_counter() - start)
                    if lag > 0:
                        time.sleep(lag)
                conn.sendall(encode_frame(frame))
        print(f"replayed {len(session.frames)} frames to {peer}")
    return 0


def cmd_serve(args) -> int:
    if args.session:
        try:
            session = read_session(args.session)
        except (FileNotFoundError, SessionFormatError) as exc:
            raise DataError(str(exc))
        layout = SensorLayout.from_json(session.header["layout"]) \
            if "layout" in session.header else SensorLayout()
        source = ReplaySource(session.frames, layout,
                              rate_hz=session.header.get("rate_hz", args.rate),
                              loop=args.loop,
                              diagnostics=session.diagnostics.as_dict())
        curve = _load_curve(args.curve, session.header)
        annotations = session.annotations
    elif args.connect:
        host, port = _parse_hostport(args.connect)
        source = TcpByteSource(host, port, rate_hz=args.rate)
        curve = _load_curve(args.curve) if args.curve \
            else build_curve(sweep_samples(), DividerConfig())
        annotations = None
    else:
        scene = _load_scene(args.scene)
        sim = MatSimulator(scene, seed=args.seed, rate_hz=args.rate)
        source = SimulatorSource(sim, n_frames=args.frames)
        curve = _load_curve(args.curve) if args.curve \
            else build_curve(sweep_samples(sim.model, sim.divider), sim.divider)
        annotations = None
    try:
        regions = _load_roi(args.roi, annotations)
    except DataError:
        regions = load_bundled_regions()

    options = ServeOptions(display_rate_hz=args.display_rate, wallclock=True,
                           record_path=args.record, ui_root=args.with_ui)
    return asyncio.run(_serve_async(source, curve, regions, options, args))


async def _serve_async(source, curve, regions, options, args) -> int:
    server = StreamServer(source, curve, regions, options)
    await server.serve(args.host, args.port)
    print(f"serving ws://{args.host}:{server.port}"
          + (f" (UI at http://{args.host}:{server.port}/)" if options.ui_root else ""))
    try:
        await server.wait_done()
        print("source ended")
    except asyncio.CancelledError:
        pass
    except KeyboardInterrupt:
        pass
    finally:
        await server.close()
    return 0


def cmd_report(args) -> int:
    doc = _load_json(args.report_json, "report")
    try:
        report = MetricsReport.from_json(doc)
    except (KeyError, TypeError) as exc:
        raise DataError(f"{args.report_json}: not a report JSON ({exc})")
    if args.columns:
        columns = tuple(args.columns.split(","))
        if len(columns) != 2:
            raise DataError("--columns needs exactly two comma-separated labels")
        report = MetricsReport(report.left, report.right, report.resultant_cop_cm,
                               report.contact_threshold_kpa, columns)
    sys.stdout.write(export_report(report, args.format).decode())
    return 0


def cmd_roi_init(args) -> int:
    session, frames, layout = _load_capture(args)
    curve = _load_curve(args.curve, session.header)
    field = process_capture(frames, curve, layout)
    try:
        regions = auto_split_regions(field, args.threshold)
    except RegionError as exc:
        raise DataError(str(exc))
    Path(args.out).write_text(json.dumps(regions.to_json(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(regions.regions)} seed regions to {args.out}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "bench": cmd_bench,
    "calibrate": cmd_calibrate,
    "replay": cmd_replay,
    "serve": cmd_serve,
    "report": cmd_report,
    "roi-init": cmd_roi_init,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DataError, schemas.SchemaError) as exc:
        print(f"pressmat {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
