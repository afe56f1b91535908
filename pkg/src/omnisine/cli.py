"""Command-line interface.

Every command exits 0 on success.  Failures print a JSON object
``{"error": ..., "kind": ...}`` on stdout and exit with status 2 (bad input
or estimation failure) or 1 (unexpected error).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as kv
from . import report
from .cylinder import CylinderModel, GeometryError, OmniImage, PanoramaImage, unwrap
from .fmi import DegenerateWindowError
from .images import ImageFormatError, read_image, write_image
from .motionfield import InsufficientMotionError
from .pipeline import RunConfig, estimate_pair
from .pose import NotConvergedError, rmse
from .sinusoid import FitError

log = logging.getLogger("omnisine")

IMAGE_SUFFIXES = {".pgm", ".png", ".tif", ".tiff"}
# office-scene roll RMSE of the reference method, printed for context only
REFERENCE_OFFICE_ROLL_RMSE = 0.054

EXPECTED_ERRORS = (InsufficientMotionError, FitError, NotConvergedError,
                   DegenerateWindowError, GeometryError, ImageFormatError,
                   kv.ConfigError, FileNotFoundError, ValueError)


class CommandError(Exception):
    pass


def _fail(exc, code=2):
    sys.stdout.write(report.dumps({"error": str(exc), "kind": type(exc).__name__}))
    return code


def _atomic_write(path, writer):
    """Write through a temporary file so failures leave no partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=path.suffix)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _run_config(args) -> RunConfig:
    return RunConfig(window=args.window, step=args.step, delta=args.delta,
                     median=args.median, wrap=args.wrap,
                     flip_v=getattr(args, "flip_v", False),
                     huber_form=args.loss,
                     workers=1 if args.deterministic else args.jobs)


def load_panorama(path, aspect_ratio=1.0) -> PanoramaImage:
    return PanoramaImage.from_array(read_image(path), aspect_ratio)


def cmd_unwrap(args):
    cfg = kv.read_keyvalue(args.model)
    model = CylinderModel(kv.get_int(cfg, "u_max", 1100), kv.get_int(cfg, "v_max", 110),
                          kv.get_float(cfg, "aspect_ratio", 1.0))
    pixels = read_image(args.omni)
    omni = OmniImage(pixels, kv.get_float(cfg, "center_u"), kv.get_float(cfg, "center_v"),
                     kv.get_float(cfg, "rho_min"), kv.get_float(cfg, "rho_max"))
    flip = args.flip_v or kv.get_bool(cfg, "flip_v", False)
    pano = unwrap(omni, model, flip_v=flip)
    _atomic_write(args.out, lambda p: write_image(p, pano.pixels, ascii=args.ascii))
    return 0


def cmd_estimate(args):
    config = _run_config(args)
    p1 = load_panorama(args.pano_1, args.aspect_ratio)
    p2 = load_panorama(args.pano_2, args.aspect_ratio)
    result = estimate_pair(p1, p2, config)
    record = result.to_record()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_json(out / "pose.json", record)
    result.raw_field.to_csv(out / "motion.csv")
    if args.plot:
        from .plotting import plot_fit

        plot_fit(result, p1.model, out / "fit.png")
    sys.stdout.write(report.dumps(record))
    return 0


def list_frames(directory) -> list:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _pair_row(name_a, name_b, result=None, error=None):
    row = {"frame_a": name_a, "frame_b": name_b, "error": ""}
    if result is None:
        row.update({k: float("nan") for k in report.POSE_KEYS})
        row["runtime_s"] = float("nan")
        row["error"] = str(error).replace("\n", " ").replace(",", ";") or "failed"
    else:
        rec = result.pose.to_record()
        row.update({k: rec[k] for k in report.POSE_KEYS})
        row["runtime_s"] = result.runtime
    return row


def run_odometry(frames, config: RunConfig, aspect_ratio=1.0, jobs=1) -> list:
    """Pairwise estimates along a frame list.

    A pair that fails is recorded with its error and the next frame is
    matched against the last good anchor, so one bad frame costs one row.
    """
    cache = {}

    def load(i):
        if i not in cache:
            try:
                cache[i] = load_panorama(frames[i], aspect_ratio)
            except EXPECTED_ERRORS as exc:
                cache[i] = exc
        return cache[i]

    def attempt(a, b):
        pa, pb = load(a), load(b)
        bad = pa if isinstance(pa, Exception) else pb if isinstance(pb, Exception) else None
        if bad is not None:
            return None, bad
        try:
            return estimate_pair(pa, pb, config), None
        except EXPECTED_ERRORS as exc:
            return None, exc

    # consecutive pairs may be computed ahead of time; bridging pairs later
    pending = {}
    if jobs > 1:
        for i in range(len(frames)):
            load(i)
        with ThreadPoolExecutor(jobs) as pool:
            futures = {(i, i + 1): pool.submit(attempt, i, i + 1)
                       for i in range(len(frames) - 1)}
            pending = {k: f.result() for k, f in futures.items()}

    rows = []
    anchor = 0
    for b in range(1, len(frames)):
        result, err = pending.get((anchor, b)) or attempt(anchor, b)
        rows.append(_pair_row(frames[anchor].name, frames[b].name, result, err))
        if result is not None or isinstance(load(anchor), Exception):
            anchor = b
        else:
            log.warning("pair %s -> %s failed: %s", frames[anchor].name,
                        frames[b].name, err)
    return rows


def cmd_odometry(args):
    frames = list_frames(args.frames)
    if len(frames) < 2:
        raise CommandError(f"need at least 2 frames, found {len(frames)}")
    config = _run_config(args)
    rows = run_odometry(frames, config, args.aspect_ratio,
                        1 if args.deterministic else args.jobs)
    _atomic_write(args.out, lambda p: report.write_trajectory(p, rows))
    return 0


def evaluate(traj_rows, truth_rows, traj_path="trajectory", truth_path="truth"):
    """Metrics dict plus the evaluated estimate and truth angle arrays."""
    if len(traj_rows) != len(truth_rows):
        raise CommandError(f"row count mismatch: {len(traj_rows)} estimates vs "
                           f"{len(truth_rows)} truth rows")
    ok = [not (r.get("error") or "").strip() for r in traj_rows]
    est = report.read_angles([r for r, g in zip(traj_rows, ok) if g], traj_path)
    ref = report.read_angles([r for r, g in zip(truth_rows, ok) if g], truth_path)
    if len(est) == 0:
        raise CommandError("no successful pairs to evaluate")
    err = rmse(est, ref)
    runtimes = [float(r["runtime_s"]) for r, g in zip(traj_rows, ok)
                if g and r.get("runtime_s") not in (None, "", "nan")]
    return {
        "pairs": len(traj_rows),
        "evaluated": int(sum(ok)),
        "failed": int(len(ok) - sum(ok)),
        "rmse": {"roll": err[0], "pitch": err[1], "yaw": err[2]},
        "epsilon": float(np.mean(err)),
        "mean_runtime_s": float(np.mean(runtimes)) if runtimes else float("nan"),
        "reference": {"office_roll_rmse": REFERENCE_OFFICE_ROLL_RMSE},
    }, est, ref


def cmd_eval(args):
    traj = report.read_table(args.trajectory)
    truth = report.read_table(args.truth)
    metrics, est, ref = evaluate(traj, truth, args.trajectory, args.truth)
    _atomic_write(args.out, lambda p: report.write_json(p, metrics))
    if args.plot:
        from .plotting import plot_trajectory

        r = metrics["rmse"]
        plot_trajectory(est, ref, args.plot, [r["roll"], r["pitch"], r["yaw"]])
    r = metrics["rmse"]
    print(f"{'':10s}{'roll':>10s}{'pitch':>10s}{'yaw':>10s}{'eps[rad]':>10s}{'time[s]':>10s}")
    print(f"{'ours':10s}{report.fmt(r['roll']):>10s}{report.fmt(r['pitch']):>10s}"
          f"{report.fmt(r['yaw']):>10s}{report.fmt(metrics['epsilon']):>10s}"
          f"{report.fmt(metrics['mean_runtime_s']):>10s}")
    print(f"(reference office-scene roll RMSE: {REFERENCE_OFFICE_ROLL_RMSE})")
    return 0


def cmd_synth(args):
    from .synth import Scenario

    scenario = Scenario.from_file(args.scenario)
    frames = scenario.render()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = [f"frame_{k:03d}.pgm" for k in range(len(frames))]
    for name, frame in zip(names, frames):
        write_image(out / name, frame.pixels, bits=args.bits)
    truth = scenario.truth()
    sidecar = {"scenario": {k: getattr(scenario, k) for k in (
        "seed", "u_max", "v_max", "rotation", "translation", "frames",
        "texture_sigma", "aspect_ratio")}, **truth}
    report.write_json(out / "truth.json", sidecar)
    report.write_truth(out / "truth.csv",
                       [(a, b, truth) for a, b in zip(names, names[1:])])
    return 0


def cmd_envelope(args):
    from .plotting import plot_envelope
    from .synth import approximation_envelope

    model = CylinderModel(args.u_max, args.v_max)
    thetas = np.linspace(args.max_theta / args.points, args.max_theta, args.points)
    env = approximation_envelope(thetas, model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "envelope.csv", "w") as fh:
        fh.write("theta,rel_error\n")
        for th, e in zip(thetas, env):
            fh.write(f"{report.fmt(th)},{report.fmt(e)}\n")
    plot_envelope(thetas, env, out / "envelope.png")
    worst = float(env[thetas <= 0.1 + 1e-12].max()) if np.any(thetas <= 0.1 + 1e-12) else float("nan")
    print(f"max relative gap for theta <= 0.1 rad: {report.fmt(worst)}")
    return 0


def _add_run_flags(p):
    p.add_argument("--window", type=int, default=110, help="window side L in px")
    p.add_argument("--step", type=int, default=20, help="window step d in px")
    p.add_argument("--delta", type=float, default=2.0, help="pseudo-Huber scale in px")
    p.add_argument("--median", type=int, default=5,
                   help="median filter length (odd, 0 disables)")
    p.add_argument("--wrap", action="store_true", help="let windows cross the u seam")
    p.add_argument("--loss", choices=("unit", "textbook", "l2"), default="unit",
                   help="robust loss variant")
    p.add_argument("--aspect-ratio", type=float, default=1.0)
    p.add_argument("--deterministic", action="store_true",
                   help="serial execution; outputs are bit-reproducible")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omnisine", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("unwrap", help="omni image -> cylindrical panorama")
    p.add_argument("omni")
    p.add_argument("--model", required=True, help="key=value camera model file")
    p.add_argument("--out", required=True)
    p.add_argument("--flip-v", action="store_true", help="row 0 samples the inner radius")
    p.add_argument("--ascii", action="store_true", help="write plain-text PGM")
    p.set_defaults(func=cmd_unwrap)

    p = sub.add_parser("estimate", help="relative pose between two panoramas")
    p.add_argument("pano_1")
    p.add_argument("pano_2")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true", help="also render fit.png")
    p.add_argument("--flip-v", action="store_true", help=argparse.SUPPRESS)
    _add_run_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("odometry", help="pairwise poses along a frame directory")
    p.add_argument("frames")
    p.add_argument("--out", required=True, help="trajectory CSV")
    p.add_argument("--flip-v", action="store_true", help=argparse.SUPPRESS)
    _add_run_flags(p)
    p.set_defaults(func=cmd_odometry)

    p = sub.add_parser("eval", help="per-axis RMSE of a trajectory")
    p.add_argument("trajectory")
    p.add_argument("truth")
    p.add_argument("--out", required=True, help="metrics JSON")
    p.add_argument("--plot", help="optional figure path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic scenario")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--bits", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("envelope", help="small-angle approximation error sweep")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-theta", type=float, default=0.3)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--u-max", type=int, default=1100)
    p.add_argument("--v-max", type=int, default=110)
    p.set_defaults(func=cmd_envelope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, *EXPECTED_ERRORS) as exc:
        return _fail(exc, 2)
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure")
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
