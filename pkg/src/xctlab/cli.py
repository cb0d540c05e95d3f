"""Batch front door: extract, render, chart, detect, phantom, serve.

Exit codes: 0 success, 1 user error (bad flags, bad files, domain errors),
2 internal error.  ``--json`` prints a machine-readable report on stdout;
the shipped schemas live in docs/schemas/.
"""

from __future__ import annotations

import json
import sys
import traceback
from pathlib import Path

import click

from . import __version__
from .charts import HistogramSpec, bar_aggregate, density, histogram, scatter3
from .errors import XctlabError
from .extraction import ExtractionConfig, extract_fibers
from .extraction.phantom import ground_truth_table, random_cylinders, rasterize_cylinders
from .fibertable import load_csv, save_csv
from .render import GRAYSCALE_TF, TransferFunction, look_at, render_dvr, render_mip
from .tracking import CameraIntrinsics, MarkerDictionary, detect_markers, png_to_frame
from .volume import load_volume, save_volume


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2))


def _parse_triple(text: str, kind=int):
    parts = [kind(p) for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise click.BadParameter(f"expected 3 values, got {text!r}")
    return tuple(parts)


@click.group()
@click.version_option(__version__)
def cli():
    """Desk-scale XCT inspection engine."""


@cli.command()
@click.option("--out", required=True, type=click.Path(), help="Output .raw path")
@click.option("--meta", type=click.Path(), default=None, help="Sidecar path (default: .meta)")
@click.option("--dims", default="64,64,64", help="Grid size nx,ny,nz")
@click.option("--cylinders", default=1, type=int, help="Number of random fibers")
@click.option("--seed", default=0, type=int)
@click.option("--fg", default=200, type=int)
@click.option("--bg", default=20, type=int)
@click.option("--radius", default="2,4", help="Radius range lo,hi (voxels)")
@click.option("--length", default="20,60", help="Length range lo,hi (voxels)")
@click.option("--min-gap", default=4.0, type=float, help="Surface clearance (voxels)")
@click.option("--truth-csv", type=click.Path(), default=None,
              help="Write exact ground-truth fiber table here")
@click.option("--json", "as_json", is_flag=True)
def phantom(out, meta, dims, cylinders, seed, fg, bg, radius, length, min_gap,
            truth_csv, as_json):
    """Synthesize a cylinder phantom volume (seedable, with ground truth)."""
    dims = _parse_triple(dims)
    r_lo, r_hi = (float(p) for p in radius.split(","))
    l_lo, l_hi = (float(p) for p in length.split(","))
    specs = random_cylinders(dims, cylinders, radius_range=(r_lo, r_hi),
                             length_range=(l_lo, l_hi), seed=seed, min_gap=min_gap)
    volume = rasterize_cylinders(dims, specs, fg=fg, bg=bg)
    save_volume(volume, out, meta)
    if truth_csv:
        save_csv(ground_truth_table(specs), truth_csv)
    if as_json:
        _echo_json({"command": "phantom", "out": str(out), "dims": list(dims),
                    "cylinders": len(specs), "seed": seed,
                    "truth_csv": str(truth_csv) if truth_csv else None})
    else:
        click.echo(f"wrote {out} ({dims[0]}x{dims[1]}x{dims[2]}, {len(specs)} fibers)")


@cli.command()
@click.argument("volume_path", type=click.Path(exists=True))
@click.option("--meta", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path(), help="Output fiber CSV")
@click.option("--sigma", default=2.0, type=float)
@click.option("--threshold", default=0.05, type=float, help="Ridge response threshold")
@click.option("--step", default=0.5, type=float)
@click.option("--min-length", default=None, type=float, help="mm; default 5*min(spacing)")
@click.option("--max-angle", default=30.0, type=float)
@click.option("--suppression", default=None, type=float, help="Seed suppression radius (voxels)")
@click.option("--json", "as_json", is_flag=True)
def extract(volume_path, meta, out, sigma, threshold, step, min_length, max_angle,
            suppression, as_json):
    """Extract the fiber table from a RAW volume."""
    volume = load_volume(volume_path, meta)
    cfg = ExtractionConfig(sigma=sigma, ridge_threshold=threshold, step=step,
                           min_length=min_length, max_angle=max_angle,
                           seed_suppression_radius=suppression)
    table = extract_fibers(volume, cfg)
    save_csv(table, out)
    if as_json:
        _echo_json({"command": "extract", "volume": str(volume_path), "out": str(out),
                    "fibers": len(table)})
    else:
        click.echo(f"extracted {len(table)} fibers -> {out}")


@cli.command()
@click.argument("volume_path", type=click.Path(exists=True))
@click.option("--meta", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["mip", "dvr"]), default="mip")
@click.option("--out", required=True, type=click.Path(), help="Output PNG")
@click.option("--width", "-w", default=256, type=int)
@click.option("--height", "-h", default=256, type=int)
@click.option("--camera", default=None, help="JSON: {position, look_at, up, fov_deg, near}")
@click.option("--tf", default=None, help="JSON transfer function {points: [[x, [r,g,b,a]]...]}")
@click.option("--json", "as_json", is_flag=True)
def render(volume_path, meta, mode, out, width, height, camera, tf, as_json):
    """Render a volume to PNG via MIP or DVR."""
    volume = load_volume(volume_path, meta)
    if camera:
        payload = json.loads(camera)
        cam = look_at(payload["position"], payload.get("look_at", (0, 0, 0)),
                      up=payload.get("up", (0, 1, 0)),
                      fov_deg=float(payload.get("fov_deg", 45.0)),
                      near=float(payload.get("near", 0.1)))
    else:
        import numpy as np

        extent = (np.asarray(volume.meta.dims) - 1) * np.asarray(volume.meta.spacing)
        center = np.asarray(volume.meta.origin) + extent / 2.0
        cam = look_at(center + np.array([0.0, 0.0, 2.5 * float(extent.max())]), center)
    if mode == "mip":
        image = render_mip(volume, cam, width, height)
    else:
        tf_obj = TransferFunction.from_dict(json.loads(tf)) if tf else GRAYSCALE_TF
        image = render_dvr(volume, tf_obj, cam, width, height)
    Path(out).write_bytes(image.to_png())
    if as_json:
        _echo_json({"command": "render", "mode": mode, "out": str(out),
                    "width": width, "height": height, "hash": image.content_hash()})
    else:
        click.echo(f"rendered {mode} -> {out}")


@cli.command()
@click.argument("kind", type=click.Choice(["histogram", "density", "bar", "scatter3"]))
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True))
@click.option("--col", default=None, help="Column (histogram/density)")
@click.option("--bins", default=16, type=int)
@click.option("--bandwidth", default="auto")
@click.option("--group", default=None, help="Group column (bar)")
@click.option("--value", default=None, help="Value column (bar mean/sum)")
@click.option("--agg", default="count", type=click.Choice(["count", "mean", "sum"]))
@click.option("--classes", default=5, type=int)
@click.option("--x", "ax", default=None)
@click.option("--y", "ay", default=None)
@click.option("--z", "az", default=None)
@click.option("--out", type=click.Path(), default=None, help="Write JSON here (default stdout)")
def chart(kind, csv_path, col, bins, bandwidth, group, value, agg, classes,
          ax, ay, az, out):
    """Compute chart data from a fiber table (JSON out)."""
    table = load_csv(csv_path)
    if kind == "histogram":
        if not col:
            raise click.BadParameter("histogram needs --col")
        result = histogram(table.column(col), HistogramSpec(bin_count=bins)).to_dict()
        result["column"] = col
    elif kind == "density":
        if not col:
            raise click.BadParameter("density needs --col")
        bw = bandwidth if bandwidth == "auto" else float(bandwidth)
        result = density(table.column(col), bw).to_dict()
        result["column"] = col
    elif kind == "bar":
        if not group:
            raise click.BadParameter("bar needs --group")
        result = bar_aggregate(table, group, value, agg, classes=classes).to_dict()
    else:
        if not (ax and ay and az):
            raise click.BadParameter("scatter3 needs --x, --y and --z")
        result = scatter3(table, ax, ay, az).to_dict()
    text = json.dumps(result, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@cli.command()
@click.argument("frame_path", type=click.Path(exists=True))
@click.option("--dictionary", "dict_path", required=True, type=click.Path(exists=True))
@click.option("--fx", default=1600.0, type=float)
@click.option("--fy", default=1600.0, type=float)
@click.option("--cx", default=640.0, type=float)
@click.option("--cy", default=480.0, type=float)
def detect(frame_path, dict_path, fx, fy, cx, cy):
    """Detect markers in a PNG/PGM frame (JSON report on stdout)."""
    frame = png_to_frame(Path(frame_path).read_bytes())
    dictionary = MarkerDictionary.load(dict_path)
    intr = CameraIntrinsics(fx=fx, fy=fy, cx=cx, cy=cy)
    detections = detect_markers(frame, intr, dictionary)
    _echo_json({"command": "detect", "frame": str(frame_path),
                "detections": [d.to_dict() for d in detections]})


@cli.command()
@click.option("--registry", required=True, type=click.Path(exists=True))
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--workspaces", type=click.Path(), default=None,
              help="Workspace persistence dir (default: <registry dir>/workspaces)")
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Static UI directory to mount at /ui")
def serve(registry, port, host, workspaces, ui_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import ServiceRegistry, create_app

    reg = ServiceRegistry.load(registry)
    ws_dir = Path(workspaces) if workspaces else Path(registry).parent / "workspaces"
    app = create_app(reg, ws_dir, ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port)


@cli.command()
@click.option("--dir", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=7, type=int)
@click.option("--size", default=96, type=int)
@click.option("--json", "as_json", is_flag=True)
def demo(out_dir, seed, size, as_json):
    """Build a self-contained demo workspace (volumes, tables, registry)."""
    from .demo import build_demo_workspace

    registry_path = build_demo_workspace(out_dir, seed=seed, size=size)
    if as_json:
        _echo_json({"command": "demo", "registry": str(registry_path)})
    else:
        click.echo(f"demo workspace ready: {registry_path}")
        click.echo(f"run: xctlab serve --registry {registry_path}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:  # --help / --version
        return int(exc.exit_code)
    except (click.UsageError, click.BadParameter) as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except XctlabError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
