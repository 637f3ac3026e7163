"""Command line entry point.

Runs a single attack against one dataset image and writes a report plus
clean/adversarial/heat-map PNGs into a per-run output directory, or starts
the HTTP service with --serve. Exit codes: 0 attack succeeded, 2 attack
failed (no adversarial example), 1 bad configuration or runtime error.
"""

import argparse
import sys
import time
import uuid
from pathlib import Path

import numpy as np

from .datasets import ingest_dataset
from .errors import MaskAdvError
from .images import image_to_png, heatmap_to_png, png_to_mask
from .nn import forward, load_model
from .pipeline import AttackRequest, ConstraintSpec, render_report, run_attack
from .tensorio import load_tensor


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maskadv",
        description="Mask-constrained minimal max-norm adversarial attacks.")
    parser.add_argument("--eps", type=float, default=None,
                        help="per-pixel perturbation bound (default: full value range)")
    parser.add_argument("--region", choices=("whole", "select"), default="whole",
                        help="attack the whole image or a selected region")
    parser.add_argument("--imperceptible", action="store_true",
                        help="variance-map constraint with adaptive loosening")
    parser.add_argument("--ratio", type=float, default=None,
                        help="<1: fraction of pixels to perturb; >=1: pixel count")
    parser.add_argument("--dataset", default=None,
                        help="dataset directory (IDX files or PNGs + labels.json)")
    parser.add_argument("--path_model", default=None, help="model JSON file")
    parser.add_argument("--index", type=int, default=0, help="image index")
    parser.add_argument("--mask-file", default=None,
                        help="region mask (PNG, white = attackable, or tensor JSON); "
                             "required with --region select")
    parser.add_argument("--output", default="runs", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--serve", nargs="?", const="127.0.0.1:8000", default=None,
                        metavar="HOST:PORT", help="start the HTTP service instead")
    return parser


def _load_mask_file(path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        arr = load_tensor(path)
        return (arr >= 0.5).astype(np.int64)
    return png_to_mask(path.read_bytes())


def _constraint_from_options(opts, width):
    sources = [opts.imperceptible, opts.ratio is not None, opts.region == "select"]
    if sum(sources) > 1:
        raise MaskAdvError("choose one of --imperceptible, --ratio, --region select")
    if opts.eps is not None and not 0 < opts.eps <= width:
        raise MaskAdvError(f"--eps must be in (0, {width}], got {opts.eps}")
    if opts.imperceptible:
        return ConstraintSpec(kind="imperceptible", adaptive=True)
    if opts.ratio is not None:
        if opts.ratio <= 0:
            raise MaskAdvError(f"--ratio must be positive, got {opts.ratio}")
        return ConstraintSpec(kind="ratio", ratio=opts.ratio, eps=opts.eps)
    eps = opts.eps if opts.eps is not None else width
    if opts.region == "select":
        if opts.mask_file is None:
            raise MaskAdvError("--region select needs --mask-file in CLI mode "
                               "(interactive selection goes through --serve)")
        return ConstraintSpec(kind="region", region=_load_mask_file(opts.mask_file),
                              eps=eps)
    return ConstraintSpec(kind="uniform", eps=eps)


def write_run_outputs(result, x0, input_range, out_root, job_id=None):
    """Persist the canonical report and the clean/adversarial/delta PNGs."""
    job_id = job_id or uuid.uuid4().hex[:8]
    run_dir = Path(out_root) / f"{time.strftime('%Y%m%d-%H%M%S')}-{job_id}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "report.json").write_text(render_report(result), encoding="utf-8")
    (run_dir / "clean.png").write_bytes(image_to_png(x0, input_range))
    if result.success:
        (run_dir / "adversarial.png").write_bytes(
            image_to_png(result.adversarial, input_range))
        (run_dir / "delta.png").write_bytes(heatmap_to_png(result.perturbation))
    return run_dir


def run_cli_attack(opts):
    if opts.path_model is None:
        raise MaskAdvError("--path_model is required")
    if opts.dataset is None:
        raise MaskAdvError("--dataset is required")
    model = load_model(opts.path_model)
    dataset = ingest_dataset(Path(opts.dataset).name, opts.dataset,
                             input_range=model.input_range)
    if not 0 <= opts.index < len(dataset):
        raise MaskAdvError(f"--index {opts.index} out of range "
                           f"[0, {len(dataset)})")
    x0, label = dataset[opts.index]
    lo, hi = model.input_range
    constraint = _constraint_from_options(opts, hi - lo)
    request = AttackRequest(model=model, image=x0, constraint=constraint,
                            seed=opts.seed, true_label=label)
    result = run_attack(request)
    run_dir = write_run_outputs(result, x0, model.input_range, opts.output)
    pred = forward(model, x0).predicted_label
    if result.success:
        print(f"success: label {pred} -> {result.adversarial_label}  "
              f"linf={result.norms['linf']:.5f} ssim={result.ssim:.4f}  "
              f"iters deepfool={result.deepfool_trace.iterations} "
              f"bb={result.bb_steps}  wall={result.wall_ms:.0f}ms  -> {run_dir}")
        return 0
    print(f"failed: no adversarial example within "
          f"{result.deepfool_trace.iterations} iterations "
          f"(label {pred} unchanged)  wall={result.wall_ms:.0f}ms  -> {run_dir}")
    return 2


def run_serve(opts):
    import uvicorn

    from .service import create_app

    if opts.path_model is None:
        raise MaskAdvError("--serve needs --path_model")
    model = load_model(opts.path_model)
    models = {Path(opts.path_model).stem: model}
    datasets = {}
    if opts.dataset is not None:
        name = Path(opts.dataset).name
        datasets[name] = ingest_dataset(name, opts.dataset,
                                        input_range=model.input_range)
    host, _, port = opts.serve.partition(":")
    ui_dir = None
    for candidate in (Path("frontend"), Path(__file__).parents[2] / "frontend"):
        if (candidate / "index.html").exists():
            ui_dir = candidate
            break
    app = create_app(models, datasets, output_dir=opts.output, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def main(argv=None):
    opts = build_parser().parse_args(argv)
    try:
        if opts.serve is not None:
            return run_serve(opts)
        return run_cli_attack(opts)
    except MaskAdvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
