"""HTTP API serving the browser companion and scripted clients.

Attack jobs run on a bounded worker pool; job state moves queued -> running
-> done/failed and results stay available until the process exits. Reports
returned here are byte-identical to the CLI's report.json for the same
model, image, options and seed.
"""

import base64
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel

from .cli import write_run_outputs
from .errors import MaskAdvError
from .images import heatmap_to_png, image_to_png, mask_to_png, png_to_mask
from .nn import forward
from .pipeline import AttackRequest, ConstraintSpec, render_report, run_attack
from .saliency import best_rectangle, smoothgrad, topk_rectangles


class ConstraintBody(BaseModel):
    kind: str
    eps: float | None = None
    ratio: float | None = None
    mask: str | None = None  # base64 PNG, white = attackable
    adaptive: bool = False


class AttackBody(BaseModel):
    model: str
    dataset: str
    index: int
    constraint: ConstraintBody
    seed: int = 0


class ImportanceBody(BaseModel):
    model: str
    dataset: str
    index: int
    m: int = 64
    n: int = 8
    sigma: float | None = None
    window: dict | None = None  # {"h": .., "w": ..}
    k: int = 1


def create_app(models, datasets, output_dir="runs", workers=2, ui_dir=None):
    app = FastAPI(title="maskadv")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    executor = ThreadPoolExecutor(max_workers=workers)
    jobs = {}
    lock = threading.Lock()

    def get_model(name):
        if name not in models:
            raise HTTPException(404, f"unknown model {name!r}")
        return models[name]

    def get_dataset(name):
        if name not in datasets:
            raise HTTPException(404, f"unknown dataset {name!r}")
        return datasets[name]

    def get_image(dataset, index):
        if not 0 <= index < len(dataset):
            raise HTTPException(404, f"index {index} out of range [0, {len(dataset)})")
        return dataset[index]

    @app.get("/models")
    def list_models():
        return {name: {"input_shape": list(m.input_shape),
                       "input_range": list(m.input_range),
                       "num_classes": m.num_classes}
                for name, m in models.items()}

    @app.get("/datasets")
    def list_datasets():
        return {name: {"size": len(ds), "image_shape": list(ds.images.shape[1:])}
                for name, ds in datasets.items()}

    @app.get("/datasets/{name}/images/{index}")
    def dataset_image(name: str, index: int, model: str = None):
        ds = get_dataset(name)
        x, label = get_image(ds, index)
        net = get_model(model) if model else next(iter(models.values()))
        png = image_to_png(x, ds.input_range)
        return {"png": base64.b64encode(png).decode("ascii"), "label": label,
                "prediction": forward(net, x).predicted_label,
                "shape": list(x.shape)}

    def _execute(job_id):
        with lock:
            job = jobs[job_id]
            job["status"] = "running"
        try:
            result = run_attack(job["request"])
            run_dir = write_run_outputs(result, job["request"].image,
                                        job["request"].model.input_range,
                                        output_dir, job_id=job_id)
            with lock:
                job["result"] = result
                job["dir"] = run_dir
                job["status"] = "done"
        except Exception as exc:  # surfaced through the job status
            with lock:
                job["error"] = str(exc)
                job["status"] = "failed"

    @app.post("/attacks")
    def submit_attack(body: AttackBody):
        net = get_model(body.model)
        ds = get_dataset(body.dataset)
        x, label = get_image(ds, body.index)
        omega = None
        if body.constraint.mask is not None:
            try:
                omega = png_to_mask(base64.b64decode(body.constraint.mask))
            except Exception as exc:
                raise HTTPException(422, f"cannot decode mask PNG: {exc}") from exc
        spec = ConstraintSpec(kind=body.constraint.kind, eps=body.constraint.eps,
                              region=omega, ratio=body.constraint.ratio,
                              adaptive=body.constraint.adaptive)
        lo, hi = net.input_range
        try:
            spec.validate(x.shape, hi - lo)
        except MaskAdvError as exc:
            raise HTTPException(422, str(exc)) from exc
        request = AttackRequest(model=net, image=x, constraint=spec,
                                seed=body.seed, true_label=label)
        job_id = uuid.uuid4().hex[:12]
        with lock:
            jobs[job_id] = {"status": "queued", "request": request, "mask": omega,
                            "result": None, "dir": None, "error": None,
                            "input_range": net.input_range}
        executor.submit(_execute, job_id)
        return {"job_id": job_id}

    def get_job(job_id):
        with lock:
            job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return job

    @app.get("/attacks/{job_id}")
    def attack_status(job_id: str):
        job = get_job(job_id)
        payload = {"id": job_id, "status": job["status"], "error": job["error"],
                   "report": None, "images": None}
        result = job["result"]
        if result is not None:
            payload["report"] = result.report()
            payload["wall_ms"] = result.wall_ms
            names = ["clean"]
            if result.success:
                names += ["adversarial", "delta"]
            if job["mask"] is not None:
                names.append("mask")
            payload["images"] = {n: f"/attacks/{job_id}/images/{n}" for n in names}
        return payload

    @app.get("/attacks/{job_id}/report")
    def attack_report(job_id: str):
        job = get_job(job_id)
        if job["result"] is None:
            raise HTTPException(409, f"job {job_id!r} has no report yet")
        return Response(content=render_report(job["result"]),
                        media_type="application/json")

    @app.get("/attacks/{job_id}/images/{name}")
    def attack_image(job_id: str, name: str):
        job = get_job(job_id)
        result = job["result"]
        if result is None:
            raise HTTPException(409, f"job {job_id!r} has no images yet")
        rng = job["input_range"]
        x0 = job["request"].image
        if name == "clean":
            png = image_to_png(x0, rng)
        elif name == "adversarial" and result.success:
            png = image_to_png(result.adversarial, rng)
        elif name == "delta" and result.success:
            png = heatmap_to_png(result.perturbation)
        elif name == "mask" and job["mask"] is not None:
            png = mask_to_png(job["mask"])
        else:
            raise HTTPException(404, f"no image {name!r} for job {job_id!r}")
        return Response(content=png, media_type="image/png")

    @app.post("/importance")
    def importance(body: ImportanceBody):
        net = get_model(body.model)
        ds = get_dataset(body.dataset)
        x, _ = get_image(ds, body.index)
        imp = smoothgrad(net, x, m=body.m, n=body.n, sigma=body.sigma, seed=0)
        h = (body.window or {}).get("h", 10)
        w = (body.window or {}).get("w", 10)
        if body.k <= 1:
            regions = [best_rectangle(imp, h, w)]
        else:
            regions = topk_rectangles(imp, h, w, body.k)
        png = heatmap_to_png(imp.weighted())
        return {"png": base64.b64encode(png).decode("ascii"),
                "regions": [{"row": r.row, "col": r.col, "height": r.height,
                             "width": r.width, "score": r.score} for r in regions]}

    if ui_dir is not None and (Path(ui_dir) / "index.html").exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
