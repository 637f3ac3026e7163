"""End-to-end attack orchestration: preliminary search, then boundary refinement.

A run builds the perturbation bounds from the requested constraint source,
finds a preliminary adversarial example with the masked DeepFool phase, and,
if that succeeds, shrinks the max-norm with the boundary walk under the same
(possibly loosened) bounds. Failure of the preliminary phase ends the run
with no result.
"""

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .boundary import BBConfig, bb_optimize
from .constraints import (attackable_pixels, cap_to_range, region_to_mask,
                          ratio_to_mask, uniform_mask)
from .deepfool import DeepFoolConfig, DeepFoolTrace, deepfool_attack
from .errors import InputError, NumericError
from .metrics import ciede2000, lp_norms, ssim
from .nn import forward
from .saliency import imperceptible_mask, smoothgrad

CONSTRAINT_KINDS = ("uniform", "region", "ratio", "imperceptible")
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str
    eps: float = None
    region: np.ndarray = None
    ratio: float = None
    adaptive: bool = False

    def validate(self, image_shape, range_width):
        if self.kind not in CONSTRAINT_KINDS:
            raise InputError(f"unknown constraint kind {self.kind!r}")
        if self.kind in ("uniform", "region") and self.eps is None:
            raise InputError(f"constraint kind {self.kind!r} requires eps")
        if self.eps is not None and not 0 < self.eps <= range_width:
            raise InputError(f"eps must be in (0, {range_width}], got {self.eps}")
        if self.kind == "region":
            if self.region is None:
                raise InputError("constraint kind 'region' requires a region mask")
        elif self.region is not None:
            raise InputError(f"constraint kind {self.kind!r} does not take a region")
        if self.kind == "ratio":
            if self.ratio is None or self.ratio <= 0:
                raise InputError(f"ratio must be positive, got {self.ratio}")
        elif self.ratio is not None:
            raise InputError(f"constraint kind {self.kind!r} does not take a ratio")

    def params(self):
        out = {}
        if self.eps is not None:
            out["eps"] = self.eps
        if self.ratio is not None:
            out["ratio"] = self.ratio
        if self.kind == "region" and self.region is not None:
            out["region_pixels"] = int(np.asarray(self.region).sum())
        if self.kind == "imperceptible":
            out["adaptive"] = self.adaptive
        return out


@dataclass
class AttackRequest:
    model: object
    image: np.ndarray
    constraint: ConstraintSpec
    deepfool: DeepFoolConfig = field(default_factory=DeepFoolConfig)
    bb: BBConfig = field(default_factory=BBConfig)
    seed: int = 0
    true_label: int = None


@dataclass
class AttackResult:
    success: bool
    original_label: int
    adversarial_label: int
    adversarial: np.ndarray
    perturbation: np.ndarray
    norms: dict
    ssim: float
    ciede2000: float
    deepfool_trace: DeepFoolTrace
    bb_steps: int
    constraint_kind: str
    constraint_params: dict
    seed: int
    wall_ms: float
    eps_final: np.ndarray

    def report(self):
        """Canonical report payload. wall_ms is reserved as null so that the
        serialized report is byte-identical across reruns with one seed."""
        return {
            "success": self.success,
            "norms": self.norms,
            "ssim": self.ssim,
            "ciede2000": self.ciede2000,
            "iterations": {"deepfool": self.deepfool_trace.iterations,
                           "bb": self.bb_steps},
            "constraint": {"kind": self.constraint_kind,
                           "params": self.constraint_params},
            "seed": self.seed,
            "wall_ms": None,
        }


def render_report(result):
    """The one serialization used by every surface (file, API)."""
    return json.dumps(result.report(), sort_keys=True, separators=(",", ":")) + "\n"


def build_constraint(spec, model, x0, seed=0):
    lo, hi = model.input_range
    width = hi - lo
    spec.validate(x0.shape, width)
    if spec.kind == "uniform":
        return uniform_mask(x0.shape, spec.eps)
    if spec.kind == "region":
        return region_to_mask(spec.region, spec.eps, x0.shape)
    if spec.kind == "ratio":
        imp = smoothgrad(model, x0, seed=seed)
        eps = spec.eps if spec.eps is not None else width
        return ratio_to_mask(x0, imp.weighted(), spec.ratio, eps)
    return imperceptible_mask(x0)


def _verify_feasible(x_adv, x0, eps_final, input_range):
    delta = np.abs(x_adv - x0)
    if np.any(delta > eps_final + FEASIBILITY_SLACK):
        raise NumericError("attack produced a perturbation exceeding its bounds")
    lo, hi = input_range
    if x_adv.min() < lo - FEASIBILITY_SLACK or x_adv.max() > hi + FEASIBILITY_SLACK:
        raise NumericError("attack produced values outside the input range")


def run_attack(req):
    """Execute the two-phase attack described in the module docs."""
    x0 = np.asarray(req.image, dtype=np.float64)
    model = req.model
    started = time.perf_counter()
    eps = build_constraint(req.constraint, model, x0, seed=req.seed)
    df_cfg = req.deepfool
    if req.constraint.adaptive and not df_cfg.adaptive:
        df_cfg = dataclasses.replace(df_cfg, adaptive=True)

    label0 = forward(model, x0).predicted_label
    prelim, df_trace, eps_final = deepfool_attack(model, x0, eps, df_cfg,
                                                  true_label=req.true_label)
    common = dict(original_label=label0, deepfool_trace=df_trace,
                  constraint_kind=req.constraint.kind,
                  constraint_params=req.constraint.params(), seed=req.seed,
                  eps_final=eps_final)
    if prelim is None:
        return AttackResult(success=False, adversarial_label=label0,
                            adversarial=None, perturbation=None, norms=None,
                            ssim=None, ciede2000=None, bb_steps=0,
                            wall_ms=1000.0 * (time.perf_counter() - started),
                            **common)

    if np.array_equal(prelim, x0):
        # zero perturbation already flips the label (input was misclassified)
        x_adv, bb_steps = prelim, 0
    else:
        x_adv, bb_trace = bb_optimize(model, x0, prelim, eps_final, req.bb)
        bb_steps = bb_trace.steps
    _verify_feasible(x_adv, x0, eps_final, model.input_range)

    delta = x_adv - x0
    l0, l1, l2, linf = lp_norms(delta)
    lo, hi = model.input_range
    color = x0.ndim == 3 and x0.shape[-1] == 3
    scale = lambda v: (v - lo) / (hi - lo)
    return AttackResult(success=True,
                        adversarial_label=forward(model, x_adv).predicted_label,
                        adversarial=x_adv, perturbation=delta,
                        norms={"l0": l0, "l1": l1, "l2": l2, "linf": linf},
                        ssim=ssim(x0, x_adv, dynamic_range=hi - lo),
                        ciede2000=ciede2000(scale(x0), scale(x_adv)) if color else None,
                        bb_steps=bb_steps,
                        wall_ms=1000.0 * (time.perf_counter() - started),
                        **common)


def estimate_robust_radius(model, x0, region, deepfool_cfg=None, bb_cfg=None,
                           seed=0, true_label=None):
    """Max-norm radius of the attack restricted to the region; the full value
    range is returned as a sentinel when no adversarial example is found."""
    region = np.asarray(region)
    if not np.any(region == 1):
        raise InputError("estimate_robust_radius: region is empty")
    lo, hi = model.input_range
    req = AttackRequest(model=model, image=x0,
                        constraint=ConstraintSpec(kind="region", region=region,
                                                  eps=hi - lo),
                        seed=seed, true_label=true_label)
    if deepfool_cfg is not None:
        req.deepfool = deepfool_cfg
    if bb_cfg is not None:
        req.bb = bb_cfg
    result = run_attack(req)
    if not result.success:
        return hi - lo
    return result.norms["linf"]
