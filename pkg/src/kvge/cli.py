"""Command-line front end: config loading, dispatch, and reporting.

Commands: `constants` prints the model constants, `certify` evaluates the
regime-appropriate existence certificate, `solve` searches the annulus
for self-consistent solutions.  Exit codes: 0 pass/solution found,
1 certificate fail or no root, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Optional

from . import certify as certify_mod
from . import solve as solve_mod
from .errors import (
    DivergenceError,
    EmptyBoxError,
    EvalDomainError,
    ExprSyntaxError,
    HypothesisError,
    KvgeError,
    QuadratureError,
    UnboundVariableError,
    UnknownIdentifierError,
    ValidationError,
)
from .expr import parse
from .green import COERCIVE_INF, PAPER_SUP, BoundaryModel
from .kernel import Kernel
from .varexp import ExponentProfile, m_rho

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (ValidationError, ExprSyntaxError, UnknownIdentifierError,
                 UnboundVariableError, EvalDomainError, HypothesisError,
                 EmptyBoxError)
_NUMERICAL_ERRORS = (QuadratureError, DivergenceError)

_PROBLEM_KEYS = {"A", "f", "p", "kernel", "kernel_order", "kernel_expr",
                 "boundary", "boundary_csv", "alpha", "beta", "c0_mode",
                 "lambda", "rho1", "rho2", "q", "p_minus", "p_plus"}
_NUMERICS_KEYS = {"n_nodes", "grid_res", "tol_inner", "tol_outer",
                  "quad_tol", "margin"}
_OUTPUT_KEYS = {"json", "csv"}


@dataclass
class RunConfig:
    """Validated problem plus numerics and output settings."""

    spec: certify_mod.ProblemSpec
    name: str
    n_nodes: int = 257
    grid_res: int = 201
    tol_inner: float = 1e-10
    tol_outer: float = 1e-10
    quad_tol: float = 1e-10
    margin: float = 0.0
    json_out: Optional[str] = None
    csv_out: Optional[str] = None


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise ValidationError(f"{key}: {message}")


def _check_keys(d: dict, allowed: set, where: str):
    for k in d:
        if k not in allowed:
            raise ValidationError(f"{where}.{k}: unknown key")


def _resolve_config_path(name: str) -> str:
    if os.path.exists(name):
        return name
    bundled = resources.files("kvge").joinpath(f"configs/{name}.json")
    if bundled.is_file():
        return str(bundled)
    raise ValidationError(f"config: no file or bundled config named {name!r}")


def _build_kernel(prob: dict) -> Kernel:
    kind = prob.get("kernel", "one")
    if kind == "one":
        return Kernel.constant_one()
    if kind == "riemann_liouville":
        _require("kernel_order" in prob, "problem.kernel_order",
                 "required for the riemann_liouville kernel")
        return Kernel.riemann_liouville(float(prob["kernel_order"]))
    if kind == "expression":
        _require("kernel_expr" in prob, "problem.kernel_expr",
                 "required for the expression kernel")
        return Kernel.from_expression(prob["kernel_expr"])
    raise ValidationError(f"problem.kernel: unknown kind {kind!r}")


def _build_boundary(prob: dict, c0_mode: str) -> BoundaryModel:
    kind = prob.get("boundary", "dirichlet")
    alpha = float(prob.get("alpha", 0.25))
    beta = float(prob.get("beta", 0.75))
    if kind == "dirichlet":
        return BoundaryModel.dirichlet(alpha, beta, c0_mode)
    if kind == "right_focal":
        return BoundaryModel.right_focal(alpha, beta, c0_mode)
    if kind == "tabulated":
        _require("boundary_csv" in prob, "problem.boundary_csv",
                 "required for a tabulated boundary kernel")
        return BoundaryModel.from_csv(prob["boundary_csv"], alpha, beta, c0_mode)
    raise ValidationError(f"problem.boundary: unknown kind {kind!r}")


def load_config(name: str, f_override: Optional[str] = None,
                lambda_override: Optional[float] = None,
                c0_mode: Optional[str] = None) -> RunConfig:
    """Load and fully validate a JSON config (path or bundled name)."""
    path = _resolve_config_path(name)
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config: invalid JSON ({exc})") from None
    _check_keys(raw, {"problem", "numerics", "outputs"}, "config")
    prob = dict(raw.get("problem", {}))
    nums = dict(raw.get("numerics", {}))
    outs = dict(raw.get("outputs", {}))
    _check_keys(prob, _PROBLEM_KEYS, "problem")
    _check_keys(nums, _NUMERICS_KEYS, "numerics")
    _check_keys(outs, _OUTPUT_KEYS, "outputs")

    if f_override is not None:
        prob["f"] = f_override
    if lambda_override is not None:
        prob["lambda"] = lambda_override
    mode = c0_mode or prob.get("c0_mode", COERCIVE_INF)
    _require(mode in (COERCIVE_INF, PAPER_SUP), "problem.c0_mode",
             f"must be '{COERCIVE_INF}' or '{PAPER_SUP}'")

    for key in ("A", "f", "p", "rho1", "rho2", "lambda"):
        _require(key in prob, f"problem.{key}", "missing required key")
    alpha = float(prob.get("alpha", 0.25))
    beta = float(prob.get("beta", 0.75))
    _require(alpha < beta, "problem.beta", "need alpha < beta")
    _require(float(prob["rho1"]) < float(prob["rho2"]), "problem.rho2",
             "need rho1 < rho2")
    override = None
    if ("p_minus" in prob) != ("p_plus" in prob):
        raise ValidationError("problem.p_minus/p_plus: override needs both bounds")
    if "p_minus" in prob:
        override = (float(prob["p_minus"]), float(prob["p_plus"]))

    def named(key, fn):
        try:
            return fn()
        except KvgeError as exc:
            raise ValidationError(f"problem.{key}: {exc}") from None

    kernel = named("kernel", lambda: _build_kernel(prob))
    boundary = named("boundary", lambda: _build_boundary(prob, mode))
    a_expr = named("A", lambda: parse(prob["A"], {"t"}))
    f_expr = named("f", lambda: parse(prob["f"], {"t", "u"}))
    profile = named("p", lambda: ExponentProfile.from_expression(prob["p"], override))
    spec = named("rho1/rho2/lambda/q", lambda: certify_mod.ProblemSpec(
        A=a_expr, f=f_expr, profile=profile, kernel=kernel, boundary=boundary,
        lam=float(prob["lambda"]), rho1=float(prob["rho1"]),
        rho2=float(prob["rho2"]),
        q=float(prob["q"]) if prob.get("q") is not None else None))

    base = os.path.splitext(os.path.basename(path))[0]
    return RunConfig(
        spec=spec, name=base,
        n_nodes=int(nums.get("n_nodes", 257)),
        grid_res=int(nums.get("grid_res", 201)),
        tol_inner=float(nums.get("tol_inner", 1e-10)),
        tol_outer=float(nums.get("tol_outer", 1e-10)),
        quad_tol=float(nums.get("quad_tol", 1e-10)),
        margin=float(nums.get("margin", 0.0)),
        json_out=outs.get("json"), csv_out=outs.get("csv"),
    )


# --- reporting helpers -------------------------------------------------------

def fraction_hint(x: float, max_den: int = 4096) -> Optional[str]:
    """Short p/q form when x is (numerically) a small rational."""
    if not isinstance(x, float) or not abs(x) < 1e6:
        return None
    fr = Fraction(x).limit_denominator(max_den)
    if fr.denominator == 1:
        return None
    if abs(x - float(fr)) <= 1e-12 * max(1.0, abs(x)):
        return f"{fr.numerator}/{fr.denominator}"
    return None


def _fmt(x) -> str:
    if isinstance(x, float):
        hint = fraction_hint(x)
        return f"{x:.12g} (= {hint})" if hint else f"{x:.12g}"
    return str(x)


def _emit(report: dict, json_out: Optional[str]):
    if json_out:
        with open(json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_csv(profile: solve_mod.SolutionProfile, path: str):
    with open(path, "w") as fh:
        fh.write("t,u\n")
        for t, u in zip(profile.u.nodes, profile.u.values):
            fh.write(f"{t:.17g},{u:.17g}\n")


# --- commands ---------------------------------------------------------------

def cmd_constants(cfg: RunConfig, theorem: str = "auto") -> tuple[dict, int]:
    spec = cfg.spec
    bm, kern, prof = spec.boundary, spec.kernel, spec.profile
    label = certify_mod.select_theorem(spec) if theorem == "auto" else theorem
    b1, b2, q_used, kind = certify_mod.localization_bounds(spec, label)
    report = {
        "config": cfg.name,
        "theorem": label,
        "regime": prof.regime,
        "p_minus": prof.p_minus,
        "p_plus": prof.p_plus,
        "eta0": bm.eta0,
        "C0_coercive_inf": bm.compute_C0(COERCIVE_INF),
        "C0_paper_sup": bm.compute_C0(PAPER_SUP),
        "C0_mode": bm.c0_mode,
        "GM": bm.GM(),
        "partial_GM": bm.partial_GM(),
        "mass": kern.mass(),
        "partial_mass": kern.partial_conv_mass(bm.alpha, bm.beta),
        "reverse_holder_norm": kern.reverse_holder_norm(q_used) if q_used > 1 else None,
        "q_used": q_used,
        "bound_kind": kind,
        "eps_rho1": b1.eps,
        "eps_rho2": b2.eps,
        "m_rho1": b1.m_rho,
        "m_rho2": m_rho(spec.rho2, kern, prof),
        "M_rho1": b1.M_upper,
        "M_rho2": b2.M_upper,
    }
    print(f"constants [{cfg.name}] ({label}, {prof.regime} regime)")
    for key in ("eta0", "C0_coercive_inf", "C0_paper_sup", "GM", "partial_GM",
                "mass", "partial_mass", "reverse_holder_norm", "q_used",
                "m_rho1", "m_rho2", "M_rho1", "M_rho2", "eps_rho1"):
        print(f"  {key:<22} {_fmt(report[key])}")
    _emit(report, cfg.json_out)
    return report, EXIT_PASS


def cmd_certify(cfg: RunConfig, theorem: str = "auto") -> tuple[dict, int]:
    cert = certify_mod.check_certificate(cfg.spec, theorem=theorem,
                                         margin=cfg.margin, grid=cfg.grid_res)
    report = cert.to_report()
    verdict = "PASS" if cert.passed else "FAIL"
    print(f"certificate [{cfg.name}] {cert.theorem}: {verdict}")
    print(f"  condition 1: {cert.condition1_lhs:.12g} > {cert.condition1_rhs:.12g}"
          f"  [{'met' if report['condition1']['pass'] else 'not met'}]")
    print(f"  condition 2: {cert.condition2_lhs:.12g} < {cert.condition2_rhs:.12g}"
          f"  [{'met' if report['condition2']['pass'] else 'not met'}]")
    fm, fM = cert.f_min_box, cert.f_max_box
    print(f"  f_min on [{fm.t_range[0]:g},{fm.t_range[1]:g}]x"
          f"[{_fmt(fm.u_range[0])},{_fmt(fm.u_range[1])}] = {_fmt(fm.value)}")
    print(f"  f_max on [{fM.t_range[0]:g},{fM.t_range[1]:g}]x"
          f"[{_fmt(fM.u_range[0])},{_fmt(fM.u_range[1])}] = {_fmt(fM.value)}")
    print(f"  A(rho1) = {_fmt(cert.A_rho1)}   A(rho2) = {_fmt(cert.A_rho2)}"
          f"   positivity {'ok' if cert.positivity_ok else 'VIOLATED'}")
    if cert.lambda_window:
        print(f"  lambda window: ({cert.lambda_window[0]:.12g}, "
              f"{cert.lambda_window[1]:.12g})")
    else:
        print("  lambda window: empty")
    print(f"  localization: {_fmt(cert.localization[0])} <= sup|u| <= "
          f"{_fmt(cert.localization[1])}")
    if cert.extras.get("condition1_variant_with_minus_one"):
        var = cert.extras["condition1_variant_with_minus_one"]
        print(f"  condition 1 variant (with -1): {var['lhs']:.12g} > "
              f"{var['rhs']:.12g}  [{'met' if var['pass'] else 'not met'}]")
    _emit(report, cfg.json_out)
    return report, EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_solve(cfg: RunConfig) -> tuple[dict, int]:
    profiles = solve_mod.outer_solve(
        cfg.spec, n=cfg.n_nodes, tol_outer=cfg.tol_outer,
        tol_inner=cfg.tol_inner, quad_tol=cfg.quad_tol)
    report = {"config": cfg.name, "count": len(profiles),
              "roots": [p.to_report() for p in profiles]}
    if not profiles:
        print(f"solve [{cfg.name}]: no self-consistent solution located in "
              f"[{cfg.spec.rho1:g}, {cfg.spec.rho2:g}]")
    else:
        print(f"solve [{cfg.name}]: {len(profiles)} root(s)")
        for i, p in enumerate(profiles, 1):
            flags = ", ".join(
                name for name, ok in (("localization", p.localization_ok),
                                      ("cone", p.cone_ok),
                                      ("annulus", p.annulus_ok)) if ok)
            bad = ", ".join(
                name for name, ok in (("localization", p.localization_ok),
                                      ("cone", p.cone_ok),
                                      ("annulus", p.annulus_ok)) if not ok)
            print(f"  root {i}: z* = {p.z_star:.12g}, sup|u| = {p.sup_norm:.12g}, "
                  f"residual = {p.residual_sup:.3g}")
            print(f"          ok: {flags or '-'}" + (f"; failed: {bad}" if bad else ""))
        if cfg.csv_out:
            _write_csv(profiles[0], cfg.csv_out)
    _emit(report, cfg.json_out)
    return report, EXIT_PASS if profiles else EXIT_FAIL


# --- entry point --------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kvge",
        description="Existence certificates and collocation solutions for "
                    "nonlocal Kirchhoff-type boundary value problems")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (("constants", "print the derived model constants"),
                            ("certify", "evaluate the existence certificate"),
                            ("solve", "search [rho1, rho2] for solutions")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a JSON config or a bundled name "
                                      "(example212, quadratic_oracle)")
        p.add_argument("--json", dest="json_out", metavar="PATH",
                       help="write the machine-readable report here")
        p.add_argument("--csv", dest="csv_out", metavar="PATH",
                       help="write the first solution as CSV (t,u)")
        p.add_argument("--margin", type=float, default=None,
                       help="multiplicative safety margin on both conditions")
        p.add_argument("--c0-mode", choices=[PAPER_SUP, COERCIVE_INF],
                       default=None, help="averaging-constant mode")
        p.add_argument("--theorem", default="auto",
                       choices=["auto", "t2.8", "t3.6", "t4.4", "c2.10", "c2.11"],
                       help="force a particular certificate")
        p.add_argument("--f", dest="f_override", metavar="EXPR",
                       help="override the forcing term f(t, u)")
        p.add_argument("--lambda", dest="lambda_override", type=float,
                       metavar="X", help="override the parameter lambda")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, f_override=args.f_override,
                          lambda_override=args.lambda_override,
                          c0_mode=args.c0_mode)
        if args.json_out:
            cfg.json_out = args.json_out
        if args.csv_out:
            cfg.csv_out = args.csv_out
        if args.margin is not None:
            cfg.margin = args.margin
        if args.command == "constants":
            report, code = cmd_constants(cfg, theorem=args.theorem)
        elif args.command == "certify":
            report, code = cmd_certify(cfg, theorem=args.theorem)
        else:
            report, code = cmd_solve(cfg)
        return code
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _INPUT_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
