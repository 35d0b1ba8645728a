"""Experiment harness: run the verification suites from a JSON config.

Each subcommand builds the configured couplings, window, and jets, runs one
suite, and writes <out>/report.csv plus <out>/summary.json. Every CSV row
carries the tolerance it was judged against. The process exits 0 when all
rows pass, 1 on a numerical failure, and 2 when the configuration itself is
invalid. Runs are deterministic: the same config produces byte-identical
reports.
"""

from __future__ import annotations

import argparse
import copy
import csv
import dataclasses
import json
import pathlib
import sys

import numpy as np

from .errors import (ConfigError, InvalidJetError, RangeError,
                     TruncationError, UnsupportedOrderError)
from .jets import DualJet, Jet
from .lagrangian import ModelParams, el_check
from .linear import (GreensChoice, RankOneModifier, greens_apply,
                     greens_residual, linear_residual, scalar_solution,
                     wave_solution)
from .perturb import build_hierarchy, family_taylor_I, taylor_oracle_I
from .slayer import MAX_FAMILY_ORDER, greens_dependence_check, slayer_sweep
from .space import Region, Window, past_region

JET_KINDS = ("right_mover", "left_mover", "scalar_mode", "bump")
SOLUTION_KINDS = ("right_mover", "left_mover", "scalar_mode")
WAVE_KINDS = ("right_mover", "left_mover")

# suites whose identities assume the balanced volume coupling
NU_SENSITIVE = ("slayer-sweep", "perturb-verify", "greens-dependence")

CSV_COLUMNS = ("suite", "slice_t", "quantity", "value", "reference",
               "residual", "tolerance", "pass")

DEFAULT_CONFIG = {
    "model": {"lambda_a": 5.0, "lambda_i": 2.0, "delta": 1.0,
              "epsilon": 0.2, "nu": None},
    "force_nu": False,
    "window": {"t_min": -40, "t_max": 40, "x_min": -40, "x_max": 40},
    "jets": {
        "u": {"kind": "right_mover", "center": 3, "width": 7,
              "amplitude": 0.2},
        "v": {"kind": "left_mover", "center": -3, "width": 7,
              "amplitude": 0.25},
        "probe": {"kind": "scalar_mode", "center": 0, "width": 7,
                  "amplitude": 0.01, "decay": "past"},
    },
    "greens": {"vector_kind": "retarded", "scalar_kind": "banded_solve"},
    "slices": {"start": -5, "stop": 5},
    "order": 3,
    "draws": 20,
    "modifiers": 5,
    "seed": 0,
    "tolerances": {
        "el": 1e-12,
        "solution_residual": 1e-10,
        "greens": 1e-10,
        "backend_agreement": 1e-9,
        "closed_form": 1e-12,
        "conservation": 1e-10,
        "family": 1e-9,
        "dependence": 1e-10,
    },
}


@dataclasses.dataclass(frozen=True)
class Row:
    """One judged quantity of a suite run."""

    suite: str
    slice_t: int | None
    quantity: str
    value: float
    reference: float
    tolerance: float

    @property
    def residual(self) -> float:
        return abs(self.value - self.reference)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    window: Window
    u: Jet
    v: Jet
    probe: Jet | None
    specs: dict
    greens: GreensChoice
    slices: range
    order: int
    draws: int
    modifiers: int
    seed: int
    force_nu: bool
    tolerances: dict


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where} must be true or false, got {value!r}")
    return value


def _section(data: dict, name: str) -> dict:
    value = data[name]
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be an object, got {value!r}")
    return value


def _expect_keys(section: dict, where: str, required, optional=()):
    unknown = set(section) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where} has unknown fields {sorted(unknown)}")
    missing = set(required) - set(section)
    if missing:
        raise ConfigError(f"{where} is missing fields {sorted(missing)}")


def _bump_values(center: int, width: int, amplitude: float) -> dict:
    half = (width + 1) / 2.0
    reach = (width - 1) // 2
    return {center + k: amplitude * (1.0 - (k / half) ** 2) ** 2
            for k in range(-reach, reach + 1)}


def _parse_jet_spec(spec, where: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be an object, got {spec!r}")
    kind = spec.get("kind")
    if kind not in JET_KINDS:
        raise ConfigError(
            f"{where}.kind must be one of {', '.join(JET_KINDS)}, "
            f"got {kind!r}")
    allowed = {"kind", "center", "width", "amplitude", "profile"}
    if kind == "scalar_mode":
        allowed.add("decay")
    _expect_keys(spec, where, {"kind"}, allowed)
    out = {"kind": kind}
    out["center"] = _as_int(spec.get("center", 0), f"{where}.center")
    out["width"] = _as_int(spec.get("width", 1), f"{where}.width")
    if out["width"] < 1:
        raise ConfigError(f"{where}.width must be >= 1, got {out['width']}")
    out["amplitude"] = _as_float(spec.get("amplitude", 1.0),
                                 f"{where}.amplitude")
    out["decay"] = spec.get("decay", "past")
    if out["decay"] not in ("past", "future"):
        raise ConfigError(
            f"{where}.decay must be 'past' or 'future', got {out['decay']!r}")
    profile = spec.get("profile")
    if profile is None:
        out["profile"] = None
        out["span"] = abs(out["center"]) + (out["width"] - 1) // 2
        return out
    if not isinstance(profile, dict) or not profile:
        raise ConfigError(
            f"{where}.profile must be a non-empty object of site -> value")
    parsed = {}
    for key, val in profile.items():
        try:
            site = int(key)
        except (TypeError, ValueError):
            raise ConfigError(
                f"{where}.profile key {key!r} is not an integer site"
            ) from None
        parsed[site] = _as_float(val, f"{where}.profile[{key}]")
    out["profile"] = parsed
    out["span"] = max(abs(site) for site in parsed)
    return out


def _build_jet(spec: dict, params: ModelParams, window: Window) -> Jet:
    """Realize a jet spec on the window.

    Movers synthesize a quartic bump over the diagonal coordinate from
    center/width/amplitude unless an explicit tabulated profile is given
    (then its values are taken literally). scalar_mode uses the profile as
    spatial weights scaled by amplitude at t = 0. bump is a localized
    non-solution scalar hump, useful for exercising failure paths.
    """
    kind = spec["kind"]
    if spec["profile"] is not None:
        profile = dict(spec["profile"])
    elif kind == "scalar_mode":
        profile = _bump_values(spec["center"], spec["width"], 1.0)
    else:
        profile = _bump_values(spec["center"], spec["width"],
                               spec["amplitude"])
    if kind == "right_mover":
        return wave_solution({}, profile, window)
    if kind == "left_mover":
        return wave_solution(profile, {}, window)
    if kind == "scalar_mode":
        return scalar_solution(spec["amplitude"], params, window,
                               decay=spec["decay"], profile=profile)
    a = window.zeros()
    for t, tv in _bump_values(0, spec["width"], 1.0).items():
        for x, xv in profile.items():
            a[window.index(t, x)] = tv * xv
    return Jet(window, a, window.zeros())


def _merge(base: dict, incoming: dict):
    for key, val in incoming.items():
        if key in base and isinstance(base[key], dict) and isinstance(val,
                                                                      dict):
            _merge(base[key], val)
        else:
            base[key] = val


def _apply_override(data: dict, text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = data
    parts = key.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(
                f"override path {key!r} does not reach a config section")
        node = node[part]
    node[parts[-1]] = value


def load_config(path, overrides, seed, suite: str) -> ExperimentConfig:
    """Assemble the effective config: defaults, then file, then overrides."""
    data = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            text = pathlib.Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        try:
            incoming = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") \
                from None
        if not isinstance(incoming, dict):
            raise ConfigError("config top level must be a JSON object")
        _merge(data, incoming)
    for text in overrides:
        _apply_override(data, text)
    if seed is not None:
        data["seed"] = seed
    return _validate(data, suite)


def _validate(data: dict, suite: str) -> ExperimentConfig:
    _expect_keys(data, "config", set(DEFAULT_CONFIG))

    model = _section(data, "model")
    _expect_keys(model, "model", set(DEFAULT_CONFIG["model"]))
    nu = model["nu"]
    if nu is not None:
        nu = _as_float(nu, "model.nu")
    try:
        params = ModelParams(_as_float(model["lambda_a"], "model.lambda_a"),
                             _as_float(model["lambda_i"], "model.lambda_i"),
                             _as_float(model["delta"], "model.delta"),
                             _as_float(model["epsilon"], "model.epsilon"),
                             nu)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    force_nu = _as_bool(data["force_nu"], "force_nu")
    if (suite in NU_SENSITIVE and not force_nu
            and params.nu != params.balanced_nu):
        raise ConfigError(
            f"nu={params.nu} breaks the volume balance that {suite} relies "
            f"on (balanced value {params.balanced_nu}); set force_nu to run "
            f"anyway")

    wsec = _section(data, "window")
    _expect_keys(wsec, "window", set(DEFAULT_CONFIG["window"]))
    try:
        window = Window(_as_int(wsec["t_min"], "window.t_min"),
                        _as_int(wsec["t_max"], "window.t_max"),
                        _as_int(wsec["x_min"], "window.x_min"),
                        _as_int(wsec["x_max"], "window.x_max"))
    except RangeError as exc:
        raise ConfigError(str(exc)) from None
    if window.shape[0] < 3 or window.shape[1] < 3:
        raise ConfigError(
            f"window {window} has no interior site on some axis")

    order = _as_int(data["order"], "order")
    if not 1 <= order <= MAX_FAMILY_ORDER:
        raise ConfigError(
            f"order must lie in 1..{MAX_FAMILY_ORDER}, got {order}")

    jsec = _section(data, "jets")
    _expect_keys(jsec, "jets", {"u", "v"}, {"probe"})
    specs = {name: _parse_jet_spec(jsec[name], f"jets.{name}")
             for name in ("u", "v")}
    if jsec.get("probe") is not None:
        specs["probe"] = _parse_jet_spec(jsec["probe"], "jets.probe")
    if suite == "slayer-sweep":
        for name in ("u", "v"):
            if specs[name]["kind"] not in WAVE_KINDS:
                raise ConfigError(
                    f"jets.{name} must be a wave kind for {suite} (the "
                    f"bilinear forms take vanishing-scalar jets), got "
                    f"{specs[name]['kind']!r}")
    if suite in ("perturb-verify", "greens-dependence"):
        for name in ("u", "v"):
            if specs[name]["kind"] not in SOLUTION_KINDS:
                raise ConfigError(
                    f"jets.{name} must solve the linearized equation for "
                    f"{suite}, got kind {specs[name]['kind']!r}")

    span = max(spec["span"] for spec in specs.values())
    margin = min(window.t_max, -window.t_min, window.x_max, -window.x_min)
    if margin < order + span:
        raise ConfigError(
            f"window margin {margin} is smaller than truncation order "
            f"{order} plus jet span {span}; enlarge the window or shrink "
            f"the jets")

    gsec = _section(data, "greens")
    _expect_keys(gsec, "greens", set(DEFAULT_CONFIG["greens"]))
    try:
        greens = GreensChoice(vector_kind=gsec["vector_kind"],
                              scalar_kind=gsec["scalar_kind"])
    except InvalidJetError as exc:
        raise ConfigError(str(exc)) from None

    ssec = _section(data, "slices")
    _expect_keys(ssec, "slices", set(DEFAULT_CONFIG["slices"]))
    start = _as_int(ssec["start"], "slices.start")
    stop = _as_int(ssec["stop"], "slices.stop")
    if start > stop:
        raise ConfigError(f"slices.start {start} exceeds slices.stop {stop}")
    if start < window.t_min or stop >= window.t_max:
        raise ConfigError(
            f"slice range [{start}, {stop}] must satisfy "
            f"{window.t_min} <= start and stop < {window.t_max} (closed "
            f"forms read the row above each cut)")

    draws = _as_int(data["draws"], "draws")
    modifiers = _as_int(data["modifiers"], "modifiers")
    if draws < 1 or modifiers < 1:
        raise ConfigError("draws and modifiers must be >= 1")
    seed = _as_int(data["seed"], "seed")
    if seed < 0:
        raise ConfigError(f"seed must be >= 0, got {seed}")

    tsec = _section(data, "tolerances")
    _expect_keys(tsec, "tolerances", set(DEFAULT_CONFIG["tolerances"]))
    tolerances = {}
    for key in DEFAULT_CONFIG["tolerances"]:
        tolerances[key] = _as_float(tsec[key], f"tolerances.{key}")
        if tolerances[key] <= 0.0:
            raise ConfigError(f"tolerances.{key} must be positive")

    try:
        u = _build_jet(specs["u"], params, window)
        v = _build_jet(specs["v"], params, window)
        probe = (_build_jet(specs["probe"], params, window)
                 if "probe" in specs else None)
    except RangeError as exc:
        raise ConfigError(str(exc)) from None

    return ExperimentConfig(params=params, window=window, u=u, v=v,
                            probe=probe, specs=specs, greens=greens,
                            slices=range(start, stop + 1), order=order,
                            draws=draws, modifiers=modifiers, seed=seed,
                            force_nu=force_nu, tolerances=tolerances)


def _run_check_el(cfg: ExperimentConfig) -> list:
    tol = cfg.tolerances["el"]
    rep = el_check(cfg.params, cfg.window)
    rows = [Row("check-el", None, "interior_max_abs", rep.max_abs_base,
                0.0, tol)]
    for phi in rep.sampled:
        rows.append(Row("check-el", None, f"fiber_min[phi={phi:+.4f}]",
                        rep.sampled[phi], rep.reference[phi], tol))
    # the functional must stay nonnegative over the sampled fiber angles
    rows.append(Row("check-el", None, "fiber_negative_part",
                    min(0.0, rep.min_sampled), 0.0, tol))
    return rows


def _run_solve_linear(cfg: ExperimentConfig) -> list:
    interior = Region(cfg.window, cfg.window.interior_mask())
    tol = cfg.tolerances["solution_residual"]
    rows = []
    for name in ("u", "v"):
        res = linear_residual(getattr(cfg, name), interior, cfg.params,
                              cfg.window)
        rows.append(Row("solve-linear", None, f"{name}_interior_residual",
                        res, 0.0, tol))
    return rows


def _run_greens_verify(cfg: ExperimentConfig) -> list:
    """Defining-property residuals for randomized dual jets.

    Each draw is checked against every combination of vector kind and scalar
    backend; the two scalar backends are also compared against each other.
    The edge check is off: this suite judges the interior property only.
    """
    p, window = cfg.params, cfg.window
    half = 3
    if not (window.contains(-half, -half) and window.contains(half, half)):
        raise ConfigError(
            f"window {window} cannot hold the centered support box of "
            f"half-width {half}")
    box = Region.from_box(window, -half, half, -half, half)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for draw in range(cfg.draws):
        b = window.zeros()
        w_phi = window.zeros()
        b[box.mask] = 0.05 * rng.standard_normal(box.site_count())
        w_phi[box.mask] = 0.05 * rng.standard_normal(box.site_count())
        w = DualJet(window, b, w_phi)
        outs = {}
        for vk in ("retarded", "advanced"):
            for sk in ("banded_solve", "frequency"):
                choice = GreensChoice(vector_kind=vk, scalar_kind=sk)
                outs[(vk, sk)] = greens_apply(choice, w, p, window,
                                              edge_check=False)
                res = greens_residual(choice, w, p, window, edge_check=False)
                rows.append(Row("greens-verify", None,
                                f"defect[{vk},{sk},draw={draw:02d}]",
                                res, 0.0, cfg.tolerances["greens"]))
        for vk in ("retarded", "advanced"):
            lo = outs[(vk, "banded_solve")]
            hi = outs[(vk, "frequency")]
            gap = max(float(np.abs(lo.a - hi.a).max()),
                      float(np.abs(lo.u_phi - hi.u_phi).max()))
            rows.append(Row("greens-verify", None,
                            f"backend_agreement[{vk},draw={draw:02d}]",
                            gap, 0.0, cfg.tolerances["backend_agreement"]))
    return rows


def _run_slayer_sweep(cfg: ExperimentConfig) -> list:
    tol = cfg.tolerances
    report = slayer_sweep(cfg.u, cfg.v, cfg.slices, cfg.greens, cfg.params,
                          cfg.window, scalar_probe=cfg.probe)
    rows = []
    for s in report.slices:
        rows.append(Row("slayer-sweep", s.slice_t, "i1_balance",
                        s.i1_surface, s.i1_volume, tol["conservation"]))
        rows.append(Row("slayer-sweep", s.slice_t, "sympl_closed_form",
                        s.sympl, s.sympl_closed, tol["closed_form"]))
        rows.append(Row("slayer-sweep", s.slice_t, "symm_closed_form",
                        s.symm_surface, s.symm_surface_closed,
                        tol["closed_form"]))
        rows.append(Row("slayer-sweep", s.slice_t, "symm_volume_identity",
                        s.symm_surface, s.symm_volume, tol["conservation"]))
    rows.append(Row("slayer-sweep", None, "sympl_relative_spread",
                    report.relative_spread("sympl"), 0.0,
                    tol["conservation"]))
    return rows


def _run_perturb_verify(cfg: ExperimentConfig) -> list:
    tol = cfg.tolerances["family"]
    hier = build_hierarchy(cfg.u, cfg.v, cfg.order, cfg.greens, cfg.params,
                           cfg.window)
    omega = past_region(cfg.window, 0)
    rows = []
    for m in range(1, cfg.order + 1):
        for q in range(1, m + 1):
            fam = family_taylor_I(hier, omega, m, q)
            orc = taylor_oracle_I(hier, omega, m, q)
            rows.append(Row("perturb-verify", None,
                            f"family[m={m},p={q}]", fam, 0.0, tol))
            rows.append(Row("perturb-verify", None,
                            f"oracle[m={m},p={q}]", orc, 0.0, tol))
            rows.append(Row("perturb-verify", None,
                            f"cross[m={m},p={q}]", fam, orc, tol))
    return rows


def _run_greens_dependence(cfg: ExperimentConfig) -> list:
    """Second-order dependence on the Green's choice, one row per kernel.

    The rank-one directions ride the future-decay scalar root, whose
    windowed first-order balance is the conserved boundary layer at the
    bottom frame; a wave direction would shift nothing. The amplitude is
    sized so the bottom row has unit magnitude.
    """
    p, window = cfg.params, cfg.window
    rng = np.random.default_rng(cfg.seed)
    direction = scalar_solution(2.0 ** window.t_min, p, window,
                                decay="future")
    omega = past_region(window, 0)
    rows = []
    for k in range(cfg.modifiers):
        probe = DualJet(window, 0.05 * rng.standard_normal(window.shape),
                        0.05 * rng.standard_normal(window.shape))
        kernel = RankOneModifier(probe, direction)
        lhs, rhs = greens_dependence_check(cfg.u, cfg.v, omega, kernel, p,
                                           window, choices=cfg.greens)
        rows.append(Row("greens-dependence", None, f"identity[k={k}]",
                        lhs, rhs, cfg.tolerances["dependence"]))
    return rows


SUITES = {
    "check-el": _run_check_el,
    "solve-linear": _run_solve_linear,
    "greens-verify": _run_greens_verify,
    "slayer-sweep": _run_slayer_sweep,
    "perturb-verify": _run_perturb_verify,
    "greens-dependence": _run_greens_dependence,
}

SUITE_HELP = {
    "check-el": "field equation residuals and fiber nonnegativity",
    "solve-linear": "residuals of the configured solution jets",
    "greens-verify": "defining property of the Green's operators",
    "slayer-sweep": "surface-layer quantities over a range of cuts",
    "perturb-verify": "family derivatives against the series oracle",
    "greens-dependence": "second-order shift under a Green's kernel change",
}


def write_report(out_dir, suite: str, rows) -> dict:
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.suite,
                "" if r.slice_t is None else r.slice_t,
                r.quantity,
                repr(r.value),
                repr(r.reference),
                repr(r.residual),
                repr(r.tolerance),
                "true" if r.passed else "false",
            ])
    summary = {
        "suite": suite,
        "pass_count": sum(r.passed for r in rows),
        "fail_count": sum(not r.passed for r in rows),
        "max_residual": max(r.residual for r in rows),
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surflat",
        description="verification suites for the lattice surface-layer "
                    "model")
    sub = parser.add_subparsers(dest="suite", required=True)
    for name, help_text in SUITE_HELP.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=None,
                        help="JSON config file merged over the defaults")
        sp.add_argument("--out", default="report",
                        help="directory for report.csv and summary.json")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="set one config field, e.g. model.nu=18 or "
                             "jets.u.amplitude=0.1 (repeatable)")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for the randomized draws")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override, args.seed, args.suite)
        rows = SUITES[args.suite](cfg)
    except (ConfigError, InvalidJetError, RangeError, TruncationError,
            UnsupportedOrderError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    summary = write_report(args.out, args.suite, rows)
    print(f"{args.suite}: {summary['pass_count']} passed, "
          f"{summary['fail_count']} failed, "
          f"max residual {summary['max_residual']:.3e}")
    return 0 if summary["fail_count"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
