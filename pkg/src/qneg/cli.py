"""Command-line front end.

    qneg negativity --config run.json [--out FILE --format csv|json]
    qneg sweep      --config run.json --axis w|s [...]
    qneg verify     --suite filters|monotone|convexity|robustness|all [...]
    qneg export     --config run.json --out FILE [--domain alpha|beta]

Configs are JSON.  Every output record embeds the fully resolved settings
(including auto-resolved windows and filters) and carries no timestamps, so
identical config + version gives byte-identical files.  QNEG_THREADS caps
sweep parallelism.  Exit codes: 0 success, 2 validation/guard error, 1
internal error (and, for verify, any FAIL).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .channels import (
    ChannelSpec,
    Loss,
    PhaseShift,
    apply_channel,
    channel_from_dict,
    channel_to_dict,
    check_approx_monotonicity,
    check_convexity,
    check_weak_monotonicity,
)
from .engine import (
    DEFAULT_W_SCHEDULE,
    Converged,
    Diverging,
    negativity,
    resolve_grid,
    robustness_decomposition,
    sampled_char,
    filtered_quasiprob,
    sweep_s,
    sweep_w,
)
from .errors import GuardError, QnegError, ValidationError
from .filters import (
    FilterSpec,
    filter_from_dict,
    filter_negativity_delta,
    filter_to_dict,
    verify_filter_properties,
)
from .grid import GridSpec, dump_grid
from .states import (
    Coherent,
    Fock,
    PhotonAddedThermal,
    StateSpec,
    Thermal,
    char_evaluator,
    state_from_dict,
    state_to_dict,
)

CONVEXITY_SEED = 20260809


@dataclass
class RunConfig:
    state: StateSpec
    s: Optional[float]
    s_list: Optional[list]
    filt: "FilterSpec | str | None"      # FilterSpec, 'auto', or None
    w_schedule: tuple
    grid: Optional[GridSpec]             # None means auto
    channel: Optional[ChannelSpec]
    out_path: Optional[str]
    out_format: str


def _parse_grid(d, where: str) -> Optional[GridSpec]:
    if d is None or d == "auto":
        return None
    if not isinstance(d, dict) or "R" not in d or "N" not in d:
        raise ValidationError(f"{where}: expected 'auto' or an object with R and N")
    return GridSpec(half_extent=float(d["R"]), samples_per_axis=int(d["N"]))


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: top level must be an object")
    if "state" not in raw:
        raise ValidationError(f"{path}: missing required key 'state'")
    state = state_from_dict(raw["state"], "state")

    s = raw.get("s")
    if s is not None:
        s = float(s)
        if s > 1.0:
            raise ValidationError(f"{path}: key 's': must satisfy s <= 1, got {s}")
    s_list = raw.get("s_list")
    if s_list is not None:
        s_list = [float(x) for x in s_list]
        if any(x > 1.0 for x in s_list):
            raise ValidationError(f"{path}: key 's_list': every s must be <= 1")

    filt_raw = raw.get("filter")
    filt = "auto" if filt_raw == "auto" else filter_from_dict(filt_raw)

    schedule = tuple(float(w) for w in raw.get("w_schedule", DEFAULT_W_SCHEDULE))
    grid = _parse_grid(raw.get("grid", "auto"), "grid")
    channel = None
    if raw.get("channel") is not None:
        channel = channel_from_dict(raw["channel"], "channel")

    out = raw.get("output", {}) or {}
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError(f"{path}: output.format must be csv or json")
    return RunConfig(
        state=state,
        s=s,
        s_list=s_list,
        filt=filt,
        w_schedule=schedule,
        grid=grid,
        channel=channel,
        out_path=out.get("path"),
        out_format=fmt,
    )


def _resolve_filter(cfg: RunConfig, chi, s: float) -> Optional[FilterSpec]:
    if cfg.filt != "auto":
        return cfg.filt
    try:
        resolve_grid(chi, s, None)
        return None
    except GuardError:
        return FilterSpec("power_exp", 4.0, 0.21)


def _chi_of(cfg: RunConfig):
    chi = char_evaluator(cfg.state)
    if cfg.channel is not None:
        chi = apply_channel(cfg.channel, chi)
    return chi


def _resolved_config(cfg: RunConfig, filt, grid) -> dict:
    return {
        "version": __version__,
        "state": state_to_dict(cfg.state),
        "channel": None if cfg.channel is None else channel_to_dict(cfg.channel),
        "s": cfg.s,
        "s_list": cfg.s_list,
        "filter": filter_to_dict(filt) if not isinstance(filt, str) else filt,
        "w_schedule": list(cfg.w_schedule),
        "grid": None if grid is None else grid.to_dict(),
    }


def _write_json(record: dict, path: Optional[str]) -> None:
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)  # shortest round-trip decimal
    if v is None:
        return ""
    return v


def _write_csv(header_meta: dict, columns: list, rows: list, path: Optional[str]) -> None:
    def emit(fh) -> None:
        for k in sorted(header_meta):
            fh.write(f"# {k}={json.dumps(header_meta[k], sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])

    if path is None:
        emit(sys.stdout)
    else:
        with Path(path).open("w", newline="") as fh:
            emit(fh)


def cmd_negativity(cfg: RunConfig) -> int:
    if cfg.s is None:
        raise ValidationError("config needs 's' for the negativity command")
    chi = _chi_of(cfg)
    filt = _resolve_filter(cfg, chi, cfg.s)
    res = negativity(chi, cfg.s, filt, cfg.grid)
    record = {
        "config": _resolved_config(cfg, filt, res.grid),
        "result": res.to_dict(),
    }
    print(f"negativity[{res.label}, s={cfg.s:g}] = {res.value!r}")
    if cfg.out_format == "json":
        _write_json(record, cfg.out_path)
    else:
        d = res.diagnostics
        _write_csv(
            {"config": record["config"]},
            ["value", "s", "R", "N", "imag_residue", "boundary_ratio", "total_mass", "parseval_residual"],
            [[res.value, res.s, res.grid.half_extent, res.grid.samples_per_axis,
              d.imag_residue, d.boundary_ratio, d.total_mass, d.parseval_residual]],
            cfg.out_path,
        )
    return 0


def cmd_sweep(cfg: RunConfig, axis: str) -> int:
    chi = _chi_of(cfg)
    if axis == "w":
        if cfg.s is None:
            raise ValidationError("config needs 's' for a w-axis sweep")
        filt = cfg.filt
        if filt == "auto" or filt is None:
            filt = FilterSpec("power_exp", 1.0, 0.21)
        report = sweep_w(chi, cfg.s, filt, cfg.w_schedule, cfg.grid)
        verdict = report.verdict.kind
        print(f"w-sweep[{report.label}, s={cfg.s:g}]: verdict={verdict}")
        for e in report.entries:
            val = "failed" if e.result is None else repr(e.result.value)
            print(f"  w={e.w:<6g} N_neg={val}")
        record = {
            "config": _resolved_config(cfg, filt, cfg.grid),
            "report": report.to_dict(),
        }
        if cfg.out_format == "json":
            _write_json(record, cfg.out_path)
        else:
            rows = []
            for e in report.entries:
                v = None if e.result is None else e.result.value
                rows.append([
                    e.w,
                    v,
                    None if v is None else math.log(v + 1.0),
                    verdict,
                    e.error,
                    None if e.result is None else e.result.grid.half_extent,
                    None if e.result is None else e.result.grid.samples_per_axis,
                    None if e.result is None else e.result.diagnostics.total_mass,
                ])
            _write_csv(
                {"config": record["config"], "verdict": report.to_dict()["verdict"]},
                ["w", "negativity", "log_negativity_plus_1", "verdict", "error", "R", "N", "total_mass"],
                rows,
                cfg.out_path,
            )
        return 0

    if cfg.s_list is None:
        raise ValidationError("config needs 's_list' for an s-axis sweep")
    filt = None if isinstance(cfg.filt, str) else cfg.filt
    points = sweep_s(chi, cfg.s_list, filt, cfg.w_schedule, cfg.grid)
    print(f"s-sweep[{chi.label}]:")
    for p in points:
        est = "n/a" if p.estimate is None else repr(p.estimate)
        print(f"  s={p.s:<6g} N_s={est:<24} [{p.method}/{p.verdict}]")
    record = {
        "config": _resolved_config(cfg, filt, cfg.grid),
        "points": [p.to_dict() for p in points],
    }
    if cfg.out_format == "json":
        _write_json(record, cfg.out_path)
    else:
        rows = [
            [p.s, p.estimate,
             None if p.estimate is None else math.log(p.estimate + 1.0),
             p.verdict, p.method, p.detail]
            for p in points
        ]
        _write_csv(
            {"config": record["config"]},
            ["s", "negativity", "log_negativity_plus_1", "verdict", "method", "detail"],
            rows,
            cfg.out_path,
        )
    return 0


def cmd_export(cfg: RunConfig, domain: str, out: str) -> int:
    if cfg.s is None:
        raise ValidationError("config needs 's' for export")
    chi = _chi_of(cfg)
    filt = _resolve_filter(cfg, chi, cfg.s)
    if domain == "beta":
        grid_obj = sampled_char(chi, cfg.s, filt, cfg.grid)
    else:
        grid_obj = filtered_quasiprob(chi, cfg.s, filt, cfg.grid)
    dump_grid(grid_obj, out)
    print(
        f"wrote {domain}-domain grid "
        f"(N={grid_obj.spec.samples_per_axis}, R={grid_obj.spec.half_extent:g}) to {out}"
    )
    return 0


# --- verification suites ------------------------------------------------------


def _suite_filters(epsilon: float) -> list:
    rows = []
    filt = FilterSpec("power_exp", 1.0, epsilon)
    rep = verify_filter_properties(filt)
    for v in rep.verdicts:
        rows.append((f"power_exp(eps={epsilon:g}) {v.name}", v.passed, v.detail))

    fd = filter_negativity_delta(filt)
    rows.append(
        (
            f"error constant 2*delta(eps={epsilon:g})",
            0.0 <= 2 * fd.delta < 1.0,
            f"2*delta = {2 * fd.delta:.4f}",
        )
    )
    deltas = {}
    for w in (0.5, 1.0, 2.0):
        deltas[w] = filter_negativity_delta(filt.with_width(w)).delta
    spread = max(deltas.values()) - min(deltas.values())
    rows.append(
        (
            "delta scale invariance w in {0.5,1,2}",
            spread < 1e-4,
            f"spread = {spread:.2e}",
        )
    )
    ladder = [filter_negativity_delta(FilterSpec("power_exp", 1.0, e)).delta
              for e in (0.4, 0.21, 0.1, 0.05)]
    rows.append(
        (
            "delta nonincreasing as eps -> 0",
            all(a >= b - 1e-12 for a, b in zip(ladder, ladder[1:])),
            "deltas " + ", ".join(f"{d:.4f}" for d in ladder),
        )
    )
    gd = filter_negativity_delta(FilterSpec("gaussian", 1.0))
    rows.append(("gaussian delta ~ 0", abs(gd.delta) < 1e-6, f"delta = {gd.delta:.2e}"))

    grep = verify_filter_properties(FilterSpec("gaussian", math.sqrt(2.0) / math.pi))
    for v in grep.verdicts:
        if v.name == "bound_taming":
            # taming holds iff w^2 < 1/pi^2 under the square-root split
            predicted = (math.sqrt(2.0) / math.pi) ** 2 < 1.0 / math.pi**2
            rows.append(
                (
                    "gaussian(w=sqrt(2)/pi) bound_taming matches theory",
                    v.passed == predicted,
                    f"verdict={v.passed}, predicted={predicted}: {v.detail}",
                )
            )
        else:
            rows.append((f"gaussian(w=sqrt(2)/pi) {v.name}", v.passed, v.detail))
    return rows


def _suite_monotone(epsilon: float) -> list:
    rows = []
    for state, s, filt in (
        (Fock(1), 0.0, None),
        (Fock(2), 0.0, None),
        (PhotonAddedThermal(2.0), 1.0, None),
    ):
        for eta in (0.9, 0.6, 0.3):
            rep = check_weak_monotonicity(state, Loss(eta), s, filt)
            name = f"weak monotonicity {state} loss(eta={eta:g}) s={s:g}"
            if rep.skipped:
                rows.append((name, None, rep.detail))
            else:
                rows.append((name, rep.passed, f"margin = {rep.margin:+.5f}"))
    rep = check_weak_monotonicity(Fock(1), PhaseShift(0.77), 0.0)
    rows.append(
        (
            "phase shift leaves negativity unchanged",
            rep.margin is not None and abs(rep.margin) <= 1e-4,
            f"margin = {rep.margin:+.2e}",
        )
    )
    delta = filter_negativity_delta(FilterSpec("power_exp", 1.0, epsilon)).delta
    for state in (Fock(1), PhotonAddedThermal(2.0)):
        for w in (4.0, 8.0):
            rep = check_approx_monotonicity(state, Loss(0.6), epsilon, w, delta=delta)
            name = f"approx monotone bound {state} loss(eta=0.6) w={w:g}"
            if rep.skipped:
                rows.append((name, None, rep.detail))
            else:
                rows.append((name, rep.passed, f"slack = {rep.slack:+.5f}"))
    return rows


def _suite_convexity(epsilon: float) -> list:
    rng = np.random.default_rng(CONVEXITY_SEED)
    catalog = [
        Fock(1),
        Fock(2),
        Fock(3),
        Thermal(1.0),
        Coherent(1.0 + 0.0j),
        PhotonAddedThermal(2.0),
    ]
    rows = []
    for s, filt, count in (
        (0.0, None, 10),
        (1.0, FilterSpec("power_exp", 8.0, epsilon), 10),
    ):
        for i in range(count):
            ia, ib = rng.choice(len(catalog), size=2, replace=False)
            p = float(rng.uniform(0.1, 0.9))
            comps = [(p, catalog[ia]), (1.0 - p, catalog[ib])]
            rep = check_convexity(comps, s, filt)
            rows.append(
                (
                    f"convexity s={s:g} case {i}: {p:.3f}*{catalog[ia]} + {1-p:.3f}*{catalog[ib]}",
                    rep.passed,
                    f"margin = {rep.margin:+.5f}",
                )
            )
    return rows


def _suite_robustness(epsilon: float) -> list:
    rows = []
    spat = PhotonAddedThermal(2.0)
    dec = robustness_decomposition(spat, FilterSpec("power_exp", 8.0, epsilon))
    base = negativity(spat, 1.0, None).value
    sigma_mass = float(dec.sigma_grid.values.real.sum() * dec.sigma_grid.spec.spacing**2)
    rows.append(
        (
            "robustness: erased mixture nonnegative (spat)",
            dec.mixture_negativity < 1e-8,
            f"mixture negativity = {dec.mixture_negativity:.2e}",
        )
    )
    rows.append(
        (
            "robustness: sigma normalized (spat)",
            abs(sigma_mass - 1.0) < 1e-4,
            f"sigma mass = {sigma_mass!r}",
        )
    )
    rows.append(
        (
            "robustness: r_w near the negativity (spat)",
            abs(dec.r_w - base) <= 0.05 * base,
            f"r_w = {dec.r_w:.5f} vs N = {base:.5f}",
        )
    )
    dec2 = robustness_decomposition(Fock(1), None, s=0.0)
    rows.append(
        (
            "robustness on the order-0 grid (fock 1)",
            dec2.mixture_negativity < 1e-8 and abs(dec2.r_w - 0.2131) < 5e-3,
            f"r_w = {dec2.r_w:.5f}",
        )
    )
    try:
        robustness_decomposition(Thermal(1.0), FilterSpec("power_exp", 6.0, epsilon))
        rows.append(("robustness rejects classical state (thermal)", False, "no error raised"))
    except GuardError as exc:
        rows.append(
            (
                "robustness rejects classical state (thermal)",
                "classical" in str(exc),
                str(exc),
            )
        )
    return rows


def cmd_verify(suite: str, epsilon: float, out_path: Optional[str], fmt: str) -> int:
    suites = {
        "filters": _suite_filters,
        "monotone": _suite_monotone,
        "convexity": _suite_convexity,
        "robustness": _suite_robustness,
    }
    names = list(suites) if suite == "all" else [suite]
    rows = []
    for name in names:
        rows.extend((name, *r) for r in suites[name](epsilon))

    width = max(len(r[1]) for r in rows)
    n_fail = 0
    for _, name, passed, detail in rows:
        if passed is None:
            tag = "SKIP"
        elif passed:
            tag = "PASS"
        else:
            tag = "FAIL"
            n_fail += 1
        print(f"{tag}  {name:<{width}}  {detail}")
    print(f"{len(rows)} checks, {n_fail} failures")

    record = {
        "version": __version__,
        "suite": suite,
        "epsilon": epsilon,
        "checks": [
            {"suite": s, "name": n, "status": "skip" if p is None else ("pass" if p else "fail"), "detail": d}
            for s, n, p, d in rows
        ],
        "failures": n_fail,
    }
    if out_path is not None:
        if fmt == "json":
            _write_json(record, out_path)
        else:
            _write_csv(
                {"version": __version__, "suite": suite, "epsilon": epsilon},
                ["suite", "name", "status", "detail"],
                [[s, n, "skip" if p is None else ("pass" if p else "fail"), d] for s, n, p, d in rows],
                out_path,
            )
    return 1 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qneg",
        description="Negativity-based nonclassicality measures of single-mode states.",
    )
    parser.add_argument("--version", action="version", version=f"qneg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_neg = sub.add_parser("negativity", help="one negative-volume computation")
    p_neg.add_argument("--config", required=True)
    p_neg.add_argument("--out")
    p_neg.add_argument("--format", choices=("csv", "json"))

    p_sweep = sub.add_parser("sweep", help="filter-width or order-parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", choices=("w", "s"), required=True)
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--format", choices=("csv", "json"))

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument(
        "--suite",
        choices=("filters", "monotone", "convexity", "robustness", "all"),
        default="all",
    )
    p_verify.add_argument("--epsilon", type=float, default=0.21)
    p_verify.add_argument("--out")
    p_verify.add_argument("--format", choices=("csv", "json"), default="json")

    p_export = sub.add_parser("export", help="dump a sampled grid as binary")
    p_export.add_argument("--config", required=True)
    p_export.add_argument("--out", required=True)
    p_export.add_argument("--domain", choices=("alpha", "beta"), default="alpha")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.epsilon, args.out, args.format)
        cfg = load_config(args.config)
        if getattr(args, "out", None):
            cfg.out_path = args.out
        if getattr(args, "format", None):
            cfg.out_format = args.format
        if args.command == "negativity":
            return cmd_negativity(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.axis)
        if args.command == "export":
            return cmd_export(cfg, args.domain, args.out)
        raise RuntimeError(f"unhandled command {args.command}")
    except (ValidationError, GuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QnegError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
