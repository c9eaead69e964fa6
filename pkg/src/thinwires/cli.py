"""Command line entry point.

Every task reads an optional config file (INI sections or JSON), writes its
tables to ``--out`` together with ``manifest.json`` and ``summary.txt`` and
exits with 0 when all checks pass, 1 when a check fails and 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import platform
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import _kernels
from . import cell2d, cell3d, classify as cl, mesh_fem as mf, scatter as sc
from . import tolerances
from .config import TASKS, Config, ConfigError
from .geometry import make_wire

log = logging.getLogger("thinwires")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Outcome:
    files: dict[str, str] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    checks: list[tuple[str, bool]] = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok)))
        self.lines.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(v)
    return v


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


# ---------------------------------------------------------------------------
# config helpers
# ---------------------------------------------------------------------------


def _wire(cfg: Config, default_r=0.05):
    z0 = cfg.floats("wire", "z0", [0.5, 0.5])
    if len(z0) != 2:
        raise ConfigError("[wire] z0: expected two coordinates")
    log_r = cfg.float("wire", "log_r", None)
    r = None if log_r is not None else cfg.float("wire", "r", default_r)
    try:
        return make_wire(z0, r, cfg.float("wire", "R", 0.25), cfg.gaps("wire", "gaps"), log_r=log_r)
    except ValueError as exc:
        raise ConfigError(f"[wire] {exc}") from None


def _mesh_params(cfg: Config, tol):
    return (cfg.float("mesh", "h", cell2d.DEFAULT_H), cfg.float("mesh", "grading", cell2d.DEFAULT_GRADING),
            cfg.int("mesh", "refine", tol.refine))


def _law(cfg: Config, section="law"):
    sec = dict(cfg.section(section))
    if not sec:
        sec = {"radius": "power", "a": 1.0, "p": 1.0, "name": "r=eta"}
    if "z0" in sec and isinstance(sec["z0"], str):
        sec["z0"] = [float(t) for t in sec["z0"].split(",")]
    try:
        return cl.RegimeLaw.from_dict(sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def task_cell2d_solve(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    spec = _wire(cfg)
    h, grading, refine = _mesh_params(cfg, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = cell2d.solve_v_r(spec, h, grading, refine=refine)
    psi = cell2d.assemble_psi_r(v, spec, continuity_tol=tol.continuity)
    phi = cell2d.solve_phi_ortho(spec, h, grading, refine=refine)
    q = mf.mesh_quality(v.mesh)
    exact = math.log(spec.R / spec.r) / (2 * math.pi)
    rm = mf.ring_mean(v, spec.r)
    rec = {
        "wire": spec.to_dict(),
        "mesh": q,
        "ring_mean_hole": rm,
        "ring_mean_hole_exact": exact,
        "ring_mean_guard": mf.ring_mean(v, spec.R),
        "energy": psi.outside_l2_sq,
        "psi": {k: getattr(psi, k) for k in ("outside_l2_sq", "outside_mismatch_sq", "inside_l2_sq",
                                            "inside_mismatch_sq", "curl_inside_sq", "curl_outside_residual",
                                            "continuity_error", "top_value_error", "bottom_value_error")},
        "phi": {k: getattr(phi, k) for k in ("mismatch_sq", "curl_residual", "top_value_error", "bottom_value_error")},
    }
    if spec.log_r <= 2 * math.log(spec.R):
        pc = cell2d.eval_phi_crit(spec)
        rec["phi_crit"] = {"energy": pc.energy(), "mismatch_sq": pc.mismatch_sq()}
    out.files["cell2d.json"] = _json(rec)
    buf = io.StringIO()
    mf.export_mesh(v.mesh, buf, {"v": v, "psi": psi.outside})
    out.files["mesh.txt"] = buf.getvalue()
    out.check("guard ring mean is zero", abs(rec["ring_mean_guard"]) < 1e-8, f"{rec['ring_mean_guard']:.2e}")
    out.check("hole ring mean", abs(rm - exact) <= tol.fem_relative * exact, f"{rm:.6f} vs {exact:.6f}")
    out.check("curl of psi outside the hole", psi.curl_outside_residual < tol.curl_residual,
              f"{psi.curl_outside_residual:.2e}")
    out.check("phi boundary values", max(phi.top_value_error, phi.bottom_value_error) < tol.curl_residual)
    out.check("mesh minimum angle above 20 degrees", q["min_angle"] > 20.0, f"{q['min_angle']:.2f}")
    return out


def task_verify_estimates(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    exps = cfg.exponent_range("ladder", "r_exponents", "4..9")
    R = cfg.float("wire", "R", 0.25)
    h, grading, refine = _mesh_params(cfg, tol)
    radii = [2.0**-k for k in exps]
    rows = cell2d.energy_ladder(radii, R, h=h, grading=grading, refine=refine, jobs=jobs)
    half = rows[len(rows) // 2:]  # largest radii
    C1 = max(r.energy / abs(math.log(r.r)) for r in half)
    fit = cell2d.fit_energy_constant(rows)
    table = []
    for r in rows:
        table.append([r.r, r.energy, r.energy / (C1 * abs(math.log(r.r))), r.ring_mean, r.ring_mean_exact, r.flux])
    out.files["estimates.csv"] = _csv(["r", "energy", "bound_ratio", "ring_mean", "ring_mean_exact", "flux"], table)
    slope_err = abs(fit["slope"] * 2 * math.pi - 1.0)
    u = cell2d.URField((0.5, 0.5), 0.1)
    fem = u.fem_norms()
    pc = cell2d.PhiCrit2D((0.5, 0.5), 2 * math.log(R), R)
    out.files["estimates.json"] = _json({"fit": fit, "C1_from_largest_radii": C1, "u_r_fem": fem,
                                         "phi_crit_energy": pc.energy(), "phi_crit_quadrature": pc.energy_quadrature()})
    worst = max(r.ring_mean_error for r in rows)
    out.check("ring mean at the hole", worst <= tol.fem_relative, f"worst relative error {worst:.2e}")
    out.check("energy slope against ln(1/r)", slope_err <= tol.slope_relative,
              f"slope {fit['slope']:.5f}, relative deviation {slope_err:.3f}")
    out.check("energy bound with one constant", all(t[2] <= 1.0 + 1e-12 for t in table), f"C1 = {C1:.5f}")
    en = [r.energy for r in rows]  # sorted by increasing r
    out.check("energy nonincreasing in r", all(a >= b for a, b in zip(en, en[1:])))
    c2, c3 = 1 / (8 * math.pi), 1 / (math.pi * 0.01)
    out.check("hole potential constants (closed form)",
              abs(u.grad_norm_sq() / c2 - 1) <= tol.exact and abs(u.laplacian_norm_sq() / c3 - 1) <= tol.exact)
    out.check("hole potential constants (FEM quadrature)",
              abs(fem["grad_norm_sq"] / c2 - 1) <= tol.fem_relative
              and abs(fem["laplacian_norm_sq"] / c3 - 1) <= tol.fem_relative)
    out.check("critical profile energy quadrature", abs(pc.energy_quadrature() / pc.energy() - 1) <= tol.quadrature)
    return out


def _psi_cell(args):
    law, eta, h, grading, refine = args
    spec = law.wire(eta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = cell2d.solve_v_r(spec, h, grading, refine=refine)
    return cell3d.assemble_psi3(cell2d.assemble_psi_r(v, spec, continuity_tol=1.0))


def _nonincreasing(vals, rel=1e-12):
    return all(b <= a * (1 + rel) + 1e-300 for a, b in zip(vals, vals[1:]))


def task_defect_ladder(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    law = _law(cfg)
    kinds = cfg.words("defects", "kinds", ["psi"])
    etas = [2.0**-k for k in cfg.exponent_range("ladder", "eta_exponents", "3..8")]
    h, grading, refine = _mesh_params(cfg, tol)
    rows = []
    for kind in kinds:
        if kind == "psi":
            tasks = [(law, e, h, grading, refine) for e in etas]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as ex:
                    cfs = list(ex.map(_psi_cell, tasks))
            else:
                cfs = [_psi_cell(t) for t in tasks]
        elif kind == "phi_ortho":
            cfs = [cell3d.assemble_phi3_ortho(cell2d.solve_phi_ortho(law.wire(e), h, grading, refine=refine),
                                              law.wire(e)) for e in etas]
        elif kind == "phi_crit":
            cfs = [cell3d.assemble_phi3_crit(cell2d.eval_phi_crit(law.wire(e)), law.wire(e)) for e in etas]
        elif kind == "trivial":
            cfs = [cell3d.trivial_e3() for _ in etas]
        else:
            raise ConfigError(f"[defects] kinds: unknown kind {kind!r}")
        pairs = [cell3d.defect_pair(cf, e) for cf, e in zip(cfs, etas)]
        for p in pairs:
            rows.append([p.eta, p.a, p.b, p.kind, p.r, p.gap])
        a = [p.a for p in pairs]
        b = [p.b for p in pairs]
        ok = _nonincreasing(a) and _nonincreasing(b) and a[-1] < tol.defect_threshold and b[-1] < tol.defect_threshold
        out.check(f"{kind} defects decrease below {tol.defect_threshold}", ok, f"final a={a[-1]:.4g}, b={b[-1]:.4g}")
    rows.sort(key=lambda r: (r[3], -r[0]))
    out.files["defects.csv"] = _csv(["eta", "a", "b", "kind", "r", "gap"], rows)
    return out


def task_classify(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    records = []
    if (cfg.str("classify", "suite", "") or "").lower() == "standard":
        for law, expected in cl.standard_suite():
            rec = cl.classify(law)
            rec["expected"] = expected.value
            records.append(rec)
            out.check(f"{law.name}: {rec['kind']}", rec["kind"] == expected.value, f"expected {expected.value}")
        out.files["classify.json"] = _json(records)
    else:
        law = _law(cfg)
        rec = cl.classify(law)
        out.files["classify.json"] = _json(rec)
        out.lines.append(f"kind: {rec['kind']}")
        out.lines.append(f"certificate: {rec['certificate']}")
        expected = cfg.str("classify", "expect", None)
        if expected:
            out.check("expected kind", rec["kind"] == expected, f"got {rec['kind']}, expected {expected}")
    return out


def _media(cfg):
    try:
        return sc.MediaPair(cfg.complex("media", "eps_minus", 1), cfg.complex("media", "eps_plus", 1),
                            cfg.complex("media", "mu_minus", 1), cfg.complex("media", "mu_plus", 1),
                            cfg.float("media", "omega", 1.0))
    except ValueError as exc:
        raise ConfigError(f"[media] {exc}") from None


def _incidence(cfg):
    try:
        return sc.Incidence(cfg.complex("incidence", "A1", 1), cfg.complex("incidence", "A2", 0),
                            cfg.float("incidence", "theta", 0.0), cfg.str("incidence", "plane", "normal"))
    except ValueError as exc:
        raise ConfigError(f"[incidence] {exc}") from None


def _c(z):
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+.17g}j"


SCATTER_HEADER = ["kind", "theta", "plane", "eps_minus", "eps_plus", "mu_minus", "mu_plus",
                  "r1_re", "r1_im", "r2_re", "r2_im", "t1_re", "t1_im", "t2_re", "t2_im", "balance1", "balance2"]


def _scatter_row(kind, inc, media, res):
    return [kind, inc.theta, inc.plane, _c(media.eps_minus), _c(media.eps_plus), _c(media.mu_minus),
            _c(media.mu_plus), res.R[0, 0].real, res.R[0, 0].imag, res.R[1, 1].real, res.R[1, 1].imag,
            res.T[0, 0].real, res.T[0, 0].imag, res.T[1, 1].real, res.T[1, 1].imag, res.balance[0], res.balance[1]]


def task_scatter(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    media, inc = _media(cfg), _incidence(cfg)
    kinds = cfg.words("scatter", "kinds", ["Reflecting", "Inactive", "PolarizingE1", "PolarizingE2"])
    samples = cfg.int("scatter", "samples", 201)
    rows = []
    for kind in kinds:
        try:
            res = sc.scattering_matrices(media, inc, kind)
        except ValueError as exc:
            raise ConfigError(f"[scatter] {exc}") from None
        rows.append(_scatter_row(kind, inc, media, res))
        prof = sc.field_profile(res, media, inc, samples)
        out.files[f"profile_{kind}.csv"] = _csv(sc.PROFILE_COLUMNS, prof.tolist())
        if media.lossless:
            dev = float(np.max(np.abs(res.balance - 1.0)))
            out.check(f"{kind} power balance", dev <= tol.power_balance, f"deviation {dev:.1e}")
        else:
            out.check(f"{kind} power balance at most one (lossy)", bool(np.all(res.balance <= 1 + tol.power_balance)))
    out.files["scatter.csv"] = _csv(SCATTER_HEADER, rows)
    return out


def task_sweep(cfg: Config, tol, jobs: int, seed: int) -> Outcome:
    out = Outcome()
    count = cfg.int("sweep", "count", 100)
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for _ in range(count):
        media = sc.MediaPair(rng.uniform(1, 10), rng.uniform(1, 10), rng.uniform(0.5, 3), rng.uniform(0.5, 3),
                             rng.uniform(0.5, 5))
        plane = str(rng.choice(["e1e3", "e2e3"]))
        inc = sc.Incidence(theta=float(rng.uniform(0, 85)), plane=plane)
        for kind in ("Reflecting", "Inactive", "PolarizingE1", "PolarizingE2"):
            res = sc.scattering_matrices(media, inc, kind)
            worst = max(worst, float(np.max(np.abs(res.balance - 1))))
            rows.append(_scatter_row(kind, inc, media, res))
    out.files["sweep_scatter.csv"] = _csv(SCATTER_HEADER, rows)
    out.check("power balance over random media", worst <= tol.power_balance, f"worst deviation {worst:.1e}")
    mono = []
    violations = 0
    done = 0
    while done < count:
        a, b = cl.random_ordered_pair(rng)
        try:
            chk = cl.monotone_consistency(a, b)
        except ValueError:
            continue
        done += 1
        violations += not chk.consistent
        mono.append([json.dumps(a.to_dict(), sort_keys=True), json.dumps(b.to_dict(), sort_keys=True),
                     chk.verdict_a.e1.value, chk.verdict_a.e2.value, chk.verdict_b.e1.value, chk.verdict_b.e2.value,
                     int(chk.consistent)])
    out.files["sweep_monotone.csv"] = _csv(["law_a", "law_b", "a_e1", "a_e2", "b_e1", "b_e2", "consistent"], mono)
    out.check("monotonicity over random ordered law pairs", violations == 0, f"{violations} violations in {count}")
    return out


TASK_FUNCS = {
    "cell2d-solve": task_cell2d_solve,
    "verify-estimates": task_verify_estimates,
    "defect-ladder": task_defect_ladder,
    "classify": task_classify,
    "scatter": task_scatter,
    "sweep": task_sweep,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI or JSON experiment config")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for ladders")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    common.add_argument("--tolerance-profile", choices=sorted(tolerances.PROFILES), default="default")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="thinwires", parents=[common],
                                description="Cell problems, scaling checks and interface classification "
                                            "for periodic thin-wire arrays.")
    sub = p.add_subparsers(dest="task", metavar="TASK")
    helps = {
        "cell2d-solve": "solve the 2D generators for one wire and export the mesh",
        "verify-estimates": "radius ladder: ring means, energy slope and bound",
        "defect-ladder": "defect pairs along an eta ladder",
        "classify": "connectivity verdicts and interface kind for a law",
        "scatter": "plane-wave reflection and transmission",
        "sweep": "randomized power-balance and monotonicity sweeps",
    }
    for t in TASKS:
        sub.add_parser(t, parents=[common], help=helps[t], argument_default=argparse.SUPPRESS)
    return p


def run(task: str, cfg: Config, out_dir: Path, jobs: int = 1, seed: int = 0, profile: str = "default") -> int:
    tol = tolerances.get(profile)
    outcome = TASK_FUNCS[task](cfg, tol, max(1, jobs), seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(outcome.files):
        (out_dir / name).write_text(outcome.files[name], encoding="utf-8")
    manifest = {
        "task": task,
        "tool": "thinwires",
        "version": __version__,
        "config": cfg.echo(),
        "config_source": cfg.source,
        "seed": seed,
        "tolerance_profile": tol.as_dict(),
        "kernel_backend": _kernels.backend(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": sorted(outcome.files),
        "checks": [{"name": n, "passed": ok} for n, ok in outcome.checks],
    }
    (out_dir / "manifest.json").write_text(_json(manifest), encoding="utf-8")
    status = "PASS" if outcome.passed else "FAIL"
    summary = [f"task: {task}", f"tolerance profile: {profile}", *outcome.lines, f"overall: {status}"]
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print("\n".join(summary))
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = Config.load(args.config) if args.config else Config()
        task = args.task or cfg.str("run", "task", None)
        if task is None:
            parser.print_usage(sys.stderr)
            print("thinwires: error: no task given (use a subcommand or set task in the config)", file=sys.stderr)
            return EXIT_USAGE
        if task not in TASK_FUNCS:
            raise ConfigError(f"[run] task: unknown task {task!r}; choose from {', '.join(TASKS)}")
        return run(task, cfg, Path(args.out), args.jobs, args.seed, args.tolerance_profile)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"thinwires: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
