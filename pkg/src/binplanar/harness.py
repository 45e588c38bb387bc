"""Batch sweeps: measurement error, 1D chains, thresholds, sub-threshold α.

Everything here is a pure function of (config, master seed).  Each lattice or
chain shot derives its own RNG stream from (seed, experiment tag, point, L,
shot index), so results are independent of worker count and completion order.
Outputs are CSV tables plus a JSON sidecar capturing the config hash and the
calibration provenance; nothing timestamped, so reruns are byte-identical.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import multiprocessing
import os
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .chain import ChainConfig, run_chain
from .codes import Code
from .decoder import decode
from .lattice import ShotContext, build_lattice, run_shot
from .loss import NoiseParams
from .povm import build_povm, measurement_error_rate
from .qsi import bin_phase  # noqa: F401  (re-export convenience for scripts)

EXPERIMENTS = ("meas-error", "chain1d", "threshold", "alpha", "calibrate")
_BLOCK = 512  # shots between adaptive-stop checks


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    experiment: str
    seed: int = 0
    out: str = "results"
    workers: int = 1
    N: tuple = (2,)
    K: tuple = (2,)
    M: int = 3
    gamma: tuple = ()
    q_inj: tuple = ()
    L: tuple = (3, 5)
    povm: tuple = ("canonical",)
    qsi: str = "binning"
    decoder: tuple = ("unit",)
    mode: str = "fixed"          # fixed | adaptive
    shots: int = 10_000
    cap: int = 100_000
    rel_ci: float = 0.1
    calib_shots: int = 4_000
    calib_L: int = 5
    raw_text: str = ""

    def code(self) -> Code:
        return Code(self.N[0], self.K[0])


def _ints(s):  return tuple(int(x) for x in s.split())
def _floats(s): return tuple(float(x) for x in s.split())


def parse_config(path: str) -> RunConfig:
    """Read the documented INI schema into a RunConfig."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        text = fh.read()
    cp.read_string(text)
    run = cp["run"]
    exp = run.get("experiment", "").strip()
    if exp not in EXPERIMENTS:
        raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
    cfg = RunConfig(experiment=exp, raw_text=text)
    cfg.seed = run.getint("seed", 0)
    cfg.out = run.get("out", "results")
    if cp.has_section("code"):
        c = cp["code"]
        if "N" in c: cfg.N = _ints(c["N"])
        if "K" in c: cfg.K = _ints(c["K"])
    if cp.has_section("chain"):
        cfg.M = cp["chain"].getint("M", 3)
    if cp.has_section("grid"):
        g = cp["grid"]
        if "gamma" in g: cfg.gamma = _floats(g["gamma"])
        if "q_inj" in g: cfg.q_inj = _floats(g["q_inj"])
        if "L" in g: cfg.L = _ints(g["L"])
    if cp.has_section("measure"):
        m = cp["measure"]
        if "povm" in m: cfg.povm = tuple(m["povm"].split())
        if "qsi" in m: cfg.qsi = m["qsi"].strip()
        if "decoder" in m: cfg.decoder = tuple(m["decoder"].split())
    if cp.has_section("shots"):
        s = cp["shots"]
        cfg.mode = s.get("mode", "fixed").strip()
        cfg.shots = s.getint("shots", cfg.shots)
        cfg.cap = s.getint("cap", cfg.cap)
        cfg.rel_ci = s.getfloat("rel_ci", cfg.rel_ci)
        cfg.calib_shots = s.getint("calib_shots", cfg.calib_shots)
        cfg.calib_L = s.getint("calib_L", cfg.calib_L)
    if cfg.mode not in ("fixed", "adaptive"):
        raise ValueError(f"shots mode must be fixed or adaptive, got {cfg.mode!r}")
    return cfg


def config_hash(cfg: RunConfig) -> str:
    basis = cfg.raw_text or repr(sorted(
        (k, v) for k, v in vars(cfg).items() if k != "raw_text"))
    return hashlib.sha256(basis.encode()).hexdigest()[:16]


def shot_rng(seed: int, tag: str, point: int, L: int, shot: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one shot."""
    h = zlib.crc32(tag.encode())
    ss = np.random.SeedSequence(entropy=(seed, h, point, L, shot))
    return np.random.default_rng(ss)


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".10g")
    return x


def _write_sidecar(path: str, cfg: RunConfig, columns, extra=None) -> None:
    meta = {
        "version": __version__,
        "experiment": cfg.experiment,
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "columns": list(columns),
    }
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# calibration cache (text table: gamma N K povm qsi p_e shots)
# ---------------------------------------------------------------------------

CALIB_COLUMNS = ("gamma", "N", "K", "povm", "qsi", "p_e", "shots")


def read_calibration(path: str) -> dict:
    table = {}
    if not os.path.exists(path):
        return table
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            g, n, k, pv, qs, pe, sh = line.split()
            table[(round(float(g), 10), int(n), int(k), pv, qs)] = (
                float(pe), int(sh))
    return table


def write_calibration(path: str, table: dict) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(CALIB_COLUMNS) + "\n")
        for (g, n, k, pv, qs) in sorted(table):
            pe, sh = table[(g, n, k, pv, qs)]
            fh.write(f"{g:.10g} {n} {k} {pv} {qs} {pe:.10g} {sh}\n")


def calibrate_pe(code: Code, gamma: float, povm_kind: str, qsi: str,
                 shots: int, seed: int, L: int = 5) -> float:
    """Mean primal bit-flip rate, the hard-weight physical error rate p_e."""
    noise = NoiseParams(gamma, code.N)
    lat = build_lattice(L)
    povm = build_povm(povm_kind, code.n_max)
    ctx = ShotContext(lat, code, noise, povm, qsi)
    tag = f"calib:{code.N},{code.K},{povm_kind},{qsi},{gamma:.6g}"
    flips = 0
    for shot in range(shots):
        rng = shot_rng(seed, tag, 0, L, shot)
        out = run_shot(lat, code, noise, povm, qsi, rng, ctx=ctx)
        flips += int(out.flips.sum())
    return flips / (shots * lat.n_primal)


def get_pe(cfg: RunConfig, gamma: float, cache: dict, provenance: dict) -> float:
    key = (round(gamma, 10), cfg.N[0], cfg.K[0], cfg.povm[0], cfg.qsi)
    if key not in cache:
        pe = calibrate_pe(cfg.code(), gamma, cfg.povm[0], cfg.qsi,
                          cfg.calib_shots, cfg.seed, cfg.calib_L)
        cache[key] = (pe, cfg.calib_shots)
        provenance.setdefault("computed_inline", []).append(list(key))
    return cache[key][0]


# ---------------------------------------------------------------------------
# logical-error points
# ---------------------------------------------------------------------------

def run_lattice_point(cfg: RunConfig, gamma: float, L: int, point: int,
                      pe: float | None) -> dict:
    """Shots at one (γ, L), decoding each shot with every requested decoder."""
    code = cfg.code()
    noise = NoiseParams(gamma, code.N)
    lat = build_lattice(L)
    povm = build_povm(cfg.povm[0], code.n_max)
    ctx = ShotContext(lat, code, noise, povm, cfg.qsi)
    tag = f"{cfg.experiment}:{code.N},{code.K},{cfg.povm[0]},{cfg.qsi}"
    errs = {d: 0 for d in cfg.decoder}
    n = 0
    target = cfg.shots if cfg.mode == "fixed" else cfg.cap
    while n < target:
        block = min(_BLOCK, target - n)
        for shot in range(n, n + block):
            rng = shot_rng(cfg.seed, tag, point, L, shot)
            out = run_shot(lat, code, noise, povm, cfg.qsi, rng, ctx=ctx)
            for d in cfg.decoder:
                errs[d] += decode(out, lat, d, p_e=pe)
        n += block
        if cfg.mode == "adaptive" and n >= cfg.shots:
            p = max(e / n for e in errs.values())
            if p > 0 and 1.96 * math.sqrt(p * (1 - p) / n) < cfg.rel_ci * p:
                break
    return {"shots": n, "errors": dict(errs)}


def run_injected_point(cfg: RunConfig, q_inj: float, L: int, point: int) -> dict:
    """Projective reference: iid primal flips at rate q_inj, unit decoding."""
    lat = build_lattice(L)
    tag = f"{cfg.experiment}:projective"
    errs = {d: 0 for d in cfg.decoder}
    n = 0
    target = cfg.shots if cfg.mode == "fixed" else cfg.cap
    while n < target:
        block = min(_BLOCK, target - n)
        for shot in range(n, n + block):
            rng = shot_rng(cfg.seed, tag, point, L, shot)
            flips = rng.random(lat.n_primal) < q_inj
            out = run_shot(lat, None, None, None, "binning", None,
                           forced_flips=flips)
            for d in cfg.decoder:
                pe = min(max(q_inj, 1e-9), 0.499)
                errs[d] += decode(out, lat, d if d != "soft" else "unit",
                                  p_e=pe)
        n += block
        if cfg.mode == "adaptive" and n >= cfg.shots:
            p = max(e / n for e in errs.values())
            if p > 0 and 1.96 * math.sqrt(p * (1 - p) / n) < cfg.rel_ci * p:
                break
    return {"shots": n, "errors": dict(errs)}


def _point_task(args):
    cfg, g, L, point, pe, projective = args
    if projective:
        return run_injected_point(cfg, g, L, point)
    return run_lattice_point(cfg, g, L, point, pe)


def _run_points(cfg: RunConfig, tasks: list) -> list:
    """Run (γ, L) points, optionally across processes; order preserved."""
    if cfg.workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(min(cfg.workers, len(tasks))) as pool:
            return pool.map(_point_task, tasks)
    return [_point_task(t) for t in tasks]


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def estimate_threshold(curves: dict, n_boot: int = 400, seed: int = 0):
    """Crossing point of p_L(γ) curves for consecutive L.

    curves: {L: (gamma array, p array, shots array)}.  Returns
    (gamma_c, ci_lo, ci_hi, diagnostics); gamma_c is None when the curves
    never cross inside the grid (diagnostics say which pair failed).
    """
    Ls = sorted(curves)
    if len(Ls) < 2:
        raise ValueError("need at least two distances")
    for L in Ls:
        if len(curves[L][0]) < 4:
            raise ValueError("need at least four gamma points per distance")

    def crossings(ps):
        xs = []
        for L1, L2 in zip(Ls[:-1], Ls[1:]):
            g1 = np.asarray(curves[L1][0])
            d = np.asarray(ps[L2]) - np.asarray(ps[L1])
            found = None
            for i in range(len(g1) - 1):
                if d[i] <= 0 <= d[i + 1] and (d[i] != 0 or d[i + 1] != 0):
                    t = -d[i] / (d[i + 1] - d[i]) if d[i + 1] != d[i] else 0.5
                    found = g1[i] + t * (g1[i + 1] - g1[i])
                    break
            if found is None:
                return None
            xs.append(found)
        return float(np.mean(xs))

    base = {L: curves[L][1] for L in Ls}
    gc = crossings(base)
    if gc is None:
        diag = {L: list(map(float, curves[L][1])) for L in Ls}
        return None, None, None, {"reason": "no crossing in grid", "curves": diag}
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        ps = {}
        for L in Ls:
            g, p, sh = curves[L]
            p = np.asarray(p)
            sh = np.asarray(sh)
            ps[L] = rng.binomial(sh, np.clip(p, 0, 1)) / sh
        b = crossings(ps)
        if b is not None:
            boots.append(b)
    if len(boots) >= max(20, n_boot // 10):
        lo, hi = np.percentile(boots, [2.5, 97.5])
    else:
        lo = hi = gc
    return gc, float(lo), float(hi), {"n_boot_ok": len(boots)}


def fit_alpha(ds, p_Ls, stderrs=None):
    """Least-squares fit of log p_L = c − α·d.  Returns (α, stderr, r², n)."""
    ds = np.asarray(ds, dtype=float)
    p = np.asarray(p_Ls, dtype=float)
    keep = p > 0
    ds, p = ds[keep], p[keep]
    if len(ds) < 3:
        raise ValueError("fewer than three positive logical-error points")
    y = np.log(p)
    A = np.stack([np.ones_like(ds), -ds], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    alpha = float(coef[1])
    fitted = A @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(len(ds) - 2, 1)
    cov = ss_res / dof * np.linalg.inv(A.T @ A)
    return alpha, float(math.sqrt(cov[1, 1])), r2, int(len(ds))


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------

def run_meas_error(cfg: RunConfig) -> list:
    cols = ("experiment", "N", "K", "nbar", "povm", "qsi", "shots", "q", "stderr")
    rows = []
    point = 0
    for N in cfg.N:
        for K in cfg.K:
            code = Code(N, K)
            for pv in cfg.povm:
                povm = build_povm(pv, code.n_max)
                rng = shot_rng(cfg.seed, "meas-error", point, 0, 0)
                q, se = measurement_error_rate(code, povm, qsi=cfg.qsi,
                                               shots=cfg.shots, rng=rng)
                rows.append(("meas-error", N, K, code.nbar, pv, cfg.qsi,
                             cfg.shots, q, se))
                point += 1
    _emit(cfg, "meas_error", cols, rows)
    return rows


def run_chain1d(cfg: RunConfig) -> list:
    cols = ("gamma", "N", "K", "povm", "qsi", "shots", "fidelity", "stderr")
    code = cfg.code()
    rows = []
    point = 0
    qsis = cfg.qsi.split(",") if "," in cfg.qsi else [cfg.qsi]
    for pv in cfg.povm:
        for qs in qsis:
            for g in cfg.gamma:
                ccfg = ChainConfig(code, NoiseParams(g, code.N), pv, qs,
                                   shots=cfg.shots, M=cfg.M)
                # block-seeded for worker independence
                means, ns = [], []
                done = 0
                while done < cfg.shots:
                    blk = min(2048, cfg.shots - done)
                    rng = shot_rng(cfg.seed, "chain1d", point, 0, done)
                    sub = ChainConfig(code, ccfg.noise, pv, qs, shots=blk,
                                      M=cfg.M)
                    f, se = run_chain(sub, rng)
                    means.append((f, se, blk))
                    done += blk
                tot = sum(b for _, _, b in means)
                f = sum(fb * b for fb, _, b in means) / tot
                var = sum((sb ** 2) * b * b for _, sb, b in means) / tot ** 2
                rows.append((g, code.N, code.K, pv, qs, tot, f, math.sqrt(var)))
                point += 1
    _emit(cfg, "chain1d", cols, rows)
    return rows


def _threshold_points(cfg: RunConfig, calib_path: str):
    cols = ("experiment", "N", "K", "gamma", "L", "povm", "qsi", "decoder",
            "shots", "errors", "p_logical", "stderr", "p_e")
    rows = []
    cache = read_calibration(calib_path)
    prov: dict = {"file": os.path.basename(calib_path)}
    projective = cfg.qsi == "projective"
    grid = cfg.q_inj if projective else cfg.gamma
    if not grid:
        raise ValueError("threshold sweep needs a gamma (or q_inj) grid")
    if "soft" in cfg.decoder and not projective and cfg.qsi != "local-ml":
        raise ValueError("soft decoding needs qsi = local-ml")
    tasks, meta = [], []
    for point, g in enumerate(grid):
        pe = None
        if not projective and any(d in ("hard", "soft") for d in cfg.decoder):
            pe = get_pe(cfg, g, cache, prov)
        for L in cfg.L:
            tasks.append((cfg, g, L, point, pe, projective))
            meta.append((g, L, pe))
    for (g, L, pe), res in zip(meta, _run_points(cfg, tasks)):
        pe_row = g if projective else (pe if pe is not None else float("nan"))
        for d in cfg.decoder:
            e, n = res["errors"][d], res["shots"]
            p = e / n
            se = math.sqrt(max(p * (1 - p), 1e-12) / n)
            rows.append((cfg.experiment, cfg.N[0], cfg.K[0], g, L,
                         "projective" if projective else cfg.povm[0],
                         cfg.qsi, d, n, e, p, se, pe_row))
    write_calibration(calib_path, cache)
    return cols, rows, prov


def run_threshold(cfg: RunConfig) -> list:
    calib_path = os.path.join(cfg.out, "calibration.txt")
    cols, rows, prov = _threshold_points(cfg, calib_path)
    _emit(cfg, "threshold_points", cols, rows, extra={"calibration": prov})
    fit_cols = ("N", "K", "nbar", "povm", "qsi", "decoder", "gamma_c",
                "ci_lo", "ci_hi", "q")
    fits = []
    cache = read_calibration(calib_path)
    povm_name = "projective" if cfg.qsi == "projective" else cfg.povm[0]
    for d in cfg.decoder:
        curves = {}
        for L in cfg.L:
            sel = [r for r in rows if r[4] == L and r[7] == d]
            curves[L] = (np.array([r[3] for r in sel]),
                         np.array([r[10] for r in sel]),
                         np.array([r[8] for r in sel]))
        gc, lo, hi, diag = estimate_threshold(curves, seed=cfg.seed)
        if gc is None:
            fits.append((cfg.N[0], cfg.K[0], cfg.code().nbar, povm_name,
                         cfg.qsi, d, float("nan"), float("nan"), float("nan"),
                         float("nan")))
            print(f"threshold[{d}]: no crossing — {diag}")
            continue
        q_at = _interp_pe(cfg, gc, cache)
        fits.append((cfg.N[0], cfg.K[0], cfg.code().nbar, povm_name,
                     cfg.qsi, d, gc, lo, hi, q_at))
    _emit(cfg, "threshold_fits", fit_cols, fits)
    return fits


def _interp_pe(cfg: RunConfig, gamma_c: float, cache: dict) -> float:
    """Effective measurement error at the threshold, from the calibration table."""
    if cfg.qsi == "projective":
        return gamma_c
    pts = sorted((g, v[0]) for (g, n, k, pv, qs), v in cache.items()
                 if (n, k, pv, qs) == (cfg.N[0], cfg.K[0], cfg.povm[0], cfg.qsi))
    if not pts:
        return float("nan")
    gs = np.array([p[0] for p in pts])
    qs = np.array([p[1] for p in pts])
    return float(np.interp(gamma_c, gs, qs))


def run_alpha(cfg: RunConfig) -> list:
    calib_path = os.path.join(cfg.out, "calibration.txt")
    cols, rows, prov = _threshold_points(cfg, calib_path)
    _emit(cfg, "alpha_points", cols, rows, extra={"calibration": prov})
    fit_cols = ("N", "K", "povm", "qsi", "decoder", "gamma", "alpha",
                "stderr", "r2", "n_points")
    fits = []
    for d in cfg.decoder:
        for g in (cfg.q_inj if cfg.qsi == "projective" else cfg.gamma):
            sel = [r for r in rows if r[3] == g and r[7] == d]
            try:
                a, se, r2, npts = fit_alpha([r[4] for r in sel],
                                            [r[10] for r in sel])
            except ValueError as exc:
                print(f"alpha[{d}, gamma={g}]: {exc}")
                continue
            fits.append((cfg.N[0], cfg.K[0], cfg.povm[0], cfg.qsi, d, g,
                         a, se, r2, npts))
    _emit(cfg, "alpha_fits", fit_cols, fits)
    return fits


def run_calibrate(cfg: RunConfig) -> list:
    calib_path = os.path.join(cfg.out, "calibration.txt")
    cache = read_calibration(calib_path)
    for g in cfg.gamma:
        key = (round(g, 10), cfg.N[0], cfg.K[0], cfg.povm[0], cfg.qsi)
        pe = calibrate_pe(cfg.code(), g, cfg.povm[0], cfg.qsi,
                          cfg.calib_shots, cfg.seed, cfg.calib_L)
        cache[key] = (pe, cfg.calib_shots)
    write_calibration(calib_path, cache)
    return sorted(cache.items())


def _emit(cfg: RunConfig, name: str, cols, rows, extra=None) -> None:
    os.makedirs(cfg.out, exist_ok=True)
    base = os.path.join(cfg.out, name)
    _write_csv(base + ".csv", cols, rows)
    _write_sidecar(base + ".meta.json", cfg, cols, extra)


def run_sweep(cfg: RunConfig) -> int:
    """Dispatch an experiment; returns a process exit code (0 = clean)."""
    os.makedirs(cfg.out, exist_ok=True)
    try:
        if cfg.experiment == "meas-error":
            run_meas_error(cfg)
        elif cfg.experiment == "chain1d":
            run_chain1d(cfg)
        elif cfg.experiment == "threshold":
            run_threshold(cfg)
        elif cfg.experiment == "alpha":
            run_alpha(cfg)
        elif cfg.experiment == "calibrate":
            run_calibrate(cfg)
        else:
            raise ValueError(f"unknown experiment {cfg.experiment!r}")
    except Exception as exc:  # aborted point ⇒ nonzero exit
        print(f"aborted: {exc}")
        return 1
    return 0
