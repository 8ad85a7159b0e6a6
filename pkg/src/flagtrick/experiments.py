"""Seeded experiment pipelines behind the command-line interface.

A run grid is (seed) x (per-level Grassmann problem + one flag problem);
every run is a pure function of the resolved config and its seed. Results
land in an output directory as CSV tables, solver traces, bases and a
hand-written SVG scatter.
"""

import concurrent.futures
import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np
from sklearn.model_selection import train_test_split

from . import datagen
from .descent import DescentConfig, OptTrace, save_trace, steepest_descent
from .ensemble import (cross_entropy, ensemble_predict, knn_predict_proba,
                       optimal_soft_voting, project_levels)
from .errors import InvalidInput
from .flag import FlagPoint, FlagSignature, random_uniform, save_flag
from .numerics import principal_angles, sym_eig
from .objectives import (Dataset, DipProblem, SscProblem, build_lda_matrices,
                         center, dip_mmd_objective, lad_residuals,
                         nested_pca_objective, rsr_lad_objective, ssc_objective,
                         trace_ratio_objective)
from .solvers import (FmfConfig, _pairwise_sq, build_laplacian, flag_itr, fmf,
                      spectral_cluster)

PROBLEMS = ("pca", "rsr", "trace-ratio", "ssc", "dip")
SOLVERS = ("sd", "fmf", "newton")
DEFAULT_CENTER = {"pca": "mean", "rsr": "median", "trace-ratio": "mean",
                  "ssc": "none", "dip": "none"}


@dataclass
class ExperimentConfig:
    problem: str
    signature: tuple
    data: str
    solver: str = "sd"
    seeds: tuple = (0,)
    out: str = "out"
    beta: float = 0.1
    knn_k: int = 5
    jobs: int = 1
    center: str = None
    sigma: float = None
    target_data: str = None
    solver_config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise InvalidInput(f"unknown problem {self.problem!r}")
        if self.solver not in SOLVERS:
            raise InvalidInput(f"unknown solver {self.solver!r}")
        if self.solver == "fmf" and self.problem != "rsr":
            raise InvalidInput("fmf only solves the rsr problem")
        if self.solver == "newton" and self.problem != "trace-ratio":
            raise InvalidInput("newton only solves the trace-ratio problem")
        self.signature = tuple(int(x) for x in self.signature)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise InvalidInput("need at least one seed")
        if self.jobs < 1:
            raise InvalidInput("jobs must be >= 1")
        if self.center not in (None, "none", "mean", "median"):
            raise InvalidInput(f"unknown centering mode {self.center!r}")
        FlagSignature(self.signature[-1] + 1, self.signature)  # dims sanity


# ---------------------------------------------------------------------------
# data sources


GENERATOR_DEFAULTS = {
    "haystack": {"n_in": 450, "n_out": 50, "seed": None},
    "subspace": {"p": 20, "q": 5, "n_in": 90, "n_out": 10, "spread": 8.0,
                 "tail": 0.02, "seed": None},
    "moons": {"n": 100, "noise": 0.08, "seed": None},
    "clusters": {"c": 5, "n_per": 30, "p": 10, "sep": 4.0, "seed": None},
}


def parse_data_spec(spec: str):
    """Split a --data argument into ('csv', path) or ('gen', name, params)."""
    if not spec.startswith("gen:"):
        return ("csv", spec)
    parts = spec.split(":", 2)
    name = parts[1]
    if name not in GENERATOR_DEFAULTS:
        raise InvalidInput(f"unknown generator {name!r}; "
                           f"choose from {sorted(GENERATOR_DEFAULTS)}")
    params = dict(GENERATOR_DEFAULTS[name])
    if len(parts) == 3 and parts[2]:
        for tok in parts[2].split(","):
            if "=" not in tok:
                raise InvalidInput(f"bad generator parameter {tok!r}")
            key, val = tok.split("=", 1)
            if key not in params:
                raise InvalidInput(f"unknown parameter {key!r} for {name}")
            params[key] = _coerce(val)
    return ("gen", name, params)


def _coerce(tok: str):
    try:
        return int(tok)
    except ValueError:
        try:
            return float(tok)
        except ValueError:
            return tok


def resolve_dataset(spec: str, seed: int) -> Dataset:
    """Load/generate the dataset for one run; generator seed defaults to the
    run seed unless the spec pins one."""
    parsed = parse_data_spec(spec)
    if parsed[0] == "csv":
        return datagen.load_csv(parsed[1])
    _, name, params = parsed
    params = dict(params)
    gseed = params.pop("seed")
    gseed = seed if gseed is None else int(gseed)
    if name == "haystack":
        return datagen.haystack_3d(n_in=params["n_in"], n_out=params["n_out"],
                                   seed=gseed)
    if name == "subspace":
        p, q = int(params["p"]), int(params["q"])
        if not 1 <= q < p:
            raise InvalidInput("subspace generator needs 1 <= q < p")
        head = 5.0 / np.arange(1, q + 1) ** 2
        variances = np.concatenate([head, np.full(p - q, float(params["tail"]))])
        cfg = datagen.HaystackConfig(
            p=p, q=p, n_in=params["n_in"], n_out=params["n_out"],
            inlier_cov=np.diag(variances),
            outlier_cov=float(params["spread"]) * np.eye(p))
        return datagen.haystack(cfg, gseed)
    if name == "moons":
        return datagen.two_moons_3d(n=params["n"], noise=params["noise"], seed=gseed)
    if name == "clusters":
        c, p = int(params["c"]), int(params["p"])
        rng = np.random.default_rng(gseed)
        means = float(params["sep"]) * rng.standard_normal((c, p)) / np.sqrt(p)
        return datagen.gaussian_clusters(means, np.eye(p), int(params["n_per"]),
                                         seed=gseed + 1)
    raise InvalidInput(f"unknown generator {name!r}")


# ---------------------------------------------------------------------------
# problem contexts


@dataclass
class ProblemContext:
    """Everything a solver needs for one seed's dataset, in solver space."""

    kind: str
    ambient: int
    data: Dataset
    objective_for: object            # sig -> Objective
    ev_mat: np.ndarray               # PSD reference for explained variance
    scatter: object                  # point -> (2 x n coords, groups)
    problem: object = None           # structured problem for fmf/newton paths
    reduction: np.ndarray = None     # PCA pre-reduction basis when applied


def build_context(cfg: ExperimentConfig, data: Dataset) -> ProblemContext:
    mode = cfg.center or DEFAULT_CENTER[cfg.problem]
    if mode != "none":
        data = center(data, mode)
    x = data.samples
    groups = data.labels if data.labels is not None else (
        data.outlier_mask.astype(int) if data.outlier_mask is not None else None)

    def coords_from_projection(point):
        b = point.basis[:, :min(2, point.basis.shape[1])]
        pts = b.T @ x
        return pts, groups

    if cfg.problem == "pca":
        return ProblemContext(
            kind="pca", ambient=x.shape[0], data=data,
            objective_for=lambda sig: nested_pca_objective(data, sig),
            ev_mat=x @ x.T, scatter=coords_from_projection)

    if cfg.problem == "rsr":
        return ProblemContext(
            kind="rsr", ambient=x.shape[0], data=data,
            objective_for=lambda sig: rsr_lad_objective(data, sig),
            ev_mat=x @ x.T, scatter=coords_from_projection)

    if cfg.problem == "trace-ratio":
        if data.labels is None:
            raise InvalidInput("trace-ratio needs labeled data")
        reduction = None
        n, p = data.n, data.p
        n_classes = int(data.labels.max()) + 1
        if n - n_classes < p:
            keep = n - n_classes
            if keep < cfg.signature[-1] + 1:
                raise InvalidInput("not enough samples for the requested signature")
            eig = sym_eig(x @ x.T)
            reduction = eig.vectors[:, :keep]
            data = Dataset(reduction.T @ x, labels=data.labels,
                           outlier_mask=data.outlier_mask)
            x = data.samples
        prob = build_lda_matrices(data)
        return ProblemContext(
            kind="trace-ratio", ambient=x.shape[0], data=data,
            objective_for=lambda sig: trace_ratio_objective(prob, sig),
            ev_mat=x @ x.T, scatter=coords_from_projection,
            problem=prob, reduction=reduction)

    if cfg.problem == "ssc":
        lap = build_laplacian(data)
        prob = SscProblem(lap, cfg.beta)

        def coords_from_rows(point):
            b = point.basis[:, :min(2, point.basis.shape[1])]
            return b.T, groups

        return ProblemContext(
            kind="ssc", ambient=data.n, data=data,
            objective_for=lambda sig: ssc_objective(prob, sig),
            ev_mat=x.T @ x, scatter=coords_from_rows, problem=prob)

    if cfg.problem == "dip":
        if cfg.target_data is not None:
            tgt = resolve_dataset(cfg.target_data, data.seed or 0)
            xs, xt = x, tgt.samples
        else:
            half = data.n // 2
            if half == 0:
                raise InvalidInput("dip needs at least two samples")
            xs, xt = x[:, :half], x[:, half:]
        sigma = cfg.sigma
        if sigma is None:
            both = np.hstack([xs, xt])
            iu = np.triu_indices(both.shape[1], k=1)
            sigma = float(np.median(np.sqrt(_pairwise_sq(both, both)[iu])))
        prob = DipProblem(xs, xt, sigma)
        return ProblemContext(
            kind="dip", ambient=x.shape[0], data=data,
            objective_for=lambda sig: dip_mmd_objective(prob, sig),
            ev_mat=x @ x.T, scatter=coords_from_projection, problem=prob)

    raise InvalidInput(f"unknown problem {cfg.problem!r}")


def solve_one(ctx: ProblemContext, sig: FlagSignature, solver: str, seed: int,
              overrides: dict):
    """Run one solver on one signature; returns (point, trace, seconds)."""
    t0 = time.perf_counter()
    if solver == "sd":
        obj = ctx.objective_for(sig)
        init = random_uniform(sig, seed)
        point, trace = steepest_descent(obj, init, DescentConfig(**overrides))
    elif solver == "fmf":
        point, trace = fmf(ctx.data, sig, FmfConfig(**overrides))
    elif solver == "newton":
        point, _, trace = flag_itr(ctx.problem, sig, **overrides)
    else:
        raise InvalidInput(f"unknown solver {solver!r}")
    return point, trace, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# compare


def run_compare(cfg: ExperimentConfig) -> dict:
    """Per-level Grassmann runs against one flag run, over all seeds.

    Writes angles.csv (consecutive-level subspace angles), explained
    variance, runs.csv, per-run traces and bases, and a scatter of the
    first succeeding seed. Returns a summary dict.
    """
    os.makedirs(cfg.out, exist_ok=True)
    os.makedirs(os.path.join(cfg.out, "traces"), exist_ok=True)
    os.makedirs(os.path.join(cfg.out, "bases"), exist_ok=True)
    _echo_config(cfg)

    # fail fast on config-level problems using the first seed
    first_ctx = build_context(cfg, resolve_dataset(cfg.data, cfg.seeds[0]))
    _signature_for(first_ctx, cfg)

    tasks = []
    contexts = {}
    for seed in cfg.seeds:
        ctx = (first_ctx if seed == cfg.seeds[0]
               else build_context(cfg, resolve_dataset(cfg.data, seed)))
        contexts[seed] = ctx
        sig = _signature_for(ctx, cfg)
        for qk in sig.dims:
            tasks.append((seed, f"gr_q{qk}", FlagSignature(ctx.ambient, (qk,))))
        tasks.append((seed, "flag", sig))

    results = _execute(tasks, contexts, cfg)

    run_rows = []
    angle_rows = []
    ev_rows = []
    n_ok = 0
    for seed in cfg.seeds:
        ctx = contexts[seed]
        sig = _signature_for(ctx, cfg)
        by_name = {}
        for (s, name, _), res in zip(tasks, results):
            if s == seed:
                by_name[name] = res
        for name, res in by_name.items():
            if isinstance(res, Exception):
                run_rows.append([seed, name, "failed", type(res).__name__, "",
                                 "", "", str(res)])
                continue
            point, trace, secs = res
            n_ok += 1
            run_rows.append([seed, name, "ok", trace.reason.value,
                             len(trace.objective) - 1,
                             f"{trace.objective[-1]:.12g}", f"{secs:.4f}", ""])
            save_trace(trace, os.path.join(cfg.out, "traces",
                                           f"trace_seed{seed}_{name}.csv"))
            save_flag(point, os.path.join(cfg.out, "bases",
                                          f"basis_seed{seed}_{name}.csv"))

        tr_ev = float(np.trace(ctx.ev_mat))
        flag_res = by_name.get("flag")
        flag_point = None if isinstance(flag_res, Exception) else flag_res[0]
        gr_points = {}
        for qk in sig.dims:
            res = by_name.get(f"gr_q{qk}")
            if not isinstance(res, Exception):
                gr_points[qk] = res[0]

        for idx, qk in enumerate(sig.dims):
            ev_gr = ev_fl = ""
            if qk in gr_points:
                ev_gr = f"{_explained(gr_points[qk].basis, ctx.ev_mat, tr_ev):.12g}"
            if flag_point is not None:
                ev_fl = f"{_explained(flag_point.basis[:, :qk], ctx.ev_mat, tr_ev):.12g}"
            ev_rows.append([seed, idx + 1, qk, ev_gr, ev_fl])
            if idx + 1 < len(sig.dims):
                qn = sig.dims[idx + 1]
                th_gr = th_fl = ""
                if qk in gr_points and qn in gr_points:
                    th_gr = f"{np.linalg.norm(principal_angles(gr_points[qk].basis, gr_points[qn].basis)):.12g}"
                if flag_point is not None:
                    th_fl = f"{np.linalg.norm(principal_angles(flag_point.basis[:, :qk], flag_point.basis[:, :qn])):.12g}"
                angle_rows.append([seed, idx + 1, qk, qn, th_gr, th_fl])

    _write_csv(os.path.join(cfg.out, "runs.csv"),
               ["seed", "run", "status", "reason", "iters", "final_objective",
                "duration_s", "error"], run_rows)
    _write_csv(os.path.join(cfg.out, "angles.csv"),
               ["seed", "k", "q_k", "q_k1", "theta_gr", "theta_fl"], angle_rows)
    _write_csv(os.path.join(cfg.out, "explained_variance.csv"),
               ["seed", "k", "q_k", "ev_gr", "ev_fl"], ev_rows)

    for seed in cfg.seeds:
        res = None
        for (s, name, _), r in zip(tasks, results):
            if s == seed and name == "flag" and not isinstance(r, Exception):
                res = r
                break
        if res is not None:
            pts, groups = contexts[seed].scatter(res[0])
            scatter_svg(os.path.join(cfg.out, "scatter.svg"), pts, groups,
                        title=f"{cfg.problem} flag projection, seed {seed}")
            break

    for row in run_rows:
        status = "ok" if row[2] == "ok" else f"FAILED ({row[7]})"
        line = f"[seed {row[0]}] {row[1]}: {status}"
        if row[2] == "ok":
            line += f" obj={row[5]} iters={row[4]} {row[6]}s"
        print(line)
    return {"n_runs": len(run_rows), "n_success": n_ok, "out": cfg.out,
            "runs": run_rows}


def _signature_for(ctx: ProblemContext, cfg: ExperimentConfig) -> FlagSignature:
    return FlagSignature(ctx.ambient, cfg.signature)


def _explained(basis, ev_mat, tr_ev) -> float:
    return float(np.einsum("ij,ij->", basis, ev_mat @ basis) / tr_ev)


def _execute(tasks, contexts, cfg):
    def run(task):
        seed, name, sig = task
        try:
            return solve_one(contexts[seed], sig, cfg.solver, seed,
                             cfg.solver_config)
        except Exception as exc:  # recorded per-run, surfaced in runs.csv
            return exc

    if cfg.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(run, tasks))
    return [run(t) for t in tasks]


def _echo_config(cfg: ExperimentConfig) -> None:
    with open(os.path.join(cfg.out, "config.json"), "w") as fh:
        json.dump(asdict(cfg), fh, indent=2, default=str)


def _write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# ensemble


def run_ensemble(cfg: ExperimentConfig) -> dict:
    """Flag-level kNN ensemble against a single Grassmann model.

    Stratified 60/20/20 train/validation/test split per seed; soft-voting
    weights fit on validation; methods Gr, Fl, Fl-U, Fl-W reported as mean
    test cross-entropy. Writes levels.csv and methods.csv.
    """
    if cfg.problem not in ("pca", "rsr", "trace-ratio"):
        raise InvalidInput("ensemble mode needs a data-space problem "
                           "(pca, rsr or trace-ratio)")
    os.makedirs(cfg.out, exist_ok=True)
    _echo_config(cfg)

    level_rows = []
    method_ce = {m: [] for m in ("Gr", "Fl", "Fl-U", "Fl-W")}
    weight_hist = []
    d = len(cfg.signature)
    n_ok = 0
    failures = []
    for seed in cfg.seeds:
        try:
            out = _ensemble_one(cfg, seed)
        except Exception as exc:
            failures.append((seed, exc))
            print(f"[seed {seed}] FAILED ({type(exc).__name__}: {exc})")
            continue
        n_ok += 1
        for k in range(d):
            level_rows.append([seed, k + 1, cfg.signature[k],
                               f"{out['ce_val'][k]:.12g}",
                               f"{out['ce_test'][k]:.12g}",
                               f"{out['weights'][k]:.12g}"])
        for m in method_ce:
            method_ce[m].append(out["methods"][m])
        weight_hist.append(out["weights"])
        print(f"[seed {seed}] " + " ".join(
            f"{m}={out['methods'][m]:.6g}" for m in method_ce))

    _write_csv(os.path.join(cfg.out, "levels.csv"),
               ["seed", "level", "q_k", "ce_val", "ce_test", "weight"],
               level_rows)
    rows = []
    wmean = np.mean(weight_hist, axis=0) if weight_hist else np.full(d, np.nan)
    uniform = np.full(d, 1.0 / d)
    for m in ("Gr", "Fl", "Fl-U", "Fl-W"):
        vals = method_ce[m]
        mean = f"{np.mean(vals):.12g}" if vals else ""
        std = f"{np.std(vals):.12g}" if vals else ""
        if m == "Fl-U":
            ws = [f"{w:.12g}" for w in uniform]
        elif m == "Fl-W":
            ws = [f"{w:.12g}" for w in wmean]
        else:
            ws = [""] * d
        rows.append([m, mean, std] + ws)
    _write_csv(os.path.join(cfg.out, "methods.csv"),
               ["method", "ce_test_mean", "ce_test_std"]
               + [f"w{k+1}" for k in range(d)], rows)
    return {"n_runs": len(cfg.seeds), "n_success": n_ok, "out": cfg.out,
            "methods": {m: (float(np.mean(v)) if v else None)
                        for m, v in method_ce.items()},
            "failures": failures}


def _ensemble_one(cfg: ExperimentConfig, seed: int) -> dict:
    data = resolve_dataset(cfg.data, seed)
    if data.labels is None:
        raise InvalidInput("ensemble mode needs labeled data")
    idx = np.arange(data.n)
    tr, rest = train_test_split(idx, test_size=0.4, stratify=data.labels,
                                random_state=seed)
    va, te = train_test_split(rest, test_size=0.5,
                              stratify=data.labels[rest], random_state=seed)
    x, y = data.samples, data.labels
    n_classes = int(y.max()) + 1

    # centering on train statistics only
    mode = cfg.center or DEFAULT_CENTER[cfg.problem]
    if mode == "mean":
        mu = x[:, tr].mean(axis=1, keepdims=True)
    elif mode == "median":
        from .objectives import _geometric_median
        mu = _geometric_median(x[:, tr])[:, None]
    else:
        mu = np.zeros((x.shape[0], 1))
    xc = x - mu

    train = Dataset(xc[:, tr], labels=_relabel(y[tr], n_classes))
    ctx_cfg = ExperimentConfig(problem=cfg.problem, signature=cfg.signature,
                               data=cfg.data, solver=cfg.solver, seeds=(seed,),
                               out=cfg.out, beta=cfg.beta, knn_k=cfg.knn_k,
                               center="none", sigma=cfg.sigma,
                               solver_config=cfg.solver_config)
    ctx = build_context(ctx_cfg, train)
    sig = _signature_for(ctx, cfg)
    if ctx.reduction is not None:
        xc = ctx.reduction.T @ xc

    flag_point, _, _ = solve_one(ctx, sig, cfg.solver, seed, cfg.solver_config)
    gr_point, _, _ = solve_one(ctx, FlagSignature(ctx.ambient, (sig.q,)),
                               cfg.solver, seed, cfg.solver_config)

    ytr, yva, yte = y[tr], y[va], y[te]
    lv_tr = project_levels(xc[:, tr], flag_point)
    lv_va = project_levels(xc[:, va], flag_point)
    lv_te = project_levels(xc[:, te], flag_point)
    preds_va = [knn_predict_proba(ztr, ytr, zva, k=cfg.knn_k, n_classes=n_classes)
                for ztr, zva in zip(lv_tr, lv_va)]
    preds_te = [knn_predict_proba(ztr, ytr, zte, k=cfg.knn_k, n_classes=n_classes)
                for ztr, zte in zip(lv_tr, lv_te)]
    ce_val = [cross_entropy(p, yva) for p in preds_va]
    ce_test = [cross_entropy(p, yte) for p in preds_te]

    weights = optimal_soft_voting(preds_va, yva)
    uniform = np.full(sig.d, 1.0 / sig.d)

    gr_tr = gr_point.basis.T @ xc[:, tr]
    gr_te = gr_point.basis.T @ xc[:, te]
    gr_pred = knn_predict_proba(gr_tr, ytr, gr_te, k=cfg.knn_k,
                                n_classes=n_classes)

    methods = {
        "Gr": cross_entropy(gr_pred, yte),
        "Fl": ce_test[-1],
        "Fl-U": cross_entropy(ensemble_predict(preds_te, uniform), yte),
        "Fl-W": cross_entropy(ensemble_predict(preds_te, weights), yte),
    }
    return {"ce_val": ce_val, "ce_test": ce_test, "weights": weights,
            "methods": methods,
            "ce_val_uniform": cross_entropy(ensemble_predict(preds_va, uniform), yva),
            "ce_val_weighted": cross_entropy(ensemble_predict(preds_va, weights), yva)}


def _relabel(y, n_classes):
    # splits keep global class ids; Dataset wants contiguous labels, so only
    # pass labels through when every class survived the split
    if np.unique(y).size == n_classes:
        return y
    return None


# ---------------------------------------------------------------------------
# outlier scores


def run_outlier_scores(cfg: ExperimentConfig) -> dict:
    """Per-sample residual scores for the Grassmann and flag recoveries."""
    if cfg.problem != "rsr":
        raise InvalidInput("outlier scoring is defined for the rsr problem")
    os.makedirs(cfg.out, exist_ok=True)
    _echo_config(cfg)

    score_rows = []
    margin_rows = []
    wins = 0
    n_ok = 0
    for seed in cfg.seeds:
        try:
            data = resolve_dataset(cfg.data, seed)
            ctx = build_context(cfg, data)
            sig = _signature_for(ctx, cfg)
            flag_point, _, _ = solve_one(ctx, sig, cfg.solver, seed,
                                         cfg.solver_config)
            gr_point, _, _ = solve_one(ctx, FlagSignature(ctx.ambient, (sig.q,)),
                                       cfg.solver, seed, cfg.solver_config)
        except Exception as exc:
            print(f"[seed {seed}] FAILED ({type(exc).__name__}: {exc})")
            continue
        n_ok += 1
        mask = ctx.data.outlier_mask
        if mask is None and ctx.data.labels is not None:
            uniq = np.unique(ctx.data.labels)
            if uniq.size == 2:
                mask = ctx.data.labels.astype(bool)
        margins = {}
        for name, point in (("gr", gr_point), ("flag", flag_point)):
            scores = lad_residuals(ctx.data, point)
            order = np.argsort(-scores, kind="stable")
            for i in order:
                score_rows.append([seed, name, int(i), f"{scores[i]:.12g}",
                                   "" if mask is None else int(mask[i])])
            if mask is not None and mask.any() and (~mask).any():
                margins[name] = float(scores[mask].min() - scores[~mask].max())
                margin_rows.append([seed, name, f"{margins[name]:.12g}"])
        if len(margins) == 2 and margins["flag"] > margins["gr"]:
            wins += 1
        msg = " ".join(f"{k}_margin={v:.4g}" for k, v in margins.items())
        print(f"[seed {seed}] {msg}" if margins else f"[seed {seed}] scored")

    _write_csv(os.path.join(cfg.out, "scores.csv"),
               ["seed", "method", "sample", "score", "is_outlier"], score_rows)
    _write_csv(os.path.join(cfg.out, "margins.csv"),
               ["seed", "method", "margin"], margin_rows)
    return {"n_runs": len(cfg.seeds), "n_success": n_ok, "out": cfg.out,
            "flag_wins": wins}


# ---------------------------------------------------------------------------
# clustering pipeline (used by ssc experiments and tests)


def ssc_cluster_pipeline(data: Dataset, sig_dims, beta: float, n_clusters: int,
                         seed: int, init: str = "spectral",
                         solver_config: dict = None) -> np.ndarray:
    """Laplacian -> flag objective -> descent -> k-means on embedding rows."""
    lap = build_laplacian(data)
    sig = FlagSignature(data.n, tuple(sig_dims))
    prob = SscProblem(lap, beta)
    obj = ssc_objective(prob, sig)
    if init == "spectral":
        eig = sym_eig(lap)
        start = FlagPoint(sig, eig.vectors[:, ::-1][:, :sig.q].copy())
    elif init == "random":
        start = random_uniform(sig, seed)
    else:
        raise InvalidInput(f"unknown init {init!r}")
    point, _ = steepest_descent(obj, start, DescentConfig(**(solver_config or {})))
    level = sig.dims.index(n_clusters) if n_clusters in sig.dims else sig.d - 1
    emb = point.basis[:, :sig.dims[level]].T
    return spectral_cluster(emb, n_clusters, seed)


def cluster_accuracy(pred, true) -> float:
    """Best label-matching accuracy via the assignment problem."""
    from scipy.optimize import linear_sum_assignment
    pred = np.asarray(pred, dtype=int)
    true = np.asarray(true, dtype=int)
    c = max(pred.max(), true.max()) + 1
    conf = np.zeros((c, c))
    for pl, tl in zip(pred, true):
        conf[pl, tl] += 1
    rows, cols = linear_sum_assignment(-conf)
    return float(conf[rows, cols].sum() / pred.size)


# ---------------------------------------------------------------------------
# svg scatter


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def scatter_svg(path, points, groups=None, title="") -> None:
    """Minimal SVG scatter: points are 2 x n (a 1 x n input gets a zero row)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise InvalidInput("points must be a coordinate matrix")
    if pts.shape[0] == 1:
        pts = np.vstack([pts, np.zeros_like(pts)])
    w, h, pad = 480, 360, 36
    xmin, xmax = pts[0].min(), pts[0].max()
    ymin, ymax = pts[1].min(), pts[1].max()
    xspan = (xmax - xmin) or 1.0
    yspan = (ymax - ymin) or 1.0

    def sx(v):
        return pad + (v - xmin) / xspan * (w - 2 * pad)

    def sy(v):
        return h - pad - (v - ymin) / yspan * (h - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'viewBox="0 0 {w} {h}">',
             f'<rect width="{w}" height="{h}" fill="white"/>',
             f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" '
             f'height="{h - 2 * pad}" fill="none" stroke="#999"/>']
    if title:
        parts.append(f'<text x="{w / 2:.1f}" y="{pad - 12}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="13">{title}</text>')
    if groups is None:
        groups = np.zeros(pts.shape[1], dtype=int)
    groups = np.asarray(groups, dtype=int)
    for i in range(pts.shape[1]):
        color = _PALETTE[groups[i] % len(_PALETTE)]
        parts.append(f'<circle cx="{sx(pts[0, i]):.2f}" cy="{sy(pts[1, i]):.2f}" '
                     f'r="3" fill="{color}" fill-opacity="0.75"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
