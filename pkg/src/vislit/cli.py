"""Command-line entry point orchestrating the pipeline end to end.

Exit codes: 0 success, 2 validation failure, 3 numeric failure.
"""

import csv
import json
import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import amap_io, eval_saliency, features, metrics, stats, synth
from .attention import (AttentionMap, NormMode, RasterConfig, normalize,
                        rasterize)
from .capture.dataset import compute_scores, load_dataset
from .capture.store import verify_manifest
from .pipeline import (PipelineManifest, content_hash, read_feature_csv,
                       stamp_artifact, up_to_date, write_feature_csv,
                       write_metric_rows, write_stamp)
from .sal2lit import (ChartFeatureDataset, TrainConfig, evaluate, greedy_select,
                      integrated_gradients, load_model, oversample_round_robin,
                      predict, quantile_bin, save_model, train)
from .sal2lit.training import NonFiniteLossError

VALIDATION_EXIT = 2
NUMERIC_EXIT = 3


def _pipeline_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NonFiniteLossError, FloatingPointError, np.linalg.LinAlgError) as e:
            click.echo(f"numeric failure: {e}", err=True)
            sys.exit(NUMERIC_EXIT)
        except (ValueError, KeyError, FileNotFoundError) as e:
            click.echo(f"validation failure: {e}", err=True)
            sys.exit(VALIDATION_EXIT)
    return wrapper


@click.group()
def main():
    """BubbleView attention capture and literacy analysis toolkit."""


def _load_split(dataset_dir, manifest_path):
    manifest = PipelineManifest.load(manifest_path)
    dataset_dir = dataset_dir or manifest.dataset
    config, sessions, sgl = load_dataset(dataset_dir)
    scores = compute_scores(config, sessions, sgl)
    pids = sorted(scores)
    train_pids = manifest.train or pids
    test_pids = manifest.test
    return manifest, config, sessions, scores, train_pids, test_pids


def _raster_cfg(config):
    item = config.items[0]
    return RasterConfig(bubble_radius=item.bubble_radius,
                        blur_sigma=item.blur_sigma)


def _labels_for(scores, pids, schemes):
    triples = [[scores[p].vlat for p in pids],
               [scores[p].calvi for p in pids],
               [scores[p].sgl for p in pids]]
    return [scheme.assign(vals) for scheme, vals in zip(schemes, triples)]


def _fit_schemes(scores, train_pids, n_levels):
    out = []
    for attr in ("vlat", "calvi", "sgl"):
        vals = [getattr(scores[p], attr) for p in train_pids]
        scheme, _ = quantile_bin(vals, n_levels)
        out.append(scheme)
    return out


# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--charts", "charts_dir", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(config_path, store_dir, charts_dir, host, port):
    """Run the local study capture service."""
    from .capture.service import run_server

    run_server(config_path, store_dir, charts_dir, host, port)


@main.command("make-synth")
@click.option("--out", required=True, type=click.Path())
@click.option("--participants", default=40, type=int)
@click.option("--seed", default=0, type=int)
@_pipeline_errors
def make_synth(out, participants, seed):
    """Generate a bundled synthetic dataset (stand-in for the capture UI)."""
    study = synth.generate_study(participants, seed=seed)
    synth.write_dataset(study, out)
    click.echo(f"wrote synthetic dataset for {participants} participants to {out}")


@main.command("rasterize")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--pgm", is_flag=True, help="also write 16-bit PGM previews")
@click.option("--force", is_flag=True)
@_pipeline_errors
def rasterize_cmd(dataset, out, pgm, force):
    """Convert every session's clicks into an AMAP attention map."""
    bad = verify_manifest(dataset)
    if bad:
        raise ValueError(f"dataset checksum mismatch: {bad}")
    config, sessions, _ = load_dataset(dataset)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = content_hash(Path(dataset) / "manifest.json")
    stamp = out_dir / ".rasterize.stamp"
    if up_to_date(stamp, digest, force):
        click.echo("rasterize: outputs up to date (use --force to redo)")
        return
    cfg = _raster_cfg(config)
    for s in sessions:
        amap = rasterize(s, cfg)
        path = out_dir / f"{s.participant_id}__{s.chart_id}.amap"
        amap_io.write_amap(path, amap)
        if pgm:
            amap_io.write_pgm16(path.with_suffix(".pgm"), amap)
    write_stamp(stamp, digest)
    stamp_artifact(out_dir / "maps", "")
    click.echo(f"wrote {len(sessions)} attention maps to {out}")


@main.command("metrics")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def metrics_cmd(dataset, out):
    """Within-map descriptors per session as CSV metric rows."""
    config, sessions, _ = load_dataset(dataset)
    cfg = _raster_cfg(config)
    rows = []
    for s in sessions:
        amap = rasterize(s, cfg)
        vec = features.within_map_features(s, amap)
        for name, value in zip(("click_count", "duration_s", "entropy",
                                "coverage"), vec):
            rows.append((s.participant_id, s.chart_id, name, "-", f"{value:.10g}"))
    write_metric_rows(out, rows)
    stamp_artifact(out)
    click.echo(f"wrote {len(rows)} metric rows to {out}")


@main.command("features")
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def features_cmd(dataset, manifest_path, out):
    """24-feature matrix CSV; group maps come from the train split only."""
    manifest, config, sessions, scores, train_pids, test_pids = \
        _load_split(dataset, manifest_path)
    cfg = _raster_cfg(config)
    train_sessions = [s for s in sessions if s.participant_id in set(train_pids)]
    groups = features.build_group_maps(train_sessions, scores,
                                       config.answer_key(), cfg)
    groups.assert_no_overlap(test_pids)
    charts = sorted({s.chart_id for s in sessions})
    matrix, pids = features.build_feature_matrix(sessions, groups, charts, cfg)
    write_feature_csv(out, matrix, pids, features.FEATURE_NAMES)
    stamp_artifact(out, manifest.hash())
    click.echo(f"wrote {len(pids)}x{matrix.shape[1]} feature matrix to {out}")


@main.command("train")
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True))
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--levels", default=2, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--epochs", default=150, type=int)
@click.option("--out", "model_out", required=True, type=click.Path())
@click.option("--history", "history_out", type=click.Path(), default=None)
@click.option("--force", is_flag=True)
@_pipeline_errors
def train_cmd(features_csv, dataset, manifest_path, levels, seed, epochs,
              model_out, history_out, force):
    """Train the multi-head literacy predictor on the train split."""
    manifest, config, sessions, scores, train_pids, test_pids = \
        _load_split(dataset, manifest_path)
    seed = manifest.seed if seed is None else seed
    digest = content_hash(Path(features_csv), manifest.hash(), levels, seed, epochs)
    stamp = Path(str(model_out) + ".stamp")
    if up_to_date(stamp, digest, force):
        click.echo("train: model up to date (use --force to retrain)")
        return
    matrix, pids, _ = read_feature_csv(features_csv)
    row_of = {p: i for i, p in enumerate(pids)}
    train_rows = np.array([row_of[p] for p in train_pids])
    schemes = _fit_schemes(scores, train_pids, levels)
    labels3 = _labels_for(scores, train_pids, schemes)
    norm = features.FeatureNormalizer().fit(matrix[train_rows])
    x = norm.transform(matrix[train_rows], is_train=True)
    idx = oversample_round_robin(labels3, seed)
    cfg = TrainConfig(seed=seed, max_epochs=epochs)
    params, history = train(x[idx], [l[idx] for l in labels3], cfg,
                            n_levels=levels)
    save_model(model_out, params)
    sidecar = {"bin_edges": [s.bin_edges.tolist() for s in schemes],
               "n_levels": levels, "seed": seed,
               "norm": {"col_mean": norm.col_mean.tolist(),
                        "col_min": norm.col_min.tolist(),
                        "col_max": norm.col_max.tolist()}}
    Path(str(model_out) + ".json").write_text(json.dumps(sidecar))
    if history_out:
        with open(history_out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "train_loss", "val_loss"])
            w.writerows(history.epochs)
        stamp_artifact(history_out, manifest.hash())
    write_stamp(stamp, digest)
    stamp_artifact(model_out, manifest.hash())
    click.echo(f"trained to epoch {history.best_epoch} "
               f"(val loss {history.best_val_loss:.4f}); model at {model_out}")


def _load_model_bundle(model_path):
    params = load_model(model_path)
    sidecar = json.loads(Path(str(model_path) + ".json").read_text())
    norm = features.FeatureNormalizer(
        col_mean=np.array(sidecar["norm"]["col_mean"]),
        col_min=np.array(sidecar["norm"]["col_min"]),
        col_max=np.array(sidecar["norm"]["col_max"]))
    from .sal2lit import LevelScheme
    schemes = [LevelScheme(sidecar["n_levels"], np.array(e))
               for e in sidecar["bin_edges"]]
    return params, norm, schemes


@main.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def predict_cmd(model_path, features_csv, out):
    """Per-participant predicted levels and class probabilities."""
    params, norm, _ = _load_model_bundle(model_path)
    matrix, pids, _ = read_feature_csv(features_csv)
    x = norm.transform(matrix)
    levels, probs = predict(params, x)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        header = ["participant_id", "vlat_level", "calvi_level", "sgl_level"]
        header += [f"p_{t}_{c}" for t in ("vlat", "calvi", "sgl")
                   for c in range(params.n_levels)]
        w.writerow(header)
        for i, pid in enumerate(pids):
            row = [pid] + [int(levels[k][i]) for k in range(3)]
            for k in range(3):
                row += [f"{p:.6g}" for p in probs[k][i]]
            w.writerow(row)
    stamp_artifact(out)
    click.echo(f"wrote predictions for {len(pids)} participants to {out}")


@main.command("evaluate")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True))
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@_pipeline_errors
def evaluate_cmd(model_path, features_csv, dataset, manifest_path):
    """Held-out accuracy per literacy test."""
    manifest, config, sessions, scores, train_pids, test_pids = \
        _load_split(dataset, manifest_path)
    if not test_pids:
        raise ValueError("manifest declares no test participants")
    params, norm, schemes = _load_model_bundle(model_path)
    matrix, pids, _ = read_feature_csv(features_csv)
    row_of = {p: i for i, p in enumerate(pids)}
    rows = np.array([row_of[p] for p in test_pids])
    x = norm.transform(matrix[rows])
    labels3 = _labels_for(scores, test_pids, schemes)
    accs, macro = evaluate(params, x, labels3)
    for name, acc in zip(("mini-VLAT", "CALVI", "SGL"), accs):
        click.echo(f"{name}: {acc:.3f}")
    click.echo(f"macro average: {macro:.3f}")


@main.command("select-charts")
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--max-k", default=3, type=int)
@click.option("--weights", default="1,1,1")
@click.option("--levels", default=2, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--epochs", default=60, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--plot", type=click.Path(), default=None)
@_pipeline_errors
def select_charts_cmd(dataset, manifest_path, max_k, weights, levels, seed,
                      epochs, out, plot):
    """Greedy forward selection of the most predictive charts."""
    manifest, config, sessions, scores, train_pids, test_pids = \
        _load_split(dataset, manifest_path)
    if not test_pids:
        raise ValueError("manifest declares no test participants")
    seed = manifest.seed if seed is None else seed
    w = [float(v) for v in weights.split(",")]
    if len(w) != 3:
        raise ValueError("--weights needs exactly three comma-separated values")
    ds = build_chart_dataset(config, sessions, scores, train_pids, test_pids,
                             levels)
    cfg = TrainConfig(seed=seed, max_epochs=epochs)
    result = greedy_select(ds, max_k, w, cfg, n_levels=levels)
    with open(out, "w", newline="") as f:
        wcsv = csv.writer(f)
        wcsv.writerow(["rank", "chart", "weighted_accuracy",
                       "vlat_acc", "calvi_acc", "sgl_acc"])
        for i, (chart, acc, accs) in enumerate(zip(
                result.charts, result.accuracy_curve, result.per_head_curve)):
            wcsv.writerow([i + 1, chart, f"{acc:.4f}",
                           *(f"{a:.4f}" for a in accs)])
    stamp_artifact(out, manifest.hash())
    if plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ks = np.arange(1, len(result.accuracy_curve) + 1)
        ax.plot(ks, result.accuracy_curve, marker="o")
        ax.set_xlabel("number of charts")
        ax.set_ylabel("weighted accuracy")
        ax.set_xticks(ks)
        ax.set_ylim(0, 1.02)
        fig.tight_layout()
        fig.savefig(plot, dpi=150)
        plt.close(fig)
    click.echo("selected charts: " + ", ".join(result.charts))


def build_chart_dataset(config, sessions, scores, train_pids, test_pids,
                        n_levels):
    """Per-chart train/test feature matrices for greedy selection."""
    cfg = _raster_cfg(config)
    train_set = set(train_pids)
    test_set = set(test_pids)
    train_sessions = [s for s in sessions if s.participant_id in train_set]
    groups = features.build_group_maps(train_sessions, scores,
                                       config.answer_key(), cfg)
    groups.assert_no_overlap(test_pids)
    charts = sorted({s.chart_id for s in sessions})
    train_feats, test_feats = {}, {}
    for chart in charts:
        m_tr, p_tr = features.build_feature_matrix(
            [s for s in sessions if s.chart_id == chart
             and s.participant_id in train_set], groups, [chart], cfg)
        m_te, p_te = features.build_feature_matrix(
            [s for s in sessions if s.chart_id == chart
             and s.participant_id in test_set], groups, [chart], cfg)
        order_tr = [p_tr.index(p) for p in train_pids]
        order_te = [p_te.index(p) for p in test_pids]
        train_feats[chart] = m_tr[order_tr]
        test_feats[chart] = m_te[order_te]
    schemes = _fit_schemes(scores, train_pids, n_levels)
    return ChartFeatureDataset(
        chart_ids=charts, train_features=train_feats, test_features=test_feats,
        train_labels3=_labels_for(scores, train_pids, schemes),
        test_labels3=_labels_for(scores, test_pids, schemes))


@main.command("explain")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True))
@click.option("--participant", required=True)
@click.option("--head", default=0, type=int)
@click.option("--target-class", default=None, type=int)
@click.option("--steps", default=256, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--plot", type=click.Path(), default=None)
@_pipeline_errors
def explain_cmd(model_path, features_csv, participant, head, target_class,
                steps, out, plot):
    """Integrated-gradients attribution of one prediction."""
    params, norm, _ = _load_model_bundle(model_path)
    matrix, pids, header = read_feature_csv(features_csv)
    if participant not in pids:
        raise ValueError(f"participant {participant} not in {features_csv}")
    x = norm.transform(matrix[[pids.index(participant)]])[0]
    if target_class is None:
        levels, _ = predict(params, x)
        target_class = int(levels[head][0])
    attr = integrated_gradients(params, x, head, target_class, steps)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["feature", "attribution"])
        for name, a in zip(header, attr):
            w.writerow([name, f"{a:.8g}"])
    stamp_artifact(out)
    if plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(6, 5))
        ax.barh(range(len(attr)), attr)
        ax.set_yticks(range(len(attr)))
        ax.set_yticklabels(header, fontsize=6)
        ax.set_xlabel("attribution")
        fig.tight_layout()
        fig.savefig(plot, dpi=150)
        plt.close(fig)
    click.echo(f"wrote attributions for {participant} "
               f"(head {head}, class {target_class}) to {out}")


@main.command("stats")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--max-degree", default=6, type=int)
@_pipeline_errors
def stats_cmd(dataset, out, max_degree):
    """Score distributions, polynomial elbows, and MCA report."""
    config, sessions, sgl = load_dataset(dataset)
    scores = compute_scores(config, sessions, sgl)
    pids = sorted(scores)
    vlat = np.array([scores[p].vlat for p in pids])
    calvi = np.array([scores[p].calvi for p in pids])
    sgl_n = np.array([scores[p].sgl for p in pids])
    lines = [f"participants: {len(pids)}"]
    for name, vals in (("mini-VLAT", vlat), ("CALVI", calvi), ("SGL", sgl_n)):
        lines.append(f"{name}: mean={vals.mean():.4f} std={vals.std():.4f} "
                     f"skew={stats.skewness(vals):.4f}")
    for name, y in (("SGL~VLAT", sgl_n), ("CALVI~VLAT", calvi)):
        fit = stats.polyfit_elbow(vlat, y, max_degree)
        lines.append(f"{name}: degree={fit.degree} "
                     f"r2={fit.r2_by_degree[fit.degree]:.4f} "
                     f"coeffs={np.array2string(fit.coefficients, precision=4)}")
        extrema = stats.poly_stationary_points(fit.coefficients)
        inside = [f"{v:.3f}" for v in extrema if 0 <= v <= 1]
        lines.append(f"{name}: stationary points in [0,1]: {inside}")
    # MCA over binary correctness + binarized SGL responses
    answer_key = config.answer_key()
    by_pid = {}
    for s in sessions:
        by_pid.setdefault(s.participant_id, {})[s.chart_id] = s.answer
    rows = []
    for p in pids:
        answers = by_pid[p]
        row = [int(answers.get(i.code) == answer_key[i.code])
               for i in config.items]
        row += list(stats.binarize_sgl(sgl[p]))
        rows.append(row)
    try:
        mca = stats.mca(np.array(rows))
        lines.append(f"MCA: {mca.eigenvalues.size} components, "
                     f"elbow at {mca.n_components_elbow}")
        lines.append("MCA eigenvalues: "
                     + np.array2string(mca.eigenvalues[:8], precision=4))
    except ValueError as e:
        lines.append(f"MCA skipped: {e}")
    Path(out).write_text("\n".join(lines) + "\n")
    stamp_artifact(out)
    click.echo("\n".join(lines))


@main.command("eval-saliency")
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--score", "score_attr", default="composite",
              type=click.Choice(["composite", "vlat", "calvi", "sgl"]))
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def eval_saliency_cmd(dataset, manifest_path, score_attr, out):
    """Score the baseline predictor vs a uniform control on the test split."""
    manifest, config, sessions, scores, train_pids, test_pids = \
        _load_split(dataset, manifest_path)
    if not test_pids:
        raise ValueError("manifest declares no test participants")
    cfg = _raster_cfg(config)

    def score_of(pid):
        s = scores[pid]
        return s.composite() if score_attr == "composite" else getattr(s, score_attr)

    train_maps = {}
    for s in sessions:
        if s.participant_id in set(train_pids) and s.clicks:
            train_maps[(s.participant_id, s.chart_id)] = rasterize(s, cfg)
    model = eval_saliency.fit_baseline(
        train_maps, {p: score_of(p) for p in train_pids})
    eval_saliency.assert_no_leakage(model, test_pids)
    results_base, results_unif = {}, {}
    for s in sessions:
        if s.participant_id not in set(test_pids) or not s.clicks:
            continue
        truth = rasterize(s, cfg)
        fixations = tuple((c.x, c.y) for c in s.clicks)
        shape = truth.values.shape
        rec = eval_saliency.EvalRecord(
            s.participant_id, s.chart_id, score_of(s.participant_id),
            eval_saliency.baseline_predict(model, s.chart_id,
                                           score_of(s.participant_id)),
            truth, fixations)
        results_base[rec.key] = eval_saliency.evaluate_record(rec)
        rec_u = eval_saliency.EvalRecord(
            s.participant_id, s.chart_id, score_of(s.participant_id),
            eval_saliency.uniform_predict(shape), truth, fixations)
        results_unif[rec_u.key] = eval_saliency.evaluate_record(
            rec_u, undefined_value=0.0)
    comparison = eval_saliency.compare_models(results_base, results_unif)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["metric", "baseline_mean", "uniform_mean", "t", "df",
                    "p", "p_bonferroni"])
        for metric, c in comparison.items():
            w.writerow([metric, f"{c['mean_a']:.4f}", f"{c['mean_b']:.4f}",
                        f"{c['t']:.4f}", c["df"], f"{c['p']:.3g}",
                        f"{c['p_adjusted']:.3g}"])
    stamp_artifact(out, manifest.hash())
    for metric, c in comparison.items():
        click.echo(f"{metric}: baseline {c['mean_a']:.4f} vs uniform "
                   f"{c['mean_b']:.4f} (p_adj={c['p_adjusted']:.3g})")


if __name__ == "__main__":
    main()
