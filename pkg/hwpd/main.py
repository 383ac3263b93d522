import logging
import logging.config
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import pandas as pd
from pydantic import ValidationError

from hwpd.classification.base import ClassifierKind, LabeledSet
from hwpd.classification.grid_search import grid_search_loocv, train_classifier
from hwpd.config import Settings, load_settings, read_structured_file
from hwpd.errors import DatasetNotFound, HwpdError, IoFailure
from hwpd.evaluation.fusion import fuse_scores_mean
from hwpd.evaluation.metrics import accuracy_confusion, roc_auc
from hwpd.evaluation.protocol import FAMILY_CHOICES, FUSED, experiment_frame, run_protocol, task_dataset
from hwpd.evaluation.provenance import LeakageAuditor, audit_provenance
from hwpd.evaluation.report import (
    PROVENANCE_FILE,
    build_provenance,
    config_hash,
    read_score_sets,
    write_provenance,
    write_report,
    write_roc,
    write_score_set,
)
from hwpd.features.assembly import build_feature_matrix, read_feature_matrix, write_feature_matrix
from hwpd.features.manifest import FeatureManifest, load_manifest, write_manifest
from hwpd.features.standardization import apply_standardization, fit_standardization
from hwpd.schemas import EvaluationReport, GridSpec, Provenance
from hwpd.signals.ingest import ingest_dataset
from hwpd.signals.recording import read_dataset_manifest
from hwpd.synth.cohort import load_cohort_config, synth_cohort
from hwpd.tasks import OPTIMIZATION_TASK, Experiment, Group, parse_task
from hwpd.utils import make_log_config_dict, resolve_log_level, sha256_of_file, sha256_of_text

logger = logging.getLogger(__name__)

LOG_FILE = "hwpd.log"
FEATURES_FILE = "features.csv"
FEATURE_MANIFEST_FILE = "feature_manifest.csv"
SKIPPED_FILE = "skipped.csv"
RECORDINGS_FILE = "recordings.csv"
DEFAULT_GRID_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "conf", "grid.yaml")

EXPERIMENT_CHOICES = [e.value for e in Experiment]
CLASSIFIER_CHOICES = [k.value for k in ClassifierKind]


def setup_logging(out_dir: Optional[str] = None) -> None:
    """Logs to stderr and, when an output directory is given, to its sidecar log file."""
    ctx = click.get_current_context(silent=True)
    verbose = bool(ctx and ctx.find_root().params.get("verbose"))
    filename = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        filename = os.path.join(out_dir, LOG_FILE)
    logging.config.dictConfig(make_log_config_dict(filename=filename, level=resolve_log_level(verbose)))


def obtain_settings(config_path: Optional[str], include_range: bool = False,
                    mlp_interpretation: Optional[str] = None) -> Settings:
    overrides: Dict[str, Any] = dict()
    if include_range:
        overrides["functionals"] = {"include_range": include_range}
    if mlp_interpretation is not None:
        overrides["classification"] = {"mlp_interpretation": mlp_interpretation}
    return load_settings(config_path, overrides)


def obtain_grid(grid_path: Optional[str]) -> GridSpec:
    if grid_path is None:
        if os.path.exists(DEFAULT_GRID_PATH):
            return GridSpec.model_validate(read_structured_file(DEFAULT_GRID_PATH))
        return GridSpec()
    if not os.path.exists(grid_path):
        raise click.BadParameter(f"grid file not found: {grid_path}", param_hint="--grid")
    return GridSpec.model_validate(read_structured_file(grid_path))


def obtain_feature_matrix(dataset_path: Optional[str], matrix_path: Optional[str], manifest: FeatureManifest,
                          settings: Settings, threads: int) -> pd.DataFrame:
    """A stored feature matrix, or features extracted from a dataset manifest."""
    if matrix_path is not None:
        return read_feature_matrix(matrix_path, manifest)
    if dataset_path is None:
        raise click.UsageError("either --manifest or --matrix is required")
    frame, _ = build_feature_matrix(read_dataset_manifest(dataset_path), manifest, settings, threads)
    return frame


@click.group()
@click.option('-v', '--verbose', is_flag=True, show_default=True, default=False, help="Verbose output")
def cli(verbose: bool):
    setup_logging()


@cli.command()
@click.option('--config', 'config_path', type=str, help="A cohort config file (yaml or json)")
@click.option('--seed', type=int, required=True, help="Master seed of the cohort")
@click.option('--out', type=str, required=True, help="Output directory for recordings, manifest and ground truth")
@click.option('--scale', type=float, help="Scales every group size proportionally")
@click.option('--counts', type=str, multiple=True, help="Group size as GROUP=N, e.g. PD=10; may be repeated")
@click.option('--gap', type=float, help="Distance of the PD knob ranges from the EHC ranges")
@click.option('--tasks', type=str, multiple=True, help="Tasks to generate; all tasks by default")
@click.option('--threads', type=int, default=1, show_default=True, help="Number of worker processes")
def synth(config_path: Optional[str], seed: int, out: str, scale: Optional[float], counts: Tuple[str, ...],
          gap: Optional[float], tasks: Tuple[str, ...], threads: int):
    """Generates a synthetic cohort of tablet recordings."""
    setup_logging(out)
    config = load_cohort_config(config_path)
    updates: Dict[str, Any] = dict()
    if counts:
        parsed = dict(config.counts)
        for item in counts:
            group, _, value = item.partition("=")
            try:
                parsed[Group(group)] = int(value)
            except ValueError:
                raise click.BadParameter(f"expected GROUP=N with GROUP in {[g.value for g in Group]}, got '{item}'",
                                         param_hint="--counts")
        updates["counts"] = parsed
    if tasks:
        try:
            updates["tasks"] = [parse_task(t) for t in tasks]
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--tasks")
    if gap is not None:
        updates["gap"] = gap
    if updates:
        config = config.model_validate({**config.model_dump(), **updates})
    if scale is not None:
        config = config.scaled(scale)

    synth_cohort(config, seed, out, threads)
    write_provenance(out, build_provenance("synth", seed, config_hash(config),
                                           sha256_of_file(os.path.join(out, "manifest.csv"))))
    logger.info("Finished synth")


@cli.command()
@click.option('--manifest', 'dataset_path', type=str, required=True, help="A dataset manifest csv")
@click.option('--config', 'config_path', type=str, help="A pipeline settings file (yaml or json)")
@click.option('--out', type=str, required=True, help="Output directory")
@click.option('--threads', type=int, default=1, show_default=True, help="Number of worker processes")
def ingest(dataset_path: str, config_path: Optional[str], out: str, threads: int):
    """Parses and segments every recording of a dataset and summarizes it."""
    setup_logging(out)
    settings = obtain_settings(config_path)
    dataset = read_dataset_manifest(dataset_path)
    summary = ingest_dataset(dataset, settings, threads)
    summary.to_csv(os.path.join(out, RECORDINGS_FILE), index=False, float_format="%.17g", lineterminator="\n")
    write_provenance(out, build_provenance("ingest", 0, config_hash(settings), sha256_of_file(dataset_path)))
    logger.info("Finished ingest")


@cli.command()
@click.option('--manifest', 'dataset_path', type=str, required=True, help="A dataset manifest csv")
@click.option('--feature-manifest', type=str, help="A feature manifest csv; the default inventory if omitted")
@click.option('--config', 'config_path', type=str, help="A pipeline settings file (yaml or json)")
@click.option('--out', type=str, required=True, help="Output directory")
@click.option('--include-range', is_flag=True, default=False, help="Adds the range functional to the inventory")
@click.option('--dump-fits', type=str, help="Directory for per-stroke lognormal fit dumps")
@click.option('--threads', type=int, default=1, show_default=True, help="Number of worker processes")
def features(dataset_path: str, feature_manifest: Optional[str], config_path: Optional[str], out: str,
             include_range: bool, dump_fits: Optional[str], threads: int):
    """Extracts the feature matrix of every recording of a dataset."""
    setup_logging(out)
    settings = obtain_settings(config_path, include_range)
    dataset = read_dataset_manifest(dataset_path)
    manifest = load_manifest(feature_manifest, settings)

    frame, skipped = build_feature_matrix(dataset, manifest, settings, threads, dump_fits)
    write_feature_matrix(frame, os.path.join(out, FEATURES_FILE))
    write_manifest(manifest, os.path.join(out, FEATURE_MANIFEST_FILE))
    pd.DataFrame(skipped, columns=["subject_id", "task", "reason"]).to_csv(
        os.path.join(out, SKIPPED_FILE), index=False, lineterminator="\n")
    write_provenance(out, build_provenance("features", 0, config_hash(settings), manifest.content_hash()))
    logger.info(f"Finished features: {len(frame)} vectors, {len(skipped)} skipped")


def _common_protocol_options(func):
    options = [
        click.option('--manifest', 'dataset_path', type=str, help="A dataset manifest csv"),
        click.option('--matrix', 'matrix_path', type=str, help="A feature matrix csv written by 'features'"),
        click.option('--feature-manifest', type=str, help="A feature manifest csv; the default inventory if omitted"),
        click.option('--config', 'config_path', type=str, help="A pipeline settings file (yaml or json)"),
        click.option('--experiment', type=click.Choice(EXPERIMENT_CHOICES), required=True, help="Groups to compare"),
        click.option('--grid', 'grid_path', type=str, help="A grid file (yaml or json) of meta-parameter candidates"),
        click.option('--seed', type=int, required=True, help="Seed of the classifiers"),
        click.option('--out', type=str, required=True, help="Output directory"),
        click.option('--mlp-interpretation', type=click.Choice(["width", "depth"]),
                     help="How MLP layout candidates are read"),
        click.option('--threads', type=int, default=1, show_default=True, help="Number of worker processes"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@cli.command()
@_common_protocol_options
@click.option('--features', 'family', type=click.Choice(FAMILY_CHOICES), default="all", show_default=True,
              help="Feature family")
@click.option('--classifier', type=click.Choice(CLASSIFIER_CHOICES), default="svm", show_default=True)
@click.option('--task', type=str, default=OPTIMIZATION_TASK.value, show_default=True,
              help="Task the final model is trained on")
def train(dataset_path: Optional[str], matrix_path: Optional[str], feature_manifest: Optional[str],
          config_path: Optional[str], experiment: str, grid_path: Optional[str], seed: int, out: str,
          mlp_interpretation: Optional[str], threads: int, family: str, classifier: str, task: str):
    """Selects meta-parameters on Circle and fits a model on all subjects of a task."""
    setup_logging(out)
    settings = obtain_settings(config_path, mlp_interpretation=mlp_interpretation)
    grid = obtain_grid(grid_path)
    manifest = load_manifest(feature_manifest, settings)
    try:
        task_id = parse_task(task)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--task")
    kind = ClassifierKind(classifier)

    frame = experiment_frame(obtain_feature_matrix(dataset_path, matrix_path, manifest, settings, threads),
                             Experiment(experiment))
    columns = [manifest.names[i] for i in manifest.family_indices(family)]
    search = grid_search_loocv(task_dataset(frame, OPTIMIZATION_TASK, columns), kind, grid, seed, settings, threads,
                               task=OPTIMIZATION_TASK.value)

    data = task_dataset(frame, task_id, columns)
    standardization = fit_standardization(data.rows, data.ids)
    rows = apply_standardization(data.rows, standardization)
    model = train_classifier(kind, LabeledSet(rows, data.labels, data.ids), search.best, seed, settings)
    model.save(os.path.join(out, "model.json"), features=columns, manifest_hash=manifest.content_hash(),
               task=task_id.value, experiment=experiment, standardization=standardization)
    write_provenance(out, build_provenance("train", seed, config_hash(settings, grid), manifest.content_hash()))
    logger.info(f"Finished train: {kind.value} with {search.best} on {task_id.value}")


@cli.command()
@_common_protocol_options
@click.option('--features', 'families', type=click.Choice(FAMILY_CHOICES), multiple=True,
              help="Feature families; may be repeated (default: all)")
@click.option('--classifier', 'classifiers', type=click.Choice(CLASSIFIER_CHOICES), multiple=True,
              help="Classifiers; may be repeated (default: svm)")
def evaluate(dataset_path: Optional[str], matrix_path: Optional[str], feature_manifest: Optional[str],
             config_path: Optional[str], experiment: str, grid_path: Optional[str], seed: int, out: str,
             mlp_interpretation: Optional[str], threads: int, families: Tuple[str, ...],
             classifiers: Tuple[str, ...]):
    """Runs the evaluation protocol and writes the report."""
    setup_logging(out)
    settings = obtain_settings(config_path, mlp_interpretation=mlp_interpretation)
    grid = obtain_grid(grid_path)
    manifest = load_manifest(feature_manifest, settings)
    frame = obtain_feature_matrix(dataset_path, matrix_path, manifest, settings, threads)

    auditor = LeakageAuditor()
    run = run_protocol(frame, manifest, Experiment(experiment), families or ("all",),
                       [ClassifierKind(c) for c in classifiers or ("svm",)], grid, seed, settings, threads, auditor)
    audit = audit_provenance(auditor)

    provenance = build_provenance("evaluate", seed, config_hash(settings, grid), manifest.content_hash())
    report = EvaluationReport(provenance=provenance, experiment=experiment, results=run.results, audit=audit,
                              incomplete_subjects=run.incomplete_subjects)
    write_report(report, run, out)
    logger.info("Finished evaluate")


def _inherited_provenance(command: str, scores_dir: str, fallback_digest: str) -> Provenance:
    """Provenance of an output derived from stored scores, inheriting the evaluate run's hashes and seed."""
    source = os.path.join(os.path.dirname(os.path.abspath(scores_dir)), PROVENANCE_FILE)
    if os.path.exists(source):
        parent = Provenance.model_validate(read_structured_file(source))
        return build_provenance(command, parent.seed, parent.config_hash, parent.manifest_hash)
    return build_provenance(command, 0, fallback_digest, "")


@cli.command()
@click.option('--scores', 'scores_dir', type=str, required=True, help="A directory of per-task score csv files")
@click.option('--tasks', type=str, multiple=True, help="Tasks to fuse; all stored tasks by default")
@click.option('--out', type=str, required=True, help="Output directory")
def fuse(scores_dir: str, tasks: Tuple[str, ...], out: str):
    """Fuses stored per-task scores by the mean rule."""
    setup_logging(out)
    try:
        selected = [parse_task(t).value for t in tasks] if tasks else None
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--tasks")
    score_sets = read_score_sets(scores_dir, selected)

    groups: Dict[Tuple[str, str, str], List] = dict()
    for score_set in score_sets:
        if score_set.task == OPTIMIZATION_TASK.value:
            continue
        groups.setdefault((score_set.experiment, score_set.family, score_set.classifier), []).append(score_set)

    rows = []
    os.makedirs(os.path.join(out, "scores"), exist_ok=True)
    os.makedirs(os.path.join(out, "roc"), exist_ok=True)
    for (experiment, family, classifier), sets in sorted(groups.items()):
        fused = fuse_scores_mean(sorted(sets, key=lambda s: s.task))
        accuracy, confusion = accuracy_confusion(fused.labels, fused.predicted)
        stem = f"{family}_{classifier}_{FUSED}"
        write_score_set(fused, os.path.join(out, "scores", f"{stem}.csv"))
        auc = None
        if len(set(fused.labels)) == 2:
            curve = roc_auc(fused.labels, fused.scores)
            auc = curve.auc
            write_roc(curve, os.path.join(out, "roc", f"{stem}.csv"))
        rows.append({"experiment": experiment, "family": family, "classifier": classifier,
                     "tasks": len(sets), "accuracy": accuracy, "auc": auc,
                     "tn": confusion[0][0], "fp": confusion[0][1], "fn": confusion[1][0], "tp": confusion[1][1]})

    pd.DataFrame(rows).to_csv(os.path.join(out, "fusion.csv"), index=False, float_format="%.17g",
                              lineterminator="\n")
    write_provenance(out, _inherited_provenance("fuse", scores_dir, sha256_of_text(",".join(selected or []))))
    logger.info(f"Finished fuse: {len(rows)} fused score sets")


@cli.command()
@click.option('--scores', 'scores_path', type=str, required=True, help="A score csv file written by 'evaluate'")
@click.option('--out', type=str, required=True, help="Output ROC csv with threshold,fpr,tpr")
def roc(scores_path: str, out: str):
    """ROC points and AUC of one score file."""
    if not os.path.exists(scores_path):
        raise DatasetNotFound(f"score file not found: {scores_path}")
    frame = pd.read_csv(scores_path)
    missing = [c for c in ("label", "normalized_score") if c not in frame.columns]
    if missing:
        raise IoFailure(f"{scores_path} lacks columns {missing}")
    curve = roc_auc(frame["label"].tolist(), frame["normalized_score"].tolist())
    out_dir = os.path.dirname(os.path.abspath(out))
    os.makedirs(out_dir, exist_ok=True)
    write_roc(curve, out)
    write_provenance(out_dir, _inherited_provenance("roc", os.path.dirname(os.path.abspath(scores_path)),
                                                    sha256_of_file(scores_path)))
    logger.info(f"AUC {curve.auc:.6f} over {len(frame)} scores")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the CLI without exiting the interpreter.

    :return: 0 on success, 1 on a usage error, 2 on a data error
    """
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="hwpd", standalone_mode=False)
    except HwpdError as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        return 2
    except click.exceptions.Exit as e:
        return e.exit_code
    except (click.ClickException, click.exceptions.Abort) as e:
        if isinstance(e, click.ClickException):
            e.show()
        return 1
    except ValidationError as e:
        click.echo(f"Invalid configuration: {e}", err=True)
        return 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
