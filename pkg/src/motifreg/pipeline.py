"""End-to-end orchestration: basis -> dictionary -> forward model -> pruning
-> validation, with TSV artifacts and a hash manifest.

Seeds: the only randomness is the permutation study.  Replicate ``k``
uses ``derive_seed(config.seed, "permKK")`` (see ``validation.rng``).
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from motifreg import __version__
from motifreg.dictionary import DEFAULT_LENGTHS, Dictionary, build_dictionary
from motifreg.expression import BasisSet, ExpressionMatrix, compute_svd_basis, standardize_samples, variance_explained
from motifreg.io import (
    InputError,
    fmt,
    join_promoters,
    parse_expression_tsv,
    parse_fasta,
    read_gene_list,
    read_tsv,
    write_tsv,
)
from motifreg.model import DEFAULT_BUDGET, ForwardModel, build_model
from motifreg.pruning import TAU_TERMS, LofCurve, PenaltySpec, prune_backward
from motifreg.regression import effect_curve
from motifreg.scan import SequenceIndex
from motifreg.sequence import PromoterSet, canonical_form
from motifreg.validation import (
    EnrichmentTable,
    build_flank_alignment,
    component_alignment,
    fisher_enrichment,
    flank_pvalue,
    information_content,
    permutation_study,
)
from motifreg.validation.enrichment import STRONG_EFFECT_P

log = logging.getLogger(__name__)

STAGES = ("basis", "dict", "build", "prune", "validate", "run")


class ConfigError(InputError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    word_lengths: tuple[int, ...] = DEFAULT_LENGTHS
    deltas: tuple[int, ...] = (30, 100, 400, 1000)
    dict_batch: int = 16
    model_budget: int = DEFAULT_BUDGET
    o_max: int = 2
    components: tuple[int, ...] | None = None
    top_k: int | None = 3
    lof: str = "wmbic"
    flank: int = 10
    flank_method: str = "chisq"
    n_permutations: int = 0
    seed: int = 0
    positive_genes: str | None = None
    tau_term: str = "paired"
    n_jobs: int = 1

    def __post_init__(self):
        self.word_lengths = tuple(int(x) for x in self.word_lengths)
        self.deltas = tuple(int(x) for x in self.deltas)
        if self.components is not None:
            self.components = tuple(int(x) for x in self.components)
            self.top_k = None
        self.validate()

    def validate(self):
        ints = {
            "dict_batch": self.dict_batch,
            "model_budget": self.model_budget,
            "flank": self.flank,
            "n_jobs": self.n_jobs,
        }
        for name, v in ints.items():
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not self.word_lengths or min(self.word_lengths) < 1:
            raise ConfigError(f"word_lengths must be positive, got {self.word_lengths}")
        if not self.deltas or min(self.deltas) < 1:
            raise ConfigError(f"deltas must be positive, got {self.deltas}")
        if list(self.deltas) != sorted(set(self.deltas)):
            raise ConfigError(f"deltas must be strictly ascending, got {self.deltas}")
        if self.o_max not in (1, 2, 3):
            raise ConfigError(f"o_max must be 1, 2 or 3, got {self.o_max}")
        if (self.components is None) == (self.top_k is None):
            raise ConfigError("set exactly one of components / top_k")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError("top_k must be positive")
        if self.lof not in ("wgcv", "wmbic"):
            raise ConfigError(f"lof must be wgcv or wmbic, got {self.lof!r}")
        if self.tau_term not in TAU_TERMS:
            raise ConfigError(f"tau_term must be one of {', '.join(TAU_TERMS)}, got {self.tau_term!r}")
        if self.flank_method not in ("chisq", "lattice"):
            raise ConfigError(f"flank_method must be chisq or lattice, got {self.flank_method!r}")
        if self.n_permutations < 0 or self.seed < 0:
            raise ConfigError("n_permutations and seed must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if d.get("components") is not None and "top_k" not in d:
            d = {**d, "top_k": None}
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


@dataclass
class StepsResult:
    dictionary: Dictionary
    forward: ForwardModel
    curve: LofCurve


@dataclass
class PipelineResult:
    config: PipelineConfig
    expression: ExpressionMatrix
    promoters: PromoterSet
    basis: BasisSet
    steps: StepsResult | None = None
    report: list[dict] = field(default_factory=list)
    permutations: list = field(default_factory=list)


def _penalty(config: PipelineConfig, promoters: PromoterSet) -> PenaltySpec:
    return PenaltySpec(config.lof, promoters.mean_length(), len(promoters), config.tau_term)


def _forward(dictionary: Dictionary, basis: BasisSet, config: PipelineConfig, index: SequenceIndex) -> ForwardModel:
    return build_model(
        dictionary.words,
        config.deltas,
        config.model_budget,
        config.o_max,
        basis.scores,
        basis.weights,
        index,
        config.n_jobs,
    )


def _dictionary(basis: BasisSet, config: PipelineConfig, index: SequenceIndex) -> Dictionary:
    return build_dictionary(
        basis.scores, basis.selected, index, config.word_lengths, config.dict_batch, config.n_jobs
    )


def run_steps(promoters: PromoterSet, basis: BasisSet, config: PipelineConfig) -> StepsResult:
    """Dictionary, forward build and pruning for one promoter/score pairing."""
    index = SequenceIndex(promoters)
    dictionary = _dictionary(basis, config, index)
    forward = _forward(dictionary, basis, config, index)
    if not forward.elements:
        raise RuntimeError("forward selection produced an empty model")
    curve = prune_backward(forward, basis.scores, basis.weights, _penalty(config, promoters))
    return StepsResult(dictionary, forward, curve)


def validation_report(result: PipelineResult, positives: list[str] | None) -> list[dict]:
    """One row per selected element, ranked by reverse deletion order."""
    curve = result.steps.curve
    selected = {e.key for e in curve.selected}
    ranked = [e for e in curve.ranking() if e.key in selected]
    promoters = result.promoters
    index = SequenceIndex(promoters)
    gene_ids = promoters.gene_ids
    positive_set = set(positives) if positives is not None else None
    rows = []
    for rank, e in enumerate(ranked, 1):
        x = index.feature(e)
        carriers = [gene_ids[g] for g in np.flatnonzero(x > 0)]
        row = {"rank": rank, "element": e, "order": e.order, "tau": len(carriers)}
        if positive_set is not None:
            table = EnrichmentTable.from_sets(carriers, positive_set, len(gene_ids))
            row["m"] = table.overlap
            row["fisher_p"] = fisher_enrichment(table)
        align = []
        for k, comp in enumerate(result.basis.selected):
            try:
                p = component_alignment(x, result.basis.scores[:, k])
            except ValueError:
                p = float("nan")
            align.append((comp, p))
        row["alignment"] = align
        row["strong"] = [c for c, p in align if p < STRONG_EFFECT_P]
        flanks = []
        seen_words = set()
        for w in e.words():
            if canonical_form(w) in seen_words:
                continue
            seen_words.add(canonical_form(w))
            try:
                fa = build_flank_alignment(e, w, promoters, result.config.flank, index)
                info = information_content(fa)
                flanks.append((w, fa.n, info, flank_pvalue(fa, result.config.flank_method)))
            except ValueError:
                flanks.append((w, 0, float("nan"), float("nan")))
        row["flanks"] = flanks
        rows.append(row)
    return rows


def _hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Writer:
    def __init__(self, final: Path):
        self.final = final
        final.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=final))
        self.names: list[str] = []

    def path(self, name: str) -> Path:
        self.names.append(name)
        return self.tmp / name

    def commit(self):
        for name in self.names:
            (self.tmp / name).replace(self.final / name)
        shutil.rmtree(self.tmp, ignore_errors=True)

    def abort(self):
        shutil.rmtree(self.tmp, ignore_errors=True)


def _write_basis(w: _Writer, basis: BasisSet, y: ExpressionMatrix):
    frac = variance_explained(basis)
    rows = [
        (c + 1, s, s**2, f, int((c + 1) in basis.selected))
        for c, (s, f) in enumerate(zip(basis.singular_values, frac))
    ]
    write_tsv(w.path("scree.tsv"), ["component", "singular_value", "lambda", "fraction", "selected"], rows)
    rows = []
    for c in range(basis.loadings.shape[1]):
        for t, label in enumerate(y.sample_labels):
            rows.append((c + 1, label, basis.loadings[t, c]))
    write_tsv(w.path("basis.tsv"), ["component", "sample", "loading"], rows)


def _write_dictionary(w: _Writer, d: Dictionary):
    write_tsv(w.path("dictionary.tsv"), ["word", "component", "round"], d.rows())


def _write_forward(w: _Writer, f: ForwardModel):
    rows = [(0, "(intercept)", 0, "NA", f.null_loss)]
    rows += [
        (k, str(e), e.order, tau, loss)
        for k, (e, tau, loss) in enumerate(zip(f.elements, f.taus, f.losses), 1)
    ]
    write_tsv(w.path("forward_trajectory.tsv"), ["step", "element", "order", "tau", "weighted_loss"], rows)


def _write_curve(w: _Writer, c: LofCurve):
    rows = [
        (m, "NA" if d is None else str(d), lof, int(m == c.best_size))
        for m, d, lof in zip(c.sizes, c.deleted, c.lof)
    ]
    write_tsv(w.path("lof_curve.tsv"), ["m", "deleted_element", "lof", "selected"], rows)


def _write_report(w: _Writer, report: list[dict], with_fisher: bool):
    header = ["rank", "element", "order", "tau"]
    if with_fisher:
        header += ["m", "fisher_p"]
    header += ["strong_components", "wilcoxon_p", "flank"]
    rows = []
    for r in report:
        row = [r["rank"], str(r["element"]), r["order"], r["tau"]]
        if with_fisher:
            row += [r["m"], r["fisher_p"]]
        row.append(",".join(str(c) for c in r["strong"]) or "none")
        row.append(";".join(f"{c}:{fmt(p)}" for c, p in r["alignment"]))
        row.append(";".join(f"{wd}:{n}:{fmt(i)}:{fmt(p)}" for wd, n, i, p in r["flanks"]))
        rows.append(row)
    write_tsv(w.path("model_report.tsv"), header, rows)


def _write_effects(w: _Writer, report: list[dict], promoters: PromoterSet, y: ExpressionMatrix):
    index = SequenceIndex(promoters)
    rows = []
    for r in report:
        x = index.feature(r["element"])
        try:
            curve = effect_curve(x, y.values)
        except ValueError:
            curve = [float("nan")] * y.shape[1]
        rows.append([str(r["element"]), *curve])
    write_tsv(w.path("effect_curves.tsv"), ["element", *y.sample_labels], rows)


def _write_permutations(w: _Writer, runs):
    rows = []
    for label, steps in runs:
        if steps is None or not steps.curve.sizes:
            rows.append((label, "NA", "NA", 0))
            continue
        c = steps.curve
        for m, lof in zip(c.sizes, c.lof):
            rows.append((label, m, lof, int(m == c.best_size)))
    write_tsv(w.path("permutation_curves.tsv"), ["run", "m", "lof", "selected"], rows)


def load_inputs(expression_path, fasta_path) -> tuple[ExpressionMatrix, PromoterSet]:
    y = parse_expression_tsv(expression_path)
    promoters = join_promoters(y, parse_fasta(fasta_path))
    return y, promoters


def run_pipeline(
    config: PipelineConfig, expression_path, fasta_path, out_dir, until: str = "run"
) -> PipelineResult:
    """Run stages up to ``until`` and write their artifacts plus ``manifest.json``.

    On failure nothing is left behind in ``out_dir`` and a ``StageError``
    naming the failing stage is raised.
    """
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    out = Path(out_dir)
    writer = _Writer(out)
    stage = "load"
    try:
        y, promoters = load_inputs(expression_path, fasta_path)
        positives = None
        if config.positive_genes:
            positives = read_gene_list(config.positive_genes)
            unknown = sorted(set(positives) - set(y.gene_ids))
            if unknown:
                raise InputError(f"positive list has unknown genes: {', '.join(unknown[:20])}")

        stage = "basis"
        ys = standardize_samples(y)
        basis = compute_svd_basis(ys, components=config.components, top_k=config.top_k)
        result = PipelineResult(config, y, promoters, basis)
        _write_basis(writer, basis, y)

        order = STAGES.index(until)
        if order >= STAGES.index("dict"):
            stage = "dict"
            index = SequenceIndex(promoters)
            dictionary = _dictionary(basis, config, index)
            _write_dictionary(writer, dictionary)
            result.steps = StepsResult(dictionary, ForwardModel(), LofCurve(config.lof))
        if order >= STAGES.index("build"):
            stage = "build"
            forward = _forward(dictionary, basis, config, index)
            result.steps.forward = forward
            _write_forward(writer, forward)
        if order >= STAGES.index("prune"):
            stage = "prune"
            if not forward.elements:
                raise RuntimeError("forward selection produced an empty model")
            curve = prune_backward(forward, basis.scores, basis.weights, _penalty(config, promoters))
            result.steps.curve = curve
            _write_curve(writer, curve)
        if order >= STAGES.index("validate"):
            stage = "validate"
            result.report = validation_report(result, positives)
            _write_report(writer, result.report, positives is not None)
            _write_effects(writer, result.report, promoters, y)
        if until == "run" and config.n_permutations > 0:
            stage = "permutation"
            real = result.steps
            runs = permutation_study(
                lambda ps: real if ps is promoters else run_steps(ps, basis, config),
                promoters,
                config.n_permutations,
                config.seed,
            )
            result.permutations = runs
            _write_permutations(writer, runs)

        stage = "manifest"
        manifest = {
            "tool": "motifreg",
            "version": __version__,
            "stage": until,
            "seed": config.seed,
            # worker count is an execution detail and never changes results
            "config": {k: v for k, v in config.to_dict().items() if k != "n_jobs"},
            "inputs": {
                "expression": _hash(Path(expression_path)),
                "promoters": _hash(Path(fasta_path)),
            },
            "artifacts": {name: _hash(writer.tmp / name) for name in sorted(writer.names)},
        }
        with open(writer.path("manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        writer.commit()
        if until == "run":
            emit_plot_data(out)
        return result
    except InputError:
        writer.abort()
        raise
    except Exception as exc:
        writer.abort()
        raise StageError(stage, exc) from exc


def emit_plot_data(out_dir) -> list[Path]:
    """Long-format CSVs behind component, effect-curve and permutation plots."""
    out = Path(out_dir)
    written = []
    for name in ("scree.tsv", "basis.tsv", "effect_curves.tsv"):
        if not (out / name).exists():
            raise FileNotFoundError(f"missing artifact: {name}")
    selected = {r["component"] for r in read_tsv(out / "scree.tsv") if r["selected"] == "1"}
    rows = [r for r in read_tsv(out / "basis.tsv") if r["component"] in selected]
    path = out / "plot_basis.csv"
    _write_csv(path, ["component", "sample", "loading"], ([r["component"], r["sample"], r["loading"]] for r in rows))
    written.append(path)

    effects = read_tsv(out / "effect_curves.tsv")
    path = out / "plot_effect_curves.csv"
    long_rows = []
    for r in effects:
        for k, v in r.items():
            if k != "element":
                long_rows.append([r["element"], k, v])
    _write_csv(path, ["element", "sample", "correlation"], long_rows)
    written.append(path)

    perm = out / "permutation_curves.tsv"
    if perm.exists():
        path = out / "plot_permutations.csv"
        _write_csv(path, ["run", "m", "lof"], ([r["run"], r["m"], r["lof"]] for r in read_tsv(perm)))
        written.append(path)
    return written


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
