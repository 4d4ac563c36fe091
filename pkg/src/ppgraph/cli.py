"""Command-line surface.

Subcommands: canonicalize, detect, eval, sweep, synth, import, sample, score.
Exit codes: 0 success, 2 bad input, 3 I/O failure, 4 internal invariant
violation. All outputs are deterministic given inputs and flags; files are
written atomically (write-then-rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from dataclasses import dataclass, field

from .canonicalize import (
    AnnotationError,
    CanonConfig,
    RawAnnotation,
    annotation_to_json,
    canonicalize,
    load_annotation,
)
from .fields import FieldFormatError, load_field, save_matrix
from .graph import (
    GraphInvariantError,
    graph_to_json,
    graph_to_segments,
    load_graph,
)
from .junctions import ExtractorConfig, extract
from .metrics import SWEEP_THRESHOLDS, combine_reports, evaluate, pr_curve
from .scoring import (
    ScorerConfig,
    lsam_sample,
    make_heuristic_scorer,
    score_all_pairs,
    threshold_to_graph,
)
from .synthetic import GenerationError, SceneConfig, generate, save_scene

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class PipelineConfig:
    """Bundle of all per-stage settings plus the evaluation defaults."""

    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    canon: CanonConfig = field(default_factory=CanonConfig)
    tol_frac: float = 0.01
    thresholds: tuple[float, ...] = SWEEP_THRESHOLDS

    @staticmethod
    def from_args(args) -> "PipelineConfig":
        return PipelineConfig(
            extractor=_extractor_config(args),
            scorer=_scorer_config(args),
            canon=_canon_config(args) if hasattr(args, "belt_width") else CanonConfig(),
            tol_frac=getattr(args, "tolerance_frac", 0.01),
            thresholds=tuple(
                float(t) for t in getattr(args, "thresholds", "").split(",") if t
            ) or SWEEP_THRESHOLDS,
        )


@dataclass
class DatasetManifest:
    """Batch listing of per-image artifact paths, resolved against a root.

    Entries are mappings with an ``id`` plus any of: ``annotation``, ``gt``,
    ``pred``, ``junction_map``, ``line_map``. All referenced paths must exist
    when the manifest is loaded.
    """

    root: str
    entries: list[dict]

    _PATH_KEYS = ("annotation", "gt", "pred", "junction_map", "line_map")

    @staticmethod
    def load(path: str) -> "DatasetManifest":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise CliError(EXIT_BAD_INPUT, f"{path}: {e}") from e
        except OSError as e:
            raise CliError(EXIT_IO, f"{path}: {e}") from e
        root = data.get("root", os.path.dirname(os.path.abspath(path)))
        entries = data.get("entries")
        if not isinstance(entries, list):
            raise CliError(EXIT_BAD_INPUT, f"{path}: manifest needs an 'entries' list")
        manifest = DatasetManifest(root=root, entries=entries)
        for entry in entries:
            if "id" not in entry:
                raise CliError(EXIT_BAD_INPUT, f"{path}: manifest entry without 'id'")
            for key in DatasetManifest._PATH_KEYS:
                if key in entry and not os.path.exists(manifest.resolve(entry[key])):
                    raise CliError(
                        EXIT_BAD_INPUT,
                        f"{path}: entry {entry['id']!r} references missing {key} "
                        f"{manifest.resolve(entry[key])!r}",
                    )
        return manifest

    def resolve(self, rel: str) -> str:
        return rel if os.path.isabs(rel) else os.path.join(self.root, rel)


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as f:
        f.write(text)
        if not text.endswith("\n"):
            f.write("\n")
    os.replace(tmp, path)


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text + "\n")


def _load_field_checked(path: str):
    try:
        return load_field(path)
    except FieldFormatError as e:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {e}") from e
    except OSError as e:
        raise CliError(EXIT_IO, f"{path}: {e}") from e


def _load_graph_checked(path: str):
    try:
        return load_graph(path)
    except (json.JSONDecodeError, ValueError, KeyError) as e:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {e}") from e
    except OSError as e:
        raise CliError(EXIT_IO, f"{path}: {e}") from e


def _extractor_config(args) -> ExtractorConfig:
    return ExtractorConfig(
        tau=args.tau,
        epsilon=args.epsilon,
        max_junctions=args.max_junctions,
        plateau_mode=args.plateau_mode,
    )


def _scorer_config(args) -> ScorerConfig:
    return ScorerConfig(
        samples=args.samples,
        quantile=args.quantile,
        threshold=args.threshold,
        block=args.block,
    )


def _canon_config(args) -> CanonConfig:
    return CanonConfig(
        belt_width=args.belt_width,
        inner_dist=args.inner_dist,
        min_angle_deg=args.min_angle,
        merge_tol=args.merge_tol,
    )


def _add_extract_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=0.25, help="junction response threshold")
    p.add_argument("--epsilon", type=float, default=3.0, help="NMS cluster cutoff in pixels")
    p.add_argument("--max-junctions", type=int, default=512)
    p.add_argument("--plateau-mode", choices=("strict", "ge"), default="strict")


def _add_score_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=64, help="probes per candidate pair")
    p.add_argument("--quantile", type=float, default=0.10)
    p.add_argument("--threshold", type=float, default=0.25, help="adjacency threshold")
    p.add_argument("--block", type=int, default=64, help="pair-scoring tile size")


def _add_canon_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--belt-width", type=float, default=2.0)
    p.add_argument("--inner-dist", type=float, default=2.0)
    p.add_argument("--min-angle", type=float, default=5.0)
    p.add_argument("--merge-tol", type=float, default=3.0)


def _canon_one(src: str, dst: str, cfg: CanonConfig) -> None:
    try:
        ann = load_annotation(src)
    except (json.JSONDecodeError, AnnotationError) as e:
        raise CliError(EXIT_BAD_INPUT, f"{src}: {e}") from e
    except OSError as e:
        raise CliError(EXIT_IO, f"{src}: {e}") from e
    graph = canonicalize(ann, cfg)
    _atomic_write(dst, graph_to_json(graph))


def cmd_canonicalize(args) -> int:
    cfg = _canon_config(args)
    if os.path.isdir(args.input):
        if not args.out:
            raise CliError(EXIT_BAD_INPUT, "--out directory required in batch mode")
        os.makedirs(args.out, exist_ok=True)
        names = sorted(n for n in os.listdir(args.input) if n.endswith(".json"))
        jobs = [(os.path.join(args.input, n), os.path.join(args.out, n)) for n in names]
        if args.jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                list(pool.map(lambda sd: _canon_one(sd[0], sd[1], cfg), jobs))
        else:
            for src, dst in jobs:
                _canon_one(src, dst, cfg)
        return EXIT_OK
    try:
        ann = load_annotation(args.input)
    except (json.JSONDecodeError, AnnotationError) as e:
        raise CliError(EXIT_BAD_INPUT, f"{args.input}: {e}") from e
    except OSError as e:
        raise CliError(EXIT_IO, f"{args.input}: {e}") from e
    graph = canonicalize(ann, cfg)
    _emit(graph_to_json(graph), args.out)
    return EXIT_OK


def _detect_graph(args):
    jmap = _load_field_checked(args.junction_map)
    lmap = _load_field_checked(args.line_map)
    if not jmap.same_frame(lmap):
        raise CliError(
            EXIT_BAD_INPUT,
            f"frame/stride mismatch: junction map {jmap!r} vs line map {lmap!r}",
        )
    junctions = extract(jmap, _extractor_config(args))
    width, height = jmap.image_width, jmap.image_height
    scfg = _scorer_config(args)
    if len(junctions) < 2:
        return _edgeless_graph(width, height, junctions), None, junctions
    scores = score_all_pairs(lmap, junctions, scfg, make_heuristic_scorer(scfg.quantile))
    graph = threshold_to_graph(scores, junctions, scfg.threshold, width, height)
    return graph, scores, junctions


def _edgeless_graph(width: int, height: int, junctions):
    from .graph import build_graph

    return build_graph(width, height, [(j.x, j.y) for j in junctions], [])


def cmd_detect(args) -> int:
    graph, scores, _ = _detect_graph(args)
    if args.dump_scores and scores is not None:
        save_matrix(scores.values, args.dump_scores)
    _emit(graph_to_json(graph), args.out)
    return EXIT_OK


def _eval_pair(gt_path: str, pred_path: str, args):
    gt = _load_graph_checked(gt_path)
    pred = _load_graph_checked(pred_path)
    if (gt.width, gt.height) != (pred.width, pred.height):
        raise CliError(EXIT_BAD_INPUT, "frame mismatch between reference and prediction")
    try:
        return evaluate(
            graph_to_segments(gt, args.collinear_tol),
            graph_to_segments(pred, args.collinear_tol),
            args.tolerance_frac,
        )
    except ValueError as e:
        raise CliError(EXIT_BAD_INPUT, str(e)) from e


def cmd_eval(args) -> int:
    if args.manifest:
        manifest = DatasetManifest.load(args.manifest)
        reports = []
        parts = []
        for entry in manifest.entries:
            if "gt" not in entry or "pred" not in entry:
                raise CliError(
                    EXIT_BAD_INPUT, f"manifest entry {entry.get('id')!r} needs gt and pred"
                )
            rep = _eval_pair(manifest.resolve(entry["gt"]), manifest.resolve(entry["pred"]), args)
            reports.append(rep)
            parts.append(f'{{"id":{json.dumps(entry["id"])},"report":{rep.to_json()}}}')
        micro = combine_reports(reports, "micro")
        macro = combine_reports(reports, "macro")
        _emit(
            f'{{"entries":[{",".join(parts)}],'
            f'"micro":{micro.to_json()},"macro":{macro.to_json()}}}',
            args.out,
        )
        return EXIT_OK
    if not args.gt or not args.pred:
        raise CliError(EXIT_BAD_INPUT, "need gt and pred paths (or --manifest)")
    report = _eval_pair(args.gt, args.pred, args)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    gt = _load_graph_checked(args.gt)
    jmap = _load_field_checked(args.junction_map)
    lmap = _load_field_checked(args.line_map)
    if not jmap.same_frame(lmap):
        raise CliError(EXIT_BAD_INPUT, "frame/stride mismatch between maps")
    thresholds = [float(t) for t in args.thresholds.split(",")]
    taus = [float(t) for t in args.tau_list.split(",")] if args.tau_list else [args.tau]
    gt_segments = graph_to_segments(gt, args.collinear_tol)
    scfg = _scorer_config(args)
    curves = []
    for tau in taus:
        ecfg = ExtractorConfig(
            tau=tau,
            epsilon=args.epsilon,
            max_junctions=args.max_junctions,
            plateau_mode=args.plateau_mode,
        )
        junctions = extract(jmap, ecfg)
        if len(junctions) < 2:
            pts = ",".join(f"[{t:.6f},1.000000,0.000000]" for t in thresholds)
            curves.append((tau, f'{{"points":[{pts}],"auc":0.000000}}'))
            continue
        scores = score_all_pairs(lmap, junctions, scfg, make_heuristic_scorer(scfg.quantile))
        curve = pr_curve(
            gt_segments, scores, junctions, thresholds, args.tolerance_frac, args.collinear_tol
        )
        curves.append((tau, curve.to_json()))
    if len(curves) == 1:
        _emit(curves[0][1], args.out)
    else:
        body = ",".join(f'{{"tau":{tau:.6f},"curve":{c}}}' for tau, c in curves)
        _emit(f'{{"curves":[{body}]}}', args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        os.makedirs(args.out_dir, exist_ok=True)
    except OSError as e:
        raise CliError(EXIT_IO, f"{args.out_dir}: {e}") from e
    for i in range(args.count):
        cfg = SceneConfig(
            width=args.width,
            height=args.height,
            n_segments=args.segments,
            min_len_frac=args.min_len_frac,
            junction_sigma=args.junction_sigma,
            line_sigma=args.line_sigma,
            noise_amp=args.noise_amp,
            seed=args.seed + i,
            gap_prob=args.gap_prob,
            stride=args.stride,
            allow_crossings=not args.no_crossings,
        )
        try:
            scene = generate(cfg)
        except GenerationError as e:
            raise CliError(EXIT_BAD_INPUT, str(e)) from e
        try:
            save_scene(scene, args.out_dir, f"scene_{cfg.seed:06d}")
        except OSError as e:
            raise CliError(EXIT_IO, str(e)) from e
    return EXIT_OK


def cmd_sample(args) -> int:
    fld = _load_field_checked(args.field)
    from .graph import Junction

    try:
        strip = lsam_sample(
            fld, Junction(args.ax, args.ay), Junction(args.bx, args.by), args.samples
        )
    except ValueError as e:
        raise CliError(EXIT_BAD_INPUT, str(e)) from e
    payload = {
        "channels": strip.channels,
        "samples": strip.length,
        "values": [[float(v) for v in row] for row in strip.values],
    }
    _emit(json.dumps(payload, separators=(",", ":")), args.out)
    return EXIT_OK


def cmd_score(args) -> int:
    fld = _load_field_checked(args.field)
    graph = _load_graph_checked(args.junctions)
    if graph.size < 2:
        raise CliError(EXIT_BAD_INPUT, "need at least 2 junctions to score pairs")
    scfg = _scorer_config(args)
    scores = score_all_pairs(
        fld, list(graph.junctions), scfg, make_heuristic_scorer(scfg.quantile)
    )
    try:
        save_matrix(scores.values, args.out)
    except OSError as e:
        raise CliError(EXIT_IO, f"{args.out}: {e}") from e
    return EXIT_OK


def _import_wireframe(data: dict, width: int | None, height: int | None) -> RawAnnotation:
    junc_key = "junc" if "junc" in data else "junctions" if "junctions" in data else None
    line_key = "lines" if "lines" in data else "segments" if "segments" in data else None
    if junc_key is None or line_key is None:
        raise CliError(
            EXIT_BAD_INPUT,
            f"unrecognized annotation layout; present keys: {sorted(data.keys())}",
        )
    w = width or data.get("width")
    h = height or data.get("height")
    if not w or not h:
        raise CliError(EXIT_BAD_INPUT, "frame size missing; pass --width/--height")
    junctions = [(float(x), float(y)) for x, y in data[junc_key]]
    segments = []
    for row in data[line_key]:
        if len(row) == 2:
            segments.append((int(row[0]), int(row[1])))
        elif len(row) == 4:
            # Endpoint quadruples: register endpoints as junctions.
            idx = []
            for x, y in ((row[0], row[1]), (row[2], row[3])):
                junctions.append((float(x), float(y)))
                idx.append(len(junctions) - 1)
            segments.append((idx[0], idx[1]))
        else:
            raise CliError(EXIT_BAD_INPUT, f"unrecognized line row of length {len(row)}")
    return RawAnnotation(int(w), int(h), junctions, segments)


def _import_york(path: str, width: int | None, height: int | None) -> RawAnnotation:
    from scipy.io import loadmat

    if not width or not height:
        raise CliError(EXIT_BAD_INPUT, "MAT imports need explicit --width/--height")
    try:
        mat = loadmat(path)
    except OSError as e:
        raise CliError(EXIT_IO, f"{path}: {e}") from e
    except Exception as e:
        raise CliError(EXIT_BAD_INPUT, f"{path}: not a readable MAT file: {e}") from e
    if "lines" not in mat:
        keys = [k for k in mat.keys() if not k.startswith("__")]
        raise CliError(EXIT_BAD_INPUT, f"MAT file lacks 'lines'; found {keys}")
    lines = np.asarray(mat["lines"], dtype=float)
    if lines.ndim != 2 or lines.shape[1] != 2 or lines.shape[0] % 2 != 0:
        raise CliError(EXIT_BAD_INPUT, f"'lines' has unexpected shape {lines.shape}")
    junctions = [(float(x), float(y)) for x, y in lines]
    segments = [(2 * i, 2 * i + 1) for i in range(len(junctions) // 2)]
    return RawAnnotation(int(width), int(height), junctions, segments)


def cmd_import(args) -> int:
    if args.format == "york":
        ann = _import_york(args.input, args.width, args.height)
    else:
        try:
            with open(args.input, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise CliError(EXIT_BAD_INPUT, f"{args.input}: {e}") from e
        except OSError as e:
            raise CliError(EXIT_IO, f"{args.input}: {e}") from e
        if args.format == "raw":
            try:
                ann = RawAnnotation(
                    int(data["width"]),
                    int(data["height"]),
                    [(float(x), float(y)) for x, y in data["junctions"]],
                    [(int(i), int(j)) for i, j in data["segments"]],
                )
            except (KeyError, TypeError, AnnotationError) as e:
                raise CliError(EXIT_BAD_INPUT, f"{args.input}: {e}") from e
        else:
            if not isinstance(data, dict):
                raise CliError(EXIT_BAD_INPUT, "expected a JSON object annotation")
            ann = _import_wireframe(data, args.width, args.height)
    _emit(annotation_to_json(ann), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppgraph", description="Point-pair graph line segment toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canonicalize", help="raw annotation JSON -> canonical graph JSON")
    p.add_argument("input", help="annotation file, or a directory for batch mode")
    p.add_argument("--out", help="output file (or directory in batch mode)")
    p.add_argument("--jobs", type=int, default=1)
    _add_canon_flags(p)
    p.set_defaults(func=cmd_canonicalize)

    p = sub.add_parser("detect", help="junction+line heatmaps -> graph JSON")
    p.add_argument("--junction-map", required=True)
    p.add_argument("--line-map", required=True)
    p.add_argument("--out")
    p.add_argument("--dump-scores", help="also write the pair score matrix (PPGF)")
    _add_extract_flags(p)
    _add_score_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="precision/recall of one graph against another")
    p.add_argument("gt", nargs="?")
    p.add_argument("pred", nargs="?")
    p.add_argument("--manifest", help="batch mode: manifest JSON of gt/pred pairs")
    p.add_argument("--tolerance-frac", type=float, default=0.01)
    p.add_argument("--collinear-tol", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="PR curves over adjacency thresholds")
    p.add_argument("--gt", required=True)
    p.add_argument("--junction-map", required=True)
    p.add_argument("--line-map", required=True)
    p.add_argument("--thresholds", default=",".join(str(t) for t in SWEEP_THRESHOLDS))
    p.add_argument("--tau-list", help="comma-separated junction thresholds (one curve each)")
    p.add_argument("--tolerance-frac", type=float, default=0.01)
    p.add_argument("--collinear-tol", type=float, default=2.0)
    p.add_argument("--out")
    _add_extract_flags(p)
    _add_score_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--segments", type=int, default=6)
    p.add_argument("--min-len-frac", type=float, default=0.10)
    p.add_argument("--junction-sigma", type=float, default=4.0)
    p.add_argument("--line-sigma", type=float, default=3.0)
    p.add_argument("--noise-amp", type=float, default=0.0)
    p.add_argument("--gap-prob", type=float, default=0.0)
    p.add_argument("--stride", type=float, default=4.0)
    p.add_argument("--no-crossings", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sample", help="bilinear strip along one junction pair")
    p.add_argument("--field", required=True)
    p.add_argument("--ax", type=float, required=True)
    p.add_argument("--ay", type=float, required=True)
    p.add_argument("--bx", type=float, required=True)
    p.add_argument("--by", type=float, required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("score", help="pair score matrix for a junction set")
    p.add_argument("--field", required=True, help="line heatmap (PPGF)")
    p.add_argument("--junctions", required=True, help="graph JSON providing the junctions")
    p.add_argument("--out", required=True, help="score matrix output (PPGF)")
    _add_score_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("import", help="dataset annotations -> raw annotation JSON")
    p.add_argument("input")
    p.add_argument("--format", choices=("raw", "wireframe", "york"), default="raw")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_import)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except GraphInvariantError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (AnnotationError, FieldFormatError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
