/**
 * Bindings for the ppgraph line segment toolkit.
 *
 * Exposes the pipeline-level operations (canonicalize, detect, evaluate,
 * scorePairs, lsamSample) over the core's CLI and file formats. Calls are
 * stateless and safe to issue concurrently.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { decodeMatrix, encodeField } from "./ppgf.js";
import { CoreError, runCli, withTempDir } from "./runner.js";
import {
  CanonicalizeOptions,
  DetectOptions,
  EvalReport,
  Field,
  Graph,
  RawAnnotation,
  ScoreMatrix,
  ScoreOptions,
} from "./types.js";

export { decodeField, decodeMatrix, encodeField, encodeMatrix } from "./ppgf.js";
export { CoreError } from "./runner.js";
export * from "./types.js";

function parseGraph(text: string): Graph {
  const data = JSON.parse(text);
  if (data.version !== 1) throw new CoreError(`unsupported graph version ${data.version}`, 2);
  return {
    width: data.width,
    height: data.height,
    junctions: data.junctions,
    edges: data.edges,
  };
}

/** Serialize in the core's bit-exact layout (sorted, 4-decimal coordinates). */
export function graphToJson(g: Graph): string {
  const order = g.junctions
    .map((p, i) => ({ p, i }))
    .sort((a, b) => a.p[1] - b.p[1] || a.p[0] - b.p[0]);
  const remap = new Map(order.map((e, next) => [e.i, next]));
  const junctions = order.map((e) => `[${e.p[0].toFixed(4)},${e.p[1].toFixed(4)}]`).join(",");
  const pairs = g.edges
    .map(([i, j]) => {
      const a = remap.get(i)!;
      const b = remap.get(j)!;
      return a < b ? [a, b] : [b, a];
    })
    .sort((x, y) => x[0] - y[0] || x[1] - y[1]);
  const edges = pairs.map(([i, j]) => `[${i},${j}]`).join(",");
  return (
    `{"version":1,"width":${g.width},"height":${g.height},` +
    `"junctions":[${junctions}],"edges":[${edges}]}`
  );
}

function writeGraph(dir: string, name: string, g: Graph): string {
  const path = join(dir, name);
  writeFileSync(path, graphToJson(g) + "\n");
  return path;
}

function writeField(dir: string, name: string, f: Field): string {
  const path = join(dir, name);
  writeFileSync(path, encodeField(f));
  return path;
}

function sameFrame(a: Field, b: Field): boolean {
  return a.height === b.height && a.width === b.width && a.stride === b.stride;
}

/** Clean a raw endpoint annotation into a canonical graph. */
export function canonicalize(annotation: RawAnnotation, options: CanonicalizeOptions = {}): Graph {
  return withTempDir((dir) => {
    const src = join(dir, "annotation.json");
    writeFileSync(src, JSON.stringify(annotation));
    const dst = join(dir, "graph.json");
    const args = ["canonicalize", src, "--out", dst];
    if (options.beltWidth !== undefined) args.push("--belt-width", String(options.beltWidth));
    if (options.innerDist !== undefined) args.push("--inner-dist", String(options.innerDist));
    if (options.minAngleDeg !== undefined) args.push("--min-angle", String(options.minAngleDeg));
    if (options.mergeTol !== undefined) args.push("--merge-tol", String(options.mergeTol));
    runCli(args);
    return parseGraph(readFileSync(dst, "utf-8"));
  });
}

/** Full detection: junction heatmap + line heatmap -> graph. */
export function detect(junctionMap: Field, lineMap: Field, options: DetectOptions = {}): Graph {
  if (junctionMap.channels !== 1 || lineMap.channels !== 1) {
    throw new CoreError("detect expects single-channel heatmaps", 2);
  }
  if (!sameFrame(junctionMap, lineMap)) {
    throw new CoreError(
      `frame/stride mismatch: ${junctionMap.height}x${junctionMap.width}@${junctionMap.stride} ` +
        `vs ${lineMap.height}x${lineMap.width}@${lineMap.stride}`,
      2,
    );
  }
  return withTempDir((dir) => {
    const jp = writeField(dir, "junctions.ppgf", junctionMap);
    const lp = writeField(dir, "lines.ppgf", lineMap);
    const out = join(dir, "graph.json");
    const args = ["detect", "--junction-map", jp, "--line-map", lp, "--out", out];
    if (options.tau !== undefined) args.push("--tau", String(options.tau));
    if (options.epsilon !== undefined) args.push("--epsilon", String(options.epsilon));
    if (options.maxJunctions !== undefined)
      args.push("--max-junctions", String(options.maxJunctions));
    if (options.plateauMode !== undefined) args.push("--plateau-mode", options.plateauMode);
    if (options.samples !== undefined) args.push("--samples", String(options.samples));
    if (options.quantile !== undefined) args.push("--quantile", String(options.quantile));
    if (options.threshold !== undefined) args.push("--threshold", String(options.threshold));
    if (options.block !== undefined) args.push("--block", String(options.block));
    runCli(args);
    return parseGraph(readFileSync(out, "utf-8"));
  });
}

/** Pixel precision/recall of a predicted graph against a reference graph. */
export function evaluate(gt: Graph, pred: Graph, toleranceFrac = 0.01): EvalReport {
  if (gt.width !== pred.width || gt.height !== pred.height) {
    throw new CoreError(
      `frame mismatch: ${gt.width}x${gt.height} vs ${pred.width}x${pred.height}`,
      2,
    );
  }
  const out = withTempDir((dir) => {
    const g = writeGraph(dir, "gt.json", gt);
    const p = writeGraph(dir, "pred.json", pred);
    return runCli(["eval", g, p, "--tolerance-frac", String(toleranceFrac)]);
  });
  const data = JSON.parse(out);
  return {
    precision: data.precision,
    recall: data.recall,
    f1: data.f1,
    matches: data.matches,
    gtPixels: data.gt_pixels,
    predPixels: data.pred_pixels,
    tolerancePx: data.tolerance_px,
  };
}

/**
 * Pair-connectivity confidences for a junction set over a line heatmap.
 * Rows/columns follow the returned canonical junction order; coordinates are
 * quantized to the interchange format's 1e-4 grid.
 */
export function scorePairs(
  lineMap: Field,
  junctions: Array<[number, number]>,
  options: ScoreOptions = {},
): ScoreMatrix {
  if (junctions.length < 2) {
    throw new CoreError("need at least 2 junctions to score pairs", 2);
  }
  const width = Math.round(lineMap.width * lineMap.stride);
  const height = Math.round(lineMap.height * lineMap.stride);
  const holder: Graph = { width, height, junctions, edges: [] };
  const { matrix, ordered } = withTempDir((dir) => {
    const fieldPath = writeField(dir, "lines.ppgf", lineMap);
    const graphPath = writeGraph(dir, "junctions.json", holder);
    const out = join(dir, "scores.ppgf");
    const args = ["score", "--field", fieldPath, "--junctions", graphPath, "--out", out];
    if (options.samples !== undefined) args.push("--samples", String(options.samples));
    if (options.quantile !== undefined) args.push("--quantile", String(options.quantile));
    if (options.block !== undefined) args.push("--block", String(options.block));
    runCli(args);
    return {
      matrix: decodeMatrix(readFileSync(out)),
      ordered: parseGraph(readFileSync(graphPath, "utf-8")).junctions,
    };
  });
  return { junctions: ordered, size: matrix.size, values: matrix.values };
}

/** Equidistant bilinear strip along one junction pair; returns C rows of L samples. */
export function lsamSample(
  field: Field,
  a: [number, number],
  b: [number, number],
  samples = 64,
): number[][] {
  const out = withTempDir((dir) => {
    const fieldPath = writeField(dir, "field.ppgf", field);
    return runCli([
      "sample",
      "--field", fieldPath,
      "--ax", String(a[0]),
      "--ay", String(a[1]),
      "--bx", String(b[0]),
      "--by", String(b[1]),
      "--samples", String(samples),
    ]);
  });
  const data = JSON.parse(out);
  return data.values;
}
