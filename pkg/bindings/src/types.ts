/**
 * Shared data shapes mirrored from the core toolkit's interchange formats.
 */

/** C-channel float grid; values are C*H*W in (channel, row, column) order. */
export interface Field {
  channels: number;
  height: number;
  width: number;
  stride: number;
  values: Float32Array;
}

/** Junction list plus undirected edge index pairs (i < j, sorted). */
export interface Graph {
  width: number;
  height: number;
  junctions: Array<[number, number]>;
  edges: Array<[number, number]>;
}

/** Endpoint-style annotation prior to canonicalization. */
export interface RawAnnotation {
  width: number;
  height: number;
  junctions: Array<[number, number]>;
  segments: Array<[number, number]>;
}

export interface EvalReport {
  precision: number;
  recall: number;
  f1: number;
  matches: number;
  gtPixels: number;
  predPixels: number;
  tolerancePx: number;
}

export interface ScoreMatrix {
  /** Junctions in the canonical (y, x) order the rows/columns follow. */
  junctions: Array<[number, number]>;
  size: number;
  /** Row-major K*K symmetric confidences with a zero diagonal. */
  values: Float64Array;
}

export interface CanonicalizeOptions {
  beltWidth?: number;
  innerDist?: number;
  minAngleDeg?: number;
  mergeTol?: number;
}

export interface DetectOptions {
  tau?: number;
  epsilon?: number;
  maxJunctions?: number;
  plateauMode?: "strict" | "ge";
  samples?: number;
  quantile?: number;
  threshold?: number;
  block?: number;
}

export interface ScoreOptions {
  samples?: number;
  quantile?: number;
  block?: number;
}

export function makeField(
  values: Float32Array | number[],
  height: number,
  width: number,
  stride = 4.0,
  channels = 1,
): Field {
  const arr = values instanceof Float32Array ? values : Float32Array.from(values);
  if (arr.length !== channels * height * width) {
    throw new Error(
      `field size mismatch: ${arr.length} values for ${channels}x${height}x${width}`,
    );
  }
  if (stride <= 0) throw new Error(`stride must be positive, got ${stride}`);
  for (const v of arr) {
    if (!Number.isFinite(v)) throw new Error("field contains non-finite values");
  }
  return { channels, height, width, stride, values: arr };
}
