/**
 * PPGF binary codec: magic "PPGF" | u32 channels | u32 height | u32 width |
 * f32 stride | C*H*W little-endian f32 values. Stride 0 marks a non-spatial
 * payload (score matrices).
 */

import { Field, makeField } from "./types.js";

const MAGIC = 0x50504746; // "PPGF" big-endian read of the 4 magic bytes
const HEADER_BYTES = 20;

export function encodeField(field: Field): Buffer {
  return encodeRaw(field.values, field.channels, field.height, field.width, field.stride);
}

export function encodeMatrix(values: Float64Array | number[], size: number): Buffer {
  const f32 = Float32Array.from(values as ArrayLike<number>);
  if (f32.length !== size * size) {
    throw new Error(`matrix size mismatch: ${f32.length} values for K=${size}`);
  }
  return encodeRaw(f32, 1, size, size, 0.0);
}

function encodeRaw(
  values: Float32Array,
  channels: number,
  height: number,
  width: number,
  stride: number,
): Buffer {
  const buf = Buffer.alloc(HEADER_BYTES + 4 * values.length);
  buf.writeUInt32BE(MAGIC, 0);
  buf.writeUInt32LE(channels, 4);
  buf.writeUInt32LE(height, 8);
  buf.writeUInt32LE(width, 12);
  buf.writeFloatLE(stride, 16);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], HEADER_BYTES + 4 * i);
  }
  return buf;
}

interface RawPayload {
  channels: number;
  height: number;
  width: number;
  stride: number;
  values: Float32Array;
}

function decodeRaw(buf: Buffer): RawPayload {
  if (buf.length < HEADER_BYTES) throw new Error("truncated PPGF header");
  if (buf.readUInt32BE(0) !== MAGIC) throw new Error("bad PPGF magic");
  const channels = buf.readUInt32LE(4);
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const stride = buf.readFloatLE(16);
  const count = channels * height * width;
  if (buf.length !== HEADER_BYTES + 4 * count) {
    throw new Error(`truncated PPGF payload: ${buf.length} bytes for ${count} values`);
  }
  const values = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { channels, height, width, stride, values };
}

export function decodeField(buf: Buffer): Field {
  const raw = decodeRaw(buf);
  if (raw.stride <= 0) throw new Error("non-spatial PPGF payload; use decodeMatrix");
  return makeField(raw.values, raw.height, raw.width, raw.stride, raw.channels);
}

export function decodeMatrix(buf: Buffer): { size: number; values: Float64Array } {
  const raw = decodeRaw(buf);
  if (raw.stride !== 0) throw new Error("expected the stride-0 matrix sentinel");
  if (raw.channels !== 1 || raw.height !== raw.width) {
    throw new Error(`expected 1xKxK payload, got ${raw.channels}x${raw.height}x${raw.width}`);
  }
  return { size: raw.height, values: Float64Array.from(raw.values) };
}
