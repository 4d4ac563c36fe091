/**
 * Subprocess plumbing for the core CLI.
 *
 * The binding talks to the core exclusively through its public command-line
 * interface and file formats, so results are identical to direct CLI use by
 * construction. Set PPGRAPH_CLI to override the executable (e.g. a venv
 * path or "python3 -m ppgraph.cli").
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class CoreError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number,
  ) {
    super(message);
    this.name = "CoreError";
  }
}

function command(): { exe: string; baseArgs: string[] } {
  const raw = process.env.PPGRAPH_CLI ?? "ppgraph";
  const parts = raw.split(" ").filter((p) => p.length > 0);
  return { exe: parts[0], baseArgs: parts.slice(1) };
}

export function runCli(args: string[]): string {
  const { exe, baseArgs } = command();
  const res = spawnSync(exe, [...baseArgs, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (res.error) {
    throw new CoreError(`failed to launch ${exe}: ${res.error.message}`, -1);
  }
  if (res.status !== 0) {
    const detail = (res.stderr ?? "").trim() || `exit code ${res.status}`;
    const kind =
      res.status === 2 ? "invalid input" : res.status === 3 ? "I/O failure" : "core failure";
    throw new CoreError(`${kind}: ${detail}`, res.status ?? -1);
  }
  return res.stdout;
}

export function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "ppgraph-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
