import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { KeypointDocSchema } from "../src/schema.js";
import { encodeY4m, makeWalkClip } from "./helpers.js";

// The test script builds before running, so the bundled CLI is fresh.
const CLI = fileURLToPath(new URL("../dist/cli.js", import.meta.url));

const scratch = mkdtempSync(join(tmpdir(), "pose-adapter-cli-"));
afterAll(() => rmSync(scratch, { recursive: true, force: true }));

interface RunResult {
  status: number;
  stdout: string;
  stderr: string;
}

function runCli(...args: string[]): RunResult {
  try {
    const stdout = execFileSync(process.execPath, [CLI, ...args], { encoding: "utf-8" });
    return { status: 0, stdout, stderr: "" };
  } catch (err) {
    const failure = err as { status: number | null; stdout: string; stderr: string };
    return {
      status: failure.status ?? -1,
      stdout: String(failure.stdout ?? ""),
      stderr: String(failure.stderr ?? ""),
    };
  }
}

let videoPath: string;

beforeAll(() => {
  expect(existsSync(CLI), `missing build artifact ${CLI}; run npm run build`).toBe(true);
  const clip = makeWalkClip(10);
  videoPath = join(scratch, "walk.y4m");
  writeFileSync(videoPath, encodeY4m(clip.frames, clip.width, clip.height, clip.fps, 1));
});

describe("pose-adapter extract", () => {
  it("writes keypoints and reports the frame count", () => {
    const out = join(scratch, "ok.json");
    const run = runCli("extract", "--video", videoPath, "--out", out);
    expect(run.status).toBe(0);
    expect(run.stdout).toContain("10 frames at 30 fps");
    const doc = KeypointDocSchema.parse(JSON.parse(readFileSync(out, "utf-8")));
    expect(doc.frames).toHaveLength(10);
  });

  it("honors --source-id and --min-confidence", () => {
    const out = join(scratch, "tagged.json");
    const run = runCli(
      "extract", "--video", videoPath, "--out", out,
      "--source-id", "cam-7", "--min-confidence", "0.25",
    );
    expect(run.status).toBe(0);
    const doc = KeypointDocSchema.parse(JSON.parse(readFileSync(out, "utf-8")));
    expect(doc.source_id).toBe("cam-7");
  });

  it("exits 2 on usage errors", () => {
    expect(runCli("extract", "--video", videoPath).status).toBe(2); // --out missing
    expect(runCli().status).toBe(2);
    expect(runCli("transmogrify").status).toBe(2);
    const bad = runCli("extract", "--video", videoPath, "--out", join(scratch, "x.json"),
      "--min-confidence", "2");
    expect(bad.status).toBe(2);
    expect(bad.stderr).toContain("confidence floor");
  });

  it("exits 3 on undecodable input", () => {
    const garbled = join(scratch, "garbled.y4m");
    writeFileSync(garbled, Buffer.from("MPEG-TS nonsense"));
    const run = runCli("extract", "--video", garbled, "--out", join(scratch, "x.json"));
    expect(run.status).toBe(3);
    expect(run.stderr).toContain("error:");
  });

  it("exits 3 on an unknown model", () => {
    const run = runCli(
      "extract", "--video", videoPath, "--out", join(scratch, "x.json"),
      "--model", "does-not-exist",
    );
    expect(run.status).toBe(3);
    expect(run.stderr).toContain("unknown model");
  });

  it("exits 4 when the video file is missing", () => {
    const run = runCli(
      "extract", "--video", join(scratch, "no-such.y4m"), "--out", join(scratch, "x.json"),
    );
    expect(run.status).toBe(4);
  });
});
