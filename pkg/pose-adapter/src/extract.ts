import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { ConfigError, ModelError } from "./errors.js";
import { createEstimator, type PoseEstimator } from "./estimators.js";
import { KeypointDocSchema, type KeypointDoc, type KeypointJoint } from "./schema.js";
import { parseY4m, type Y4mVideo } from "./y4m.js";

/**
 * Landmark names that mean "tip of the foot" across the pose models we
 * care about, mapped onto the names the stride pipeline reads.
 */
const TOE_ALIASES: ReadonlyMap<string, string> = new Map([
  ["left_toe", "left_toe"],
  ["right_toe", "right_toe"],
  ["left_foot_index", "left_toe"],
  ["right_foot_index", "right_toe"],
  ["left_big_toe", "left_toe"],
  ["right_big_toe", "right_toe"],
]);

const ABSENT: KeypointJoint = { x: 0.0, y: 0.0, c: 0.0 };

export interface ExtractOptions {
  /** Joints below this confidence are kept but zeroed out. */
  confidenceFloor?: number;
  /** Recorded in the document; defaults to the video file stem. */
  sourceId?: string;
}

export interface AdapterConfig extends ExtractOptions {
  videoPath: string;
  outputPath: string;
  model?: string;
  threshold?: number;
}

/**
 * Run the estimator over every frame and assemble the keypoint document
 * the stride pipeline ingests. Every frame index appears exactly once
 * and both toes are always present; a frame the model cannot read gets
 * zero-confidence placeholders instead of a gap.
 */
export function extractKeypoints(
  video: Y4mVideo,
  estimator: PoseEstimator,
  options: ExtractOptions = {},
): KeypointDoc {
  const floor = options.confidenceFloor ?? 0.0;
  if (floor < 0 || floor > 1 || Number.isNaN(floor)) {
    throw new ConfigError(`confidence floor must be in 0..1, got ${floor}`);
  }
  const fps = video.fps;
  const frames: KeypointDoc["frames"] = [];
  for (let i = 0; i < video.frames.length; i++) {
    const frame = {
      index: i,
      width: video.width,
      height: video.height,
      luma: video.frames[i]!,
    };
    let landmarks;
    try {
      landmarks = estimator.estimate(frame);
    } catch (err) {
      const detail = err instanceof Error ? err.message : String(err);
      throw new ModelError(`model "${estimator.name}" failed on frame ${i}: ${detail}`);
    }
    const joints: Record<string, KeypointJoint> = {};
    for (const mark of landmarks ?? []) {
      const name = TOE_ALIASES.get(mark.name) ?? mark.name;
      const c = mark.confidence >= floor ? mark.confidence : 0.0;
      const joint: KeypointJoint = { x: mark.x, y: mark.y, c };
      const prior = joints[name];
      if (prior === undefined || prior.c < joint.c) joints[name] = joint;
    }
    joints["left_toe"] ??= ABSENT;
    joints["right_toe"] ??= ABSENT;
    frames.push({ frame: i, t: i / fps, joints: sortedJoints(joints) });
  }
  const doc: KeypointDoc = {
    fps,
    source_id: options.sourceId ?? "pose-adapter",
    frames,
  };
  return KeypointDocSchema.parse(doc);
}

function sortedJoints(joints: Record<string, KeypointJoint>): Record<string, KeypointJoint> {
  const out: Record<string, KeypointJoint> = {};
  for (const name of Object.keys(joints).sort()) out[name] = joints[name]!;
  return out;
}

/** Canonical serialization; byte-stable given the same document. */
export function formatDoc(doc: KeypointDoc): string {
  return JSON.stringify(doc, null, 2) + "\n";
}

export function runExtract(config: AdapterConfig): KeypointDoc {
  const estimator = createEstimator(config.model ?? "marker", {
    ...(config.threshold !== undefined ? { threshold: config.threshold } : {}),
  });
  const data = readFileSync(config.videoPath);
  const video = parseY4m(data);
  const sourceId = config.sourceId ?? stem(config.videoPath);
  const doc = extractKeypoints(video, estimator, {
    ...(config.confidenceFloor !== undefined ? { confidenceFloor: config.confidenceFloor } : {}),
    sourceId,
  });
  writeFileSync(config.outputPath, formatDoc(doc));
  return doc;
}

function stem(path: string): string {
  const name = basename(path);
  const dot = name.lastIndexOf(".");
  return dot > 0 ? name.slice(0, dot) : name;
}
