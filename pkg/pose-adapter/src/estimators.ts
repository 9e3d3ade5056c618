import { ConfigError, ModelError } from "./errors.js";

export interface LumaFrame {
  index: number;
  width: number;
  height: number;
  luma: Uint8Array;
}

export interface Landmark {
  name: string;
  x: number;
  y: number;
  confidence: number;
}

/**
 * A per-frame 2D pose model. Returning null means the model found no
 * person in the frame; the extractor keeps the record with zero
 * confidence so the stream stays index-complete.
 */
export interface PoseEstimator {
  readonly name: string;
  estimate(frame: LumaFrame): Landmark[] | null;
}

export interface MarkerTrackerOptions {
  /** Luma level a pixel must reach to count as marker material. */
  threshold?: number;
  /** Components smaller than this many pixels are noise. */
  minArea?: number;
}

interface Blob {
  area: number;
  sumX: number;
  sumY: number;
  sumLuma: number;
}

/**
 * Deterministic stand-in for a learned pose model: tracks the two
 * brightest blobs as the runner's toes. Exists so the adapter and its
 * wire format can be exercised end to end without model weights; it
 * reports the real models' landmark names so the toe mapping runs.
 */
export class MarkerTracker implements PoseEstimator {
  readonly name = "marker";
  private readonly threshold: number;
  private readonly minArea: number;

  constructor(options: MarkerTrackerOptions = {}) {
    this.threshold = options.threshold ?? 200;
    this.minArea = options.minArea ?? 4;
    if (this.threshold < 1 || this.threshold > 255) {
      throw new ConfigError(`marker threshold must be in 1..255, got ${this.threshold}`);
    }
  }

  estimate(frame: LumaFrame): Landmark[] | null {
    const blobs = this.components(frame);
    if (blobs.length < 2) return null;
    blobs.sort((a, b) => b.area - a.area);
    const toes = blobs.slice(0, 2).map((b) => ({
      x: b.sumX / b.area,
      y: b.sumY / b.area,
      confidence: b.sumLuma / (b.area * 255),
    }));
    // Image-left marker is the left foot; the synthetic scenes and the
    // camera setup both keep the runner facing the same way.
    toes.sort((a, b) => a.x - b.x);
    return [
      { name: "left_foot_index", ...toes[0]! },
      { name: "right_foot_index", ...toes[1]! },
    ];
  }

  private components(frame: LumaFrame): Blob[] {
    const { width, height, luma } = frame;
    const seen = new Uint8Array(luma.length);
    const blobs: Blob[] = [];
    const stack: number[] = [];
    for (let start = 0; start < luma.length; start++) {
      if (seen[start] || luma[start]! < this.threshold) continue;
      const blob: Blob = { area: 0, sumX: 0, sumY: 0, sumLuma: 0 };
      stack.push(start);
      seen[start] = 1;
      while (stack.length > 0) {
        const at = stack.pop()!;
        const x = at % width;
        const y = (at / width) | 0;
        const value = luma[at]!;
        blob.area += 1;
        blob.sumX += x;
        blob.sumY += y;
        blob.sumLuma += value;
        for (const [dx, dy] of [[1, 0], [-1, 0], [0, 1], [0, -1]] as const) {
          const nx = x + dx;
          const ny = y + dy;
          if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
          const next = ny * width + nx;
          if (!seen[next] && luma[next]! >= this.threshold) {
            seen[next] = 1;
            stack.push(next);
          }
        }
      }
      if (blob.area >= this.minArea) blobs.push(blob);
    }
    return blobs;
  }
}

export type EstimatorFactory = (options: MarkerTrackerOptions) => PoseEstimator;

const REGISTRY = new Map<string, EstimatorFactory>([
  ["marker", (options) => new MarkerTracker(options)],
]);

export function createEstimator(model: string, options: MarkerTrackerOptions = {}): PoseEstimator {
  const factory = REGISTRY.get(model);
  if (!factory) {
    const known = [...REGISTRY.keys()].sort().join(", ");
    throw new ModelError(`unknown model "${model}" (available: ${known})`);
  }
  return factory(options);
}

export function registerEstimator(model: string, factory: EstimatorFactory): void {
  REGISTRY.set(model, factory);
}
