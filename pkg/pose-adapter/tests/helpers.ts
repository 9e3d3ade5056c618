export const WIDTH = 96;
export const HEIGHT = 64;
export const FOOT_Y = 40;
export const MARKER_RADIUS = 2;

/** Pack luma frames into a YUV4MPEG2 byte stream (4:2:0, gray chroma). */
export function encodeY4m(
  frames: Uint8Array[],
  width: number,
  height: number,
  fpsNum = 30,
  fpsDen = 1,
): Buffer {
  const header = Buffer.from(
    `YUV4MPEG2 W${width} H${height} F${fpsNum}:${fpsDen} Ip A1:1 C420jpeg\n`,
    "ascii",
  );
  const chroma = Buffer.alloc(2 * (width >> 1) * (height >> 1), 128);
  const marker = Buffer.from("FRAME\n", "ascii");
  const parts: Buffer[] = [header];
  for (const luma of frames) {
    if (luma.length !== width * height) {
      throw new Error(`luma plane must be ${width * height} bytes, got ${luma.length}`);
    }
    parts.push(marker, Buffer.from(luma), chroma);
  }
  return Buffer.concat(parts);
}

export function blankFrame(width = WIDTH, height = HEIGHT): Uint8Array {
  return new Uint8Array(width * height);
}

/**
 * Filled disc at an integer center. The pixel set is symmetric about
 * the center, so the blob centroid recovers (cx, cy) exactly.
 */
export function paintDisc(
  luma: Uint8Array,
  width: number,
  cx: number,
  cy: number,
  radius = MARKER_RADIUS,
  value = 255,
): void {
  const height = luma.length / width;
  for (let y = cy - radius; y <= cy + radius; y++) {
    for (let x = cx - radius; x <= cx + radius; x++) {
      if (x < 0 || x >= width || y < 0 || y >= height) continue;
      const dx = x - cx;
      const dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) luma[y * width + x] = value;
    }
  }
}

export interface PlantedContact {
  frame: number;
  foot: "left" | "right";
  x: number;
  y: number;
}

export interface WalkClip {
  frames: Uint8Array[];
  width: number;
  height: number;
  fps: number;
  /** Contacts the stride pipeline should recover from the clip. */
  contacts: PlantedContact[];
}

/**
 * Two bright toe markers walking in +x with alternating five-frame
 * phases: one foot holds an exact integer position (stationary in the
 * stride pipeline's sense) while the other advances 2 px per frame.
 * The feet stay 6 px apart at the closest approach, wide enough that
 * radius-2 discs never merge into one blob.
 */
export function makeWalkClip(nFrames: number): WalkClip {
  const leftAt = (i: number): number => {
    const block = Math.floor(i / 5);
    const phase = i % 5;
    if (block % 2 === 1) return 20 + 10 * ((block - 1) / 2) + 2 * (phase + 1);
    return 20 + 10 * (block / 2);
  };
  const rightAt = (i: number): number => {
    const block = Math.floor(i / 5);
    const phase = i % 5;
    if (block % 2 === 0) return 26 + 10 * (block / 2) + 2 * (phase + 1);
    return 26 + 10 * ((block + 1) / 2);
  };

  const frames: Uint8Array[] = [];
  for (let i = 0; i < nFrames; i++) {
    const luma = blankFrame();
    paintDisc(luma, WIDTH, leftAt(i), FOOT_Y);
    paintDisc(luma, WIDTH, rightAt(i), FOOT_Y);
    frames.push(luma);
  }

  // A hold becomes a contact at the frame of its first stationary
  // transition: frame 0 for the opening left hold, the last swing
  // frame (5k + 4) for every later hold.
  const contacts: PlantedContact[] = [];
  if (nFrames >= 2) {
    contacts.push({ frame: 0, foot: "left", x: leftAt(0), y: FOOT_Y });
  }
  for (let k = 0; 5 * k + 5 < nFrames; k++) {
    const frame = 5 * k + 4;
    if (k % 2 === 0) contacts.push({ frame, foot: "right", x: rightAt(frame), y: FOOT_Y });
    else contacts.push({ frame, foot: "left", x: leftAt(frame), y: FOOT_Y });
  }
  return { frames, width: WIDTH, height: HEIGHT, fps: 30, contacts };
}
