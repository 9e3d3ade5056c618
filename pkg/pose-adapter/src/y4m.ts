import { DecodeError } from "./errors.js";

export interface Y4mVideo {
  width: number;
  height: number;
  /** Frames per second from the container header (F numerator:denominator). */
  fps: number;
  colorspace: string;
  /** Luma plane of every frame, row-major, one byte per pixel. */
  frames: Uint8Array[];
}

const MAGIC = "YUV4MPEG2";

function chromaBytes(colorspace: string, width: number, height: number): number {
  // Chroma is irrelevant for pose tracking but must be skipped exactly.
  if (colorspace.startsWith("420")) return 2 * (width >> 1) * (height >> 1);
  if (colorspace.startsWith("422")) return 2 * (width >> 1) * height;
  if (colorspace.startsWith("444")) return 2 * width * height;
  if (colorspace === "mono") return 0;
  throw new DecodeError(`unsupported colorspace C${colorspace}`);
}

function readLine(data: Uint8Array, start: number): { text: string; next: number } {
  const nl = data.indexOf(0x0a, start);
  if (nl < 0) {
    throw new DecodeError("unterminated header line");
  }
  return { text: Buffer.from(data.subarray(start, nl)).toString("ascii"), next: nl + 1 };
}

/** Parse an uncompressed YUV4MPEG2 stream into per-frame luma planes. */
export function parseY4m(data: Uint8Array): Y4mVideo {
  const header = readLine(data, 0);
  const fields = header.text.split(" ");
  if (fields[0] !== MAGIC) {
    throw new DecodeError(`not a ${MAGIC} stream`);
  }

  let width = 0;
  let height = 0;
  let fps = 0;
  let colorspace = "420jpeg";
  for (const field of fields.slice(1)) {
    if (field === "") continue;
    const value = field.slice(1);
    switch (field[0]) {
      case "W":
        width = Number(value);
        break;
      case "H":
        height = Number(value);
        break;
      case "F": {
        const [num, den] = value.split(":").map(Number);
        if (!num || !den || num <= 0 || den <= 0) {
          throw new DecodeError(`bad frame rate ${field}`);
        }
        fps = num / den;
        break;
      }
      case "C":
        colorspace = value;
        break;
      case "I":
      case "A":
      case "X":
        break; // interlacing, aspect, comments: ignored
      default:
        throw new DecodeError(`unknown header field ${field}`);
    }
  }
  if (!Number.isInteger(width) || width <= 0 || !Number.isInteger(height) || height <= 0) {
    throw new DecodeError(`bad dimensions W${width} H${height}`);
  }
  if (fps <= 0) {
    throw new DecodeError("header is missing the frame rate");
  }

  const ySize = width * height;
  const cSize = chromaBytes(colorspace, width, height);
  const frames: Uint8Array[] = [];
  let pos = header.next;
  while (pos < data.length) {
    const mark = readLine(data, pos);
    if (!mark.text.startsWith("FRAME")) {
      throw new DecodeError(`frame ${frames.length}: expected FRAME marker, got "${mark.text}"`);
    }
    pos = mark.next;
    if (pos + ySize + cSize > data.length) {
      throw new DecodeError(`frame ${frames.length}: truncated plane data`);
    }
    frames.push(data.subarray(pos, pos + ySize));
    pos += ySize + cSize;
  }
  return { width, height, fps, colorspace, frames };
}
