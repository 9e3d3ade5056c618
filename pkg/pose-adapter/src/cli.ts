#!/usr/bin/env node
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { ConfigError, DecodeError, ModelError } from "./errors.js";
import { runExtract } from "./extract.js";

function isErrno(err: unknown): err is NodeJS.ErrnoException {
  return err instanceof Error && typeof (err as NodeJS.ErrnoException).code === "string";
}

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName("pose-adapter")
    .usage("$0 <command>")
    .command(
      "extract",
      "read a Y4M clip and write keypoints for the stride pipeline",
      (cmd) =>
        cmd
          .option("video", { type: "string", demandOption: true, describe: "input .y4m clip" })
          .option("out", { type: "string", demandOption: true, describe: "keypoints JSON to write" })
          .option("model", { type: "string", default: "marker", describe: "pose model to run" })
          .option("min-confidence", {
            type: "number",
            default: 0.0,
            describe: "zero out joints below this confidence",
          })
          .option("source-id", { type: "string", describe: "source tag recorded in the output" })
          .option("threshold", { type: "number", describe: "marker luma threshold (1..255)" }),
      (args) => {
        const doc = runExtract({
          videoPath: args.video,
          outputPath: args.out,
          model: args.model,
          confidenceFloor: args.minConfidence,
          ...(args.sourceId !== undefined ? { sourceId: args.sourceId } : {}),
          ...(args.threshold !== undefined ? { threshold: args.threshold } : {}),
        });
        process.stdout.write(`${doc.frames.length} frames at ${doc.fps} fps -> ${args.out}\n`);
      },
    )
    .demandCommand(1, "a command is required")
    .strict()
    .fail(false)
    .exitProcess(false);

  try {
    await parser.parseAsync();
    return 0;
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error: ${message}\n`);
    if (err instanceof DecodeError || err instanceof ModelError) return 3;
    if (err instanceof ConfigError) return 2;
    if (isErrno(err)) return 4;
    // yargs reports usage and validation problems as plain errors
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
